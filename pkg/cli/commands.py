# file: cli/commands.py

"""
Subcommand implementations. Each returns its report object and an exit status; printing
and logging setup stay in ``main.py``.
"""

import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple

from analysis.bounds import applicable_bound, center_diameter, early_stop_floor, memory_table, stabilization_table
from analysis.connectivity import ConnectivityClass, classify
from analysis.invariants import check_sap_trace
from cli.config import ExperimentConfig
from cli.report import Report, RunReport
from clocks.minmax import MinMaxClock, minmax_t1_bound
from clocks.sap import GrowthFunction, SapClock, SapConfig, SapFixedClock, sap_bound_uniform
from data_io import read_schedule, states_from_records, write_schedule, write_trace
from dynamic_graph import DynamicGraph
from engine import Execution, ExecutionTrace, detect_sync, measure_s0_t0, run, summary, z_metrics
from errors import ConfigError, HorizonTooShortError, InvalidInputError
from scenarios import SCENARIOS, Scenario, build_scenario, seeded_initial_states

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

# state records do not depend on P, M or g
_RECORDERS = {"minmax": MinMaxClock(), "sap": SapClock(SapConfig(1, GrowthFunction.successor())),
              "sap-fixed": SapFixedClock(1, 1)}


def parse_params(pairs: Sequence[str]) -> Dict[str, object]:
    """``key=value`` pairs; values that look like integers become integers."""
    params: Dict[str, object] = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise InvalidInputError(f"scenario parameter must be key=value, got {pair!r}")
        try:
            params[key.strip()] = int(value)
        except ValueError:
            params[key.strip()] = value.strip()
    return params


def _h0_max(trace: ExecutionTrace) -> int:
    return max(s.h for s in trace.states[0])


def evaluate_run(trace: ExecutionTrace, cls: Optional[ConnectivityClass],
                 scenario: Optional[Scenario] = None) -> RunReport:
    """Verdict, scenario expectations and the bound whose hypothesis ``cls`` satisfies."""
    verdict = detect_sync(trace)
    record = summary(trace, verdict)
    report = RunReport(seed=trace.execution.seed, verdict=str(verdict), stabilization_round=verdict.round)
    report.measured = {k: record[k] for k in ("max_clock", "max_factor", "max_view_size") if k in record}
    if scenario is not None:
        report.problems.extend(scenario.verify(trace))
    if cls is None:
        return report

    algorithm, dg = trace.algorithm, trace.execution.dynamic_graph
    is_minmax = isinstance(algorithm, MinMaxClock)
    h0 = _h0_max(trace) if is_minmax else 0
    m0 = 1 if is_minmax else max(trace.factors(0))

    bound = applicable_bound(algorithm, dg, cls, h0_max=h0, m0_max=m0)
    if bound is not None:
        report.bound, report.bound_hypothesis = bound.value, bound.hypothesis
    elif is_minmax and cls.rooted_with_delay is not None:
        try:
            m = measure_s0_t0(trace, cls.kernel, cls.rooted_with_delay)
        except HorizonTooShortError as e:
            report.diagnostic = f"horizon too short: {e}"
            return report
        t1 = minmax_t1_bound(dg.n, cls.rooted_with_delay, len(cls.kernel), h0, m.s0, m.t0)
        report.measured.update({"s0": m.s0, "t0": m.t0, "c0": m.c0})
        report.bound, report.bound_hypothesis = t1, "rooted, measured t1"

    if isinstance(algorithm, SapClock) and cls.uniformly_rooted_with_delay is not None \
            and not cls.diameter.is_finite and algorithm.cfg.growth.is_inflationary:
        cfg = algorithm.cfg
        try:
            z = z_metrics(trace, cls.center, cfg.period)
        except HorizonTooShortError as e:
            report.diagnostic = f"horizon too short: {e}"
            return report
        dz = center_diameter(dg, cls)
        uniform = sap_bound_uniform(cls.radius.value, dz, cfg.period, cfg.growth, m_z=z.m_z,
                                    m0_max=m0, t0_z=z.t0_z)
        report.measured.update({"M_Z": z.m_z, "t0_Z": z.t0_z, "t2": uniform.t2})
        if not verdict.synchronized or verdict.round > uniform.t2:
            report.problems.append(f"stabilization {verdict.round} exceeds measured t2 = {uniform.t2}")

    if report.bound is not None:
        report.bound_satisfied = verdict.synchronized and verdict.round <= report.bound
    return report


def _resolve_schedule(config: ExperimentConfig) -> Tuple[DynamicGraph, Dict[str, List], Optional[Scenario]]:
    if config.scenario is not None:
        scenario = build_scenario(config.scenario, **config.scenario_params)
        return scenario.dynamic_graph, {}, scenario
    dg, init = read_schedule(config.schedule)
    return dg, init, None


def _initial_states(config: ExperimentConfig, algorithm, n: int, seed: int, file_init: Dict[str, List],
                    scenario: Optional[Scenario]) -> Tuple:
    if config.init == "random":
        return seeded_initial_states(algorithm, n, seed)
    if config.init == "preset":
        if scenario is not None and algorithm.name in scenario.suggested_init:
            return scenario.suggested_init[algorithm.name]
        if algorithm.name in file_init:
            return states_from_records(algorithm, file_init[algorithm.name])
        return seeded_initial_states(algorithm, n, seed)
    _, init = read_schedule(config.init)
    if algorithm.name not in init:
        raise ConfigError(f"{config.init} has no 'init {algorithm.name}:' section")
    return states_from_records(algorithm, init[algorithm.name])


def cmd_run(config: ExperimentConfig) -> Tuple[Report, int]:
    """Execute ``reps`` seeded runs, write traces and the summary, and check the applicable bounds."""
    dg, file_init, scenario = _resolve_schedule(config)
    algorithm = config.build_algorithm()
    cls = classify(dg, config.delta_cap) if dg.is_periodic else (scenario.connectivity if scenario else None)
    horizon = config.horizon or (scenario.horizon if scenario else config.default_horizon(dg.n))
    full_horizon = scenario is not None and scenario.full_horizon
    report = Report(title=f"{algorithm.name} on {dg.name or 'schedule'}",
                    header={**algorithm.parameters(), "schedule": dg.name, "n": dg.n, "horizon": horizon})
    if scenario is not None and algorithm.parameters() != scenario.algorithm.parameters():
        logger.warning(f"{algorithm.parameters()} differs from scenario {scenario.name!r} "
                       f"({scenario.algorithm.parameters()}); its closed-form checks are skipped")
        report.header["scenario_checks"] = "skipped"

    for k in range(config.reps):
        seed = config.seed + k
        states = _initial_states(config, algorithm, dg.n, seed, file_init, scenario)
        execution = Execution(algorithm, dg, states, horizon, seed=seed,
                              early_stop=config.early_stop and not full_horizon,
                              min_stop_round=early_stop_floor(algorithm, dg, cls, states))
        trace = run(execution)
        run_report = evaluate_run(trace, cls, scenario)
        report.runs.append(run_report)
        if config.out and config.verbosity >= 1:
            write_trace(trace, os.path.join(config.out, f"trace-{seed}.jsonl"), config.verbosity,
                        summary=summary(trace))
        logger.info(f"seed {seed}: {run_report.verdict}")

    if config.out:
        os.makedirs(config.out, exist_ok=True)
        with open(os.path.join(config.out, "summary.jsonl"), "w", encoding="utf-8") as f:
            f.write(report.to_jsonl())
    return report, EXIT_OK if report.passed else EXIT_FAILED


def cmd_analyze(schedule_path: str, delta_cap: int) -> Tuple[Dict[str, object], int]:
    dg, _ = read_schedule(schedule_path)
    cls = classify(dg, delta_cap)
    record = {"schedule": dg.name, "n": dg.n, "prefix_length": dg.prefix_length,
              "cycle_length": dg.cycle_length, **cls.to_record()}
    return record, EXIT_OK


def cmd_verify(name: str, params: Dict[str, object], horizon: Optional[int] = None) -> Tuple[Report, int]:
    """Run a scenario on its preset states and check its closed forms, verdict and trace invariants."""
    scenario = build_scenario(name, **params)
    trace = run(scenario.execution(horizon=horizon, early_stop=True))
    verdict = detect_sync(trace)
    problems = scenario.verify(trace)
    algorithm = scenario.algorithm
    if not isinstance(algorithm, MinMaxClock):
        cls = scenario.connectivity
        diameter = cls.diameter.value if cls is not None and cls.diameter.is_finite else None
        for check, violations in check_sap_trace(trace, diameter, max_span=4 * scenario.n).items():
            problems.extend(f"{check}: {v}" for v in violations[:5])
    report = Report(title=f"verify {name}", header={"scenario": name, **scenario.parameters,
                                                    "rounds": trace.last_round})
    report.runs.append(RunReport(seed=None, verdict=str(verdict), stabilization_round=verdict.round,
                                 problems=problems))
    return report, EXIT_OK if report.passed else EXIT_FAILED


def cmd_scenario_list() -> List[str]:
    width = max(len(name) for name in SCENARIOS)
    lines = []
    for name in sorted(SCENARIOS):
        entry = SCENARIOS[name]
        defaults = " ".join(f"{k}={v}" for k, v in entry.defaults.items())
        lines.append(f"{name.ljust(width)}  {entry.description}  [{defaults}]")
    return lines


def cmd_scenario_export(name: str, params: Dict[str, object], file_path: str) -> int:
    """Write a scenario's finite schedule with one init section per preset algorithm."""
    scenario = build_scenario(name, **params)
    dg = scenario.schedule_for_export()
    init = {name: [_RECORDERS[name].state_record(s, verbosity=2) for s in states]
            for name, states in scenario.suggested_init.items()}
    write_schedule(dg, file_path, init)
    return EXIT_OK


def cmd_bounds(diameter: int, period: int, growth: str, h0: int = 0, radius: Optional[int] = None,
               center_diam: Optional[int] = None, bound: Optional[int] = None, n: Optional[int] = None,
               m0_max: int = 1) -> Tuple[List[Dict[str, object]], int]:
    g = GrowthFunction.parse(growth)
    bound = bound if bound is not None else diameter
    rows = [dict(r.to_record(), table="stabilization")
            for r in stabilization_table(diameter, period, g, h0, radius, center_diam, bound, n, m0_max)]
    rows += [dict(r.to_record(), table="memory") for r in memory_table(period, bound, g, m0_max, diameter)]
    return rows, EXIT_OK
