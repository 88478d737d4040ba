# file: analysis/invariants.py

"""
Trace properties of the MinMax and SAP executions, checked by replaying a recorded trace
against its dynamic graph. Every checker returns a list of human-readable violations;
an empty list means the property held on every checked round.
"""

import logging
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from clocks.minmax import output_clock
from dynamic_graph import in_neighbors
from engine import ExecutionTrace, ZMetrics

logger = logging.getLogger(__name__)


def _clock_array(trace: ExecutionTrace, t: int) -> np.ndarray:
    return np.array(trace.clocks(t), dtype=np.int64)


def _factor_array(trace: ExecutionTrace, t: int) -> np.ndarray:
    return np.array(trace.factors(t), dtype=np.int64)


def _synchronized(trace: ExecutionTrace, t: int, period: int) -> bool:
    return len({c % period for c in trace.clocks(t)}) == 1


def _interval_matrices(trace: ExecutionTrace, max_span: Optional[int]) -> Iterator[Tuple[int, int, np.ndarray]]:
    """``(s, t, G(s:t))`` adjacency matrices for ``1 <= s <= t <= last`` with ``t - s < max_span``."""
    dg, last = trace.execution.dynamic_graph, trace.last_round
    for s in range(1, last + 1):
        acc = dg.digraph_at(s).matrix.astype(np.int64)
        t = s
        while True:
            yield s, t, acc > 0
            t += 1
            if t > last or (max_span is not None and t - s + 1 > max_span):
                break
            acc = ((acc @ dg.digraph_at(t).matrix.astype(np.int64)) > 0).astype(np.int64)


# -- MinMax ---------------------------------------------------------------------------------

def check_view_semantics(trace: ExecutionTrace) -> List[str]:
    """``(v, d)`` is in ``V_i(t)`` iff some ``j`` in ``In_i(t-d+1 : t)`` had ``c_j(t-d) = v - d``.

    Checked for every ``0 <= d <= t-1``; depth ``t`` entries may still be initial garbage.
    """
    dg = trace.execution.dynamic_graph
    problems = []
    for t in range(1, trace.last_round + 1):
        for i, state in enumerate(trace.states[t]):
            for d in range(t):
                past = trace.min_clocks(t - d)
                oracle = {past[j] + d for j in in_neighbors(dg, i, t - d + 1, t)}
                held = {v for v, depth in state.view if depth == d}
                if held != oracle:
                    problems.append(f"node {i} round {t} depth {d}: view values {sorted(held)}, "
                                    f"interval oracle {sorted(oracle)}")
    return problems


def check_min_clock_slack(trace: ExecutionTrace) -> List[str]:
    """``c_i(t+1) <= c_i(t) + 1``, i.e. ``c_i(t) - t`` never increases."""
    problems = []
    for t in range(1, trace.last_round):
        now, nxt = trace.min_clocks(t), trace.min_clocks(t + 1)
        for i in range(trace.n):
            if nxt[i] > now[i] + 1:
                problems.append(f"node {i}: c rose from {now[i]} at round {t} to {nxt[i]}")
    return problems


def check_minmax_step_fields(trace: ExecutionTrace) -> List[str]:
    """``h`` advances by one and ``C`` is the largest view value of depth at most ``h/2``."""
    problems = []
    for t in range(1, trace.last_round + 1):
        for i, (before, after) in enumerate(zip(trace.states[t - 1], trace.states[t])):
            if after.h != before.h + 1:
                problems.append(f"node {i} round {t}: h went from {before.h} to {after.h}")
            if after.clock_out != output_clock(after.view, after.h):
                problems.append(f"node {i} round {t}: C={after.clock_out} disagrees with its view")
    return problems


def check_kernel_dominance(trace: ExecutionTrace, kernel: Iterable[int], t0: int) -> List[str]:
    """From ``t0`` on, kernel min-clocks agree and no min-clock exceeds them."""
    kernel = sorted(kernel)
    problems = []
    for t in range(t0, trace.last_round + 1):
        c = trace.min_clocks(t)
        kernel_values = {c[j] for j in kernel}
        if len(kernel_values) > 1:
            problems.append(f"round {t}: kernel min-clocks differ {sorted(kernel_values)}")
        bound = min(kernel_values)
        high = [i for i in range(trace.n) if c[i] > bound]
        if high:
            problems.append(f"round {t}: nodes {high} have min-clocks above the kernel value {bound}")
    return problems


def check_minmax_limit(trace: ExecutionTrace, c0: int, t1: int) -> List[str]:
    """From ``t1`` on every output clock equals ``c0 + t``."""
    problems = []
    for t in range(t1, trace.last_round + 1):
        off = [i for i, c in enumerate(trace.clocks(t)) if c != c0 + t]
        if off:
            problems.append(f"round {t}: nodes {off} differ from c0 + t = {c0 + t}")
    return problems


# -- SAP ------------------------------------------------------------------------------------

def check_persistence(trace: ExecutionTrace) -> List[str]:
    """Once all clocks agree modulo ``P`` they agree at every later round."""
    period = trace.algorithm.cfg.period
    for s in range(trace.last_round + 1):
        if _synchronized(trace, s, period):
            broken = [t for t in range(s + 1, trace.last_round + 1) if not _synchronized(trace, t, period)]
            if broken:
                return [f"synchronized at round {s} but not at rounds {broken[:5]}"]
            return []
    return []


def check_factor_monotone(trace: ExecutionTrace) -> List[str]:
    problems = []
    for t in range(1, trace.last_round + 1):
        before, after = trace.factors(t - 1), trace.factors(t)
        for i in range(trace.n):
            if after[i] < before[i]:
                problems.append(f"node {i}: M fell from {before[i]} to {after[i]} at round {t}")
    return problems


def check_propagation(trace: ExecutionTrace, max_span: Optional[int] = None) -> List[str]:
    """For every edge ``(i, j)`` of ``G(s:t)``: ``C_j(t) <= C_i(s-1) + t - s + 1``."""
    problems = []
    for s, t, reach in _interval_matrices(trace, max_span):
        before, after = _clock_array(trace, s - 1), _clock_array(trace, t)
        bad = reach & (after[None, :] > before[:, None] + (t - s + 1))
        for i, j in zip(*np.nonzero(bad)):
            problems.append(f"edge ({i},{j}) of G({s}:{t}): C_j(t)={after[j]} > C_i(s-1)+{t - s + 1}={before[i] + t - s + 1}")
    return problems


def check_step_dichotomy(trace: ExecutionTrace) -> List[str]:
    """Each step sets ``C_i = 1 + C_jmin`` or wraps to 0 from ``C_i = C_jmin = P M_i - 1``."""
    period = trace.algorithm.cfg.period
    problems = []
    for t in range(1, trace.last_round + 1):
        prev_c, prev_m = trace.clocks(t - 1), trace.factors(t - 1)
        for i, (c, info) in enumerate(zip(trace.clocks(t), trace.infos[t])):
            jm = info["j_min"]
            advanced = c == prev_c[jm] + 1
            wrapped = c == 0 and prev_c[i] == prev_c[jm] == period * prev_m[i] - 1
            if not (advanced or wrapped):
                problems.append(f"node {i} round {t}: C={c} neither 1 + C_jmin ({prev_c[jm] + 1}) nor a wrap")
    return problems


def check_path_dichotomy(trace: ExecutionTrace, max_span: Optional[int] = None) -> List[str]:
    """For every edge ``(i, j)`` of ``G(s:t)``: ``C_j(t)`` congruent to ``C_i(s-1) + t-s+1`` or ``M_j(t) >= g(M_i(s-1))``."""
    cfg = trace.algorithm.cfg
    problems = []
    for s, t, reach in _interval_matrices(trace, max_span):
        before, after = _clock_array(trace, s - 1), _clock_array(trace, t)
        grown_target = np.array([cfg.growth(int(m)) for m in trace.factors(s - 1)], dtype=np.int64)
        congruent = (after[None, :] - before[:, None] - (t - s + 1)) % cfg.period == 0
        grown = _factor_array(trace, t)[None, :] >= grown_target[:, None]
        bad = reach & ~congruent & ~grown
        for i, j in zip(*np.nonzero(bad)):
            problems.append(f"edge ({i},{j}) of G({s}:{t}): clocks out of phase without growth")
    return problems


def check_zero_or_synchronized(trace: ExecutionTrace, diameter: int) -> List[str]:
    """Some clock is 0 during ``t+1 .. t+D-1``, or the system is synchronized at ``t+D``."""
    period = trace.algorithm.cfg.period
    problems = []
    for t in range(0, trace.last_round - diameter + 1):
        hit_zero = any(0 in trace.clocks(s) for s in range(t + 1, t + diameter))
        if not hit_zero and not _synchronized(trace, t + diameter, period):
            problems.append(f"round {t}: no clock hits 0 before round {t + diameter}, which is not synchronized")
    return problems


def check_headroom(trace: ExecutionTrace, diameter: int) -> List[str]:
    """If every ``C_i(t) + D <= P M_i(t)``, the system is synchronized at ``t + D``."""
    period = trace.algorithm.cfg.period
    problems = []
    for t in range(0, trace.last_round - diameter + 1):
        clocks, factors = _clock_array(trace, t), _factor_array(trace, t)
        if np.all(clocks + diameter <= period * factors) and not _synchronized(trace, t + diameter, period):
            problems.append(f"round {t}: every clock has headroom {diameter} but round {t + diameter} is not synchronized")
    return problems


def check_growth_race(trace: ExecutionTrace, diameter: int) -> List[str]:
    """At round ``qD``: synchronized, or ``min M(qD) >= g^q(min M(0))``."""
    cfg = trace.algorithm.cfg
    base = min(trace.factors(0))
    problems = []
    q = 0
    while q * diameter <= trace.last_round:
        t = q * diameter
        if not _synchronized(trace, t, cfg.period):
            want = cfg.growth.iterate(base, q)
            got = min(trace.factors(t))
            if got < want:
                problems.append(f"round {t}: min M = {got} below g^{q}(min M(0)) = {want}")
        q += 1
    return problems


# -- SAP on uniformly rooted schedules ----------------------------------------------------

def check_m_tilde_monotone(metrics: ZMetrics) -> List[str]:
    """``M~`` never decreases between consecutive rounds where it is defined."""
    problems = []
    values = metrics.m_tilde
    for t in range(metrics.t0_z, len(values) - 1):
        if values[t] is not None and values[t + 1] is not None and values[t + 1] < values[t]:
            problems.append(f"M~ fell from {values[t]} to {values[t + 1]} at round {t + 1}")
    return problems


def check_center_clock_bound(trace: ExecutionTrace, metrics: ZMetrics, radius: int) -> List[str]:
    """From ``t0_z + R`` on every clock stays below ``P M_Z + R``."""
    period = trace.algorithm.cfg.period
    limit = period * metrics.m_z + radius
    problems = []
    for t in range(metrics.t0_z + radius, trace.last_round + 1):
        high = [i for i, c in enumerate(trace.clocks(t)) if c >= limit]
        if high:
            problems.append(f"round {t}: nodes {high} reach P*M_Z + R = {limit}")
    return problems


def check_center_growth(trace: ExecutionTrace, metrics: ZMetrics, radius: int) -> List[str]:
    """At ``t0_z + qR``: synchronized, or ``M~ >= g^(q-1)(M_Z)``."""
    cfg = trace.algorithm.cfg
    problems = []
    q = 1
    while metrics.t0_z + q * radius <= trace.last_round:
        t = metrics.t0_z + q * radius
        if not _synchronized(trace, t, cfg.period):
            want = cfg.growth.iterate(metrics.m_z, q - 1)
            got = metrics.m_tilde[t]
            if got is None or got < want:
                problems.append(f"round {t}: M~ = {got} below g^{q - 1}(M_Z) = {want}")
        q += 1
    return problems


def check_sap_trace(trace: ExecutionTrace, diameter: Optional[int] = None,
                    max_span: Optional[int] = None) -> Dict[str, List[str]]:
    """Every SAP trace property that applies; the diameter-indexed ones need a finite ``D``."""
    results = {
        "persistence": check_persistence(trace),
        "propagation": check_propagation(trace, max_span),
        "factor_monotone": check_factor_monotone(trace),
        "step_dichotomy": check_step_dichotomy(trace),
        "path_dichotomy": check_path_dichotomy(trace, max_span),
    }
    if diameter is not None:
        results["zero_or_synchronized"] = check_zero_or_synchronized(trace, diameter)
        results["headroom"] = check_headroom(trace, diameter)
        results["growth_race"] = check_growth_race(trace, diameter)
    failed = {name: v for name, v in results.items() if v}
    if failed:
        logger.warning(f"SAP trace violates {sorted(failed)}")
    return results


def check_uniform_trace(trace: ExecutionTrace, metrics: ZMetrics, radius: int) -> Dict[str, List[str]]:
    return {
        "m_tilde_monotone": check_m_tilde_monotone(metrics),
        "center_clock_bound": check_center_clock_bound(trace, metrics, radius),
        "center_growth": check_center_growth(trace, metrics, radius),
    }


def check_minmax_trace(trace: ExecutionTrace, oracle: bool = True) -> Dict[str, List[str]]:
    results = {
        "min_clock_slack": check_min_clock_slack(trace),
        "step_fields": check_minmax_step_fields(trace),
    }
    if oracle:
        results["view_semantics"] = check_view_semantics(trace)
    return results


def all_passed(results: Dict[str, List[str]]) -> bool:
    return not any(results.values())
