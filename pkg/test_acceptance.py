#!/usr/bin/env python3
"""
Acceptance runs: the stabilization bounds, the counterexamples, the trace properties and the
memory limits, each at its full experimental scale.
"""

import os
import sys

import numpy as np

# Add the project directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from analysis.bounds import center_diameter, early_stop_floor
from analysis.connectivity import classify, kernel_reach_bound_check
from analysis.invariants import (all_passed, check_minmax_trace, check_sap_trace, check_uniform_trace,
                                 check_view_semantics)
from clocks.minmax import MinMaxClock, minmax_t1_bound, minmax_table_bound, random_states
from clocks.sap import (GrowthFunction, SapClock, SapConfig, SapFixedClock, memory_bounds, period_factor_for_bound,
                        random_fixed_states, sap_bound_uniform)
from dynamic_graph import Digraph, DynamicGraph, bidirectional_chain, roots
from engine import Execution, SyncVerdict, detect_sync, measure_s0_t0, run, z_metrics
from scenarios import (chain_counterexample, h_counterexample, link_loss_adversary, random_connected_bidirectional,
                       random_rooted, round_robin_transform, rooted_counterexample)

SUCCESSOR = GrowthFunction.successor()
SAP_P2 = SapClock(SapConfig(2, SUCCESSOR))


def max_clock(trace, nodes=None):
    nodes = range(trace.n) if nodes is None else sorted(nodes)
    return max(trace.clocks(t)[i] for t in range(trace.last_round + 1) for i in nodes)


def assert_sap_properties(trace, diameter=None, max_span=None):
    results = check_sap_trace(trace, diameter, max_span)
    assert all_passed(results), {k: v[:3] for k, v in results.items() if v}


# -- fixed-period clocks on a chain of diameter D <= PM/2 ------------------------------------

def run_fixed_clocks_on_the_chain(factor):
    dg = DynamicGraph.static(bidirectional_chain(5))
    assert classify(dg, 2).diameter.value == 4
    algorithm = SapFixedClock(2, factor)
    for seed in range(100):
        states = random_fixed_states(5, seed, 2, factor)
        trace = run(Execution(algorithm, dg, states, 200, seed=seed, early_stop=True))
        verdict = detect_sync(trace)
        assert verdict.synchronized and verdict.round <= 12, f"seed {seed}: {verdict}"
        assert_sap_properties(trace, diameter=4)
        yield trace


def test_fixed_clocks_on_the_chain_stabilize_within_3d():
    assert len(list(run_fixed_clocks_on_the_chain(10))) == 100


def test_fixed_clocks_sized_for_the_diameter_stay_within_the_state_count():
    # B = D = 4: M = ceil(2B/P) and ceil(2B/P) P states per node
    factor = period_factor_for_bound(4, 2)
    states_limit = memory_bounds(2, 4, SUCCESSOR, 1, 4)["fixed"]
    assert (factor, states_limit) == (4, 8)
    for trace in run_fixed_clocks_on_the_chain(factor):
        assert max_clock(trace) < states_limit


# -- counterexamples ----------------------------------------------------------------------

def test_chain_beyond_half_the_period_never_synchronizes():
    scenario = chain_counterexample(2, 3, 5)
    trace = run(scenario.execution())
    assert trace.last_round == 60
    assert detect_sync(trace).status == SyncVerdict.NOT_WITHIN_HORIZON
    assert scenario.verify(trace) == []
    assert_sap_properties(trace, diameter=4)


def test_h_digraph_defeats_fixed_clocks():
    scenario = h_counterexample(2, 4)
    trace = run(scenario.execution(early_stop=True))
    assert trace.last_round == 40
    assert detect_sync(trace).status == SyncVerdict.NOT_WITHIN_HORIZON
    assert scenario.verify(trace) == []
    assert_sap_properties(trace)


def test_rooted_counterexample_defeats_sap():
    scenario = rooted_counterexample(2, 2, 1, SUCCESSOR, 4)
    trace = run(scenario.execution())
    assert detect_sync(trace).status == SyncVerdict.NOT_WITHIN_HORIZON
    assert scenario.verify(trace) == []
    assert_sap_properties(trace, max_span=12)


# -- SAP on uniformly rooted schedules ------------------------------------------------------

def check_uniform_run(trace, dg, cls):
    """Synchronized, center properties hold, every clock within the state-count limit; returns t2."""
    verdict = detect_sync(trace)
    assert verdict.synchronized, f"{dg!r}: {verdict}"
    radius = cls.radius.value
    z = z_metrics(trace, cls.center, 2)
    results = check_uniform_trace(trace, z, radius)
    assert all_passed(results), {k: v[:3] for k, v in results.items() if v}
    assert_sap_properties(trace, max_span=4 * trace.n)

    m0 = max(trace.factors(0))
    dz = center_diameter(dg, cls)
    table = sap_bound_uniform(radius, dz, 2, SUCCESSOR, m0_max=m0)
    assert max_clock(trace) < 3 * table.period_factor_bound
    measured = sap_bound_uniform(radius, dz, 2, SUCCESSOR, m_z=z.m_z, m0_max=m0, t0_z=z.t0_z)
    assert verdict.round <= measured.t2
    return measured.t2


def test_sap_synchronizes_on_h_within_measured_t2():
    scenario = h_counterexample(2, 4)
    trace = run(scenario.execution(algorithm=SAP_P2, horizon=2000, early_stop=True))
    dg = scenario.dynamic_graph
    check_uniform_run(trace, dg, classify(dg, 2))
    assert max_clock(trace) < 3 * sap_bound_uniform(2, 1, 2, SUCCESSOR, m0_max=4).period_factor_bound


def test_sap_synchronizes_on_random_uniformly_rooted_schedules():
    for seed in range(50):
        scenario = random_rooted(2 + seed % 5, 1 + seed % 2, "uniformly_rooted", seed=seed)
        dg, cls = scenario.dynamic_graph, scenario.connectivity
        states = scenario.initial_states(seed=seed)
        trace = run(Execution(SAP_P2, dg, states, 2000, seed=seed, early_stop=True, confirmation_window=40))
        check_uniform_run(trace, dg, cls)


# -- MinMax -------------------------------------------------------------------------------

def test_minmax_within_2d_plus_h0_on_strongly_connected_schedules():
    for seed in range(100):
        scenario = random_rooted(2 + seed % 5, 1 + seed % 2, "strongly_connected", seed=seed)
        dg, cls = scenario.dynamic_graph, scenario.connectivity
        states = random_states(dg.n, seed)
        bound = minmax_table_bound(cls.diameter.value, max(s.h for s in states))
        assert early_stop_floor(MinMaxClock(), dg, cls, states) == bound
        trace = run(Execution(MinMaxClock(), dg, states, 2000, seed=seed, early_stop=True, min_stop_round=bound))
        verdict = detect_sync(trace)
        assert verdict.synchronized and verdict.round <= bound, f"seed {seed}: {verdict}, bound {bound}"


def test_minmax_synchronizes_on_rooted_schedules():
    for seed in range(100):
        scenario = random_rooted(3 + seed % 4, 1 + seed % 2, "rooted", seed=seed)
        dg, cls = scenario.dynamic_graph, scenario.connectivity
        states = random_states(dg.n, seed)
        # no a-priori bound: run the whole horizon, which also covers the measured t1
        trace = run(Execution(MinMaxClock(), dg, states, 300, seed=seed))
        verdict = detect_sync(trace)
        assert verdict.synchronized, f"seed {seed}: {verdict}"
        delta = cls.rooted_with_delay
        m = measure_s0_t0(trace, cls.kernel, delta)
        t1 = minmax_t1_bound(dg.n, delta, len(cls.kernel), max(s.h for s in states), m.s0, m.t0)
        assert verdict.round <= t1, f"seed {seed}: stabilized at {verdict.round}, t1 = {t1}"


def random_schedule(n, seed, density=0.4):
    def generate(t):
        return Digraph.from_matrix(np.random.default_rng([seed, t]).random((n, n)) < density)
    return DynamicGraph.from_generator(n, generate, name=f"random(n={n},seed={seed})")


def test_views_match_the_interval_oracle():
    for seed in range(50):
        n = 2 + seed % 4
        states = random_states(n, seed, h_max=3)
        trace = run(Execution(MinMaxClock(), random_schedule(n, seed), states, 20, seed=seed))
        assert check_view_semantics(trace) == []
        assert all_passed(check_minmax_trace(trace, oracle=False))


def test_kernel_reached_within_delta_times_outsiders():
    for seed in range(30):
        n, delta = 3 + seed % 4, 1 + seed % 2
        if seed % 3:
            scenario = random_rooted(n, delta, "rooted", seed=seed)
        else:
            scenario = random_rooted(n, delta, "strongly_connected", seed=seed, prefix_length=seed % 4)
        dg, cls = scenario.dynamic_graph, scenario.connectivity
        d = cls.rooted_with_delay
        s0 = dg.prefix_length + 1
        verdict = kernel_reach_bound_check(dg, d, s0 + 5 * d * n)
        assert verdict.passed, f"seed {seed}: counterexample {verdict.counterexample}"
        assert verdict.s0 == s0


def test_minmax_survives_link_losses():
    for seed in range(20):
        scenario = link_loss_adversary(6, 9, seed)
        dg = scenario.dynamic_graph
        trace = run(Execution(MinMaxClock(), dg, random_states(6, seed), 500, seed=seed))
        assert trace.last_round == 500
        assert all(roots(dg.digraph_at(t)) for t in range(1, trace.last_round + 1))
        assert detect_sync(trace).synchronized, f"seed {seed}"


# -- round robin ----------------------------------------------------------------------------

def test_round_robin_schedules_with_period_6n():
    for graph_seed in range(20):
        n = 2 + graph_seed % 7
        scenario = round_robin_transform(random_connected_bidirectional(n, graph_seed))
        dg = scenario.dynamic_graph
        diameter = classify(dg, 1).diameter
        assert diameter.is_finite and diameter.value <= 3 * n
        algorithm = SapFixedClock(6 * n, 1)
        for seed in range(20):
            states = random_fixed_states(n, seed, 6 * n, 1)
            trace = run(Execution(algorithm, dg, states, scenario.horizon, seed=seed, early_stop=True))
            verdict = detect_sync(trace)
            assert verdict.synchronized and verdict.round <= 9 * n, f"graph {graph_seed} seed {seed}: {verdict}"
            assert_sap_properties(trace, diameter=diameter.value, max_span=4 * n)
