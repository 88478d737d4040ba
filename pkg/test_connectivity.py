#!/usr/bin/env python3
"""
Tests for eccentricities, center, kernel and the bounded-delay connectivity classes.
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the project directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from analysis.connectivity import (Eccentricity, classify, eccentricity, eccentricity_capped, is_rooted_with_delay,
                                   is_uniformly_rootable, kernel, kernel_capped, kernel_reach_bound_check,
                                   uniform_root_set_is_closed, window_roots)
from dynamic_graph import Digraph, DynamicGraph, bidirectional_chain, complete_digraph, in_neighbors, star
from errors import PreconditionError, UnsupportedScheduleError
from scenarios import growing_runs_hub, h_digraph, random_rooted


def alternating_stars(n=4):
    return DynamicGraph.prefix_cycle([], [star(n, 0), star(n, 1)], name="stars")


def test_static_chain():
    dg = DynamicGraph.static(bidirectional_chain(5))
    assert [e.value for e in (eccentricity(dg, i) for i in range(5))] == [4, 3, 2, 3, 4]
    cls = classify(dg, 4)
    assert cls.strongly_connected_with_delay == 1
    assert cls.rooted_with_delay == 1
    assert cls.uniformly_rooted_with_delay == 1
    assert cls.uniform_roots == frozenset(range(5))
    assert cls.radius == Eccentricity.finite(2)
    assert cls.diameter == Eccentricity.finite(4)
    assert cls.center == cls.kernel == frozenset(range(5))


def test_h_digraph_is_uniformly_rooted_with_infinite_diameter():
    dg = DynamicGraph.static(h_digraph())
    cls = classify(dg, 3)
    assert cls.uniformly_rooted_with_delay == 1
    assert cls.uniform_roots == frozenset({0})
    assert cls.center == frozenset({0})
    assert cls.radius == Eccentricity.finite(2)
    assert not cls.diameter.is_finite
    assert cls.strongly_connected_with_delay is None
    assert is_uniformly_rootable(dg)
    assert uniform_root_set_is_closed(dg, frozenset({0}))
    assert not uniform_root_set_is_closed(dg, frozenset({1}))


def test_alternating_stars():
    dg = alternating_stars()
    cls = classify(dg, 3)
    assert cls.rooted_with_delay == 1
    # single rounds have different roots; every two-round window has both hubs as roots
    assert cls.uniformly_rooted_with_delay == 2
    assert cls.uniform_roots == frozenset({0, 1})
    assert cls.kernel == frozenset({0, 1})
    assert cls.center == frozenset({0, 1})
    # node 0's worst window starts on node 1's round
    assert eccentricity(dg, 0) == Eccentricity.finite(2)
    assert not cls.diameter.is_finite
    assert is_uniformly_rootable(dg)


def test_rooted_but_not_uniformly_rootable():
    # node 2 is a root of the first round only and feeds the center through it
    dg = DynamicGraph.prefix_cycle([Digraph(3, [(2, 0), (0, 1)])], [star(3, 0)])
    cls = classify(dg, 3)
    assert cls.rooted_with_delay == 1
    assert cls.uniformly_rooted_with_delay is None
    assert cls.eventually_uniformly_rooted_with_delay == 1
    assert cls.center == frozenset({0})
    assert not uniform_root_set_is_closed(dg, cls.center)
    assert not is_uniformly_rootable(dg)


def test_prefix_only_affects_exact_uniformity():
    warmup = Digraph(3, [(1, 0), (1, 2)])
    dg = DynamicGraph.prefix_cycle([warmup], [star(3, 0)])
    cls = classify(dg, 2)
    assert cls.uniformly_rooted_with_delay is None
    assert cls.eventually_uniformly_rooted_with_delay == 1
    assert cls.rooted_with_delay == 1


def test_unrooted_schedule():
    dg = DynamicGraph.static(Digraph(3, [(0, 1)]))
    cls = classify(dg, 3)
    assert cls.rooted_with_delay is None
    assert cls.center == frozenset()
    assert cls.kernel == frozenset()
    assert not cls.radius.is_finite
    assert not is_rooted_with_delay(dg, 3)


def test_exact_analyses_reject_generators():
    dg = DynamicGraph.from_generator(3, lambda t: complete_digraph(3))
    with pytest.raises(UnsupportedScheduleError):
        classify(dg, 2)
    with pytest.raises(UnsupportedScheduleError):
        kernel(dg)
    assert eccentricity_capped(dg, 0, cap=3, horizon=10) == Eccentricity.finite(1)


def test_growing_star_runs_have_a_kernel_but_no_center():
    n = 4
    stars = {0: star(n, 0), 1: star(n, 1)}
    dg = DynamicGraph.from_generator(n, lambda t: stars[growing_runs_hub(t)])
    # both hubs recur, so both reach everyone from any start
    assert kernel_capped(dg, horizon=30, lookahead=40) == frozenset({0, 1})
    # but the gaps between their runs grow, so no finite cap covers them
    assert eccentricity_capped(dg, 0, cap=4, horizon=30) == Eccentricity.exceeds_cap(4)
    assert str(Eccentricity.exceeds_cap(4)) == ">4"


def test_kernel_reach_bound():
    dg = alternating_stars()
    verdict = kernel_reach_bound_check(dg, delta=1, horizon=10)
    assert verdict.passed
    assert verdict.kernel == frozenset({0, 1})
    assert verdict.window_length == 2
    with pytest.raises(PreconditionError):
        kernel_reach_bound_check(DynamicGraph.static(Digraph(3)), delta=2, horizon=5)


def test_record_is_flat():
    record = classify(DynamicGraph.static(h_digraph()), 2).to_record()
    assert record["center"] == [0]
    assert record["diameter"] == "inf"
    assert record["radius"] == "2"
    assert record["eccentricities"] == ["2", "inf", "inf"]


@st.composite
def prefix_cycle_schedules(draw, min_nodes=2, max_nodes=4):
    """Random prefix+cycle schedules: up to two warm-up rounds, one to three cycle rounds."""
    n = draw(st.integers(min_value=min_nodes, max_value=max_nodes))

    def digraph():
        bits = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
        return Digraph.from_matrix(np.array(bits, dtype=bool).reshape(n, n))

    prefix = [digraph() for _ in range(draw(st.integers(min_value=0, max_value=2)))]
    cycle = [digraph() for _ in range(draw(st.integers(min_value=1, max_value=3)))]
    return DynamicGraph.prefix_cycle(prefix, cycle)


def start_rounds(dg):
    return range(1, dg.prefix_length + dg.cycle_length + 1)


def check_uniform_roots(dg, cls):
    delta = cls.uniformly_rooted_with_delay
    assert uniform_root_set_is_closed(dg, cls.uniform_roots)
    assert cls.uniform_roots == cls.center
    for i in cls.center:
        assert cls.eccentricities[i].value <= delta * (dg.n - 1)
    for wider in range(delta, delta + 4):
        assert {window_roots(dg, t, wider) for t in start_rounds(dg)} == {cls.uniform_roots}


@settings(max_examples=80, deadline=None)
@given(prefix_cycle_schedules())
def test_center_lies_inside_the_kernel(dg):
    cls = classify(dg, 4)
    assert cls.center <= cls.kernel
    assert cls.diameter.is_finite == (cls.center == frozenset(range(dg.n)))
    assert cls.radius.is_finite == bool(cls.center)


@settings(max_examples=80, deadline=None)
@given(prefix_cycle_schedules())
def test_classes_are_monotone_in_delta(dg):
    cls = classify(dg, 3)
    if cls.rooted_with_delay is not None:
        for delta in range(cls.rooted_with_delay, cls.rooted_with_delay + 4):
            assert is_rooted_with_delay(dg, delta)
    if cls.strongly_connected_with_delay is not None:
        for delta in range(cls.strongly_connected_with_delay, cls.strongly_connected_with_delay + 4):
            assert all(len(window_roots(dg, t, delta)) == dg.n for t in start_rounds(dg))
    if cls.uniformly_rooted_with_delay is not None:
        check_uniform_roots(dg, cls)


def test_uniform_roots_on_sampled_uniform_schedules():
    for seed in range(20):
        scenario = random_rooted(2 + seed % 4, 1 + seed % 2, "uniformly_rooted", seed=seed)
        check_uniform_roots(scenario.dynamic_graph, scenario.connectivity)


@settings(max_examples=60, deadline=None)
@given(prefix_cycle_schedules(min_nodes=4, max_nodes=4), st.integers(min_value=1, max_value=6),
       st.integers(min_value=0, max_value=4))
def test_interval_in_neighbors_contain_every_round(dg, t, length):
    for i in range(dg.n):
        union = frozenset().union(*(in_neighbors(dg, i, s, s) for s in range(t, t + length + 1)))
        assert union <= in_neighbors(dg, i, t, t + length)


def test_interval_in_neighbors_can_be_strictly_larger():
    dg = DynamicGraph.prefix_cycle([], [Digraph(4, [(0, 1)]), Digraph(4, [(1, 2)])])
    union = in_neighbors(dg, 2, 1, 1) | in_neighbors(dg, 2, 2, 2)
    assert union == frozenset({1, 2})
    assert in_neighbors(dg, 2, 1, 2) == frozenset({0, 1, 2})
