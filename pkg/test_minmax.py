#!/usr/bin/env python3
"""
Tests for the MinMax automaton: step semantics, output clock and bounds.
"""

import os
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the project directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from clocks.minmax import (ADVERSARIAL_PRESETS, MinMaxClock, MinMaxMessage, adversarial_states, make_state,
                           minmax_step, minmax_t1_bound, minmax_table_bound, output_clock, random_states)
from errors import InvalidInputError

views = st.frozensets(st.tuples(st.integers(0, 30), st.integers(0, 6)), min_size=1, max_size=6)


def test_output_clock_respects_depth_budget():
    view = frozenset({(5, 0), (9, 1), (20, 3)})
    assert output_clock(view, 0) == 5
    assert output_clock(view, 2) == 9
    assert output_clock(view, 5) == 9
    assert output_clock(view, 6) == 20
    assert output_clock(frozenset(), 4) == 0


def test_step_ages_heard_pairs_and_adds_fresh_min():
    state = make_state(0, [(3, 0)])
    received = [MinMaxMessage(frozenset({(3, 0)})), MinMaxMessage(frozenset({(7, 0), (1, 2)}))]
    after = minmax_step(state, received)
    assert after.view == frozenset({(4, 1), (8, 1), (2, 3), (2, 0)})
    assert after.h == 1
    assert after.min_clock == 2
    assert after.clock_out == 2


def test_degenerate_inbox_inserts_zero(caplog):
    state = make_state(4, [])
    after = minmax_step(state, [MinMaxMessage(frozenset())])
    assert after.view == frozenset({(0, 0)})
    assert "empty" in caplog.text

    adapter = MinMaxClock()
    _, info = adapter.step(state, [(0, MinMaxMessage(frozenset()))])
    assert info == {"degenerate": True}


@settings(max_examples=80, deadline=None)
@given(views, st.lists(views, max_size=3), st.integers(0, 10))
def test_min_clock_advances_at_most_one(own, others, h):
    state = make_state(h, own)
    received = [MinMaxMessage(state.view)] + [MinMaxMessage(v) for v in others]
    after = minmax_step(state, received)
    assert after.min_clock <= state.min_clock + 1
    assert after.h == h + 1
    assert (after.min_clock, 0) in after.view
    assert after.clock_out == output_clock(after.view, after.h)


def test_make_state_rejects_negative_entries():
    with pytest.raises(InvalidInputError):
        make_state(0, [(-1, 0)])
    with pytest.raises(InvalidInputError):
        make_state(-1, [(1, 0)])


def test_adapter_records():
    adapter = MinMaxClock()
    state = make_state(2, [(4, 0), (6, 1)], clock_out=6)
    assert adapter.state_record(state) == {"h": 2, "c": 4, "C": 6, "view_size": 2}
    full = adapter.state_record(state, verbosity=2)
    assert full["view"] == [(4, 0), (6, 1)]
    assert adapter.state_from_record(full) == state
    assert adapter.clock(state) == 6
    with pytest.raises(InvalidInputError):
        adapter.validate("not a state")


def test_bounds():
    assert minmax_table_bound(3, 2) == 8
    assert minmax_table_bound(3, 2, radius=1) == 10
    # r = delta (n - |K|) = 2
    assert minmax_t1_bound(n=4, delta=1, kernel_size=2, h0_max=0, s0=1, t0=5) == 10
    assert minmax_t1_bound(n=4, delta=2, kernel_size=1, h0_max=0, s0=20, t0=1) == 26


def test_random_states_are_seeded():
    assert random_states(5, seed=7) == random_states(5, seed=7)
    assert random_states(5, seed=7) != random_states(5, seed=8)
    assert all(s.view for s in random_states(5, seed=7))


def test_adversarial_presets():
    for preset in ADVERSARIAL_PRESETS:
        states = adversarial_states(4, preset)
        assert len(states) == 4
    spread = adversarial_states(3, "spread", value_max=10)
    assert [s.min_clock for s in spread] == [0, 5, 10]
    with pytest.raises(InvalidInputError):
        adversarial_states(3, "nope")
