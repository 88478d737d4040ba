# file: clocks/minmax.py

"""
MinMax clocks: unbounded clocks that synchronize on any dynamic graph rooted with bounded delay.

Each node keeps a view, a set of (value, depth) pairs recording min-clock values it has heard
of with their time-lag correction, an elapsed-time counter ``h`` and the output clock ``C``,
the largest view value whose depth is at most ``h / 2``.
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import InvalidInputError

logger = logging.getLogger(__name__)

View = FrozenSet[Tuple[int, int]]


@dataclass(frozen=True)
class MinMaxState:
    h: int
    view: View
    clock_out: int

    @property
    def min_clock(self) -> Optional[int]:
        """The min-clock ``c``: smallest value in the view (None for an empty view)."""
        if not self.view:
            return None
        return min(v for v, _ in self.view)


@dataclass(frozen=True)
class MinMaxMessage:
    view: View


def make_state(h: int, view: Iterable[Tuple[int, int]], clock_out: int = 0) -> MinMaxState:
    entries = frozenset((int(v), int(d)) for v, d in view)
    if h < 0 or clock_out < 0 or any(v < 0 or d < 0 for v, d in entries):
        raise InvalidInputError("MinMax states hold non-negative integers only")
    return MinMaxState(int(h), entries, int(clock_out))


def output_clock(view: View, h: int) -> int:
    """Largest value of depth ``d`` with ``2d <= h``."""
    eligible = [v for v, d in view if 2 * d <= h]
    return max(eligible) if eligible else 0


def minmax_send(state: MinMaxState) -> MinMaxMessage:
    return MinMaxMessage(state.view)


def is_degenerate_inbox(received: Sequence[MinMaxMessage]) -> bool:
    """All received views are empty: the step must invent the depth-0 value."""
    return all(not m.view for m in received)


def minmax_step(state: MinMaxState, received: Sequence[MinMaxMessage]) -> MinMaxState:
    """One transition: age every heard pair, add the current min-clock at depth 0, tick ``h``."""
    union = set()
    for message in received:
        union.update(message.view)
    view = {(v + 1, d + 1) for v, d in union}
    if view:
        fresh = min(v for v, _ in view)
    else:
        logger.warning("all received views are empty; inserting value 0 at depth 0")
        fresh = 0
    view.add((fresh, 0))
    h = state.h + 1
    frozen = frozenset(view)
    return MinMaxState(h, frozen, output_clock(frozen, h))


def minmax_t1_bound(n: int, delta: int, kernel_size: int, h0_max: int, s0: int, t0: int) -> int:
    """Round from which every MinMax clock equals the kernel constant plus ``t``.

    ``s0`` and ``t0`` are execution-dependent and come from a measured trace.
    """
    r = delta * (n - kernel_size)
    return max(s0 + r, t0 + r + 1, 2 * (r + 1), 2 * t0 + h0_max)


def minmax_table_bound(diameter: int, h0_max: int, radius: Optional[int] = None) -> int:
    """Stabilization bound of the reference table: ``2D + h(0)``, or ``2D + 2R + h(0)`` with a radius."""
    if radius is None:
        return 2 * diameter + h0_max
    return 2 * diameter + 2 * radius + h0_max


def random_states(n: int, seed: int, value_max: int = 20, depth_max: int = 5, h_max: int = 0,
                  view_size_max: int = 4) -> List[MinMaxState]:
    """Seeded arbitrary initial states: values, depths and ``h`` drawn uniformly from their ranges."""
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(n):
        size = int(rng.integers(1, view_size_max + 1))
        values = rng.integers(0, value_max + 1, size=size)
        depths = rng.integers(0, depth_max + 1, size=size)
        h = int(rng.integers(0, h_max + 1))
        clock_out = int(rng.integers(0, value_max + 1))
        states.append(make_state(h, zip(values.tolist(), depths.tolist()), clock_out))
    return states


ADVERSARIAL_PRESETS = ("spread", "deep_garbage", "inverted")


def adversarial_states(n: int, preset: str, value_max: int = 50, h0: int = 0) -> List[MinMaxState]:
    """Hand-built hostile initial states.

    ``spread``: node ``i`` alone holds value ``i * value_max / (n-1)``;
    ``deep_garbage``: huge values buried at large depths next to a small fresh value;
    ``inverted``: output clocks and min-clocks disagree in opposite orders.
    """
    if preset == "spread":
        step = value_max // max(n - 1, 1)
        return [make_state(h0, [(i * step, 0)], i * step) for i in range(n)]
    if preset == "deep_garbage":
        return [make_state(h0, [(i, 0), (value_max * 10, value_max)], value_max * 10) for i in range(n)]
    if preset == "inverted":
        return [make_state(h0, [(value_max - i, 0), (i, 2)], i) for i in range(n)]
    raise InvalidInputError(f"unknown MinMax preset {preset!r}; choose from {ADVERSARIAL_PRESETS}")


class MinMaxClock:
    """Engine adapter for the MinMax automaton."""

    name = "minmax"

    def prepare(self, state: MinMaxState) -> MinMaxState:
        return state

    def send(self, state: MinMaxState) -> MinMaxMessage:
        return minmax_send(state)

    def step(self, state: MinMaxState, inbox: Sequence[Tuple[int, MinMaxMessage]]):
        messages = [m for _, m in inbox]
        info = {"degenerate": True} if is_degenerate_inbox(messages) else {}
        return minmax_step(state, messages), info

    def clock(self, state: MinMaxState) -> int:
        return state.clock_out

    def validate(self, state) -> None:
        if not isinstance(state, MinMaxState):
            raise InvalidInputError(f"MinMax needs MinMaxState, got {type(state).__name__}")

    def state_record(self, state: MinMaxState, verbosity: int = 1) -> Dict[str, object]:
        record = {"h": state.h, "c": state.min_clock, "C": state.clock_out, "view_size": len(state.view)}
        if verbosity >= 2:
            record["view"] = sorted(state.view)
        return record

    def state_from_record(self, record: Dict[str, object]) -> MinMaxState:
        return make_state(record["h"], record.get("view", []), record.get("C", 0))

    def parameters(self) -> Dict[str, object]:
        return {"algorithm": self.name}
