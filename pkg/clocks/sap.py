# file: clocks/sap.py

"""
Self-adaptive-period (SAP) clocks: finite-state clocks synchronized modulo a fixed period ``P``.

Node ``i`` counts modulo ``P * M_i`` and escalates ``M_i`` through a non-decreasing growth
function ``g`` whenever it hears two clocks that disagree modulo ``P``. The fixed-period
specialization keeps a single constant ``M`` and drops the period-factor variable.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import InvalidInputError, PreconditionError

logger = logging.getLogger(__name__)

GROWTH_KINDS = ("constant", "successor", "affine", "table")


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class GrowthFunction:
    """Non-decreasing ``g : N -> N``.

    ``table`` functions take their listed values on ``0..len-1`` and continue with slope one
    past the end of the table.
    """

    kind: str
    constant: Optional[int] = None
    table: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in GROWTH_KINDS:
            raise InvalidInputError(f"unknown growth kind {self.kind!r}; choose from {GROWTH_KINDS}")
        if self.kind == "constant" and (self.constant is None or self.constant < 1):
            raise InvalidInputError(f"constant growth needs M >= 1, got {self.constant}")
        if self.kind == "table":
            if not self.table or any(v < 0 for v in self.table):
                raise InvalidInputError("table growth needs a non-empty list of non-negative values")
            if any(a > b for a, b in zip(self.table, self.table[1:])):
                raise InvalidInputError(f"table growth must be non-decreasing, got {list(self.table)}")

    @classmethod
    def constant_of(cls, m: int) -> "GrowthFunction":
        return cls("constant", constant=m)

    @classmethod
    def successor(cls) -> "GrowthFunction":
        return cls("successor")

    @classmethod
    def affine(cls) -> "GrowthFunction":
        return cls("affine")

    @classmethod
    def parse(cls, text: str) -> "GrowthFunction":
        """Parse ``constant:M``, ``successor``, ``affine`` or ``table:v0,v1,...``."""
        kind, _, arg = text.strip().partition(":")
        try:
            if kind == "constant":
                return cls.constant_of(int(arg))
            if kind == "table":
                return cls("table", table=tuple(int(v) for v in arg.split(",")))
        except ValueError:
            raise InvalidInputError(f"bad growth argument in {text!r}")
        if kind in ("successor", "affine") and not arg:
            return cls(kind)
        raise InvalidInputError(f"cannot parse growth preset {text!r}")

    def __call__(self, x: int) -> int:
        if self.kind == "constant":
            return self.constant
        if self.kind == "successor":
            return x + 1
        if self.kind == "affine":
            return 2 * x + 1
        if x < len(self.table):
            return self.table[x]
        return self.table[-1] + x - (len(self.table) - 1)

    def iterate(self, x: int, q: int) -> int:
        """``g^q(x)``."""
        for _ in range(q):
            x = self(x)
        return x

    @property
    def is_inflationary(self) -> bool:
        """``x < g(x)`` for every ``x``."""
        if self.kind in ("successor", "affine"):
            return True
        if self.kind == "table":
            return all(v > x for x, v in enumerate(self.table))
        return False

    def __str__(self):
        if self.kind == "constant":
            return f"constant:{self.constant}"
        if self.kind == "table":
            return "table:" + ",".join(map(str, self.table))
        return self.kind


def g_star(g: GrowthFunction, m: int, cap: int = 100_000) -> Optional[int]:
    """Least ``q`` with ``g^q(0) >= m``; None when no such ``q`` exists (or ``cap`` runs out)."""
    x, q = 0, 0
    while x < m:
        nxt = g(x)
        q += 1
        if nxt <= x or q > cap:
            return None
        x = nxt
    return q


@dataclass(frozen=True)
class SapConfig:
    period: int
    growth: GrowthFunction

    def __post_init__(self):
        if self.period < 1:
            raise InvalidInputError(f"period P must be >= 1, got {self.period}")


@dataclass(frozen=True)
class SapState:
    clock: int
    period_factor: int


@dataclass(frozen=True)
class SapMessage:
    clock: int
    period_factor: int


@dataclass(frozen=True)
class FixedClockState:
    clock: int


def sap_send(state: SapState) -> SapMessage:
    return SapMessage(state.clock, state.period_factor)


def discordant(clocks: Sequence[int], period: int) -> bool:
    """Two of the clocks disagree modulo ``period``."""
    return len({c % period for c in clocks}) > 1


def sap_transition(state: SapState, received: Sequence[SapMessage], cfg: SapConfig) -> Tuple[SapState, bool]:
    """One SAP step; also reports whether the growth function fired.

    The clock uses the old period factor as modulus, then the factor takes the maximum heard,
    then ``g`` applies on modulo-``P`` discordance.
    """
    if not received:
        raise InvalidInputError("a SAP node always hears at least itself")
    clocks = [m.clock for m in received]
    clock = (1 + min(clocks)) % (cfg.period * state.period_factor)
    factor = max(m.period_factor for m in received)
    fired = discordant(clocks, cfg.period)
    if fired:
        factor = cfg.growth(factor)
    return SapState(clock, factor), fired


def sap_step(state: SapState, received: Sequence[SapMessage], cfg: SapConfig) -> SapState:
    return sap_transition(state, received, cfg)[0]


def sap_fixed_step(state: FixedClockState, received: Sequence[FixedClockState], period: int,
                   factor: int) -> FixedClockState:
    """Fixed-period step: ``(1 + min received) mod P*M``."""
    if not received:
        raise InvalidInputError("a SAP node always hears at least itself")
    return FixedClockState((1 + min(m.clock for m in received)) % (period * factor))


def sap_bound_strong(diameter: int, period: int, g: GrowthFunction) -> int:
    """Stabilization bound ``(g*(ceil(2D/P)) + 2) * D`` on a graph of finite diameter ``D``."""
    q0 = g_star(g, ceil_div(2 * diameter, period))
    if q0 is None:
        raise PreconditionError(f"g insufficient for this diameter: g*(ceil(2*{diameter}/{period})) is infinite")
    return (q0 + 2) * diameter


@dataclass(frozen=True)
class UniformBound:
    table_bound: int
    period_factor_bound: int
    t1: Optional[int] = None
    t2: Optional[int] = None
    q1: Optional[int] = None


def sap_bound_uniform(radius: int, center_diameter: int, period: int, g: GrowthFunction,
                      m_z: Optional[int] = None, m0_max: int = 1, t0_z: Optional[int] = None,
                      whole_graph: bool = False) -> UniformBound:
    """Bounds for a uniformly rooted dynamic graph with center ``Z``.

    The a-priori table bound is
    ``R(1 + g*(M + ceil((2+R)/P))) + PM + (2 + g*(ceil(2D/P)))D`` with ``D`` the diameter of the
    center's own execution and ``M = g^T(max M_i(0))``, ``T = (2 + g*(ceil(2D/P)))D``.
    With a measured stabilized factor ``m_z`` and center synchronization round ``t0_z`` the
    proof's ``t2 = t1 + P*M_Z + R`` is returned too, where ``t1 = t0_z + q1 R`` and
    ``q1 = g*(M_Z + ceil((R+1)/P))``.
    """
    if not g.is_inflationary:
        raise PreconditionError(f"uniformly rooted bounds need an inflationary g, got {g}")
    strong = sap_bound_strong(center_diameter, period, g)
    m_table = g.iterate(m0_max, strong)
    if whole_graph:
        return UniformBound(strong, m_table)
    table = radius * (1 + g_star(g, m_table + ceil_div(2 + radius, period))) + period * m_table + strong
    if m_z is None or t0_z is None:
        return UniformBound(table, m_table)
    q1 = g_star(g, m_z + ceil_div(radius + 1, period))
    t1 = t0_z + q1 * radius
    return UniformBound(table, m_table, t1=t1, t2=t1 + period * m_z + radius, q1=q1)


def period_factor_for_bound(bound: int, period: int) -> int:
    """The constant ``M = ceil(2B/P)`` that makes the fixed-period clocks work up to diameter ``B``."""
    return ceil_div(2 * bound, period)


def memory_bounds(period: int, bound: int, g: GrowthFunction, m0_max: int, diameter: int) -> Dict[str, int]:
    """Per-node state-count bounds: fixed-period clocks and SAP_g on a graph of diameter ``D``."""
    t = sap_bound_strong(diameter, period, g)
    return {
        "fixed": period_factor_for_bound(bound, period) * period,
        "sap": (period + 1) * g.iterate(m0_max, t),
    }


def random_sap_states(n: int, seed: int, period: int, factor_max: int = 3,
                      clock_max: Optional[int] = None) -> List[SapState]:
    """Seeded arbitrary SAP states with ``M_i`` in ``[1, factor_max]``; clocks may exceed ``P*M_i``."""
    rng = np.random.default_rng(seed)
    if clock_max is None:
        clock_max = 2 * period * factor_max
    factors = rng.integers(1, factor_max + 1, size=n)
    clocks = rng.integers(0, clock_max + 1, size=n)
    return [SapState(int(c), int(m)) for c, m in zip(clocks, factors)]


def random_fixed_states(n: int, seed: int, period: int, factor: int) -> List[FixedClockState]:
    rng = np.random.default_rng(seed)
    clocks = rng.integers(0, 2 * period * factor, size=n)
    return [FixedClockState(int(c)) for c in clocks]


def _j_min(inbox: Sequence[Tuple[int, object]]) -> int:
    """In-neighbor with the smallest clock, ties to the lowest node id."""
    return min(inbox, key=lambda item: (item[1].clock, item[0]))[0]


class SapClock:
    """Engine adapter for SAP_g."""

    name = "sap"

    def __init__(self, cfg: SapConfig):
        self.cfg = cfg

    def prepare(self, state: SapState) -> SapState:
        return SapState(state.clock % (self.cfg.period * state.period_factor), state.period_factor)

    def send(self, state: SapState) -> SapMessage:
        return sap_send(state)

    def step(self, state: SapState, inbox: Sequence[Tuple[int, SapMessage]]):
        new_state, fired = sap_transition(state, [m for _, m in inbox], self.cfg)
        return new_state, {"g_fired": fired, "j_min": _j_min(inbox)}

    def clock(self, state: SapState) -> int:
        return state.clock

    def factor(self, state: SapState) -> int:
        return state.period_factor

    def validate(self, state) -> None:
        if not isinstance(state, SapState):
            raise InvalidInputError(f"SAP needs SapState, got {type(state).__name__}")
        if state.clock < 0 or state.period_factor < 1:
            raise InvalidInputError(f"SAP needs clock >= 0 and M >= 1, got {state}")

    def state_record(self, state: SapState, verbosity: int = 1) -> Dict[str, object]:
        return {"C": state.clock, "M": state.period_factor}

    def state_from_record(self, record: Dict[str, object]) -> SapState:
        return SapState(int(record["C"]), int(record["M"]))

    def parameters(self) -> Dict[str, object]:
        return {"algorithm": self.name, "period": self.cfg.period, "growth": str(self.cfg.growth)}


class SapFixedClock:
    """Engine adapter for the fixed-period clocks (constant ``M``)."""

    name = "sap-fixed"

    def __init__(self, period: int, factor: int):
        if period < 1 or factor < 1:
            raise InvalidInputError(f"fixed-period clocks need P >= 1 and M >= 1, got P={period}, M={factor}")
        self.period = period
        self.factor_value = factor
        self.cfg = SapConfig(period, GrowthFunction.constant_of(factor))

    def prepare(self, state: FixedClockState) -> FixedClockState:
        return FixedClockState(state.clock % (self.period * self.factor_value))

    def send(self, state: FixedClockState) -> FixedClockState:
        return state

    def step(self, state: FixedClockState, inbox: Sequence[Tuple[int, FixedClockState]]):
        new_state = sap_fixed_step(state, [m for _, m in inbox], self.period, self.factor_value)
        return new_state, {"j_min": _j_min(inbox)}

    def clock(self, state: FixedClockState) -> int:
        return state.clock

    def factor(self, state: FixedClockState) -> int:
        return self.factor_value

    def validate(self, state) -> None:
        if not isinstance(state, FixedClockState) or state.clock < 0:
            raise InvalidInputError(f"fixed-period clocks need FixedClockState with clock >= 0, got {state!r}")

    def state_record(self, state: FixedClockState, verbosity: int = 1) -> Dict[str, object]:
        return {"C": state.clock}

    def state_from_record(self, record: Dict[str, object]) -> FixedClockState:
        return FixedClockState(int(record["C"]))

    def parameters(self) -> Dict[str, object]:
        return {"algorithm": self.name, "period": self.period, "factor": self.factor_value}
