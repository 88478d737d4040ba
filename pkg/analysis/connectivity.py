# file: analysis/connectivity.py

"""
Dynamic-graph characteristics: eccentricity, center, kernel, radius, diameter, and the
bounded-delay connectivity classes (rooted, uniformly rooted, strongly connected).

Exact answers need an eventually periodic schedule: every round after the prefix has the
same future as a round of the first cycle, so quantifying over the rounds ``1..p+L`` covers
all of them. Generator schedules only get the capped, advisory entry points.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from dynamic_graph import DynamicGraph, in_neighbors, interval_graph, reach_length, roots
from errors import PreconditionError, UnsupportedScheduleError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Eccentricity:
    """``finite`` with a value, ``infinite``, or ``exceeds_cap`` (capped searches only)."""

    kind: str
    value: Optional[int] = None

    @classmethod
    def finite(cls, d: int) -> "Eccentricity":
        return cls("finite", d)

    @classmethod
    def infinite(cls) -> "Eccentricity":
        return cls("infinite")

    @classmethod
    def exceeds_cap(cls, cap: int) -> "Eccentricity":
        return cls("exceeds_cap", cap)

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def __str__(self):
        if self.kind == "finite":
            return str(self.value)
        if self.kind == "infinite":
            return "inf"
        return f">{self.value}"


@dataclass(frozen=True)
class ConnectivityClass:
    rooted_with_delay: Optional[int]
    uniformly_rooted_with_delay: Optional[int]
    uniform_roots: FrozenSet[int]
    eventually_uniformly_rooted_with_delay: Optional[int]
    strongly_connected_with_delay: Optional[int]
    center: FrozenSet[int]
    kernel: FrozenSet[int]
    radius: Eccentricity
    diameter: Eccentricity
    eccentricities: Tuple[Eccentricity, ...] = field(default=())

    def to_record(self) -> Dict[str, object]:
        """Flat JSON-ready record with a stable key order."""
        return {
            "rooted_with_delay": self.rooted_with_delay,
            "uniformly_rooted_with_delay": self.uniformly_rooted_with_delay,
            "uniform_roots": sorted(self.uniform_roots),
            "eventually_uniformly_rooted_with_delay": self.eventually_uniformly_rooted_with_delay,
            "strongly_connected_with_delay": self.strongly_connected_with_delay,
            "center": sorted(self.center),
            "kernel": sorted(self.kernel),
            "radius": str(self.radius),
            "diameter": str(self.diameter),
            "eccentricities": [str(e) for e in self.eccentricities],
        }


def _require_periodic(dg: DynamicGraph, what: str):
    if not dg.is_periodic:
        raise UnsupportedScheduleError(
            f"{what} is exact only on prefix+cycle schedules; use the capped variant for {dg!r}")


def _start_rounds(dg: DynamicGraph, after_prefix: bool = False) -> range:
    p, L = dg.prefix_length, dg.cycle_length
    return range(p + 1 if after_prefix else 1, p + L + 1)


def eccentricity(dg: DynamicGraph, i: int, cap: Optional[int] = None) -> Eccentricity:
    """Least window length ``d`` such that ``i`` reaches every node in every ``G(t:t+d-1)``.

    The value is exact on periodic schedules, so ``cap`` is accepted for signature parity
    with the capped entry point and never produces ``exceeds_cap``.
    """
    _require_periodic(dg, "eccentricity")
    worst = 0
    for t in _start_rounds(dg):
        d = reach_length(dg, i, t)
        if d is None:
            return Eccentricity.infinite()
        worst = max(worst, d)
    return Eccentricity.finite(worst)


def eccentricity_capped(dg: DynamicGraph, i: int, cap: int, horizon: int) -> Eccentricity:
    """Advisory eccentricity over start rounds ``1..horizon`` with windows of at most ``cap``."""
    worst = 0
    for t in range(1, horizon + 1):
        d = reach_length(dg, i, t, limit=cap)
        if d is None:
            return Eccentricity.exceeds_cap(cap)
        worst = max(worst, d)
    return Eccentricity.finite(worst)


def kernel(dg: DynamicGraph) -> FrozenSet[int]:
    """Nodes that, from every round, eventually reach every node."""
    _require_periodic(dg, "kernel")
    return frozenset(
        i for i in range(dg.n)
        if all(reach_length(dg, i, t) is not None for t in _start_rounds(dg))
    )


def kernel_capped(dg: DynamicGraph, horizon: int, lookahead: int) -> FrozenSet[int]:
    """Advisory kernel: from each start ``1..horizon``, reach everyone within ``lookahead`` rounds."""
    return frozenset(
        i for i in range(dg.n)
        if all(reach_length(dg, i, t, limit=lookahead) is not None for t in range(1, horizon + 1))
    )


def _radius_diameter(eccs: List[Eccentricity]) -> Tuple[Eccentricity, Eccentricity]:
    finite = [e.value for e in eccs if e.is_finite]
    radius = Eccentricity.finite(min(finite)) if finite else Eccentricity.infinite()
    diameter = Eccentricity.finite(max(finite)) if len(finite) == len(eccs) else Eccentricity.infinite()
    return radius, diameter


def window_roots(dg: DynamicGraph, t: int, delta: int) -> FrozenSet[int]:
    return roots(interval_graph(dg, t, t + delta - 1))


def uniform_root_set_is_closed(dg: DynamicGraph, root_set: FrozenSet[int]) -> bool:
    """True iff no round digraph has an edge entering ``root_set`` from outside it."""
    _require_periodic(dg, "closure check")
    outside = [u for u in range(dg.n) if u not in root_set]
    inside = sorted(root_set)
    for g in dg.prefix + dg.cycle:
        if outside and inside and g.matrix[outside][:, inside].any():
            return False
    return True


def classify(dg: DynamicGraph, delta_cap: int) -> ConnectivityClass:
    """Least witnessing delays (up to ``delta_cap``) and the center/kernel/radius/diameter."""
    _require_periodic(dg, "classify")
    starts = list(_start_rounds(dg))
    p = dg.prefix_length

    rooted = uniform = eventually_uniform = strong = None
    uniform_set: FrozenSet[int] = frozenset()
    for delta in range(1, delta_cap + 1):
        if rooted is not None and uniform is not None and eventually_uniform is not None \
                and strong is not None:
            break
        root_sets = [window_roots(dg, t, delta) for t in starts]
        if rooted is None and all(root_sets):
            rooted = delta
        if uniform is None and root_sets[0] and all(r == root_sets[0] for r in root_sets):
            uniform, uniform_set = delta, root_sets[0]
        tail = root_sets[p:]
        if eventually_uniform is None and tail[0] and all(r == tail[0] for r in tail):
            eventually_uniform = delta
        if strong is None and all(len(r) == dg.n for r in root_sets):
            strong = delta

    eccs = [eccentricity(dg, i) for i in range(dg.n)]
    center = frozenset(i for i, e in enumerate(eccs) if e.is_finite)
    radius, diameter = _radius_diameter(eccs)
    result = ConnectivityClass(
        rooted_with_delay=rooted,
        uniformly_rooted_with_delay=uniform,
        uniform_roots=uniform_set,
        eventually_uniformly_rooted_with_delay=eventually_uniform,
        strongly_connected_with_delay=strong,
        center=center,
        kernel=kernel(dg),
        radius=radius,
        diameter=diameter,
        eccentricities=tuple(eccs),
    )
    logger.debug(f"classify {dg!r}: {result.to_record()}")
    return result


def is_uniformly_rootable(dg: DynamicGraph) -> bool:
    """Uniformly rooted with some finite delay: non-empty center closed to incoming edges."""
    center = frozenset(i for i in range(dg.n) if eccentricity(dg, i).is_finite)
    return bool(center) and uniform_root_set_is_closed(dg, center)


def is_rooted_with_delay(dg: DynamicGraph, delta: int) -> bool:
    _require_periodic(dg, "rootedness check")
    return all(window_roots(dg, t, delta) for t in _start_rounds(dg))


@dataclass(frozen=True)
class KernelReachVerdict:
    passed: bool
    kernel: FrozenSet[int]
    window_length: int
    s0: int
    horizon: int
    counterexample: Optional[Tuple[int, int]] = None  # (t, i)


def kernel_reach_bound_check(dg: DynamicGraph, delta: int, horizon: int) -> KernelReachVerdict:
    """Every node hears from the kernel within ``delta * (n - |K|) + 1`` rounds after the prefix.

    Checks ``In_i(t : t + delta*(n-|K|))`` meets the kernel for every ``t`` in
    ``[s0, horizon]`` with ``s0 = prefix length + 1``.
    """
    _require_periodic(dg, "kernel reachability check")
    if not is_rooted_with_delay(dg, delta):
        raise PreconditionError(f"{dg!r} is not rooted with delay {delta}")
    k = kernel(dg)
    span = delta * (dg.n - len(k))
    s0 = dg.prefix_length + 1
    for t in range(s0, horizon + 1):
        for i in range(dg.n):
            if not (in_neighbors(dg, i, t, t + span) & k):
                logger.warning(f"kernel reachability fails at round {t} for node {i}")
                return KernelReachVerdict(False, k, span, s0, horizon, (t, i))
    return KernelReachVerdict(True, k, span, s0, horizon)
