# file: analysis/bounds.py

"""
Reference tables of stabilization-time and memory bounds, and selection of the bound whose
hypothesis a classified schedule actually satisfies.

The SynchMod rows come from the literature and are printed for comparison only.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

from analysis.connectivity import ConnectivityClass, classify
from clocks.minmax import MinMaxClock, minmax_table_bound
from clocks.sap import (GrowthFunction, SapClock, SapFixedClock, ceil_div, memory_bounds, sap_bound_strong,
                        sap_bound_uniform)
from dynamic_graph import DynamicGraph, restrict
from errors import PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundRow:
    algorithm: str
    assumption: str
    formula: str
    value: Optional[int]
    reference_only: bool = False

    def to_record(self) -> Dict[str, object]:
        return {"algorithm": self.algorithm, "assumption": self.assumption, "formula": self.formula,
                "value": self.value, "reference_only": self.reference_only}


def _or_none(fn, *args, **kwargs) -> Optional[int]:
    try:
        return fn(*args, **kwargs)
    except PreconditionError as e:
        logger.debug(f"bound not applicable: {e}")
        return None


def stabilization_table(diameter: int, period: int, growth: GrowthFunction, h0_max: int = 0,
                        radius: Optional[int] = None, center_diameter: Optional[int] = None,
                        bound: Optional[int] = None, n: Optional[int] = None, m0_max: int = 1) -> List[BoundRow]:
    """Stabilization-time rows for the given parameters; ``bound`` is the known diameter bound ``B``."""
    rows = [
        BoundRow("minmax", "diam = D", "2D + h(0)", minmax_table_bound(diameter, h0_max)),
        BoundRow("sap-fixed", "diam = D <= B", "3D",
                 3 * diameter if bound is not None and diameter <= bound else None),
        BoundRow("sap", "diam = D", "(2 + g*(ceil(2D/P))) D", _or_none(sap_bound_strong, diameter, period, growth)),
    ]
    if radius is not None and center_diameter is not None:
        uniform = _or_none(lambda: sap_bound_uniform(radius, center_diameter, period, growth, m0_max=m0_max).table_bound)
        rows += [
            BoundRow("minmax", "uniformly rooted, rad = R, diam(Z) = D", "2D + 2R + h(0)",
                     minmax_table_bound(center_diameter, h0_max, radius)),
            BoundRow("sap-fixed", "uniformly rooted", "--", None),
            BoundRow("sap", "uniformly rooted, rad = R, diam(Z) = D",
                     "R(1 + g*(M + ceil((2+R)/P))) + PM + (2 + g*(ceil(2D/P))) D, M = g^T(max M_i(0))", uniform),
        ]
    if bound is not None:
        rows.append(BoundRow("synchmod", "diam = D <= B", "4P ceil(B/P)", 4 * period * ceil_div(bound, period),
                             reference_only=True))
        if n is not None:
            rows.append(BoundRow("synchmod", "uniformly rooted, rad = R <= B", "6P|V| ceil(B/P)",
                                 6 * period * n * ceil_div(bound, period), reference_only=True))
    return rows


def memory_table(period: int, bound: int, growth: GrowthFunction, m0_max: int, diameter: int) -> List[BoundRow]:
    """Per-node state-count rows on a schedule of finite diameter ``D <= B``."""
    sap = _or_none(memory_bounds, period, bound, growth, m0_max, diameter)
    return [
        BoundRow("minmax", "diam = D", "unbounded", None),
        BoundRow("sap-fixed", "diam = D <= B", "ceil(2B/P) P", ceil_div(2 * bound, period) * period),
        BoundRow("sap", "diam = D", "(P+1) g^T(max M_i(0))", sap["sap"] if sap else None),
        BoundRow("synchmod", "diam = D <= B", "B", bound, reference_only=True),
    ]


@dataclass(frozen=True)
class ApplicableBound:
    value: int
    hypothesis: str


def center_diameter(dg: DynamicGraph, cls: ConnectivityClass) -> Optional[int]:
    """Diameter of the dynamic graph induced on the center, or None when it is infinite."""
    if not cls.center:
        return None
    sub = classify(restrict(dg, cls.center), 1)
    return sub.diameter.value if sub.diameter.is_finite else None


def applicable_bound(algorithm, dg: DynamicGraph, cls: ConnectivityClass, h0_max: int = 0,
                     m0_max: int = 1) -> Optional[ApplicableBound]:
    """The stabilization bound whose hypothesis ``cls`` satisfies, or None if none applies."""
    d = cls.diameter.value if cls.diameter.is_finite else None
    uniform = cls.uniformly_rooted_with_delay is not None
    r = cls.radius.value if cls.radius.is_finite else None

    if isinstance(algorithm, MinMaxClock):
        if d is not None:
            return ApplicableBound(minmax_table_bound(d, h0_max), "finite diameter")
        dz = center_diameter(dg, cls) if uniform else None
        if dz is not None and r is not None:
            return ApplicableBound(minmax_table_bound(dz, h0_max, r), "uniformly rooted")
        return None
    if isinstance(algorithm, SapFixedClock):
        if d is None:
            return None
        value = _or_none(sap_bound_strong, d, algorithm.period, algorithm.cfg.growth)
        return ApplicableBound(value, "finite diameter, D <= PM/2") if value is not None else None
    if isinstance(algorithm, SapClock):
        cfg = algorithm.cfg
        if d is not None:
            value = _or_none(sap_bound_strong, d, cfg.period, cfg.growth)
            return ApplicableBound(value, "finite diameter") if value is not None else None
        dz = center_diameter(dg, cls) if uniform and cfg.growth.is_inflationary else None
        if dz is not None and r is not None:
            value = _or_none(lambda: sap_bound_uniform(r, dz, cfg.period, cfg.growth, m0_max=m0_max).table_bound)
            return ApplicableBound(value, "uniformly rooted") if value is not None else None
    return None


def early_stop_floor(algorithm, dg: DynamicGraph, cls: Optional[ConnectivityClass],
                     initial_states) -> Optional[int]:
    """First round at which an exact-mode early stop is sound: the applicable MinMax bound.

    Mod-P clocks need no floor; MinMax runs without an applicable bound get None and run to the horizon.
    """
    if not isinstance(algorithm, MinMaxClock) or cls is None:
        return None
    bound = applicable_bound(algorithm, dg, cls, h0_max=max(s.h for s in initial_states))
    return bound.value if bound is not None else None
