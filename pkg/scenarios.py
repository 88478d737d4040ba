# file: scenarios.py

"""
Graph families and adversarial schedules, each packaged with matching initial states,
the connectivity class it advertises and, where one exists, a per-round closed-form checker.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from analysis.bounds import early_stop_floor
from analysis.connectivity import ConnectivityClass, classify, eccentricity, is_uniformly_rootable
from clocks.minmax import MinMaxClock, random_states
from clocks.sap import (FixedClockState, GrowthFunction, SapClock, SapConfig, SapFixedClock, SapState,
                        random_fixed_states, random_sap_states)
from dynamic_graph import (Digraph, DynamicGraph, bidirectional_chain, complete_digraph, identity_digraph,
                           roots, star)
from engine import ClockAlgorithm, Execution, ExecutionTrace, SyncVerdict, detect_sync
from errors import InvalidInputError, PreconditionError, UnsupportedScheduleError

logger = logging.getLogger(__name__)

Checker = Callable[[ExecutionTrace], List[str]]

# node roles shared by the three-node counterexamples
NODE_I, NODE_J, NODE_K = 0, 1, 2


@dataclass
class Scenario:
    name: str
    dynamic_graph: DynamicGraph
    algorithm: ClockAlgorithm
    horizon: int
    suggested_init: Dict[str, Tuple] = field(default_factory=dict)
    expected_verdict: Optional[str] = None
    checker: Optional[Checker] = None
    connectivity: Optional[ConnectivityClass] = None
    parameters: Dict[str, object] = field(default_factory=dict)
    export_schedule: Optional[DynamicGraph] = None
    full_horizon: bool = False

    @property
    def n(self) -> int:
        return self.dynamic_graph.n

    def initial_states(self, algorithm: Optional[ClockAlgorithm] = None, seed: Optional[int] = None) -> Tuple:
        """The scenario's preset for ``algorithm`` if it has one, else seeded arbitrary states."""
        algorithm = algorithm or self.algorithm
        preset = self.suggested_init.get(algorithm.name)
        if preset is not None and seed is None:
            return preset
        return seeded_initial_states(algorithm, self.n, 0 if seed is None else seed)

    def execution(self, algorithm: Optional[ClockAlgorithm] = None, horizon: Optional[int] = None,
                  seed: Optional[int] = None, early_stop: bool = False) -> Execution:
        algorithm = algorithm or self.algorithm
        states = self.initial_states(algorithm, seed)
        return Execution(algorithm, self.dynamic_graph, states, horizon or self.horizon, seed=seed,
                         early_stop=early_stop and not self.full_horizon,
                         min_stop_round=early_stop_floor(algorithm, self.dynamic_graph, self.connectivity, states))

    def verify(self, trace: ExecutionTrace) -> List[str]:
        """Violations of the expected verdict and of the closed-form checker (empty list: pass).

        Both describe the scenario's own algorithm; traces of any other clock pass unchecked.
        """
        if trace.algorithm.parameters() != self.algorithm.parameters():
            return []
        problems = []
        if self.expected_verdict is not None:
            verdict = detect_sync(trace)
            if verdict.status != self.expected_verdict:
                problems.append(f"expected {self.expected_verdict}, got {verdict}")
        if self.checker is not None:
            problems.extend(self.checker(trace))
        return problems

    def schedule_for_export(self) -> DynamicGraph:
        if self.dynamic_graph.is_periodic:
            return self.dynamic_graph
        if self.export_schedule is None:
            raise UnsupportedScheduleError(f"scenario {self.name!r} has no finite schedule form")
        return self.export_schedule


def seeded_initial_states(algorithm: ClockAlgorithm, n: int, seed: int) -> Tuple:
    if isinstance(algorithm, MinMaxClock):
        return tuple(random_states(n, seed))
    if isinstance(algorithm, SapClock):
        return tuple(random_sap_states(n, seed, algorithm.cfg.period))
    return tuple(random_fixed_states(n, seed, algorithm.period, algorithm.factor_value))


def _verify_advertised(dg: DynamicGraph, delta_cap: int, **expected) -> ConnectivityClass:
    cls = classify(dg, delta_cap)
    for key, want in expected.items():
        got = getattr(cls, key)
        if got != want:
            raise PreconditionError(f"{dg!r} advertises {key}={want}, classification gives {got}")
    return cls


def chain_counterexample(period: int, factor: int, n: int) -> Scenario:
    """Fixed-period clocks on a static bidirectional chain that never synchronize.

    Node 0 starts at 0 and every other node at ``PM/2``. At round ``t`` exactly
    ``PM/2 + 1 - |[t]_PM - PM/2|`` nodes hold ``[t]_PM``; the rest hold ``[t + PM/2]_PM``.
    """
    if period < 2 or period % 2:
        raise InvalidInputError(f"chain counterexample needs an even P >= 2, got P={period}")
    if factor < 1 or factor % 2 == 0:
        raise InvalidInputError(f"chain counterexample needs an odd M, got M={factor}")
    pm = period * factor
    half = pm // 2
    if n <= half + 1:
        raise InvalidInputError(f"chain counterexample needs n > PM/2 + 1, got n={n} <= {half + 1}")

    dg = DynamicGraph.static(bidirectional_chain(n), name=f"chain(n={n})")
    init = tuple(FixedClockState(0 if i == 0 else half) for i in range(n))

    def check(trace: ExecutionTrace) -> List[str]:
        problems = []
        for t in range(trace.last_round + 1):
            clocks = trace.clocks(t)
            low, high = t % pm, (t + half) % pm
            want = half + 1 - abs(low - half)
            got = sum(c == low for c in clocks)
            if got != want:
                problems.append(f"round {t}: {got} nodes at {low}, expected {want}")
            stray = [c for c in clocks if c not in (low, high)]
            if stray:
                problems.append(f"round {t}: clocks {stray} outside {{{low}, {high}}}")
        return problems

    return Scenario(
        name="chain", dynamic_graph=dg, algorithm=SapFixedClock(period, factor), horizon=10 * pm,
        suggested_init={"sap-fixed": init}, expected_verdict=SyncVerdict.NOT_WITHIN_HORIZON,
        checker=check, connectivity=_verify_advertised(dg, n - 1, strongly_connected_with_delay=1),
        parameters={"period": period, "factor": factor, "n": n}, full_horizon=True)


def h_digraph() -> Digraph:
    """Three nodes: ``i -> j`` and ``j <-> k``."""
    return Digraph(3, [(NODE_I, NODE_J), (NODE_J, NODE_K), (NODE_K, NODE_J)], name="H")


def h_counterexample(period: int, factor: int) -> Scenario:
    """Fixed-period clocks on the static digraph H: ``C_i = [t+1]_PM`` while ``C_k = [t]_PM``."""
    if period < 2:
        raise InvalidInputError(f"H counterexample needs P >= 2, got P={period}")
    if factor < 1:
        raise InvalidInputError(f"H counterexample needs M >= 1, got M={factor}")
    pm = period * factor
    dg = DynamicGraph.static(h_digraph())
    clocks0 = (1, 1, 0)

    def check(trace: ExecutionTrace) -> List[str]:
        problems = []
        for t in range(trace.last_round + 1):
            ci, cj, ck = trace.clocks(t)
            r = t % pm
            want = ((t + 1) % pm, 1 if r == 0 else r, r)
            if (ci, cj, ck) != want:
                problems.append(f"round {t}: clocks {(ci, cj, ck)}, expected {want}")
        return problems

    return Scenario(
        name="h-counterexample", dynamic_graph=dg, algorithm=SapFixedClock(period, factor), horizon=5 * pm,
        suggested_init={
            "sap-fixed": tuple(FixedClockState(c) for c in clocks0),
            "sap": tuple(SapState(c, factor) for c in clocks0),
        },
        expected_verdict=SyncVerdict.NOT_WITHIN_HORIZON, checker=check,
        connectivity=_verify_advertised(dg, 3, uniformly_rooted_with_delay=1,
                                        uniform_roots=frozenset({NODE_I}), center=frozenset({NODE_I})),
        parameters={"period": period, "factor": factor}, full_horizon=True)


# -- rooted counterexample ----------------------------------------------------------------

def counterexample_digraphs() -> Dict[str, Digraph]:
    """``G`` (i to j and k), ``H_k`` and ``H_j`` (G plus an edge back to i) and ``I``."""
    base = [(NODE_I, NODE_J), (NODE_I, NODE_K)]
    return {
        "G": Digraph(3, base, name="G"),
        "H_k": Digraph(3, base + [(NODE_K, NODE_I)], name="H_k"),
        "H_j": Digraph(3, base + [(NODE_J, NODE_I)], name="H_j"),
        "I": identity_digraph(3),
    }


def phi(clocks: Sequence[int], factors: Sequence[int], period: int, hub: int) -> bool:
    """Block-boundary predicate: ``hub`` (j or k) at clock 0, i and the other leaf in lockstep."""
    other = NODE_J if hub == NODE_K else NODE_K
    ci, mi = clocks[NODE_I], factors[NODE_I]
    return (mi == factors[other] and mi >= factors[hub] and ci == clocks[other]
            and ci % period != 0 and ci <= period * mi - 2 and clocks[hub] == 0)


@dataclass(frozen=True)
class Block:
    start: int  # the boundary round where phi holds; the block covers start+1 .. start+length
    factor: int
    clock: int
    hub: int

    def length(self, period: int) -> int:
        return period * self.factor - self.clock


class BlockSchedule:
    """Lazily extended block sequence: from ``(M, c)`` emit G for ``PM-c-2`` rounds, then H, then I."""

    def __init__(self, period: int, factor0: int, clock0: int, growth: GrowthFunction):
        self.period = period
        self.growth = growth
        self.blocks: List[Block] = [Block(0, factor0, clock0, NODE_K)]
        self.graphs = counterexample_digraphs()

    def _extend_to(self, t: int):
        while True:
            last = self.blocks[-1]
            end = last.start + last.length(self.period)
            if end >= t:
                return
            pm = self.period * last.factor
            nxt = self.growth.iterate(last.factor, pm - last.clock - 1)
            hub = NODE_J if last.hub == NODE_K else NODE_K
            self.blocks.append(Block(end, nxt, pm - last.clock, hub))

    def block(self, index: int) -> Block:
        while len(self.blocks) <= index:
            last = self.blocks[-1]
            self._extend_to(last.start + last.length(self.period) + 1)
        return self.blocks[index]

    def __call__(self, t: int) -> Digraph:
        self._extend_to(t)
        for b in reversed(self.blocks):
            if b.start < t:
                offset, length = t - b.start, b.length(self.period)
                if offset <= length - 2:
                    return self.graphs["G"]
                if offset == length - 1:
                    return self.graphs["H_k" if b.hub == NODE_K else "H_j"]
                return self.graphs["I"]
        raise InvalidInputError(f"rounds start at 1, got {t}")


def rooted_counterexample(period: int, factor0: int, clock0: int, growth: GrowthFunction,
                          num_blocks: int) -> Scenario:
    """A schedule rooted with delay two on which SAP never synchronizes, whatever ``g`` is."""
    if factor0 < 1:
        raise InvalidInputError(f"rooted counterexample needs M0 >= 1, got {factor0}")
    if not 1 <= clock0 <= period * factor0 - 2:
        raise InvalidInputError(f"rooted counterexample needs 1 <= c0 <= PM0 - 2, got c0={clock0}")
    if clock0 % period == 0:
        raise InvalidInputError(f"rooted counterexample needs c0 not congruent to 0 mod P, got c0={clock0}")
    if num_blocks < 1:
        raise InvalidInputError(f"num_blocks must be >= 1, got {num_blocks}")

    schedule = BlockSchedule(period, factor0, clock0, growth)
    boundaries = [schedule.block(b) for b in range(num_blocks + 1)]
    horizon = boundaries[-1].start
    dg = DynamicGraph.from_generator(3, schedule, name="rooted-counterexample")
    graphs = schedule.graphs
    finite = DynamicGraph.prefix_cycle([schedule(t) for t in range(1, horizon + 1)], [graphs["G"]],
                                       name="rooted-counterexample")
    connectivity = _verify_advertised(finite, 4, rooted_with_delay=2, center=frozenset({NODE_I}),
                                      uniformly_rooted_with_delay=None)

    def check(trace: ExecutionTrace) -> List[str]:
        problems = []
        for index, b in enumerate(boundaries):
            if b.start > trace.last_round:
                break
            clocks, factors = trace.clocks(b.start), trace.factors(b.start)
            if not phi(clocks, factors, period, b.hub):
                problems.append(f"round {b.start}: boundary predicate fails for hub {b.hub} "
                                f"(C={clocks}, M={factors})")
            if factors[NODE_I] != b.factor or clocks[NODE_I] != b.clock:
                problems.append(f"round {b.start}: node i has (M, C)=({factors[NODE_I]}, {clocks[NODE_I]}), "
                                f"block {index} predicts ({b.factor}, {b.clock})")
        return problems

    init = (SapState(clock0, factor0), SapState(clock0, factor0), SapState(0, factor0))
    return Scenario(
        name="rooted-counterexample", dynamic_graph=dg, algorithm=SapClock(SapConfig(period, growth)),
        horizon=horizon, suggested_init={"sap": init}, expected_verdict=SyncVerdict.NOT_WITHIN_HORIZON,
        checker=check, connectivity=connectivity,
        parameters={"period": period, "factor0": factor0, "clock0": clock0, "growth": str(growth),
                    "num_blocks": num_blocks, "boundaries": [b.start for b in boundaries]},
        export_schedule=finite, full_horizon=True)


# -- star alternation -----------------------------------------------------------------------

STAR_PATTERNS = ("strict_2cycle", "growing_runs")


def growing_runs_hub(t: int, hub_i: int = 0, hub_j: int = 1) -> int:
    """Hub of round ``t`` in the sequence i, j, i, i, j, j, i, i, i, ...: runs of length 1, 1, 2, 2, 3, 3."""
    k = 1
    while k * (k + 1) < t:
        k += 1
    offset = t - k * (k - 1) - 1
    return hub_i if offset < k else hub_j


def star_alternation(n: int, pattern: str) -> Scenario:
    if n < 3:
        raise InvalidInputError(f"star alternation needs n >= 3, got {n}")
    stars = {0: star(n, 0), 1: star(n, 1)}
    if pattern == "strict_2cycle":
        dg = DynamicGraph.prefix_cycle([], [stars[0], stars[1]], name=f"stars(n={n})")
        connectivity = _verify_advertised(dg, 2, rooted_with_delay=1, kernel=frozenset({0, 1}))
    elif pattern == "growing_runs":
        dg = DynamicGraph.from_generator(n, lambda t: stars[growing_runs_hub(t)], name=f"growing-stars(n={n})")
        connectivity = None
    else:
        raise InvalidInputError(f"unknown star pattern {pattern!r}; choose from {STAR_PATTERNS}")
    return Scenario(name="star-alternation", dynamic_graph=dg, algorithm=MinMaxClock(), horizon=20 * n,
                    connectivity=connectivity, parameters={"n": n, "pattern": pattern})


# -- link losses ----------------------------------------------------------------------------

def link_loss_adversary(n: int, losses: int, seed: int) -> Scenario:
    """Complete digraph minus ``losses`` seeded-random non-loop edges per round.

    Any digraph with at least ``n^2 - 3n + 3`` edges is rooted, so up to ``2n - 3`` losses
    keep every round rooted; each emitted digraph is checked anyway.
    """
    if n < 2:
        raise InvalidInputError(f"link-loss adversary needs n >= 2, got {n}")
    if not 0 <= losses <= 2 * n - 3:
        raise InvalidInputError(f"losses per round must satisfy 0 <= losses <= 2n - 3 = {2 * n - 3}, got {losses}")
    full = complete_digraph(n)
    candidates = full.non_loop_edges()

    def generate(t: int) -> Digraph:
        if losses == 0:
            return full
        rng = np.random.default_rng([seed, t])
        dropped = rng.choice(len(candidates), size=losses, replace=False)
        matrix = np.ones((n, n), dtype=bool)
        for index in dropped:
            i, j = candidates[index]
            matrix[i, j] = False
        g = Digraph.from_matrix(matrix)
        if not roots(g):
            raise AssertionError(f"round {t}: digraph with {g.edge_count} edges is not rooted")
        return g

    dg = DynamicGraph.from_generator(n, generate, name=f"link-loss(n={n},losses={losses},seed={seed})")
    return Scenario(name="link-loss", dynamic_graph=dg, algorithm=MinMaxClock(), horizon=500,
                    parameters={"n": n, "losses": losses, "seed": seed})


# -- round robin ----------------------------------------------------------------------------

def round_robin_transform(g: Digraph) -> Scenario:
    """Each node sends to one neighbor per round, cycling through its neighbors in ascending order.

    Round ``t`` carries the edges ``i -> N_i[(t-1) mod deg_i]``; the cycle length is the lcm
    of the degrees.
    """
    adj = g.matrix
    if not np.array_equal(adj, adj.T):
        raise InvalidInputError("round-robin transform needs a bidirectional digraph")
    count, _ = connected_components(csr_matrix(adj), directed=False)
    if count != 1:
        raise InvalidInputError(f"round-robin transform needs a connected digraph, got {count} components")
    n = g.n
    neighbors = [sorted(g.out_neighbors(i) - {i}) for i in range(n)]
    if n == 1:
        cycle = [identity_digraph(1)]
    else:
        length = int(np.lcm.reduce([len(nb) for nb in neighbors]))
        cycle = [Digraph(n, [(i, nb[(t - 1) % len(nb)]) for i, nb in enumerate(neighbors)])
                 for t in range(1, length + 1)]
    dg = DynamicGraph.prefix_cycle([], cycle, name=f"round-robin(n={n})")
    eccs = [eccentricity(dg, i) for i in range(n)]
    if not all(e.is_finite for e in eccs) or max(e.value for e in eccs) > 3 * n:
        raise PreconditionError(f"round-robin schedule eccentricities {[str(e) for e in eccs]} exceed 3n = {3 * n}")
    diameter = max(e.value for e in eccs)
    return Scenario(name="round-robin", dynamic_graph=dg, algorithm=SapFixedClock(6 * n, 1), horizon=21 * n,
                    parameters={"n": n, "cycle_length": len(cycle), "diameter": diameter})


def random_connected_bidirectional(n: int, seed: int, extra_edge_prob: float = 0.3) -> Digraph:
    """Random spanning tree plus independent extra edges, all symmetric."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    matrix = np.zeros((n, n), dtype=bool)
    for position in range(1, n):
        u, v = int(order[position]), int(order[rng.integers(0, position)])
        matrix[u, v] = matrix[v, u] = True
    extra = np.triu(rng.random((n, n)) < extra_edge_prob, k=1)
    matrix |= extra | extra.T
    return Digraph.from_matrix(matrix)


# -- random schedules -----------------------------------------------------------------------

RANDOM_CLASSES = ("rooted", "uniformly_rooted", "strongly_connected")


def _random_digraph(rng: np.random.Generator, n: int, density: float,
                    closed: Optional[np.ndarray] = None) -> Digraph:
    matrix = rng.random((n, n)) < density
    if closed is not None:
        # no edge may enter the closed set from outside it
        matrix[np.ix_(~closed, closed)] = False
    return Digraph.from_matrix(matrix)


def random_rooted(n: int, delta: int, kind: str, seed: int, budget: int = 2000,
                  prefix_length: int = 0) -> Scenario:
    """Rejection-sampled periodic schedule in ``kind`` with least delay at most ``delta``.

    ``uniformly_rooted`` samples exclude a finite diameter. ``rooted`` samples have varying root
    sets over windows of every length up to ``delta``; a purely periodic rooted schedule is always
    uniformly rooted for some larger delay, so only with a warm-up prefix do they also exclude
    uniform rootedness at every delay. ``prefix_length`` prepends arbitrary warm-up rounds; for
    ``uniformly_rooted`` only the rounds after it need to be uniform.
    """
    if n < 2 or delta < 1:
        raise InvalidInputError(f"random schedules need n >= 2 and delta >= 1, got n={n}, delta={delta}")
    if kind not in RANDOM_CLASSES:
        raise InvalidInputError(f"unknown class {kind!r}; choose from {RANDOM_CLASSES}")
    rng = np.random.default_rng(seed)
    densities = {"rooted": (0.25, 0.35, 0.45), "uniformly_rooted": (0.3, 0.5, 0.7),
                 "strongly_connected": (0.5, 0.7, 0.9)}[kind]

    for attempt in range(budget):
        density = densities[attempt % len(densities)]
        cycle_length = int(rng.integers(1, 4))
        closed = None
        if kind == "uniformly_rooted":
            size = int(rng.integers(1, n))
            closed = np.zeros(n, dtype=bool)
            closed[rng.choice(n, size=size, replace=False)] = True
        prefix = [_random_digraph(rng, n, density) for _ in range(prefix_length)]
        cycle = [_random_digraph(rng, n, density, closed) for _ in range(cycle_length)]
        dg = DynamicGraph.prefix_cycle(prefix, cycle, name=f"random-{kind}(n={n},seed={seed})")
        cls = classify(dg, delta)
        if kind == "strongly_connected":
            accepted = cls.strongly_connected_with_delay is not None
        elif kind == "uniformly_rooted":
            witness = cls.eventually_uniformly_rooted_with_delay if prefix_length else cls.uniformly_rooted_with_delay
            accepted = witness is not None and not cls.diameter.is_finite
        else:
            accepted = cls.rooted_with_delay is not None and cls.uniformly_rooted_with_delay is None
            if accepted and prefix_length:
                accepted = not is_uniformly_rootable(dg)
        if accepted:
            logger.debug(f"random {kind} schedule accepted after {attempt + 1} attempts")
            algorithm = SapClock(SapConfig(2, GrowthFunction.successor())) if kind == "uniformly_rooted" \
                else MinMaxClock()
            return Scenario(name="random-rooted", dynamic_graph=dg, algorithm=algorithm, horizon=2000,
                            connectivity=cls,
                            parameters={"n": n, "delta": delta, "class": kind, "seed": seed,
                                        "attempts": attempt + 1})
    raise PreconditionError(f"sampling budget of {budget} exhausted for a {kind} schedule "
                            f"(n={n}, delta={delta}, seed={seed})")


# -- registry -------------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioEntry:
    builder: Callable[..., Scenario]
    description: str
    defaults: Dict[str, object]


def _build_rooted(period, factor0, clock0, growth, num_blocks):
    return rooted_counterexample(period, factor0, clock0, GrowthFunction.parse(str(growth)), num_blocks)


def _build_round_robin(n, seed):
    return round_robin_transform(random_connected_bidirectional(n, seed))


SCENARIOS: Dict[str, ScenarioEntry] = {
    "chain": ScenarioEntry(chain_counterexample, "fixed-period clocks stuck at two values on a bidirectional chain",
                           {"period": 2, "factor": 3, "n": 5}),
    "h-counterexample": ScenarioEntry(h_counterexample, "fixed-period clocks on the digraph H never synchronize",
                                      {"period": 2, "factor": 4}),
    "rooted-counterexample": ScenarioEntry(_build_rooted, "SAP never synchronizes on a schedule rooted with delay 2",
                                           {"period": 2, "factor0": 2, "clock0": 1, "growth": "successor",
                                            "num_blocks": 4}),
    "star-alternation": ScenarioEntry(star_alternation, "alternating out-stars, rooted with delay 1",
                                      {"n": 4, "pattern": "strict_2cycle"}),
    "link-loss": ScenarioEntry(link_loss_adversary, "complete digraph minus up to 2n-3 random links per round",
                               {"n": 6, "losses": 9, "seed": 0}),
    "round-robin": ScenarioEntry(_build_round_robin, "round-robin schedule of a random bidirectional graph",
                                 {"n": 6, "seed": 0}),
    "random-rooted": ScenarioEntry(random_rooted, "rejection-sampled periodic schedule of a given class",
                                   {"n": 4, "delta": 2, "kind": "rooted", "seed": 0}),
}


def build_scenario(name: str, **overrides) -> Scenario:
    entry = SCENARIOS.get(name)
    if entry is None:
        raise InvalidInputError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    unknown = set(overrides) - set(entry.defaults)
    if unknown:
        raise InvalidInputError(f"scenario {name!r} takes {sorted(entry.defaults)}, got unknown {sorted(unknown)}")
    params = {**entry.defaults, **overrides}
    logger.info(f"building scenario {name} with {params}")
    return entry.builder(**params)
