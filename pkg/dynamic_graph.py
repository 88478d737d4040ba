# file: dynamic_graph.py

"""
Digraphs with mandatory self-loops, dynamic graphs as round-indexed schedules,
graph products and interval reachability queries.

A digraph is stored as a dense boolean adjacency matrix: ``matrix[i, j]`` is True
iff the round allows communication from ``i`` to ``j``. Node sets are small, so
products are plain Boolean matrix multiplications.
"""

import logging
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from errors import InvalidInputError, ScheduleError, UnsupportedScheduleError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class Digraph:
    """One round's communication topology over nodes ``0..n-1``.

    Self-loops are inserted by the constructor; instances are immutable.
    """

    __slots__ = ("_adj", "_key", "name")

    def __init__(self, n: int, edges: Iterable[Edge] = (), name: Optional[str] = None):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise InvalidInputError(f"node count must be a positive integer, got {n!r}")
        adj = np.zeros((n, n), dtype=bool)
        for edge in edges:
            try:
                i, j = edge
            except (TypeError, ValueError):
                raise InvalidInputError(f"edge must be a pair of node ids, got {edge!r}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInputError(f"edge ({i},{j}) outside node range 0..{n - 1}")
            adj[i, j] = True
        self._init_matrix(adj, name)

    def _init_matrix(self, adj: np.ndarray, name: Optional[str]):
        np.fill_diagonal(adj, True)
        adj.flags.writeable = False
        self._adj = adj
        self._key = (adj.shape[0], adj.tobytes())
        self.name = name

    @classmethod
    def from_matrix(cls, matrix, name: Optional[str] = None) -> "Digraph":
        adj = np.array(matrix, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise InvalidInputError(f"adjacency matrix must be square and non-empty, got shape {adj.shape}")
        graph = cls.__new__(cls)
        graph._init_matrix(adj, name)
        return graph

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Read-only boolean adjacency matrix."""
        return self._adj

    @property
    def edges(self) -> FrozenSet[Edge]:
        rows, cols = np.nonzero(self._adj)
        return frozenset(zip(rows.tolist(), cols.tolist()))

    @property
    def edge_count(self) -> int:
        return int(self._adj.sum())

    def non_loop_edges(self) -> List[Edge]:
        """Non-self-loop edges in ascending (i, j) order."""
        return sorted((i, j) for (i, j) in self.edges if i != j)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self._adj[i, j])

    def out_neighbors(self, i: int) -> FrozenSet[int]:
        return frozenset(np.nonzero(self._adj[i])[0].tolist())

    def in_neighbors(self, i: int) -> FrozenSet[int]:
        return frozenset(np.nonzero(self._adj[:, i])[0].tolist())

    def is_complete(self) -> bool:
        return bool(self._adj.all())

    def relabel(self, name: Optional[str]) -> "Digraph":
        return Digraph.from_matrix(self._adj, name=name)

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Digraph{label}(n={self.n}, edges={self.non_loop_edges()})"


def identity_digraph(n: int) -> Digraph:
    """The digraph with only a self-loop at each node."""
    return Digraph(n, name="I")


def complete_digraph(n: int) -> Digraph:
    return Digraph.from_matrix(np.ones((n, n), dtype=bool), name="K")


def star(n: int, hub: int) -> Digraph:
    """Out-star centred at ``hub``: an edge from the hub to every node."""
    return Digraph(n, ((hub, j) for j in range(n)), name=f"S{hub}")


def bidirectional_chain(n: int) -> Digraph:
    edges = [(k, k + 1) for k in range(n - 1)] + [(k + 1, k) for k in range(n - 1)]
    return Digraph(n, edges, name=f"chain{n}")


def product(g1: Digraph, g2: Digraph) -> Digraph:
    """Graph product: edge (i, j) iff some k has (i, k) in g1 and (k, j) in g2."""
    if g1.n != g2.n:
        raise InvalidInputError(f"cannot multiply digraphs with {g1.n} and {g2.n} nodes")
    prod = g1.matrix.astype(np.int32) @ g2.matrix.astype(np.int32)
    return Digraph.from_matrix(prod > 0)


def roots(g: Digraph) -> FrozenSet[int]:
    """Nodes with a path to every node of ``g``."""
    dist = shortest_path(csr_matrix(g.matrix), directed=True, unweighted=True)
    reach_all = np.isfinite(dist).all(axis=1)
    return frozenset(np.nonzero(reach_all)[0].tolist())


class DynamicGraph:
    """A digraph for every round ``t >= 1`` over a fixed node set.

    Either eventually periodic (a finite prefix followed by a repeating cycle), which
    is what the exact analyses require, or a programmatic generator ``t -> Digraph``.
    """

    def __init__(self, n: int, prefix: Sequence[Digraph] = (), cycle: Sequence[Digraph] = (),
                 generator: Optional[Callable[[int], Digraph]] = None, name: Optional[str] = None):
        if n < 1:
            raise InvalidInputError(f"node count must be positive, got {n}")
        self.n = n
        self.name = name
        self._generator = generator
        self._prefix = tuple(prefix)
        self._cycle = tuple(cycle)
        if generator is None:
            if not self._cycle:
                raise InvalidInputError("a periodic schedule needs a non-empty cycle")
            for g in self._prefix + self._cycle:
                if not isinstance(g, Digraph):
                    raise InvalidInputError(f"schedule entries must be Digraph, got {type(g).__name__}")
                if g.n != n:
                    raise InvalidInputError(f"schedule digraph has {g.n} nodes, expected {n}")
        elif self._prefix or self._cycle:
            raise InvalidInputError("a generator schedule takes no prefix or cycle")
        self._interval_cache: Dict[Tuple[int, int], Digraph] = {}

    @classmethod
    def prefix_cycle(cls, prefix: Sequence[Digraph], cycle: Sequence[Digraph],
                     name: Optional[str] = None) -> "DynamicGraph":
        graphs = list(prefix) + list(cycle)
        if not graphs:
            raise InvalidInputError("a periodic schedule needs a non-empty cycle")
        return cls(graphs[0].n, prefix=prefix, cycle=cycle, name=name)

    @classmethod
    def static(cls, g: Digraph, name: Optional[str] = None) -> "DynamicGraph":
        return cls(g.n, cycle=[g], name=name or g.name)

    @classmethod
    def from_generator(cls, n: int, generator: Callable[[int], Digraph],
                       name: Optional[str] = None) -> "DynamicGraph":
        return cls(n, generator=generator, name=name)

    @property
    def is_periodic(self) -> bool:
        return self._generator is None

    @property
    def prefix(self) -> Tuple[Digraph, ...]:
        return self._prefix

    @property
    def cycle(self) -> Tuple[Digraph, ...]:
        return self._cycle

    @property
    def prefix_length(self) -> int:
        return len(self._prefix)

    @property
    def cycle_length(self) -> int:
        return len(self._cycle)

    def canonical_round(self, t: int) -> int:
        """Smallest round carrying the same future as ``t`` (identity for generators)."""
        p = len(self._prefix)
        if self._generator is not None or t <= p:
            return t
        return p + 1 + (t - p - 1) % len(self._cycle)

    def digraph_at(self, t: int) -> Digraph:
        if t < 1:
            raise InvalidInputError(f"rounds start at 1, got {t}")
        if self._generator is None:
            p = len(self._prefix)
            if t <= p:
                return self._prefix[t - 1]
            return self._cycle[(t - p - 1) % len(self._cycle)]
        try:
            g = self._generator(t)
        except Exception as e:
            raise ScheduleError(f"schedule generator failed: {e}", round_number=t) from e
        if not isinstance(g, Digraph) or g.n != self.n:
            raise ScheduleError(f"schedule generator produced {g!r}, expected a {self.n}-node Digraph",
                                round_number=t)
        return g

    def rounds(self, t: int, t_end: int) -> List[Digraph]:
        return [self.digraph_at(s) for s in range(t, t_end + 1)]

    def __repr__(self):
        if self.is_periodic:
            shape = f"prefix={self.prefix_length}, cycle={self.cycle_length}"
        else:
            shape = "generator"
        return f"DynamicGraph({self.name!r}, n={self.n}, {shape})"


def interval_graph(dg: DynamicGraph, t: int, t_end: int) -> Digraph:
    """The product of the round digraphs ``t..t_end``.

    An empty interval (``t_end < t``) gives the self-loops-only digraph. Products of
    periodic schedules are memoised on the canonical start round.
    """
    if t < 1:
        raise InvalidInputError(f"rounds start at 1, got {t}")
    if t_end < t:
        return identity_digraph(dg.n)
    if not dg.is_periodic:
        acc = dg.digraph_at(t)
        for s in range(t + 1, t_end + 1):
            acc = product(acc, dg.digraph_at(s))
        return acc

    start = dg.canonical_round(t)
    length = t_end - t + 1
    cache = dg._interval_cache
    hit = cache.get((start, length))
    if hit is not None:
        return hit
    done = length
    while done > 1 and (start, done) not in cache:
        done -= 1
    acc = cache.get((start, done))
    if acc is None:
        acc = dg.digraph_at(start)
        cache[(start, 1)] = acc
    for k in range(done + 1, length + 1):
        acc = product(acc, dg.digraph_at(start + k - 1))
        cache[(start, k)] = acc
    return acc


def in_neighbors(dg: DynamicGraph, i: int, t: int, t_end: int) -> FrozenSet[int]:
    """``In_i(t:t_end)``: nodes with an edge to ``i`` in the interval product."""
    return interval_graph(dg, t, t_end).in_neighbors(i)


def reach_length(dg: DynamicGraph, i: int, t: int, limit: Optional[int] = None) -> Optional[int]:
    """Least ``d`` such that ``i`` reaches every node in ``G(t:t+d-1)``.

    Returns None when no such ``d`` exists. On periodic schedules this is exact:
    the reached set only grows, so a full cycle without growth proves it never will.
    On generators the search stops after ``limit`` rounds.
    """
    reached = np.zeros(dg.n, dtype=bool)
    reached[i] = True
    count = 1
    idle = 0
    s = t
    while True:
        reached = dg.digraph_at(s).matrix[reached].any(axis=0)
        d = s - t + 1
        new_count = int(reached.sum())
        if new_count == dg.n:
            return d
        if limit is not None and d >= limit:
            return None
        if dg.is_periodic and s > dg.prefix_length:
            idle = idle + 1 if new_count == count else 0
            if idle >= dg.cycle_length:
                return None
        count = new_count
        s += 1


def restrict(dg: DynamicGraph, nodes: Iterable[int]) -> DynamicGraph:
    """The dynamic graph induced on ``nodes``, re-indexed in ascending order."""
    keep = sorted(set(nodes))
    if not keep or keep[0] < 0 or keep[-1] >= dg.n:
        raise InvalidInputError(f"cannot restrict a {dg.n}-node schedule to {keep}")
    index = np.array(keep)

    def sub(g: Digraph) -> Digraph:
        return Digraph.from_matrix(g.matrix[np.ix_(index, index)], name=g.name)

    name = f"{dg.name}|{','.join(map(str, keep))}"
    if dg.is_periodic:
        return DynamicGraph(len(keep), prefix=[sub(g) for g in dg.prefix],
                            cycle=[sub(g) for g in dg.cycle], name=name)
    return DynamicGraph.from_generator(len(keep), lambda t: sub(dg.digraph_at(t)), name=name)


def eventual_reach(dg: DynamicGraph, i: int, t: int = 1) -> FrozenSet[int]:
    """Nodes that ``i`` ever reaches by temporal paths starting at round ``t`` (periodic schedules)."""
    if not dg.is_periodic:
        raise UnsupportedScheduleError("eventual reachability is only decidable on periodic schedules")
    reached = np.zeros(dg.n, dtype=bool)
    reached[i] = True
    count, idle, s = 1, 0, t
    while count < dg.n:
        reached = dg.digraph_at(s).matrix[reached].any(axis=0)
        new_count = int(reached.sum())
        if s > dg.prefix_length:
            idle = idle + 1 if new_count == count else 0
            if idle >= dg.cycle_length:
                break
        count = new_count
        s += 1
    return frozenset(np.nonzero(reached)[0].tolist())


def digraph_label(g: Digraph) -> str:
    """Stable identity of a round digraph for traces: its name, else its non-loop edge list."""
    if g.name:
        return g.name
    return ",".join(f"{i}>{j}" for i, j in g.non_loop_edges()) or "I"
