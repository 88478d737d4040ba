# file: engine.py

"""
Deterministic synchronous-round executor.

Each round ``t`` every node sends from its round ``t-1`` state, receives the messages of its
in-neighbors in ``G(t)`` (deduplicated, ordered by sender id) and applies its transition.
The resulting trace is the substrate of every measurement and invariant check.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from clocks.minmax import MinMaxClock
from clocks.sap import SapClock, SapFixedClock
from dynamic_graph import DynamicGraph, digraph_label, eventual_reach
from errors import HorizonTooShortError, InvalidInputError, PreconditionError

logger = logging.getLogger(__name__)

ClockAlgorithm = Union[MinMaxClock, SapClock, SapFixedClock]

EXACT = "exact"
MOD_P = "mod_p"


@dataclass(frozen=True)
class SyncMode:
    """``exact``: all clocks equal and advancing by one; ``mod_p``: all clocks congruent modulo ``period``."""

    kind: str
    period: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (EXACT, MOD_P):
            raise InvalidInputError(f"unknown synchronization mode {self.kind!r}")
        if self.kind == MOD_P and (self.period is None or self.period < 1):
            raise InvalidInputError(f"mod-P synchronization needs P >= 1, got {self.period}")

    @classmethod
    def exact(cls) -> "SyncMode":
        return cls(EXACT)

    @classmethod
    def mod_p(cls, period: int) -> "SyncMode":
        return cls(MOD_P, period)

    def __str__(self):
        return "exact" if self.kind == EXACT else f"mod {self.period}"


def default_mode(algorithm: ClockAlgorithm) -> SyncMode:
    if isinstance(algorithm, MinMaxClock):
        return SyncMode.exact()
    return SyncMode.mod_p(algorithm.cfg.period)


@dataclass(frozen=True)
class Execution:
    algorithm: ClockAlgorithm
    dynamic_graph: DynamicGraph
    initial_states: Tuple
    horizon: int
    seed: Optional[int] = None
    early_stop: bool = False
    confirmation_window: Optional[int] = None
    min_stop_round: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "initial_states", tuple(self.initial_states))
        if self.horizon < 1:
            raise InvalidInputError(f"horizon must be >= 1, got {self.horizon}")
        if len(self.initial_states) != self.dynamic_graph.n:
            raise InvalidInputError(
                f"{len(self.initial_states)} initial states for a {self.dynamic_graph.n}-node schedule")
        for state in self.initial_states:
            self.algorithm.validate(state)
        if self.confirmation_window is not None and self.confirmation_window < 1:
            raise InvalidInputError(f"confirmation window must be >= 1, got {self.confirmation_window}")
        if self.min_stop_round is not None and self.min_stop_round < 0:
            raise InvalidInputError(f"min_stop_round must be >= 0, got {self.min_stop_round}")

    @property
    def n(self) -> int:
        return self.dynamic_graph.n

    @property
    def mode(self) -> SyncMode:
        return default_mode(self.algorithm)

    @property
    def window(self) -> int:
        if self.confirmation_window is not None:
            return self.confirmation_window
        mode = self.mode
        return 3 if mode.kind == EXACT else 2 * mode.period

    def may_stop_at(self, t: int) -> bool:
        """Early stop is allowed at round ``t``.

        Congruence modulo ``P`` is closed under every SAP step, so a confirmed mod-P streak is
        final. Equal MinMax clocks can still diverge, so exact mode only stops at or after a
        proven stabilization round ``min_stop_round`` and never stops without one.
        """
        if not self.early_stop:
            return False
        if self.mode.kind == EXACT:
            return self.min_stop_round is not None and t >= self.min_stop_round
        return t >= (self.min_stop_round or 0)

    def header_record(self) -> Dict[str, object]:
        return {
            "type": "header",
            **self.algorithm.parameters(),
            "schedule": self.dynamic_graph.name,
            "n": self.n,
            "horizon": self.horizon,
            "seed": self.seed,
            "early_stop": self.early_stop,
            "initial": [self.algorithm.state_record(s, verbosity=2) for s in self.initial_states],
        }


@dataclass
class ExecutionTrace:
    """States per round; index 0 holds the initial states after first-round pre-reduction."""

    execution: Execution
    states: List[Tuple] = field(default_factory=list)
    infos: List[Tuple[Dict[str, object], ...]] = field(default_factory=list)
    digraphs: List[Optional[str]] = field(default_factory=list)
    stopped_early: bool = False

    @property
    def algorithm(self) -> ClockAlgorithm:
        return self.execution.algorithm

    @property
    def n(self) -> int:
        return self.execution.n

    @property
    def last_round(self) -> int:
        return len(self.states) - 1

    def clocks(self, t: int) -> List[int]:
        return [self.algorithm.clock(s) for s in self.states[t]]

    def factors(self, t: int) -> List[int]:
        return [self.algorithm.factor(s) for s in self.states[t]]

    def min_clocks(self, t: int) -> List[Optional[int]]:
        return [s.min_clock for s in self.states[t]]

    def round_record(self, t: int, verbosity: int = 1) -> Dict[str, object]:
        nodes = []
        for state, info in zip(self.states[t], self.infos[t]):
            record = self.algorithm.state_record(state, verbosity)
            record.update(info)
            nodes.append(record)
        return {"type": "round", "t": t, "digraph": self.digraphs[t], "nodes": nodes}


def _deliver(algorithm: ClockAlgorithm, dg: DynamicGraph, states: Sequence, t: int):
    g = dg.digraph_at(t)
    messages = [algorithm.send(s) for s in states]
    new_states, infos = [], []
    for i, state in enumerate(states):
        inbox = [(j, messages[j]) for j in sorted(g.in_neighbors(i))]
        new_state, info = algorithm.step(state, inbox)
        new_states.append(new_state)
        infos.append(info)
    return g, tuple(new_states), tuple(infos)


def _synchronized(clocks: Sequence[int], mode: SyncMode) -> bool:
    if mode.kind == EXACT:
        return len(set(clocks)) == 1
    return len({c % mode.period for c in clocks}) == 1


class _SyncStreak:
    """Start of the current run of rounds satisfying the synchronization predicate."""

    def __init__(self, mode: SyncMode):
        self.mode = mode
        self.start: Optional[int] = None
        self._last: Optional[int] = None

    def update(self, t: int, clocks: Sequence[int]) -> Optional[int]:
        if not _synchronized(clocks, self.mode):
            self.start = None
        elif self.start is None:
            self.start = t
        elif self.mode.kind == EXACT and clocks[0] != self._last + 1:
            self.start = t
        self._last = clocks[0]
        return self.start


def run(execution: Execution) -> ExecutionTrace:
    """Execute up to ``horizon`` rounds; stop early only where ``Execution.may_stop_at`` allows it."""
    algorithm, dg = execution.algorithm, execution.dynamic_graph
    states = tuple(algorithm.prepare(s) for s in execution.initial_states)
    trace = ExecutionTrace(execution, [states], [tuple({} for _ in states)], [None])
    streak = _SyncStreak(execution.mode)
    window = execution.window
    logger.info(f"running {algorithm.name} on {dg!r} for up to {execution.horizon} rounds (seed {execution.seed})")
    if execution.early_stop and execution.mode.kind == EXACT and execution.min_stop_round is None:
        logger.debug("exact-mode run without a proven stabilization round: early stop disabled")

    for t in range(1, execution.horizon + 1):
        g, states, infos = _deliver(algorithm, dg, states, t)
        trace.states.append(states)
        trace.infos.append(infos)
        trace.digraphs.append(digraph_label(g))
        if any(info.get("degenerate") for info in infos):
            logger.warning(f"round {t}: degenerate empty-view repair applied")
        start = streak.update(t, trace.clocks(t))
        if start is not None and t - start + 1 >= window and execution.may_stop_at(t):
            logger.info(f"early stop at round {t}: synchronized since round {start}")
            trace.stopped_early = True
            break
    logger.debug(f"trace has {trace.last_round} rounds")
    return trace


def replay_round(trace: ExecutionTrace, t: int) -> Tuple:
    """Recompute round ``t`` from the stored round ``t-1`` states."""
    if not 1 <= t <= trace.last_round:
        raise InvalidInputError(f"round {t} outside the recorded rounds 1..{trace.last_round}")
    _, states, _ = _deliver(trace.algorithm, trace.execution.dynamic_graph, trace.states[t - 1], t)
    return states


def inconsistent_rounds(trace: ExecutionTrace) -> List[int]:
    """Rounds whose stored states differ from a replay of the previous round."""
    return [t for t in range(1, trace.last_round + 1) if replay_round(trace, t) != trace.states[t]]


@dataclass(frozen=True)
class SyncVerdict:
    status: str
    mode: SyncMode
    round: Optional[int] = None

    SYNCHRONIZED = "synchronized"
    NOT_WITHIN_HORIZON = "not_within_horizon"

    @property
    def synchronized(self) -> bool:
        return self.status == self.SYNCHRONIZED

    def to_record(self) -> Dict[str, object]:
        return {"status": self.status, "round": self.round, "mode": str(self.mode)}

    def __str__(self):
        if self.synchronized:
            return f"SynchronizedAt({self.round}) [{self.mode}]"
        return f"NotWithinHorizon [{self.mode}]"


def detect_sync(trace: ExecutionTrace, mode: Optional[SyncMode] = None) -> SyncVerdict:
    """Earliest round ``r >= 1`` from which the predicate holds at every recorded round.

    Persistence is checked on the trace, never assumed.
    """
    mode = mode or trace.execution.mode
    earliest = None
    later = None
    for t in range(trace.last_round, 0, -1):
        clocks = trace.clocks(t)
        if not _synchronized(clocks, mode):
            break
        if mode.kind == EXACT and later is not None and later != clocks[0] + 1:
            break
        earliest, later = t, clocks[0]
    if earliest is None:
        return SyncVerdict(SyncVerdict.NOT_WITHIN_HORIZON, mode)
    return SyncVerdict(SyncVerdict.SYNCHRONIZED, mode, earliest)


@dataclass(frozen=True)
class KernelMeasurement:
    """Settling rounds of ``c_i(t) - t`` and the derived kernel-dominance quantities."""

    s0: int
    t0: int
    c0: int
    r0: int
    settle_rounds: Tuple[int, ...]
    base_round: int


def _settle_round(series: Sequence[int], base: int) -> int:
    r = len(series) - 1
    while r > base and series[r - 1] == series[r]:
        r -= 1
    return r


def measure_s0_t0(trace: ExecutionTrace, kernel: Iterable[int], delta: int) -> KernelMeasurement:
    """Measure ``r_i``, ``r0 = max r_i``, ``t0 = r0 + 1 + delta(n - |K|)`` and the kernel constant.

    On periodic schedules a node is settled once ``c_i(t) - t`` equals the smallest shifted
    initial min-clock among the nodes that ever reach it, its exact limit. Generator schedules
    only get a tail heuristic: no change over the last quarter of the trace.
    """
    if not isinstance(trace.algorithm, MinMaxClock):
        raise PreconditionError("kernel measurements apply to MinMax traces only")
    kernel = frozenset(kernel)
    if not kernel:
        raise PreconditionError("the kernel is empty; the schedule is not rooted with bounded delay")
    dg, n, last = trace.execution.dynamic_graph, trace.n, trace.last_round
    base = 0 if all(c is not None for c in trace.min_clocks(0)) else 1
    if last <= base:
        raise HorizonTooShortError(f"trace of {last} rounds is too short to measure settling")
    shifted = [[trace.states[t][i].min_clock - t for t in range(base, last + 1)] for i in range(n)]

    if dg.is_periodic:
        reaches = [eventual_reach(dg, j, base + 1) for j in range(n)]
        for i in range(n):
            limit = min(shifted[j][0] for j in range(n) if i in reaches[j])
            if shifted[i][-1] != limit:
                raise HorizonTooShortError(
                    f"c_{i}(t) - t is {shifted[i][-1]} at round {last}, its limit is {limit}")
    else:
        tail = max(2, (last - base) // 4)
        for i in range(n):
            if len(set(shifted[i][-tail:])) > 1:
                raise HorizonTooShortError(f"c_{i}(t) - t still moves within the last {tail} rounds")

    settle = tuple(base + _settle_round(series, 0) for series in shifted)
    r0 = max(settle)
    t0 = r0 + 1 + (n - len(kernel)) * delta
    if t0 > last:
        raise HorizonTooShortError(f"t0 = {t0} lies beyond the last recorded round {last}")
    c0 = min(shifted[j][-1] for j in kernel)
    s0 = dg.prefix_length + 1 if dg.is_periodic else 1
    logger.info(f"measured r0={r0}, t0={t0}, s0={s0}, c0={c0}")
    return KernelMeasurement(s0=s0, t0=t0, c0=c0, r0=r0, settle_rounds=settle, base_round=base)


@dataclass(frozen=True)
class ZMetrics:
    """Center-relative SAP quantities; per-round entries are None before ``t0_z``."""

    center: FrozenSet[int]
    t0_z: int
    m_z: int
    common_clock: Tuple[Optional[int], ...]
    synchronized_sets: Tuple[Optional[FrozenSet[int]], ...]
    m_tilde: Tuple[Optional[int], ...]


def z_metrics(trace: ExecutionTrace, center: Iterable[int], period: int) -> ZMetrics:
    """Common clock ``C(t)`` of the center, the Z-synchronized set ``S_Z(t)`` and ``M~(t)``.

    ``t0_z`` is the least round ``s >= 1`` such that all center nodes share one clock and the
    period factor ``M_Z`` at every round ``t >= s`` of the trace.
    """
    if not isinstance(trace.algorithm, SapClock):
        raise PreconditionError("center metrics apply to SAP traces only")
    z = sorted(set(center))
    if not z:
        raise PreconditionError("the center is empty")
    last = trace.last_round
    m_z = trace.factors(last)[z[0]]

    t0_z = None
    for t in range(last, 0, -1):
        clocks, factors = trace.clocks(t), trace.factors(t)
        if len({clocks[k] for k in z}) > 1 or any(factors[k] != m_z for k in z):
            break
        t0_z = t
    if t0_z is None:
        raise HorizonTooShortError(f"center {z} is not internally synchronized at round {last}")

    common: List[Optional[int]] = [None] * (last + 1)
    sets: List[Optional[FrozenSet[int]]] = [None] * (last + 1)
    tilde: List[Optional[int]] = [None] * (last + 1)
    for t in range(t0_z, last + 1):
        clocks, factors = trace.clocks(t), trace.factors(t)
        c = clocks[z[0]]
        s_z = frozenset(i for i in range(trace.n) if (clocks[i] - c) % period == 0)
        outside = [factors[i] for i in range(trace.n) if i not in s_z]
        common[t], sets[t] = c, s_z
        tilde[t] = min(outside) if outside else None
    return ZMetrics(frozenset(z), t0_z, m_z, tuple(common), tuple(sets), tuple(tilde))


def summary(trace: ExecutionTrace, verdict: Optional[SyncVerdict] = None) -> Dict[str, object]:
    """Summary record: verdict plus per-node maxima over the whole trace."""
    verdict = verdict or detect_sync(trace)
    record = {
        "type": "summary",
        **trace.algorithm.parameters(),
        "schedule": trace.execution.dynamic_graph.name,
        "seed": trace.execution.seed,
        "rounds": trace.last_round,
        "stopped_early": trace.stopped_early,
        "verdict": verdict.to_record(),
        "max_clock": max(max(trace.clocks(t)) for t in range(trace.last_round + 1)),
    }
    if isinstance(trace.algorithm, SapClock):
        record["max_factor"] = max(max(trace.factors(t)) for t in range(trace.last_round + 1))
        record["g_fired"] = sum(bool(info.get("g_fired")) for infos in trace.infos for info in infos)
    if isinstance(trace.algorithm, MinMaxClock):
        record["max_view_size"] = max(len(s.view) for states in trace.states for s in states)
        record["degenerate_repairs"] = sum(bool(info.get("degenerate")) for infos in trace.infos for info in infos)
    return record
