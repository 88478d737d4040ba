# file: data_io.py

"""
File formats: the line-oriented schedule format (with optional initial-state sections),
JSON-lines execution traces and JSON documents.

Schedule files look like::

    n=3
    round 1 [G]: (0,1) (0,2)
    cycle:
    round 2: (0,1) (0,2) (2,0)
    init sap:
    node 0: {"C": 1, "M": 2}

Rounds are numbered consecutively from 1 and list non-self-loop edges only. Rounds before
the ``cycle:`` marker form the prefix; without a marker every round belongs to the cycle.
"""

import json
import logging
import os
import re
from typing import Dict, Iterable, List, Optional, Tuple

from dynamic_graph import Digraph, DynamicGraph
from errors import InvalidInputError, ScheduleParseError

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^n\s*=\s*(\d+)$")
_ROUND = re.compile(r"^round\s+(\d+)(?:\s+\[([^\]]*)\])?\s*:(.*)$")
_EDGES = re.compile(r"(\s*\(\s*\d+\s*,\s*\d+\s*\))*\s*")
_EDGE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")
_INIT = re.compile(r"^init\s+([\w-]+)\s*:$")
_NODE = re.compile(r"^node\s+(\d+)\s*:\s*(\{.*\})$")


def format_digraph_edges(g: Digraph) -> str:
    return " ".join(f"({i},{j})" for i, j in g.non_loop_edges())


def format_schedule(dg: DynamicGraph, init: Optional[Dict[str, List[Dict[str, object]]]] = None) -> str:
    """Text form of a periodic schedule plus optional ``{algorithm: [node records]}`` init sections."""
    if not dg.is_periodic:
        raise InvalidInputError(f"only prefix+cycle schedules have a finite text form, got {dg!r}")
    lines = [f"# schedule {dg.name}" if dg.name else "# schedule", f"n={dg.n}"]
    for t, g in enumerate(dg.prefix + dg.cycle, start=1):
        if t == dg.prefix_length + 1:
            lines.append("cycle:")
        label = f" [{g.name}]" if g.name else ""
        lines.append(f"round {t}{label}: {format_digraph_edges(g)}".rstrip())
    for algorithm, records in (init or {}).items():
        lines.append(f"init {algorithm}:")
        for i, record in enumerate(records):
            lines.append(f"node {i}: {json.dumps(record, sort_keys=True)}")
    return "\n".join(lines) + "\n"


def parse_schedule(text: str, name: Optional[str] = None
                   ) -> Tuple[DynamicGraph, Dict[str, List[Dict[str, object]]]]:
    """Parse the schedule text format; returns the schedule and its init sections."""
    n = None
    prefix: List[Digraph] = []
    cycle: List[Digraph] = []
    in_cycle = False
    init: Dict[str, List[Dict[str, object]]] = {}
    section = None
    expected_round = 1

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            match = _HEADER.match(line)
            if not match:
                raise ScheduleParseError(f"expected header 'n=<count>', got {line!r}", line_number)
            n = int(match.group(1))
            if n < 1:
                raise ScheduleParseError("node count must be positive", line_number)
            continue

        match = _INIT.match(line)
        if match:
            section = match.group(1)
            init[section] = []
            continue
        if section is not None:
            node = _NODE.match(line)
            if not node:
                raise ScheduleParseError(f"expected 'node <i>: {{...}}' in init section, got {line!r}", line_number)
            if int(node.group(1)) != len(init[section]):
                raise ScheduleParseError(f"init nodes must be listed in order, expected node {len(init[section])}",
                                         line_number)
            try:
                init[section].append(json.loads(node.group(2)))
            except json.JSONDecodeError as e:
                raise ScheduleParseError(f"bad node record: {e}", line_number)
            continue

        if line == "cycle:":
            if in_cycle:
                raise ScheduleParseError("duplicate 'cycle:' marker", line_number)
            in_cycle = True
            continue
        match = _ROUND.match(line)
        if not match:
            raise ScheduleParseError(f"expected 'round <t>: (i,j) ...', got {line!r}", line_number)
        t, label, body = int(match.group(1)), match.group(2), match.group(3)
        if t != expected_round:
            raise ScheduleParseError(f"rounds must be consecutive: expected round {expected_round}, got {t}",
                                     line_number)
        if not _EDGES.fullmatch(body):
            raise ScheduleParseError(f"malformed edge list {body.strip()!r}", line_number)
        edges = [(int(a), int(b)) for a, b in _EDGE.findall(body)]
        try:
            g = Digraph(n, edges, name=label or None)
        except InvalidInputError as e:
            raise ScheduleParseError(str(e), line_number)
        (cycle if in_cycle else prefix).append(g)
        expected_round += 1

    if n is None:
        raise ScheduleParseError("empty schedule: missing header 'n=<count>'")
    if not in_cycle:
        prefix, cycle = [], prefix
    if not cycle:
        raise ScheduleParseError("schedule has no cycle rounds")
    for algorithm, records in init.items():
        if len(records) != n:
            raise ScheduleParseError(f"init section {algorithm!r} lists {len(records)} nodes, expected {n}")
    return DynamicGraph(n, prefix=prefix, cycle=cycle, name=name), init


def read_schedule(file_path: str) -> Tuple[DynamicGraph, Dict[str, List[Dict[str, object]]]]:
    """Read a schedule file; the schedule is named after the file."""
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"Schedule file not found: {file_path}")
    with open(file_path, "r", encoding="utf-8") as f:
        text = f.read()
    name = os.path.splitext(os.path.basename(file_path))[0]
    dg, init = parse_schedule(text, name=name)
    logger.info(f"read {dg!r} from {file_path}")
    return dg, init


def write_schedule(dg: DynamicGraph, file_path: str,
                   init: Optional[Dict[str, List[Dict[str, object]]]] = None) -> None:
    _ensure_parent(file_path)
    with open(file_path, "w", encoding="utf-8") as f:
        f.write(format_schedule(dg, init))
    logger.info(f"wrote {dg!r} to {file_path}")


def states_from_records(algorithm, records: Iterable[Dict[str, object]]) -> Tuple:
    try:
        return tuple(algorithm.state_from_record(r) for r in records)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInputError(f"bad {algorithm.name} initial state record: {e}")


def dumps_record(record: Dict[str, object]) -> str:
    """One JSON line with sorted keys, so identical runs serialize byte for byte."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_trace(trace, file_path: str, verbosity: int = 1, summary: Optional[Dict[str, object]] = None) -> None:
    """Header record, one record per round, then the summary record if given."""
    _ensure_parent(file_path)
    with open(file_path, "w", encoding="utf-8") as f:
        f.write(dumps_record(trace.execution.header_record()) + "\n")
        for t in range(trace.last_round + 1):
            f.write(dumps_record(trace.round_record(t, verbosity)) + "\n")
        if summary is not None:
            f.write(dumps_record(summary) + "\n")
    logger.info(f"wrote {trace.last_round} rounds to {file_path}")


def read_trace_records(file_path: str) -> List[Dict[str, object]]:
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"Trace file not found: {file_path}")
    records = []
    with open(file_path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ScheduleParseError(f"bad trace record: {e}", line_number)
    return records


def read_json(file_path: str) -> Dict[str, object]:
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")
    with open(file_path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ScheduleParseError(f"{file_path}: invalid JSON: {e.msg}", e.lineno)


def write_json(data: Dict[str, object], file_path: str) -> None:
    _ensure_parent(file_path)
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def _ensure_parent(file_path: str) -> None:
    parent = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(parent, exist_ok=True)
