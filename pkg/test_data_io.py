#!/usr/bin/env python3
"""
Tests for the schedule text format, trace files and experiment configuration.
"""

import json
import os
import sys

import pytest

# Add the project directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli.config import ExperimentConfig
from clocks.minmax import MinMaxClock, random_states
from clocks.sap import GrowthFunction, SapClock, SapConfig, SapState
from data_io import (dumps_record, format_schedule, parse_schedule, read_json, read_schedule, read_trace_records,
                     states_from_records, write_schedule, write_trace)
from dynamic_graph import Digraph, DynamicGraph
from engine import Execution, run, summary
from errors import ConfigError, InvalidInputError, ScheduleParseError
from scenarios import h_digraph, link_loss_adversary

SCHEDULE = """\
# warm-up round, then a two-round cycle
n=3
round 1 [warm]: (1,0)
cycle:
round 2: (0,1) (0,2)
round 3:
init sap:
node 0: {"C": 1, "M": 2}
node 1: {"C": 0, "M": 1}
node 2: {"C": 3, "M": 1}
"""


def test_parse_schedule():
    dg, init = parse_schedule(SCHEDULE, name="example")
    assert dg.name == "example"
    assert dg.prefix_length == 1 and dg.cycle_length == 2
    assert dg.digraph_at(1).name == "warm"
    assert dg.digraph_at(1).non_loop_edges() == [(1, 0)]
    assert dg.digraph_at(2).non_loop_edges() == [(0, 1), (0, 2)]
    assert dg.digraph_at(3) == Digraph(3)
    assert init["sap"][2] == {"C": 3, "M": 1}


def test_format_then_parse_preserves_the_schedule():
    dg, init = parse_schedule(SCHEDULE)
    again, init_again = parse_schedule(format_schedule(dg, init))
    assert again.prefix == dg.prefix and again.cycle == dg.cycle
    assert init_again == init


def test_rounds_without_marker_form_the_cycle():
    dg, init = parse_schedule("n=2\nround 1: (0,1)\nround 2: (1,0)\n")
    assert dg.prefix_length == 0 and dg.cycle_length == 2
    assert init == {}


@pytest.mark.parametrize("text, line", [
    ("round 1: (0,1)\n", 1),
    ("n=2\nround 2: (0,1)\n", 2),
    ("n=2\nround 1: (0,1) 0,1\n", 2),
    ("n=2\nround 1: (0,2)\n", 2),
    ("n=2\ncycle:\nround 1:\ncycle:\n", 4),
    ("n=2\nround 1:\ninit sap:\nnode 1: {\"C\": 0, \"M\": 1}\n", 4),
    ("n=2\nround 1:\ninit sap:\nnode 0: {bad json}\n", 4),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ScheduleParseError) as info:
        parse_schedule(text)
    assert info.value.line_number == line


def test_parse_errors_without_line_numbers():
    with pytest.raises(ScheduleParseError):
        parse_schedule("# nothing here\n")
    with pytest.raises(ScheduleParseError):
        parse_schedule("n=2\ncycle:\n")
    with pytest.raises(ScheduleParseError):
        parse_schedule("n=2\nround 1:\ninit sap:\nnode 0: {\"C\": 0, \"M\": 1}\n")


def test_schedule_files(tmp_path):
    dg, init = parse_schedule(SCHEDULE)
    path = tmp_path / "nested" / "warm.txt"
    write_schedule(dg, str(path), init)
    read, read_init = read_schedule(str(path))
    assert read.name == "warm"
    assert read.cycle == dg.cycle
    assert read_init == init
    with pytest.raises(FileNotFoundError):
        read_schedule(str(tmp_path / "missing.txt"))


def test_generators_have_no_text_form():
    with pytest.raises(InvalidInputError):
        format_schedule(DynamicGraph.from_generator(2, lambda t: Digraph(2)))


def test_states_from_records():
    sap = SapClock(SapConfig(2, GrowthFunction.successor()))
    _, init = parse_schedule(SCHEDULE)
    assert states_from_records(sap, init["sap"]) == (SapState(1, 2), SapState(0, 1), SapState(3, 1))
    with pytest.raises(InvalidInputError):
        states_from_records(sap, [{"C": 1}])
    with pytest.raises(InvalidInputError):
        states_from_records(MinMaxClock(), [{"view": []}])


def test_trace_files(tmp_path):
    dg = DynamicGraph.static(h_digraph())
    sap = SapClock(SapConfig(2, GrowthFunction.successor()))
    trace = run(Execution(sap, dg, [SapState(1, 1), SapState(1, 1), SapState(0, 1)], 6, seed=4))
    path = tmp_path / "trace.jsonl"
    write_trace(trace, str(path), verbosity=1, summary=summary(trace))
    records = read_trace_records(str(path))
    assert len(records) == 1 + 7 + 1
    assert records[0]["type"] == "header"
    assert records[0]["seed"] == 4
    assert records[0]["initial"][2] == {"C": 0, "M": 1}
    assert [r["t"] for r in records[1:-1]] == list(range(7))
    assert records[2]["digraph"] == "H"
    assert records[2]["nodes"][1] == {"C": 1, "M": 2, "g_fired": True, "j_min": 2}
    assert records[-1]["type"] == "summary"


def test_dumps_record_is_canonical():
    assert dumps_record({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_config_validation():
    config = ExperimentConfig(algorithm="sap", scenario="chain")
    assert config.period == 2 and config.growth == "successor"
    assert config.default_horizon(5) == 100
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithm="sap")
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithm="sap", scenario="chain", schedule="x.txt")
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithm="bogus", scenario="chain")
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithm="sap", scenario="chain", period=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithm="sap", scenario="chain", growth="cubic")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"algorithm": "sap", "scenario": "chain", "colour": "red"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"algorithm": "sap", "scenario": "chain", "period": "2"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"algorithm": "sap", "scenario": "chain", "reps": True})


def test_config_files(tmp_path):
    config = ExperimentConfig(algorithm="sap-fixed", scenario="chain", scenario_params={"n": 7}, factor=3, seed=9)
    path = tmp_path / "config.json"
    config.save(str(path))
    assert json.loads(path.read_text())["scenario_params"] == {"n": 7}
    assert ExperimentConfig.load(str(path)) == config
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(str(path))
    path.write_text("{not json")
    with pytest.raises(ScheduleParseError):
        read_json(str(path))


def test_config_builds_algorithms():
    assert isinstance(ExperimentConfig(algorithm="minmax", scenario="chain").build_algorithm(), MinMaxClock)
    sap = ExperimentConfig(algorithm="sap", scenario="chain", growth="affine", period=3).build_algorithm()
    assert sap.cfg == SapConfig(3, GrowthFunction.affine())
    fixed = ExperimentConfig(algorithm="sap-fixed", scenario="chain", factor=3).build_algorithm()
    assert fixed.parameters() == {"algorithm": "sap-fixed", "period": 2, "factor": 3}


def test_identical_executions_serialize_identically(tmp_path):
    scenario = link_loss_adversary(5, 4, seed=8)
    execution = Execution(MinMaxClock(), scenario.dynamic_graph, random_states(5, 8, h_max=2), 25, seed=8)
    paths = [tmp_path / "first.jsonl", tmp_path / "second.jsonl"]
    for path in paths:
        trace = run(execution)
        write_trace(trace, str(path), verbosity=2, summary=summary(trace))
    assert paths[0].read_bytes() == paths[1].read_bytes()
