import json

import jsonschema
import numpy as np
import pytest

from fibanyon.codec import decode, encode, projective_deviation
from fibanyon.protocols.execution import controlled_rotation
from fibanyon.protocols.gates import CR
from fibanyon.stats import format_summary, record_of, simulate, split_runs, summarize, traced_run, write_table
from fibanyon.trace import SCHEMA_PATH, ProtocolTrace, RandomSource, ReplaySource, TraceEvent


@pytest.fixture(scope="module")
def traces():
    return simulate(12, seed=3)


def test_trace_roundtrip(tmp_path):
    src = RandomSource(4, trace=True)
    traced_run([1, 0, 0, 0], src)
    text = src.trace.dumps()
    again = ProtocolTrace.loads(text)
    assert again.dumps() == text
    path = tmp_path / "run.jsonl"
    src.trace.write(path)
    assert ProtocolTrace.read(path).dumps() == text
    ev = TraceEvent(0, "x", {"a": 1}, outcome=(1, 2))
    assert TraceEvent.from_json(ev.to_json()).outcome == [1, 2]


def test_trace_events_match_schema(traces):
    schema = json.loads(SCHEMA_PATH.read_text())
    for t in traces[:3]:
        for line in t.dumps().splitlines():
            jsonschema.validate(json.loads(line), schema)


def test_steps_are_consecutive(traces):
    for t in traces:
        assert [ev.step for ev in t] == list(range(len(t)))
        assert t.events[0].op == "input"


def test_replay_reproduces_run():
    v = np.array([0.5, 0.5j, -0.5, 0.5])
    src = RandomSource(9, trace=True)
    a = controlled_rotation(encode(v), src)
    replay = ReplaySource(src.draws, trace=True)
    b = controlled_rotation(encode(v), replay)
    assert np.array_equal(decode(a.register)[0], decode(b.register)[0])
    assert replay.trace.dumps() == src.trace.dumps()
    assert projective_deviation(decode(b.register)[0], CR @ v) < 1e-9


def test_replay_runs_out():
    with pytest.raises(Exception):
        controlled_rotation(encode(np.ones(4) / 2), ReplaySource([0.5]))


def test_same_seed_same_trace():
    a = simulate(3, seed=11, auxiliary=False)
    b = simulate(3, seed=11, auxiliary=False)
    assert [t.dumps() for t in a] == [t.dumps() for t in b]


def test_workers_do_not_change_results():
    a = simulate(4, seed=2, workers=1)
    b = simulate(4, seed=2, workers=2)
    assert [t.dumps() for t in a] == [t.dumps() for t in b]


def test_split_concatenated_traces(traces):
    joined = ProtocolTrace([ev for t in traces for ev in t])
    parts = split_runs(joined)
    assert [p.dumps() for p in parts] == [t.dumps() for t in traces]


def test_records(traces):
    for t in traces:
        r = record_of(t)
        assert r.terminated and not r.error
        assert r.walk_length >= 1
        assert r.deviation < 1e-9 and r.leak < 1e-12
        assert r.attachments >= r.walk_length


def test_summary_frequencies(traces):
    s = summarize(traces)
    assert s["runs"] == 12 and s["termination_rate"] == 1
    assert s["branch_fused"] + s["branch_recovered"] == pytest.approx(1)
    assert sum(s["middle_outcomes"].values()) == pytest.approx(1)
    assert sum(s["walk_length_histogram"].values()) == 12
    assert 0 < s["left_fusion_vacuum"] < 1
    rate, n = s["d_operator_success"]["D1"]
    assert n > 0 and 0 <= rate <= 1
    assert s["forced_rounds_quantiles"][0.5] >= 1
    text = format_summary(s)
    assert "termination rate: 1.0" in text and "walk length histogram" in text


def test_write_table(traces, tmp_path):
    s = summarize(traces)
    path = tmp_path / "runs.csv"
    write_table(s, path)
    rows = path.read_text().splitlines()
    assert len(rows) == 13 and rows[0].startswith("run,terminated")


def test_errors_are_recorded():
    t = ProtocolTrace()
    t.record("input", params={"amplitudes": [[1, 0], [0, 0], [0, 0], [0, 0]], "mode": "literal"})
    t.record("error", params={"type": "ProtocolError", "message": "walk budget"})
    s = summarize([t])
    assert s["termination_rate"] == 0 and s["errors"] == ["ProtocolError: walk budget"]


def test_simulate_rejects_zero_runs():
    with pytest.raises(ValueError):
        simulate(0, seed=1)
