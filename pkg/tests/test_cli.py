import subprocess
import sys

import numpy as np
import pytest

from fibanyon.cli import main
from fibanyon.stats import split_runs
from fibanyon.trace import ProtocolTrace


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bubble_file(tmp_path, capsys):
    f = tmp_path / "bubble.dgm"
    f.write_text("cup(1);\ncap(1)\n")
    code, out, _ = run(capsys, "eval-diagram", str(f))
    assert code == 0 and out.startswith("1.6180339887")


def test_diagram_matrix_output(tmp_path, capsys):
    f = tmp_path / "cross.dgm"
    f.write_text("id(2); cross(1,+)")
    code, out, _ = run(capsys, "eval-diagram", str(f))
    assert code == 0 and "i" in out


def test_bad_diagram_is_usage_error(tmp_path, capsys):
    f = tmp_path / "bad.dgm"
    f.write_text("cup(1);\n cop(2)")
    code, _, err = run(capsys, "eval-diagram", str(f))
    assert code == 2 and "line 2" in err
    code, _, _ = run(capsys, "eval-diagram", str(tmp_path / "missing.dgm"))
    assert code == 2


def parse_matrix(text):
    rows = [line.split() for line in text.strip().splitlines()]
    return np.array([[complex(z.replace("i", "j")) for z in row] for row in rows])


def test_dump_gate_examples(capsys):
    code, out, _ = run(capsys, "dump-gate", "--qubits", "1", "--braid", "s1^5")
    assert code == 0
    assert np.allclose(parse_matrix(out), np.diag([1, -1]), atol=1e-10)
    code, out, _ = run(capsys, "dump-gate", "--qubits", "1", "--braid", "s1 s1^-1")
    assert code == 0
    assert np.allclose(parse_matrix(out), np.eye(2), atol=1e-10)


def test_dump_gate_errors(capsys):
    assert run(capsys, "dump-gate", "--qubits", "2", "--braid", "s4")[0] == 1
    assert run(capsys, "dump-gate", "--qubits", "1", "--braid", "s9")[0] == 2
    assert run(capsys, "dump-gate", "--qubits", "1", "--braid", "x1")[0] == 2


def test_run_seed_one(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "run", "--seed", "1", "--input", "1,0,0,0", "--trace", str(trace))
    assert code == 0
    dev = float(out.split("projective deviation from CR(2pi/5) input: ")[1].split()[0])
    leak = float(out.split("leak: ")[1].split()[0])
    assert dev <= 1e-9 and leak <= 1e-12
    assert ProtocolTrace.read(trace).events[0].op == "input"


def test_identical_seeds_identical_traces(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        assert run(capsys, "run", "--seed", "7", "--input", "0.5,0.5,0.5j,-0.5", "--trace", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_basis_input_records_phase(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "run", "--seed", "2", "--input", "0,0,0,1", "--trace", str(trace))
    assert code == 0
    final = ProtocolTrace.read(trace).select("final_braid")[-1]
    gate = [complex(*z) for z in final.params["gate"]]
    assert gate[3] / gate[0] == pytest.approx(np.exp(2j * np.pi / 5), abs=1e-9)
    out_amps = [complex(*z) for z in final.outcome]
    assert abs(abs(out_amps[3]) - 1) < 1e-9


def test_seed_is_required(capsys):
    code, _, err = run(capsys, "run", "--input", "1,0,0,0")
    assert code == 2 and "--entropy" in err
    assert run(capsys, "stats", "--runs", "2")[0] == 2
    code, out, _ = run(capsys, "run", "--entropy", "--input", "1,0,0,0")
    assert code == 0 and out.startswith("seed: ")


def test_usage_errors(capsys):
    assert run(capsys, "run", "--seed", "1", "--input", "1,0")[0] == 2
    assert run(capsys, "run", "--seed", "1", "--input", "0,0,0,0")[0] == 2
    assert run(capsys, "run", "--seed", "1", "--input", "1,0,0,0", "--tol", "0")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2


def test_stats_and_trace_aggregation(tmp_path, capsys):
    table = tmp_path / "runs.csv"
    code, out, _ = run(capsys, "stats", "--runs", "5", "--seed", "4", "--out", str(table))
    assert code == 0 and "termination rate: 1.0" in out
    assert len(table.read_text().splitlines()) == 6
    joined = tmp_path / "joined.jsonl"
    for seed in ("1", "2"):
        t = tmp_path / f"run{seed}.jsonl"
        run(capsys, "run", "--seed", seed, "--input", "1,1,1,1", "--trace", str(t))
        joined.write_text(joined.read_text() + t.read_text() if joined.exists() else t.read_text())
    assert len(split_runs(ProtocolTrace.read(joined))) == 2
    code, out, _ = run(capsys, "stats", "--traces", str(joined))
    assert code == 0 and "runs: 2" in out


def test_verify_small_scale(capsys):
    code, out, _ = run(capsys, "verify", "--scale", "0.0005")
    assert code == 0 and "13/13 checks passed" in out
    assert "criterion 12 end-to-end CR(2 pi/5): measured" in out


def test_verify_unattainable_tolerance(capsys):
    code, out, _ = run(capsys, "verify", "--tol", "1e-30", "--scale", "0.0005")
    assert code == 1 and "[FAIL]" in out


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "fibanyon", "dump-gate", "--qubits", "1", "--braid", "s1^10"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert np.allclose(parse_matrix(res.stdout), np.eye(2), atol=1e-9)
