"""Monte Carlo runs of the controlled-rotation protocol and trace summaries.

Each run writes a :class:`~fibanyon.trace.ProtocolTrace` that starts with an
``input`` event; summaries are computed from traces alone, so traces written
by separate ``run`` invocations can be aggregated the same way.
"""
from __future__ import annotations

import csv
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .codec import encode, projective_deviation
from .protocols.execution import controlled_rotation
from .protocols.gates import CR
from .protocols.preparation import gate_CZ, prepare_bell
from .trace import ProtocolTrace, RandomSource


def _pairs(v) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in v]


def _unpairs(rows) -> np.ndarray:
    return np.array([complex(re, im) for re, im in rows])


def traced_run(v, source: RandomSource, mode: str = "literal"):
    """Run the protocol on ``v`` with ``source``, logging the input first."""
    if source.trace is None:
        source.trace = ProtocolTrace()
    v = np.asarray(v, dtype=complex)
    source.log("input", params={"amplitudes": _pairs(v / np.linalg.norm(v)), "mode": mode})
    return controlled_rotation(encode(v), source, mode=mode)


def _one_run(child: np.random.SeedSequence, mode: str, auxiliary: bool) -> str:
    c_input, c_run, c_aux = child.spawn(3)
    rng = np.random.default_rng(c_input)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    source = RandomSource(c_run, trace=True)
    try:
        traced_run(v, source, mode)
    except Exception as exc:  # the failure is part of the record
        source.log("error", params={"type": type(exc).__name__, "message": str(exc)})
    if auxiliary:
        # Sampled D-operator statistics: one Bell preparation and one CZ attempt.
        aux = RandomSource(c_aux, trace=source.trace)
        prepare_bell(aux)
        bits = rng.normal(size=4) + 1j * rng.normal(size=4)
        gate_CZ(encode(bits), aux, heralded=False)
    return source.trace.dumps()


def simulate(runs: int, seed, mode: str = "literal", workers: int = 1,
             auxiliary: bool = True) -> list[ProtocolTrace]:
    """Independent runs seeded by spawning ``seed``; returns one trace per run.

    With ``workers > 1`` runs are spread over worker processes and merged in
    run order, so the result does not depend on the worker count.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = seq.spawn(runs)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            texts = list(pool.map(_one_run, children, [mode] * runs, [auxiliary] * runs,
                                  chunksize=max(1, runs // (8 * workers))))
    else:
        texts = [_one_run(c, mode, auxiliary) for c in children]
    return [ProtocolTrace.loads(t) for t in texts]


def split_runs(trace: ProtocolTrace) -> list[ProtocolTrace]:
    """Split concatenated run traces at each step-0 event."""
    runs: list[list] = []
    for ev in trace:
        if ev.step == 0 or not runs:
            runs.append([])
        runs[-1].append(ev)
    return [ProtocolTrace(r) for r in runs]


@dataclass
class RunRecord:
    terminated: bool
    walk_length: int
    attachments: int
    recoveries: int
    forced_rounds: list[int] = field(default_factory=list)
    deviation: float = float("nan")
    leak: float = float("nan")
    error: str = ""


def record_of(trace: ProtocolTrace) -> RunRecord:
    final = trace.select("final_braid")
    rec = RunRecord(
        terminated=bool(final),
        walk_length=len(trace.select("walk")),
        attachments=len(trace.select("attach_gamma")),
        recoveries=len(trace.select("discard_residue")),
        forced_rounds=[int(ev.params["rounds"]) for ev in trace.select("forced_fuse")],
    )
    errors = trace.select("error")
    if errors:
        rec.error = f"{errors[0].params.get('type')}: {errors[0].params.get('message')}"
    inputs = trace.select("input")
    if final and inputs:
        v = _unpairs(inputs[0].params["amplitudes"])
        out = _unpairs(final[-1].outcome)
        rec.deviation = projective_deviation(out, CR @ v)
        rec.leak = float(final[-1].params.get("leak", float("nan")))
    return rec


def _rate(events, success=1) -> tuple[int, int]:
    return sum(1 for ev in events if ev.outcome == success), len(events)


def summarize(traces: list[ProtocolTrace]) -> dict:
    """Aggregate statistics over run traces."""
    records = [record_of(t) for t in traces]
    done = [r for r in records if r.terminated]
    rounds = np.array([x for r in records for x in r.forced_rounds], dtype=float)
    attach = sum(r.attachments for r in records)
    recov = sum(r.recoveries for r in records)
    events = [ev for t in traces for ev in t]

    def by_op(op):
        return [ev for ev in events if ev.op == op]

    fused_left = _rate(by_op("fuse_left"), 0)
    fused_right = _rate(by_op("fuse_right"), 0)
    middle = Counter(ev.outcome for ev in by_op("dispose_middle"))
    n_middle = sum(middle.values())
    d_ops = {}
    for name in ("D1", "D2", "D3", "D4"):
        sampled = [ev for ev in by_op(name) if not ev.params.get("heralded")]
        ok, total = _rate(sampled)
        d_ops[name] = (ok / total if total else float("nan"), total)
    return {
        "runs": len(records),
        "termination_rate": len(done) / len(records) if records else float("nan"),
        "errors": [r.error for r in records if r.error],
        "walk_length_histogram": dict(sorted(Counter(r.walk_length for r in done).items())),
        "attachments": attach,
        "branch_fused": (attach - recov) / attach if attach else float("nan"),
        "branch_recovered": recov / attach if attach else float("nan"),
        "left_fusion_vacuum": fused_left[0] / fused_left[1] if fused_left[1] else float("nan"),
        "right_fusion_vacuum": fused_right[0] / fused_right[1] if fused_right[1] else float("nan"),
        "middle_outcomes": {k: v / n_middle for k, v in sorted(middle.items())} if n_middle else {},
        "forced_rounds_quantiles": ({q: float(np.quantile(rounds, q)) for q in (0.5, 0.9, 0.99, 1.0)}
                                    if rounds.size else {}),
        "d_operator_success": d_ops,
        "max_deviation": max((r.deviation for r in done), default=float("nan")),
        "max_leak": max((r.leak for r in done), default=float("nan")),
        "records": records,
    }


def format_summary(s: dict) -> str:
    lines = [
        f"runs: {s['runs']}",
        f"termination rate: {s['termination_rate']!r}",
        f"errors: {len(s['errors'])}",
        f"max projective deviation from CR(2pi/5): {s['max_deviation']!r}",
        f"max leak: {s['max_leak']!r}",
        f"Gamma attachments: {s['attachments']}",
        f"  fused: {s['branch_fused']!r}",
        f"  recovered: {s['branch_recovered']!r}",
        f"left fusion to vacuum: {s['left_fusion_vacuum']!r}",
        f"right fusion to vacuum: {s['right_fusion_vacuum']!r}",
        "middle fusion outcomes: " + ", ".join(f"{k}={v!r}" for k, v in s["middle_outcomes"].items()),
        "forced-measurement rounds quantiles: "
        + ", ".join(f"q{q:g}={v!r}" for q, v in s["forced_rounds_quantiles"].items()),
        "D-operator success rates (sampled): "
        + ", ".join(f"{k}={rate!r} (n={n})" for k, (rate, n) in s["d_operator_success"].items()),
        "walk length histogram:",
    ]
    lines += [f"  {length:4d}: {count}" for length, count in s["walk_length_histogram"].items()]
    return "\n".join(lines)


def write_table(s: dict, path) -> None:
    """Per-run table, one row per run, for plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "terminated", "walk_length", "attachments", "recoveries",
                    "forced_rounds_total", "deviation", "leak"])
        for i, r in enumerate(s["records"]):
            w.writerow([i, int(r.terminated), r.walk_length, r.attachments, r.recoveries,
                        sum(r.forced_rounds), repr(r.deviation), repr(r.leak)])
