"""Acceptance checks for the whole simulator, one function per criterion.

Each check returns a :class:`CheckResult` with the measured worst-case
deviation and the tolerance it was held to.  ``tol`` overrides every
floating-point tolerance of a check, ``scale`` shrinks the Monte Carlo
sample counts (``scale=1`` is the full suite) and ``seed`` offsets every
Monte Carlo seed.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .codec import braid_protocol, decode, encode, extract_gate, projective_deviation
from .fusion_basis import PHI, TAU, dim, enumerate_basis, fuse
from .operators import ProtocolError, braid_generator
from .protocols.execution import (controlled_rotation, default_gammas, entangle_branch, fuse_gamma)
from .protocols.gates import ALPHA, BELL, BETA, CR, CZ, D_OPERATORS, GATES, X, cz_composite
from .protocols.layout import DisposalError
from .protocols.preparation import (conjugate_gamma, gate_CZ, gate_X, make_alpha, make_beta, prepare_bell,
                                    prepare_gamma)
from .skein import evaluate
from .trace import RandomSource


@dataclass
class CheckResult:
    criterion: int
    title: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.criterion:2d} {self.title}: measured {self.measured:.17g}"
                f" (tol {self.tolerance:g}) {self.detail} [{self.seconds:.2f} s]").replace("  [", " [")


def _timed(criterion: int, title: str):
    def wrap(fn: Callable[..., tuple[bool, float, float, str]]):
        def run(tol: float | None = None, mode: str = "literal", scale: float = 1.0, seed: int = 0) -> CheckResult:
            t0 = time.perf_counter()
            passed, measured, used_tol, detail = fn(tol=tol, mode=mode, scale=scale, seed=seed)
            return CheckResult(criterion, title, bool(passed), float(measured), float(used_tol), detail,
                               time.perf_counter() - t0)
        run.criterion = criterion
        run.title = title
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


def _count(n: int, scale: float) -> int:
    return max(1, int(round(n * scale)))


def _random_qubits(rng: np.random.Generator, m: int) -> np.ndarray:
    v = rng.normal(size=2**m) + 1j * rng.normal(size=2**m)
    return v / np.linalg.norm(v)


def fib(k: int) -> int:
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def count_paths(n: int) -> tuple[int, int]:
    """Brute-force count of fusion paths, per total charge, by walking the fusion rules."""
    counts = [0, 0]

    def walk(charge: int, left: int) -> None:
        if left == 0:
            counts[charge] += 1
            return
        for c in fuse(charge, TAU):
            walk(c, left - 1)

    walk(0, n)
    return counts[0], counts[1]


@_timed(1, "dimension law (2 <= n <= 24)")
def check_dimensions(tol=None, mode="literal", scale=1.0, seed=0):
    bad = []
    for n in range(2, 25):
        brute = count_paths(n)
        for total, want in ((0, fib(n - 1)), (1, fib(n))):
            got = (dim(n, total), brute[total])
            if n <= 16:
                got += (len(enumerate_basis(n, total)),)
            if any(g != want for g in got):
                bad.append((n, total, got, want))
    return not bad, len(bad), 0, f"mismatches={bad[:3]}" if bad else "all counts agree"


@_timed(2, "representation sanity (n <= 8)")
def check_representation(tol=None, mode="literal", scale=1.0, seed=0):
    tol = 1e-10 if tol is None else tol
    worst = 0.0
    for n in range(2, 9):
        for total in (0, 1):
            d = dim(n, total)
            if d == 0:
                continue
            eye = np.eye(d)
            gens = [braid_generator(n, total, k).dense() for k in range(1, n)]
            for k, s in enumerate(gens):
                worst = max(worst, np.abs(s @ s.conj().T - eye).max())
                worst = max(worst, np.abs(np.linalg.matrix_power(s, 10) - eye).max())
                if k + 1 < len(gens):
                    t = gens[k + 1]
                    worst = max(worst, np.abs(s @ t @ s - t @ s @ t).max())
                for t in gens[k + 2:]:
                    worst = max(worst, np.abs(s @ t - t @ s).max())
    return worst <= tol, worst, tol, ""


@_timed(3, "sigma_1 and sigma_1^5 as one-qubit gates")
def check_sigma_gates(tol=None, mode="literal", scale=1.0, seed=0):
    tol = 1e-10 if tol is None else tol
    r = np.diag([np.exp(-4j * np.pi / 5), np.exp(3j * np.pi / 5)])
    d1 = projective_deviation(extract_gate(braid_protocol([(1, 1)]), 1), r)
    d5 = projective_deviation(extract_gate(braid_protocol([(1, 5)]), 1), np.diag([1, -1]))
    worst = max(d1, d5)
    return worst <= tol, worst, tol, f"R dev={d1:.3g}, Z dev={d5:.3g}"


@_timed(4, "alpha and beta from braids")
def check_alpha_beta(tol=None, mode="literal", scale=1.0, seed=0):
    tol = 1e-10 if tol is None else tol
    da = projective_deviation(decode(make_alpha())[0], ALPHA)
    db = projective_deviation(decode(make_beta())[0], BETA)
    worst = max(da, db)
    return worst <= tol, worst, tol, f"alpha dev={da:.3g}, beta dev={db:.3g}"


@_timed(5, "Bell state from D1 D2 |alpha alpha>")
def check_bell(tol=None, mode="literal", scale=1.0, seed=0):
    tol = 1e-10 if tol is None else tol
    vec = np.diag(D_OPERATORS["D1"]) * np.diag(D_OPERATORS["D2"]) * np.kron(ALPHA, ALPHA)
    worst = projective_deviation(vec, BELL)
    failures = 0
    for s in range(_count(100, scale)):
        try:
            reg = prepare_bell(RandomSource(seed + s))
        except Exception:
            failures += 1
            continue
        worst = max(worst, projective_deviation(decode(reg)[0], BELL))
    return worst <= tol and failures == 0, worst, tol, f"preparation failures={failures}"


@_timed(6, "X gate on 20 random inputs")
def check_x(tol=None, mode="literal", scale=1.0, seed=0):
    tol = 1e-9 if tol is None else tol
    rng = np.random.default_rng(seed + 6)
    worst = 0.0
    for s in range(20):
        v = _random_qubits(rng, 1)
        src = RandomSource(seed + s)
        ok, out = gate_X(encode(v), prepare_bell(src), src, heralded=True)
        if not ok:
            return False, np.inf, tol, f"seed {seed + s}: success branch has zero probability"
        out_v, leak = decode(out)
        worst = max(worst, projective_deviation(out_v, X @ v), leak)
    return worst <= tol, worst, tol, ""


@_timed(7, "CZ from D3, D4 and X gates")
def check_cz(tol=None, mode="literal", scale=1.0, seed=0):
    tol_m = 1e-12 if tol is None else tol
    tol_g = 1e-9 if tol is None else tol
    dm = np.abs(cz_composite() - (-PHI**-2) * np.diag([1, 1, 1, -1])).max()
    counter = itertools.count(seed)

    def protocol(reg):
        ok, out = gate_CZ(reg, RandomSource(next(counter)), heralded=True)
        if not ok:
            raise ProtocolError("CZ success branch has zero probability")
        return out

    dg = projective_deviation(extract_gate(protocol, 2), CZ)
    return dm <= tol_m and dg <= tol_g, max(dm, dg), max(tol_m, tol_g), f"matrix dev={dm:.3g}, simulated dev={dg:.3g}"


@_timed(8, "Gamma preparation overlap")
def check_gamma(tol=None, mode="literal", scale=1.0, seed=0):
    tol = 1e-10 if tol is None else tol
    worst = 0.0
    for s in range(_count(100, scale)):
        g = prepare_gamma(RandomSource(seed + s))
        worst = max(worst, 1 - g.overlap(), abs(1 - conjugate_gamma(g).overlap()))
    return worst <= tol, worst, tol, f"seeds={_count(100, scale)}, 1 - |overlap| for plain and conjugated"


@_timed(9, "G1 / G2 on the fused branches (20 anyons)")
def check_branches(tol=None, mode="literal", scale=1.0, seed=0):
    tol = 1e-9 if tol is None else tol
    g = default_gammas()()
    counter = itertools.count(seed)
    devs = {}
    for gamma, suffix in ((g, ""), (conjugate_gamma(g), "inv")):
        for middle, name in ((0, "G1"), (1, "G2")):
            def protocol(reg, gamma=gamma, middle=middle):
                return entangle_branch(reg, gamma, middle, RandomSource(next(counter)), mode)[0]
            devs[name + suffix] = projective_deviation(extract_gate(protocol, 2), GATES[name + suffix])
    worst = max(devs.values())
    return worst <= tol, worst, tol, ", ".join(f"{k}={v:.3g}" for k, v in devs.items())


@_timed(10, "recovery soundness of fuse_gamma")
def check_recovery(tol=None, mode="literal", scale=1.0, seed=0):
    tol_f = 1e-9 if tol is None else tol
    tol_e = 1e-10 if tol is None else tol
    g = default_gammas()()
    gammas = (g, conjugate_gamma(g))
    rng = np.random.default_rng(seed + 10)
    runs = _count(10**4, scale)
    worst_f = worst_e = 0.0
    recovered = fused = errors = 0
    for s in range(runs):
        v = _random_qubits(rng, 2)
        try:
            res = fuse_gamma(encode(v), gammas[s % 2], RandomSource(seed + s), mode)
        except (ProtocolError, DisposalError):
            errors += 1
            continue
        if res.outcome == "fused":
            fused += 1
            continue
        recovered += 1
        out, leak = decode(res.state)
        fid = abs(np.vdot(v, out)) ** 2
        worst_f = max(worst_f, 1 - fid, leak)
        worst_e = max(worst_e, res.residue_entropy)
        if res.checked_fusion != TAU:
            errors += 1
    ok = errors == 0 and recovered > 0 and worst_f <= tol_f and worst_e <= tol_e
    return ok, worst_f, tol_f, (f"runs={runs}, recovered={recovered}, fused={fused}, contract errors={errors}, "
                                f"max residue entropy={worst_e:.3g}")


def end_to_end_sweep(n_inputs: int, n_seeds: int, mode: str = "literal", seed: int = 0) -> dict:
    """Run the full protocol on ``n_inputs`` random inputs with ``n_seeds`` seeds each.

    Returns arrays of per-run measurements; shared by the walk and the
    end-to-end checks, since every end-to-end run contains a seeded walk.
    Results are cached per argument set.
    """
    return _sweep(int(n_inputs), int(n_seeds), mode, int(seed))


@lru_cache(maxsize=4)
def _sweep(n_inputs: int, n_seeds: int, mode: str, seed: int) -> dict:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed + 12)
    inputs = [_random_qubits(rng, 2) for _ in range(n_inputs)]
    dev, leak, steps, walk_dev, recov, done = [], [], [], [], [], []
    errors = []
    for i, v in enumerate(inputs):
        for s in range(n_seeds):
            try:
                w = controlled_rotation(encode(v), RandomSource(seed + i * n_seeds + s), mode=mode)
            except Exception as exc:  # reported, never hidden
                errors.append(f"input {i} seed {s}: {exc}")
                continue
            out, lk = decode(w.register)
            dev.append(projective_deviation(out, CR @ v))
            leak.append(lk)
            steps.append(w.steps)
            walk_dev.append(projective_deviation(w.accumulated(), GATES["G1"]))
            recov.append(w.recoveries)
            done.append(w.states[-1].done and (w.states[-1].k, w.states[-1].l) == (1, 0))
    return {"deviation": np.array(dev), "leak": np.array(leak), "steps": np.array(steps),
            "walk_deviation": np.array(walk_dev), "recoveries": np.array(recov), "done": np.array(done),
            "errors": errors, "runs": n_inputs * n_seeds, "seconds": time.perf_counter() - t0}


def _sweep_size(scale: float) -> tuple[int, int]:
    side = max(1, int(round(100 * np.sqrt(scale))))
    return side, side


@_timed(11, "random walk terminates at G1")
def check_walk(tol=None, mode="literal", scale=1.0, seed=0):
    tol = 1e-9 if tol is None else tol
    sweep = end_to_end_sweep(*_sweep_size(scale), mode, seed)
    completed = int(sweep["done"].sum())
    worst = float(sweep["walk_deviation"].max()) if completed else np.inf
    ok = not sweep["errors"] and completed == sweep["runs"] and worst <= tol
    longest = int(sweep["steps"].max()) if completed else 0
    return ok, worst, tol, (f"terminated {completed}/{sweep['runs']}, longest walk={longest}, "
                            f"errors={len(sweep['errors'])}, shared sweep {sweep['seconds']:.1f} s")


@_timed(12, "end-to-end CR(2 pi/5)")
def check_end_to_end(tol=None, mode="literal", scale=1.0, seed=0):
    tol_d = 1e-8 if tol is None else tol
    tol_l = 1e-10 if tol is None else tol
    sweep = end_to_end_sweep(*_sweep_size(scale), mode, seed)
    if sweep["errors"]:
        return False, np.inf, tol_d, f"{len(sweep['errors'])} runs failed: {sweep['errors'][:2]}"
    worst_d = float(sweep["deviation"].max())
    worst_l = float(sweep["leak"].max())
    ok = worst_d <= tol_d and worst_l <= tol_l
    return ok, worst_d, tol_d, (f"runs={sweep['runs']}, max leak={worst_l:.3g}, "
                                f"max recoveries={int(sweep['recoveries'].max())}, "
                                f"max walk={int(sweep['steps'].max())}, shared sweep {sweep['seconds']:.1f} s")


@_timed(13, "skein crossings vs braid generators, bubble")
def check_skein(tol=None, mode="literal", scale=1.0, seed=0):
    tol_c = 1e-10 if tol is None else tol
    tol_b = 1e-12 if tol is None else tol
    worst = 0.0
    for n in range(2, 7):
        for k in range(1, n):
            for sign in (1, -1):
                value = evaluate(f"id({n}); cross({k},{'+' if sign > 0 else '-'})")
                for total in (0, 1):
                    ref = braid_generator(n, total, k, sign).dense()
                    worst = max(worst, np.abs(value.matrix(total) - ref).max())
    bubble = abs(evaluate("cup(1); cap(1)").scalar - PHI)
    return worst <= tol_c and bubble <= tol_b, max(worst, bubble), tol_c, f"bubble dev={bubble:.3g}"


CHECKS = (check_dimensions, check_representation, check_sigma_gates, check_alpha_beta, check_bell, check_x,
          check_cz, check_gamma, check_branches, check_recovery, check_walk, check_end_to_end, check_skein)


def run_all(tol: float | None = None, mode: str = "literal", scale: float = 1.0, seed: int = 0,
            report: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        res = check(tol=tol, mode=mode, scale=scale, seed=seed)
        if report is not None:
            report(res)
        results.append(res)
    return results
