"""Placing anyon blocks side by side and discarding disentangled ones."""
from __future__ import annotations

import numpy as np

from ..fusion_basis import PRUNE, VACUUM, AnyonState


class DisposalError(RuntimeError):
    """A block that should be discarded is still entangled with the rest."""


def juxtapose(*states: AnyonState) -> AnyonState:
    """Tensor product of charge-0 systems placed left to right."""
    amps = {(): 1.0 + 0j}
    n = 0
    for s in states:
        if s.total != VACUUM:
            raise ValueError("only charge-0 blocks can be placed side by side")
        amps = {p + q: a * b for p, a in amps.items() for q, b in s.amps.items()}
        n += s.n
    return AnyonState(n, VACUUM, amps)


def insert_block(state: AnyonState, after: int, block: AnyonState) -> AnyonState:
    """Insert a charge-0 ``block`` right after anyon ``after``.

    The running charge at the insertion point must be the vacuum, which holds
    at every qubit boundary of a leak-free register.
    """
    if block.total != VACUUM:
        raise ValueError("inserted block must have trivial total charge")
    amps = {}
    for p, a in state.amps.items():
        if after and p[after - 1] != VACUUM:
            if abs(a) > PRUNE:
                raise ValueError(f"running charge after anyon {after} is not the vacuum")
            continue
        for q, b in block.amps.items():
            amps[p[:after] + q + p[after:]] = a * b
    return AnyonState(state.n + block.n, state.total, amps)


def split_block(state: AnyonState, start: int, stop: int):
    """Schmidt-decompose anyons ``start..stop`` (1-based, inclusive) from the rest.

    The block must be bounded by vacuum running charges.  Returns
    ``(outer, inner, schmidt)`` where ``outer`` and ``inner`` are the leading
    Schmidt vectors (``outer`` carries the overall scale) and ``schmidt`` the
    normalized Schmidt coefficients.
    """
    rows: dict = {}
    cols: dict = {}
    entries = []
    for p, a in state.amps.items():
        left = p[start - 2] if start >= 2 else VACUUM
        if left != VACUUM or p[stop - 1] != VACUUM:
            if abs(a) > PRUNE:
                raise DisposalError(f"anyons {start}..{stop} do not form a charge-0 block")
            continue
        o = p[: start - 1] + p[stop:]
        i = p[start - 1: stop]
        entries.append((rows.setdefault(o, len(rows)), cols.setdefault(i, len(cols)), a))
    mat = np.zeros((len(rows), len(cols)), dtype=complex)
    for r, c, a in entries:
        mat[r, c] += a
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    outer = AnyonState(state.n - (stop - start + 1), state.total,
                       {o: u[r, 0] * s[0] for o, r in rows.items() if abs(u[r, 0] * s[0]) > PRUNE})
    inner = AnyonState(stop - start + 1, VACUUM,
                       {i: vh[0, c] for i, c in cols.items()})
    schmidt = s / np.linalg.norm(s)
    return outer, inner, schmidt


def entanglement_entropy(schmidt) -> float:
    p = np.asarray(schmidt) ** 2
    p = p[p > 1e-300]
    return float(-(p * np.log(p)).sum())


def discard_block(state: AnyonState, start: int, stop: int, tol: float = 1e-10) -> tuple[AnyonState, float]:
    """Remove a disentangled charge-0 block; returns (rest, entanglement entropy).

    Raises :class:`DisposalError` if the second Schmidt coefficient exceeds ``tol``.
    """
    outer, _, schmidt = split_block(state, start, stop)
    if len(schmidt) > 1 and schmidt[1] > tol:
        raise DisposalError(f"block {start}..{stop} is entangled (Schmidt {schmidt[:3]})")
    return outer, entanglement_entropy(schmidt)
