"""Physical operations on fusion-path states.

Braids, collective-charge projectors, pair creation and pair fusion all act
locally on a few consecutive labels of each fusion path.  They are applied
directly to sparse :class:`~fibanyon.fusion_basis.AnyonState` objects; the
:class:`LinearOp` wrappers materialize the same maps as sparse matrices for
algebraic checks.

Anyon positions are 1-based throughout, matching the usual ``sigma_k``
notation: ``sigma_k`` exchanges anyons ``k`` and ``k + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .fusion_basis import (
    CHARGES,
    PHI,
    PRUNE,
    TAU,
    VACUUM,
    AnyonState,
    DimensionMismatchError,
    basis_index,
    dim,
    enumerate_basis,
    fuse,
)
from .trace import RandomSource

R_MATRIX = np.diag([np.exp(-4j * np.pi / 5), np.exp(3j * np.pi / 5)])
F_MATRIX = np.array([[1 / PHI, PHI**-0.5], [PHI**-0.5, -1 / PHI]])

# Plain-Python copies for the per-path loops (numpy scalars are slow there).
_F = tuple(tuple(float(x) for x in row) for row in F_MATRIX)
_R = tuple(complex(x) for x in np.diag(R_MATRIX))

POSITIVE = +1
NEGATIVE = -1


class DegenerateMeasurementError(RuntimeError):
    """Both outcomes of a measurement have vanishing probability."""


class ForcedMeasurementDivergence(RuntimeError):
    pass


class ProtocolError(RuntimeError):
    """A step that must succeed by construction did not."""


@lru_cache(maxsize=None)
def _braid_block(power: int) -> tuple:
    m = F_MATRIX @ np.diag(np.diag(R_MATRIX) ** power) @ F_MATRIX
    return tuple(tuple(complex(x) for x in row) for row in m)


def _outer(path, k: int) -> tuple[int, int, int]:
    """Labels ``(x_{k-1}, x_k, x_{k+1})`` around the pair ``(k, k+1)``."""
    a = path[k - 2] if k >= 2 else VACUUM
    return a, path[k - 1], path[k]


def _check_pair(n: int, k: int) -> None:
    if n < 2 or not 1 <= k <= n - 1:
        raise IndexError(f"pair ({k},{k + 1}) out of range for {n} anyons")


def _accumulate(out: dict, key, val) -> None:
    out[key] = out.get(key, 0j) + val


_PRUNE2 = PRUNE * PRUNE


def _finish(n: int, total: int, amps: dict) -> AnyonState:
    return AnyonState(n, total, {p: a for p, a in amps.items()
                                 if a.real * a.real + a.imag * a.imag > _PRUNE2})


def _finish_scaled(n: int, total: int, amps: dict, weight: float) -> AnyonState:
    # Normalize by sqrt(weight) and prune relative to the normalized scale.
    inv = 1 / math.sqrt(weight)
    cut = _PRUNE2 * weight
    return AnyonState(n, total, {p: a * inv for p, a in amps.items()
                                 if a.real * a.real + a.imag * a.imag > cut})


def apply_braid(state: AnyonState, k: int, power: int = 1) -> AnyonState:
    """Apply ``sigma_k ** power`` (negative powers are inverse braids)."""
    _check_pair(state.n, k)
    if power == 0:
        return state
    block = _braid_block(power)
    phases = (_R[0] ** power, _R[1] ** power)
    out: dict = {}
    for path, amp in state.amps.items():
        a, e, d = _outer(path, k)
        if a == TAU and d == TAU:
            for e2 in (VACUUM, TAU):
                c = block[e2][e]
                if c != 0:
                    _accumulate(out, path[: k - 1] + (e2,) + path[k:], c * amp)
        else:
            channel = VACUUM if a == d == VACUUM else TAU
            _accumulate(out, path, phases[channel] * amp)
    return _finish(state.n, state.total, out)


def apply_braid_word(state: AnyonState, word) -> AnyonState:
    """Apply ``[(k, power), ...]`` left to right in time order."""
    for k, p in word:
        state = apply_braid(state, k, p)
    return state


def project_pair(state: AnyonState, k: int, c: int) -> AnyonState:
    """Project onto 'anyons ``k, k+1`` fuse to ``c``' (unnormalized)."""
    _check_pair(state.n, k)
    out: dict = {}
    for path, amp in state.amps.items():
        a, e, d = _outer(path, k)
        if a == TAU and d == TAU:
            for e2 in (VACUUM, TAU):
                coef = _F[e2][c] * _F[e][c]
                _accumulate(out, path[: k - 1] + (e2,) + path[k:], coef * amp)
        elif (VACUUM if a == d == VACUUM else TAU) == c:
            _accumulate(out, path, amp)
    return _finish(state.n, state.total, out)


_FUSION_CACHE: dict = {}


def _fusion_transitions(path, k: int) -> tuple:
    a = path[k - 2] if k >= 2 else VACUUM
    e, d = path[k - 1], path[k]
    if a == TAU and d == TAU:
        coefs = ((VACUUM, _F[e][VACUUM]), (TAU, _F[e][TAU]))
    elif a == d == VACUUM:
        coefs = ((VACUUM, 1.0),)
    else:
        coefs = ((TAU, 1.0),)
    return tuple((c, path[: k - 1] + path[k + 1:] if c == VACUUM else path[: k - 1] + path[k:], coef)
                 for c, coef in coefs)


def _fusion_parts(state: AnyonState, k: int, channels=(VACUUM, TAU)) -> list[dict]:
    cache = _FUSION_CACHE.setdefault(k, {})
    out: list[dict] = [{}, {}]
    for path, amp in state.amps.items():
        trans = cache.get(path)
        if trans is None:
            trans = cache[path] = _fusion_transitions(path, k)
        for c, new, coef in trans:
            if c in channels:
                part = out[c]
                part[new] = part.get(new, 0j) + coef * amp
    return out


def fusion_map(state: AnyonState, k: int, c: int) -> AnyonState:
    """Fuse anyons ``k, k+1`` into channel ``c`` without renormalizing.

    Channel 0 removes both anyons, channel 1 replaces them by one anyon.  The
    map is the co-isometry onto the chosen channel, so the squared norm of
    the result is the Born probability of that outcome.
    """
    _check_pair(state.n, k)
    part = _fusion_parts(state, k, (c,))[c]
    return _finish(state.n - 2 if c == VACUUM else state.n - 1, state.total, part)


def create_pair(state: AnyonState, position: int) -> AnyonState:
    """Insert a vacuum-channel pair after anyon ``position`` (0 = leftmost).

    The new anyons occupy positions ``position + 1`` and ``position + 2``.
    """
    if not 0 <= position <= state.n:
        raise IndexError(f"insertion point {position} out of range for {state.n} anyons")
    out: dict = {}
    for path, amp in state.amps.items():
        a = path[position - 1] if position >= 1 else VACUUM
        head, tail = path[:position], path[position:]
        if a == TAU:
            for e in (VACUUM, TAU):
                _accumulate(out, head + (e, a) + tail, _F[e][VACUUM] * amp)
        else:
            _accumulate(out, head + (TAU, a) + tail, amp)
    return _finish(state.n + 2, state.total, out)


def _f_coef(a: int, b: int, d: int, e: int, f: int) -> float:
    """F-move amplitude ``((a b)_e 1)_d -> (a (b 1)_f)_d``."""
    if e not in fuse(a, b) or d not in fuse(e, TAU) or f not in fuse(b, TAU) or d not in fuse(a, f):
        return 0.0
    if a == b == d == TAU:
        return _F[e][f]
    return 1.0


def _move_table(inverse: bool) -> dict:
    # (a, b, d, current label) -> ((replacement, coef), ...).  The moves are
    # real orthogonal, so the inverse uses the transposed coefficients.
    table = {}
    for a in CHARGES:
        for b in CHARGES:
            for d in CHARGES:
                for cur in CHARGES:
                    coefs = [(new, _f_coef(a, b, d, new, cur) if inverse else _f_coef(a, b, d, cur, new))
                             for new in CHARGES]
                    table[a, b, d, cur] = tuple((new, c) for new, c in coefs if c != 0.0)
    return table


_MOVES = {False: _move_table(False), True: _move_table(True)}


_STEP_CACHE: dict = {}


def _step_transitions(i: int, m: int, inverse: bool) -> dict:
    """Memoized ``path -> ((new path, coef), ...)`` for one F-move of a range."""
    key = (i, m, inverse)
    cache = _STEP_CACHE.get(key)
    if cache is None:
        cache = _STEP_CACHE[key] = {}
    return cache


def _range_steps(amps: dict, i: int, j: int, inverse: bool) -> dict:
    steps = range(i + 1, j + 1)
    moves = _MOVES[inverse]
    for m in (reversed(steps) if inverse else steps):
        cache = _step_transitions(i, m, inverse)
        out: dict = {}
        get = out.get
        for w, amp in amps.items():
            trans = cache.get(w)
            if trans is None:
                a = w[i - 2] if i >= 2 else VACUUM
                b = w[m - 3] if m - 1 > i else TAU
                head, tail = w[: m - 2], w[m - 1:]
                trans = cache[w] = tuple((head + (new,) + tail, coef)
                                         for new, coef in moves[a, b, w[m - 1], w[m - 2]])
            for key, coef in trans:
                out[key] = get(key, 0j) + coef * amp
        amps = out
    return amps


_RANGE_CACHE: dict = {}


def _range_moves(amps: dict, i: int, j: int, inverse: bool) -> dict:
    """Re-associate anyons ``i..j`` so that their total charge is one label.

    In the block basis, position ``m - 2`` (0-based) for ``i < m <= j`` holds
    the charge of anyons ``i..m`` instead of ``x_{m-1}``; the block charge
    therefore sits at index ``j - 2``.  The composed per-path transitions are
    memoized.
    """
    cache = _RANGE_CACHE.setdefault((i, j, inverse), {})
    out: dict = {}
    get = out.get
    for w, amp in amps.items():
        trans = cache.get(w)
        if trans is None:
            trans = cache[w] = tuple((k, c) for k, c in _range_steps({w: 1.0}, i, j, inverse).items()
                                     if c != 0)
        for key, coef in trans:
            out[key] = get(key, 0j) + coef * amp
    return out


def _check_range(n: int, i: int, j: int) -> None:
    if not 1 <= i <= j <= n:
        raise IndexError(f"anyon range {i}..{j} invalid for {n} anyons")


def _charge_parts(state: AnyonState, i: int, j: int):
    """Split ``state`` by the total charge of anyons ``i..j``.

    Returns ``(parts, restore)``: ``parts[c]`` is the charge-``c`` component
    in a basis where that charge is explicit (orthogonal to the path basis),
    and ``restore`` maps such a component back to fusion paths.
    """
    if i == j:
        return ({}, dict(state.amps)), dict
    if i == 1 or (j == state.n and state.total == VACUUM):
        # The charge of 1..j is x_j; with vacuum total, the charge of i..n equals x_{i-1}.
        pos = j - 1 if i == 1 else i - 2
        parts: tuple[dict, dict] = ({}, {})
        for p, a in state.amps.items():
            parts[p[pos]][p] = a
        return parts, dict
    block = _range_moves(state.amps, i, j, inverse=False)
    parts = ({}, {})
    for w, a in block.items():
        parts[w[j - 2]][w] = a
    return parts, lambda part: _range_moves(part, i, j, inverse=True)


def _weight(amps: dict) -> float:
    v = np.fromiter(amps.values(), complex, len(amps))
    return float(np.vdot(v, v).real)


def project_charge(state: AnyonState, i: int, j: int, c: int) -> tuple[AnyonState, float]:
    """Project onto 'anyons ``i..j`` have total charge ``c``'.

    Returns the unnormalized projected state and the Born probability
    ``||P psi||^2 / ||psi||^2``.
    """
    _check_range(state.n, i, j)
    parts, restore = _charge_parts(state, i, j)
    post = _finish(state.n, state.total, restore(parts[c]))
    norm2 = _weight(state.amps)
    p = _weight(post.amps) / norm2 if norm2 > 0 else 0.0
    return post, p


@dataclass(frozen=True)
class MeasurementOutcome:
    observed: int
    probability: float
    post_state: AnyonState


def measure_charge(state: AnyonState, i: int, j: int, rng: RandomSource) -> MeasurementOutcome:
    """Born-rule measurement of the total charge of anyons ``i..j``.

    Consumes exactly one uniform draw.
    """
    _check_range(state.n, i, j)
    parts, restore = _charge_parts(state, i, j)
    w0, w1 = _weight(parts[0]), _weight(parts[1])
    if w0 < 1e-14 and w1 < 1e-14:
        raise DegenerateMeasurementError(f"charge of anyons {i}..{j}: weights {w0:g}, {w1:g}")
    c = VACUUM if rng.uniform() < w0 / (w0 + w1) else TAU
    w = w0 if c == VACUUM else w1
    rng.log("measure", params={"range": [i, j]}, outcome=c, probability=w / (w0 + w1), dim=state.dim)
    post = _finish_scaled(state.n, state.total, restore(parts[c]), w)
    return MeasurementOutcome(c, w / (w0 + w1), post)


def fusion_probabilities(state: AnyonState, k: int) -> tuple[float, float]:
    norm2 = state.norm() ** 2
    p0 = fusion_map(state, k, VACUUM).norm() ** 2 / norm2
    return p0, 1.0 - p0


def fuse_adjacent(state: AnyonState, k: int, rng: RandomSource,
                  op: str = "fuse") -> tuple[int, AnyonState]:
    """Fuse anyons ``k, k+1`` with a Born-sampled outcome.

    Returns the observed channel and the normalized post-fusion state, which
    has ``n - 2`` anyons on the vacuum outcome and ``n - 1`` otherwise.
    """
    _check_pair(state.n, k)
    parts = _fusion_parts(state, k)
    p0, p1 = _weight(parts[0]), _weight(parts[1])
    if p0 < 1e-14 and p1 < 1e-14:
        raise DegenerateMeasurementError(f"fusion of anyons {k},{k + 1} on a zero state")
    total = p0 + p1
    c = VACUUM if rng.uniform() < p0 / total else TAU
    w = p0 if c == VACUUM else p1
    post = _finish_scaled(state.n - 2 if c == VACUUM else state.n - 1, state.total, parts[c], w)
    rng.log(op, params={"pair": [k, k + 1]}, outcome=c, probability=w / total, dim=post.dim)
    return c, post


def postselect_fusion(state: AnyonState, k: int, c: int) -> tuple[AnyonState, float]:
    """Condition a fusion of ``k, k+1`` on outcome ``c``; returns (state, probability)."""
    post = fusion_map(state, k, c)
    p = post.norm() ** 2 / state.norm() ** 2
    if p < 1e-14:
        return post, 0.0
    return post.normalize(), p


def force_fuse_vacuum(state: AnyonState, pair: int, group: tuple[int, int], rng: RandomSource,
                      mode: str = "literal", max_iter: int = 10**6) -> tuple[AnyonState, int]:
    """Fuse anyons ``pair, pair+1`` to the vacuum by forced measurement.

    Alternates measurements of the pair's charge and of the charge of the
    anyon group ``group = (i, j)`` until the pair is found in the vacuum
    channel, then fuses it away.  In ``"strict"`` mode a vacuum pair outcome
    only counts if the latest group measurement (if any) also gave vacuum.

    Returns the post-fusion state (``n - 2`` anyons) and the number of pair
    measurements performed.
    """
    if mode not in ("literal", "strict"):
        raise ValueError(f"unknown forced-measurement mode {mode!r}")
    last_group = VACUUM
    for it in range(1, max_iter + 1):
        m = measure_charge(state, pair, pair + 1, rng)
        state = m.post_state
        if m.observed == VACUUM and (mode == "literal" or last_group == VACUUM):
            post = fusion_map(state, pair, VACUUM).normalize()
            rng.log("forced_fuse", params={"pair": [pair, pair + 1], "group": list(group), "rounds": it},
                    outcome=VACUUM, probability=1.0, dim=post.dim)
            return post, it
        g = measure_charge(state, group[0], group[1], rng)
        state = g.post_state
        last_group = g.observed
    raise ForcedMeasurementDivergence(f"pair {pair},{pair + 1} not in the vacuum after {max_iter} rounds")


class LinearOp:
    """Sparse matrix between two fusion-path bases.

    Columns are indexed by ``enumerate_basis(n_in, total)`` and rows by
    ``enumerate_basis(n_out, total)``.
    """

    def __init__(self, n_in: int, n_out: int, total: int, matrix):
        self.n_in, self.n_out, self.total = n_in, n_out, total
        self.matrix = sp.csr_matrix(matrix, dtype=complex)
        expected = (dim(n_out, total), dim(n_in, total))
        if self.matrix.shape != expected:
            raise DimensionMismatchError(f"matrix shape {self.matrix.shape}, expected {expected}")

    @classmethod
    def from_map(cls, fn: Callable[[AnyonState], AnyonState], n_in: int, total: int,
                 n_out: int | None = None) -> "LinearOp":
        n_out = n_in if n_out is None else n_out
        rows_index = basis_index(n_out, total)
        rows, cols, vals = [], [], []
        for col, path in enumerate(enumerate_basis(n_in, total)):
            img = fn(AnyonState(n_in, total, {path: 1.0 + 0j}))
            if img.n != n_out or img.total != total:
                raise DimensionMismatchError("map changed the space unexpectedly")
            for p, a in img.amps.items():
                rows.append(rows_index[p])
                cols.append(col)
                vals.append(a)
        m = sp.coo_matrix((vals, (rows, cols)), shape=(dim(n_out, total), dim(n_in, total)))
        return cls(n_in, n_out, total, m)

    @classmethod
    def identity(cls, n: int, total: int) -> "LinearOp":
        return cls(n, n, total, sp.identity(dim(n, total), dtype=complex))

    def __matmul__(self, other):
        if isinstance(other, LinearOp):
            if other.n_out != self.n_in or other.total != self.total:
                raise DimensionMismatchError("incompatible operator composition")
            return LinearOp(other.n_in, self.n_out, self.total, self.matrix @ other.matrix)
        if isinstance(other, AnyonState):
            return self.apply(other)
        return NotImplemented

    def __mul__(self, s: complex) -> "LinearOp":
        return LinearOp(self.n_in, self.n_out, self.total, self.matrix * s)

    __rmul__ = __mul__

    def __add__(self, other: "LinearOp") -> "LinearOp":
        if (other.n_in, other.n_out, other.total) != (self.n_in, self.n_out, self.total):
            raise DimensionMismatchError("incompatible operator sum")
        return LinearOp(self.n_in, self.n_out, self.total, self.matrix + other.matrix)

    def __sub__(self, other: "LinearOp") -> "LinearOp":
        return self + (-1) * other

    def adjoint(self) -> "LinearOp":
        return LinearOp(self.n_out, self.n_in, self.total, self.matrix.conj().T)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, state: AnyonState) -> AnyonState:
        if (state.n, state.total) != (self.n_in, self.total):
            raise DimensionMismatchError("state does not live in the operator domain")
        return AnyonState.from_vector(self.n_out, self.total, self.matrix @ state.to_vector())


def braid_generator(n: int, total: int, k: int, orientation: int = POSITIVE) -> LinearOp:
    """Matrix of ``sigma_k`` (or its inverse) on the ``(n, total)`` path basis."""
    _check_pair(n, k)
    if orientation not in (POSITIVE, NEGATIVE):
        raise ValueError("orientation must be +1 or -1")
    return LinearOp.from_map(lambda s: apply_braid(s, k, orientation), n, total)


def pair_projector(n: int, total: int, k: int, c: int) -> LinearOp:
    return LinearOp.from_map(lambda s: project_pair(s, k, c), n, total)


def charge_projector(n: int, total: int, i: int, j: int, c: int) -> LinearOp:
    return LinearOp.from_map(lambda s: project_charge(s, i, j, c)[0], n, total)


def creation_op(n: int, total: int, position: int) -> LinearOp:
    return LinearOp.from_map(lambda s: create_pair(s, position), n, total, n + 2)


def fusion_op(n: int, total: int, k: int, c: int) -> LinearOp:
    return LinearOp.from_map(lambda s: fusion_map(s, k, c), n, total,
                             n - 2 if c == VACUUM else n - 1)
