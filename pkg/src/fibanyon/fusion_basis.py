"""Fusion-path bases for chains of Fibonacci anyons.

A basis vector of ``n`` anyons with total charge ``c`` is labelled by the
sequence ``x_1, ..., x_n`` of running total charges, where ``x_k`` is the
charge of anyons ``1..k``.  Charge ``0`` is the vacuum and ``1`` is the
Fibonacci anyon.  Since ``0 x 1 = 1`` and ``1 x 1 = 0 + 1``, a path is
admissible iff ``x_1 = 1``, it never has two consecutive zeros and
``x_n = c``.

States are stored sparsely as ``{path: amplitude}`` and the basis is treated
as orthonormal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

PHI = (1 + np.sqrt(5)) / 2

VACUUM = 0
TAU = 1
CHARGES = (VACUUM, TAU)

PRUNE = 1e-14
NORM_TOL = 1e-12

Path = tuple[int, ...]


class DimensionMismatchError(ValueError):
    """Two states or operators live on different fusion spaces."""


def fuse(a: int, b: int) -> tuple[int, ...]:
    """Fusion channels of ``a x b``."""
    if a == VACUUM:
        return (b,)
    if b == VACUUM:
        return (a,)
    return (VACUUM, TAU)


def quantum_dimension(c: int) -> float:
    return 1.0 if c == VACUUM else PHI


def is_admissible(path: Iterable[int], total: int | None = None) -> bool:
    prev = VACUUM
    last = VACUUM
    for x in path:
        if x not in CHARGES or x not in fuse(prev, TAU):
            return False
        prev = last = x
    return total is None or last == total


@lru_cache(maxsize=None)
def enumerate_basis(n: int, total: int) -> tuple[Path, ...]:
    """All admissible fusion paths of ``n`` anyons with the given total charge.

    Paths are returned in lexicographic order, so the order is canonical.
    ``n = 0`` gives the single empty path for the vacuum and nothing for
    charge 1.
    """
    if n < 0:
        raise ValueError(f"anyon count must be non-negative, got {n}")
    if total not in CHARGES:
        raise ValueError(f"unknown charge {total!r}")
    if n == 0:
        return ((),) if total == VACUUM else ()
    paths: list[Path] = []

    def extend(prefix: list[int]) -> None:
        if len(prefix) == n:
            if prefix[-1] == total:
                paths.append(tuple(prefix))
            return
        prev = prefix[-1] if prefix else VACUUM
        for x in fuse(prev, TAU):
            prefix.append(x)
            extend(prefix)
            prefix.pop()

    extend([])
    paths.sort()
    return tuple(paths)


@lru_cache(maxsize=None)
def dim(n: int, total: int) -> int:
    """Dimension of the fusion space, by a two-state transfer recursion."""
    if n < 0:
        raise ValueError(f"anyon count must be non-negative, got {n}")
    counts = {VACUUM: 1, TAU: 0}
    for _ in range(n):
        counts = {VACUUM: counts[TAU], TAU: counts[VACUUM] + counts[TAU]}
    return counts[total]


@lru_cache(maxsize=None)
def basis_index(n: int, total: int) -> dict[Path, int]:
    return {p: i for i, p in enumerate(enumerate_basis(n, total))}


def path_text(path: Path) -> str:
    """Canonical text form, e.g. ``"1,0,1,0"``."""
    return ",".join(str(x) for x in path)


def parse_path(text: str) -> Path:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(tok) for tok in text.split(","))


@dataclass(frozen=True)
class AnyonState:
    """Sparse state vector over the fusion paths of ``(n, total)``.

    Instances are treated as immutable: every operation returns a new state.
    """

    n: int
    total: int
    amps: Mapping[Path, complex] = field(default_factory=dict)

    def __post_init__(self):
        # Spot check only; full admissibility is checked by the public constructors.
        for p in self.amps:
            if len(p) != self.n:
                raise DimensionMismatchError(f"path {p} does not have {self.n} anyons")
            break

    @classmethod
    def basis(cls, path: Iterable[int], total: int | None = None) -> "AnyonState":
        path = tuple(path)
        if total is None:
            total = path[-1] if path else VACUUM
        if not is_admissible(path, total):
            raise ValueError(f"inadmissible fusion path {path} for total charge {total}")
        return cls(len(path), total, {path: 1.0 + 0j})

    @classmethod
    def vacuum(cls) -> "AnyonState":
        return cls(0, VACUUM, {(): 1.0 + 0j})

    @classmethod
    def from_vector(cls, n: int, total: int, vec) -> "AnyonState":
        vec = np.asarray(vec, dtype=complex)
        paths = enumerate_basis(n, total)
        if vec.shape != (len(paths),):
            raise DimensionMismatchError(f"vector of length {vec.shape} for dim({n},{total})={len(paths)}")
        return cls(n, total, {p: complex(a) for p, a in zip(paths, vec) if abs(a) > PRUNE})

    @property
    def dim(self) -> int:
        return dim(self.n, self.total)

    def to_vector(self) -> np.ndarray:
        index = basis_index(self.n, self.total)
        vec = np.zeros(len(index), dtype=complex)
        for p, a in self.amps.items():
            vec[index[p]] = a
        return vec

    def norm(self) -> float:
        return math.sqrt(sum(a.real * a.real + a.imag * a.imag for a in self.amps.values()))

    def normalize(self) -> "AnyonState":
        nrm = self.norm()
        if nrm < PRUNE:
            raise ZeroDivisionError("cannot normalize a zero state")
        return AnyonState(self.n, self.total, {p: a / nrm for p, a in self.amps.items()})

    def scale(self, s: complex) -> "AnyonState":
        return AnyonState(self.n, self.total, {p: a * s for p, a in self.amps.items()})

    def pruned(self, eps: float = PRUNE) -> "AnyonState":
        return AnyonState(self.n, self.total, {p: a for p, a in self.amps.items() if abs(a) > eps})

    def __add__(self, other: "AnyonState") -> "AnyonState":
        _check_same_space(self, other)
        amps = dict(self.amps)
        for p, a in other.amps.items():
            amps[p] = amps.get(p, 0j) + a
        return AnyonState(self.n, self.total, amps)

    def __len__(self) -> int:
        return len(self.amps)

    def __str__(self) -> str:
        terms = [f"({a.real:+.6f}{a.imag:+.6f}j)|{path_text(p)}>" for p, a in sorted(self.amps.items())]
        return " ".join(terms) if terms else "0"


def _check_same_space(a: AnyonState, b: AnyonState) -> None:
    if (a.n, a.total) != (b.n, b.total):
        raise DimensionMismatchError(f"states live on ({a.n},{a.total}) and ({b.n},{b.total})")


def inner_product(a: AnyonState, b: AnyonState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _check_same_space(a, b)
    if len(a.amps) > len(b.amps):
        return sum((a.amps[p].conjugate() * v for p, v in b.amps.items() if p in a.amps), 0j)
    return sum((v.conjugate() * b.amps[p] for p, v in a.amps.items() if p in b.amps), 0j)


def fidelity(a: AnyonState, b: AnyonState) -> float:
    """``|<a|b>|^2 / (<a|a><b|b>)``."""
    return abs(inner_product(a, b)) ** 2 / (a.norm() ** 2 * b.norm() ** 2)
