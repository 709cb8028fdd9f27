"""A small planar-diagram language evaluated with the Fibonacci skein relations.

Source text is a ``;``-separated list of slices read bottom to top (time
runs upwards).  Each slice is one generator::

    id(N)          N vertical strands
    cup(I)         create a strand pair at positions I, I+1
    cap(I)         annihilate strands I, I+1
    cross(I,+)     positive crossing of strands I, I+1 (``-`` for negative)
    fusesplit(I)   fuse strands I, I+1 through a charge-1 line and split

Strands are numbered from 1 at the left.  ``#`` starts a comment.

Evaluation resolves every crossing with the skein relation
``cross = A id + A^-1 e`` (``A = exp(3 pi i / 5)``) and composes
Temperley-Lieb diagrams, each closed loop contributing ``phi``.  The result
is turned into matrices on the fusion-path bases through the path model,
where a cup creates ``sum_e sqrt(d_e / d_a) |.. a e a ..>``.  With this
normalization two nested cups give ``|0> + phi**0.5 |1>`` and a cup equals
``phi**0.5`` times the orthonormal pair-creation map.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fusion_basis import CHARGES, PHI, TAU, VACUUM, basis_index, enumerate_basis, fuse, quantum_dimension
from .operators import LinearOp

A = np.exp(3j * np.pi / 5)
LOOP = PHI


class DiagramError(ValueError):
    """Base class for diagram source errors."""


class DiagramSyntaxError(DiagramError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line, self.column = line, column


class UnknownGeneratorError(DiagramSyntaxError):
    pass


class StrandCountError(DiagramError):
    def __init__(self, message: str, slice_index: int):
        super().__init__(f"slice {slice_index}: {message}")
        self.slice_index = slice_index


@dataclass(frozen=True)
class Slice:
    kind: str          # id, cup, cap, cross, fusesplit
    index: int         # N for id, strand position otherwise
    sign: int = 0      # +1 / -1 for crossings

    def __str__(self) -> str:
        if self.kind == "cross":
            return f"cross({self.index},{'+' if self.sign > 0 else '-'})"
        return f"{self.kind}({self.index})"

    @property
    def delta(self) -> int:
        return {"cup": 2, "cap": -2}.get(self.kind, 0)

    def required_width(self) -> int:
        """Smallest number of incoming strands the slice can act on."""
        if self.kind == "id":
            return self.index
        if self.kind == "cup":
            return self.index - 1
        return self.index + 1


@dataclass(frozen=True)
class DiagramTerm:
    """Slices from bottom to top with the incoming strand count."""

    slices: tuple[Slice, ...]
    n_in: int

    @property
    def widths(self) -> list[int]:
        """Strand count below each slice, followed by the final count."""
        out = [self.n_in]
        for s in self.slices:
            out.append(out[-1] + s.delta)
        return out

    @property
    def n_out(self) -> int:
        return self.widths[-1]

    def __str__(self) -> str:
        return "; ".join(str(s) for s in self.slices)


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_]\w*)\s*\((?P<args>[^()]*)\)|(?P<bad>\S))")
_GENERATORS = ("id", "cup", "cap", "cross", "fusesplit")


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


def _strip_comments(text: str) -> str:
    # Keep offsets intact so error positions refer to the original text.
    return re.sub(r"#[^\n]*", lambda m: " " * len(m.group()), text)


def _parse_slice(name: str, args: str, text: str, offset: int) -> Slice:
    parts = [a.strip() for a in args.split(",")] if args.strip() else []
    where = _position(text, offset)
    if name not in _GENERATORS:
        raise UnknownGeneratorError(f"unknown generator {name!r}", *where)
    want = 2 if name == "cross" else 1
    if len(parts) != want:
        raise DiagramSyntaxError(f"{name} takes {want} argument(s), got {len(parts)}", *where)
    if not parts[0].isdigit():
        raise DiagramSyntaxError(f"expected a non-negative integer, got {parts[0]!r}", *where)
    index = int(parts[0])
    if name != "id" and index < 1:
        raise DiagramSyntaxError("strand positions start at 1", *where)
    sign = 0
    if name == "cross":
        if parts[1] not in ("+", "-"):
            raise DiagramSyntaxError(f"crossing sign must be + or -, got {parts[1]!r}", *where)
        sign = 1 if parts[1] == "+" else -1
    return Slice(name, index, sign)


def parse(text: str) -> DiagramTerm:
    """Parse diagram source into a :class:`DiagramTerm`.

    The incoming strand count is fixed by any ``id(N)`` slice; without one
    it is the smallest count on which every slice is defined.
    """
    src = _strip_comments(text)
    slices: list[Slice] = []
    pos = 0
    expect_slice = True
    while True:
        rest = src[pos:]
        if not rest.strip():
            break
        if expect_slice:
            m = _TOKEN.match(src, pos)
            if m.group("bad") is not None:
                raise DiagramSyntaxError(f"unexpected character {m.group('bad')!r}", *_position(text, m.start("bad")))
            slices.append(_parse_slice(m.group("name"), m.group("args"), text, m.start("name")))
            pos = m.end()
            expect_slice = False
        else:
            m = re.compile(r"\s*;").match(src, pos)
            if m is None:
                at = pos + len(rest) - len(rest.lstrip())
                raise DiagramSyntaxError("expected ';' between slices", *_position(text, at))
            pos = m.end()
            expect_slice = True
    if not slices:
        raise DiagramSyntaxError("empty diagram", 1, 1)
    return DiagramTerm(tuple(slices), _infer_width(slices))


def _infer_width(slices: list[Slice]) -> int:
    offset = 0
    fixed = None
    lower = 0
    for k, s in enumerate(slices, start=1):
        if s.kind == "id":
            start = s.index - offset
            if start < 0 or (fixed is not None and start != fixed):
                raise StrandCountError(f"id({s.index}) does not match the strand count", k)
            fixed = start
        lower = max(lower, s.required_width() - offset)
        offset += s.delta
    width = lower if fixed is None else fixed
    check(DiagramTerm(tuple(slices), width))
    return width


def check(term: DiagramTerm) -> None:
    """Raise :class:`StrandCountError` unless every slice fits its strands."""
    width = term.n_in
    if width < 0:
        raise StrandCountError("negative strand count", 0)
    for k, s in enumerate(term.slices, start=1):
        if s.kind == "id":
            ok = s.index == width
        elif s.kind == "cup":
            ok = 1 <= s.index <= width + 1
        else:
            ok = 1 <= s.index and s.index + 1 <= width
        if not ok:
            raise StrandCountError(f"{s} cannot act on {width} strand(s)", k)
        width += s.delta


# Temperley-Lieb diagrams are planar matchings on bottom points ("b", k) and
# top points ("t", k), stored as frozensets of frozenset pairs.

def _straight(n: int, skip=()) -> list:
    return [frozenset({("b", k), ("t", k)}) for k in range(n) if k not in skip]


def tl_identity(n: int) -> frozenset:
    return frozenset(_straight(n))


def tl_cup(n: int, i: int) -> frozenset:
    """``n -> n + 2`` strands, new pair at 1-based positions ``i, i+1``."""
    pairs = [frozenset({("t", i - 1), ("t", i)})]
    pairs += [frozenset({("b", k), ("t", k if k < i - 1 else k + 2)}) for k in range(n)]
    return frozenset(pairs)


def tl_cap(n: int, i: int) -> frozenset:
    """``n -> n - 2`` strands, joining 1-based strands ``i, i+1``."""
    pairs = [frozenset({("b", i - 1), ("b", i)})]
    pairs += [frozenset({("b", k), ("t", k if k < i - 1 else k - 2)}) for k in range(n) if k not in (i - 1, i)]
    return frozenset(pairs)


def tl_e(n: int, i: int) -> frozenset:
    pairs = [frozenset({("b", i - 1), ("b", i)}), frozenset({("t", i - 1), ("t", i)})]
    return frozenset(pairs + _straight(n, skip=(i - 1, i)))


def tl_compose(lower: frozenset, upper: frozenset) -> tuple[frozenset, int]:
    """Stack ``upper`` on top of ``lower``; returns (diagram, closed loops)."""
    # The glued boundary becomes middle points ("m", k).
    down: dict = {}
    up: dict = {}
    for pair in lower:
        p, q = (("m", x[1]) if x[0] == "t" else x for x in pair)
        down[p], down[q] = q, p
    for pair in upper:
        p, q = (("m", x[1]) if x[0] == "b" else x for x in pair)
        up[p], up[q] = q, p
    seen = set()
    pairs = []
    for start in [x for x in down if x[0] == "b"] + [x for x in up if x[0] == "t"]:
        if start in seen:
            continue
        side = down if start[0] == "b" else up
        cur = side[start]
        while cur[0] == "m":
            seen.add(cur)
            side = up if side is down else down
            cur = side[cur]
        seen.update((start, cur))
        pairs.append(frozenset({start, cur}))
    loops = 0
    for pt in down:
        if pt[0] != "m" or pt in seen:
            continue
        loops += 1
        cur, side = pt, down
        while cur not in seen:
            seen.add(cur)
            cur = side[cur]
            side = up if side is down else down
    return frozenset(pairs), loops


def _slice_terms(s: Slice, n: int) -> dict:
    if s.kind == "id":
        return {tl_identity(n): 1.0 + 0j}
    if s.kind == "cup":
        return {tl_cup(n, s.index): 1.0 + 0j}
    if s.kind == "cap":
        return {tl_cap(n, s.index): 1.0 + 0j}
    if s.kind == "cross":
        a = A if s.sign > 0 else 1 / A
        return {tl_identity(n): a, tl_e(n, s.index): 1 / a}
    # fusesplit
    return {tl_identity(n): PHI ** 0.5 + 0j, tl_e(n, s.index): -(PHI ** -0.5) + 0j}


@dataclass(frozen=True)
class SkeinValue:
    """Linear combination of Temperley-Lieb diagrams from ``n_in`` to ``n_out`` strands."""

    n_in: int
    n_out: int
    terms: dict

    @property
    def closed(self) -> bool:
        return self.n_in == 0 and self.n_out == 0

    @property
    def scalar(self) -> complex:
        if not self.closed:
            raise ValueError("only closed diagrams evaluate to a scalar")
        return complex(self.terms.get(frozenset(), 0j))

    def totals(self) -> tuple[int, ...]:
        """Total charges with a nonempty space on both ends."""
        if (self.n_in + self.n_out) % 2:
            return ()
        return tuple(c for c in CHARGES if enumerate_basis(self.n_in, c) and enumerate_basis(self.n_out, c))

    def matrix(self, total: int = VACUUM) -> np.ndarray:
        """Matrix from ``(n_in, total)`` to ``(n_out, total)`` fusion paths."""
        out = np.zeros((len(enumerate_basis(self.n_out, total)), len(enumerate_basis(self.n_in, total))), dtype=complex)
        for d, coef in self.terms.items():
            out += coef * _realize(d, self.n_in, self.n_out, total)
        return out

    def operator(self, total: int = VACUUM) -> LinearOp:
        return LinearOp(self.n_in, self.n_out, total, self.matrix(total))


def evaluate(term: DiagramTerm | str) -> SkeinValue:
    """Evaluate a term (or source text) to a :class:`SkeinValue`."""
    if isinstance(term, str):
        term = parse(term)
    check(term)
    n = term.n_in
    terms = {tl_identity(n): 1.0 + 0j}
    for s in term.slices:
        gen = _slice_terms(s, n)
        new: dict = {}
        for d, c in terms.items():
            for g, cg in gen.items():
                comp, loops = tl_compose(d, g)
                new[comp] = new.get(comp, 0j) + c * cg * LOOP ** loops
        terms = {d: c for d, c in new.items() if abs(c) > 1e-15}
        n += s.delta
    return SkeinValue(term.n_in, n, terms)


def _decompose(d: frozenset, n_in: int, n_out: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Split a diagram into caps (applied first) and cups (applied after).

    Returns ``[(width, i), ...]`` lists in application order, where ``width``
    is the strand count the generator acts on.
    """
    mate = {}
    for pair in d:
        p, q = tuple(pair)
        mate[p], mate[q] = q, p

    def peel(side: str, count: int) -> list[tuple[int, int]]:
        live = [(side, k) for k in range(count)]
        found = []
        changed = True
        while changed:
            changed = False
            for j in range(len(live) - 1):
                if mate[live[j]] == live[j + 1]:
                    found.append((len(live), j + 1))
                    del live[j:j + 2]
                    changed = True
                    break
        return found

    caps = peel("b", n_in)
    tops = peel("t", n_out)
    cups = [(width - 2, i) for width, i in reversed(tops)]
    return caps, cups


@lru_cache(maxsize=None)
def _cup_matrix(n: int, i: int, total: int) -> np.ndarray:
    rows = basis_index(n + 2, total)
    cols = enumerate_basis(n, total)
    m = np.zeros((len(rows), len(cols)))
    for col, p in enumerate(cols):
        a = p[i - 2] if i >= 2 else VACUUM
        for e in fuse(a, TAU):
            m[rows[p[: i - 1] + (e, a) + p[i - 1:]], col] = np.sqrt(quantum_dimension(e) / quantum_dimension(a))
    return m


@lru_cache(maxsize=None)
def _cap_matrix(n: int, i: int, total: int) -> np.ndarray:
    # Caps are the transposes of cups.
    return _cup_matrix(n - 2, i, total).T


def _realize(d: frozenset, n_in: int, n_out: int, total: int) -> np.ndarray:
    caps, cups = _decompose(d, n_in, n_out)
    m = np.eye(len(enumerate_basis(n_in, total)))
    for width, i in caps:
        m = _cap_matrix(width, i, total) @ m
    for width, i in cups:
        m = _cup_matrix(width, i, total) @ m
    return m


def format_value(value: SkeinValue, digits: int = 17) -> str:
    """Text rendering: the scalar for closed diagrams, else one matrix per total charge."""
    def num(z: complex) -> str:
        return f"{z.real:.{digits}g}{z.imag:+.{digits}g}i"

    if value.closed:
        z = value.scalar
        return f"{z.real:.{digits}g}" if abs(z.imag) < 1e-15 else num(z)
    lines = []
    for c in value.totals():
        lines.append(f"total charge {c}: {value.n_out} x {value.n_in} strands")
        for row in value.matrix(c):
            lines.append("  " + "  ".join(num(z) for z in row))
    return "\n".join(lines)
