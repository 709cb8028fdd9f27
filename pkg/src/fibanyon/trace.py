"""Seeded randomness and event traces for protocol runs.

Every stochastic operation takes a :class:`RandomSource` explicitly.  The
source hands out uniform draws, remembers them, and forwards protocol events
to an attached :class:`ProtocolTrace`.  A :class:`ReplaySource` feeds the
recorded draws back, which reproduces a run exactly.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

SCHEMA_PATH = Path(__file__).with_name("trace_schema.json")


@dataclass
class TraceEvent:
    step: int
    op: str
    params: dict[str, Any] = field(default_factory=dict)
    outcome: Any = None
    probability: float | None = None
    dim: int | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=_jsonable)

    @classmethod
    def from_json(cls, line: str) -> "TraceEvent":
        return cls(**json.loads(line))


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


class ProtocolTrace:
    """Append-only ordered event log of one run."""

    def __init__(self, events: Iterable[TraceEvent] = ()):
        self.events: list[TraceEvent] = list(events)

    def record(self, op: str, *, params: dict | None = None, outcome=None,
               probability: float | None = None, dim: int | None = None) -> TraceEvent:
        ev = TraceEvent(len(self.events), op, dict(params or {}), outcome,
                        None if probability is None else float(probability), dim)
        self.events.append(ev)
        return ev

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def select(self, op: str) -> list[TraceEvent]:
        return [ev for ev in self.events if ev.op == op]

    def outcomes(self) -> list:
        return [ev.outcome for ev in self.events if ev.outcome is not None]

    def dumps(self) -> str:
        return "".join(ev.to_json() + "\n" for ev in self.events)

    def write(self, path, append: bool = False) -> None:
        with open(path, "a" if append else "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "ProtocolTrace":
        return cls(TraceEvent.from_json(line) for line in text.splitlines() if line.strip())

    @classmethod
    def read(cls, path) -> "ProtocolTrace":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


class RandomSource:
    """Deterministic, splittable uniform generator with a draw log.

    Parameters
    ----------
    seed : int or numpy.random.SeedSequence
        Seed for a PCG64 bit generator.
    trace : ProtocolTrace, optional
        Events emitted by protocol code are appended here.  ``trace=True``
        creates a fresh trace.
    """

    def __init__(self, seed=0, trace: ProtocolTrace | bool | None = None):
        self._seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        self._gen = np.random.Generator(np.random.PCG64(self._seq))
        self.draws: list[float] = []
        self.trace = ProtocolTrace() if trace is True else (trace or None)

    def uniform(self) -> float:
        u = float(self._gen.random())
        self.draws.append(u)
        return u

    def spawn(self, n: int) -> list["RandomSource"]:
        return [RandomSource(s) for s in self._seq.spawn(n)]

    def log(self, op: str, **kwargs) -> None:
        if self.trace is not None:
            self.trace.record(op, **kwargs)


class ReplaySource(RandomSource):
    """Replays a recorded sequence of uniform draws."""

    def __init__(self, draws: Iterable[float], trace: ProtocolTrace | bool | None = None):
        self._queue = list(draws)
        self._pos = 0
        self.draws = []
        self.trace = ProtocolTrace() if trace is True else (trace or None)

    def uniform(self) -> float:
        if self._pos >= len(self._queue):
            raise RuntimeError("replay exhausted: the run asked for more draws than were recorded")
        u = self._queue[self._pos]
        self._pos += 1
        self.draws.append(u)
        return u

    def spawn(self, n: int):
        raise NotImplementedError("replay sources cannot be split")


def as_source(rng) -> RandomSource:
    if isinstance(rng, RandomSource):
        return rng
    if rng is None:
        raise ValueError("a RandomSource (or integer seed) is required")
    return RandomSource(rng)
