"""Fraisse-sequence prefixes built by dovetailed task scheduling.

Two kinds of tasks are served: absorbing an object (every object must embed
in some stage) and completing a primitive extension of a stage (every
``f: u_n -> y`` must be followed by ``g: y -> u_m`` with ``g . f = u_n^m``).
Each served task is checked against the last stage and, when unsatisfied,
forces a new stage built by amalgamation.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .core import (
    K,
    CategoryPair,
    Morphism,
    Structure,
    UnsupportedError,
    compose,
    extensions,
    first_extension,
    identity,
)
from .sequences import SequenceK
from .structures import Graph, LinOrder, RationalMetricSpace, UnaryModel


class ConstructionError(RuntimeError):
    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class LedgerEntry:
    kind: str  # "F1", "F2" or "request"
    step: int
    stage: int  # stage the task refers to (-1 for F1)
    task: object  # object for F1, arrow u_n -> y for F2
    completed: int
    witness: Morphism


@dataclass
class TaskLedger:
    entries: list = field(default_factory=list)
    served: dict = field(default_factory=dict)  # stream index -> tasks served

    def record(self, entry: LedgerEntry, stream: int | None = None):
        self.entries.append(entry)
        if stream is not None:
            self.served[stream] = self.served.get(stream, 0) + 1

    def f2_entries(self, stage: int | None = None) -> list[LedgerEntry]:
        return [e for e in self.entries if e.kind in ("F2", "request")
                and (stage is None or e.stage == stage)]

    def f1_entries(self) -> list[LedgerEntry]:
        return [e for e in self.entries if e.kind == "F1"]


def default_start(pair: CategoryPair) -> Structure:
    kind = pair.kind
    if kind == "graph":
        return Graph(2)
    if kind == "linorder":
        return LinOrder.chain(2)
    if kind == "metric":
        g = pair.domain.least_at_least(0) if not pair.domain.dense else (pair.grid or Fraction(1))
        return RationalMetricSpace(2, ((0, g), (g, 0)))
    if kind == "unary":
        return UnaryModel(1, (0,))
    raise ValueError(f"no default start object for {kind!r}")


def _schedule() -> Iterator[int]:
    for row in itertools.count(1):
        yield from range(row)


class FraisseBuilder:
    """Single-writer builder of a Fraisse prefix; deterministic for a fixed seed."""

    def __init__(self, pair: CategoryPair, seed: int = 0, start: Structure | None = None):
        self.pair = pair
        self.seed = seed
        self.rng = random.Random(seed)
        u0 = default_start(pair) if start is None else start
        self.sequence = SequenceK((u0,), ())
        self.ledger = TaskLedger()
        self.steps_done = 0
        self._schedule = _schedule()
        self._streams: list = [self._object_stream()]
        self._open_stream(0)

    # task streams -------------------------------------------------------

    def _object_stream(self):
        for n in itertools.count(0):
            yield from self.pair.objects(n)

    def _open_stream(self, n: int):
        u = self.sequence[n]
        order = list(range(u.size))
        self.rng.shuffle(order)
        self._streams.append(self.pair.task_extensions(u, order))

    # stage growth -------------------------------------------------------

    def _push(self, stage: Structure, connector: Morphism):
        self.sequence = self.sequence.extend(stage, connector)
        self._open_stream(self.sequence.last)

    def _absorb(self, x: Structure) -> tuple[int, Morphism]:
        U = self.sequence
        last = U[U.last]
        m = first_extension(x, last, embedding=True)
        if m is not None:
            return U.last, Morphism.trusted(x, last, m, K)
        try:
            k, e = self.pair.joint_embed(last, x)
        except UnsupportedError as exc:
            raise ConstructionError(f"cannot jointly embed into {self.pair.name}",
                                    exc.witness) from exc
        self._push(k.codomain, k)
        return self.sequence.last, e

    def _complete(self, n: int, f: Morphism) -> tuple[int, Morphism]:
        U = self.sequence
        g = self._search_F2(n, f, U.last, U.last)
        if g is not None:
            return g
        e = U.arrow(n, U.last)
        try:
            sq = self.pair.amalgamate(e, f)
        except UnsupportedError as exc:
            raise ConstructionError(f"amalgamation fails in {self.pair.name}",
                                    exc.witness) from exc
        self._push(sq.apex, sq.cospan_left)
        return self.sequence.last, sq.cospan_right

    def _search_F2(self, n, f, lo, hi):
        U = self.sequence
        for m in range(max(lo, n), hi + 1):
            e = U.arrow(n, m)
            fixed = {f.map[p]: e.map[p] for p in range(f.domain.size)}
            g = first_extension(f.codomain, U[m], fixed, embedding=True)
            if g is not None:
                return m, Morphism.trusted(f.codomain, U[m], g, K)
        return None

    # public -------------------------------------------------------------

    def step(self):
        idx = next(self._schedule)
        if idx >= len(self._streams):
            idx %= len(self._streams)
        for probe in range(len(self._streams)):
            s = (idx + probe) % len(self._streams)
            task = next(self._streams[s], None)
            if task is not None:
                break
        else:
            self.steps_done += 1
            return
        step = self.steps_done
        if s == 0:
            m, w = self._absorb(task)
            self.ledger.record(LedgerEntry("F1", step, -1, task, m, w), 0)
        else:
            n = s - 1
            m, g = self._complete(n, task)
            self.ledger.record(LedgerEntry("F2", step, n, task, m, g), s)
        self.steps_done += 1

    def run(self, steps: int) -> "FraisseBuilder":
        for _ in range(steps):
            self.step()
        return self

    def request_F1(self, x: Structure) -> tuple[int, Morphism]:
        hit = check_F1(self.sequence, x)
        if hit is not None:
            return hit
        m, w = self._absorb(x)
        self.ledger.record(LedgerEntry("request", self.steps_done, -1, x, m, w))
        return m, w

    def request_F2(self, n: int, f: Morphism, min_stage: int = 0) -> tuple[int, Morphism]:
        """Least ``m >= max(n, min_stage)`` completing ``f``, growing the prefix if needed."""
        while self.sequence.last + 1 < min_stage:
            self.step()
        hit = self._search_F2(n, f, max(n, min_stage), self.sequence.last)
        if hit is None:
            e = self.sequence.arrow(n, self.sequence.last)
            try:
                sq = self.pair.amalgamate(e, f)
            except UnsupportedError as exc:
                raise ConstructionError(f"amalgamation fails in {self.pair.name}",
                                        exc.witness) from exc
            self._push(sq.apex, sq.cospan_left)
            hit = (self.sequence.last, sq.cospan_right)
            self.ledger.record(LedgerEntry("request", self.steps_done, n, f, hit[0], hit[1]))
        return hit


def build_fraisse_sequence(pair: CategoryPair, steps: int, seed: int = 0,
                           start: Structure | None = None) -> tuple[SequenceK, TaskLedger]:
    b = FraisseBuilder(pair, seed, start).run(steps)
    return b.sequence, b.ledger


def check_F1(U: SequenceK, x: Structure) -> tuple[int, Morphism] | None:
    """Least stage receiving an embedding of ``x``."""
    for n, u in enumerate(U.stages):
        if u.size < x.size:
            continue
        m = first_extension(x, u, embedding=True)
        if m is not None:
            return n, Morphism.trusted(x, u, m, K)
    return None


def check_F2(U: SequenceK, n: int, f: Morphism) -> tuple[int, Morphism] | None:
    """Least ``m >= n`` with an embedding ``g: y -> u_m`` and ``g . f = u_n^m``."""
    for m in range(n, U.depth):
        e = U.arrow(n, m)
        fixed = {f.map[p]: e.map[p] for p in range(f.domain.size)}
        g = first_extension(f.codomain, U[m], fixed, embedding=True)
        if g is not None:
            return m, Morphism.trusted(f.codomain, U[m], g, K)
    return None


def verify_ledger(U: SequenceK, ledger: TaskLedger) -> list[LedgerEntry]:
    """Entries whose witness fails to recheck exactly (empty when sound)."""
    bad = []
    for e in ledger.entries:
        w = e.witness
        if w.codomain != U[e.completed]:
            bad.append(e)
            continue
        if e.kind == "F1" or e.stage < 0:
            ok = w.domain == e.task and w.is_embedding()
        else:
            ok = compose(w, e.task).map == U.arrow(e.stage, e.completed).map
        if not ok:
            bad.append(e)
    return bad


@dataclass
class BackAndForth:
    arrows: list  # (side, from_stage, to_stage, arrow); sides alternate U->V, V->U

    @property
    def rounds(self) -> int:
        return len(self.arrows)


def back_and_forth(U: SequenceK, V: SequenceK, depth: int = 3) -> BackAndForth | None:
    """Alternating embeddings ``u_0 -> v_a -> u_b -> ...`` commuting with the
    connectors, ``2 * depth`` arrows in total; None if a prefix runs out."""
    hit = check_F1(V, U[0])
    if hit is None:
        return None
    m, f = hit
    arrows = [("UV", 0, m, f)]
    seqs = (U, V)
    side = 1  # current codomain sequence: V
    src_stage = m
    while len(arrows) < 2 * depth:
        other = seqs[1 - side]
        res = check_F2(other, arrows[-1][1], arrows[-1][3])
        if res is None:
            return None
        m2, g = res
        arrows.append(("VU" if side == 1 else "UV", src_stage, m2, g))
        src_stage = m2
        side = 1 - side
    return BackAndForth(arrows)


def extension_witness(U: SequenceK, adjacent, nonadjacent) -> tuple[int, int] | None:
    """Least stage with a vertex outside ``u_0`` adjacent to all of ``adjacent``
    and to none of ``nonadjacent`` (points of ``u_0``)."""
    for m, u in enumerate(U.stages):
        e = U.arrow(0, m)
        img = set(e.map)
        A = [e.map[a] for a in adjacent]
        B = [e.map[b] for b in nonadjacent]
        for v in range(u.size):
            if v in img:
                continue
            if all(u.adjacent(v, a) for a in A) and not any(u.adjacent(v, b) for b in B):
                return m, v
    return None


def density_witness(U: SequenceK, p: int, q: int) -> tuple[int, int] | None:
    """Least stage with a point strictly between the images of ``p < q`` of ``u_0``."""
    for m, u in enumerate(U.stages):
        e = U.arrow(0, m)
        lo, hi = sorted((u.ranks[e.map[p]], u.ranks[e.map[q]]))
        for v in range(u.size):
            if lo < u.ranks[v] < hi:
                return m, v
    return None
