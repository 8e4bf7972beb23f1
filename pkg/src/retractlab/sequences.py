"""Finite prefixes of omega-sequences and the arrows between them.

A sequence is stored as its stages and consecutive connecting arrows;
longer composites ``arrow(n, m)`` are derived and cached.  Arrows of
sequences carry a stage reindexing ``psi`` and per-stage components, and are
compared only up to the usual equivalence (agreement after pushing both
into a common later stage).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    K,
    L,
    CategoryPair,
    Morphism,
    MorphismError,
    Structure,
    compose,
    extensions,
    identity,
)


class BoundsError(IndexError):
    """A requested stage lies outside the available prefix."""


@dataclass(frozen=True)
class SequenceK:
    """Stages ``x_0 .. x_{d-1}`` with connectors ``x_n -> x_{n+1}``.

    Connectors are K-arrows unless ``allow_L`` is set (used for the
    mixed-category examples).
    """

    stages: tuple
    connectors: tuple
    allow_L: bool = False
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "connectors", tuple(self.connectors))
        if not self.stages:
            raise BoundsError("a sequence prefix needs at least one stage")
        if len(self.connectors) != len(self.stages) - 1:
            raise MorphismError("need exactly one connector between consecutive stages")
        for n, c in enumerate(self.connectors):
            if c.domain is not self.stages[n] and c.domain != self.stages[n]:
                raise MorphismError(f"connector {n} does not start at stage {n}")
            if c.codomain is not self.stages[n + 1] and c.codomain != self.stages[n + 1]:
                raise MorphismError(f"connector {n} does not end at stage {n + 1}")
            if c.kind != K and not self.allow_L:
                raise MorphismError(f"connector {n} is not a K-arrow")

    @classmethod
    def constant(cls, x: Structure, depth: int) -> "SequenceK":
        return cls((x,) * depth, (identity(x),) * (depth - 1))

    @property
    def depth(self) -> int:
        return len(self.stages)

    @property
    def last(self) -> int:
        return len(self.stages) - 1

    def __getitem__(self, n: int) -> Structure:
        if not 0 <= n < self.depth:
            raise BoundsError(f"stage {n} outside prefix of depth {self.depth}")
        return self.stages[n]

    def arrow(self, n: int, m: int) -> Morphism:
        """The composite connector ``x_n -> x_m``."""
        if not 0 <= n <= m < self.depth:
            raise BoundsError(f"no arrow from stage {n} to stage {m} (depth {self.depth})")
        if n == m:
            return identity(self.stages[n], K if not self.allow_L else L)
        key = (n, m)
        hit = self._cache.get(key)
        if hit is None:
            hit = compose(self.connectors[m - 1], self.arrow(n, m - 1))
            self._cache[key] = hit
        return hit

    def extend(self, stage: Structure, connector: Morphism) -> "SequenceK":
        return SequenceK(self.stages + (stage,), self.connectors + (connector,), self.allow_L)

    def prefix(self, depth: int) -> "SequenceK":
        if not 1 <= depth <= self.depth:
            raise BoundsError(f"cannot cut depth {depth} from depth {self.depth}")
        return SequenceK(self.stages[:depth], self.connectors[:depth - 1], self.allow_L)

    def subsequence(self, ks: Sequence[int]) -> "SequenceK":
        ks = _check_indices(self, ks)
        stages = [self.stages[k] for k in ks]
        conns = [self.arrow(a, b) for a, b in zip(ks, ks[1:])]
        return SequenceK(stages, conns, self.allow_L)


def _check_indices(X: SequenceK, ks: Sequence[int]) -> list[int]:
    ks = list(ks)
    if not ks:
        raise BoundsError("empty index list")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise BoundsError("indices must be strictly increasing")
    if ks[0] < 0 or ks[-1] >= X.depth:
        raise BoundsError(f"index {ks[-1]} exceeds depth {X.depth}")
    return ks


@dataclass(frozen=True)
class StageArrow:
    """An arrow into a sequence, given at a particular stage (``x_n^oo . arrow``)."""

    stage: int
    arrow: Morphism

    def restage(self, X: SequenceK, m: int) -> "StageArrow":
        if m == self.stage:
            return self
        return StageArrow(m, compose(X.arrow(self.stage, m), self.arrow))

    def after(self, f: Morphism) -> "StageArrow":
        return StageArrow(self.stage, compose(self.arrow, f))

    def agrees(self, other: "StageArrow", X: SequenceK) -> bool:
        """Equal once both are pushed to some stage of the prefix."""
        for m in range(max(self.stage, other.stage), X.depth):
            if self.restage(X, m).arrow.map == other.restage(X, m).arrow.map:
                return True
        return False


@dataclass(frozen=True)
class StageInjection:
    """The canonical arrow ``x_n^oo`` from a stage into the whole sequence."""

    sequence: SequenceK
    n: int

    def as_stage_arrow(self) -> StageArrow:
        return StageArrow(self.n, identity(self.sequence[self.n]))


@dataclass(frozen=True)
class SeqMorphism:
    """Reindexing ``psi`` with components ``x_n -> y_psi(n)`` on the defined stages."""

    source: SequenceK
    target: SequenceK
    psi: tuple
    components: tuple

    def __post_init__(self):
        psi = tuple(self.psi)
        comps = tuple(self.components)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "components", comps)
        if len(psi) != len(comps) or len(psi) > self.source.depth:
            raise MorphismError("psi and components must cover a prefix of the source")
        if any(b < a for a, b in zip(psi, psi[1:])):
            raise MorphismError("psi must be weakly increasing")
        for n, (p, c) in enumerate(zip(psi, comps)):
            if not 0 <= p < self.target.depth:
                raise BoundsError(f"psi({n}) = {p} outside the target prefix")
            if c.domain != self.source.stages[n] or c.codomain != self.target.stages[p]:
                raise MorphismError(f"component {n} has the wrong endpoints")
        for n in range(len(comps) - 1):
            lhs = compose(comps[n + 1], self.source.connectors[n]).map
            rhs = compose(self.target.arrow(psi[n], psi[n + 1]), comps[n]).map
            if lhs != rhs:
                raise MorphismError(f"naturality fails between stages {n} and {n + 1}")

    @property
    def defined(self) -> int:
        return len(self.psi)

    @property
    def kind(self) -> str:
        return K if all(c.kind == K for c in self.components) else L

    def at(self, n: int) -> StageArrow:
        return StageArrow(self.psi[n], self.components[n])


def seq_identity(X: SequenceK) -> SeqMorphism:
    return SeqMorphism(X, X, range(X.depth), [identity(s) for s in X.stages])


def seq_compose(t2: SeqMorphism, t1: SeqMorphism) -> SeqMorphism:
    """``t2`` after ``t1``, on the stages where both are defined."""
    if t1.target is not t2.source and t1.target != t2.source:
        raise MorphismError("target of the first arrow differs from source of the second")
    psi, comps = [], []
    for n in range(t1.defined):
        p = t1.psi[n]
        if p >= t2.defined:
            break
        psi.append(t2.psi[p])
        comps.append(compose(t2.components[p], t1.components[n]))
    return SeqMorphism(t1.source, t2.target, psi, comps)


@dataclass
class EquivalenceVerdict:
    holds: bool
    depth: int
    failing_stage: int | None = None

    def __bool__(self):
        return self.holds


def seq_equivalent(t0: SeqMorphism, t1: SeqMorphism, depth: int | None = None
                   ) -> EquivalenceVerdict:
    """Depth-relative equivalence of two arrows with the same endpoints.

    Stage ``n`` passes if the two components agree after pushing both into
    some common stage of the target prefix.  A false verdict only means no
    agreement was found inside the prefix.
    """
    if t0.source != t1.source or t0.target != t1.target:
        raise MorphismError("arrows must share their endpoints")
    top = min(t0.defined, t1.defined)
    depth = top if depth is None else min(depth, top)
    Y = t0.target
    for n in range(depth):
        if not t0.at(n).agrees(t1.at(n), Y):
            return EquivalenceVerdict(False, depth, n)
    return EquivalenceVerdict(True, depth)


def constant_arrow(a: Structure, X: SequenceK, f: StageArrow, depth: int | None = None
                   ) -> SeqMorphism:
    """The arrow from the constant sequence on ``a`` induced by ``f``."""
    depth = X.depth - f.stage if depth is None else depth
    src = SequenceK.constant(a, depth)
    psi = [f.stage + n for n in range(depth)]
    comps = [f.restage(X, p).arrow for p in psi]
    return SeqMorphism(src, X, psi, comps)


def factor_through_stage(F: SeqMorphism) -> tuple[int, Morphism]:
    """Least ``n`` and ``f: a -> x_n`` with ``x_n^oo . f`` equivalent to ``F``."""
    src, X = F.source, F.target
    a = src.stages[0]
    if any(s != a for s in src.stages) or any(not c.is_identity() for c in src.connectors):
        raise MorphismError("factor_through_stage expects a constant source")
    top = X.depth - 1
    goal = F.at(0).restage(X, max(top, F.psi[0])).arrow.map
    for n in range(F.psi[0] + 1):
        up = X.arrow(n, top)
        pre: dict[int, list[int]] = {}
        for p, q in enumerate(up.map):
            pre.setdefault(q, []).append(p)
        cands = {p: pre.get(goal[p], []) for p in range(a.size)}
        if any(not c for c in cands.values()):
            continue
        for m in extensions(a, X[n], candidates=cands, embedding=F.kind == K):
            return n, Morphism(a, X[n], m, F.kind)
    return F.psi[0], F.components[0]


def cofinal_subsequence_iso(X: SequenceK, ks: Sequence[int]
                            ) -> tuple[SeqMorphism, SeqMorphism]:
    """``I: Y -> X`` with identity components and ``J: X -> Y``, where ``Y`` is
    the subsequence at indices ``ks``.  ``J`` sends stage ``n`` to the first
    ``k_m >= n``; it is defined up to stage ``k_last``."""
    ks = _check_indices(X, ks)
    Y = X.subsequence(ks)
    I = SeqMorphism(Y, X, ks, [identity(X[k]) for k in ks])
    psi, comps = [], []
    for n in range(ks[-1] + 1):
        m = next(s for s, k in enumerate(ks) if k >= n)
        psi.append(m)
        comps.append(X.arrow(n, ks[m]))
    J = SeqMorphism(X, Y, psi, comps)
    return I, J


def sequence_amalgamation(pair: CategoryPair, f: SeqMorphism, g: SeqMorphism
                          ) -> tuple[SequenceK, SeqMorphism, SeqMorphism]:
    """Amalgamate two arrows out of a constant sequence, stage by stage.

    Returns ``(W, f', g')`` with ``f' . f`` equivalent to ``g' . g``.  ``W``
    reuses the carriers of ``A``'s stages at each step.
    """
    A, B = f.target, g.target
    if f.source != g.source:
        raise MorphismError("arrows must share their source")
    p, q = f.psi[0], g.psi[0]
    depth = min(A.depth - p, B.depth - q)
    sq = pair.amalgamate(f.components[0], g.components[0])
    stages = [sq.apex]
    conns = []
    alpha, beta = [sq.cospan_left], [sq.cospan_right]
    for t in range(depth - 1):
        s1 = pair.amalgamate(alpha[t], A.connectors[p + t])
        k1 = s1.cospan_left
        s2 = pair.amalgamate(compose(k1, beta[t]), B.connectors[q + t])
        k2 = s2.cospan_left
        stages.append(s2.apex)
        conns.append(compose(k2, k1))
        alpha.append(compose(k2, s1.cospan_right))
        beta.append(s2.cospan_right)
    W = SequenceK(stages, conns)

    def leg(X, start, arrows):
        psi, comps = [], []
        for n in range(start + depth):
            t = max(0, n - start)
            psi.append(t)
            comps.append(compose(arrows[t], X.arrow(n, start + t)))
        return SeqMorphism(X, W, psi, comps)

    return W, leg(A, p, alpha), leg(B, q, beta)
