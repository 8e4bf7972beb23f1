"""Finite structures, morphisms and the category-pair abstraction.

A category pair couples embeddings (``K``-arrows) with homomorphisms
(``L``-arrows) over the same finite objects.  Carriers are always the
integers ``0..n-1``; a morphism is a tuple listing the image of each point.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

K = "K"
L = "L"


class CompositionError(ValueError):
    """Raised when two morphisms are not composable."""


class MorphismError(ValueError):
    """Raised when a map is not a morphism of the declared kind."""


class UnsupportedError(Exception):
    """The concrete category cannot perform the requested construction."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


class Structure:
    """Base class of the finite structures.

    Subclasses are frozen dataclasses with a ``size`` field and implement
    :meth:`related_ok`, :meth:`relabel` and :meth:`encode`.
    """

    kind = "abstract"
    size: int

    @property
    def carrier(self) -> range:
        return range(self.size)

    def related_ok(self, target: "Structure", x: int, fx: int, y: int, fy: int,
                   embedding: bool) -> bool:
        raise NotImplementedError

    def relabel(self, points: Sequence[int]) -> "Structure":
        """Substructure on ``points``; new point ``i`` is old ``points[i]``."""
        raise NotImplementedError

    def encode(self) -> tuple:
        raise NotImplementedError

    def is_closed(self, points) -> bool:
        return True

    def point_invariant(self, p: int):
        """Any isomorphism-invariant label of a point (refines canonical search)."""
        return 0

    def linked(self, p: int) -> Iterable[int]:
        """Points whose image constrains the image of ``p`` (search ordering)."""
        return ()

    def narrow(self, target: "Structure", p: int, assign: Mapping[int, int], embedding: bool):
        """A superset of admissible images of ``p`` given ``assign``, or None."""
        return None


# ---------------------------------------------------------------------------
# homomorphism search


def _pair_checks(src, tgt, assign, p, fp, embedding):
    if not src.related_ok(tgt, p, fp, p, fp, embedding):
        return False
    for q, fq in assign.items():
        if not src.related_ok(tgt, p, fp, q, fq, embedding):
            return False
    return True


def extensions(src: Structure, tgt: Structure, fixed: Mapping[int, int] | None = None,
               embedding: bool = False, candidates: Mapping[int, Sequence[int]] | None = None,
               ) -> Iterator[tuple[int, ...]]:
    """Yield every homomorphism (or embedding) ``src -> tgt`` agreeing with ``fixed``.

    Depth-first backtracking; consistency of relations is checked as soon as
    both endpoints are assigned.
    """
    fixed = dict(fixed or {})
    assign: dict[int, int] = {}
    for p, fp in fixed.items():
        if not 0 <= fp < tgt.size:
            return
        if not _pair_checks(src, tgt, assign, p, fp, embedding):
            return
        if embedding and fp in assign.values():
            return
        assign[p] = fp
    free = _search_order(src, [p for p in range(src.size) if p not in assign], assign)
    used = set(assign.values())
    n = src.size

    def rec(k):
        if k == len(free):
            yield tuple(assign[p] for p in range(n))
            return
        p = free[k]
        pool = candidates.get(p) if candidates else None
        if pool is None:
            pool = src.narrow(tgt, p, assign, embedding)
            pool = range(tgt.size) if pool is None else sorted(pool)
        for fp in pool:
            if embedding and fp in used:
                continue
            if not _pair_checks(src, tgt, assign, p, fp, embedding):
                continue
            assign[p] = fp
            if embedding:
                used.add(fp)
            yield from rec(k + 1)
            del assign[p]
            if embedding:
                used.discard(fp)

    yield from rec(0)


def _search_order(src: Structure, free: list[int], placed) -> list[int]:
    # greedy: next point is the one most constrained by points already placed
    done = set(placed)
    order = []
    rest = list(free)
    while rest:
        best = max(rest, key=lambda p: sum(1 for q in src.linked(p) if q in done))
        rest.remove(best)
        order.append(best)
        done.add(best)
    return order


def first_extension(src, tgt, fixed=None, embedding=False):
    return next(extensions(src, tgt, fixed, embedding), None)


def is_hom(src: Structure, tgt: Structure, mapping: Sequence[int]) -> bool:
    if len(mapping) != src.size or any(not 0 <= v < tgt.size for v in mapping):
        return False
    return all(src.related_ok(tgt, x, mapping[x], y, mapping[y], False)
               for x in range(src.size) for y in range(x, src.size))


def is_embedding(src: Structure, tgt: Structure, mapping: Sequence[int]) -> bool:
    if len(mapping) != src.size or len(set(mapping)) != len(mapping):
        return False
    if any(not 0 <= v < tgt.size for v in mapping):
        return False
    return all(src.related_ok(tgt, x, mapping[x], y, mapping[y], True)
               for x in range(src.size) for y in range(x, src.size))


@lru_cache(maxsize=None)
def canonical_form(s: Structure) -> Structure:
    """Lexicographically least relabelling of ``s``.

    Only orderings that sort points by an isomorphism invariant are tried,
    which keeps the result canonical while cutting the permutation count.
    """
    classes: dict = {}
    for p in range(s.size):
        classes.setdefault(s.point_invariant(p), []).append(p)
    blocks = [classes[k] for k in sorted(classes)]
    best = None
    for parts in itertools.product(*(itertools.permutations(b) for b in blocks)):
        cand = s.relabel([p for part in parts for p in part])
        key = cand.encode()
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1] if best else s


def isomorphic(a: Structure, b: Structure) -> bool:
    if type(a) is not type(b) or a.size != b.size:
        return False
    if a == b:
        return True
    return first_extension(a, b, embedding=True) is not None


# ---------------------------------------------------------------------------
# morphisms


@dataclass(frozen=True)
class Morphism:
    domain: Structure
    codomain: Structure
    map: tuple[int, ...]
    kind: str = L

    def __post_init__(self):
        object.__setattr__(self, "map", tuple(self.map))
        if self.kind not in (K, L):
            raise MorphismError(f"unknown arrow kind {self.kind!r}")
        if self.kind == K:
            if not is_embedding(self.domain, self.codomain, self.map):
                raise MorphismError(f"map {self.map} is not an embedding")
        elif not is_hom(self.domain, self.codomain, self.map):
            raise MorphismError(f"map {self.map} is not a homomorphism")

    @classmethod
    def trusted(cls, domain, codomain, mapping, kind=L) -> "Morphism":
        """Build without re-validating; for constructions already proven correct."""
        m = object.__new__(cls)
        object.__setattr__(m, "domain", domain)
        object.__setattr__(m, "codomain", codomain)
        object.__setattr__(m, "map", tuple(mapping))
        object.__setattr__(m, "kind", kind)
        return m

    def __call__(self, x: int) -> int:
        return self.map[x]

    @property
    def image(self) -> frozenset[int]:
        return frozenset(self.map)

    def as_L(self) -> "Morphism":
        return self if self.kind == L else Morphism.trusted(self.domain, self.codomain, self.map, L)

    def is_embedding(self) -> bool:
        return self.kind == K or is_embedding(self.domain, self.codomain, self.map)

    def is_identity(self) -> bool:
        return self.domain == self.codomain and self.map == tuple(range(self.domain.size))

    def same_map(self, other: "Morphism") -> bool:
        return (self.map == other.map and self.domain == other.domain
                and self.codomain == other.codomain)


def identity(x: Structure, kind: str = K) -> Morphism:
    return Morphism.trusted(x, x, range(x.size), kind)


def compose(g: Morphism, f: Morphism) -> Morphism:
    """``g`` after ``f``."""
    if f.codomain is not g.domain and f.codomain != g.domain:
        raise CompositionError("codomain of the first arrow differs from domain of the second")
    kind = K if f.kind == K and g.kind == K else L
    return Morphism.trusted(f.domain, g.codomain, (g.map[x] for x in f.map), kind)


def compose_all(*arrows: Morphism) -> Morphism:
    """``compose_all(h, g, f) == h . g . f``."""
    out = arrows[-1]
    for a in reversed(arrows[:-1]):
        out = compose(a, out)
    return out


@dataclass(frozen=True)
class Span:
    apex: Structure
    left: Morphism
    right: Morphism

    def __post_init__(self):
        if self.left.domain != self.apex or self.right.domain != self.apex:
            raise MorphismError("span legs must start at the apex")


@dataclass(frozen=True)
class CommutingSquare:
    """``cospan_left . span.left == cospan_right . span.right``."""

    span: Span
    cospan_left: Morphism
    cospan_right: Morphism
    pushout_certified: bool = False

    def __post_init__(self):
        if compose(self.cospan_left, self.span.left).map != \
                compose(self.cospan_right, self.span.right).map:
            raise MorphismError("square does not commute")
        if self.cospan_left.codomain != self.cospan_right.codomain:
            raise MorphismError("cospan legs must share a codomain")

    @property
    def apex(self) -> Structure:
        return self.cospan_left.codomain

    def certified(self, size_bound: int, pair: "CategoryPair | None" = None) -> "CommutingSquare":
        verdict = verify_pushout_universal(self, size_bound, pair)
        if not verdict:
            raise CertificationError("square is not a pushout", verdict.counterexample)
        return CommutingSquare(self.span, self.cospan_left, self.cospan_right, True)


class CertificationError(Exception):
    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------------------
# category pairs


class CategoryPair:
    """Abstract pair of categories: embeddings inside homomorphisms.

    Concrete pairs live in :mod:`retractlab.structures`.
    """

    name = "abstract"
    kind = "abstract"
    has_pushouts = True
    # every object is a one-point extension of a smaller one
    grows_by_points = False

    def admits(self, x: Structure) -> bool:
        return True

    def empty(self) -> Structure:
        raise NotImplementedError

    def raw_objects(self, n: int) -> Iterator[Structure]:
        raise NotImplementedError

    def objects(self, n: int) -> list[Structure]:
        """Isomorphism types of admitted objects of size ``n`` in canonical form."""
        return _objects_cached(self, n)

    def objects_upto(self, n: int, start: int = 0) -> list[Structure]:
        return [x for k in range(start, n + 1) for x in self.objects(k)]

    def one_point_extensions(self, s: Structure, order: Sequence[int] | None = None
                             ) -> Iterator[Morphism]:
        """Primitive K-arrows out of ``s`` (lazy, possibly infinite)."""
        raise NotImplementedError

    def task_extensions(self, s: Structure, order: Sequence[int] | None = None
                        ) -> Iterator[Morphism]:
        """Primitive arrows offered as completion tasks; may be infinite."""
        return self.one_point_extensions(s, order)

    def next_block(self, target: Structure, covered: Sequence[int]) -> list[int]:
        """New points of the next primitive step inside ``target``."""
        rest = [p for p in range(target.size) if p not in set(covered)]
        return rest[:1]

    def mixed_pushout(self, f: Morphism, g: Morphism) -> CommutingSquare:
        raise UnsupportedError(f"{self.name} has no mixed pushouts")

    def mixed_amalgam(self, f: Morphism, g: Morphism) -> tuple[Morphism, Morphism]:
        """Return ``(f', g')`` with ``f' . f == g' . g`` and ``g'`` a K-arrow."""
        sq = self.mixed_pushout(f, g)
        return sq.cospan_left, sq.cospan_right

    def amalgamate(self, i: Morphism, j: Morphism) -> CommutingSquare:
        """Amalgam whose apex reuses the carrier of ``i.codomain``."""
        sq = self.mixed_pushout(j, i)
        return CommutingSquare(Span(i.domain, i, j), sq.cospan_right, sq.cospan_left,
                               sq.pushout_certified)

    def amalgamated_extension(self, i: Morphism, j: Morphism, f: Morphism, g: Morphism
                              ) -> tuple[CommutingSquare, Morphism]:
        """Complete ``f . i == g . j`` (targets equal) to ``(k, l, h)`` with e = id.

        Default: the pushout of ``i`` and ``j`` with its mediating map.
        """
        sq = self.amalgamate(i, j)
        h = mediating_map(sq, f, g)
        if h is None:
            raise UnsupportedError("amalgam is not a pushout for this cocone", (i, j, f, g))
        return sq, h

    def joint_embed(self, a: Structure, b: Structure) -> tuple[Morphism, Morphism]:
        e = self.empty()
        sq = self.amalgamate(Morphism.trusted(e, a, (), K), Morphism.trusted(e, b, (), K))
        return sq.cospan_left, sq.cospan_right

    def left_inverse(self, j: Morphism) -> Morphism | None:
        m = first_extension(j.codomain, j.domain, {j.map[x]: x for x in range(j.domain.size)})
        return None if m is None else Morphism.trusted(j.codomain, j.domain, m, L)

    def default_values(self):
        return None


@lru_cache(maxsize=None)
def _objects_cached(pair: CategoryPair, n: int) -> list[Structure]:
    seen = {}
    if n > 0 and pair.grows_by_points and pair.objects(n - 1):
        raw = (f.codomain for x in pair.objects(n - 1) for f in pair.one_point_extensions(x))
    else:
        raw = pair.raw_objects(n)
    for x in raw:
        if not pair.admits(x):
            continue
        c = canonical_form(x)
        seen.setdefault(c.encode(), c)
    return [seen[k] for k in sorted(seen)]


def mediating_map(square: CommutingSquare, p: Morphism, q: Morphism) -> Morphism | None:
    """The map ``h`` with ``h . cospan_left == p`` and ``h . cospan_right == q``.

    Only defined when the cospan legs are jointly surjective; returns None if
    the prescribed values conflict or fail to be a homomorphism.
    """
    k, l = square.cospan_left, square.cospan_right
    w = k.codomain
    vals: dict[int, int] = {}
    for leg, cone in ((k, p), (l, q)):
        for x, y in enumerate(leg.map):
            if vals.setdefault(y, cone.map[x]) != cone.map[x]:
                return None
    if len(vals) != w.size:
        return None
    m = tuple(vals[x] for x in range(w.size))
    if not is_hom(w, p.codomain, m):
        return None
    return Morphism.trusted(w, p.codomain, m, L)


# ---------------------------------------------------------------------------
# operations


def amalgamate(pair: CategoryPair, i: Morphism, j: Morphism) -> CommutingSquare:
    if i.kind != K or j.kind != K:
        raise MorphismError("amalgamation takes two K-arrows")
    if i.domain != j.domain:
        raise MorphismError("legs must share their domain")
    return pair.amalgamate(i, j)


def mixed_pushout(pair: CategoryPair, f: Morphism, g: Morphism) -> CommutingSquare:
    if f.kind != K:
        raise MorphismError("first leg of a mixed pushout must be a K-arrow")
    if f.domain != g.domain:
        raise MorphismError("legs must share their domain")
    return pair.mixed_pushout(f, g)


@dataclass
class PushoutVerdict:
    holds: bool
    size_bound: int
    checked_cocones: int = 0
    counterexample: dict | None = field(default=None)

    def __bool__(self):
        return self.holds


def verify_pushout_universal(square: CommutingSquare, size_bound: int,
                             pair: CategoryPair | None = None, targets=None,
                             vectorized: bool = True) -> PushoutVerdict:
    """Brute-force check of the pushout property against small cocones.

    Every cocone ``(p, q)`` into every object with at most ``size_bound``
    points must admit exactly one mediating homomorphism.
    """
    if pair is None:
        from .structures import default_pair
        pair = default_pair(square.apex)
    f, g = square.span.left, square.span.right
    k, l = square.cospan_left, square.cospan_right
    a, b, w = f.codomain, g.codomain, k.codomain
    if targets is None:
        targets = pair.objects_upto(size_bound)
    if vectorized and set(k.map) | set(l.map) == set(range(w.size)):
        return _verify_covered(square, size_bound, targets)
    count = 0
    for W in targets:
        for q in extensions(b, W):
            fixed = {}
            clash = False
            for c in range(f.domain.size):
                v = q[g.map[c]]
                if fixed.setdefault(f.map[c], v) != v:
                    clash = True
                    break
            if clash:
                continue
            for p in extensions(a, W, fixed):
                count += 1
                known = {}
                ok = True
                for leg, cone in ((k, p), (l, q)):
                    for x, y in enumerate(leg.map):
                        if known.setdefault(y, cone[x]) != cone[x]:
                            ok = False
                if ok:
                    sols = list(itertools.islice(extensions(w, W, known), 2))
                else:
                    sols = []
                if len(sols) != 1:
                    return PushoutVerdict(False, size_bound, count, {
                        "target": W, "p": p, "q": q, "mediating": len(sols)})
    return PushoutVerdict(True, size_bound, count)


@lru_cache(maxsize=200_000)
def _hom_table(x: Structure, W: Structure) -> np.ndarray:
    homs = list(extensions(x, W))
    return np.array(homs, dtype=np.int64).reshape(len(homs), x.size)


@lru_cache(maxsize=200_000)
def _allowed(w: Structure, W: Structure):
    """Point pairs of ``w`` and, per pair, which target pairs a homomorphism may use."""
    us, vs = np.triu_indices(w.size)
    table = np.array([[[w.related_ok(W, u, s, v, t, False) for t in range(W.size)]
                       for s in range(W.size)] for u, v in zip(us, vs)], dtype=bool)
    return us, vs, table.reshape(len(us), W.size, W.size)


def _verify_covered(square: CommutingSquare, size_bound: int, targets) -> PushoutVerdict:
    # the cospan covers the apex, so a cocone fixes the mediating map
    # pointwise; all cocones into one target are checked as arrays
    f, g = square.span.left, square.span.right
    k, l = square.cospan_left, square.cospan_right
    a, b, w = f.codomain, g.codomain, k.codomain
    sources = [[] for _ in range(w.size)]
    for side, leg in ((0, k), (1, l)):
        for x, y in enumerate(leg.map):
            sources[y].append((side, x))
    count = 0
    for W in targets:
        P, Q = _hom_table(a, W), _hom_table(b, W)
        if not len(P) or not len(Q):
            continue
        keyP, keyQ = P[:, list(f.map)], Q[:, list(g.map)]
        ip, iq = np.nonzero((keyP[:, None, :] == keyQ[None, :, :]).all(axis=2))
        if not len(ip):
            continue
        count += len(ip)
        cones = (P[ip], Q[iq])
        h = np.empty((len(ip), w.size), dtype=np.int64)
        ok = np.ones(len(ip), dtype=bool)
        for y, src in enumerate(sources):
            side, x = src[0]
            h[:, y] = cones[side][:, x]
            for side2, x2 in src[1:]:
                ok &= cones[side2][:, x2] == h[:, y]
        us, vs, table = _allowed(w, W)
        ok &= table[np.arange(len(us)), h[:, us], h[:, vs]].all(axis=1)
        if not ok.all():
            bad = int(np.argmin(ok))
            return PushoutVerdict(False, size_bound, count, {
                "target": W, "p": tuple(int(t) for t in cones[0][bad]),
                "q": tuple(int(t) for t in cones[1][bad]), "mediating": 0})
    return PushoutVerdict(True, size_bound, count)


def spans_upto_iso(objects: Sequence[Structure]) -> Iterator[tuple[Morphism, Morphism]]:
    """One mixed span ``(f: c -> a in K, g: c -> b in L)`` per isomorphism class
    of spans, over the given objects."""
    autos = {x: list(extensions(x, x, embedding=True)) for x in objects}
    for c in objects:
        for a in objects:
            fs = list(extensions(c, a, embedding=True))
            if not fs:
                continue
            for b in objects:
                seen = set()
                for f in fs:
                    for g in extensions(c, b):
                        key = min((tuple(al[f[s[x]]] for x in range(c.size)),
                                   tuple(be[g[s[x]]] for x in range(c.size)))
                                  for s in autos[c] for al in autos[a] for be in autos[b])
                        if key not in seen:
                            seen.add(key)
                            yield Morphism.trusted(c, a, f, K), Morphism.trusted(c, b, g, L)


def decompose_into_primitives(pair: CategoryPair, f: Morphism) -> list[Morphism]:
    """Factor a K-arrow into primitive steps whose composite is exactly ``f``."""
    if f.kind != K:
        raise MorphismError("only K-arrows decompose into primitives")
    if f.is_identity():
        return []
    tgt = f.codomain
    covered = list(f.map)
    blocks = []
    while len(covered) < tgt.size:
        blk = pair.next_block(tgt, covered)
        blocks.append(blk)
        covered = covered + blk
    if len(blocks) <= 1:
        return [f]
    steps = []
    prev = f.domain
    prefix = list(f.map)
    for n, blk in enumerate(blocks):
        if n == len(blocks) - 1:
            steps.append(Morphism(prev, tgt, prefix, K))
        else:
            cod = tgt.relabel(prefix + blk)
            steps.append(Morphism(prev, cod, range(len(prefix)), K))
            prev = cod
        prefix = prefix + blk
    return steps
