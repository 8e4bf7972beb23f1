"""The four concrete category pairs and their explicit constructions.

Graphs, linear orders, rational metric spaces and unary-function models,
each with embeddings as K-arrows and homomorphisms as L-arrows.  All
arithmetic on distances is exact (``fractions.Fraction``).
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

from .core import (
    K,
    L,
    CategoryPair,
    CommutingSquare,
    Morphism,
    MorphismError,
    Span,
    Structure,
    UnsupportedError,
    compose,
    decompose_into_primitives,
    identity,
)


class StructureError(ValueError):
    """A structure violates its type invariants."""


class PreconditionError(ValueError):
    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


def as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Graph(Structure):
    size: int
    edges: frozenset = frozenset()

    kind = "graph"

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise StructureError(f"loop at vertex {u}")
            if not (0 <= u < self.size and 0 <= v < self.size):
                raise StructureError(f"edge {(u, v)} outside the carrier")
            norm.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, frozenset(itertools.combinations(range(n), 2)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def discrete(cls, n: int) -> "Graph":
        return cls(n)

    @cached_property
    def neighbours(self) -> tuple[frozenset, ...]:
        nb = [set() for _ in range(self.size)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return tuple(frozenset(s) for s in nb)

    def point_invariant(self, p):
        nb = self.neighbours
        return (len(nb[p]), tuple(sorted(len(nb[q]) for q in nb[p])))

    def linked(self, p):
        return self.neighbours[p]

    def narrow(self, target, p, assign, embedding):
        pool = None
        tn = target.neighbours
        for q in self.neighbours[p]:
            if q in assign:
                pool = set(tn[assign[q]]) if pool is None else pool & tn[assign[q]]
        return pool

    def adjacent(self, x: int, y: int) -> bool:
        return ((x, y) if x < y else (y, x)) in self.edges

    def related_ok(self, target, x, fx, y, fy, embedding):
        if x == y:
            return True
        e = self.adjacent(x, y)
        te = fx != fy and target.adjacent(fx, fy)
        if embedding:
            return fx != fy and e == te
        return te or not e

    def relabel(self, points):
        idx = {p: i for i, p in enumerate(points)}
        return Graph(len(points), frozenset(
            (idx[u], idx[v]) for u, v in self.edges if u in idx and v in idx))

    def encode(self):
        return (self.size, tuple(sorted(self.edges)))

    def with_vertex(self, nbhd: Iterable[int]) -> "Graph":
        n = self.size
        return Graph(n + 1, self.edges | {(v, n) for v in nbhd})

    def contains_clique(self, k: int, within: Iterable[int] | None = None) -> bool:
        pool = sorted(within) if within is not None else list(range(self.size))
        if k <= 0:
            return True

        def rec(cands, need):
            if need == 0:
                return True
            for idx, v in enumerate(cands):
                rest = [u for u in cands[idx + 1:] if u in self.neighbours[v]]
                if len(rest) >= need - 1 and rec(rest, need - 1):
                    return True
            return False

        return rec(pool, k)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {name} {{"]
        lines += [f"  {v};" for v in range(self.size)]
        lines += [f"  {u} -- {v};" for u, v in sorted(self.edges)]
        lines.append("}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# linear orders


@dataclass(frozen=True)
class LinOrder(Structure):
    size: int
    ranks: tuple = ()

    kind = "linorder"

    def __post_init__(self):
        ranks = tuple(self.ranks) if self.ranks or self.size == 0 else tuple(range(self.size))
        if sorted(ranks) != list(range(self.size)):
            raise StructureError(f"ranks {ranks} are not a permutation of 0..{self.size - 1}")
        object.__setattr__(self, "ranks", ranks)

    @classmethod
    def chain(cls, n: int) -> "LinOrder":
        return cls(n, tuple(range(n)))

    def point_invariant(self, p):
        return self.ranks[p]

    def less(self, x: int, y: int) -> bool:
        return self.ranks[x] < self.ranks[y]

    @cached_property
    def in_order(self) -> tuple[int, ...]:
        return tuple(sorted(range(self.size), key=self.ranks.__getitem__))

    def linked(self, p):
        r = self.ranks[p]
        return [q for q in range(self.size) if abs(self.ranks[q] - r) == 1]

    def narrow(self, target, p, assign, embedding):
        # keep room for the points strictly between p and its assigned bounds
        r = self.ranks[p]
        lo, hi = 0, target.size - 1
        for q, fq in assign.items():
            gap = r - self.ranks[q] if embedding else 0
            t = target.ranks[fq]
            if self.ranks[q] < r:
                lo = max(lo, t + gap)
            else:
                hi = min(hi, t + gap)
        if embedding:
            lo, hi = max(lo, r), min(hi, target.size - self.size + r)
        order = target.in_order
        return order[lo:hi + 1] if lo <= hi else ()

    def related_ok(self, target, x, fx, y, fy, embedding):
        if x == y:
            return True
        if self.less(y, x):
            x, fx, y, fy = y, fy, x, fx
        if embedding:
            return target.less(fx, fy)
        return not target.less(fy, fx)

    def relabel(self, points):
        order = sorted(range(len(points)), key=lambda i: self.ranks[points[i]])
        ranks = [0] * len(points)
        for r, i in enumerate(order):
            ranks[i] = r
        return LinOrder(len(points), tuple(ranks))

    def encode(self):
        return (self.size, self.ranks)

    def insert(self, position: int) -> "LinOrder":
        """Append a new point placed at rank ``position``."""
        ranks = [r + 1 if r >= position else r for r in self.ranks]
        return LinOrder(self.size + 1, tuple(ranks) + (position,))


# ---------------------------------------------------------------------------
# metric spaces


@dataclass(frozen=True)
class RationalMetricSpace(Structure):
    size: int
    dist: tuple = ()

    kind = "metric"

    def __post_init__(self):
        d = tuple(tuple(as_fraction(v) for v in row) for row in self.dist)
        if self.size == 0:
            d = ()
        object.__setattr__(self, "dist", d)
        n = self.size
        if len(d) != n or any(len(row) != n for row in d):
            raise StructureError("distance matrix has the wrong shape")
        for x in range(n):
            if d[x][x] != 0:
                raise StructureError(f"d({x},{x}) != 0")
            for y in range(x + 1, n):
                if d[x][y] != d[y][x]:
                    raise StructureError(f"asymmetric distance at {(x, y)}")
                if d[x][y] <= 0:
                    raise StructureError(f"non-positive distance at {(x, y)}")
        for x, y, z in itertools.permutations(range(n), 3):
            if d[x][z] > d[x][y] + d[y][z]:
                raise StructureError(f"triangle inequality fails at {(x, y, z)}")

    @classmethod
    def trusted(cls, dist) -> "RationalMetricSpace":
        s = object.__new__(cls)
        object.__setattr__(s, "size", len(dist))
        object.__setattr__(s, "dist", tuple(tuple(row) for row in dist))
        return s

    @classmethod
    def on_line(cls, points: Sequence) -> "RationalMetricSpace":
        pts = [as_fraction(p) for p in points]
        return cls(len(pts), tuple(tuple(abs(p - q) for q in pts) for p in pts))

    @classmethod
    def from_pairs(cls, n: int, pairs: dict) -> "RationalMetricSpace":
        d = [[Fraction(0)] * n for _ in range(n)]
        for (x, y), v in pairs.items():
            d[x][y] = d[y][x] = as_fraction(v)
        return cls(n, tuple(map(tuple, d)))

    def point_invariant(self, p):
        return tuple(sorted(self.dist[p]))

    def d(self, x: int, y: int) -> Fraction:
        return self.dist[x][y]

    @property
    def diameter(self) -> Fraction:
        return max((v for row in self.dist for v in row), default=Fraction(0))

    def distances(self) -> set[Fraction]:
        return {self.dist[x][y] for x in range(self.size) for y in range(x + 1, self.size)}

    def _scaled(self):
        # (common denominator, integer matrix); comparisons across spaces
        # cross-multiply instead of going through Fraction
        try:
            return self.__dict__["_int"]
        except KeyError:
            den = math.lcm(1, *(v.denominator for row in self.dist for v in row))
            val = (den, tuple(tuple(int(v * den) for v in row) for row in self.dist))
            object.__setattr__(self, "_int", val)
            return val

    def related_ok(self, target, x, fx, y, fy, embedding):
        if x == y:
            return True
        sd, sm = self._scaled()
        td, tm = target._scaled()
        a, b = tm[fx][fy] * sd, sm[x][y] * td
        return a == b if embedding else a <= b

    def relabel(self, points):
        return RationalMetricSpace.trusted(
            tuple(tuple(self.dist[p][q] for q in points) for p in points))

    def encode(self):
        return (self.size, tuple(self.dist[x][y] for x in range(self.size)
                                 for y in range(x + 1, self.size)))

    def extended(self, dists: Sequence[Fraction]) -> "RationalMetricSpace":
        """One new point at the given distances (not re-validated)."""
        rows = [row + (dists[i],) for i, row in enumerate(self.dist)]
        rows.append(tuple(dists) + (Fraction(0),))
        return RationalMetricSpace.trusted(rows)


@dataclass(frozen=True)
class ClosedBall:
    center: int
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "radius", as_fraction(self.radius))
        if self.radius < 0:
            raise StructureError("negative radius")

    def contains(self, X: RationalMetricSpace, y: int) -> bool:
        return X.d(self.center, y) <= self.radius


def _rational_gcd(values: Iterable[Fraction]) -> Fraction:
    vals = [as_fraction(v) for v in values]
    if not vals:
        return Fraction(0)
    den = math.lcm(*(v.denominator for v in vals))
    return Fraction(math.gcd(*(int(v * den) for v in vals)), den)


@dataclass(frozen=True)
class RadiusDomain:
    """Admissible radii/distances: the additive semigroup spanned by ``generators``.

    ``dense=True`` stands for all positive rationals.  ``cap`` bounds the
    admissible radii (``cap=1`` gives the 1-hyperconvex variant).
    """

    generators: tuple = (Fraction(1),)
    cap: Fraction | None = None
    dense: bool = False

    def __post_init__(self):
        gens = tuple(sorted({as_fraction(g) for g in self.generators}))
        if not self.dense and (not gens or gens[0] <= 0):
            raise ValueError("generators must be positive rationals")
        object.__setattr__(self, "generators", gens)
        if self.cap is not None:
            object.__setattr__(self, "cap", as_fraction(self.cap))
            if self.cap <= 0:
                raise ValueError("cap must be positive")

    @property
    def unit(self) -> Fraction:
        return _rational_gcd(self.generators)

    def contains(self, v) -> bool:
        v = as_fraction(v)
        if v <= 0 or (self.cap is not None and v > self.cap):
            return False
        if self.dense:
            return True
        return _representable(self.generators, v)

    def values_upto(self, bound, grid=None) -> list[Fraction]:
        """Admissible values in ``(0, bound]``; dense domains need a grid step."""
        bound = as_fraction(bound)
        if self.cap is not None:
            bound = min(bound, self.cap)
        if self.dense:
            if grid is None:
                raise ValueError("a dense domain needs a grid to enumerate values")
            step = as_fraction(grid)
            return [step * k for k in range(1, int(bound / step) + 1)]
        u = self.unit
        return [u * k for k in range(1, int(bound / u) + 1) if _representable(self.generators, u * k)]

    def max_below(self, u, grid=None) -> Fraction | None:
        """Largest admissible value strictly below ``u`` (discrete domains)."""
        u = as_fraction(u)
        vals = [v for v in self.values_upto(u, grid) if v < u]
        return vals[-1] if vals else None

    def least_at_least(self, v) -> Fraction:
        v = as_fraction(v)
        if self.dense:
            return max(v, Fraction(0)) or Fraction(1)
        u = self.unit
        k = max(1, math.ceil(v / u))
        while not _representable(self.generators, u * k):
            k += 1
        return u * k


@lru_cache(maxsize=None)
def _representable(gens: tuple, v: Fraction) -> bool:
    den = math.lcm(v.denominator, *(g.denominator for g in gens))
    target = int(v * den)
    if v * den != target:
        return False
    coins = [int(g * den) for g in gens]
    reach = [False] * (target + 1)
    reach[0] = True
    for t in range(1, target + 1):
        reach[t] = any(c <= t and reach[t - c] for c in coins)
    return reach[target]


# ---------------------------------------------------------------------------
# unary-function models


@dataclass(frozen=True)
class UnaryModel(Structure):
    size: int
    P: tuple = ()

    kind = "unary"

    def __post_init__(self):
        object.__setattr__(self, "P", tuple(self.P))
        if len(self.P) != self.size or any(not 0 <= v < self.size for v in self.P):
            raise StructureError("P must be a total function on the carrier")

    @classmethod
    def cycle(cls, n: int) -> "UnaryModel":
        return cls(n, tuple((i + 1) % n for i in range(n)))

    def point_invariant(self, p):
        return (self.P.count(p), self.P[p] == p)

    def related_ok(self, target, x, fx, y, fy, embedding):
        if self.P[x] == y and target.P[fx] != fy:
            return False
        if self.P[y] == x and target.P[fy] != fx:
            return False
        return not (embedding and x != y and fx == fy)

    def is_closed(self, points) -> bool:
        pts = set(points)
        return all(self.P[p] in pts for p in pts)

    def relabel(self, points):
        idx = {p: i for i, p in enumerate(points)}
        if not self.is_closed(points):
            raise StructureError("point set is not closed under P")
        return UnaryModel(len(points), tuple(idx[self.P[p]] for p in points))

    def encode(self):
        return (self.size, self.P)

    def closure(self, seeds: Iterable[int], covered: Iterable[int] = ()) -> list[int]:
        """Points reachable from ``seeds`` under P, in discovery order, skipping ``covered``."""
        seen = set(covered)
        out = []
        for s in seeds:
            p = s
            while p not in seen:
                seen.add(p)
                out.append(p)
                p = self.P[p]
        return out


# ---------------------------------------------------------------------------
# constructions


def _glue(f: Morphism, g: Morphism):
    """Carrier of ``g.codomain`` followed by the points of ``f.codomain`` outside img f."""
    a, b = f.codomain, g.codomain
    finv = {y: x for x, y in enumerate(f.map)}
    new = [p for p in range(a.size) if p not in finv]
    slot = {p: b.size + k for k, p in enumerate(new)}
    pos = [g.map[finv[p]] if p in finv else slot[p] for p in range(a.size)]
    return new, pos


def graph_mixed_pushout(f: Morphism, g: Morphism) -> CommutingSquare:
    a, b = f.codomain, g.codomain
    new, pos = _glue(f, g)
    edges = set(b.edges)
    for u, v in a.edges:
        pu, pv = pos[u], pos[v]
        if pu == pv:
            raise UnsupportedError("pushout would create a loop", (f, g))
        edges.add((pu, pv) if pu < pv else (pv, pu))
    w = Graph(b.size + len(new), frozenset(edges))
    fp = Morphism.trusted(a, w, pos, K if g.kind == K else L)
    gp = Morphism.trusted(b, w, range(b.size), K)
    return CommutingSquare(Span(f.domain, f, g), fp, gp)


def graph_free_amalgam(i: Morphism, j: Morphism) -> CommutingSquare:
    """Free amalgam on the carrier of ``i.codomain``, no edges across the two sides."""
    sq = graph_mixed_pushout(j, i)
    return CommutingSquare(Span(i.domain, i, j), sq.cospan_right, sq.cospan_left)


def unary_mixed_pushout(f: Morphism, g: Morphism) -> CommutingSquare:
    a, b = f.codomain, g.codomain
    new, pos = _glue(f, g)
    P = list(b.P) + [pos[a.P[p]] for p in new]
    w = UnaryModel(len(P), tuple(P))
    fp = Morphism.trusted(a, w, pos, K if g.kind == K else L)
    gp = Morphism.trusted(b, w, range(b.size), K)
    return CommutingSquare(Span(f.domain, f, g), fp, gp)


def unary_generated_submodel(M: UnaryModel, seeds: Iterable[int]) -> tuple[UnaryModel, list[int]]:
    """Least P-closed submodel containing ``seeds``; returns it with its point list."""
    pts = sorted(M.closure(sorted(set(seeds))))
    return M.relabel(pts), pts


def _eq_m(Y: RationalMetricSpace, images: Sequence[int], to_new: Sequence[Fraction]) -> list[Fraction]:
    return [min(Y.d(y, fy) + r for fy, r in zip(images, to_new)) for y in range(Y.size)]


def metric_mixed_pushout(f: Morphism, g: Morphism, cap: Fraction | None = None) -> CommutingSquare:
    """Pushout of an isometric embedding ``f`` along a non-expansive ``g``.

    New points of ``f.codomain`` are added one at a time; each step places
    the new point at distance ``min_x d(y, g x) + d(x, a)`` from ``y``.
    """
    c, a, b = f.domain, f.codomain, g.codomain
    if c.size == 0:
        raise UnsupportedError("metric pushouts need a nonempty common domain", (f, g))
    finv = {y: x for x, y in enumerate(f.map)}
    xs = list(f.map)
    gmap = [g.map[finv[p]] for p in xs]
    Y = b
    for t in range(a.size):
        if t in finv:
            continue
        dists = _eq_m(Y, gmap, [a.d(x, t) for x in xs])
        hit = next((y for y, v in enumerate(dists) if v == 0), None)
        if hit is None:
            Y = Y.extended(dists)
            hit = Y.size - 1
        xs.append(t)
        gmap.append(hit)
    pos = [0] * a.size
    for x, y in zip(xs, gmap):
        pos[x] = y
    if cap is not None:
        Y = truncate_metric(Y, cap)
        a = truncate_metric(a, cap) if a.diameter > cap else a
    fp = Morphism.trusted(f.codomain, Y, pos, K if g.kind == K else L)
    gp = Morphism.trusted(b, Y, range(b.size), K)
    return CommutingSquare(Span(c, f, g), fp, gp)


def metric_pushout_extend(f: Morphism, ext: Morphism
                          ) -> tuple[RationalMetricSpace, Morphism, Morphism]:
    """One-point pushout: returns ``(Y u {b}, g: X u {a} -> Y u {b}, Y -> Y u {b})``."""
    if f.domain.size == 0:
        raise PreconditionError("the domain must be nonempty")
    if ext.codomain.size != ext.domain.size + 1 or ext.kind != K:
        raise PreconditionError("ext must be an isometric one-point extension")
    if ext.domain != f.domain:
        raise PreconditionError("f and ext must share their domain")
    sq = metric_mixed_pushout(ext, f)
    return sq.apex, sq.cospan_left, sq.cospan_right


def one_point_ball_extension(X: RationalMetricSpace, balls: Sequence[ClosedBall]
                             ) -> tuple[RationalMetricSpace, int]:
    """Add a point inside every ball; returns the space and the new point's id.

    Distances follow ``d(a, x) = min_i d(x, x_i) + r_i``; a zero minimum
    identifies the new point with an existing one.
    """
    if not balls:
        raise PreconditionError("at least one ball is required")
    for (i, bi), (j, bj) in itertools.combinations(enumerate(balls), 2):
        if X.d(bi.center, bj.center) > bi.radius + bj.radius:
            raise PreconditionError(f"balls {i} and {j} are too far apart", (i, j))
    dists = [min(X.d(x, b.center) + b.radius for b in balls) for x in range(X.size)]
    hit = next((x for x, v in enumerate(dists) if v == 0), None)
    if hit is not None:
        return X, hit
    return X.extended(dists), X.size


def truncate_metric(X: RationalMetricSpace, C) -> RationalMetricSpace:
    C = as_fraction(C)
    if C <= 0:
        raise ValueError("truncation level must be positive")
    return RationalMetricSpace.trusted(tuple(tuple(min(v, C) for v in row) for row in X.dist))


def _merge_orders(i: Morphism, j: Morphism, hA=None, hB=None, target=None):
    """Order ``A u_C B`` on the carrier of A followed by the new points of B.

    Points are compared by (image in ``target`` if given, number of shared
    points below, tier, own rank).  With a target, new points of B sit below
    tied new points of A; without one, the reverse.
    """
    A, B, C = i.codomain, j.codomain, i.domain
    inA = {y: c for c, y in enumerate(i.map)}
    inB = {y: c for c, y in enumerate(j.map)}
    tierA, tierB = (1, 0) if target is not None else (0, 1)

    def key(S, side, inv, h, p, tier):
        h_key = (target.ranks[h[p]],) if target is not None else ()
        gap = bisect.bisect_left(cut[side], S.ranks[p])
        if p in inv:
            return h_key + (gap, 2, C.ranks[inv[p]])
        return h_key + (gap, tier, S.ranks[p])

    cut = (sorted(A.ranks[y] for y in i.map), sorted(B.ranks[y] for y in j.map))
    keys = [key(A, 0, inA, hA, p, tierA) for p in range(A.size)]
    newB = [q for q in range(B.size) if q not in inB]
    keys += [key(B, 1, inB, hB, q, tierB) for q in newB]
    order = sorted(range(len(keys)), key=keys.__getitem__)
    ranks = [0] * len(keys)
    for r, p in enumerate(order):
        ranks[p] = r
    W = LinOrder(len(keys), tuple(ranks))
    slot = {q: A.size + n for n, q in enumerate(newB)}
    lmap = [i.map[inB[q]] if q in inB else slot[q] for q in range(B.size)]
    k = Morphism.trusted(A, W, range(A.size), K)
    l = Morphism.trusted(B, W, lmap, K)
    return W, k, l, newB


def linorder_amalgamate(i: Morphism, j: Morphism) -> CommutingSquare:
    W, k, l, _ = _merge_orders(i, j)
    return CommutingSquare(Span(i.domain, i, j), k, l)


def linorder_amalgamated_extension(i: Morphism, j: Morphism, f: Morphism, g: Morphism):
    """Amalgam ``W`` of ``i: C->A`` and ``j: C->B`` with an increasing ``h: W -> L``.

    Requires ``f . i == g . j``.  Returns ``(W, k, l, h)`` with ``h . k == f``
    and ``h . l == g``.  A new point of A lies above a new point of B unless
    its image is smaller or it lies in a lower gap between shared points.
    """
    if compose(f, i).map != compose(g, j).map:
        raise PreconditionError("f and g disagree on the shared part")
    Lord = f.codomain
    W, k, l, newB = _merge_orders(i, j, f.map, g.map, Lord)
    hmap = list(f.map) + [g.map[q] for q in newB]
    h = Morphism(W, Lord, hmap, L)
    return W, k, l, h


def linorder_mixed_amalgam(i: Morphism, f: Morphism) -> tuple[Morphism, Morphism]:
    """Complete a primitive embedding ``i: C -> A`` and increasing ``f: C -> B``.

    Returns ``(g: A -> W, l: B -> W)`` with ``g . i == l . f``; ``W`` adds at
    most one point to ``B``, placed immediately above the largest image of a
    point below the new one (or at the bottom).
    """
    C, A, B = i.domain, i.codomain, f.codomain
    new = [p for p in range(A.size) if p not in set(i.map)]
    if len(new) > 1:
        raise PreconditionError("i must be primitive")
    inv = {y: c for c, y in enumerate(i.map)}
    if not new:
        gmap = [f.map[inv[p]] for p in range(A.size)]
        return Morphism(A, B, gmap, L), identity(B)
    a = new[0]
    below = [f.map[c] for c in range(C.size) if A.less(i.map[c], a)]
    above = [f.map[c] for c in range(C.size) if A.less(a, i.map[c])]
    lo = max(below, key=B.ranks.__getitem__) if below else None
    hi = min(above, key=B.ranks.__getitem__) if above else None
    if lo is not None and lo == hi:
        W, w = B, lo
    else:
        W = B.insert(B.ranks[lo] + 1 if lo is not None else 0)
        w = B.size
    gmap = [w if p == a else f.map[inv[p]] for p in range(A.size)]
    return Morphism(A, W, gmap, L), Morphism(B, W, range(B.size), K)


def linorder_left_inverse(j: Morphism) -> Morphism:
    """Increasing ``r`` with ``r . j == id``: each point goes to the largest image below it."""
    A, B = j.domain, j.codomain
    if A.size == 0:
        if B.size == 0:
            return identity(B, L)
        raise PreconditionError("an empty order has no left inverse into it", j)
    least = A.in_order[0]
    inv = {y: x for x, y in enumerate(j.map)}
    rmap = []
    for b in range(B.size):
        cands = [y for y in j.map if not B.less(b, y)]
        rmap.append(inv[max(cands, key=B.ranks.__getitem__)] if cands else least)
    return Morphism(B, A, rmap, L)


# ---------------------------------------------------------------------------
# category pairs


@dataclass(frozen=True)
class GraphPair(CategoryPair):
    """Finite graphs; optionally only the K_n-free ones."""

    forbidden_clique: int | None = None

    grows_by_points = True
    kind = "graph"

    @property
    def name(self):
        if self.forbidden_clique:
            return f"K{self.forbidden_clique}-free graphs"
        return "graphs"

    def admits(self, x):
        return not self.forbidden_clique or not x.contains_clique(self.forbidden_clique)

    def empty(self):
        return Graph(0)

    def raw_objects(self, n):
        pairs = list(itertools.combinations(range(n), 2))
        for bits in itertools.product((0, 1), repeat=len(pairs)):
            yield Graph(n, frozenset(p for p, b in zip(pairs, bits) if b))

    def one_point_extensions(self, s, order=None):
        order = list(range(s.size)) if order is None else list(order)
        for r in range(len(order) + 1):
            for nbhd in itertools.combinations(order, r):
                if self.forbidden_clique and s.contains_clique(self.forbidden_clique - 1, nbhd):
                    continue
                yield Morphism.trusted(s, s.with_vertex(nbhd), range(s.size), K)

    def mixed_pushout(self, f, g):
        sq = graph_mixed_pushout(f, g)
        if not self.admits(sq.apex):
            raise UnsupportedError(f"the pushout leaves the class of {self.name}", sq)
        return sq


@dataclass(frozen=True)
class LinOrderPair(CategoryPair):
    grows_by_points = True
    kind = "linorder"
    name = "linear orders"
    has_pushouts = False

    def empty(self):
        return LinOrder(0)

    def raw_objects(self, n):
        if n > 0:
            yield LinOrder.chain(n)

    def one_point_extensions(self, s, order=None):
        # slot k inserts just below the point of rank k; slot s.size is the top
        if order is None:
            slots = range(s.size + 1)
        else:
            slots = [s.ranks[p] for p in order] + [s.size]
        for pos in slots:
            yield Morphism.trusted(s, s.insert(pos), range(s.size), K)

    def joint_embed(self, a, b):
        e = LinOrder(0)
        sq = linorder_amalgamate(Morphism.trusted(e, a, (), K), Morphism.trusted(e, b, (), K))
        return sq.cospan_left, sq.cospan_right

    def amalgamate(self, i, j):
        return linorder_amalgamate(i, j)

    def mixed_pushout(self, f, g):
        c, a = LinOrder.chain(1), LinOrder.chain(2)
        witness = Span(c, Morphism(c, a, (0,), K), Morphism(c, a, (0,), K))
        raise UnsupportedError("linear orders have no pushouts: two points placed above a "
                               "common point cannot be ordered universally", witness)

    def mixed_amalgam(self, f, g):
        steps = decompose_into_primitives(self, f) or [f]
        cur = g
        l_total = identity(g.codomain)
        for step in steps:
            cur, l = linorder_mixed_amalgam(step, cur)
            l_total = compose(l, l_total)
        return cur, l_total

    def amalgamated_extension(self, i, j, f, g):
        W, k, l, h = linorder_amalgamated_extension(i, j, f, g)
        return CommutingSquare(Span(i.domain, i, j), k, l), h

    def left_inverse(self, j):
        try:
            return linorder_left_inverse(j)
        except PreconditionError:
            return None


@dataclass(frozen=True)
class MetricPair(CategoryPair):
    """Nonempty finite metric spaces with distances in a radius domain.

    ``value_bound`` limits the distances used when enumerating objects and
    one-point extensions; ``grid`` is required for dense domains.
    """

    domain: RadiusDomain = field(default_factory=RadiusDomain)
    value_bound: Fraction = Fraction(3)
    grid: Fraction | None = None

    grows_by_points = True
    kind = "metric"

    def __post_init__(self):
        object.__setattr__(self, "value_bound", as_fraction(self.value_bound))
        if self.grid is not None:
            object.__setattr__(self, "grid", as_fraction(self.grid))

    @property
    def name(self):
        if self.domain.dense:
            return "rational metric spaces"
        gens = ",".join(str(g) for g in self.domain.generators)
        return f"metric spaces with distances in <{gens}>"

    @property
    def values(self) -> list[Fraction]:
        return self.domain.values_upto(self.value_bound, self.grid)

    def empty(self):
        return RationalMetricSpace(0)

    def raw_objects(self, n):
        if n == 0:
            return
        pairs = list(itertools.combinations(range(n), 2))
        for vals in itertools.product(self.values, repeat=len(pairs)):
            d = [[Fraction(0)] * n for _ in range(n)]
            for (x, y), v in zip(pairs, vals):
                d[x][y] = d[y][x] = v
            if all(d[x][z] <= d[x][y] + d[y][z] for x, y, z in itertools.permutations(range(n), 3)):
                yield RationalMetricSpace.trusted(d)

    def distance_vectors(self, s, values, order=None) -> Iterator[tuple]:
        """Distance vectors of admissible one-point extensions of ``s``."""
        order = list(range(s.size)) if order is None else list(order)
        vec: dict[int, Fraction] = {}

        def rec(k):
            if k == len(order):
                yield tuple(vec[x] for x in range(s.size))
                return
            y = order[k]
            for v in values:
                if all(abs(v - r) <= s.d(x, y) <= v + r for x, r in vec.items()):
                    vec[y] = v
                    yield from rec(k + 1)
                    del vec[y]

        yield from rec(0)

    def one_point_extensions(self, s, order=None):
        for vec in self.distance_vectors(s, self.values, order):
            yield Morphism.trusted(s, s.extended(vec), range(s.size), K)

    def task_extensions(self, s, order=None):
        """One-point extensions listed by support: the new point is placed by
        ``min_z d(x, z) + r_z`` over supports of growing size, radii below a
        growing bound.  Every extension eventually appears (support = all)."""
        order = list(range(s.size)) if order is None else list(order)
        cap = self.domain.cap
        seen = set()
        level = self.value_bound
        while True:
            vals = self.domain.values_upto(level, self.grid)
            for k in range(1, len(order) + 1):
                for supp in itertools.combinations(order, k):
                    for radii in itertools.product(vals, repeat=k):
                        pairs = list(zip(supp, radii))
                        if any(abs(rx - ry) > s.d(x, y) or s.d(x, y) > rx + ry
                               for (x, rx), (y, ry) in itertools.combinations(pairs, 2)):
                            continue
                        vec = tuple(min(s.d(x, z) + r for z, r in pairs) for x in range(s.size))
                        if cap is not None:
                            vec = tuple(min(v, cap) for v in vec)
                        if vec in seen:
                            continue
                        seen.add(vec)
                        yield Morphism.trusted(s, s.extended(vec), range(s.size), K)
            if not order or (cap is not None and level >= cap):
                return
            level += self.grid or self.domain.unit

    def mixed_pushout(self, f, g):
        return metric_mixed_pushout(f, g, self.domain.cap)

    def joint_embed(self, a, b):
        pt = RationalMetricSpace(1, ((0,),))
        sq = self.amalgamate(Morphism.trusted(pt, a, (0,), K), Morphism.trusted(pt, b, (0,), K))
        return sq.cospan_left, sq.cospan_right


@dataclass(frozen=True)
class UnaryPair(CategoryPair):
    """Finite sets with one unary function; primitive arrows add one generator."""

    max_chain: int = 2

    kind = "unary"
    name = "unary-function models"

    def empty(self):
        return UnaryModel(0)

    def raw_objects(self, n):
        for P in itertools.product(range(n), repeat=n):
            yield UnaryModel(n, P)

    def _chains(self, s, length, order):
        n = s.size
        targets = (list(range(n)) if order is None else list(order)) + \
            list(range(n, n + length))
        for t in targets:
            P = list(s.P) + [n + k + 1 for k in range(length - 1)] + [t]
            yield Morphism.trusted(s, UnaryModel(n + length, tuple(P)), range(n), K)

    def one_point_extensions(self, s, order=None):
        for length in range(1, self.max_chain + 1):
            yield from self._chains(s, length, order)

    def task_extensions(self, s, order=None):
        length = 1
        while True:
            yield from self._chains(s, length, order)
            length += 1

    def next_block(self, target, covered):
        rest = [p for p in range(target.size) if p not in set(covered)]
        return target.closure(rest[:1], covered)

    def mixed_pushout(self, f, g):
        return unary_mixed_pushout(f, g)


def default_pair(x: Structure) -> CategoryPair:
    if isinstance(x, Graph):
        return GraphPair()
    if isinstance(x, LinOrder):
        return LinOrderPair()
    if isinstance(x, RationalMetricSpace):
        dists = x.distances()
        if all(v.denominator == 1 for v in dists):
            return MetricPair(RadiusDomain((1,)), max([Fraction(3)] + list(dists)))
        step = _rational_gcd(dists) / 2
        return MetricPair(RadiusDomain(dense=True), max(dists), step)
    if isinstance(x, UnaryModel):
        return UnaryPair()
    raise TypeError(f"no category pair for {type(x).__name__}")


def pair_for_kind(kind: str, **options) -> CategoryPair:
    if kind == "graph":
        return GraphPair(options.get("forbidden_clique"))
    if kind == "linorder":
        return LinOrderPair()
    if kind == "metric":
        return MetricPair(options.get("domain", RadiusDomain()),
                          options.get("value_bound", Fraction(3)), options.get("grid"))
    if kind == "unary":
        return UnaryPair(options.get("max_chain", 2))
    raise ValueError(f"unknown structure kind {kind!r}")
