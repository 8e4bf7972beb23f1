"""Bounded, exact checks of injectivity-type properties of finite structures.

Every positive verdict carries a witness that rechecks by direct evaluation;
negative verdicts carry the failing configuration.  All verdicts are relative
to the stated bounds.
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    K,
    L,
    CategoryPair,
    Morphism,
    Structure,
    compose,
    extensions,
    first_extension,
)
from .feasibility import feasible, lower, pair_sum_at_least, upper
from .sequences import SequenceK
from .structures import (
    ClosedBall,
    Graph,
    LinOrder,
    RadiusDomain,
    RationalMetricSpace,
    UnaryModel,
    UnaryPair,
    _rational_gcd,
    default_pair,
)


class ConsistencyError(AssertionError):
    """Two independent procedures disagreed; both witnesses are attached."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


@dataclass
class InjectivityVerdict:
    holds: bool
    witness: object = None
    depth: int = 0

    def __bool__(self):
        return self.holds


# ---------------------------------------------------------------------------
# arrows into sequences


def _complete_into(X: SequenceK, n: int, j: Morphism, f: Morphism, depth: int | None = None):
    """Least ``m >= n`` and an L-arrow ``g`` from ``j.codomain`` to ``x_m`` with
    ``g . j == x_n^m . f``."""
    top = X.depth if depth is None else min(depth, X.depth)
    for m in range(n, top):
        up = X.arrow(n, m)
        fixed = {}
        for p in range(j.domain.size):
            v = up.map[f.map[p]]
            if fixed.setdefault(j.map[p], v) != v:
                return None
        g = first_extension(j.codomain, X[m], fixed)
        if g is not None:
            return m, Morphism.trusted(j.codomain, X[m], g, L)
    return None


def check_injectivity_criterion(X: SequenceK, n: int, f: Morphism, depth: int | None = None
                                ) -> InjectivityVerdict:
    """Search ``m <= depth`` and ``g: y -> x_m`` (any homomorphism) with ``g . f = x_n^m``.

    A negative verdict only says nothing was found inside the prefix.
    """
    if f.kind != K:
        raise ValueError("the criterion is stated for K-arrows out of a stage")
    hit = _complete_into(X, n, f, identity_map(X[n]), depth)
    used = X.depth if depth is None else min(depth, X.depth)
    if hit is None:
        return InjectivityVerdict(False, f, used)
    return InjectivityVerdict(True, hit[1], hit[0])


def identity_map(x: Structure) -> Morphism:
    return Morphism.trusted(x, x, range(x.size), K)


# ---------------------------------------------------------------------------
# hyperconvexity


@dataclass
class HyperconvexVerdict:
    holds: bool
    balls: tuple = ()
    systems: int = 0

    def __bool__(self):
        return self.holds


def _family_violates(X: RationalMetricSpace, balls) -> bool:
    """Pairwise compatible radii and no common point."""
    for a, b in itertools.combinations(balls, 2):
        if X.d(a.center, b.center) > a.radius + b.radius:
            return False
    return not any(all(b.contains(X, y) for b in balls) for y in range(X.size))


def _least_value(S: RadiusDomain) -> Fraction:
    return S.generators[0]


def _violating_radii(X, Z, u, S: RadiusDomain):
    k = len(Z)
    cons = [pair_sum_at_least(k, i, j, X.d(Z[i], Z[j]))
            for i, j in itertools.combinations(range(k), 2)]
    tops: list = [None] * k
    for i in range(k):
        if S.cap is not None:
            cons.append(upper(k, i, S.cap))
            tops[i] = S.cap
        if S.dense:
            cons.append(lower(k, i, 0, strict=True))
            if u[i] is not None:
                cons.append(upper(k, i, u[i], strict=True))
        else:
            cons.append(lower(k, i, _least_value(S)))
            if u[i] is not None:
                m = S.max_below(u[i])
                if m is None:
                    return None
                cons.append(upper(k, i, m))
                tops[i] = m if tops[i] is None else min(m, tops[i])
    sol = feasible(cons, k)
    if sol is None:
        return None
    far = max(X.d(Z[i], Z[j]) for i, j in itertools.combinations(range(k), 2))
    if S.dense:
        # prefer half-distance radii when they already work
        half = [max(X.d(Z[i], Z[j]) for j in range(k) if j != i) / 2 for i in range(k)]
        if all(c.holds(half) for c in cons):
            return tuple(half)
        return sol
    # radius constraints are monotone, so the largest admissible values work
    return tuple(t if t is not None else S.least_at_least(far) for t in tops)


def is_finitely_hyperconvex(X: RationalMetricSpace, S: RadiusDomain | None = None
                            ) -> HyperconvexVerdict:
    """Exact check that every pairwise-compatible finite family of closed balls
    with radii in ``S`` meets.

    Each candidate empty-intersection pattern (which ball misses which point)
    gives a small linear system in the radii, decided exactly.
    """
    S = S or RadiusDomain()
    n = X.size
    seen = set()
    systems = 0
    for k in range(2, n + 1):
        for Z in itertools.combinations(range(n), k):
            choices = [[i for i in range(k) if Z[i] != y] for y in range(n)]
            for sigma in itertools.product(*choices):
                u: list = [None] * k
                for y, i in enumerate(sigma):
                    d = X.d(y, Z[i])
                    u[i] = d if u[i] is None else min(u[i], d)
                key = (Z, tuple(u))
                if key in seen:
                    continue
                seen.add(key)
                systems += 1
                radii = _violating_radii(X, Z, u, S)
                if radii is None:
                    continue
                balls = tuple(ClosedBall(c, r) for c, r in zip(Z, radii))
                if not _family_violates(X, balls):
                    raise ConsistencyError("radii from the linear system do not violate", balls)
                return HyperconvexVerdict(False, balls, systems)
    return HyperconvexVerdict(True, (), systems)


def _value_grid(X: RationalMetricSpace, S: RadiusDomain) -> list[Fraction]:
    """Radii that suffice for deciding one-point extension problems over ``X``."""
    diam = X.diameter
    if S.dense:
        base = [v for v in X.distances() if v > 0] + ([S.cap] if S.cap else []) or [Fraction(1)]
        step = _rational_gcd(base) / 2
        return S.values_upto(diam + step, step)
    top = S.least_at_least(max(diam, _least_value(S)))
    return S.values_upto(top)


def extension_failure(X: RationalMetricSpace, S: RadiusDomain, size_bound: int | None = None):
    """First ``(A, r)``: a subspace ``A`` and a one-point extension ``r`` of it
    with no point ``y`` of ``X`` satisfying ``d(y, a) <= r_a``; None if injective."""
    vals = _value_grid(X, S)
    top = X.size if size_bound is None else min(size_bound, X.size)
    for k in range(1, top + 1):
        for A in itertools.combinations(range(X.size), k):
            for vec in itertools.product(vals, repeat=k):
                if any(abs(vec[i] - vec[j]) > X.d(A[i], A[j]) or X.d(A[i], A[j]) > vec[i] + vec[j]
                       for i, j in itertools.combinations(range(k), 2)):
                    continue
                if not any(all(X.d(y, a) <= r for a, r in zip(A, vec)) for y in range(X.size)):
                    return A, vec
    return None


@dataclass
class Agreement:
    agree: bool
    hyperconvex: bool
    balls: tuple
    failure: object


def hyperconvex_equals_injective(X: RationalMetricSpace, S: RadiusDomain | None = None,
                                 size_bound: int | None = None) -> Agreement:
    """Compare the ball-family check with a direct search for unextendable
    inclusions; raise on disagreement."""
    S = S or RadiusDomain()
    hc = is_finitely_hyperconvex(X, S)
    fail = extension_failure(X, S, size_bound)
    if hc.holds != (fail is None):
        raise ConsistencyError("hyperconvexity and injectivity disagree",
                               {"space": X, "balls": hc.balls, "failure": fail})
    return Agreement(True, hc.holds, hc.balls, fail)


# ---------------------------------------------------------------------------
# atomic diagrams and algebraic closedness


@dataclass(frozen=True)
class AtomicDiagram:
    """Conjunction of atomic facts over parameters and free variables.

    Terms ``0..len(params)-1`` are the parameters, the rest are variables.
    Facts: ``("E", s, t)``, ``("<", s, t)``, ``("D", s, t, r)``, and
    ``("P", k, s, t)`` meaning ``P^k(s) = t``.  ``strict`` selects ``d < r``
    over ``d <= r`` for distance facts.
    """

    params: tuple
    nvars: int
    facts: tuple
    strict: bool = False

    def __post_init__(self):
        top = len(self.params) + self.nvars
        for f in self.facts:
            terms = f[1:3] if f[0] != "P" else f[2:4]
            if any(not 0 <= t < top for t in terms):
                raise ValueError(f"fact {f} mentions an unlisted term")

    def holds(self, X: Structure, values) -> bool:
        a = list(self.params) + list(values)
        for f in self.facts:
            tag = f[0]
            if tag == "E":
                if not X.adjacent(a[f[1]], a[f[2]]):
                    return False
            elif tag == "<":
                if not X.less(a[f[1]], a[f[2]]):
                    return False
            elif tag == "D":
                d = X.d(a[f[1]], a[f[2]])
                if not (d < f[3] if self.strict else d <= f[3]):
                    return False
            elif tag == "P":
                p = a[f[2]]
                for _ in range(f[1]):
                    p = X.P[p]
                if p != a[f[3]]:
                    return False
        return True

    def realization(self, X: Structure):
        for values in itertools.product(range(X.size), repeat=self.nvars):
            if self.holds(X, values):
                return values
        return None

    @classmethod
    def from_extension(cls, ext: Morphism, params, strict: bool = False,
                       slack: Fraction = Fraction(0)) -> "AtomicDiagram":
        """All atomic facts of the new points of ``ext`` over ``params``."""
        Y = ext.codomain
        new = [p for p in range(Y.size) if p not in ext.image]
        pts = [ext.map[p] for p in params] + new
        idx = {p: t for t, p in enumerate(pts)}
        first_var = len(params)
        facts = []
        for s, t in itertools.permutations(range(len(pts)), 2):
            if max(s, t) < first_var:
                continue
            x, y = pts[s], pts[t]
            if isinstance(Y, Graph) and s < t and Y.adjacent(x, y):
                facts.append(("E", s, t))
            elif isinstance(Y, LinOrder) and Y.less(x, y):
                facts.append(("<", s, t))
            elif isinstance(Y, RationalMetricSpace) and s < t:
                facts.append(("D", s, t, Y.d(x, y) + (slack if strict else 0)))
        if isinstance(Y, UnaryModel):
            for s in range(first_var, len(pts)):
                p, k = pts[s], 0
                while k <= Y.size:
                    p, k = Y.P[p], k + 1
                    if p in idx:
                        facts.append(("P", k, s, idx[p]))
                        break
        return cls(tuple(params), len(new), tuple(facts), strict)


def _slack(X: RationalMetricSpace, Y: RationalMetricSpace) -> Fraction:
    vals = sorted(X.distances() | Y.distances())
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    return min(gaps) / 2 if gaps else Fraction(1, 2)


def _extensions_by(pair: CategoryPair, X: Structure, count: int):
    frontier = [Morphism.trusted(X, X, range(X.size), K)]
    for _ in range(count):
        nxt = []
        for e in frontier:
            for step in pair.one_point_extensions(e.codomain):
                c = compose(step, e)
                nxt.append(c)
                yield c
        frontier = nxt


@dataclass
class ClosednessVerdict:
    holds: bool
    witness: AtomicDiagram | None = None
    bounds: tuple = ()
    necessary_only: bool = True  # bounded battery, not a full decision

    def __bool__(self):
        return self.holds


def is_algebraically_closed(X: Structure, arity_bound: int, extension_bound: int = 1,
                            pair: CategoryPair | None = None, strict: bool = True
                            ) -> ClosednessVerdict:
    """Every diagram over at most ``arity_bound`` parameters that some
    extension of ``X`` by ``extension_bound`` new points realizes is already
    realized in ``X``."""
    pair = pair or default_pair(X)
    bounds = (arity_bound, extension_bound)
    seen = set()
    for ext in _extensions_by(pair, X, extension_bound):
        if not pair.admits(ext.codomain):
            continue
        slack = _slack(X, ext.codomain) if isinstance(X, RationalMetricSpace) else Fraction(0)
        for k in range(min(arity_bound, X.size) + 1):
            for params in itertools.combinations(range(X.size), k):
                D = AtomicDiagram.from_extension(ext, params, strict, slack)
                key = (D.params, D.nvars, frozenset(D.facts))
                if key in seen:
                    continue
                seen.add(key)
                if D.realization(X) is None:
                    return ClosednessVerdict(False, D, bounds)
    return ClosednessVerdict(True, None, bounds)


# ---------------------------------------------------------------------------
# bounded injectivity and mixed amalgamation


def _homs(a: Structure, X: Structure):
    return extensions(a, X)


def bounded_injective(pair: CategoryPair, X: Structure | SequenceK, size_bound: int
                      ) -> InjectivityVerdict:
    """Injectivity for primitive K-arrows ``j: a -> b`` with ``|b| <= size_bound``.

    Primitive arrows suffice since every K-arrow is a composite of them.
    The witness of a failure is the pair ``(j, f)``.
    """
    seq = X if isinstance(X, SequenceK) else None
    for k in range(size_bound):
        for a in pair.objects(k):
            for j in pair.one_point_extensions(a):
                if j.codomain.size > size_bound:
                    continue
                stages = range(seq.depth) if seq else [None]
                for n in stages:
                    tgt = seq[n] if seq else X
                    for f in _homs(a, tgt):
                        fm = Morphism.trusted(a, tgt, f, L)
                        if seq:
                            ok = _complete_into(seq, n, j, fm) is not None
                        else:
                            fixed = {j.map[p]: f[p] for p in range(a.size)}
                            ok = first_extension(j.codomain, tgt, fixed) is not None
                        if not ok:
                            return InjectivityVerdict(False, (j, fm), size_bound)
    return InjectivityVerdict(True, None, size_bound)


@dataclass
class AmalgamationVerdict:
    holds: bool
    witness: object = None
    checked: int = 0

    def __bool__(self):
        return self.holds


def _surjections(c: Structure, b: Structure):
    for f in extensions(c, b):
        if len(set(f)) == b.size:
            yield Morphism.trusted(c, b, f, L)


def mixed_amalgam_search(pair: CategoryPair, i: Morphism, f: Morphism):
    """``(f2, g2)`` with ``f2 . i == g2 . f``, ``g2`` a K-arrow out of ``f.codomain``
    adding at most as many points as ``i`` does; None if impossible."""
    b = f.codomain
    new = i.codomain.size - i.domain.size
    cands = [Morphism.trusted(b, b, range(b.size), K)] + list(_extensions_by(pair, b, new))
    for e in cands:
        if not pair.admits(e.codomain):
            continue
        fixed = {i.map[x]: e.map[f.map[x]] for x in range(i.domain.size)}
        m = first_extension(i.codomain, e.codomain, fixed)
        if m is not None:
            return Morphism.trusted(i.codomain, e.codomain, m, L), e
    return None


def check_mixed_amalgamation(pair: CategoryPair, size_bound: int) -> AmalgamationVerdict:
    """Exhaustive one-point check: primitive ``i: c -> a`` against surjective
    ``f: c -> b``, carriers at most ``size_bound``."""
    if isinstance(pair, UnaryPair):
        pair = dataclasses.replace(pair, max_chain=size_bound)
    checked = 0
    for k in range(size_bound):
        for c in pair.objects(k):
            for i in pair.one_point_extensions(c):
                if i.codomain.size > size_bound:
                    continue
                for m in range(k + 1):
                    for b in pair.objects(m):
                        for f in _surjections(c, b):
                            checked += 1
                            if mixed_amalgam_search(pair, i, f) is None:
                                return AmalgamationVerdict(False, (i, f), checked)
    return AmalgamationVerdict(True, None, checked)


@dataclass(frozen=True)
class HensonWitness:
    """Independent set ``S``, ``T = S`` plus a vertex joined to all of ``S``,
    and the collapse of ``S`` onto a clique of the same size."""

    n: int
    S: Graph
    T: Graph
    j: Morphism
    collapse: Morphism

    def refutes(self, X: Graph) -> bool:
        """True if ``X`` contains the clique and the collapse does not extend to ``T``."""
        clique = self.collapse.codomain
        e = first_extension(clique, X, embedding=True)
        if e is None:
            return False
        f = [e[v] for v in self.collapse.map]
        fixed = {self.j.map[p]: f[p] for p in range(self.S.size)}
        return first_extension(self.T, X, fixed) is None


def henson_witness(n: int) -> HensonWitness:
    if n <= 2:
        raise ValueError("the configuration needs n > 2")
    S = Graph.discrete(n - 1)
    T = S.with_vertex(range(n - 1))
    j = Morphism(S, T, range(n - 1), K)
    collapse = Morphism(S, Graph.complete(n - 1), range(n - 1), L)
    return HensonWitness(n, S, T, j, collapse)


# ---------------------------------------------------------------------------
# homomorphism-homogeneity and the injective subcategory


@dataclass
class HomogeneityVerdict:
    holds: bool
    witness: object = None

    def __bool__(self):
        return self.holds


def is_hom_homogeneous(X: Structure, sub_bound: int | None = None) -> HomogeneityVerdict:
    """Every homomorphism between substructures of size at most ``sub_bound``
    extends to an endomorphism.  Finite structures only."""
    top = X.size if sub_bound is None else min(sub_bound, X.size)
    for k in range(top + 1):
        for A in itertools.combinations(range(X.size), k):
            if not X.is_closed(A):
                continue
            sub = X.relabel(A)
            for h in extensions(sub, X):
                if first_extension(X, X, dict(zip(A, h))) is None:
                    return HomogeneityVerdict(False, (A, h))
    return HomogeneityVerdict(True)


def _automorphisms(a: Structure) -> list[tuple]:
    return list(extensions(a, a, embedding=True))


def _canonical_subset(autos, C) -> tuple:
    return min(tuple(sorted(s[p] for p in C)) for s in autos)


@dataclass
class InjectiveSubcategory:
    arrows: list = field(default_factory=list)
    keys: set = field(default_factory=set)
    closed: bool = True
    failures: list = field(default_factory=list)

    def contains(self, a: Structure, image) -> bool:
        autos = _automorphisms(a)
        return (a.encode(), _canonical_subset(autos, image)) in self.keys


def compute_injective_subcategory(X: Structure | SequenceK, bound: int,
                                  pair: CategoryPair | None = None) -> InjectiveSubcategory:
    """K-arrows ``j: c -> a`` (up to isomorphism, ``|a| <= bound``) along which
    ``X`` is injective and with at least one arrow ``c -> X``."""
    seq = X if isinstance(X, SequenceK) else None
    targets = list(seq.stages) if seq else [X]
    pair = pair or default_pair(targets[-1])
    out = InjectiveSubcategory()
    for size in range(bound + 1):
        for a in pair.objects(size):
            autos = _automorphisms(a)
            for r in range(size + 1):
                for C in itertools.combinations(range(size), r):
                    if not a.is_closed(C) or _canonical_subset(autos, C) != C:
                        continue
                    if r == 0 and not pair.objects(0):
                        continue
                    c = a.relabel(C)
                    j = Morphism(c, a, C, K)
                    if not any(first_extension(c, t) is not None for t in targets):
                        continue
                    if _injective_along(j, X):
                        out.arrows.append(j)
                        out.keys.add((a.encode(), C))
    _check_closure(out)
    return out


def _injective_along(j: Morphism, X) -> bool:
    if isinstance(X, SequenceK):
        for n in range(X.depth):
            for f in extensions(j.domain, X[n]):
                if _complete_into(X, n, j, Morphism.trusted(j.domain, X[n], f, L)) is None:
                    return False
        return True
    for f in extensions(j.domain, X):
        if first_extension(j.codomain, X, {j.map[p]: f[p] for p in range(j.domain.size)}) is None:
            return False
    return True


def _check_closure(S: InjectiveSubcategory):
    for j1 in S.arrows:
        for j2 in S.arrows:
            if j2.domain.size != j1.codomain.size:
                continue
            sigma = first_extension(j1.codomain, j2.domain, embedding=True)
            if sigma is None:
                continue
            image = [j2.map[sigma[x]] for x in j1.map]
            if not S.contains(j2.codomain, image):
                S.closed = False
                S.failures.append((j1, j2))
