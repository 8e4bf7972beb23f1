"""Embedding a sequence into a Fraisse prefix together with a retraction.

The triangular grid interleaves the rows of ``X`` with stages of ``U``: row
``i`` runs ``x_i = w[i][0] -> w[i][1] -> ... -> w[i][i+1] = u_{l_i}``, each
new row is obtained by amalgamating the previous one along the vertical
connector, and every grid object carries an arrow ``F[i][j]`` into the
injective target.  Composing a row gives ``J``; the arrows ``F[i][i+1]``
give the retraction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    K,
    L,
    CategoryPair,
    CertificationError,
    CommutingSquare,
    Morphism,
    Span,
    Structure,
    UnsupportedError,
    canonical_form,
    compose,
    compose_all,
    identity,
    verify_pushout_universal,
)
from .fraisse import ConstructionError, FraisseBuilder
from .injectivity import _complete_into, bounded_injective
from .sequences import (
    EquivalenceVerdict,
    SeqMorphism,
    SequenceK,
    StageArrow,
    seq_compose,
    seq_equivalent,
    seq_identity,
)
from .structures import LinOrderPair, PreconditionError


class DepthError(RuntimeError):
    """A prefix ran out before a required witness appeared; extend and retry."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


class RetractionRefused(RuntimeError):
    """``X`` failed the injectivity battery; ``witness`` is the pair ``(j, f)``."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------------------
# oracles: given a K-arrow j: a -> b and F: a -> A, return G: b -> A with G . j = F


class SearchOracle:
    """Exhaustive homomorphism search through the stages of ``A``."""

    def __init__(self, A: SequenceK):
        self.A = A

    def __call__(self, j: Morphism, F: StageArrow) -> StageArrow:
        hit = _complete_into(self.A, F.stage, j, F.arrow)
        if hit is None:
            raise DepthError("no extension inside the target prefix", (j, F))
        return StageArrow(*hit)


class LeftInverseOracle:
    """``G = F . r`` for a left inverse ``r`` of ``j``."""

    def __init__(self, pair: CategoryPair):
        self.pair = pair

    def __call__(self, j: Morphism, F: StageArrow) -> StageArrow:
        r = self.pair.left_inverse(j)
        if r is None:
            raise PreconditionError("K-arrow without a left inverse", j)
        return StageArrow(F.stage, compose(F.arrow, r))


class FraisseOracle:
    """Extension into a Fraisse prefix: mixed amalgam, then completion."""

    def __init__(self, builder: FraisseBuilder):
        self.builder = builder

    def __call__(self, j: Morphism, F: StageArrow) -> StageArrow:
        f2, g2 = self.builder.pair.mixed_amalgam(j, F.arrow)
        m, k = self.builder.request_F2(F.stage, g2)
        return StageArrow(m, compose(k, f2))


# ---------------------------------------------------------------------------
# one grid square


def _meet_stage(A: SequenceK, i: Morphism, j: Morphism, F: StageArrow, G: StageArrow):
    for m in range(max(F.stage, G.stage), A.depth):
        f, g = F.restage(A, m).arrow, G.restage(A, m).arrow
        if compose(f, i).map == compose(g, j).map:
            return m, f, g
    raise DepthError("F . i and G . j never meet inside the prefix", (i, j, F, G))


def amalgamated_extension_step(pair: CategoryPair, A: SequenceK, i: Morphism, j: Morphism,
                               F: StageArrow, G: StageArrow, oracle=None
                               ) -> tuple[CommutingSquare, StageArrow]:
    """Square ``k . i == l . j`` with ``H: w -> A`` such that ``H . k = F`` and ``H . l = G``.

    The pairs implemented here complete the square directly into the stage
    where ``F`` and ``G`` meet, so the oracle is never consulted.
    """
    m, f, g = _meet_stage(A, i, j, F, G)
    try:
        sq, h = pair.amalgamated_extension(i, j, f, g)
    except UnsupportedError as exc:
        raise ConstructionError(f"no amalgamated extension in {pair.name}", exc.witness) from exc
    return sq, StageArrow(m, h)


# ---------------------------------------------------------------------------
# the grid


@dataclass
class TriangularMatrix:
    rows: list = field(default_factory=list)        # rows[i][j] = w_{i,j}, j <= i+1
    horizontal: list = field(default_factory=list)  # w_{i,j} -> w_{i,j+1}
    vertical: list = field(default_factory=list)    # w_{i,j} -> w_{i+1,j}
    diagonal: list = field(default_factory=list)    # l_i
    F: list = field(default_factory=list)           # F[i][j]: w_{i,j} -> A
    squares: dict = field(default_factory=dict)     # (i+1, j) -> square at w_{i,j-1}
    U: SequenceK | None = None
    target: SequenceK | None = None

    @property
    def depth(self) -> int:
        return len(self.rows)

    def row_composite(self, i: int) -> Morphism:
        return compose_all(*reversed(self.horizontal[i]))

    def check(self) -> list[str]:
        """Exact recheck of every commutation the construction promises."""
        bad = []
        U = self.U
        for (i, j), sq in self.squares.items():
            if compose(sq.cospan_left, sq.span.left).map != compose(sq.cospan_right, sq.span.right).map:
                bad.append(f"square {(i, j)}")
        for i in range(self.depth - 1):
            tri = compose(self.horizontal[i + 1][i + 1], self.vertical[i][i + 1])
            if tri.map != U.arrow(self.diagonal[i], self.diagonal[i + 1]).map:
                bad.append(f"triangle {i}")
            if self.diagonal[i + 1] <= self.diagonal[i]:
                bad.append(f"diagonal not increasing at {i}")
        for i, row in enumerate(self.F):
            for j in range(1, len(row)):
                # F[i][j] . horizontal = F[i][j-1]
                if not row[j].after(self.horizontal[i][j - 1]).agrees(row[j - 1], self.target):
                    bad.append(f"F[{i}][{j}]")
        return bad


def build_triangular_matrix(pair: CategoryPair, X: SequenceK, builder: FraisseBuilder,
                            F: SeqMorphism, oracle, depth: int) -> TriangularMatrix:
    if depth > X.depth or depth > F.defined:
        raise DepthError(f"X is defined only up to depth {min(X.depth, F.defined)}")
    A = F.target
    M = TriangularMatrix(target=A)
    l0, e0 = builder.request_F1(X[0])
    M.diagonal.append(l0)
    M.rows.append([X[0], builder.sequence[l0]])
    M.horizontal.append([e0])
    M.F.append([F.at(0), oracle(e0, F.at(0))])
    for i in range(depth - 1):
        row, hor, Frow = [X[i + 1]], [], [F.at(i + 1)]
        vert = [X.connectors[i]]
        for j in range(1, i + 2):
            sq, H = amalgamated_extension_step(pair, A, M.horizontal[i][j - 1], vert[j - 1],
                                               M.F[i][j], Frow[j - 1], oracle)
            vert.append(sq.cospan_left)
            hor.append(sq.cospan_right)
            row.append(sq.apex)
            Frow.append(H)
            M.squares[(i + 1, j)] = sq
        li = M.diagonal[i]
        lnext, g = builder.request_F2(li, vert[i + 1], min_stage=li + 1)
        M.diagonal.append(lnext)
        hor.append(g)
        row.append(builder.sequence[lnext])
        Frow.append(oracle(g, Frow[i + 1]))
        M.vertical.append(vert)
        M.horizontal.append(hor)
        M.rows.append(row)
        M.F.append(Frow)
    M.U = builder.sequence
    return M


# ---------------------------------------------------------------------------
# retraction


@dataclass
class RetractionPair:
    J: SeqMorphism
    R: SeqMorphism
    depth: int
    verdict: EquivalenceVerdict
    matrix: TriangularMatrix

    @property
    def U(self) -> SequenceK:
        return self.matrix.U


def embedding_from_matrix(X: SequenceK, M: TriangularMatrix) -> SeqMorphism:
    comps = [M.row_composite(i) for i in range(M.depth)]
    return SeqMorphism(X, M.U, M.diagonal, comps)


def retraction_from_matrix(M: TriangularMatrix, A: SequenceK) -> SeqMorphism:
    """``R_m = F[s][s+1] . u_m^{l_s}`` with ``s`` least such that ``l_s >= m``."""
    U = M.U
    psi, comps = [], []
    prev = 0
    s = 0
    for m in range(M.diagonal[-1] + 1):
        while M.diagonal[s] < m:
            s += 1
        G = M.F[s][s + 1].after(U.arrow(m, M.diagonal[s]))
        stage = max(prev, G.stage)
        psi.append(stage)
        comps.append(G.restage(A, stage).arrow)
        prev = stage
    return SeqMorphism(U, A, psi, comps)


def _as_sequence(X, depth: int) -> SequenceK:
    if isinstance(X, SequenceK):
        return X
    return SequenceK.constant(X, depth)


def _finish(pair, X: SequenceK, builder, oracle, depth) -> RetractionPair:
    M = build_triangular_matrix(pair, X, builder, seq_identity(X), oracle, depth)
    J = embedding_from_matrix(X, M)
    R = retraction_from_matrix(M, X)
    RJ = seq_compose(R, J)
    verdict = seq_equivalent(RJ, seq_identity(X), depth)
    return RetractionPair(J, R, verdict.depth, verdict, M)


def _refuse_empty_order(pair, X: SequenceK):
    if isinstance(pair, LinOrderPair) and X[0].size == 0:
        raise PreconditionError("linear orders here are nonempty", X[0])


def build_retraction(pair: CategoryPair, X: Structure | SequenceK,
                     builder: FraisseBuilder | None = None, oracle=None, depth: int = 3,
                     battery_bound: int = 3, seed: int = 0) -> RetractionPair:
    """``J: X -> U`` (embeddings) and ``R: U -> X`` with ``R . J`` equivalent to the identity.

    Without an oracle, ``X`` must first pass the bounded injectivity battery;
    a failure is reported with its ``(j, f)`` witness.
    """
    X = _as_sequence(X, depth)
    _refuse_empty_order(pair, X)
    if oracle is None:
        target = X if X.depth > 1 and any(not c.is_identity() for c in X.connectors) else X[0]
        verdict = bounded_injective(pair, target, battery_bound)
        if not verdict:
            raise RetractionRefused("X fails the bounded injectivity battery", verdict.witness)
        oracle = SearchOracle(X)
    builder = builder or FraisseBuilder(pair, seed)
    return _finish(pair, X, builder, oracle, depth)


def check_left_invertible(pair: CategoryPair, bound: int = 3) -> Morphism | None:
    """First primitive K-arrow (carriers 1..bound) without a left inverse."""
    for k in range(1, bound):
        for a in pair.objects(k):
            for j in pair.one_point_extensions(a):
                if j.codomain.size <= bound and pair.left_inverse(j) is None:
                    return j
    return None


def left_invertible_shortcut(pair: CategoryPair, X: Structure | SequenceK,
                             builder: FraisseBuilder | None = None, depth: int = 3,
                             fragment_bound: int = 3, seed: int = 0) -> RetractionPair:
    """Retraction when every K-arrow has a left inverse: extend ``F`` along ``j`` as ``F . r``."""
    bad = check_left_invertible(pair, fragment_bound)
    if bad is not None:
        raise PreconditionError(f"{pair.name}: a K-arrow has no left inverse", bad)
    X = _as_sequence(X, depth)
    _refuse_empty_order(pair, X)
    builder = builder or FraisseBuilder(pair, seed)
    return _finish(pair, X, builder, LeftInverseOracle(pair), depth)


# ---------------------------------------------------------------------------
# columns of the grid as a chain of sequences


@dataclass
class PushoutChain:
    columns: list
    arrows: list
    certified: bool


def _column(M: TriangularMatrix, j: int) -> SequenceK:
    U = M.U
    stages, conns = [], []
    for i in range(M.depth):
        stages.append(U[M.diagonal[i]] if i <= j - 1 else M.rows[i][j])
        if i + 1 < M.depth:
            if i + 1 <= j - 1:
                conns.append(U.arrow(M.diagonal[i], M.diagonal[i + 1]))
            else:
                conns.append(M.vertical[i][j])
    return SequenceK(stages, conns)


def pushout_chain_to_limit(M: TriangularMatrix, pair: CategoryPair,
                           certify_bound: int | None = 3) -> PushoutChain:
    """Columns ``W^0 = X, W^1, ...`` with stagewise arrows given by the horizontals.

    Each square is first checked to be a pushout (by brute force at
    ``certify_bound``); the last column is the diagonal of the grid.
    """
    if not pair.has_pushouts:
        raise CertificationError(f"{pair.name} has no pushouts", pair)
    certified = False
    if certify_bound is not None:
        for key, sq in M.squares.items():
            v = verify_pushout_universal(sq, certify_bound, pair)
            if not v:
                raise CertificationError(f"square {key} is not a pushout", v.counterexample)
        certified = True
    cols = [_column(M, j) for j in range(M.depth + 1)]
    arrows = []
    for j in range(M.depth):
        comps = []
        for i in range(M.depth):
            if i <= j - 1:
                comps.append(identity(cols[j][i]))
            else:
                comps.append(M.horizontal[i][j])
        arrows.append(SeqMorphism(cols[j], cols[j + 1], range(M.depth), comps))
    return PushoutChain(cols, arrows, certified)


def chain_diagonal_agreement(chain: PushoutChain, M: TriangularMatrix, upto: int = 3
                             ) -> list[tuple[int, int, bool]]:
    """For stages ``n <= upto`` and columns ``j > n``: does stage ``n`` of
    column ``j`` match ``u_{l_n}`` in canonical form, with the chain composite
    equal to the row composite?"""
    out = []
    for n in range(min(upto + 1, M.depth)):
        target = canonical_form(M.U[M.diagonal[n]])
        J_n = M.row_composite(n).map
        for j in range(n + 1, len(chain.columns)):
            same = canonical_form(chain.columns[j][n]) == target
            comp = compose_all(*(chain.arrows[t].components[n] for t in reversed(range(j))))
            out.append((n, j, same and comp.map == J_n))
    return out
