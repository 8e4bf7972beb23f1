import pytest

from retractlab.core import Morphism, canonical_form, compose
from retractlab.fraisse import FraisseBuilder
from retractlab.retraction import DepthError, FraisseOracle, RetractionRefused, SearchOracle, \
    build_retraction, chain_diagonal_agreement, check_left_invertible, left_invertible_shortcut, \
    pushout_chain_to_limit
from retractlab.sequences import SequenceK, StageArrow, seq_compose, seq_equivalent, seq_identity
from retractlab.structures import Graph, GraphPair, LinOrder, LinOrderPair, PreconditionError, \
    RationalMetricSpace, default_pair


def _assert_sound(rp):
    X = rp.J.source
    assert rp.verdict.holds
    assert seq_equivalent(seq_compose(rp.R, rp.J), seq_identity(X), rp.depth).holds
    assert all(c.is_embedding() for c in rp.J.components)
    assert rp.matrix.check() == []
    d = rp.matrix.diagonal
    assert all(a < b for a, b in zip(d, d[1:]))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_linear_orders(n):
    X = LinOrder.chain(n)
    _assert_sound(build_retraction(LinOrderPair(), X, depth=4))
    _assert_sound(left_invertible_shortcut(LinOrderPair(), X, depth=4))


def test_growing_sequence_of_orders():
    stages = [LinOrder.chain(k) for k in (1, 2, 4)]
    conns = [Morphism(stages[0], stages[1], (1,), "K"), Morphism(stages[1], stages[2], (0, 3), "K")]
    X = SequenceK(stages, conns)
    _assert_sound(left_invertible_shortcut(LinOrderPair(), X, depth=3))
    _assert_sound(build_retraction(LinOrderPair(), X, depth=3))


@pytest.mark.parametrize("pts", [[0], [0, 1], [0, 1, 2]])
def test_hyperconvex_metric_paths(pts):
    X = RationalMetricSpace.on_line(pts)
    pair = default_pair(X)
    rp = build_retraction(pair, X, depth=4)
    _assert_sound(rp)
    chain = pushout_chain_to_limit(rp.matrix, pair, certify_bound=3)
    assert chain.certified
    rows = chain_diagonal_agreement(chain, rp.matrix, upto=3)
    assert rows and all(ok for _, _, ok in rows)
    # the last column is the diagonal itself
    last = chain.columns[-1]
    for n in range(rp.depth):
        assert canonical_form(last[n]) == canonical_form(rp.U[rp.matrix.diagonal[n]])


def test_K2_is_refused_with_D_to_G():
    with pytest.raises(RetractionRefused) as err:
        build_retraction(GraphPair(), Graph.complete(2), depth=3)
    j, f = err.value.witness
    assert j.domain == Graph(2) and sorted(j.codomain.edges) == [(0, 2), (1, 2)]
    assert f.codomain == Graph.complete(2)


def test_non_hyperconvex_space_is_refused():
    with pytest.raises(RetractionRefused):
        build_retraction(default_pair(RationalMetricSpace.on_line([0, 2])),
                         RationalMetricSpace.on_line([0, 2]), depth=3)


def test_forcing_an_oracle_runs_out_of_depth():
    K2 = Graph.complete(2)
    X = SequenceK.constant(K2, 3)
    # early stages of a fresh prefix are bipartite, so the search succeeds
    assert build_retraction(GraphPair(), X, oracle=SearchOracle(X), depth=3).verdict.holds
    # starting from a triangle there is no homomorphism back to K2
    b = FraisseBuilder(GraphPair(), start=Graph.complete(3))
    with pytest.raises(DepthError):
        build_retraction(GraphPair(), X, builder=b, oracle=SearchOracle(X), depth=3)


def test_prefix_shorter_than_depth():
    with pytest.raises(DepthError):
        build_retraction(LinOrderPair(), SequenceK.constant(LinOrder.chain(2), 2), depth=3)


def test_graph_shortcut_precondition():
    bad = check_left_invertible(GraphPair(), 3)
    assert bad is not None and bad.domain.size == 1
    with pytest.raises(PreconditionError):
        left_invertible_shortcut(GraphPair(), Graph.complete(3))
    assert check_left_invertible(LinOrderPair(), 4) is None


def test_empty_order_is_refused():
    with pytest.raises(PreconditionError):
        build_retraction(LinOrderPair(), LinOrder(0), depth=2)


def test_fraisse_oracle_extends():
    b = FraisseBuilder(GraphPair(), 0).run(40)
    a = Graph.complete(2)
    m, e = b.request_F1(a)
    j = Morphism(a, Graph(3, frozenset({(0, 1), (0, 2)})), (0, 1), "K")
    G = FraisseOracle(b)(j, StageArrow(m, e))
    assert G.after(j).agrees(StageArrow(m, e), b.sequence)


def test_pushout_chain_needs_pushouts():
    rp = build_retraction(LinOrderPair(), LinOrder.chain(2), depth=3)
    from retractlab.core import CertificationError
    with pytest.raises(CertificationError):
        pushout_chain_to_limit(rp.matrix, LinOrderPair())
