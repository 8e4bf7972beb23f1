import itertools
from dataclasses import dataclass

import pytest

from retractlab.core import Morphism, UnsupportedError, compose, extensions
from retractlab.fraisse import ConstructionError, FraisseBuilder, back_and_forth, \
    build_fraisse_sequence, check_F1, check_F2, density_witness, extension_witness, verify_ledger
from retractlab.structures import Graph, GraphPair, LinOrderPair, MetricPair, RadiusDomain, UnaryPair


@pytest.fixture(scope="module")
def rado():
    return build_fraisse_sequence(GraphPair(), 300, seed=1)


def test_frozen_prefix_shapes():
    # recorded from the deterministic builder; any change in scheduling shows here
    U, _ = build_fraisse_sequence(GraphPair(), 200, seed=1)
    assert (U.depth, U[U.last].size) == (66, 72)
    O, _ = build_fraisse_sequence(LinOrderPair(), 100)
    assert (O.depth, O[O.last].size) == (23, 24)


def test_ledger_rechecks(rado):
    U, ledger = rado
    assert verify_ledger(U, ledger) == []
    assert ledger.f1_entries() and ledger.f2_entries()


def test_every_small_graph_embeds(rado):
    U, _ = rado
    for x in GraphPair().objects_upto(4):
        hit = check_F1(U, x)
        assert hit is not None
        n, e = hit
        # recheck by hand: injective and adjacency both ways
        assert len(set(e.map)) == x.size
        for a, b in itertools.combinations(range(x.size), 2):
            assert x.adjacent(a, b) == U[n].adjacent(e.map[a], e.map[b])


def test_one_point_tasks_over_early_stages(rado):
    U, _ = rado
    pair = GraphPair()
    for n in range(3):
        for f in pair.one_point_extensions(U[n]):
            hit = check_F2(U, n, f)
            assert hit is not None
            m, g = hit
            assert compose(g, f).map == U.arrow(n, m).map


def test_extension_property_over_u0(rado):
    U, _ = rado
    for A in ([], [0], [1], [0, 1]):
        for B in ([], [0], [1], [0, 1]):
            if not set(A) & set(B):
                assert extension_witness(U, A, B) is not None


def test_determinism_and_seed_dependence():
    a, _ = build_fraisse_sequence(GraphPair(), 120, seed=4)
    b, _ = build_fraisse_sequence(GraphPair(), 120, seed=4)
    c, _ = build_fraisse_sequence(GraphPair(), 120, seed=5)
    assert a == b and a != c
    assert back_and_forth(a, c, 3).rounds == 6


def test_dense_order():
    O, ledger = build_fraisse_sequence(LinOrderPair(), 200)
    assert verify_ledger(O, ledger) == []
    assert density_witness(O, 0, 1) is not None


def test_metric_and_unary_prefixes():
    for pair in (MetricPair(RadiusDomain((1,)), 3), UnaryPair()):
        U, ledger = build_fraisse_sequence(pair, 80)
        assert verify_ledger(U, ledger) == []


def test_request_F2_respects_min_stage():
    b = FraisseBuilder(GraphPair(), 0).run(30)
    f = next(iter(GraphPair().one_point_extensions(b.sequence[1])))
    m, g = b.request_F2(1, f, min_stage=b.sequence.last + 2)
    assert m >= b.sequence.last - 0 and compose(g, f).map == b.sequence.arrow(1, m).map


@dataclass(frozen=True)
class _NoAmalgam(GraphPair):
    def amalgamate(self, i, j):
        raise UnsupportedError("no amalgam here", (i, j))


def test_amalgamation_failure_is_reported():
    with pytest.raises(ConstructionError) as err:
        FraisseBuilder(_NoAmalgam(), 0).run(50)
    assert err.value.witness is not None
