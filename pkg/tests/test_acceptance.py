"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (repeated in the pytest summary).
"""
import itertools
from fractions import Fraction

import pytest

from retractlab.core import CommutingSquare, Morphism, Span, extensions, is_embedding, is_hom, \
    mixed_pushout, spans_upto_iso, verify_pushout_universal
from retractlab.fraisse import back_and_forth, build_fraisse_sequence, density_witness, \
    extension_witness, verify_ledger
from retractlab.injectivity import ConsistencyError, bounded_injective, check_mixed_amalgamation, \
    henson_witness, hyperconvex_equals_injective, is_algebraically_closed, \
    is_finitely_hyperconvex, is_hom_homogeneous
from retractlab.retraction import RetractionRefused, build_retraction, chain_diagonal_agreement, \
    left_invertible_shortcut, pushout_chain_to_limit
from retractlab.sequences import seq_compose, seq_equivalent, seq_identity
from retractlab.structures import Graph, GraphPair, LinOrder, LinOrderPair, MetricPair, \
    RadiusDomain, RationalMetricSpace, UnaryPair, default_pair, metric_pushout_extend

INT = RadiusDomain((1,))


def _metric_retractions():
    pair = MetricPair(INT, 4)
    spaces = [X for k in range(1, 4) for X in pair.objects(k) if is_finitely_hyperconvex(X, INT)]
    runs = []
    for X in spaces:
        p = default_pair(X)
        runs.append((X, p, build_retraction(p, X, depth=4)))
    return runs


@pytest.fixture(scope="module")
def metric_runs():
    return _metric_retractions()


def test_criterion_1_pushout_soundness(verdict):
    failures = []
    counts = {}
    for pair, lo in ((GraphPair(), 0), (MetricPair(INT, 3), 1)):
        objs = [o for k in range(lo, 4) for o in pair.objects(k)]
        targets = pair.objects_upto(4)
        n = 0
        for f, g in spans_upto_iso(objs):
            v = verify_pushout_universal(mixed_pushout(pair, f, g), 4, pair, targets)
            n += 1
            if not v:
                failures.append((f, g, v.counterexample))
        counts[pair.kind] = n
    ok = verdict(1, "mixed pushouts are universal at bound 4", not failures,
                 f"{counts['graph']} graph and {counts['metric']} metric spans up to iso")
    assert ok, failures[:3]


def test_criterion_2_metric_pushout_formula(verdict):
    src = MetricPair(RadiusDomain(dense=True), 2, Fraction(1, 2))
    cocones = MetricPair(RadiusDomain(dense=True), 2, Fraction(1, 4)).objects_upto(3)
    small = [o for k in (1, 2) for o in src.objects(k)]
    bad = []
    n = 0
    for X in small:
        for ext in src.one_point_extensions(X):
            for Y in small:
                for fm in extensions(X, Y):
                    f = Morphism(X, Y, fm)
                    Z, g, inc = metric_pushout_extend(f, ext)
                    RationalMetricSpace(Z.size, Z.dist)  # validates the metric axioms
                    sq = CommutingSquare(Span(X, ext, f), g, inc)
                    n += 1
                    if not (is_hom(g.domain, Z, g.map) and is_embedding(Y, Z, inc.map)
                            and verify_pushout_universal(sq, 3, src, cocones)):
                        bad.append((f, ext))
    ok = verdict(2, "one-point metric pushouts: metric, non-expansive, universal", not bad,
                 f"{n} spans, {len(cocones)} cocone targets")
    assert ok, bad[:3]


def _labelled_integer_spaces(n, top):
    pairs = list(itertools.combinations(range(n), 2))
    for vals in itertools.product(range(1, top + 1), repeat=len(pairs)):
        d = [[0] * n for _ in range(n)]
        for (x, y), v in zip(pairs, vals):
            d[x][y] = d[y][x] = v
        if all(d[x][z] <= d[x][y] + d[y][z] for x, y, z in itertools.permutations(range(n), 3)):
            yield RationalMetricSpace(n, tuple(map(tuple, d)))


def test_criterion_3_hyperconvex_iff_injective(verdict):
    spaces = [X for k in range(1, 5) for X in _labelled_integer_spaces(k, 4)]
    canonical = {X.encode() for k in range(1, 5) for X in MetricPair(INT, 4).objects(k)}
    disagreements = []
    hyper = 0
    for X in spaces:
        try:
            hyper += hyperconvex_equals_injective(X, INT).hyperconvex
        except ConsistencyError as exc:
            disagreements.append(exc.witness)
    ok = verdict(3, "hyperconvexity agrees with injectivity", not disagreements,
                 f"{len(spaces)} labelled spaces ({len(canonical)} up to iso), {hyper} hyperconvex")
    assert ok, disagreements[:3]


def test_criterion_4_fraisse_health(verdict):
    U, ledger = build_fraisse_sequence(GraphPair(), 500, seed=0)
    pts = range(U[0].size)
    subsets = [c for r in range(3) for c in itertools.combinations(pts, r)]
    tasks = [(A, B) for A in subsets for B in subsets
             if not set(A) & set(B) and len(set(A) | set(B)) <= 2]
    graph_ok = all(extension_witness(U, A, B) is not None for A, B in tasks)
    O, lo_ledger = build_fraisse_sequence(LinOrderPair(), 300, seed=0)
    dense_ok = all(density_witness(O, p, q) is not None
                   for p, q in itertools.combinations(range(O[0].size), 2))
    again, _ = build_fraisse_sequence(GraphPair(), 500, seed=0)
    other, _ = build_fraisse_sequence(GraphPair(), 500, seed=1)
    det = again == U
    baf = back_and_forth(U, other, 3) is not None
    ledgers = not verify_ledger(U, ledger) and not verify_ledger(O, lo_ledger)
    ok = verdict(4, "Fraisse prefixes are healthy", graph_ok and dense_ok and det and baf and ledgers,
                 f"extension={graph_ok} density={dense_ok} deterministic={det} "
                 f"back-and-forth={baf} ledgers={ledgers}")
    assert ok


def test_criterion_5_retraction_identity(verdict, metric_runs):
    failures = []
    n = 0
    for size in range(1, 5):
        for ranks in itertools.permutations(range(size)):
            X = LinOrder(size, ranks)
            for build in (build_retraction, left_invertible_shortcut):
                rp = build(LinOrderPair(), X, depth=3)
                n += 1
                if not seq_equivalent(seq_compose(rp.R, rp.J), seq_identity(rp.J.source), 3).holds:
                    failures.append(X)
    for X, _, rp in metric_runs:
        n += 1
        if not seq_equivalent(seq_compose(rp.R, rp.J), seq_identity(rp.J.source), rp.depth).holds:
            failures.append(X)
    K2 = Graph.complete(2)
    refused = False
    try:
        build_retraction(GraphPair(), K2, depth=3)
    except RetractionRefused as exc:
        j, f = exc.witness
        refused = (j.domain == Graph(2) and j.codomain.size == 3
                   and sorted(j.codomain.edges) == [(0, 2), (1, 2)]
                   and set(j.map) == {0, 1} and f.codomain == K2 and len(set(f.map)) == 2)
    ok = verdict(5, "R.J is equivalent to the identity; K2 refused with D->G", not failures and refused,
                 f"{n} runs, {len(metric_runs)} metric")
    assert ok, failures


def test_criterion_6_mixed_amalgamation(verdict):
    verdicts = {p.name: check_mixed_amalgamation(p, 3)
                for p in (GraphPair(), LinOrderPair(), UnaryPair(), GraphPair(3))}
    hw = henson_witness(3)
    kf = verdicts["K3-free graphs"]
    henson = not kf and kf.witness == (hw.j, hw.collapse)
    positive = all(v.holds for name, v in verdicts.items() if name != "K3-free graphs")
    ok = verdict(6, "mixed amalgamation verdicts", positive and henson,
                 ", ".join(f"{k}={v.holds}" for k, v in verdicts.items()))
    assert ok


def test_criterion_7_homogeneity_chain(verdict):
    pair = GraphPair()
    violations = []
    injective = 0
    for X in pair.objects_upto(4):
        if bounded_injective(pair, X, 4):
            injective += 1
            if not is_algebraically_closed(X, 3, 1, pair) or not is_hom_homogeneous(X):
                violations.append(X)
    K2 = Graph.complete(2)
    strict = bool(is_hom_homogeneous(K2)) and not bounded_injective(pair, K2, 4)
    ok = verdict(7, "injective implies closed and hom-homogeneous; K2 separates",
                 not violations and strict, f"{injective} bounded-injective graphs")
    assert ok, violations


def test_criterion_8_chain_meets_diagonal(verdict, metric_runs):
    rows = []
    for X, pair, rp in metric_runs:
        chain = pushout_chain_to_limit(rp.matrix, pair, certify_bound=3)
        rows += chain_diagonal_agreement(chain, rp.matrix, upto=3)
    stages = {n for n, _, _ in rows}
    ok = verdict(8, "pushout chain columns match the diagonal",
                 bool(rows) and all(r[2] for r in rows) and stages == {0, 1, 2, 3},
                 f"{len(rows)} (stage, column) cells over {len(metric_runs)} runs")
    assert ok, [r for r in rows if not r[2]]
