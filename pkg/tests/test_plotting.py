from retractlab.fraisse import build_fraisse_sequence
from retractlab.plotting import plot_matrix_sizes, plot_metric_space, plot_stage_growth, plot_verdicts
from retractlab.retraction import build_retraction
from retractlab.structures import ClosedBall, LinOrder, LinOrderPair, RationalMetricSpace, UnaryPair


def test_figures_are_written(tmp_path):
    U, ledger = build_fraisse_sequence(UnaryPair(), 40)
    paths = [
        plot_stage_growth(U, ledger, tmp_path / "a.png"),
        plot_matrix_sizes(build_retraction(LinOrderPair(), LinOrder.chain(2), depth=3).matrix,
                          tmp_path / "b.png"),
        plot_verdicts([("x", True), ("y", False)], tmp_path / "c.png", "t"),
        plot_metric_space(RationalMetricSpace.on_line([0, 2]), tmp_path / "d.png",
                          [ClosedBall(0, 1), ClosedBall(1, 1)]),
        plot_metric_space(RationalMetricSpace.on_line([0]), tmp_path / "e.png"),
    ]
    for p in paths:
        assert p.read_bytes()[:4] == b"\x89PNG"
