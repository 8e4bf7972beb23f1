import json

import pytest

from retractlab import io
from retractlab.cli import RunConfig, UsageError, main
from retractlab.core import Morphism
from retractlab.structures import Graph, LinOrder, RationalMetricSpace


@pytest.fixture
def files(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = {}
    for name, x in {"k2": Graph.complete(2), "k3": Graph.complete(3),
                    "two_point": RationalMetricSpace.on_line([0, 2]),
                    "path": RationalMetricSpace.on_line([0, 1, 2]),
                    "lo3": LinOrder.chain(3)}.items():
        p = tmp_path / f"{name}.json"
        io.dump(io.structure_to_json(x), p)
        out[name] = str(p)
    D, P = Graph(2), Graph(3, frozenset({(0, 2), (1, 2)}))
    span = {"left": io.morphism_to_json(Morphism(D, P, (0, 1), "K")),
            "right": io.morphism_to_json(Morphism(D, Graph.complete(2), (0, 1)))}
    io.dump(span, tmp_path / "span.json")
    out["span"] = str(tmp_path / "span.json")
    G = Graph(4, frozenset({(0, 1), (2, 3)}))
    io.dump(io.morphism_to_json(Morphism(Graph.complete(2), G, (0, 1), "K")), tmp_path / "emb.json")
    out["emb"] = str(tmp_path / "emb.json")
    return out


def last_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_build_limit_writes_files_and_report(tmp_path, capsys, files):
    code = main(["build-limit", "--kind", "graph", "--steps", "200", "--seed", "1",
                 "--out", "rado.json", "--report-dir", "rep"])
    assert code == 0
    summary = last_json(capsys)
    assert summary["bad_entries"] == 0 and summary["depth"] == 66
    assert (tmp_path / "rado.json").exists() and (tmp_path / "rado_ledger.json").exists()
    for f in ("stages.tsv", "ledger.tsv", "stage_growth.png"):
        assert (tmp_path / "rep" / f).stat().st_size > 0
    assert (tmp_path / "rep" / "stages.tsv").read_text().startswith("stage\tsize\n")


@pytest.mark.parametrize("args", [["--kind", "linorder", "--steps", "100"],
                                  ["--kind", "metric", "--gen", "1", "--steps", "150"]])
def test_build_limit_other_kinds(args, capsys, files):
    assert main(["build-limit", *args, "--out", "u.json"]) == 0
    assert last_json(capsys)["bad_entries"] == 0


def test_check_examples(files, capsys, tmp_path):
    assert main(["check", "hyperconvex", files["two_point"], "--gen", "1",
                 "--report-dir", "hc"]) == 2
    rep = last_json(capsys)
    assert rep["holds"] is False
    assert sorted((b["center"], b["radius"]) for b in rep["witness"]) == [(0, "1"), (1, "1")]
    assert (tmp_path / "hc" / "space.png").exists()
    assert main(["check", "homhom", files["k2"]]) == 0
    assert last_json(capsys)["holds"] is True
    assert main(["check", "ac", files["k3"], "--arity", "3"]) == 2
    assert last_json(capsys)["witness"]["params"] == [0, 1, 2]
    assert main(["check", "1phep", "--kind", "graph", "--forbid", "3"]) == 2
    capsys.readouterr()
    assert main(["check", "injective-sub", files["k2"]]) == 0
    assert last_json(capsys)["arrows"] == 24


def test_retract_examples(files, capsys, tmp_path):
    assert main(["retract", files["lo3"], "--depth", "3", "--out", "r.json",
                 "--report-dir", "rr"]) == 0
    assert last_json(capsys)["equivalence"]["holds"] is True
    assert (tmp_path / "r.json").exists() and (tmp_path / "r.dot").exists()
    assert (tmp_path / "rr" / "matrix.png").exists()
    assert main(["retract", files["path"], "--out", "p.json"]) == 0
    rep = last_json(capsys)
    assert rep["chain"]["certified"] and all(r[2] for r in rep["chain"]["agreement"])
    assert main(["retract", files["k2"], "--out", "k.json"]) == 2
    j, f = last_json(capsys)["witness"]
    assert j["domain"]["edges"] == [] and j["codomain"]["edges"] == [[0, 2], [1, 2]]


def test_pushout_and_decompose(files, capsys):
    assert main(["verify-pushout", files["span"], "--size-bound", "3"]) == 0
    assert last_json(capsys)["apex"]["size"] == 3
    assert main(["decompose", files["emb"]]) == 0
    assert len(last_json(capsys)["steps"]) == 2


def test_exit_codes_for_bad_input(tmp_path, capsys, files):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "graph", "size": 2, "edges": [[0, 5]]}')
    assert main(["check", "homhom", str(bad)]) == 3
    assert main(["check", "ac", str(tmp_path / "missing.json")]) == 3
    (tmp_path / "junk.json").write_text("{")
    assert main(["retract", str(tmp_path / "junk.json")]) == 3
    assert main(["retract", files["lo3"], "--shortcut", "--kind", "graph"]) == 0
    capsys.readouterr()
    assert main(["retract", files["k3"], "--shortcut"]) == 3
    with pytest.raises(SystemExit) as err:
        main(["build-limit", "--steps", "0"])
    assert err.value.code == 2


def test_run_config_invariants():
    with pytest.raises(UsageError):
        RunConfig(gens=("-1",))
    with pytest.raises(UsageError):
        RunConfig(depth=0)
    with pytest.raises(UsageError):
        RunConfig(gens=("x",))
    cfg = RunConfig(kind="metric", gens=("1/2",), cap="2")
    assert cfg.domain().values_upto(5) == [0.5, 1, 1.5, 2]


def test_finite_checks_accept_a_prefix(tmp_path, capsys, files):
    assert main(["build-limit", "--steps", "15", "--out", "small.json"]) == 0
    capsys.readouterr()
    for pred in ("homhom", "ac"):
        code = main(["check", pred, "small.json"])
        report = last_json(capsys)
        assert report["predicate"] == pred
        assert code == (0 if report["holds"] else 2)
