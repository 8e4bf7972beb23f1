"""Command-line entry point.

Exit codes: 0 success, 2 a verdict came out false (witness printed),
3 bad input or failed precondition, 4 depth exhausted.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import io
from .core import CertificationError, Morphism, Structure, decompose_into_primitives, \
    mixed_pushout, verify_pushout_universal
from .fraisse import ConstructionError, FraisseBuilder, verify_ledger
from .injectivity import check_mixed_amalgamation, compute_injective_subcategory, \
    is_algebraically_closed, is_finitely_hyperconvex, is_hom_homogeneous
from .retraction import DepthError, RetractionRefused, build_retraction, \
    chain_diagonal_agreement, left_invertible_shortcut, pushout_chain_to_limit
from .sequences import SequenceK, seq_compose, seq_equivalent, seq_identity
from .structures import PreconditionError, RadiusDomain, RationalMetricSpace, default_pair, \
    pair_for_kind

OK, FALSE, BAD_INPUT, DEPTH = 0, 2, 3, 4
KINDS = ("graph", "linorder", "metric", "unary")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    kind: str = "graph"
    steps: int = 100
    depth: int = 3
    size_bound: int = 3
    arity: int = 2
    seed: int = 0
    gens: tuple = ()
    cap: Fraction | None = None
    dense: bool = False
    value_bound: Fraction | None = None
    forbid: int | None = None
    strict: bool = True
    out: Path | None = None
    report_dir: Path | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown kind {self.kind!r}")
        for name in ("steps", "depth", "size_bound", "arity"):
            if getattr(self, name) <= 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        try:
            self.gens = tuple(Fraction(g) for g in self.gens)
            self.cap = None if self.cap is None else Fraction(self.cap)
            self.value_bound = None if self.value_bound is None else Fraction(self.value_bound)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(str(exc)) from None
        if any(g <= 0 for g in self.gens):
            raise UsageError("generators must be positive rationals")
        if self.cap is not None and self.cap <= 0:
            raise UsageError("--cap must be positive")
        if self.forbid is not None and self.forbid < 2:
            raise UsageError("--forbid needs a clique size of at least 2")

    @property
    def domain_given(self) -> bool:
        return bool(self.gens) or self.dense or self.cap is not None

    def domain(self) -> RadiusDomain:
        if self.dense:
            return RadiusDomain((), self.cap, dense=True)
        return RadiusDomain(self.gens or (1,), self.cap)

    def pair(self, x: Structure | None = None):
        if self.kind == "metric":
            if x is not None and not self.domain_given:
                return default_pair(x)
            dom = self.domain()
            vb = self.value_bound or Fraction(3)
            grid = None
            if dom.dense:
                grid = vb / 6 if x is None else default_pair(x).grid
            return pair_for_kind("metric", domain=dom, value_bound=vb, grid=grid)
        if self.kind == "graph":
            return pair_for_kind("graph", forbidden_clique=self.forbid)
        if self.kind == "unary":
            return pair_for_kind("unary", max_chain=self.size_bound)
        return pair_for_kind(self.kind)


def _config(args) -> RunConfig:
    return RunConfig(
        kind=args.kind, steps=args.steps, depth=args.depth, size_bound=args.size_bound,
        arity=args.arity, seed=args.seed, gens=tuple(args.gen or ()), cap=args.cap,
        dense=args.dense, value_bound=args.value_bound, forbid=args.forbid,
        strict=args.strict, out=args.out and Path(args.out),
        report_dir=args.report_dir and Path(args.report_dir))


def _emit(report: dict, cfg: RunConfig):
    text = json.dumps(io.jsonable(report), indent=1)
    print(text)
    if cfg.out is not None:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(text)


def _tsv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _kind_of(x) -> str:
    s = x[0] if isinstance(x, SequenceK) else x
    return io.structure_to_json(s)["kind"]


# ---------------------------------------------------------------------------
# subcommands


def cmd_build_limit(cfg: RunConfig) -> int:
    pair = cfg.pair()
    b = FraisseBuilder(pair, cfg.seed)
    try:
        b.run(cfg.steps)
    except ConstructionError as exc:
        _emit({"error": str(exc), "witness": exc.witness}, cfg)
        return FALSE
    U, ledger = b.sequence, b.ledger
    bad = verify_ledger(U, ledger)
    f1 = ledger.f1_entries()
    f2 = ledger.f2_entries()
    summary = {"pair": pair.name, "steps": cfg.steps, "seed": cfg.seed, "depth": U.depth,
               "last_size": U[U.last].size, "F1_tasks": len(f1), "F2_tasks": len(f2),
               "bad_entries": len(bad)}
    out = cfg.out or Path(f"{cfg.kind}_limit.json")
    io.dump(io.sequence_to_json(U), out)
    lpath = out.with_name(out.stem + "_ledger.json")
    io.dump(io.ledger_to_json(ledger), lpath)
    summary["sequence_file"] = str(out)
    summary["ledger_file"] = str(lpath)
    print(json.dumps(summary, indent=1))
    if cfg.report_dir is not None:
        from .plotting import plot_stage_growth
        _tsv(cfg.report_dir / "stages.tsv", ["stage", "size"],
             [(n, s.size) for n, s in enumerate(U.stages)])
        _tsv(cfg.report_dir / "ledger.tsv", ["kind", "step", "stage", "completed"],
             [(e.kind, e.step, e.stage, e.completed) for e in ledger.entries])
        plot_stage_growth(U, ledger, cfg.report_dir / "stage_growth.png")
    return FALSE if bad else OK


def _check_one(what: str, cfg: RunConfig, X) -> dict:
    if what == "1phep":
        pair = cfg.pair()
        v = check_mixed_amalgamation(pair, cfg.size_bound)
        return {"predicate": what, "pair": pair.name, "holds": v.holds,
                "witness": v.witness, "bounds": {"size": cfg.size_bound}, "checked": v.checked}
    if what == "hyperconvex":
        if not isinstance(X, RationalMetricSpace):
            raise PreconditionError("hyperconvexity needs a metric space")
        S = cfg.domain() if cfg.domain_given else default_pair(X).domain
        v = is_finitely_hyperconvex(X, S)
        return {"predicate": what, "holds": v.holds, "witness": v.balls,
                "bounds": {"systems": v.systems}}
    pair = cfg.pair(X if isinstance(X, Structure) else X[0])
    # finite checks read a prefix through its last stage
    last = X[X.last] if isinstance(X, SequenceK) else X
    if what == "ac":
        v = is_algebraically_closed(last, cfg.arity, 1, pair, cfg.strict)
        return {"predicate": what, "holds": v.holds, "witness": v.witness,
                "bounds": v.bounds, "necessary_only": v.necessary_only}
    if what == "homhom":
        v = is_hom_homogeneous(last, cfg.size_bound if cfg.extra.get("bounded") else None)
        return {"predicate": what, "holds": v.holds, "witness": v.witness}
    if what == "injective-sub":
        S = compute_injective_subcategory(X, cfg.size_bound, pair)
        return {"predicate": what, "holds": S.closed, "arrows": len(S.arrows),
                "witness": S.failures, "bounds": {"size": cfg.size_bound}}
    raise UsageError(f"unknown predicate {what!r}")


def cmd_check(what: str, cfg: RunConfig, path: str | None) -> int:
    X = None
    if what != "1phep":
        if path is None:
            raise UsageError(f"check {what} needs an input file")
        X = io.load_structure_or_sequence(path)
        cfg.kind = _kind_of(X)
    report = _check_one(what, cfg, X)
    _emit(report, cfg)
    if cfg.report_dir is not None:
        from .plotting import plot_metric_space, plot_verdicts
        _tsv(cfg.report_dir / "check.tsv", ["predicate", "holds"], [(what, report["holds"])])
        plot_verdicts([(what, report["holds"])], cfg.report_dir / "check.png")
        if isinstance(X, RationalMetricSpace):
            balls = report["witness"] if what == "hyperconvex" and report["witness"] else ()
            plot_metric_space(X, cfg.report_dir / "space.png", balls)
    return OK if report["holds"] else FALSE


def cmd_retract(cfg: RunConfig, path: str, shortcut: bool) -> int:
    X = io.load_structure_or_sequence(path)
    x0 = X[0] if isinstance(X, SequenceK) else X
    cfg.kind = _kind_of(X)
    pair = cfg.pair(x0)
    if shortcut:
        rp = left_invertible_shortcut(pair, X, depth=cfg.depth, seed=cfg.seed)
    else:
        rp = build_retraction(pair, X, depth=cfg.depth, battery_bound=cfg.size_bound,
                              seed=cfg.seed)
    Xs = rp.J.source
    RJ = seq_compose(rp.R, rp.J)
    eq = seq_equivalent(RJ, seq_identity(Xs), rp.depth)
    transcript = [{"stage": n, "J": list(rp.J.components[n].map),
                   "R_of_J": list(RJ.components[n].map), "psi": RJ.psi[n]}
                  for n in range(Xs.depth)]
    problems = rp.matrix.check()
    report = {"pair": pair.name, "depth": rp.depth, "holds": bool(eq.holds) and not problems,
              "equivalence": {"holds": eq.holds, "depth": eq.depth,
                              "failing_stage": eq.failing_stage},
              "matrix_problems": problems, "diagonal": rp.matrix.diagonal,
              "transcript": transcript}
    chain_rows = []
    if pair.has_pushouts:
        try:
            chain = pushout_chain_to_limit(rp.matrix, pair)
            chain_rows = chain_diagonal_agreement(chain, rp.matrix)
            report["chain"] = {"certified": chain.certified,
                               "agreement": [list(r) for r in chain_rows]}
        except CertificationError as exc:
            report["chain"] = {"certified": False, "error": str(exc)}
    out = cfg.out or Path("retraction.json")
    io.dump({"retraction": io.retraction_to_json(rp), "matrix": io.matrix_to_json(rp.matrix),
             "transcript": report}, out)
    out.with_suffix(".dot").write_text(io.matrix_to_dot(rp.matrix))
    print(json.dumps(io.jsonable(report), indent=1))
    if cfg.report_dir is not None:
        from .plotting import plot_matrix_sizes, plot_verdicts
        _tsv(cfg.report_dir / "transcript.tsv", ["stage", "J", "R_of_J", "psi"],
             [(t["stage"], t["J"], t["R_of_J"], t["psi"]) for t in transcript])
        plot_matrix_sizes(rp.matrix, cfg.report_dir / "matrix.png")
        rows = [("R.J ~ id", eq.holds), ("grid commutes", not problems)]
        rows += [(f"chain n={n} j={j}", ok) for n, j, ok in chain_rows]
        plot_verdicts(rows, cfg.report_dir / "verdicts.png")
    return OK if report["holds"] else FALSE


def cmd_verify_pushout(cfg: RunConfig, path: str) -> int:
    obj = io.load_json(path)
    f = io.morphism_from_json(io._need(obj, "left", "$"), "$.left")
    g = io.morphism_from_json(io._need(obj, "right", "$"), "$.right")
    pair = cfg.pair(f.domain) if cfg.kind == _kind_of(f.domain) else default_pair(f.domain)
    sq = mixed_pushout(pair, f, g)
    v = verify_pushout_universal(sq, cfg.size_bound, pair)
    _emit({"holds": v.holds, "apex": sq.apex, "k": list(sq.cospan_left.map),
           "l": list(sq.cospan_right.map), "checked_cocones": v.checked_cocones,
           "witness": v.counterexample, "bounds": {"size": cfg.size_bound}}, cfg)
    return OK if v.holds else FALSE


def cmd_decompose(cfg: RunConfig, path: str) -> int:
    f = io.morphism_from_json(io.load_json(path))
    steps = decompose_into_primitives(default_pair(f.codomain), f)
    _emit({"steps": [{"domain_size": s.domain.size, "codomain_size": s.codomain.size,
                      "map": list(s.map)} for s in steps]}, cfg)
    return OK


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser):
    p.add_argument("--kind", choices=KINDS, default="graph")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--size-bound", type=int, default=3)
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gen", action="append", help="radius generator (repeatable), e.g. 1 or 1/2")
    p.add_argument("--cap", help="largest admissible radius")
    p.add_argument("--dense", action="store_true", help="all positive rationals")
    p.add_argument("--value-bound", help="largest distance used when enumerating metric spaces")
    p.add_argument("--forbid", type=int, help="only K_n-free graphs")
    p.add_argument("--strict", action=argparse.BooleanOptionalAction, default=True,
                   help="strict distance facts in atomic diagrams")
    p.add_argument("--out", help="output JSON path")
    p.add_argument("--report-dir", help="write TSV tables and PNG figures here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="retractlab",
                                 description="Retracts of Fraisse limits, on finite structures.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("build-limit", help="build a finite prefix of a Fraisse sequence")
    _common(p)
    p = sub.add_parser("check", help="decide an injectivity-type predicate")
    p.add_argument("predicate", choices=("hyperconvex", "ac", "1phep", "homhom", "injective-sub"))
    p.add_argument("input", nargs="?")
    _common(p)
    p = sub.add_parser("retract", help="build J and R for a structure or sequence")
    p.add_argument("input")
    p.add_argument("--shortcut", action="store_true",
                   help="use left inverses instead of the injectivity search")
    _common(p)
    p = sub.add_parser("verify-pushout", help="build and check a mixed pushout")
    p.add_argument("input")
    _common(p)
    p = sub.add_parser("decompose", help="factor an embedding into one-point steps")
    p.add_argument("input")
    _common(p)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _config(args)
        if args.cmd == "build-limit":
            return cmd_build_limit(cfg)
        if args.cmd == "check":
            return cmd_check(args.predicate, cfg, args.input)
        if args.cmd == "retract":
            return cmd_retract(cfg, args.input, args.shortcut)
        if args.cmd == "verify-pushout":
            return cmd_verify_pushout(cfg, args.input)
        return cmd_decompose(cfg, args.input)
    except UsageError as exc:
        ap.error(str(exc))
    except RetractionRefused as exc:
        print(json.dumps({"error": str(exc), "witness": io.jsonable(exc.witness)}, indent=1))
        return FALSE
    except DepthError as exc:
        print(json.dumps({"error": str(exc), "witness": io.jsonable(exc.witness)}, indent=1))
        return DEPTH
    except (io.ParseError, PreconditionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except ValueError as exc:
        # structural invariants of parsed input
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
