"""JSON and DOT serialization.

Rationals are written as ``"p/q"`` strings (``"2"`` for integers) so that
values survive a round trip exactly.
"""
from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from pathlib import Path

from .core import CommutingSquare, Morphism, Span, Structure
from .fraisse import LedgerEntry, TaskLedger
from .retraction import RetractionPair, TriangularMatrix
from .sequences import SeqMorphism, SequenceK, StageArrow
from .structures import Graph, LinOrder, RationalMetricSpace, UnaryModel


class ParseError(ValueError):
    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


# ---------------------------------------------------------------------------
# structures


def rat(v: Fraction) -> str:
    return str(Fraction(v))


def structure_to_json(x: Structure) -> dict:
    if isinstance(x, Graph):
        return {"kind": "graph", "size": x.size, "edges": [list(e) for e in sorted(x.edges)]}
    if isinstance(x, LinOrder):
        return {"kind": "linorder", "size": x.size, "order": list(x.ranks)}
    if isinstance(x, RationalMetricSpace):
        return {"kind": "metric", "size": x.size,
                "dist": [[rat(v) for v in row] for row in x.dist]}
    if isinstance(x, UnaryModel):
        return {"kind": "unary", "size": x.size, "P": list(x.P)}
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _need(obj, key, loc):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", loc)
    if key not in obj:
        raise ParseError(f"missing key {key!r}", loc)
    return obj[key]


def _fraction(s, loc) -> Fraction:
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a rational: {s!r}", loc) from None


def structure_from_json(obj, loc: str = "$") -> Structure:
    kind = _need(obj, "kind", loc)
    size = _need(obj, "size", loc)
    if not isinstance(size, int) or size < 0:
        raise ParseError("size must be a nonnegative integer", f"{loc}.size")
    try:
        if kind == "graph":
            edges = _need(obj, "edges", loc)
            return Graph(size, frozenset(tuple(sorted(e)) for e in edges))
        if kind == "linorder":
            return LinOrder(size, tuple(_need(obj, "order", loc)))
        if kind == "metric":
            rows = _need(obj, "dist", loc)
            dist = tuple(tuple(_fraction(v, f"{loc}.dist[{i}][{j}]") for j, v in enumerate(row))
                         for i, row in enumerate(rows))
            return RationalMetricSpace(size, dist)
        if kind == "unary":
            return UnaryModel(size, tuple(_need(obj, "P", loc)))
    except ParseError:
        raise
    except (ValueError, TypeError) as exc:
        raise ParseError(str(exc), loc) from None
    raise ParseError(f"unknown kind {kind!r}", f"{loc}.kind")


# ---------------------------------------------------------------------------
# arrows and sequences


def morphism_to_json(f: Morphism) -> dict:
    return {"domain": structure_to_json(f.domain), "codomain": structure_to_json(f.codomain),
            "map": list(f.map), "kind": f.kind}


def morphism_from_json(obj, loc: str = "$") -> Morphism:
    dom = structure_from_json(_need(obj, "domain", loc), f"{loc}.domain")
    cod = structure_from_json(_need(obj, "codomain", loc), f"{loc}.codomain")
    try:
        return Morphism(dom, cod, tuple(_need(obj, "map", loc)), obj.get("kind", "L"))
    except ValueError as exc:
        raise ParseError(str(exc), f"{loc}.map") from None


def sequence_to_json(X: SequenceK) -> dict:
    return {"stages": [structure_to_json(s) for s in X.stages],
            "connectors": [list(c.map) for c in X.connectors],
            "allow_L": X.allow_L}


def sequence_from_json(obj, loc: str = "$") -> SequenceK:
    stages = [structure_from_json(s, f"{loc}.stages[{i}]")
              for i, s in enumerate(_need(obj, "stages", loc))]
    maps = _need(obj, "connectors", loc)
    if len(maps) != max(len(stages) - 1, 0):
        raise ParseError("need one connector per consecutive pair of stages", f"{loc}.connectors")
    allow_L = bool(obj.get("allow_L", False))
    conns = []
    for i, m in enumerate(maps):
        try:
            conns.append(Morphism(stages[i], stages[i + 1], tuple(m), "L" if allow_L else "K"))
        except ValueError as exc:
            raise ParseError(str(exc), f"{loc}.connectors[{i}]") from None
    return SequenceK(tuple(stages), tuple(conns), allow_L)


def seqmorphism_to_json(t: SeqMorphism) -> dict:
    return {"psi": list(t.psi), "components": [list(c.map) for c in t.components],
            "kinds": [c.kind for c in t.components]}


def seqmorphism_from_json(obj, source: SequenceK, target: SequenceK, loc: str = "$") -> SeqMorphism:
    psi = _need(obj, "psi", loc)
    comps = []
    for n, (p, m, k) in enumerate(zip(psi, _need(obj, "components", loc), _need(obj, "kinds", loc))):
        comps.append(Morphism(source[n], target[p], tuple(m), k))
    return SeqMorphism(source, target, tuple(psi), tuple(comps))


# ---------------------------------------------------------------------------
# ledger


def ledger_to_json(ledger: TaskLedger) -> dict:
    entries = []
    for e in ledger.entries:
        task = structure_to_json(e.task) if isinstance(e.task, Structure) else morphism_to_json(e.task)
        entries.append({"kind": e.kind, "step": e.step, "stage": e.stage, "task": task,
                        "completed": e.completed, "witness": morphism_to_json(e.witness)})
    return {"entries": entries, "served": {str(k): v for k, v in ledger.served.items()}}


def ledger_from_json(obj, loc: str = "$") -> TaskLedger:
    entries = []
    for i, e in enumerate(_need(obj, "entries", loc)):
        here = f"{loc}.entries[{i}]"
        t = _need(e, "task", here)
        task = morphism_from_json(t, f"{here}.task") if "map" in t else structure_from_json(t, f"{here}.task")
        entries.append(LedgerEntry(e["kind"], e["step"], e["stage"], task, e["completed"],
                                   morphism_from_json(_need(e, "witness", here), f"{here}.witness")))
    served = {int(k): v for k, v in obj.get("served", {}).items()}
    return TaskLedger(entries, served)


# ---------------------------------------------------------------------------
# grids and retractions


def matrix_to_json(M: TriangularMatrix) -> dict:
    return {
        "rows": [[structure_to_json(w) for w in row] for row in M.rows],
        "horizontal": [[list(h.map) for h in row] for row in M.horizontal],
        "vertical": [[list(v.map) for v in row] for row in M.vertical],
        "diagonal": list(M.diagonal),
        "F": [[[G.stage, list(G.arrow.map), G.arrow.kind] for G in row] for row in M.F],
        "U": sequence_to_json(M.U),
        "target": sequence_to_json(M.target),
    }


def matrix_from_json(obj, loc: str = "$") -> TriangularMatrix:
    rows = [[structure_from_json(w, f"{loc}.rows[{i}][{j}]") for j, w in enumerate(r)]
            for i, r in enumerate(_need(obj, "rows", loc))]
    U = sequence_from_json(_need(obj, "U", loc), f"{loc}.U")
    A = sequence_from_json(_need(obj, "target", loc), f"{loc}.target")
    hor = [[Morphism(rows[i][j], rows[i][j + 1], tuple(m), "K") for j, m in enumerate(r)]
           for i, r in enumerate(obj["horizontal"])]
    vert = [[Morphism(rows[i][j], rows[i + 1][j], tuple(m), "K") for j, m in enumerate(r)]
            for i, r in enumerate(obj["vertical"])]
    F = [[StageArrow(s, Morphism(rows[i][j], A[s], tuple(m), k)) for j, (s, m, k) in enumerate(r)]
         for i, r in enumerate(obj["F"])]
    squares = {}
    for i in range(len(vert)):
        for j in range(1, i + 2):
            span = Span(rows[i][j - 1], hor[i][j - 1], vert[i][j - 1])
            squares[(i + 1, j)] = CommutingSquare(span, vert[i][j], hor[i + 1][j - 1])
    return TriangularMatrix(rows, hor, vert, list(obj["diagonal"]), F, squares, U, A)


def retraction_to_json(rp: RetractionPair) -> dict:
    return {"J": seqmorphism_to_json(rp.J), "R": seqmorphism_to_json(rp.R),
            "depth": rp.depth, "holds": rp.verdict.holds,
            "X": sequence_to_json(rp.J.source), "U": sequence_to_json(rp.U)}


# ---------------------------------------------------------------------------
# files and DOT


def dump(obj: dict, path: str | Path):
    Path(path).write_text(json.dumps(obj, indent=1))


def load_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} col {exc.colno}") from None


def load_structure_or_sequence(path: str | Path) -> Structure | SequenceK:
    obj = load_json(path)
    if isinstance(obj, dict) and "stages" in obj:
        return sequence_from_json(obj)
    return structure_from_json(obj)


def matrix_to_dot(M: TriangularMatrix) -> str:
    lines = ["digraph grid {", "  node [shape=box];"]
    for i, row in enumerate(M.rows):
        names = []
        for j, w in enumerate(row):
            label = f"x{i}" if j == 0 else (f"u{M.diagonal[i]}" if j == i + 1 else f"w{i},{j}")
            lines.append(f'  "w{i}_{j}" [label="{label} ({w.size})"];')
            names.append(f'"w{i}_{j}"')
        lines.append("  { rank=same; " + " ".join(names) + " }")
        for j in range(len(M.horizontal[i])):
            lines.append(f'  "w{i}_{j}" -> "w{i}_{j + 1}";')
    for i, vrow in enumerate(M.vertical):
        for j in range(len(vrow)):
            lines.append(f'  "w{i}_{j}" -> "w{i + 1}_{j}" [style=dashed];')
    lines.append("}")
    return "\n".join(lines)


def jsonable(x):
    """Best-effort JSON form for witnesses and verdict payloads."""
    if isinstance(x, Structure):
        return structure_to_json(x)
    if isinstance(x, Morphism):
        return morphism_to_json(x)
    if isinstance(x, SequenceK):
        return sequence_to_json(x)
    if isinstance(x, Fraction):
        return rat(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, float, str)):
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in x]
    if dataclasses.is_dataclass(x):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    return repr(x)
