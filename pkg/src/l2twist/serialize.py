"""JSON and CSV encodings shared by the library and the CLI.

Schema summary:
  group    {"kind": "abelian", "rank": d}
           {"kind": "presented", "generators": g, "relators": [[...], ...]}
  key      integer array (abelian exponents or signed generator indices)
  element  [{"key": [...], "re": f, "im": f}, ...]
  matrix   {"rows": r, "cols": s, "entries": [[element, ...], ...]}
  character {"target": "R", "values": [f, ...]}
           {"target": "Zd", "target_rank": k, "values": [[...], ...]}
  rep      {"dim": m, "matrices": [[[[re, im], ...], ...], ...]}
  quotient {"order": n, "generators": [[...], ...], "abelian": [N1, ...]?}
  complex  {"group": g, "ranks": [...], "boundaries": [matrix, ...], "tower": [quotient, ...]?}
  poly     element with abelian keys (the variable count is the key length)

CSV output is RFC-4180 with a header row; floats are printed by repr so the
round trip is exact.
"""

from __future__ import annotations

import csv
import json
from typing import IO

from .grouprings import Character, GroupDescriptor, GroupRingElement, GroupRingMatrix
from .mahler import LaurentPoly
from .quotients import ApproxResult, FiniteQuotient, QuotientTower
from .torsion import BasedChainComplex, TorsionCurve
from .twisting import BasedRepresentation

__all__ = [
    "SchemaError",
    "group_to_json",
    "group_from_json",
    "element_to_json",
    "element_from_json",
    "matrix_to_json",
    "matrix_from_json",
    "character_to_json",
    "character_from_json",
    "rep_to_json",
    "rep_from_json",
    "quotient_to_json",
    "quotient_from_json",
    "tower_from_json",
    "complex_to_json",
    "complex_from_json",
    "poly_to_json",
    "poly_from_json",
    "write_curve_csv",
    "write_approx_csv",
    "dump_json",
]


class SchemaError(ValueError):
    """Raised when input JSON does not match the published schema."""


def _expect(cond: bool, msg: str):
    if not cond:
        raise SchemaError(msg)


def _num(x, msg: str) -> float:
    _expect(isinstance(x, (int, float)) and not isinstance(x, bool), msg)
    return float(x)


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

def group_to_json(g: GroupDescriptor) -> dict:
    if g.is_abelian:
        return {"kind": "abelian", "rank": g.rank}
    return {
        "kind": "presented",
        "generators": g.generators,
        "relators": [list(w) for w in g.relators],
    }


def group_from_json(obj) -> GroupDescriptor:
    _expect(isinstance(obj, dict), "group must be an object")
    kind = obj.get("kind")
    if kind == "abelian":
        rank = obj.get("rank")
        _expect(isinstance(rank, int) and rank >= 0, "abelian group needs an integer rank >= 0")
        return GroupDescriptor.abelian(rank)
    if kind == "presented":
        gens = obj.get("generators")
        _expect(isinstance(gens, int) and gens >= 1, "presented group needs a generator count")
        rels = obj.get("relators", [])
        _expect(isinstance(rels, list), "relators must be a list of words")
        try:
            return GroupDescriptor.presented(gens, [tuple(int(x) for x in w) for w in rels])
        except (TypeError, ValueError) as e:
            raise SchemaError(f"bad relator list: {e}") from e
    raise SchemaError(f"unknown group kind {kind!r}")


# ---------------------------------------------------------------------------
# elements and matrices
# ---------------------------------------------------------------------------

def element_to_json(x: GroupRingElement) -> list:
    return [
        {"key": list(k), "re": c.real, "im": c.imag}
        for k, c in sorted(x.terms.items())
    ]


def element_from_json(obj, group: GroupDescriptor) -> GroupRingElement:
    _expect(isinstance(obj, list), "element must be a list of terms")
    terms = {}
    for term in obj:
        _expect(isinstance(term, dict) and "key" in term, "term must be {key, re, im}")
        key = tuple(int(x) for x in term["key"])
        c = complex(_num(term.get("re", 0.0), "re must be a number"),
                    _num(term.get("im", 0.0), "im must be a number"))
        terms[key] = terms.get(key, 0) + c
    try:
        return GroupRingElement(group, terms)
    except ValueError as e:
        raise SchemaError(str(e)) from e


def matrix_to_json(A: GroupRingMatrix) -> dict:
    return {
        "rows": A.rows,
        "cols": A.cols,
        "entries": [[element_to_json(e) for e in row] for row in A.entries],
    }


def matrix_from_json(obj, group: GroupDescriptor) -> GroupRingMatrix:
    _expect(isinstance(obj, dict), "matrix must be an object")
    rows, cols = obj.get("rows"), obj.get("cols")
    _expect(isinstance(rows, int) and isinstance(cols, int) and rows >= 0 and cols >= 0,
            "matrix needs integer rows/cols")
    entries = obj.get("entries", [])
    _expect(isinstance(entries, list) and len(entries) == rows, "entries must have `rows` rows")
    if rows == 0 or cols == 0:
        return GroupRingMatrix.zero(group, rows, cols)
    grid = []
    for row in entries:
        _expect(isinstance(row, list) and len(row) == cols, "entries must have `cols` columns")
        grid.append([element_from_json(e, group) for e in row])
    return GroupRingMatrix(group, grid)


# ---------------------------------------------------------------------------
# characters and representations
# ---------------------------------------------------------------------------

def character_to_json(phi: Character) -> dict:
    if phi.target == "R":
        return {"target": "R", "values": list(phi.values)}
    return {
        "target": "Zd",
        "target_rank": phi.target_rank,
        "values": [list(v) for v in phi.values],
    }


def character_from_json(obj) -> Character:
    _expect(isinstance(obj, dict), "character must be an object")
    target = obj.get("target")
    values = obj.get("values")
    _expect(isinstance(values, list), "character needs a values list")
    if target == "R":
        return Character.real(_num(v, "character values must be numbers") for v in values)
    if target == "Zd":
        rank = obj.get("target_rank")
        _expect(isinstance(rank, int) and rank >= 1, "Zd character needs target_rank >= 1")
        try:
            return Character.to_zd([[int(x) for x in v] for v in values], rank)
        except (TypeError, ValueError) as e:
            raise SchemaError(str(e)) from e
    raise SchemaError(f"unknown character target {target!r}")


def rep_to_json(V: BasedRepresentation) -> dict:
    return {
        "dim": V.dim,
        "matrices": [
            [[[z.real, z.imag] for z in row] for row in R] for R in V.matrices
        ],
    }


def rep_from_json(obj) -> BasedRepresentation:
    _expect(isinstance(obj, dict), "representation must be an object")
    dim = obj.get("dim")
    _expect(isinstance(dim, int) and dim >= 1, "representation needs dim >= 1")
    mats = obj.get("matrices")
    _expect(isinstance(mats, list) and mats, "representation needs action matrices")
    out = []
    for R in mats:
        _expect(isinstance(R, list) and len(R) == dim, "action matrix has wrong row count")
        rows = []
        for row in R:
            _expect(isinstance(row, list) and len(row) == dim, "action matrix has wrong column count")
            rows.append([complex(_num(z[0], "re"), _num(z[1], "im")) for z in row])
        out.append(rows)
    try:
        return BasedRepresentation(dim, tuple(out))
    except ValueError as e:
        raise SchemaError(str(e)) from e


# ---------------------------------------------------------------------------
# quotients and towers
# ---------------------------------------------------------------------------

def quotient_to_json(Q: FiniteQuotient) -> dict:
    out = {"order": Q.order, "generators": [p.tolist() for p in Q.generators]}
    if Q.abelian is not None:
        out["abelian"] = list(Q.abelian)
    return out


def quotient_from_json(obj) -> FiniteQuotient:
    _expect(isinstance(obj, dict), "quotient must be an object")
    order = obj.get("order")
    _expect(isinstance(order, int) and order >= 1, "quotient needs order >= 1")
    gens = obj.get("generators")
    _expect(isinstance(gens, list), "quotient needs generator permutations")
    try:
        return FiniteQuotient(order, gens, abelian=obj.get("abelian"))
    except ValueError as e:
        raise SchemaError(str(e)) from e


def tower_from_json(obj) -> QuotientTower:
    _expect(isinstance(obj, list), "tower must be a list of quotients")
    try:
        return QuotientTower([quotient_from_json(q) for q in obj])
    except ValueError as e:
        raise SchemaError(str(e)) from e


# ---------------------------------------------------------------------------
# complexes
# ---------------------------------------------------------------------------

def complex_to_json(C: BasedChainComplex) -> dict:
    out = {
        "group": group_to_json(C.group),
        "ranks": list(C.ranks),
        "boundaries": [matrix_to_json(b) for b in C.boundaries],
    }
    if C.tower is not None:
        out["tower"] = [quotient_to_json(q) for q in C.tower]
    return out


def complex_from_json(obj) -> BasedChainComplex:
    _expect(isinstance(obj, dict), "complex must be an object")
    group = group_from_json(obj.get("group"))
    ranks = obj.get("ranks")
    _expect(isinstance(ranks, list) and all(isinstance(r, int) and r >= 0 for r in ranks),
            "complex needs a list of nonnegative integer ranks")
    bnds = obj.get("boundaries", [])
    _expect(isinstance(bnds, list), "boundaries must be a list of matrices")
    tower = tower_from_json(obj["tower"]) if "tower" in obj else None
    try:
        return BasedChainComplex(
            group, tuple(ranks), tuple(matrix_from_json(b, group) for b in bnds), tower=tower
        )
    except ValueError as e:
        raise SchemaError(str(e)) from e


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def poly_to_json(p: LaurentPoly) -> list:
    return [
        {"key": list(e), "re": c.real, "im": c.imag}
        for e, c in sorted(p.terms.items())
    ]


def poly_from_json(obj, nvars: int | None = None) -> LaurentPoly:
    _expect(isinstance(obj, list) and obj, "polynomial must be a nonempty list of terms")
    if nvars is None:
        first = obj[0]
        _expect(isinstance(first, dict) and "key" in first, "term must be {key, re, im}")
        nvars = len(first["key"])
    terms = {}
    for term in obj:
        _expect(isinstance(term, dict) and "key" in term, "term must be {key, re, im}")
        key = tuple(int(x) for x in term["key"])
        _expect(len(key) == nvars, "inconsistent key lengths in polynomial")
        c = complex(_num(term.get("re", 0.0), "re"), _num(term.get("im", 0.0), "im"))
        terms[key] = terms.get(key, 0) + c
    return LaurentPoly(nvars, terms)


# ---------------------------------------------------------------------------
# CSV and JSON writers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def write_curve_csv(curve: TorsionCurve, fh: IO[str]):
    """Columns: t, rho, status, envelope_lower, envelope_upper."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "rho", "status", "envelope_lower", "envelope_upper"])
    env = curve.envelope
    for p in curve.points:
        lo = hi = None
        if env is not None:
            hi = env.bound(p.t)
            lo = -hi
        w.writerow([_fmt(p.t), _fmt(p.rho), p.status, _fmt(lo), _fmt(hi)])


def write_approx_csv(res: ApproxResult, fh: IO[str]):
    """Columns: level, order, dim_ker, logdet."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["level", "order", "dim_ker", "logdet"])
    for level, order, dim, logdet in res.as_rows():
        w.writerow([level, order, _fmt(dim), _fmt(logdet)])


def dump_json(obj, fh: IO[str]):
    """Deterministic JSON: sorted keys, newline-terminated."""
    json.dump(obj, fh, sort_keys=True, indent=2)
    fh.write("\n")
