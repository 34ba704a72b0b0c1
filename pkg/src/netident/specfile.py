"""JSON document format for model sets and (optionally) one concrete parameter value.

Layout::

    {
      "version": "netident/1",
      "L": 3, "K": 2, "p": 0,
      "nodes": ["w1", "w2", "w3"],              # optional
      "G": [["0", {"param": {"properness": "strict"}}, ...], ...],
      "R": [[{"fixed": {"num": [1], "den": [1]}}, "0"], ...],
      "H": [[...], ...],                         # L rows of p cells
      "Lambda": {"fixed": [[1]]} | {"param": {}},
      "diagonal_feedthrough": false,             # optional
      "theta": {"G": {"2,1": {"num": [1], "den": [0, 1]}}, "Lambda": [[1]]}
    }

Coefficients are listed in ascending powers of z and may be integers,
decimals or ``"p/q"`` strings. ``theta`` keys are 1-based ``"row,col"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .model import (
    ZERO,
    Entry,
    ModelSetStructure,
    Properness,
    StructureError,
    Tag,
    ThetaAssignment,
    fixed,
    param,
)
from .rational import Poly, Rat, fraction_to_json, to_fraction

SPEC_VERSION = "netident/1"
_TOP_KEYS = {"version", "L", "K", "p", "nodes", "G", "R", "H", "Lambda", "diagonal_feedthrough", "theta", "description"}


class SpecError(ValueError):
    """Parse or consistency error, with a location string."""

    def __init__(self, message: str, where: str = "$"):
        super().__init__(f"{where}: {message}")
        self.where = where
        self.detail = message


@dataclass(frozen=True, eq=False)
class SpecDocument:
    structure: ModelSetStructure
    theta: Optional[ThetaAssignment] = None
    description: Optional[str] = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpecDocument):
            return NotImplemented
        return serialize_spec(self) == serialize_spec(other)


def _expect(cond: bool, message: str, where: str):
    if not cond:
        raise SpecError(message, where)


def _keys(obj: dict, allowed: set, where: str, required: set = frozenset()):
    _expect(isinstance(obj, dict), "expected an object", where)
    unknown = sorted(set(obj) - allowed)
    _expect(not unknown, f"unknown key(s) {unknown}", where)
    missing = sorted(required - set(obj))
    _expect(not missing, f"missing key(s) {missing}", where)


def _int(obj, key: str, where: str, minimum: int = 0) -> int:
    v = obj.get(key)
    _expect(isinstance(v, int) and not isinstance(v, bool) and v >= minimum,
            f"'{key}' must be an integer >= {minimum}", f"{where}.{key}")
    return v


def _parse_rat(obj, where: str) -> Rat:
    _keys(obj, {"num", "den"}, where, {"num", "den"})
    try:
        num = Poly([to_fraction(c) for c in obj["num"]])
        den = Poly([to_fraction(c) for c in obj["den"]])
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"bad coefficient ({exc})", where) from None
    _expect(not den.is_zero(), "denominator is the zero polynomial", f"{where}.den")
    return Rat(num, den)


def _parse_cell(cell, where: str) -> Entry:
    if cell == "0" or (isinstance(cell, int) and not isinstance(cell, bool) and cell == 0):
        return ZERO
    _expect(isinstance(cell, dict) and len(cell) == 1,
            "cell must be \"0\", {\"fixed\": ...} or {\"param\": ...}", where)
    (kind, body), = cell.items()
    if kind == "fixed":
        r = _parse_rat(body, f"{where}.fixed")
        return fixed(r)
    if kind == "param":
        _keys(body, {"properness"}, f"{where}.param")
        prop = body.get("properness", "proper")
        _expect(prop in ("strict", "proper"), "properness must be 'strict' or 'proper'", f"{where}.param.properness")
        return param(strict=prop == "strict")
    raise SpecError(f"unknown cell kind '{kind}'", where)


def _parse_grid(obj, name: str, nrows: int, ncols: int) -> tuple:
    where = f"$.{name}"
    _expect(isinstance(obj, list) and len(obj) == nrows, f"expected {nrows} rows", where)
    rows = []
    for i, row in enumerate(obj):
        _expect(isinstance(row, list) and len(row) == ncols, f"expected {ncols} cells", f"{where}[{i}]")
        rows.append(tuple(_parse_cell(c, f"{where}[{i}][{j}]") for j, c in enumerate(row)))
    return tuple(rows)


def _parse_matrix(obj, n: int, where: str) -> np.ndarray:
    _expect(isinstance(obj, list) and len(obj) == n and all(isinstance(r, list) and len(r) == n for r in obj),
            f"expected a {n}x{n} matrix", where)
    try:
        a = np.array([[float(to_fraction(x)) for x in row] for row in obj], dtype=float).reshape(n, n)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"bad number ({exc})", where) from None
    _expect(np.array_equal(a, a.T), "covariance must be symmetric", where)
    _expect(n == 0 or np.linalg.eigvalsh(a)[0] > 0, "covariance must be positive definite", where)
    return a


def _parse_position(key: str, where: str) -> tuple[int, int]:
    try:
        i, k = (int(x) for x in key.split(","))
    except ValueError:
        raise SpecError(f"key '{key}' is not of the form 'row,col'", where) from None
    return i - 1, k - 1


def _parse_theta(obj, s: ModelSetStructure) -> ThetaAssignment:
    where = "$.theta"
    _keys(obj, {"G", "R", "H", "Lambda"}, where)
    entries = {}
    for name in ("G", "R", "H"):
        block = obj.get(name, {})
        _expect(isinstance(block, dict), "expected an object", f"{where}.{name}")
        for key, val in block.items():
            kw = f"{where}.{name}['{key}']"
            i, k = _parse_position(key, kw)
            grid = s.grid(name)
            _expect(0 <= i < len(grid) and 0 <= k < (len(grid[0]) if grid else 0), "position out of range", kw)
            _expect(grid[i][k].is_param, "position is not parameterized", kw)
            entries[(name, i, k)] = _parse_rat(val, kw)
    lam = None
    if "Lambda" in obj:
        _expect(s.lambda_is_param, "Lambda is not parameterized in this model set", f"{where}.Lambda")
        lam = _parse_matrix(obj["Lambda"], s.p, f"{where}.Lambda")
    missing = sorted(set(s.param_positions()) - set(entries))
    _expect(not missing, "missing values for " + ", ".join(f"{n}[{i + 1}][{k + 1}]" for n, i, k in missing), where)
    _expect(lam is not None or not s.lambda_is_param, "missing Lambda value", where)
    return ThetaAssignment(entries, lam)


def parse_spec(text: str) -> SpecDocument:
    """Strict parse of a spec document; raises :class:`SpecError`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return spec_from_dict(doc)


def spec_from_dict(doc: Any) -> SpecDocument:
    _keys(doc, _TOP_KEYS, "$", {"version", "L", "K", "p", "G", "R"})
    _expect(doc["version"] == SPEC_VERSION, f"unsupported version (expected '{SPEC_VERSION}')", "$.version")
    L = _int(doc, "L", "$", 1)
    K = _int(doc, "K", "$")
    p = _int(doc, "p", "$")
    _expect(p <= L, "p must not exceed L", "$.p")
    nodes = doc.get("nodes")
    if nodes is not None:
        _expect(isinstance(nodes, list) and len(nodes) == L and all(isinstance(n, str) for n in nodes)
                and len(set(nodes)) == L, f"expected {L} distinct names", "$.nodes")
        nodes = tuple(nodes)
    G = _parse_grid(doc["G"], "G", L, L)
    for i in range(L):
        _expect(G[i][i].is_zero, "diagonal must be zero", f"$.G[{i}][{i}]")
    R = _parse_grid(doc["R"], "R", L, K)
    H = _parse_grid(doc.get("H", [[] for _ in range(L)]), "H", L, p)
    lam_fixed = None
    if "Lambda" in doc:
        lam = doc["Lambda"]
        _keys(lam, {"fixed", "param"}, "$.Lambda")
        _expect(len(lam) == 1, "give exactly one of 'fixed' or 'param'", "$.Lambda")
        if "fixed" in lam:
            lam_fixed = _parse_matrix(lam["fixed"], p, "$.Lambda.fixed")
        else:
            _keys(lam["param"], set(), "$.Lambda.param")
    diag = doc.get("diagonal_feedthrough", False)
    _expect(isinstance(diag, bool), "expected true or false", "$.diagonal_feedthrough")
    try:
        s = ModelSetStructure(L, K, p, G, R, H, lam_fixed, diag, nodes)
    except StructureError as exc:
        raise SpecError(str(exc), "$") from None
    theta = _parse_theta(doc["theta"], s) if "theta" in doc else None
    desc = doc.get("description")
    _expect(desc is None or isinstance(desc, str), "expected a string", "$.description")
    return SpecDocument(s, theta, desc)


def _cell_json(e: Entry):
    if e.tag is Tag.ZERO:
        return "0"
    if e.tag is Tag.FIXED:
        return {"fixed": e.value.to_json()}
    return {"param": {"properness": "strict" if e.properness is Properness.STRICT else "proper"}}


def _matrix_json(a: np.ndarray) -> list:
    return [[fraction_to_json(to_fraction(float(x))) for x in row] for row in np.asarray(a)]


def spec_to_dict(doc: SpecDocument) -> dict:
    s = doc.structure
    out: dict = {"version": SPEC_VERSION}
    if doc.description is not None:
        out["description"] = doc.description
    out.update({"L": s.L, "K": s.K, "p": s.p})
    if s.node_names:
        out["nodes"] = list(s.node_names)
    for name in ("G", "R", "H"):
        out[name] = [[_cell_json(e) for e in row] for row in s.grid(name)]
    if s.lambda_fixed is not None:
        out["Lambda"] = {"fixed": _matrix_json(s.lambda_fixed)}
    elif s.p:
        out["Lambda"] = {"param": {}}
    out["diagonal_feedthrough"] = s.lambda_diagonal_feedthrough
    if doc.theta is not None:
        th: dict = {}
        for (name, i, k), v in sorted(doc.theta.entries.items()):
            th.setdefault(name, {})[f"{i + 1},{k + 1}"] = v.to_json()
        if doc.theta.Lambda is not None:
            th["Lambda"] = _matrix_json(doc.theta.Lambda)
        out["theta"] = th
    return out


def serialize_spec(doc: SpecDocument) -> str:
    return json.dumps(spec_to_dict(doc), indent=2) + "\n"
