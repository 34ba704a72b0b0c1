"""Network models, parameterized model sets and the network transfer function."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np

from .rational import (
    RMat,
    Rat,
    SingularMatrixError,
    frac_det,
    frac_eye,
    frac_inv,
    normal_rank,
    rm_det,
    rm_invert,
)

STABILITY_MARGIN = 1e-9


class Properness(str, enum.Enum):
    STRICT = "strict"
    PROPER = "proper"


class Tag(str, enum.Enum):
    ZERO = "zero"
    FIXED = "fixed"
    PARAM = "param"


@dataclass(frozen=True)
class Entry:
    """One cell of a model-set pattern: structurally zero, fixed, or parameterized."""

    tag: Tag
    value: Optional[Rat] = None
    properness: Properness = Properness.PROPER

    @property
    def is_param(self) -> bool:
        return self.tag is Tag.PARAM

    @property
    def is_zero(self) -> bool:
        return self.tag is Tag.ZERO

    def structurally_nonzero(self) -> bool:
        return self.tag is Tag.PARAM or (self.tag is Tag.FIXED and not self.value.is_zero())

    def may_have_feedthrough(self) -> bool:
        """True when the limit at infinity can be nonzero for some parameter value."""
        if self.tag is Tag.PARAM:
            return self.properness is Properness.PROPER
        if self.tag is Tag.FIXED:
            return self.value.feedthrough() != 0
        return False

    def __str__(self) -> str:
        if self.tag is Tag.ZERO:
            return "0"
        if self.tag is Tag.FIXED:
            return str(self.value)
        return "θ" if self.properness is Properness.PROPER else "θs"


ZERO = Entry(Tag.ZERO)


def fixed(value) -> Entry:
    r = value if isinstance(value, Rat) else Rat.const(value)
    if r.is_zero():
        return ZERO
    return Entry(Tag.FIXED, r)


def param(strict: bool = False) -> Entry:
    return Entry(Tag.PARAM, properness=Properness.STRICT if strict else Properness.PROPER)


Grid = tuple[tuple[Entry, ...], ...]


class StructureError(ValueError):
    """A model-set pattern is inconsistent with the network model definition."""


class ValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid network model: {msg}")


class AssignmentError(ValueError):
    pass


def _grid(rows: Sequence[Sequence[Entry]], nrows: int, ncols: int, name: str) -> Grid:
    g = tuple(tuple(r) for r in rows)
    if len(g) != nrows or any(len(r) != ncols for r in g):
        shape = (len(g), len(g[0]) if g else 0)
        raise StructureError(f"{name} pattern has shape {shape}, expected {(nrows, ncols)}")
    return g


@dataclass(frozen=True)
class ModelSetStructure:
    """Zero/fixed/parameterized pattern for (G, R, H) plus dimensions.

    ``lambda_fixed`` pins the noise covariance for every model of the set;
    ``lambda_diagonal_feedthrough`` asserts that ``H^∞ Λ H^∞ᵀ`` is diagonal
    for all parameters.
    """

    L: int
    K: int
    p: int
    G: Grid
    R: Grid
    H: Grid
    lambda_fixed: Optional[np.ndarray] = None
    lambda_diagonal_feedthrough: bool = False
    node_names: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "G", _grid(self.G, self.L, self.L, "G"))
        object.__setattr__(self, "R", _grid(self.R, self.L, self.K, "R"))
        object.__setattr__(self, "H", _grid(self.H, self.L, self.p, "H"))
        if not 0 <= self.p <= self.L:
            raise StructureError(f"noise rank p={self.p} must lie in [0, L={self.L}]")
        if self.node_names is not None and len(self.node_names) != self.L:
            raise StructureError("node_names must have L entries")
        if self.lambda_fixed is not None:
            lam = np.asarray(self.lambda_fixed, dtype=float)
            if lam.shape != (self.p, self.p):
                raise StructureError(f"Lambda has shape {lam.shape}, expected {(self.p, self.p)}")
        for problem in self.problems():
            raise StructureError(problem)

    def problems(self) -> list[str]:
        out = []
        for j in range(self.L):
            if not self.G[j][j].is_zero:
                out.append(f"G[{j + 1}][{j + 1}]: diagonal must be zero")
        for name, grid in (("G", self.G), ("R", self.R), ("H", self.H)):
            for i, row in enumerate(grid):
                for k, e in enumerate(row):
                    if e.tag is Tag.FIXED and not e.value.is_proper():
                        out.append(f"{name}[{i + 1}][{k + 1}]: fixed entry {e.value} is not proper")
        for i in range(self.p):
            for k in range(self.p):
                e = self.H[i][k]
                if i == k:
                    if e.is_param and e.properness is Properness.STRICT:
                        out.append(f"H[{i + 1}][{k + 1}]: diagonal of the monic block cannot be strictly proper")
                    elif e.is_zero or (e.tag is Tag.FIXED and e.value.feedthrough() != 1):
                        out.append(f"H[{i + 1}][{k + 1}]: diagonal of the monic block must have feedthrough 1")
                elif e.tag is Tag.FIXED and e.value.feedthrough() != 0:
                    out.append(f"H[{i + 1}][{k + 1}]: off-diagonal of the monic block must be strictly proper")
                elif e.is_param and e.properness is Properness.PROPER:
                    out.append(f"H[{i + 1}][{k + 1}]: off-diagonal of the monic block must be flagged strict")
        return out

    @property
    def U(self) -> Grid:
        return tuple(self.R[i] + self.H[i] for i in range(self.L))

    def name(self, j: int) -> str:
        return self.node_names[j] if self.node_names else f"w{j + 1}"

    def column_label(self, c: int) -> str:
        return f"r{c + 1}" if c < self.K else f"e{c - self.K + 1}"

    def param_positions(self) -> list[tuple[str, int, int]]:
        out = []
        for name, grid in (("G", self.G), ("R", self.R), ("H", self.H)):
            for i, row in enumerate(grid):
                for k, e in enumerate(row):
                    if e.is_param:
                        out.append((name, i, k))
        return out

    @property
    def lambda_is_param(self) -> bool:
        return self.p > 0 and self.lambda_fixed is None

    def grid(self, name: str) -> Grid:
        return {"G": self.G, "R": self.R, "H": self.H}[name]

    def replace_entry(self, name: str, i: int, k: int, entry: Entry) -> "ModelSetStructure":
        rows = [list(r) for r in self.grid(name)]
        rows[i][k] = entry
        kw = {name: tuple(tuple(r) for r in rows)}
        return _replace(self, **kw)


def _replace(s: ModelSetStructure, **kw) -> ModelSetStructure:
    fields = dict(
        L=s.L, K=s.K, p=s.p, G=s.G, R=s.R, H=s.H, lambda_fixed=s.lambda_fixed,
        lambda_diagonal_feedthrough=s.lambda_diagonal_feedthrough, node_names=s.node_names,
    )
    fields.update(kw)
    return ModelSetStructure(**fields)


@dataclass(frozen=True, eq=False)
class ThetaAssignment:
    """Concrete values for every parameterized position (0-based keys)."""

    entries: Mapping[tuple[str, int, int], Rat] = field(default_factory=dict)
    Lambda: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """A concrete network ``(G, R, H, Λ)``."""

    G: RMat
    R: RMat
    H: RMat
    Lambda: np.ndarray

    def __post_init__(self):
        lam = np.array(self.Lambda, dtype=float).reshape(self.p, self.p) if self.p else np.zeros((0, 0))
        lam.setflags(write=False)
        object.__setattr__(self, "Lambda", lam)
        L = self.G.rows
        if self.G.shape != (L, L):
            raise ValueError(f"G must be square, got {self.G.shape}")
        if self.R.rows != L or self.H.rows != L:
            raise ValueError("G, R and H must share the node dimension")

    @property
    def L(self) -> int:
        return self.G.rows

    @property
    def K(self) -> int:
        return self.R.cols

    @property
    def p(self) -> int:
        return self.H.cols

    @cached_property
    def U(self) -> RMat:
        return self.R.hstack(self.H)

    @cached_property
    def I_minus_G(self) -> RMat:
        return RMat.identity(self.L) - self.G

    @cached_property
    def inverse(self) -> RMat:
        """``(I - G)^-1``; raises SingularMatrixError when ill-posed."""
        return rm_invert(self.I_minus_G)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return (self.G == other.G and self.R == other.R and self.H == other.H
                and np.array_equal(self.Lambda, other.Lambda))

    __hash__ = None


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    where: str = ""

    def __str__(self) -> str:
        return f"[{self.code}] {self.where + ': ' if self.where else ''}{self.message}"


def _stable(r: Rat) -> bool:
    return r.is_stable(STABILITY_MARGIN)


def validate_model(m: NetworkModel) -> list[Violation]:
    """Check every condition of a network model; empty list means valid.

    The stable-left-inverse condition on a rectangular H is approximated by
    requiring det(H_a) to be minimum phase.
    """
    out: list[Violation] = []
    L, p = m.L, m.p
    for j in range(L):
        if not m.G[j, j].is_zero():
            out.append(Violation("nonzero-diagonal", "diagonal module must be zero", f"G[{j + 1}][{j + 1}]"))
    for name, mat in (("G", m.G), ("R", m.R), ("H", m.H)):
        for i in range(mat.rows):
            for k in range(mat.cols):
                e = mat[i, k]
                where = f"{name}[{i + 1}][{k + 1}]"
                if not e.is_proper():
                    out.append(Violation("improper", f"{e} is not proper", where))
                elif name != "R" and not _stable(e):
                    out.append(Violation("unstable", f"{e} has poles on or outside the unit circle", where))
    if out:
        return out

    if p:
        h_inf = m.H.feedthrough()
        if any(h_inf[i, k] != (1 if i == k else 0) for i in range(p) for k in range(p)):
            out.append(Violation("h-not-monic", "upper p x p block of H must have feedthrough I", "H"))
        h_a = m.H.submatrix(range(p), range(p))
        det_a = rm_det(h_a)
        if det_a.is_zero():
            out.append(Violation("h-rank", "H_a is singular", "H"))
        else:
            z = det_a.zeros()
            if z.size and np.any(np.abs(z) >= 1.0 - STABILITY_MARGIN):
                out.append(Violation("h-nonminphase", "det(H_a) has zeros on or outside the unit circle", "H"))
        if normal_rank(m.H) != p:
            out.append(Violation("h-rank", f"normal rank of H is below p={p}", "H"))

    lam = m.Lambda
    if p:
        if not np.allclose(lam, lam.T, rtol=0, atol=1e-12 * max(1.0, np.abs(lam).max())):
            out.append(Violation("lambda-asymmetric", "Lambda must be symmetric", "Lambda"))
        elif np.linalg.eigvalsh((lam + lam.T) / 2).min() <= 0:
            out.append(Violation("lambda-not-pd", "Lambda must be positive definite", "Lambda"))

    g_inf = m.G.feedthrough()
    ig_inf = frac_eye(L) - g_inf
    if frac_det(ig_inf) == 0:
        out.append(Violation("ill-posed", "I - G(inf) is singular", "G"))
        return out
    inv_inf = frac_inv(ig_inf)
    for size in range(1, L + 1):
        for idx in itertools.combinations(range(L), size):
            if frac_det(inv_inf[np.ix_(idx, idx)]) == 0:
                out.append(Violation("principal-minor", f"principal minor {tuple(i + 1 for i in idx)} of (I - G(inf))^-1 vanishes", "G"))
    try:
        inv = m.inverse
    except SingularMatrixError:
        out.append(Violation("ill-posed", "I - G is singular", "G"))
        return out
    for i in range(L):
        for k in range(L):
            e = inv[i, k]
            if not e.is_proper():
                out.append(Violation("inverse-improper", "(I - G)^-1 is not proper", f"inv[{i + 1}][{k + 1}]"))
            elif not _stable(e):
                out.append(Violation("inverse-unstable", "(I - G)^-1 is not stable", f"inv[{i + 1}][{k + 1}]"))
    return out


def build_model(G, R, H=None, Lambda=None) -> NetworkModel:
    """Convenience constructor from nested lists of Rat/scalars."""
    G = G if isinstance(G, RMat) else RMat.from_rows(G)
    L = G.rows
    R = R if isinstance(R, RMat) else (RMat.from_rows(R) if R and R[0] else RMat.zeros(L, 0))
    if H is None:
        H = RMat.zeros(L, 0)
    elif not isinstance(H, RMat):
        H = RMat.from_rows(H) if H and H[0] else RMat.zeros(L, 0)
    p = H.cols
    lam = np.eye(p) if Lambda is None else np.asarray(Lambda, dtype=float)
    return NetworkModel(G, R, H, lam)


def _entry_value(e: Entry, key, theta: Mapping) -> Rat:
    if e.tag is Tag.ZERO:
        return Rat.zero()
    if e.tag is Tag.FIXED:
        return e.value
    return theta[key]


def instantiate(s: ModelSetStructure, theta: ThetaAssignment, validate: bool = True) -> NetworkModel:
    """Build the model for ``theta``; raise when validation fails."""
    wanted = set(s.param_positions())
    given = set(theta.entries)
    if wanted - given:
        raise AssignmentError(f"missing assignments for {sorted(_label(k) for k in wanted - given)}")
    if given - wanted:
        raise AssignmentError(f"assignments for non-parameterized positions {sorted(_label(k) for k in given - wanted)}")
    for key in wanted:
        name, i, k = key
        e = s.grid(name)[i][k]
        v = theta.entries[key]
        if not v.is_proper():
            raise AssignmentError(f"{_label(key)}: assigned {v} is not proper")
        if e.properness is Properness.STRICT and not v.is_strictly_proper():
            raise AssignmentError(f"{_label(key)}: assigned {v} is not strictly proper")

    def mat(name, nrows, ncols):
        g = s.grid(name)
        return RMat(nrows, ncols, [_entry_value(g[i][k], (name, i, k), theta.entries) for i in range(nrows) for k in range(ncols)])

    if s.lambda_fixed is not None:
        if theta.Lambda is not None and not np.allclose(theta.Lambda, s.lambda_fixed):
            raise AssignmentError("Lambda is fixed by the model set")
        lam = s.lambda_fixed
    elif s.p == 0:
        lam = np.zeros((0, 0))
    else:
        if theta.Lambda is None:
            raise AssignmentError("missing Lambda assignment")
        lam = theta.Lambda
    m = NetworkModel(mat("G", s.L, s.L), mat("R", s.L, s.K), mat("H", s.L, s.p), np.asarray(lam, dtype=float))
    if validate:
        violations = validate_model(m)
        if violations:
            raise ValidationError(violations)
    return m


def extract_theta(s: ModelSetStructure, m: NetworkModel) -> ThetaAssignment:
    """Inverse of :func:`instantiate` on models that match the pattern."""
    mats = {"G": m.G, "R": m.R, "H": m.H}
    for name, grid in (("G", s.G), ("R", s.R), ("H", s.H)):
        for i, row in enumerate(grid):
            for k, e in enumerate(row):
                v = mats[name][i, k]
                if e.tag is Tag.ZERO and not v.is_zero():
                    raise AssignmentError(f"{name}[{i + 1}][{k + 1}] must be zero")
                if e.tag is Tag.FIXED and v != e.value:
                    raise AssignmentError(f"{name}[{i + 1}][{k + 1}] must equal {e.value}")
    entries = {key: mats[key[0]][key[1], key[2]] for key in s.param_positions()}
    lam = None if s.lambda_fixed is not None or s.p == 0 else np.array(m.Lambda)
    return ThetaAssignment(entries, lam)


def _label(key) -> str:
    name, i, k = key
    return f"{name}[{i + 1}][{k + 1}]"


def network_transfer(m: NetworkModel) -> RMat:
    """``T = (I - G)^-1 [R H]``: first K columns are T_wr, the rest T_we."""
    return m.inverse @ m.U


@dataclass(frozen=True)
class FeedthroughMatrices:
    G_inf: np.ndarray
    R_inf: np.ndarray
    H_inf: np.ndarray
    Twr_inf: np.ndarray


def feedthrough_matrices(m: NetworkModel) -> FeedthroughMatrices:
    g_inf = m.G.feedthrough()
    r_inf = m.R.feedthrough()
    h_inf = m.H.feedthrough()
    twr_inf = frac_inv(frac_eye(m.L) - g_inf) @ r_inf if m.K else np.empty((m.L, 0), dtype=object)
    if m.K:
        direct = (m.inverse @ m.R).feedthrough()
        if not np.array_equal(direct, twr_inf):
            raise ArithmeticError("feedthrough of T_wr disagrees with (I - G(inf))^-1 R(inf)")
    return FeedthroughMatrices(g_inf, r_inf, h_inf, twr_inf)


# --- random instantiation ---------------------------------------------------

def _grid_rat(x: float, step: int = 1000) -> Fraction:
    return Fraction(int(round(x * step)), step)


def random_rat(rng: np.random.Generator, proper: bool, gain: float = 1.0, monic: bool = False) -> Rat:
    """First-order draw ``c/(z - a)`` (plus a feedthrough when ``proper``).

    ``c`` is uniform in [0.5, 2] with random sign, ``a`` uniform in (-0.9, 0.9).
    Monic draws are ``(z - b)/(z - a)`` with ``b`` also in (-0.9, 0.9), so they
    are minimum phase.
    """
    a = _grid_rat(rng.uniform(-0.9, 0.9))
    if monic:
        b = _grid_rat(rng.uniform(-0.9, 0.9))
        return Rat.from_coeffs([-b, 1], [-a, 1])
    c = _grid_rat(gain * rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]))
    r = Rat.from_coeffs([c], [-a, 1])
    if proper:
        d = _grid_rat(gain * rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]))
        r = r + Rat.const(d)
    return r


def random_lambda(rng: np.random.Generator, p: int, diagonal: bool = False) -> np.ndarray:
    if p == 0:
        return np.zeros((0, 0))
    if diagonal:
        return np.diag(np.round(rng.uniform(0.5, 2.0, p), 3))
    a = rng.normal(size=(p, p))
    lam = a @ a.T + p * 0.5 * np.eye(p)
    return np.round(lam, 3)


def random_theta(s: ModelSetStructure, rng: np.random.Generator, gain: float = 1.0) -> ThetaAssignment:
    entries = {}
    for key in s.param_positions():
        name, i, k = key
        e = s.grid(name)[i][k]
        if name == "H" and i < s.p and i == k:
            entries[key] = random_rat(rng, proper=False, monic=True)
        else:
            g = gain if name == "G" else 1.0
            if name == "H" and i < s.p:
                g = 0.25
            entries[key] = random_rat(rng, proper=e.properness is Properness.PROPER, gain=g)
    lam = random_lambda(rng, s.p, s.lambda_diagonal_feedthrough) if s.lambda_is_param else None
    return ThetaAssignment(entries, lam)


def sample_valid_model(s: ModelSetStructure, rng: np.random.Generator, tries: int = 24) -> NetworkModel:
    """Random valid member of ``s``; loop gains are halved after each rejection."""
    gain = 1.0
    last = None
    for attempt in range(tries):
        theta = random_theta(s, rng, gain)
        m = instantiate(s, theta, validate=False)
        last = validate_model(m)
        if not last:
            return m
        if attempt % 2 == 1:
            gain *= 0.5
    raise ValidationError(last or [])
