"""Exact univariate polynomials, rational functions and rational matrices in z.

Coefficients are exact rationals (FLINT polynomials underneath, exposed as
:class:`fractions.Fraction`) so that structural verdicts never
depend on rounding. Floating point enters only when a function is evaluated at
a point (rank sampling, stability checks, simulation).
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Optional, Sequence

import numpy as np
from flint import fmpq, fmpq_poly

DEGREE_CAP = 64
RANK_TOL = 1e-9
SAMPLE_RADIUS = 1.0 + 1e-3
DEFAULT_TRIALS = 8


class DegreeOverflowError(ArithmeticError):
    """An intermediate polynomial exceeded the degree cap."""


class SingularMatrixError(ArithmeticError):
    pass


class RankSamplingError(RuntimeError):
    pass


def to_fraction(x) -> Fraction:
    """Convert ints, floats, decimal strings and ``"p/q"`` strings exactly.

    Floats go through their shortest repr, so ``0.3`` becomes ``3/10``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not coefficients")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise ValueError(f"non-finite coefficient {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def fraction_to_json(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class Poly:
    """Polynomial in z with exact rational coefficients (ascending order).

    Backed by FLINT's ``fmpq_poly``. The zero polynomial has ``coeffs == ()``
    and :attr:`degree` -1.
    """

    __slots__ = ("_p", "__dict__")

    def __init__(self, coeffs: Iterable = ()):
        if isinstance(coeffs, fmpq_poly):
            self._p = coeffs
        else:
            self._p = fmpq_poly([_to_fmpq(x) for x in coeffs])

    @classmethod
    def _wrap(cls, p: fmpq_poly) -> "Poly":
        out = cls.__new__(cls)
        out._p = p
        return out

    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def z(cls, power: int = 1) -> "Poly":
        return cls([0] * power + [1])

    @cached_property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(int(c.p), int(c.q)) for c in self._p.coeffs())

    @property
    def degree(self) -> int:
        return self._p.degree()

    @property
    def lead(self) -> Fraction:
        if self._p.is_zero():
            return Fraction(0)
        c = self._p[self._p.degree()]
        return Fraction(int(c.p), int(c.q))

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def __bool__(self) -> bool:
        return not self._p.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self._p == other._p
        if isinstance(other, (int, Fraction)):
            return self._p == fmpq_poly([_to_fmpq(other)])
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __neg__(self) -> "Poly":
        return Poly._wrap(-self._p)

    def __add__(self, other: "Poly") -> "Poly":
        return Poly._wrap(self._p + other._p)

    def __sub__(self, other: "Poly") -> "Poly":
        return Poly._wrap(self._p - other._p)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return Poly._wrap(self._p * _to_fmpq(other))
        if self._p.is_zero() or other._p.is_zero():
            return Poly._wrap(fmpq_poly())
        deg = self._p.degree() + other._p.degree()
        if deg > DEGREE_CAP:
            raise DegreeOverflowError(f"product degree {deg} exceeds cap {DEGREE_CAP}")
        return Poly._wrap(self._p * other._p)

    __rmul__ = __mul__

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other._p.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = divmod(self._p, other._p)
        return Poly._wrap(q), Poly._wrap(r)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if r:
            raise ArithmeticError("inexact polynomial division")
        return q

    def monic(self) -> "Poly":
        if self._p.is_zero():
            return self
        return Poly._wrap(self._p / self._p[self._p.degree()])

    def gcd(self, other: "Poly") -> "Poly":
        return Poly._wrap(self._p.gcd(other._p))

    @cached_property
    def _desc(self) -> np.ndarray:
        return np.array([float(c) for c in reversed(self.coeffs)] or [0.0])

    def __call__(self, z):
        return np.polyval(self._desc, z)

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return np.roots(self._desc).astype(complex)

    def __repr__(self) -> str:
        return f"Poly({[fraction_to_json(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if mono and mag == 1:
                body = mono
            else:
                body = str(mag) + (f"*{mono}" if mono else "")
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _to_fmpq(x) -> fmpq:
    f = to_fraction(x)
    return fmpq(f.numerator, f.denominator)


_ONE = Poly((1,))
_ZERO = Poly(())


class Rat:
    """Reduced rational function ``num/den`` in z with a monic denominator."""

    __slots__ = ("num", "den", "__dict__")

    def __init__(self, num=0, den=1):
        num = num if isinstance(num, Poly) else _as_poly(num)
        den = den if isinstance(den, Poly) else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = _ZERO, _ONE
            return
        if den.degree > 0 and num.degree > 0:
            g = num.gcd(den)
            if g.degree > 0:
                num = num.exact_div(g)
                den = den.exact_div(g)
        lead = den.lead
        if lead != 1:
            inv = 1 / lead
            num = num * inv
            den = den * inv
        self.num, self.den = num, den

    @classmethod
    def from_coeffs(cls, num: Sequence, den: Sequence = (1,)) -> "Rat":
        """Build from ascending coefficient lists, e.g. ``from_coeffs([1], [0, 1])`` is 1/z."""
        return cls(Poly(num), Poly(den))

    @classmethod
    def const(cls, c) -> "Rat":
        return cls(Poly.const(c))

    @classmethod
    def zero(cls) -> "Rat":
        return cls()

    @classmethod
    def one(cls) -> "Rat":
        return cls(_ONE)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree

    def is_strictly_proper(self) -> bool:
        return self.num.degree < self.den.degree

    def feedthrough(self) -> Fraction:
        """Limit as z tends to infinity."""
        if not self.is_proper():
            raise ValueError(f"feedthrough of improper function {self}")
        if self.num.degree < self.den.degree:
            return Fraction(0)
        return self.num.lead / self.den.lead

    def poles(self) -> np.ndarray:
        return self.den.roots()

    def zeros(self) -> np.ndarray:
        return self.num.roots()

    def is_stable(self, margin: float = 1e-9) -> bool:
        p = self.poles()
        return bool(np.all(np.abs(p) < 1.0 - margin))

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def __eq__(self, other) -> bool:
        if isinstance(other, Rat):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self == Rat.const(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __neg__(self) -> "Rat":
        return _mk(-self.num, self.den)

    def __add__(self, other) -> "Rat":
        other = _as_rat(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return Rat(self.num + other.num, self.den)
        g = self.den.gcd(other.den)
        if g.degree > 0:
            a = self.den.exact_div(g)
            b = other.den.exact_div(g)
            return Rat(self.num * b + other.num * a, a * other.den)
        return Rat(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> "Rat":
        return self + (-_as_rat(other))

    def __rsub__(self, other) -> "Rat":
        return _as_rat(other) - self

    def __mul__(self, other) -> "Rat":
        other = _as_rat(other)
        if self.is_zero() or other.is_zero():
            return Rat()
        # cross-cancel first to keep degrees low
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        n1, d2 = (self.num.exact_div(g1), other.den.exact_div(g1)) if g1.degree > 0 else (self.num, other.den)
        n2, d1 = (other.num.exact_div(g2), self.den.exact_div(g2)) if g2.degree > 0 else (other.num, self.den)
        return Rat(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Rat":
        other = _as_rat(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return self * _mk(other.den, other.num, canonical=False)

    def __rtruediv__(self, other) -> "Rat":
        return _as_rat(other) / self

    def to_json(self) -> dict:
        return {
            "num": [fraction_to_json(c) for c in self.num.coeffs] or [0],
            "den": [fraction_to_json(c) for c in self.den.coeffs],
        }

    @classmethod
    def from_json(cls, obj) -> "Rat":
        return cls(Poly(obj["num"]), Poly(obj["den"]))

    def __repr__(self) -> str:
        return f"Rat({self})"

    def __str__(self) -> str:
        if self.den == _ONE:
            return str(self.num)
        n, d = str(self.num), str(self.den)
        if len(self.num.coeffs) - sum(1 for c in self.num.coeffs if c == 0) > 1:
            n = f"({n})"
        if len(self.den.coeffs) - sum(1 for c in self.den.coeffs if c == 0) > 1 or self.den.lead != 1:
            d = f"({d})"
        return f"{n}/{d}"


def _as_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (list, tuple)):
        return Poly(x)
    return Poly.const(x)


def _as_rat(x) -> Rat:
    if isinstance(x, Rat):
        return x
    return Rat.const(x)


def _mk(num: Poly, den: Poly, canonical: bool = True) -> Rat:
    """Construct skipping the gcd when the pair is already coprime."""
    if not canonical:
        return Rat(num, den)
    r = Rat.__new__(Rat)
    r.num, r.den = num, den
    return r


def rat_arith(a: Rat, b: Rat, op: str) -> Rat:
    ops = {"add": Rat.__add__, "sub": Rat.__sub__, "mul": Rat.__mul__, "div": Rat.__truediv__}
    try:
        return ops[op](a, b)
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None


def feedthrough(a: Rat) -> Fraction:
    return a.feedthrough()


class RMat:
    """Immutable matrix of :class:`Rat` stored row-major."""

    __slots__ = ("rows", "cols", "entries", "__dict__")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        entries = tuple(e if isinstance(e, Rat) else _as_rat(e) for e in entries)
        if rows < 0 or cols < 0 or len(entries) != rows * cols:
            raise ValueError(f"{len(entries)} entries do not fill a {rows}x{cols} matrix")
        self.rows, self.cols, self.entries = rows, cols, entries

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RMat":
        rows = [list(r) for r in rows]
        n = len(rows)
        m = len(rows[0]) if rows else (cols or 0)
        if any(len(r) != m for r in rows):
            raise ValueError("ragged rows")
        return cls(n, m, [e for r in rows for e in r])

    @classmethod
    def identity(cls, n: int) -> "RMat":
        one, zero = Rat.one(), Rat.zero()
        return cls(n, n, [one if i == j else zero for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RMat":
        z = Rat.zero()
        return cls(rows, cols, [z] * (rows * cols))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, idx) -> Rat:
        i, j = idx
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[Rat]:
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def tolist(self) -> list[list[Rat]]:
        return [self.row(i) for i in range(self.rows)]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RMat":
        return RMat(len(rows), len(cols), [self[i, j] for i in rows for j in cols])

    def transpose(self) -> "RMat":
        return RMat(self.cols, self.rows, [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    T = property(transpose)

    def _check_same(self, other: "RMat"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "RMat") -> "RMat":
        self._check_same(other)
        return RMat(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "RMat") -> "RMat":
        self._check_same(other)
        return RMat(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self) -> "RMat":
        return RMat(self.rows, self.cols, [-a for a in self.entries])

    def __matmul__(self, other: "RMat") -> "RMat":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(self.rows):
            left = self.row(i)
            for j in range(other.cols):
                acc = Rat.zero()
                for k, a in enumerate(left):
                    if a.is_zero():
                        continue
                    b = other[k, j]
                    if not b.is_zero():
                        acc = acc + a * b
                out.append(acc)
        return RMat(self.rows, other.cols, out)

    def scale(self, c) -> "RMat":
        return RMat(self.rows, self.cols, [a * c for a in self.entries])

    def hstack(self, other: "RMat") -> "RMat":
        if self.rows != other.rows:
            raise ValueError("row count mismatch in hstack")
        return RMat.from_rows([self.row(i) + other.row(i) for i in range(self.rows)], self.cols + other.cols)

    def vstack(self, other: "RMat") -> "RMat":
        if self.cols != other.cols:
            raise ValueError("column count mismatch in vstack")
        return RMat(self.rows + other.rows, self.cols, self.entries + other.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RMat):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries))

    def is_square(self) -> bool:
        return self.rows == self.cols

    def nonzero_pattern(self) -> np.ndarray:
        return np.array([[not self[i, j].is_zero() for j in range(self.cols)] for i in range(self.rows)], dtype=bool).reshape(self.rows, self.cols)

    def feedthrough(self) -> np.ndarray:
        """Entrywise limit at infinity as an object array of Fractions."""
        out = np.empty((self.rows, self.cols), dtype=object)
        for i in range(self.rows):
            for j in range(self.cols):
                out[i, j] = self[i, j].feedthrough()
        return out

    def evaluate(self, z: complex) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=complex)
        for i in range(self.rows):
            for j in range(self.cols):
                e = self[i, j]
                out[i, j] = 0.0 if e.is_zero() else e(z)
        return out

    def min_den_modulus(self, z: complex) -> float:
        """Smallest |den(z)| over nonzero entries, scaled by the coefficient size."""
        worst = np.inf
        for e in self.entries:
            if e.is_zero() or e.den.degree == 0:
                continue
            scale = float(np.max(np.abs(e.den._desc)))
            worst = min(worst, abs(e.den(z)) / scale)
        return worst

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(e) for e in self.row(i)) for i in range(self.rows))
        return f"RMat[{self.rows}x{self.cols}]({body})"


def _row_to_poly(row: list[Rat]) -> tuple[list[Poly], Poly]:
    """Scale a row of rationals by the lcm of its denominators."""
    d = _ONE
    for e in row:
        if not e.is_zero() and e.den != d:
            g = d.gcd(e.den)
            d = d * e.den.exact_div(g)
    return [e.num * d.exact_div(e.den) if not e.is_zero() else _ZERO for e in row], d


def rm_invert(m: RMat) -> RMat:
    """Exact inverse by fraction-free Gauss-Jordan elimination.

    Each row is first cleared of denominators, ``m = diag(d)^-1 N`` with N
    polynomial. Bareiss-style Gauss-Jordan on ``[N | I]`` keeps every entry a
    polynomial (divisions by the previous pivot are exact) and ends with
    ``[det I | adj N]`` up to sign, so ``m^-1 = adj(N) diag(d) / det``.
    """
    if not m.is_square():
        raise ValueError(f"cannot invert non-square {m.shape} matrix")
    n = m.rows
    if n == 0:
        return RMat(0, 0, [])
    scales = []
    a = []
    for i in range(n):
        polys, d = _row_to_poly(m.row(i))
        scales.append(d)
        a.append(polys + [_ONE if j == i else _ZERO for j in range(n)])
    prev = _ONE
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k]), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular (determinant is the zero polynomial)")
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
        pk = a[k][k]
        row_k = a[k]
        for i in range(n):
            if i == k:
                continue
            row_i = a[i]
            f = row_i[k]
            new = []
            for j in range(2 * n):
                v = pk * row_i[j]
                if f and row_k[j]:
                    v = v - f * row_k[j]
                new.append(v.exact_div(prev) if prev != _ONE else v)
            a[i] = new
        prev = pk
    out = []
    for i in range(n):
        lead = a[i][i]  # equals det (all diagonal entries coincide after the sweep)
        for j in range(n):
            out.append(Rat(a[i][n + j] * scales[j], lead))
    return RMat(n, n, out)


def rm_det(m: RMat) -> Rat:
    """Determinant by exact Gaussian elimination over rational functions."""
    if not m.is_square():
        raise ValueError("determinant of non-square matrix")
    a = m.tolist()
    n = m.rows
    det = Rat.one()
    for k in range(n):
        piv = next((r for r in range(k, n) if not a[r][k].is_zero()), None)
        if piv is None:
            return Rat.zero()
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det = det * a[k][k]
        inv = Rat.one() / a[k][k]
        for i in range(k + 1, n):
            if a[i][k].is_zero():
                continue
            f = a[i][k] * inv
            a[i] = [a[i][j] - f * a[k][j] if j >= k else a[i][j] for j in range(n)]
    return det


def exact_rank(m: RMat) -> int:
    """Rank over the field of rational functions, by exact row reduction."""
    a = m.tolist()
    rank = 0
    for c in range(m.cols):
        piv = next((r for r in range(rank, m.rows) if not a[r][c].is_zero()), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = Rat.one() / a[rank][c]
        for r in range(rank + 1, m.rows):
            if a[r][c].is_zero():
                continue
            f = a[r][c] * inv
            a[r] = [a[r][j] - f * a[rank][j] if j >= c else a[r][j] for j in range(m.cols)]
        rank += 1
        if rank == m.rows:
            break
    return rank


def left_null_vector(m: RMat) -> Optional[list[Rat]]:
    """Some nonzero ``x`` with ``x m = 0`` exactly, or None when m has full row rank."""
    # reduce m^T to reduced row echelon form and read off one kernel vector
    a = m.T.tolist()
    rows, cols = m.cols, m.rows
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((k for k in range(r, rows) if not a[k][c].is_zero()), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = Rat.one() / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for k in range(rows):
            if k != r and not a[k][c].is_zero():
                f = a[k][c]
                a[k] = [x - f * y for x, y in zip(a[k], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    if not free:
        return None
    f = free[0]
    x = [Rat.zero() for _ in range(cols)]
    x[f] = Rat.one()
    for k, c in enumerate(pivots):
        x[c] = -a[k][f]
    return x


def singular_values(a: np.ndarray) -> np.ndarray:
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def numerical_rank(a: np.ndarray, tol: float = RANK_TOL) -> int:
    """Count singular values above ``tol * sigma_max``."""
    s = singular_values(np.asarray(a))
    if s.size == 0 or s[0] == 0.0 or not np.isfinite(s[0]):
        return 0
    return int(np.sum(s > tol * s[0]))


def sample_points(rng: np.random.Generator, count: int, radius: float = SAMPLE_RADIUS) -> np.ndarray:
    return radius * np.exp(2j * np.pi * rng.random(count))


def normal_rank(m: RMat, trials: int = DEFAULT_TRIALS, seed: int = 0, tol: float = RANK_TOL,
                radius: float = SAMPLE_RADIUS, max_resamples: int = 200) -> int:
    """Normal rank estimated from SVDs at random points on ``|z| = radius``.

    Points closer than ~1e-10 (relative) to a pole are rejected and redrawn.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if m.rows == 0 or m.cols == 0:
        return 0
    rng = np.random.default_rng(seed)
    best, done, budget = 0, 0, max_resamples
    while done < trials:
        z = sample_points(rng, 1, radius)[0]
        if m.min_den_modulus(z) < 1e-10:
            budget -= 1
            if budget <= 0:
                raise RankSamplingError("every sampled point hit a pole")
            continue
        vals = m.evaluate(z)
        if not np.all(np.isfinite(vals)):
            budget -= 1
            if budget <= 0:
                raise RankSamplingError("every sampled point hit a pole")
            continue
        best = max(best, numerical_rank(vals, tol))
        done += 1
    return best


# --- small exact helpers on constant (Fraction) matrices --------------------

def frac_matrix(a) -> np.ndarray:
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_fraction(v)
    return out


def frac_inv(a: np.ndarray) -> np.ndarray:
    """Exact inverse of a square Fraction matrix (Gauss-Jordan)."""
    n = a.shape[0]
    aug = [[to_fraction(a[i, j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = next((r for r in range(k, n) if aug[r][k] != 0), None)
        if piv is None:
            raise SingularMatrixError("constant matrix is singular")
        aug[k], aug[piv] = aug[piv], aug[k]
        inv = 1 / aug[k][k]
        aug[k] = [v * inv for v in aug[k]]
        for i in range(n):
            if i != k and aug[i][k] != 0:
                f = aug[i][k]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[k])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = aug[i][n + j]
    return out


def frac_det(a: np.ndarray) -> Fraction:
    n = a.shape[0]
    m = [[to_fraction(a[i, j]) for j in range(n)] for i in range(n)]
    det = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if m[r][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det *= m[k][k]
        for i in range(k + 1, n):
            if m[i][k] != 0:
                f = m[i][k] / m[k][k]
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return det


def frac_eye(n: int) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = Fraction(int(i == j))
    return out


def to_float(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=object).astype(float)
