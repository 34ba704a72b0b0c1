"""Time-domain simulation through the network transfer and non-identifiability witnesses."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy import linalg, signal

from .model import (
    ModelSetStructure,
    NetworkModel,
    ValidationError,
    Violation,
    feedthrough_matrices,
    network_transfer,
    validate_model,
)
from .rational import Poly, Rat, RMat, left_null_vector, rm_invert, to_float

DIVERGENCE_LIMIT = 1e12
MIN_SPECTRUM_SAMPLES = 1024
SPECTRUM_BURN_IN = 2048


class SimulationDivergedError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SignalRecord:
    r: np.ndarray  # K x N
    e: np.ndarray  # p x N
    w: np.ndarray  # L x N

    @property
    def N(self) -> int:
        return self.w.shape[1]

    def header(self) -> list[str]:
        return (["t"] + [f"r{k + 1}" for k in range(self.r.shape[0])]
                + [f"e{k + 1}" for k in range(self.e.shape[0])]
                + [f"w{k + 1}" for k in range(self.w.shape[0])])

    def to_csv(self, out: Optional[TextIO] = None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.header())
        data = np.vstack([self.r, self.e, self.w])
        for t in range(self.N):
            wr.writerow([str(t)] + [format(v, ".17g") for v in data[:, t]])
        text = buf.getvalue()
        if out is not None:
            out.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "SignalRecord":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:1] != ["t"]:
            raise ValueError("missing 't' header")
        head = rows[0]
        groups = {c: [i for i, h in enumerate(head) if h.startswith(c) and h[1:].isdigit()] for c in "rew"}
        data = np.array([[float(v) for v in row] for row in rows[1:]]).reshape(len(rows) - 1, len(head))
        pick = lambda c: data[:, groups[c]].T.copy()
        return cls(pick("r"), pick("e"), pick("w"))


def rat_to_filter(r: Rat) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of ``r`` as a filter in z^-1 (numerator padded to the denominator degree)."""
    if not r.is_proper():
        raise ValueError(f"{r} is not proper")
    d = r.den.degree
    num = r.num.coeffs
    den = r.den.coeffs
    b = np.array([float(num[d - k]) if d - k < len(num) else 0.0 for k in range(d + 1)])
    a = np.array([float(den[d - k]) for k in range(d + 1)])
    return b, a


def filter_rmat(T: RMat, u: np.ndarray) -> np.ndarray:
    """``y = T(q) u`` with zero initial conditions, one direct-form filter per entry."""
    y = np.zeros((T.rows, u.shape[1]))
    for i in range(T.rows):
        for j in range(T.cols):
            t = T[i, j]
            if t.is_zero() or not np.any(u[j]):
                continue
            b, a = rat_to_filter(t)
            y[i] += signal.lfilter(b, a, u[j])
    return y


def noise(Lambda: np.ndarray, N: int, seed) -> np.ndarray:
    """White Gaussian noise with covariance Λ through its symmetric square root."""
    p = Lambda.shape[0]
    rng = np.random.default_rng(seed)
    if p == 0:
        return np.zeros((0, N))
    root = np.real(linalg.sqrtm(Lambda))
    return root @ rng.standard_normal((p, N))


def simulate(m: NetworkModel, r: Optional[np.ndarray] = None, e: Optional[np.ndarray] = None,
             N: Optional[int] = None, seed=None, burn_in: int = 0, T: Optional[RMat] = None) -> SignalRecord:
    """Node signals ``w = T_wr r + T_we e``.

    ``e`` may be given explicitly; otherwise it is drawn from ``seed`` (or zero
    when no seed is given). ``burn_in`` extra samples are simulated with zero
    excitation and noise running, then discarded.
    """
    if r is not None:
        r = np.atleast_2d(np.asarray(r, dtype=float))
    if e is not None:
        e = np.atleast_2d(np.asarray(e, dtype=float))
    if N is None:
        N = next((x.shape[1] for x in (r, e) if x is not None and x.size), None)
        if N is None:
            raise ValueError("sample count unknown: pass N, r or e")
    if N < 1:
        raise ValueError("N must be >= 1")
    r = np.zeros((m.K, N)) if r is None or (m.K == 0 and r.size == 0) else r
    if r.shape != (m.K, N):
        raise ValueError(f"r has shape {r.shape}, expected {(m.K, N)}")
    total = N + burn_in
    if e is None:
        e_full = noise(m.Lambda, total, seed) if seed is not None else np.zeros((m.p, total))
    else:
        if e.shape != (m.p, N) and not (m.p == 0 and e.size == 0):
            raise ValueError(f"e has shape {e.shape}, expected {(m.p, N)}")
        e_full = np.hstack([np.zeros((m.p, burn_in)), e.reshape(m.p, N)])
    r_full = np.hstack([np.zeros((m.K, burn_in)), r])
    T = network_transfer(m) if T is None else T
    w = filter_rmat(T, np.vstack([r_full, e_full]))
    if not np.all(np.isfinite(w)) or (w.size and np.abs(w).max() > DIVERGENCE_LIMIT):
        raise SimulationDivergedError("simulated node signals diverged")
    return SignalRecord(r, e_full[:, burn_in:], w[:, burn_in:])


# --- witnesses ---------------------------------------------------------------

def witness_family_S2(s2: NetworkModel, g23: Rat, validate: bool = True) -> NetworkModel:
    """Member of the one-parameter family with ``G21 = (A + 1)(B - g23)``, same T as ``s2``.

    ``s2`` must have the three-node shape with ``A = G31`` and ``B = G23``.
    """
    if s2.L != 3:
        raise ValueError("the family is defined for the three-node network")
    A, B = s2.G[2, 0], s2.G[1, 2]
    rows = s2.G.tolist()
    rows[1][2] = g23
    rows[1][0] = (A + Rat.one()) * (B - g23)
    m = NetworkModel(RMat.from_rows(rows), s2.R, s2.H, s2.Lambda)
    if validate:
        bad = validate_model(m)
        if bad:
            raise ValidationError(bad)
    return m


@dataclass(frozen=True)
class WitnessMember:
    scale: float
    model: NetworkModel
    violations: tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations


def null_direction(s: ModelSetStructure, m: NetworkModel, i: int) -> Optional[list[Rat]]:
    """Stable strictly proper ``X`` with ``X Ť_i = 0`` for row i, or None if Ť_i has full row rank."""
    from .identifiability import extract_Ti

    T = network_transfer(m)
    ti = extract_Ti(s, T, i)
    if ti.rows == 0:
        return None
    x = left_null_vector(ti)
    if x is None:
        return None
    den = Poly((1,))
    for v in x:
        den = den * (v.den // den.gcd(v.den))
    polys = [(v * Rat(den)).num for v in x]
    deg = max(p.degree for p in polys)
    shift = Rat(Poly((1,)), Poly.z(deg + 1))
    return [Rat(p) * shift for p in polys]


def null_witness_family(s: ModelSetStructure, m: NetworkModel, i: int,
                        scales: Sequence[float] = (0.25, 0.5, 1.0, 2.0, -1.0)) -> list[WitnessMember]:
    """Models that differ from ``m`` in row i but share its network transfer.

    Row i of G moves by ``-t X`` on its parameterized entries and the
    parameterized entries of U move by ``t X T^(1)``, where ``X`` is a
    stable null direction of Ť_i. Each member is validated and the outcome
    recorded, since the family need not stay well posed.
    """
    from .identifiability import build_row_permutations

    X = null_direction(s, m, i)
    if X is None:
        raise ValueError(f"row {i + 1}: Ť_i has full row rank, no witness family")
    perms = build_row_permutations(s, i)
    par_rows = list(perms.param_rows)
    par_cols = list(perms.q_order[len(perms.q_order) - perms.beta:])
    T = network_transfer(m)
    members = []
    for t in scales:
        tr = Rat.const(t)
        g = m.G.tolist()
        for x, j in zip(X, par_rows):
            g[i][j] = g[i][j] - tr * x
        u = m.U.tolist()
        for c in par_cols:
            acc = Rat.zero()
            for x, j in zip(X, par_rows):
                acc = acc + x * T[j, c]
            u[i][c] = u[i][c] + tr * acc
        U = RMat.from_rows(u) if u and u[0] else m.U
        R = U.submatrix(range(m.L), range(m.K)) if m.K else m.R
        H = U.submatrix(range(m.L), range(m.K, m.K + m.p)) if m.p else m.H
        model = NetworkModel(RMat.from_rows(g), R, H, m.Lambda)
        members.append(WitnessMember(float(t), model, tuple(validate_model(model))))
    return members


# --- empirical noise feedthrough ---------------------------------------------

def sample_spectrum_feedthrough(rec: SignalRecord, m: NetworkModel) -> np.ndarray:
    """Sample estimate of ``(I - G∞)^-1 H∞ Λ H∞ᵀ (I - G∞)^-T``.

    Innovations are recovered as ``H_a^-1 [(I - G) w - R r]_{1:p}`` and their
    sample covariance is pushed through the model feedthroughs.
    """
    if rec.N < MIN_SPECTRUM_SAMPLES:
        raise ValueError(f"need at least {MIN_SPECTRUM_SAMPLES} samples, got {rec.N}")
    L, p = m.L, m.p
    if p == 0:
        return np.zeros((L, L))
    v = rec.w - filter_rmat(m.G, rec.w)
    if m.K:
        v -= filter_rmat(m.R, rec.r)
    ha = m.H.submatrix(range(p), range(p))
    e_hat = filter_rmat(rm_invert(ha), v[:p])
    cov = e_hat @ e_hat.T / rec.N
    ft = feedthrough_matrices(m)
    x = np.linalg.inv(np.eye(L) - to_float(ft.G_inf))
    h = to_float(ft.H_inf).reshape(L, p)
    est = x @ h @ cov @ h.T @ x.T
    return (est + est.T) / 2


def estimate_noise_feedthrough(m: NetworkModel, N: int, seed=0, burn_in: int = SPECTRUM_BURN_IN) -> np.ndarray:
    rec = simulate(m, N=N, seed=seed, burn_in=burn_in)
    return sample_spectrum_feedthrough(rec, m)
