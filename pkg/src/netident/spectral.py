"""Feedthrough-level objects of the (possibly rank-reduced) noise spectrum.

Only limits at z -> inf are computed here; no frequency-wise spectral
factorization is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .model import ModelSetStructure, NetworkModel, Properness, Tag, feedthrough_matrices
from .rational import RANK_TOL, Rat, RMat, to_float


class LDLBreakdownError(ArithmeticError):
    """Zero pivot with a nonzero remaining column."""


class OrderingError(ArithmeticError):
    pass


def psd_rank(a: np.ndarray, tol: float = RANK_TOL) -> int:
    """Rank of a symmetric PSD matrix from eigenvalues above ``tol * lambda_max``."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0
    ev = np.linalg.eigvalsh((a + a.T) / 2)
    top = ev[-1]
    if top <= 0:
        return 0
    return int(np.sum(ev > tol * top))


def _order_matrix(order: Sequence[int]) -> np.ndarray:
    """``Π = I[:, order]`` so that ``Πᵀ A Π = A[order][:, order]``."""
    return np.eye(len(order))[:, list(order)]


@dataclass(frozen=True)
class NoiseFeedthrough:
    Phi: np.ndarray
    p: int
    Lambda_breve: Optional[np.ndarray] = None
    G_inf: Optional[np.ndarray] = None


def noise_feedthrough_spectrum(m: NetworkModel, tol: float = RANK_TOL) -> NoiseFeedthrough:
    """``(I - G∞)^-1 H∞ Λ H∞ᵀ (I - G∞)^-T``; ``H∞ Λ H∞ᵀ`` is the embedded ``Λ̆``."""
    ft = feedthrough_matrices(m)
    g_inf = to_float(ft.G_inf)
    h_inf = to_float(ft.H_inf).reshape(m.L, m.p)
    lam_b = h_inf @ m.Lambda @ h_inf.T
    x = np.linalg.inv(np.eye(m.L) - g_inf)
    phi = x @ lam_b @ x.T
    phi = (phi + phi.T) / 2
    return NoiseFeedthrough(phi, psd_rank(phi, tol), lam_b, g_inf)


# --- LDL^T with unit upper-triangular factor --------------------------------

def _pivot_tol(a: np.ndarray, tol: float) -> float:
    scale = np.abs(a).max() if a.size else 0.0
    return tol * max(scale, 1.0)


def udu_loop(a: np.ndarray, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """``a = U diag(d) Uᵀ`` with U unit upper triangular, eliminating from the last index."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    u = np.eye(n)
    d = np.zeros(n)
    eps = _pivot_tol(a, tol)
    for k in range(n - 1, -1, -1):
        piv = a[k, k]
        col = a[:k, k]
        if abs(piv) <= eps:
            if col.size and np.abs(col).max() > eps:
                raise LDLBreakdownError(f"zero pivot at position {k} with nonzero column")
            continue
        d[k] = piv
        u[:k, k] = col / piv
        a[:k, :k] -= np.outer(col, col) / piv
    return u, d


def udu_recursive(a: np.ndarray, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Same factorization via ``[[A11, b], [bᵀ, c]] = [[U1, b/c], [0, 1]] diag(D1, c) [...]ᵀ``."""
    a = np.asarray(a, dtype=float)
    return _udu_rec(a, _pivot_tol(a, tol))


def _udu_rec(a: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    if n == 0:
        return np.eye(0), np.zeros(0)
    c = a[-1, -1]
    b = a[:-1, -1]
    if abs(c) <= eps:
        if b.size and np.abs(b).max() > eps:
            raise LDLBreakdownError(f"zero pivot at position {n - 1} with nonzero column")
        c, ub, schur = 0.0, np.zeros(n - 1), a[:-1, :-1]
    else:
        ub = b / c
        schur = a[:-1, :-1] - np.outer(b, b) / c
    u1, d1 = _udu_rec(schur, eps)
    u = np.eye(n)
    u[:-1, :-1] = u1
    u[:-1, -1] = ub
    return u, np.append(d1, c)


@dataclass(frozen=True)
class LDLResult:
    """Factors of ``Πᵀ Φ Π = U D Uᵀ`` and what they imply about ``G∞``."""

    order: tuple[int, ...]
    U: np.ndarray
    D: np.ndarray
    Lambda_tilde: np.ndarray
    G_inf: np.ndarray
    off_pattern: float
    tol: float

    @property
    def Pi(self) -> np.ndarray:
        return _order_matrix(self.order)

    @property
    def flagged(self) -> bool:
        """True when the implied ``G∞`` leaves the allowed feedthrough pattern."""
        return self.off_pattern > self.tol


def ldl_recover_lambda(phi: Union[NoiseFeedthrough, np.ndarray], order: Sequence[int],
                       allowed: Optional[np.ndarray] = None, tol: float = RANK_TOL,
                       method: str = "loop") -> LDLResult:
    """Unique unit-upper LDLᵀ of the permuted spectrum; ``D`` recovers the diagonal ``Λ̆``.

    ``allowed`` is a boolean L x L mask of entries of ``G∞`` that may be
    nonzero; the largest implied entry outside it is reported as
    ``off_pattern``. Without a mask every off-diagonal entry is allowed.
    """
    a = phi.Phi if isinstance(phi, NoiseFeedthrough) else np.asarray(phi, dtype=float)
    n = a.shape[0]
    order = tuple(int(k) for k in order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order {order} is not a permutation of 0..{n - 1}")
    ap = a[np.ix_(order, order)]
    u, d = (udu_loop if method == "loop" else udu_recursive)(ap, tol)
    inv = np.empty(n, dtype=int)
    inv[list(order)] = np.arange(n)
    lam = np.zeros((n, n))
    lam[np.ix_(order, order)] = np.diag(d)
    x = np.zeros((n, n))
    x[np.ix_(order, order)] = u
    g_inf = np.eye(n) - np.linalg.inv(x)
    mask = ~np.eye(n, dtype=bool) if allowed is None else np.asarray(allowed, dtype=bool)
    outside = np.abs(np.where(mask, 0.0, g_inf))
    scale = max(np.abs(a).max() if a.size else 0.0, 1.0)
    return LDLResult(order, u, d, lam, g_inf, float(outside.max()) if n else 0.0, tol * scale * 1e3)


def feedthrough_mask(s: ModelSetStructure) -> np.ndarray:
    return np.array([[s.G[j][l].may_have_feedthrough() for l in range(s.L)] for j in range(s.L)], dtype=bool)


# --- square embedding of a rank-reduced noise model -------------------------

@dataclass(frozen=True)
class SquareEmbedding:
    F_breve: RMat
    Delta_breve: np.ndarray
    Gamma: np.ndarray

    def spectrum_error(self, F: RMat, Delta: np.ndarray, points: int = 16) -> float:
        """Largest entrywise gap between ``F Δ F*`` and ``F̆ Δ̆ F̆*`` on the unit circle."""
        worst = 0.0
        for z in np.exp(2j * np.pi * (np.arange(points) + 0.5) / points):
            f = F.evaluate(z)
            fb = self.F_breve.evaluate(z)
            lhs = f @ Delta @ f.conj().T
            rhs = fb @ self.Delta_breve @ fb.conj().T
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst


def square_embedding(F: RMat, Delta: np.ndarray, check_tol: float = 1e-9) -> SquareEmbedding:
    """Monic square factor ``F̆ = [[F_a, 0], [F_b - Γ, I]]`` with ``Δ̆ = [I; Γ] Δ [I; Γ]ᵀ``."""
    L, p = F.shape
    Delta = np.asarray(Delta, dtype=float).reshape(p, p)
    f_inf = F.feedthrough()
    if p and not np.array_equal(to_float(f_inf[:p]), np.eye(p)):
        raise ValueError("upper p x p block of F must be monic")
    gamma_exact = f_inf[p:]
    gamma = to_float(gamma_exact).reshape(L - p, p)
    entries = []
    for i in range(L):
        for j in range(L):
            if j < p:
                e = F[i, j] if i < p else F[i, j] - Rat.const(gamma_exact[i - p, j])
            else:
                e = Rat.one() if i == j else Rat.zero()
            entries.append(e)
    fb = RMat(L, L, entries)
    stack = np.vstack([np.eye(p), gamma])
    emb = SquareEmbedding(fb, stack @ Delta @ stack.T, gamma)
    err = emb.spectrum_error(F, Delta)
    scale = max(1.0, float(np.abs(Delta).max()) if Delta.size else 1.0)
    if err > check_tol * scale:
        raise ArithmeticError(f"embedded spectrum differs by {err:.3g}")
    return emb


# --- signal ordering ----------------------------------------------------------

def recover_g_inf(twr_inf: np.ndarray, s: ModelSetStructure, tol: float = RANK_TOL) -> np.ndarray:
    """Solve each row of ``(I - G∞) T_wr∞ = R∞`` for the unknown feedthroughs.

    Known entries come from the structure; unknown ones are the proper
    parameterized entries of ``G`` and ``R``. Only columns where ``R∞`` is
    known are used, which is where the row test on ``T_wr∞`` guarantees a
    unique solution.
    """
    twr = np.asarray(twr_inf, dtype=float).reshape(s.L, s.K)
    g = np.zeros((s.L, s.L))
    for i in range(s.L):
        unknown = [j for j in range(s.L) if s.G[i][j].tag is Tag.PARAM and s.G[i][j].properness is Properness.PROPER]
        for j in range(s.L):
            e = s.G[i][j]
            if e.tag is Tag.FIXED:
                g[i, j] = float(e.value.feedthrough())
        if not unknown:
            continue
        known_cols = [c for c in range(s.K) if not (s.R[i][c].tag is Tag.PARAM and s.R[i][c].properness is Properness.PROPER)]
        r_known = np.array([float(s.R[i][c].value.feedthrough()) if s.R[i][c].tag is Tag.FIXED else 0.0 for c in known_cols])
        rhs = twr[i, known_cols] - g[i] @ twr[:, known_cols] - r_known
        lhs = twr[np.ix_(unknown, known_cols)]
        sol, _, rank, _ = np.linalg.lstsq(lhs.T, rhs, rcond=None)
        if rank < len(unknown):
            raise OrderingError(f"row {i + 1}: feedthroughs not determined by T_wr(inf)")
        g[i, unknown] = sol
    return g


def greedy_pivots(a: np.ndarray, p: int) -> list[int]:
    """Indices picked by largest remaining Schur-complement pivot, ``p`` times."""
    a = np.array(a, dtype=float)
    picked = []
    for _ in range(p):
        diag = np.diag(a).copy()
        diag[picked] = -np.inf
        k = int(np.argmax(diag))
        if diag[k] <= 0:
            raise OrderingError("no positive pivot left before reaching the rank")
        picked.append(k)
        col = a[:, k].copy()
        a -= np.outer(col, col) / col[k]
    return picked


@dataclass(frozen=True)
class Ordering:
    p: int
    order: tuple[int, ...]
    Lambda_tilde: np.ndarray
    G_inf: Optional[np.ndarray] = None

    @property
    def Pi(self) -> np.ndarray:
        return _order_matrix(self.order)


def ordering_permutation(twr_inf: Optional[np.ndarray], phi: Union[NoiseFeedthrough, np.ndarray], route: str,
                         order: Optional[Sequence[int]] = None, structure: Optional[ModelSetStructure] = None,
                         tol: float = RANK_TOL) -> Ordering:
    """Noise rank ``p``, the white-noise covariance seen at the nodes and a reordering.

    ``route`` selects how ``Λ̃`` is obtained: ``prop1`` (``G∞ = 0``),
    ``prop2`` (LDLᵀ along a loop-free ``order``) or ``prop3`` (``G∞`` solved
    from ``T_wr∞`` and the ``structure``). The returned order puts a full-rank
    set of ``p`` nodes first, each group in ascending index.
    """
    a = phi.Phi if isinstance(phi, NoiseFeedthrough) else np.asarray(phi, dtype=float)
    n = a.shape[0]
    g_inf = None
    if route == "prop1":
        lam = a
    elif route == "prop2":
        if order is None:
            raise ValueError("prop2 needs the loop-free node order")
        res = ldl_recover_lambda(a, order, tol=tol)
        lam, g_inf = res.Lambda_tilde, res.G_inf
    elif route == "prop3":
        if structure is None or twr_inf is None:
            raise ValueError("prop3 needs T_wr(inf) and the model set structure")
        g_inf = recover_g_inf(twr_inf, structure, tol)
        ig = np.eye(n) - g_inf
        lam = ig @ a @ ig.T
    else:
        raise ValueError(f"unknown route {route!r}")
    lam = (lam + lam.T) / 2
    p = psd_rank(a, tol)
    picked = sorted(greedy_pivots(lam, p)) if p else []
    rest = [k for k in range(n) if k not in picked]
    out = tuple(picked + rest)
    lead = lam[np.ix_(picked, picked)]
    if p and psd_rank(lead, tol) < p:
        raise OrderingError("leading block is rank deficient")
    return Ordering(p, out, lam, g_inf)
