"""Shared fixtures, random generators and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools
from fractions import Fraction
from importlib import resources

import numpy as np

from netident.model import (
    ZERO,
    ModelSetStructure,
    NetworkModel,
    fixed,
    instantiate,
    param,
    sample_valid_model,
)
from netident.rational import Rat, RMat
from netident.specfile import parse_spec

Z = Rat.from_coeffs([0, 1])  # the shift variable z


def rat(num, den=(1,)) -> Rat:
    return Rat.from_coeffs(list(num), list(den))


def load(name: str):
    return parse_spec(resources.files("netident").joinpath("data", name).read_text())


def example1_structure(g21_zero: bool = False) -> ModelSetStructure:
    P = param(strict=True)
    one = fixed(Rat.one())
    G = [[ZERO, P, P], [ZERO if g21_zero else P, ZERO, P], [P, P, ZERO]]
    return ModelSetStructure(3, 2, 0, G, [[one, ZERO], [ZERO, one], [one, ZERO]], [[], [], []])


def example1_model(A: Rat, B: Rat, which: int) -> NetworkModel:
    """S1 (A on G21, B on G32) or S2 (B on G23, A on G31) as a concrete model."""
    G = [[Rat.zero()] * 3 for _ in range(3)]
    if which == 1:
        G[1][0], G[2][1] = A, B
    else:
        G[1][2], G[2][0] = B, A
    R = RMat.from_rows([[1, 0], [0, 1], [1, 0]])
    return NetworkModel(RMat.from_rows(G), R, RMat.zeros(3, 0), np.zeros((0, 0)))


# --- random generation ---------------------------------------------------------

def random_rat(rng, max_deg: int = 2, proper: bool = True, strictly: bool = False) -> Rat:
    """Random reduced rational function with small integer coefficients (not necessarily stable)."""
    dd = int(rng.integers(0, max_deg + 1))
    if strictly:
        dd = max(dd, 1)
    nd = int(rng.integers(0, dd + 1)) if proper else int(rng.integers(0, max_deg + 2))
    if strictly:
        nd = min(nd, dd - 1)
    num = [int(rng.integers(-4, 5)) for _ in range(nd + 1)]
    if num[-1] == 0:
        num[-1] = 1
    den = [int(rng.integers(-4, 5)) for _ in range(dd)] + [int(rng.integers(1, 4))]
    return Rat.from_coeffs(num, den)


def random_rmat(rng, rows: int, cols: int, rank: int | None = None, max_deg: int = 1) -> RMat:
    """Random rational matrix, optionally built as a product to cap its rank."""
    if rank is None:
        return RMat(rows, cols, [random_rat(rng, max_deg) for _ in range(rows * cols)])
    left = RMat(rows, rank, [random_rat(rng, max_deg) for _ in range(rows * rank)])
    right = RMat(rank, cols, [random_rat(rng, max_deg) for _ in range(rank * cols)])
    return left @ right


def random_structure(rng, route: str = "prop1", L: int | None = None, p: int | None = None,
                     K: int | None = None, density: float = 0.5) -> ModelSetStructure:
    """Random model set structure satisfying the named precondition route by construction.

    prop1: strictly proper G. prop2: loop-free proper feedthroughs along a
    random node order, diagonal Λ with strictly proper lower H. prop3:
    proper entries anywhere, unit excitation on every node.
    """
    L = L if L is not None else int(rng.integers(2, 5))
    p = p if p is not None else int(rng.integers(0, L + 1))
    rank_order = list(rng.permutation(L))
    G = [[ZERO] * L for _ in range(L)]
    for j in range(L):
        for l in range(L):
            if j == l or rng.random() > density:
                continue
            if route == "prop1":
                G[j][l] = param(strict=True)
            elif route == "prop2":
                # edge l -> j may carry feedthrough only if j precedes l in the order
                G[j][l] = param(strict=rank_order.index(j) > rank_order.index(l))
            else:
                G[j][l] = param(strict=bool(rng.random() < 0.3))
    if route == "prop3":
        K = L
        R = [[fixed(Rat.one()) if i == k else ZERO for k in range(L)] for i in range(L)]
    else:
        K = K if K is not None else int(rng.integers(0, 3))
        R = [[(param(strict=bool(rng.random() < 0.5)) if rng.random() < 0.5 else fixed(Rat.one()))
              if rng.random() < 0.4 else ZERO for _ in range(K)] for _ in range(L)]
    H = []
    for i in range(L):
        row = []
        for k in range(p):
            if i < p:
                if i == k:
                    row.append(param())
                elif route != "prop2" and rng.random() < 0.4:
                    row.append(param(strict=True))
                else:
                    row.append(ZERO)
            else:
                if rng.random() < 0.5:
                    row.append(param(strict=route == "prop2"))
                else:
                    row.append(ZERO)
        H.append(row)
    return ModelSetStructure(L, K, p, G, R, H, None, route == "prop2")


def random_valid_model(rng, route: str = "prop1", **kw):
    for _ in range(50):
        s = random_structure(rng, route, **kw)
        try:
            return s, sample_valid_model(s, rng)
        except ValueError:
            continue
    raise RuntimeError("no valid model drawn")


# --- oracles -----------------------------------------------------------------------

def leibniz_det(m: RMat) -> Rat:
    """Determinant by the permutation expansion (independent of elimination)."""
    n = m.rows
    total = Rat.zero()
    for perm in itertools.permutations(range(n)):
        sign = 1
        for a, b in itertools.combinations(range(n), 2):
            if perm[a] > perm[b]:
                sign = -sign
        term = Rat.const(sign)
        for i in range(n):
            term = term * m[i, perm[i]]
            if term.is_zero():
                break
        total = total + term
    return total


def brute_rank(m: RMat) -> int:
    """Largest k with a nonzero k x k minor."""
    for k in range(min(m.rows, m.cols), 0, -1):
        for rows in itertools.combinations(range(m.rows), k):
            for cols in itertools.combinations(range(m.cols), k):
                if not leibniz_det(m.submatrix(rows, cols)).is_zero():
                    return k
    return 0


def markov(r: Rat, n: int) -> np.ndarray:
    """First n coefficients h_k of r = sum_k h_k z^-k, by long division in z^-1."""
    d = r.den.degree
    num = [Fraction(0)] * (d + 1)
    for k, c in enumerate(r.num.coeffs):
        num[d - k] = c
    den = [r.den.coeffs[d - k] for k in range(d + 1)]
    h = []
    for k in range(n):
        acc = num[k] if k <= d else Fraction(0)
        for i in range(1, min(k, d) + 1):
            acc -= den[i] * h[k - i]
        h.append(acc / den[0])
    return np.array([float(x) for x in h])


def implicit_network_solve(m: NetworkModel, r: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Per-sample solve of w = G w + R r + H e from impulse responses (small N only)."""
    N = r.shape[1] if r.size else e.shape[1]
    L = m.L

    def seq(mat):
        return np.array([[markov(mat[i, j], N) for j in range(mat.cols)] for i in range(mat.rows)]).reshape(mat.rows, mat.cols, N)

    g, rr, hh = seq(m.G), seq(m.R), seq(m.H)
    w = np.zeros((L, N))
    a = np.eye(L) - g[:, :, 0]
    for t in range(N):
        rhs = np.zeros(L)
        for k in range(1, t + 1):
            rhs += g[:, :, k] @ w[:, t - k]
        for k in range(t + 1):
            if m.K:
                rhs += rr[:, :, k] @ r[:, t - k]
            if m.p:
                rhs += hh[:, :, k] @ e[:, t - k]
        w[:, t] = np.linalg.solve(a, rhs)
    return w


def random_theta_model(s: ModelSetStructure, seed: int) -> NetworkModel:
    return sample_valid_model(s, np.random.default_rng(seed))


__all__ = [
    "Z", "rat", "load", "example1_structure", "example1_model", "random_rat", "random_rmat",
    "random_structure", "random_valid_model", "leibniz_det", "brute_rank", "markov",
    "implicit_network_solve", "instantiate",
]
