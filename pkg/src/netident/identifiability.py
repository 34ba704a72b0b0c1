"""Decision procedures for global network identifiability of a model set.

The pipeline in :func:`analyze` is:

1. pick a route that lets the data condition be stated on ``T`` and ``Λ``
   (strictly proper modules; no algebraic loops with diagonal noise
   feedthrough; or feedthrough rank conditions),
2. try the diagonalization test on ``U = [R H]`` restricted to column
   permutations (cheap, sufficient),
3. run the per-row rank test on the ``Ť_i`` submatrices of ``T`` (necessary
   and sufficient under independent, unrestricted parameterization).
"""

from __future__ import annotations

import enum
import graphlib
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching, structural_rank

from .model import (
    ModelSetStructure,
    NetworkModel,
    Properness,
    Tag,
    ThetaAssignment,
    feedthrough_matrices,
    instantiate,
    network_transfer,
    random_theta,
    sample_valid_model,
)
from .rational import (
    DEFAULT_TRIALS,
    RANK_TOL,
    RMat,
    exact_rank,
    normal_rank,
    numerical_rank,
    sample_points,
    singular_values,
    to_float,
)


class Verdict(str, enum.Enum):
    IDENTIFIABLE_AT_MODEL = "IDENTIFIABLE_AT_MODEL"
    GENERICALLY_IDENTIFIABLE = "GENERICALLY_IDENTIFIABLE"
    NOT_IDENTIFIABLE = "NOT_IDENTIFIABLE"
    INCONCLUSIVE = "INCONCLUSIVE"


class Route(str, enum.Enum):
    STRICTLY_PROPER = "prop1"
    NO_ALGEBRAIC_LOOPS = "prop2"
    FEEDTHROUGH_RANK = "prop3"


# --- preconditions ------------------------------------------------------------

def check_strictly_proper(s: ModelSetStructure) -> bool:
    for row in s.G:
        for e in row:
            if e.tag is Tag.PARAM and e.properness is not Properness.STRICT:
                return False
            if e.tag is Tag.FIXED and not e.value.is_strictly_proper():
                return False
    return True


@dataclass(frozen=True)
class LoopCheck:
    """``order`` lists node indices so that ``G∞[order][:, order]`` is upper triangular."""

    order: Optional[tuple[int, ...]]
    cycle: Optional[tuple[int, ...]] = None

    @property
    def acyclic(self) -> bool:
        return self.order is not None

    @property
    def permutation(self) -> Optional[np.ndarray]:
        if self.order is None:
            return None
        return np.eye(len(self.order))[:, list(self.order)]


def feedthrough_edges(s: ModelSetStructure) -> list[tuple[int, int]]:
    """Edges ``(l, j)`` for every module G_jl that may carry a direct feedthrough."""
    return [(l, j) for j in range(s.L) for l in range(s.L) if j != l and s.G[j][l].may_have_feedthrough()]


def check_no_algebraic_loops(s: ModelSetStructure) -> LoopCheck:
    ts = graphlib.TopologicalSorter()
    for node in range(s.L):
        ts.add(node)
    for l, j in feedthrough_edges(s):
        # j must be listed before l for the permuted G∞ to be upper triangular
        ts.add(l, j)
    try:
        order = tuple(ts.static_order())
    except graphlib.CycleError as exc:
        nodes = exc.args[1]
        return LoopCheck(None, tuple(n for n in nodes[:-1])[::-1])
    return LoopCheck(order)


@dataclass(frozen=True)
class FeedthroughRow:
    row: int
    alpha: int
    beta: int
    count_ok: bool
    rank: Optional[int]
    required: int
    ok: bool


@dataclass(frozen=True)
class FeedthroughCheck:
    rows: tuple[FeedthroughRow, ...]
    mode: str

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


@dataclass(frozen=True)
class RowPermutations:
    """Column orderings for row ``i``.

    ``p_order`` lists the parameterized columns of ``(I - G)_i`` first,
    ``q_order`` the fixed columns of ``U_i`` (or ``R∞_i``) first; ties keep
    ascending column order.
    """

    i: int
    p_order: tuple[int, ...]
    q_order: tuple[int, ...]
    alpha: int
    beta: int

    @property
    def P(self) -> np.ndarray:
        return np.eye(len(self.p_order))[:, list(self.p_order)]

    @property
    def Q(self) -> np.ndarray:
        return np.eye(len(self.q_order))[:, list(self.q_order)]

    @property
    def param_rows(self) -> tuple[int, ...]:
        return self.p_order[:self.alpha]

    @property
    def free_cols(self) -> tuple[int, ...]:
        return self.q_order[:len(self.q_order) - self.beta]


def _is_ft_param(e) -> bool:
    return e.tag is Tag.PARAM and e.properness is Properness.PROPER


def build_row_permutations(s: ModelSetStructure, i: int, at_infinity: bool = False) -> RowPermutations:
    if not 0 <= i < s.L:
        raise IndexError(f"row {i} out of range for L={s.L}")
    is_param = _is_ft_param if at_infinity else (lambda e: e.is_param)
    g_row = s.G[i]
    u_row = s.R[i] if at_infinity else s.U[i]
    g_par = [j for j in range(s.L) if is_param(g_row[j])]
    g_fix = [j for j in range(s.L) if not is_param(g_row[j])]
    u_par = [c for c in range(len(u_row)) if is_param(u_row[c])]
    u_fix = [c for c in range(len(u_row)) if not is_param(u_row[c])]
    return RowPermutations(i, tuple(g_par + g_fix), tuple(u_fix + u_par), len(g_par), len(u_par))


def extract_Ti(s: ModelSetStructure, T: Union[RMat, np.ndarray], i: int, at_infinity: bool = False):
    """Rows of T at the parameterized modules of row i, columns at the fixed inputs of row i.

    Equivalent to ``[I_α 0] P_i^-1 T Q_i [I; 0]``; returns the same kind of
    object it was given (RMat or array).
    """
    perms = build_row_permutations(s, i, at_infinity)
    kappa = s.K if at_infinity else s.K + s.p
    shape = T.shape
    if shape != (s.L, kappa):
        raise ValueError(f"T has shape {shape}, expected {(s.L, kappa)}")
    rows, cols = list(perms.param_rows), list(perms.free_cols)
    if isinstance(T, RMat):
        return T.submatrix(rows, cols)
    return np.asarray(T)[np.ix_(rows, cols)] if rows and cols else np.zeros((len(rows), len(cols)), dtype=np.asarray(T).dtype)


def _eval_theta_T(s: ModelSetStructure, theta: ThetaAssignment, z: complex, at_infinity: bool = False):
    """Numerical T(z) (or T_wr∞) for a parameter draw, without exact inversion."""
    m = instantiate(s, theta, validate=False)
    if at_infinity:
        g = to_float(m.G.feedthrough())
        u = to_float(m.R.feedthrough())
    else:
        if min(m.G.min_den_modulus(z), m.U.min_den_modulus(z)) < 1e-10:
            return None
        g = m.G.evaluate(z)
        u = m.U.evaluate(z)
    a = np.eye(s.L) - g
    if np.linalg.cond(a) > 1e12:
        return None
    return np.linalg.solve(a, u)


def _sampled(s: ModelSetStructure, trials: int, seed: int, at_infinity: bool = False, max_tries: int = 200):
    """Yield ``(theta, T)`` numerical samples from random parameter draws."""
    rng = np.random.default_rng(seed)
    done = 0
    for _ in range(max_tries):
        theta = random_theta(s, rng)
        z = sample_points(rng, 1)[0]
        T = _eval_theta_T(s, theta, z, at_infinity)
        if T is None or not np.all(np.isfinite(T)):
            continue
        yield theta, T
        done += 1
        if done == trials:
            return
    raise RuntimeError("could not draw enough well-posed parameter samples")


def check_feedthrough_conditions(s: ModelSetStructure, m: Optional[NetworkModel] = None,
                                 trials: int = DEFAULT_TRIALS, seed: int = 0,
                                 tol: float = RANK_TOL) -> FeedthroughCheck:
    """Row counts and full-row-rank of ``Ť_i^∞`` built from ``T_wr∞``.

    With a model the check is made at that model, otherwise on random draws
    (every draw must pass).
    """
    perms = [build_row_permutations(s, i, at_infinity=True) for i in range(s.L)]
    if m is not None:
        samples = [to_float(feedthrough_matrices(m).Twr_inf)]
        mode = "at_model"
    else:
        samples = [T.real for _, T in _sampled(s, trials, seed, at_infinity=True)]
        mode = "generic"
    rows = []
    for i, pr in enumerate(perms):
        count_ok = pr.alpha + pr.beta <= s.K
        rank = None
        ok = count_ok
        if count_ok and pr.alpha:
            ranks = [numerical_rank(extract_Ti(s, T, i, at_infinity=True), tol) for T in samples]
            rank = min(ranks)
            ok = rank == pr.alpha
        elif count_ok:
            rank = 0
        rows.append(FeedthroughRow(i, pr.alpha, pr.beta, count_ok, rank, pr.alpha, ok))
    return FeedthroughCheck(tuple(rows), mode)


@dataclass(frozen=True)
class RouteVerdict:
    route: Optional[Route]
    strictly_proper: bool
    loops: LoopCheck
    lambda_diagonal_feedthrough: bool
    feedthrough: Optional[FeedthroughCheck]
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "route": self.route.value if self.route else None,
            "strictly_proper": self.strictly_proper,
            "no_algebraic_loops": self.loops.acyclic,
            "loop_order": [n + 1 for n in self.loops.order] if self.loops.order else None,
            "cycle": [n + 1 for n in self.loops.cycle] if self.loops.cycle else None,
            "lambda_diagonal_feedthrough": self.lambda_diagonal_feedthrough,
            "feedthrough_rows": None if self.feedthrough is None else [
                {"row": r.row + 1, "alpha": r.alpha, "beta": r.beta, "count_ok": r.count_ok,
                 "rank": r.rank, "required": r.required, "ok": r.ok}
                for r in self.feedthrough.rows
            ],
            "notes": list(self.notes),
        }


def precondition_route(s: ModelSetStructure, m: Optional[NetworkModel] = None,
                       trials: int = DEFAULT_TRIALS, seed: int = 0, tol: float = RANK_TOL) -> RouteVerdict:
    """First applicable route among strictly-proper, loop-free, feedthrough-rank."""
    notes = []
    sp = check_strictly_proper(s)
    loops = check_no_algebraic_loops(s)
    diag = s.lambda_diagonal_feedthrough
    if m is not None and diag and m.p:
        h_inf = to_float(m.H.feedthrough())
        phi_v = h_inf @ m.Lambda @ h_inf.T
        if np.abs(phi_v - np.diag(np.diag(phi_v))).max() > 1e-12:
            notes.append("model violates the declared diagonal noise feedthrough")
            diag = False
    if sp:
        return RouteVerdict(Route.STRICTLY_PROPER, sp, loops, diag, None, tuple(notes))
    if loops.acyclic and diag:
        return RouteVerdict(Route.NO_ALGEBRAIC_LOOPS, sp, loops, diag, None, tuple(notes))
    ft = check_feedthrough_conditions(s, m, trials, seed, tol)
    if ft.ok:
        return RouteVerdict(Route.FEEDTHROUGH_RANK, sp, loops, diag, ft, tuple(notes))
    notes.append("no precondition route applies")
    return RouteVerdict(None, sp, loops, diag, ft, tuple(notes))


# --- diagonalization by column permutation ------------------------------------

@dataclass(frozen=True)
class Theorem1Result:
    passed: bool
    matching: Optional[dict[int, int]]
    reason: str = ""

    def to_dict(self, s: ModelSetStructure) -> dict:
        return {
            "verdict": "pass" if self.passed else "inconclusive",
            "matching": None if self.matching is None else {
                s.name(i): s.column_label(c) for i, c in sorted(self.matching.items())
            },
            "reason": self.reason,
        }


def exclusive_pattern(s: ModelSetStructure) -> np.ndarray:
    """``E[i, c]`` is true when column c of U is nonzero only in row i."""
    nz = np.array([[e.structurally_nonzero() for e in row] for row in s.U], dtype=bool).reshape(s.L, s.K + s.p)
    col_count = nz.sum(axis=0)
    return nz & (col_count == 1)[None, :]


def check_theorem1(s: ModelSetStructure) -> Theorem1Result:
    """Look for a column permutation Q with ``U Q = [D F]``, D diagonal.

    Column c can serve row i only if it is structurally nonzero in row i and
    zero in every other row; a perfect matching of rows to such columns gives
    Q. Failure is not evidence of non-identifiability.
    """
    if s.K + s.p < s.L:
        return Theorem1Result(False, None, f"U has {s.K + s.p} columns for {s.L} rows")
    excl = exclusive_pattern(s)
    if s.L == 0:
        return Theorem1Result(True, {})
    match = maximum_bipartite_matching(csr_matrix(excl.astype(np.int8)), perm_type="column")
    if np.any(match < 0):
        missing = [s.name(i) for i in np.flatnonzero(match < 0)]
        return Theorem1Result(False, None, "no exclusive excitation column for " + ", ".join(missing))
    return Theorem1Result(True, {i: int(c) for i, c in enumerate(match)})


# --- per-row rank test ----------------------------------------------------------

@dataclass(frozen=True)
class RowResult:
    row: int
    alpha: int
    beta: int
    count_ok: bool
    rank: Optional[int]
    required: int
    verdict: str  # "pass" | "fail" | "inconclusive"
    confirmed_by: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "row": self.row + 1, "alpha": self.alpha, "beta": self.beta, "count_ok": self.count_ok,
            "rank": self.rank, "required": self.required, "verdict": self.verdict,
            "confirmed_by": self.confirmed_by,
        }


@dataclass
class Witness:
    """A rank-deficient ``Ť_i`` (or a row with too many parameters)."""

    row: int
    kind: str
    rows: list[str] = field(default_factory=list)
    cols: list[str] = field(default_factory=list)
    singular_values: list[float] = field(default_factory=list)
    exact_rank: Optional[int] = None
    matrix: Optional[list[list[str]]] = None

    @property
    def sigma_ratio(self) -> Optional[float]:
        sv = self.singular_values
        if len(sv) < 2 or sv[0] == 0:
            return None
        return sv[-1] / sv[0]

    def to_dict(self) -> dict:
        return {
            "row": self.row + 1, "kind": self.kind, "rows": self.rows, "cols": self.cols,
            "singular_values": [float(f"{v:.12g}") for v in self.singular_values],
            "sigma_ratio": None if self.sigma_ratio is None else float(f"{self.sigma_ratio:.6g}"),
            "exact_rank": self.exact_rank, "matrix": self.matrix,
        }


@dataclass(frozen=True)
class Theorem2Result:
    rows: tuple[RowResult, ...]
    verdict: Verdict
    mode: str
    witnesses: tuple[Witness, ...] = ()
    notes: tuple[str, ...] = ()


def transfer_pattern(s: ModelSetStructure) -> np.ndarray:
    """Structural nonzero pattern of ``T = (I - G)^-1 U``: reachability from U's inputs."""
    L = s.L
    adj = np.array([[s.G[j][l].structurally_nonzero() for l in range(L)] for j in range(L)], dtype=bool).reshape(L, L)
    # reach[j, l]: a path l ->* j exists
    reach = np.eye(L, dtype=bool)
    frontier = reach.copy()
    for _ in range(L):
        frontier = (adj.astype(int) @ frontier.astype(int)) > 0
        reach |= frontier
    u_nz = np.array([[e.structurally_nonzero() for e in row] for row in s.U], dtype=bool).reshape(L, s.K + s.p)
    return (reach.astype(int) @ u_nz.astype(int)) > 0


def _structural_rank(pattern: np.ndarray) -> int:
    if pattern.size == 0 or not pattern.any():
        return 0
    return int(structural_rank(csr_matrix(pattern.astype(np.int8))))


def _witness(s, i, perms, Ti_exact: Optional[RMat], Ti_num: Optional[np.ndarray], exact: Optional[int], kind: str) -> Witness:
    w = Witness(
        row=i, kind=kind,
        rows=[s.name(j) for j in perms.param_rows],
        cols=[s.column_label(c) for c in perms.free_cols],
        exact_rank=exact,
    )
    if Ti_num is not None:
        w.singular_values = [float(v) for v in singular_values(Ti_num)]
    if Ti_exact is not None:
        w.matrix = [[str(e) for e in Ti_exact.row(r)] for r in range(Ti_exact.rows)]
    return w


def _at_model_rows(s, m, trials, seed, tol):
    T = network_transfer(m)
    rng = np.random.default_rng(seed)
    rows, witnesses = [], []
    for i in range(s.L):
        perms = build_row_permutations(s, i)
        count_ok = perms.alpha + perms.beta <= s.K + s.p
        if not count_ok:
            rows.append(RowResult(i, perms.alpha, perms.beta, False, None, perms.alpha, "fail", "count"))
            witnesses.append(_witness(s, i, perms, None, None, None, "count"))
            continue
        if perms.alpha == 0:
            rows.append(RowResult(i, 0, perms.beta, True, 0, 0, "pass"))
            continue
        Ti = extract_Ti(s, T, i)
        rank = normal_rank(Ti, trials, int(rng.integers(2**31)), tol)
        if rank == perms.alpha:
            rows.append(RowResult(i, perms.alpha, perms.beta, True, rank, perms.alpha, "pass"))
            continue
        exact = exact_rank(Ti)
        if exact == perms.alpha:
            rows.append(RowResult(i, perms.alpha, perms.beta, True, exact, perms.alpha, "pass", "exact"))
            continue
        rows.append(RowResult(i, perms.alpha, perms.beta, True, rank, perms.alpha, "fail", "exact"))
        z = sample_points(rng, 1)[0]
        witnesses.append(_witness(s, i, perms, Ti, Ti.evaluate(z), exact, "rank"))
    if any(r.verdict == "fail" for r in rows):
        verdict = Verdict.NOT_IDENTIFIABLE
    else:
        verdict = Verdict.IDENTIFIABLE_AT_MODEL
    return tuple(rows), verdict, tuple(witnesses)


def _exact_confirmation(s, i, seed):
    """Exact rank of Ť_i at one random valid member of the set (None if no valid member drawn)."""
    rng = np.random.default_rng(seed + 7919 * (i + 1))
    try:
        m = sample_valid_model(s, rng)
    except ValueError:
        return None, None
    Ti = extract_Ti(s, network_transfer(m), i)
    return exact_rank(Ti), Ti


def _generic_rows(s, trials, seed, tol):
    perms = [build_row_permutations(s, i) for i in range(s.L)]
    needs_sampling = any(p.alpha and p.alpha + p.beta <= s.K + s.p for p in perms)
    samples = [T for _, T in _sampled(s, trials, seed)] if needs_sampling else []
    pattern = transfer_pattern(s)
    rows, witnesses, notes = [], [], []
    for i, pr in enumerate(perms):
        count_ok = pr.alpha + pr.beta <= s.K + s.p
        if not count_ok:
            rows.append(RowResult(i, pr.alpha, pr.beta, False, None, pr.alpha, "fail", "count"))
            witnesses.append(_witness(s, i, pr, None, None, None, "count"))
            continue
        if pr.alpha == 0:
            rows.append(RowResult(i, 0, pr.beta, True, 0, 0, "pass"))
            continue
        ranks = [numerical_rank(extract_Ti(s, T, i), tol) for T in samples]
        if all(r == pr.alpha for r in ranks):
            rows.append(RowResult(i, pr.alpha, pr.beta, True, pr.alpha, pr.alpha, "pass"))
            continue
        if any(r == pr.alpha for r in ranks):
            rows.append(RowResult(i, pr.alpha, pr.beta, True, max(ranks), pr.alpha, "inconclusive"))
            notes.append(f"row {i + 1}: rank varied across samples {ranks}")
            continue
        num_ti = extract_Ti(s, samples[0], i)
        srank = _structural_rank(pattern[np.ix_(list(pr.param_rows), list(pr.free_cols))])
        if srank < pr.alpha:
            rows.append(RowResult(i, pr.alpha, pr.beta, True, max(ranks), pr.alpha, "fail", "structural"))
            witnesses.append(_witness(s, i, pr, None, num_ti, None, "structural"))
            continue
        exact, Ti = _exact_confirmation(s, i, seed)
        if exact is not None and exact < pr.alpha:
            rows.append(RowResult(i, pr.alpha, pr.beta, True, max(ranks), pr.alpha, "fail", "exact"))
            witnesses.append(_witness(s, i, pr, Ti, num_ti, exact, "rank"))
        else:
            rows.append(RowResult(i, pr.alpha, pr.beta, True, max(ranks), pr.alpha, "inconclusive"))
            notes.append(f"row {i + 1}: numerically deficient but not confirmed exactly")
    if any(r.verdict == "fail" for r in rows):
        verdict = Verdict.NOT_IDENTIFIABLE
    elif any(r.verdict == "inconclusive" for r in rows):
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.GENERICALLY_IDENTIFIABLE
    return tuple(rows), verdict, tuple(witnesses), tuple(notes)


def check_theorem2(s: ModelSetStructure, m: Optional[NetworkModel] = None, mode: str = "generic",
                   trials: int = DEFAULT_TRIALS, seed: int = 0, tol: float = RANK_TOL) -> Theorem2Result:
    """Per-row parameter count and full-row-rank of ``Ť_i``.

    ``at_model`` decides identifiability at ``m`` exactly (a numerical rank
    drop is confirmed by exact elimination). ``generic`` samples random
    parameter draws; a NOT verdict additionally needs a structural-rank
    deficit or an exact deficit at a random valid member of the set.
    """
    if mode == "at_model":
        if m is None:
            raise ValueError("at_model mode needs a model")
        rows, verdict, witnesses = _at_model_rows(s, m, trials, seed, tol)
        return Theorem2Result(rows, verdict, mode, witnesses)
    if mode != "generic":
        raise ValueError(f"unknown mode {mode!r}")
    rows, verdict, witnesses, notes = _generic_rows(s, trials, seed, tol)
    return Theorem2Result(rows, verdict, mode, witnesses, notes)


# --- composition --------------------------------------------------------------

REPORT_VERSION = "netident-report/1"


@dataclass
class IdentifiabilityReport:
    route: RouteVerdict
    theorem1: Theorem1Result
    theorem2: Optional[Theorem2Result]
    overall: Verdict
    mode: str
    seed: int
    trials: int
    rank_tol: float
    structure: ModelSetStructure
    notes: list[str] = field(default_factory=list)

    @property
    def witnesses(self) -> tuple[Witness, ...]:
        return self.theorem2.witnesses if self.theorem2 else ()

    def to_dict(self) -> dict:
        from . import __version__

        s = self.structure
        return {
            "version": REPORT_VERSION,
            "tool_version": __version__,
            "mode": self.mode,
            "seed": self.seed,
            "trials": self.trials,
            "rank_tol": self.rank_tol,
            "dimensions": {"L": s.L, "K": s.K, "p": s.p},
            "route": self.route.to_dict(),
            "theorem1": self.theorem1.to_dict(s),
            "theorem2": None if self.theorem2 is None else {
                "mode": self.theorem2.mode,
                "verdict": self.theorem2.verdict.value,
                "rows": [r.to_dict() for r in self.theorem2.rows],
                "notes": list(self.theorem2.notes),
            },
            "overall": self.overall.value,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "notes": list(self.notes),
        }

    def render_text(self) -> str:
        s = self.structure
        lines = [f"network identifiability ({self.mode}, L={s.L}, K={s.K}, p={s.p}, seed={self.seed})"]
        r = self.route
        lines.append(f"  route: {r.route.value if r.route else 'none'}"
                     f"  [strictly proper: {r.strictly_proper}, no algebraic loops: {r.loops.acyclic},"
                     f" diagonal noise feedthrough: {r.lambda_diagonal_feedthrough}]")
        if r.loops.cycle:
            lines.append("  algebraic loop: " + " -> ".join(s.name(n) for n in r.loops.cycle))
        t1 = self.theorem1
        if t1.passed:
            pairs = ", ".join(f"{s.name(i)}<-{s.column_label(c)}" for i, c in sorted(t1.matching.items()))
            lines.append(f"  diagonalization: pass ({pairs})")
        else:
            lines.append(f"  diagonalization: inconclusive ({t1.reason})")
        if self.theorem2:
            lines.append(f"  row rank test ({self.theorem2.mode}): {self.theorem2.verdict.value}")
            for row in self.theorem2.rows:
                rank = "-" if row.rank is None else row.rank
                extra = f" via {row.confirmed_by}" if row.confirmed_by else ""
                lines.append(f"    {s.name(row.row):>6}: alpha={row.alpha} beta={row.beta}"
                             f" count_ok={row.count_ok} rank={rank}/{row.required} {row.verdict}{extra}")
        for w in self.witnesses:
            desc = f"  witness row {s.name(w.row)} ({w.kind}): rows {w.rows} x cols {w.cols}"
            if w.sigma_ratio is not None:
                desc += f", sigma_min/sigma_max={w.sigma_ratio:.3g}"
            lines.append(desc)
        for n in self.notes:
            lines.append(f"  note: {n}")
        lines.append(f"overall: {self.overall.value}")
        return "\n".join(lines)


def analyze(s: ModelSetStructure, m: Optional[NetworkModel] = None, mode: Optional[str] = None,
            trials: int = DEFAULT_TRIALS, seed: int = 0, rank_tol: float = RANK_TOL) -> IdentifiabilityReport:
    """Run the full pipeline; ``mode`` defaults to at_model when a model is given."""
    mode = mode or ("at_model" if m is not None else "generic")
    if mode == "at_model" and m is None:
        raise ValueError("at_model analysis needs a concrete model")
    route = precondition_route(s, m if mode == "at_model" else None, trials, seed, rank_tol)
    t1 = check_theorem1(s)
    t2 = check_theorem2(s, m, mode, trials, seed, rank_tol)
    notes = []
    if any(e.is_param and e.properness is Properness.STRICT for row in s.G for e in row):
        notes.append("rank test applied with the declared properness classes of the parameterized modules")
    if 0 < s.p < s.L:
        notes.append("stable left inverse of rectangular H checked only through det(H_a) (unchecked in general)")
    if route.route is None:
        overall = Verdict.INCONCLUSIVE
        notes.append("no precondition route holds; verdicts of the tests below are not conclusive")
    elif mode == "at_model":
        overall = t2.verdict
        if t1.passed and t2.verdict is Verdict.NOT_IDENTIFIABLE:
            notes.append("diagonalization passed but the row test failed at this model")
    elif t1.passed:
        overall = Verdict.GENERICALLY_IDENTIFIABLE
        notes.append("diagonalization certificate holds for every parameter value")
    else:
        overall = t2.verdict
    return IdentifiabilityReport(route, t1, t2, overall, mode, seed, trials, rank_tol, s, notes)
