"""Dense two-phase simplex for small/medium linear programs.

Solves  min cᵀx  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x free.

Free variables are handled by the positive/negative split, inequalities by
slack columns, and infeasibility detection by a phase-1 artificial
objective.  Pivoting uses Dantzig's rule with lowest-index tie-breaking and
falls back to Bland's rule after a run of degenerate pivots, which makes
cycling impossible; an iteration cap guards against pathological stalls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResourceError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
#: consecutive degenerate pivots before switching to Bland's rule
STALL_LIMIT = 200


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
             maximize: bool = False, max_iter: int | None = None) -> LPResult:
    """Solve a linear program over free variables.

    Returns an :class:`LPResult`; raises :class:`ResourceError` if the pivot
    cap trips (anti-cycling guard).
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    if maximize:
        c = -c
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.atleast_1d(np.asarray(b_ub, dtype=float))
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.atleast_1d(np.asarray(b_eq, dtype=float))
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A_ub)) and np.all(np.isfinite(b_ub))
            and np.all(np.isfinite(A_eq)) and np.all(np.isfinite(b_eq))):
        raise ValueError("LP coefficients must be finite")

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    # columns: [x+ (n), x- (n), slacks (m_ub)] then artificials appended below
    n_split = 2 * n
    n_struct = n_split + m_ub

    A = np.zeros((m, n_struct))
    b = np.concatenate([b_ub, b_eq])
    if m_ub:
        A[:m_ub, :n] = A_ub
        A[:m_ub, n:n_split] = -A_ub
        A[np.arange(m_ub), n_split + np.arange(m_ub)] = 1.0
    if m_eq:
        A[m_ub:, :n] = A_eq
        A[m_ub:, n:n_split] = -A_eq

    # normalize rhs to be nonnegative
    neg = b < 0
    A[neg] = -A[neg]
    b = np.where(neg, -b, b)

    # initial basis: slack column where it survived the sign flip, else artificial
    basis = np.full(m, -1, dtype=int)
    art_cols: list[int] = []
    cols = [A]
    next_col = n_struct
    for i in range(m):
        if i < m_ub and not neg[i]:
            basis[i] = n_split + i
        else:
            art = np.zeros((m, 1))
            art[i, 0] = 1.0
            cols.append(art)
            basis[i] = next_col
            art_cols.append(next_col)
            next_col += 1
    A = np.hstack(cols)
    n_total = A.shape[1]

    if max_iter is None:
        max_iter = max(2000, 60 * (m + n_total))

    T = np.zeros((m + 1, n_total + 1))
    T[:m, :n_total] = A
    T[:m, -1] = b

    # phase 1: minimize sum of artificials
    if art_cols:
        obj = np.zeros(n_total + 1)
        obj[art_cols] = 1.0
        T[-1, :] = obj
        for i in range(m):
            if basis[i] in art_cols:
                T[-1, :] -= T[i, :]
        _pivot_loop(T, basis, max_iter, blocked=())
        if T[-1, -1] < -FEAS_TOL:
            return LPResult("infeasible")
        _expel_artificials(T, basis, art_cols, n_struct)

    # phase 2: original objective on the split variables
    c_ext = np.zeros(n_total + 1)
    c_ext[:n] = c
    c_ext[n:n_split] = -c
    T[-1, :] = c_ext
    for i in range(m):
        if abs(c_ext[basis[i]]) > 0:
            T[-1, :] -= c_ext[basis[i]] * T[i, :]
    status = _pivot_loop(T, basis, max_iter, blocked=frozenset(art_cols))
    if status == "unbounded":
        return LPResult("unbounded")

    x_ext = np.zeros(n_total)
    for i in range(m):
        x_ext[basis[i]] = T[i, -1]
    x = x_ext[:n] - x_ext[n:n_split]
    value = float(np.dot(c, x))
    if maximize:
        value = -value
    return LPResult("optimal", x=x, value=value)


def _pivot_loop(T, basis, max_iter, blocked) -> str:
    """Run simplex pivots until optimality or unboundedness."""
    m = T.shape[0] - 1
    bland = False
    stall = 0
    for _ in range(max_iter):
        costs = T[-1, :-1]
        if blocked:
            candidates = np.where(costs < -PIVOT_TOL)[0]
            candidates = candidates[~np.isin(candidates, list(blocked))]
        else:
            candidates = np.where(costs < -PIVOT_TOL)[0]
        if candidates.size == 0:
            return "optimal"
        if bland:
            j = int(candidates[0])
        else:
            j = int(candidates[np.argmin(costs[candidates])])
        col = T[:m, j]
        rows = np.where(col > PIVOT_TOL)[0]
        if rows.size == 0:
            return "unbounded"
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL]
        # lowest basis index among ties keeps Bland's guarantee effective
        i = int(tied[np.argmin(basis[tied])])
        if best < PIVOT_TOL:
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False
        _pivot(T, i, j)
        basis[i] = j
    raise ResourceError("simplex pivot cap exceeded (cycling guard)")


def _pivot(T, row, col) -> None:
    T[row, :] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row, :])
    T[:, col] = 0.0
    T[row, col] = 1.0


def _expel_artificials(T, basis, art_cols, n_struct) -> None:
    """Pivot zero-level artificials out of the basis after phase 1."""
    art_set = set(art_cols)
    for i in range(len(basis)):
        if basis[i] in art_set:
            row = T[i, :n_struct]
            cand = np.where(np.abs(row) > PIVOT_TOL)[0]
            if cand.size:
                _pivot(T, i, int(cand[0]))
                basis[i] = int(cand[0])
    # neutralize any artificial still basic (redundant zero row)
    T[:, art_cols] = 0.0


def lp_to_text(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
               maximize: bool = False) -> str:
    """Plain-text dump of an LP in standard inequality form, for external
    cross-checking."""
    c = np.asarray(c, dtype=float)
    lines = [("max" if maximize else "min") + " " + " ".join("%.12g" % v for v in c)]
    if A_ub is not None:
        for row, rhs in zip(np.atleast_2d(A_ub), np.atleast_1d(b_ub)):
            lines.append(" ".join("%.12g" % v for v in row) + " <= " + "%.12g" % rhs)
    if A_eq is not None:
        for row, rhs in zip(np.atleast_2d(A_eq), np.atleast_1d(b_eq)):
            lines.append(" ".join("%.12g" % v for v in row) + " == " + "%.12g" % rhs)
    return "\n".join(lines) + "\n"
