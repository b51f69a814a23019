"""Dense two-phase simplex for the small linear programs inside MAXBAND.

Solves   maximize c.x   subject to   A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0
on a full tableau with Bland's rule, which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

LinearProgramStatus = Literal["optimal", "infeasible", "unbounded"]

TOL = 1e-9
MAX_PIVOTS = 5_000


@dataclass(frozen=True)
class LinearProgramResult:
    status: LinearProgramStatus
    x: np.ndarray
    objective: float

    @property
    def success(self) -> bool:
        return self.status == "optimal"


class _Unbounded(Exception):
    pass


def _pivot(tableau: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and abs(tableau[r, col]) > 0.0:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _entering(tableau: np.ndarray, basis: list[int], cost: np.ndarray, allowed: np.ndarray) -> int | None:
    n = tableau.shape[1] - 1
    reduced = cost[:n] - cost[basis] @ tableau[:, :n]
    candidates = np.flatnonzero((reduced > TOL) & allowed)
    return int(candidates[0]) if candidates.size else None


def _leaving(tableau: np.ndarray, basis: list[int], col: int) -> int | None:
    best: int | None = None
    best_ratio = np.inf
    for r in range(tableau.shape[0]):
        a = tableau[r, col]
        if a <= TOL:
            continue
        ratio = tableau[r, -1] / a
        if ratio < best_ratio - TOL or (abs(ratio - best_ratio) <= TOL and best is not None and basis[r] < basis[best]):
            best, best_ratio = r, ratio
    return best


def _run(tableau: np.ndarray, basis: list[int], cost: np.ndarray, allowed: np.ndarray) -> None:
    for _ in range(MAX_PIVOTS):
        col = _entering(tableau, basis, cost, allowed)
        if col is None:
            return
        row = _leaving(tableau, basis, col)
        if row is None:
            raise _Unbounded
        _pivot(tableau, basis, row, col)
    raise RuntimeError(f"simplex did not terminate within {MAX_PIVOTS} pivots")


def linprog_simplex(
    c: np.ndarray,
    a_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    a_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
) -> LinearProgramResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    a_ub = np.zeros((0, n)) if a_ub is None else np.atleast_2d(np.asarray(a_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    a_eq = np.zeros((0, n)) if a_eq is None else np.atleast_2d(np.asarray(a_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq

    # columns: originals | one slack per inequality | one artificial per row
    n_cols = n + m_ub + m
    tableau = np.zeros((m, n_cols + 1))
    tableau[:m_ub, :n] = a_ub
    tableau[:m_ub, n : n + m_ub] = np.eye(m_ub)
    tableau[:m_ub, -1] = b_ub
    tableau[m_ub:, :n] = a_eq
    tableau[m_ub:, -1] = b_eq
    negative = tableau[:, -1] < 0
    tableau[negative] *= -1.0

    art0 = n + m_ub
    basis: list[int] = []
    for r in range(m):
        if r < m_ub and not negative[r]:
            basis.append(n + r)
        else:
            tableau[r, art0 + r] = 1.0
            basis.append(art0 + r)

    is_art = np.zeros(n_cols, dtype=bool)
    is_art[art0:] = True
    used_art = np.array([b >= art0 for b in basis])

    if used_art.any():
        phase1 = np.zeros(n_cols)
        phase1[art0:] = -1.0
        try:
            _run(tableau, basis, phase1, np.ones(n_cols, dtype=bool))
        except _Unbounded:  # pragma: no cover - phase one is bounded above by zero
            raise RuntimeError("phase one reported an unbounded objective")
        if float(phase1[basis] @ tableau[:, -1]) < -1e-7:
            return LinearProgramResult("infeasible", np.full(n, np.nan), float("nan"))
        keep = []
        for r in range(tableau.shape[0]):
            if basis[r] < art0:
                keep.append(r)
                continue
            cols = np.flatnonzero((np.abs(tableau[r, :art0]) > TOL))
            if cols.size:
                _pivot(tableau, basis, r, int(cols[0]))
                keep.append(r)
        # rows whose artificial cannot leave are redundant equalities
        tableau = tableau[keep]
        basis = [basis[r] for r in keep]

    cost = np.zeros(n_cols)
    cost[:n] = c
    try:
        _run(tableau, basis, cost, ~is_art)
    except _Unbounded:
        return LinearProgramResult("unbounded", np.full(n, np.nan), float("inf"))

    x = np.zeros(n_cols)
    x[basis] = tableau[:, -1]
    x = np.maximum(x[:n], 0.0)
    return LinearProgramResult("optimal", x, float(c @ x))
