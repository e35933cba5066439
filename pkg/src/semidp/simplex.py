"""Small dense primal simplex solver for equality-form linear programs.

Solves min c'x subject to Ax = b, x >= 0 via a two-phase tableau method
with Bland's anti-cycling rule. The problems solved in this package (convex
hull membership and gauge norms over sensitivity spaces) have at most a few
hundred variables and a few dozen rows, so a robust dense implementation is
preferred over generality or speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

DEFAULT_TOL = 1e-9


class IterationLimitExceeded(RuntimeError):
    """Raised when the simplex loop hits its iteration cap."""


@dataclass(frozen=True)
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float | None


def _iterate(tableau: np.ndarray, basis: list[int], ncols: int, tol: float, max_iter: int) -> str:
    """Run simplex pivots in place; columns >= ncols are never entered."""
    m = tableau.shape[0] - 1
    for _ in range(max_iter):
        negative = tableau[-1, :ncols] < -tol
        if not negative.any():
            return OPTIMAL
        entering = int(np.argmax(negative))  # Bland: smallest eligible index
        col = tableau[:m, entering]
        positive = col > tol
        if not positive.any():
            return UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[positive] = tableau[:m, -1][positive] / col[positive]
        best = ratios.min()
        candidates = np.nonzero(ratios <= best + tol)[0]
        leaving = int(min(candidates, key=lambda i: basis[i]))  # Bland tie-break
        _pivot(tableau, basis, leaving, entering)
    raise IterationLimitExceeded(f"simplex exceeded {max_iter} iterations")


def _pivot(tableau: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    multipliers = tableau[:, col].copy()
    multipliers[row] = 0.0
    tableau -= np.outer(multipliers, tableau[row])
    basis[row] = col


def solve_lp(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = 10_000,
) -> LpResult:
    """Minimize c'x over Ax = b, x >= 0."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError("inconsistent LP dimensions")

    A = A.copy()
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial basis, minimize the sum of artificials
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = A
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    basis = list(range(n, n + m))
    tableau[-1, n : n + m] = 1.0
    tableau[-1] -= tableau[:m].sum(axis=0)

    status = _iterate(tableau, basis, n + m, tol, max_iter)
    if status != OPTIMAL:
        raise IterationLimitExceeded("phase-1 subproblem did not terminate optimally")
    if -tableau[-1, -1] > tol:
        return LpResult(status=INFEASIBLE, x=None, objective=None)

    # drive any artificial still basic out of the basis, or drop its row
    keep_rows = []
    for i in range(m):
        if basis[i] >= n:
            pivot_col = -1
            for j in range(n):
                if abs(tableau[i, j]) > tol:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                _pivot(tableau, basis, i, pivot_col)
                keep_rows.append(i)
            # else: redundant row, drop it
        else:
            keep_rows.append(i)
    if len(keep_rows) < m:
        rows = keep_rows + [m]
        tableau = tableau[rows]
        basis = [basis[i] for i in keep_rows]
        m = len(keep_rows)

    # phase 2: restore the true objective over the original columns
    tableau = np.delete(tableau, np.s_[n : n + (tableau.shape[1] - 1 - n)], axis=1)
    tableau[-1, :] = 0.0
    tableau[-1, :n] = c
    for i, bi in enumerate(basis):
        tableau[-1] -= c[bi] * tableau[i]

    status = _iterate(tableau, basis, n, tol, max_iter)
    if status == UNBOUNDED:
        return LpResult(status=UNBOUNDED, x=None, objective=None)

    x = np.zeros(n)
    for i, bi in enumerate(basis):
        x[bi] = tableau[i, -1]
    return LpResult(status=OPTIMAL, x=x, objective=float(c @ x))
