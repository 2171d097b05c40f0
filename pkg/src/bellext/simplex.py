"""Dense two-phase simplex for small equality-constrained LPs.

Problems have the form ``A x = b, x >= 0`` with a handful of rows and at most
a few thousand columns (the atoms of a distribution). Pivoting uses Bland's
rule throughout, so the solver never cycles and its output is deterministic.
Phase 1 is run once per constraint system; any number of objectives can then
be optimized from the same feasible basis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12


class LPError(Exception):
    pass


class Unbounded(LPError):
    pass


@dataclass
class LPResult:
    value: float
    x: np.ndarray


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def _run(T: np.ndarray, basis: list[int], ncols: int, tol: float, max_iter: int) -> None:
    """Minimize the objective stored in the last row of ``T``.

    Only the first ``ncols`` columns may enter the basis. The last column of
    ``T`` is the right-hand side; the objective row holds reduced costs and
    minus the current objective value.
    """
    m = len(basis)
    for _ in range(max_iter):
        cost = T[-1, :ncols]
        entering = np.flatnonzero(cost < -tol)
        if entering.size == 0:
            return
        col = int(entering[0])
        column = T[:m, col]
        rhs = T[:m, -1]
        positive = column > PIVOT_TOL
        if not positive.any():
            raise Unbounded("objective is unbounded below")
        ratios = np.full(m, np.inf)
        ratios[positive] = rhs[positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + PIVOT_TOL)
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
    raise LPError(f"simplex did not terminate in {max_iter} iterations")


class EqualityLP:
    """Feasible region ``{x >= 0 : A x = b}`` prepared for repeated solves.

    ``feasible`` is False when phase 1 leaves a residual above ``tol``;
    ``infeasibility`` reports that residual (sum of artificial variables).
    """

    def __init__(self, A, b, tol: float = 1e-9, max_iter: int = 10_000):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.size:
            raise ValueError("A must be (m, n) with len(b) == m")
        self.tol = tol
        self.max_iter = max_iter
        m, n = A.shape
        self.n = n
        sign = np.where(b < 0, -1.0, 1.0)
        A = A * sign[:, None]
        b = b * sign

        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = A
        T[:m, n : n + m] = np.eye(m)
        T[:m, -1] = b
        T[-1, :n] = -A.sum(axis=0)
        T[-1, -1] = -b.sum()
        basis = list(range(n, n + m))
        _run(T, basis, n + m, PIVOT_TOL, max_iter)

        self.infeasibility = float(-T[-1, -1])
        self.feasible = self.infeasibility <= tol
        if not self.feasible:
            self._T = None
            self._basis = None
            return

        # drive artificials out; rows that cannot pivot are redundant
        keep = []
        for r in range(m):
            if basis[r] >= n:
                candidates = np.flatnonzero(np.abs(T[r, :n]) > 1e-9)
                if candidates.size:
                    _pivot(T, r, int(candidates[0]))
                    basis[r] = int(candidates[0])
                    keep.append(r)
            else:
                keep.append(r)
        rows = T[keep]
        self._T = np.vstack([np.hstack([rows[:, :n], rows[:, -1:]]), np.zeros((1, n + 1))])
        self._basis = [basis[r] for r in keep]

    def point(self) -> np.ndarray:
        """The basic feasible solution found by phase 1."""
        if not self.feasible:
            raise LPError("system is infeasible")
        x = np.zeros(self.n)
        for r, j in enumerate(self._basis):
            x[j] = self._T[r, -1]
        return np.clip(x, 0.0, None)

    def minimize(self, c) -> LPResult:
        if not self.feasible:
            raise LPError("system is infeasible")
        c = np.asarray(c, dtype=float).reshape(-1)
        T = self._T.copy()
        basis = list(self._basis)
        m = len(basis)
        T[-1, : self.n] = c
        T[-1, -1] = 0.0
        for r, j in enumerate(basis):
            if c[j] != 0.0:
                T[-1] -= c[j] * T[r]
        _run(T, basis, self.n, PIVOT_TOL, self.max_iter)
        x = np.zeros(self.n)
        for r, j in enumerate(basis):
            x[j] = T[r, -1]
        x = np.clip(x, 0.0, None)
        return LPResult(float(c @ x), x)

    def maximize(self, c) -> LPResult:
        res = self.minimize(-np.asarray(c, dtype=float))
        return LPResult(-res.value, res.x)
