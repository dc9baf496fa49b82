"""Primal simplex with Bland's rule for packing LPs ``max sum(w) s.t. A w <= b, w >= 0``.

``A`` has 0/1 entries and is given column-wise as lists of row indices; ``b >= 0`` so
the all-slack basis is feasible from the start. The exact variant works on sparse rows
of :class:`~fractions.Fraction`; the float variant uses a dense numpy tableau.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import SolverError


@dataclass
class LpSolution:
    objective: object
    weights: dict
    duals: list
    pivots: int


def solve_exact(columns, rhs, max_pivots: int = 1_000_000) -> LpSolution:
    n, m = len(columns), len(rhs)
    rows = [dict() for _ in range(m)]
    for j, col in enumerate(columns):
        for r in col:
            rows[r][j] = rows[r].get(j, Fraction(0)) + 1
    for r in range(m):
        rows[r][n + r] = Fraction(1)
    b = [Fraction(v) for v in rhs]
    basis = [n + r for r in range(m)]
    obj = {j: Fraction(1) for j in range(n)}
    value = Fraction(0)

    pivots = 0
    while True:
        entering = min((j for j, c in obj.items() if c > 0), default=None)
        if entering is None:
            break
        if pivots >= max_pivots:
            raise SolverError(f"exact simplex exceeded {max_pivots} pivots")
        leave, best = None, None
        for r in range(m):
            a = rows[r].get(entering)
            if a is not None and a > 0:
                ratio = b[r] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    leave, best = r, ratio
        if leave is None:
            raise SolverError(f"LP is unbounded along column {entering}")

        prow = rows[leave]
        a = prow[entering]
        if a != 1:
            prow = {k: v / a for k, v in prow.items()}
            rows[leave] = prow
            b[leave] /= a
        for i in range(m):
            if i == leave:
                continue
            f = rows[i].get(entering)
            if f is None:
                continue
            row = rows[i]
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            b[i] -= f * b[leave]
        f = obj[entering]
        for k, v in prow.items():
            nv = obj.get(k, 0) - f * v
            if nv:
                obj[k] = nv
            else:
                obj.pop(k, None)
        value += f * b[leave]
        basis[leave] = entering
        pivots += 1

    weights = {basis[r]: b[r] for r in range(m) if basis[r] < n and b[r] != 0}
    duals = [-obj.get(n + r, Fraction(0)) for r in range(m)]
    return LpSolution(value, weights, duals, pivots)


def solve_float(columns, rhs, pivot_tol: float = 1e-10, max_pivots: int = 1_000_000) -> LpSolution:
    n, m = len(columns), len(rhs)
    t = np.zeros((m, n + m))
    for j, col in enumerate(columns):
        for r in col:
            t[r, j] += 1.0
    t[:, n:] = np.eye(m)
    b = np.asarray(rhs, dtype=float).copy()
    basis = np.arange(n, n + m)
    obj = np.zeros(n + m)
    obj[:n] = 1.0
    value = 0.0

    pivots = 0
    while True:
        cand = np.flatnonzero(obj > pivot_tol)
        if cand.size == 0:
            break
        if pivots >= max_pivots:
            raise SolverError(f"float simplex exceeded {max_pivots} pivots")
        e = int(cand[0])
        col = t[:, e]
        ok = np.flatnonzero(col > pivot_tol)
        if ok.size == 0:
            raise SolverError(f"LP is unbounded along column {e}")
        ratios = b[ok] / col[ok]
        rmin = ratios.min()
        ties = ok[ratios <= rmin + 1e-13]
        leave = int(ties[np.argmin(basis[ties])])

        piv = t[leave, e]
        t[leave] /= piv
        b[leave] /= piv
        f = t[:, e].copy()
        f[leave] = 0.0
        t -= np.outer(f, t[leave])
        b -= f * b[leave]
        b[(b < 0) & (b > -1e-13)] = 0.0
        fo = obj[e]
        obj -= fo * t[leave]
        obj[e] = 0.0
        value += fo * b[leave]
        basis[leave] = e
        pivots += 1

    weights = {int(basis[r]): float(b[r]) for r in range(m) if basis[r] < n and b[r] > 0}
    duals = [float(-obj[n + r]) for r in range(m)]
    return LpSolution(value, weights, duals, pivots)
