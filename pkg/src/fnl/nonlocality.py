"""Classical side of a Bell scenario: deterministic strategies, local content, zero patterns."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import simplex
from .config import DEFAULT, Config
from .errors import ResourceError, SolverError, ValidationError
from .quantum import BehaviorTable, BipartitePureState, MeasurementSet, born_behavior, check_nonsignaling


@dataclass(frozen=True, order=True)
class DeterministicStrategy:
    """Alice answers ``alpha[x]`` to setting ``x``; Bob answers ``beta[y]`` to ``y``."""

    alpha: tuple
    beta: tuple

    def prob(self, a: int, b: int, x: int, y: int) -> int:
        return int(self.alpha[x] == a and self.beta[y] == b)

    def cells(self):
        """The cells ``(a, b, x, y)`` this strategy assigns probability one."""
        return [(self.alpha[x], self.beta[y], x, y) for x in range(len(self.alpha)) for y in range(len(self.beta))]


def strategy_count(n: int, n_b: int, m_a: int, m_b: int) -> int:
    return m_a**n * m_b**n_b


def _check_cap(count: int, cfg: Config) -> None:
    if count > cfg.det_cap:
        raise ResourceError(f"{count} deterministic strategies exceed the cap {cfg.det_cap}")


def enumerate_deterministic(n: int, n_b: int, m_a: int, m_b: int, cfg: Config = DEFAULT):
    """All strategies in lexicographic order of ``(alpha, beta)``."""
    _check_cap(strategy_count(n, n_b, m_a, m_b), cfg)
    for alpha in itertools.product(range(m_a), repeat=n):
        for beta in itertools.product(range(m_b), repeat=n_b):
            yield DeterministicStrategy(alpha, beta)


def _strategy_arrays(dims, cfg: Config):
    n, n_b, m_a, m_b = dims
    _check_cap(strategy_count(*dims), cfg)
    alphas = np.array(list(itertools.product(range(m_a), repeat=n)), dtype=np.int64).reshape(-1, n)
    betas = np.array(list(itertools.product(range(m_b), repeat=n_b)), dtype=np.int64).reshape(-1, n_b)
    return alphas, betas


def _strategy_at(idx: int, alphas, betas) -> DeterministicStrategy:
    i, j = divmod(idx, len(betas))
    return DeterministicStrategy(tuple(int(v) for v in alphas[i]), tuple(int(v) for v in betas[j]))


def _cell_index(dims, a, b, x, y):
    n, n_b, m_a, m_b = dims
    return ((x * n_b + y) * m_a + a) * m_b + b


def _lp_columns(dims, alphas, betas):
    n, n_b, m_a, m_b = dims
    cols = []
    for al in alphas:
        for be in betas:
            cols.append([_cell_index(dims, al[x], be[y], x, y) for x in range(n) for y in range(n_b)])
    return cols


@dataclass(frozen=True, eq=False)
class LcResult:
    """Local content ``lc`` with the optimal strategy weights and the nonlocal remainder."""

    lc: object
    weights: dict
    residual_behavior: BehaviorTable | None
    duals: np.ndarray
    exact: bool
    certified: bool
    gap: object
    pivots: int


def _require_valid(b: BehaviorTable, cfg: Config) -> None:
    b.validate(cfg)
    ns = check_nonsignaling(b)
    if b.exact:
        if ns.max_residual != 0:
            raise ValidationError(f"behavior is signaling (residual {ns.max_residual})")
    elif ns.max_residual > cfg.nonsignaling_tol:
        raise ValidationError(f"behavior is signaling (residual {ns.max_residual:.3e})")


def local_content_lp(b: BehaviorTable, exact: bool | None = None, cfg: Config = DEFAULT) -> LcResult:
    """Largest total weight of deterministic strategies fitting under ``p`` cell by cell.

    ``exact`` defaults to the table's own mode; a float table is snapped to rationals
    first when ``exact=True``. The optimum is checked against the dual read off the
    final tableau: exactly in rational mode, via the objective gap otherwise.
    """
    if exact is None:
        exact = b.exact
    if exact and not b.exact:
        b = b.to_exact(cfg.snap_max_denominator, cfg.snap_tol)
    _require_valid(b, cfg)
    dims = b.dims
    alphas, betas = _strategy_arrays(dims, cfg)
    cols = _lp_columns(dims, alphas, betas)
    # cell order matches _cell_index: (x, y, a, b) row-major
    rhs = list(b.probs.ravel()) if exact else b.as_float().ravel()
    if exact:
        sol = simplex.solve_exact(cols, rhs)
    else:
        sol = simplex.solve_float(cols, rhs, cfg.pivot_tol)
    duals = np.array(sol.duals, dtype=object if exact else float)

    # certificate: primal feasible, dual feasible, equal objectives
    if exact:
        load = [Fraction(0)] * len(rhs)
        for j, w in sol.weights.items():
            for r in cols[j]:
                load[r] += w
        primal_ok = all(w >= 0 for w in sol.weights.values()) and all(l <= p for l, p in zip(load, rhs))
        dual_ok = all(y >= 0 for y in duals) and all(sum(duals[r] for r in col) >= 1 for col in cols)
        gap = sum(p * y for p, y in zip(rhs, duals)) - sol.objective
        certified = primal_ok and dual_ok and gap == 0
        if not certified:
            raise SolverError(f"exact LP certificate failed (primal {primal_ok}, dual {dual_ok}, gap {gap})")
    else:
        gap = float(np.dot(rhs, duals) - sol.objective)
        slack = min((sum(duals[r] for r in col) for col in cols), default=1.0)
        certified = abs(gap) <= 1e-8 and slack >= 1 - 1e-8 and duals.min(initial=0.0) >= -1e-8
        if not certified:
            raise SolverError(f"float LP did not certify optimality (gap {gap:.3e}, dual slack {slack:.3e})")

    weights = {_strategy_at(j, alphas, betas): w for j, w in sol.weights.items()}
    lc = sol.objective
    residual = None
    # a float optimum within rounding of 1 leaves no meaningful nonlocal part
    if (lc < 1) if exact else (lc < 1 - 1e-9):
        local = np.zeros(b.probs.shape, dtype=object if exact else float)
        if exact:
            local[...] = Fraction(0)
        for s, w in weights.items():
            for a_, b_, x, y in s.cells():
                local[x, y, a_, b_] += w
        rem = (b.probs - local) / (1 - lc)
        if not exact:
            rem = np.clip(rem.astype(float), 0.0, None)
            rem = rem / rem.sum(axis=(2, 3), keepdims=True)
        residual = BehaviorTable(rem, exact=exact, check=exact)
    return LcResult(lc, weights, residual, duals, exact, certified, gap, sol.pivots)


def _zero_mask(b: BehaviorTable, zero_tol: float) -> np.ndarray:
    if b.exact:
        return np.vectorize(lambda v: v == 0, otypes=[bool])(b.probs)
    return b.as_float() <= zero_tol


def _hit_counts(mask: np.ndarray, alphas, betas, first_only=False):
    """Per strategy: how many zero cells it hits, and the first one in (x, y) order."""
    n, n_b = mask.shape[:2]
    count = np.zeros((len(alphas), len(betas)), dtype=np.int64)
    first = np.full((len(alphas), len(betas)), -1, dtype=np.int64)
    for x in range(n):
        for y in range(n_b):
            hit = mask[x, y][alphas[:, x]][:, betas[:, y]]
            count += hit
            fresh = hit & (first < 0)
            first[fresh] = x * n_b + y
    return count.ravel(), first.ravel()


@dataclass(frozen=True, eq=False)
class ZeroPatternReport:
    zeros: frozenset
    witnesses: dict
    fully_nonlocal: bool

    @property
    def excluded_count(self) -> int:
        return sum(1 for w in self.witnesses.values() if w is not None)


def zero_pattern_check(b: BehaviorTable, zero_tol: float = DEFAULT.zero_tol, cfg: Config = DEFAULT) -> ZeroPatternReport:
    """Does every deterministic strategy put weight on some cell where ``p`` vanishes?"""
    mask = _zero_mask(b, zero_tol)
    dims = b.dims
    alphas, betas = _strategy_arrays(dims, cfg)
    _, first = _hit_counts(mask, alphas, betas)
    witnesses = {}
    for idx, f in enumerate(first):
        s = _strategy_at(idx, alphas, betas)
        if f < 0:
            witnesses[s] = None
        else:
            x, y = divmod(int(f), dims[1])
            witnesses[s] = (s.alpha[x], s.beta[y], x, y)
    zeros = frozenset((int(a), int(b_), int(x), int(y)) for x, y, a, b_ in zip(*np.nonzero(mask)))
    return ZeroPatternReport(zeros, witnesses, bool(np.all(first >= 0)))


def lower_bound_from_strategy(b: BehaviorTable, s: DeterministicStrategy):
    """``min_{x,y} p(alpha_x, beta_y | x, y)``, a lower bound on the local content."""
    n, n_b = b.dims[:2]
    return min(b.probs[x, y, s.alpha[x], s.beta[y]] for x in range(n) for y in range(n_b))


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Coefficients ``coeffs[x, y, a, b]``: 0 on the support, -1 on zero cells."""

    coeffs: np.ndarray
    w_local: int
    w_ns: int
    best_strategy: DeterministicStrategy

    def value(self, probs) -> float:
        return float(np.sum(self.coeffs * np.asarray(probs, dtype=float)))


def bell_functional_from_zeros(b: BehaviorTable, zero_tol: float = DEFAULT.zero_tol,
                               cfg: Config = DEFAULT) -> BellFunctional:
    mask = _zero_mask(b, zero_tol)
    coeffs = -mask.astype(np.int64)
    alphas, betas = _strategy_arrays(b.dims, cfg)
    count, _ = _hit_counts(mask, alphas, betas)
    best = int(np.argmin(count))
    return BellFunctional(coeffs, -int(count[best]), 0, _strategy_at(best, alphas, betas))


def pr_box() -> BehaviorTable:
    """``p(a,b|x,y) = 1/2`` when ``a XOR b = x AND y``, else 0 (labels from 0)."""
    p = np.empty((2, 2, 2, 2), dtype=object)
    for x, y, a, b in itertools.product(range(2), repeat=4):
        p[x, y, a, b] = Fraction(1, 2) if (a ^ b) == (x & y) else Fraction(0)
    return BehaviorTable(p, exact=True)


# Outcome labels for the magic square, in index order
MAGIC_A_LABELS = ("+++", "+--", "-+-", "--+")
MAGIC_B_LABELS = ("---", "-++", "+-+", "++-")

# Alice's vectors |A_{a|x}> (columns per x) and Bob's |B_{b|y}>, unnormalized
_PM_ALICE = (
    ((1, 0, 0, 0), (0, 0, 1, 0), (0, 1, 0, 0), (0, 0, 0, 1)),
    ((1, 1, 1, 1), (1, -1, 1, -1), (1, 1, -1, -1), (1, -1, -1, 1)),
    ((1, -1, -1, -1), (1, 1, -1, 1), (1, -1, 1, 1), (1, 1, 1, -1)),
)
_PM_BOB = (
    ((0, 1, 0, -1), (0, 1, 0, 1), (1, 0, -1, 0), (1, 0, 1, 0)),
    ((0, 0, 1, -1), (0, 0, 1, 1), (1, -1, 0, 0), (1, 1, 0, 0)),
    ((0, 1, -1, 0), (0, 1, 1, 0), (1, 0, 0, -1), (1, 0, 0, 1)),
)


def _normalized_bases(table):
    out = []
    for vecs in table:
        u = np.array(vecs, dtype=complex).T
        out.append(u / np.linalg.norm(u, axis=0))
    return out


def peres_mermin_behavior(exact: bool = True, cfg: Config = DEFAULT):
    """Magic-square strategy on ``(|00>+|11>+|22>+|33>)/2``.

    Returns ``(behavior, state, alice, bob)``; the behavior is snapped to rationals
    when ``exact``.
    """
    state = BipartitePureState.maximally_entangled(4)
    alice = MeasurementSet.from_bases(_normalized_bases(_PM_ALICE))
    bob = MeasurementSet.from_bases(_normalized_bases(_PM_BOB))
    return born_behavior(state, alice, bob, exact=exact, cfg=cfg), state, alice, bob


def magic_square_win_probability(b: BehaviorTable):
    """Average over the nine (row, column) pairs of the probability the answers agree.

    Alice's label for row ``x`` has an entry for each column ``y`` and Bob's label for
    column ``y`` an entry for each row ``x``; the players win when those two entries match.
    """
    total = Fraction(0) if b.exact else 0.0
    per_pair = {}
    for x, y in itertools.product(range(3), repeat=2):
        w = Fraction(0) if b.exact else 0.0
        for a, la in enumerate(MAGIC_A_LABELS):
            for bb, lb in enumerate(MAGIC_B_LABELS):
                if la[y] == lb[x]:
                    w += b.probs[x, y, a, bb]
        per_pair[(x, y)] = w
        total += w
    return total / 9, per_pair
