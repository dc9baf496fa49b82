import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fnl import nonlocality as nl
from fnl import simplex
from fnl.config import Config
from fnl.errors import ResourceError, ValidationError
from fnl.quantum import BehaviorTable, check_nonsignaling

from oracles import deterministic_table, lc_dual_linprog

F = Fraction


def exact_table(p):
    out = np.empty(np.shape(p), dtype=object)
    for idx, v in np.ndenumerate(np.asarray(p, dtype=object)):
        out[idx] = F(v)
    return BehaviorTable(out, exact=True)


def pr_variant(r, s, t):
    """Extremal no-signalling box ``a + b = xy + r x + s y + t (mod 2)``."""
    p = np.zeros((2, 2, 2, 2), dtype=object)
    for x, y, a, b in itertools.product(range(2), repeat=4):
        p[x, y, a, b] = F(1, 2) if (a ^ b) == ((x & y) ^ (r & x) ^ (s & y) ^ t) else F(0)
    return p


def det_exact(alpha, beta, m_a=2, m_b=2):
    return np.vectorize(F, otypes=[object])(deterministic_table(alpha, beta, m_a, m_b).astype(int))


# enumeration --------------------------------------------------------------

@pytest.mark.parametrize("dims, count", [((2, 2, 2, 2), 16), ((1, 1, 3, 3), 9), ((3, 3, 4, 4), 4096)])
def test_enumeration_counts(dims, count):
    strategies = list(nl.enumerate_deterministic(*dims))
    assert len(strategies) == count == len(set(strategies))
    assert strategies == sorted(strategies)


def test_enumeration_cap():
    with pytest.raises(ResourceError, match="4096"):
        list(nl.enumerate_deterministic(3, 3, 4, 4, Config(det_cap=100)))


# local content ------------------------------------------------------------

def test_pr_box_table():
    p = nl.pr_box()
    # labels counted from one in the table: p(1,1|1,1) and p(1,2|1,2)
    assert p.probs[0, 0, 0, 0] == F(1, 2)
    assert p.probs[0, 1, 0, 1] == 0
    assert check_nonsignaling(p).max_residual == 0
    r = nl.local_content_lp(p)
    assert r.lc == 0 and r.exact and r.certified
    assert r.weights == {}


@pytest.mark.parametrize("alpha, beta", [((0, 1), (1, 1)), ((1, 0, 1), (0, 0)), ((0,), (2,))])
def test_deterministic_behavior_has_full_lc(alpha, beta):
    t = exact_table(deterministic_table(alpha, beta, 3, 3))
    r = nl.local_content_lp(t)
    assert r.lc == 1
    assert r.weights == {nl.DeterministicStrategy(alpha, beta): 1}
    assert r.residual_behavior is None


def test_quarter_mixture_against_oracle():
    d = det_exact((0, 1), (1, 0))
    p = F(1, 4) * d + F(3, 4) * pr_variant(0, 0, 0)
    t = BehaviorTable(p, exact=True)
    r = nl.local_content_lp(t)
    assert float(r.lc) == pytest.approx(lc_dual_linprog(t.as_float()), abs=1e-9)
    assert r.lc >= F(1, 4)


def _check_decomposition(t, r):
    local = np.zeros(t.probs.shape, dtype=object)
    local[...] = F(0)
    for s, w in r.weights.items():
        assert w >= 0
        for a, b, x, y in s.cells():
            local[x, y, a, b] += w
    assert sum(r.weights.values()) == r.lc
    assert all(l <= p for l, p in zip(local.ravel(), t.probs.ravel()))
    if r.lc < 1:
        recon = local + (1 - r.lc) * r.residual_behavior.probs
        assert (recon == t.probs).all()


def _rational_ns_table(seed):
    rng = np.random.default_rng(seed)
    vertices = [det_exact(a, b) for a in itertools.product(range(2), repeat=2)
                for b in itertools.product(range(2), repeat=2)]
    vertices += [pr_variant(*rst) for rst in itertools.product(range(2), repeat=3)]
    k = rng.integers(1, 4)
    pick = rng.choice(len(vertices), size=k, replace=False)
    w = [F(int(v)) for v in rng.integers(1, 6, size=k)]
    total = sum(w)
    return BehaviorTable(sum(wi / total * vertices[i] for wi, i in zip(w, pick)), exact=True)


@settings(max_examples=40)
@given(seed=st.integers(0, 10**6))
def test_lp_properties_on_rational_tables(seed):
    t = _rational_ns_table(seed)
    r = nl.local_content_lp(t)
    assert r.certified
    _check_decomposition(t, r)
    assert float(r.lc) == pytest.approx(lc_dual_linprog(t.as_float()), abs=1e-9)
    assert nl.zero_pattern_check(t).fully_nonlocal == (r.lc == 0)
    for s in nl.enumerate_deterministic(2, 2, 2, 2):
        assert nl.lower_bound_from_strategy(t, s) <= r.lc
    fl = nl.local_content_lp(BehaviorTable(t.as_float()))
    assert fl.lc == pytest.approx(float(r.lc), abs=1e-9)


def test_lp_rejects_signaling():
    p = np.full((2, 2, 2, 2), 0.25)
    p[0, 0] = [[0.5, 0.0], [0.0, 0.5]]
    p[0, 1] = [[0.5, 0.5], [0.0, 0.0]]
    with pytest.raises(ValidationError, match="signaling"):
        nl.local_content_lp(BehaviorTable(p))


def test_exact_flag_snaps_float_tables():
    r = nl.local_content_lp(BehaviorTable(nl.pr_box().as_float()), exact=True)
    assert r.exact and r.lc == 0


def test_simplex_small_packing():
    # max w0 + w1 + w2 with rows {0,1}, {1,2}, {0,2} <= 1: optimum 3/2
    cols = [[0, 1], [1, 2], [0, 2]]
    ex = simplex.solve_exact(cols, [1, 1, 1])
    fl = simplex.solve_float(cols, [1.0, 1.0, 1.0])
    assert ex.objective == F(3, 2)
    assert fl.objective == pytest.approx(1.5)
    assert sum(ex.duals) == F(3, 2)


# zero patterns and functionals -------------------------------------------

def test_pr_zero_pattern():
    z = nl.zero_pattern_check(nl.pr_box())
    assert z.fully_nonlocal and z.excluded_count == 16
    assert len(z.zeros) == 8
    for s, cell in z.witnesses.items():
        a, b, x, y = cell
        assert s.alpha[x] == a and s.beta[y] == b and nl.pr_box().probs[x, y, a, b] == 0


def test_white_noise():
    t = BehaviorTable(np.full((2, 3, 2, 3), 1 / 6))
    z = nl.zero_pattern_check(t)
    assert not z.fully_nonlocal and not z.zeros
    s = nl.DeterministicStrategy((0, 1), (2, 0, 1))
    assert nl.lower_bound_from_strategy(t, s) == pytest.approx(1 / 6)
    f = nl.bell_functional_from_zeros(t)
    assert f.w_local == 0 and not f.coeffs.any()


def test_lower_bound_examples():
    s = nl.DeterministicStrategy((1, 0), (0, 1))
    assert nl.lower_bound_from_strategy(exact_table(deterministic_table(s.alpha, s.beta, 2, 2)), s) == 1
    for s in nl.enumerate_deterministic(2, 2, 2, 2):
        assert nl.lower_bound_from_strategy(nl.pr_box(), s) == 0


def test_pr_functional():
    f = nl.bell_functional_from_zeros(nl.pr_box())
    assert f.w_ns == 0 and f.w_local == -1
    # brute-force maximum over the 16 strategies
    best = max(f.value(deterministic_table(s.alpha, s.beta, 2, 2)) for s in nl.enumerate_deterministic(2, 2, 2, 2))
    assert best == f.w_local
    assert f.value(nl.pr_box().as_float()) == 0
    for rst in itertools.product(range(2), repeat=3):
        assert f.value(pr_variant(*rst).astype(float)) <= 0


# Peres-Mermin ---------------------------------------------------------------

@pytest.fixture(scope="module")
def magic():
    return nl.peres_mermin_behavior()


def test_magic_square_values(magic):
    b = magic[0]
    win, per_pair = nl.magic_square_win_probability(b)
    assert win == 1 and all(v == 1 for v in per_pair.values())
    assert set(b.probs.ravel()) == {F(0), F(1, 8)}
    assert check_nonsignaling(b).max_residual == 0


def test_magic_square_parities():
    for la in nl.MAGIC_A_LABELS:
        assert la.count("-") % 2 == 0
    for lb in nl.MAGIC_B_LABELS:
        assert lb.count("-") % 2 == 1


def test_magic_square_table_section(magic):
    b = magic[0]
    # Bob's second column against the strategy alpha = [+++, -+-, +++]
    np.testing.assert_array_equal(b.probs[0, 1, 0], [0, 0, F(1, 8), F(1, 8)])
    assert b.probs[1, 1, 2, 2] == 0
    assert b.probs[2, 1, 0, 3] == 0


def test_magic_square_fully_nonlocal(magic):
    b = magic[0]
    assert nl.zero_pattern_check(b).fully_nonlocal
    assert nl.bell_functional_from_zeros(b).w_local <= -1


@pytest.mark.slow
def test_magic_square_lc_zero(magic):
    r = nl.local_content_lp(magic[0])
    assert r.lc == 0 and r.certified
