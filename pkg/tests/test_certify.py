import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from fnl import bounds, certify
from fnl.antidist import Status
from fnl.errors import ResourceError, ValidationError
from fnl.config import Config
from fnl.mub import BasisFamily, mubs
from fnl.nonlocality import local_content_lp
from fnl.quantum import BipartitePureState, MeasurementSet, born_behavior, post_measurement_states

from conftest import random_unitary
from oracles import gram_norm_direct, lc_dual_linprog

PAULI_XYZ = BasisFamily((
    np.eye(2, dtype=complex),
    np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    np.array([[1, 1], [1j, -1j]], dtype=complex) / math.sqrt(2),
), "xyz")


def near_uniform(seed, d, spread):
    rng = np.random.default_rng(seed)
    lam = (1 - spread) * np.full(d, 1 / d) + spread * rng.dirichlet(np.ones(d))
    return np.sort(lam)[::-1]


@pytest.mark.parametrize("lam", [
    [0.25] * 4,
    [0.375] + [0.625 / 3] * 3,
    [0.37, 0.22, 0.21, 0.20],
])
def test_d4_region_certified(lam):
    cert = certify.certify_full_nonlocality(BipartitePureState.from_schmidt(lam), mubs(4), "frobenius")
    assert cert.certified
    assert len(cert.evidence) == 4**5
    assert cert.bob_setting_count == 4**5


def test_outside_bound_region_still_checked():
    # fails the max-overlap condition, yet the actual Gram norms all pass
    lam = [0.4, 0.2, 0.2, 0.2]
    assert not bounds.theorem3_condition(lam, 5).max_overlap
    cert = certify.certify_full_nonlocality(BipartitePureState.from_schmidt(lam), mubs(4), "frobenius")
    assert cert.certified


def test_qubit_pauli_not_certified():
    state = BipartitePureState.from_schmidt([0.6, 0.4])
    cert = certify.certify_full_nonlocality(state, PAULI_XYZ, "frobenius")
    assert cert.verdict is certify.Verdict.NOT_CERTIFIED
    assert len(cert.failures) == 8
    fam = post_measurement_states(state, certify.alice_measurements(state, PAULI_XYZ))
    overlaps = [abs(np.vdot(fam.states[0][0], fam.states[x][a])) for x in (1, 2) for a in (0, 1)]
    assert max(overlaps) == pytest.approx(math.sqrt(0.6), abs=1e-12)
    assert max(overlaps) > 0.5
    for e in cert.evidence:
        states = [fam.states[x][a] for x, a in enumerate(e.alpha)]
        assert e.gram_norm == pytest.approx(gram_norm_direct(states), abs=1e-12)


def test_qubit_pauli_sdp_rejects():
    state = BipartitePureState.from_schmidt([0.6, 0.4])
    cert = certify.certify_full_nonlocality(state, PAULI_XYZ, "auto")
    assert cert.verdict is certify.Verdict.NOT_CERTIFIED
    assert all(e.sdp.status is Status.NOT_ANTIDISTINGUISHABLE for e in cert.evidence)


def test_jobs_do_not_change_results():
    state = BipartitePureState.from_schmidt([0.6, 0.4])
    one = certify.certify_full_nonlocality(state, PAULI_XYZ, "sdp", jobs=1)
    two = certify.certify_full_nonlocality(state, PAULI_XYZ, "sdp", jobs=2)
    assert [e.alpha for e in one.evidence] == [e.alpha for e in two.evidence]
    assert [e.sdp.primal_value for e in one.evidence] == [e.sdp.primal_value for e in two.evidence]
    assert [e.sdp.status for e in one.evidence] == [e.sdp.status for e in two.evidence]


@pytest.mark.parametrize("lam, ok", [
    ([1 / 3] * 3, True),
    ([0.34, 0.33, 0.33], True),
    ([0.36, 0.32, 0.32], False),
])
def test_qutrit_five_set(lam, ok):
    cert = certify.qutrit_certify(BipartitePureState.from_schmidt(lam))
    assert len(cert.evidence) == 3**5
    assert cert.certified is ok


def test_qutrit_certify_needs_d3():
    with pytest.raises(ValidationError):
        certify.qutrit_certify(BipartitePureState.maximally_entangled(4))


def test_alpha_cap():
    state = BipartitePureState.maximally_entangled(4)
    with pytest.raises(ResourceError):
        certify.certify_full_nonlocality(state, mubs(4), cfg=Config(det_cap=100))


def test_excluded_outcomes_are_skipped():
    # rank-2 state in d = 3: the third computational outcome never occurs
    state = BipartitePureState.from_schmidt([0.5, 0.5, 0.0])
    cert = certify.certify_full_nonlocality(state, mubs(3), "frobenius")
    assert cert.excluded_outcomes == ((0, 2),)
    assert len(cert.evidence) == 2 * 3**3
    assert all(e.alpha[0] != 2 for e in cert.evidence)


@pytest.mark.slow
def test_measurements_zero_the_right_cells():
    state = BipartitePureState.maximally_entangled(4)
    alice = mubs(4).take(3)
    cert = certify.certify_full_nonlocality(state, alice, "auto", measurements=True)
    assert cert.certified
    assert 1 <= len(cert.bob_measurements) <= 64
    table, worst = certify.bob_behavior_check(state, alice, cert)
    assert worst <= 1e-6
    table.validate()
    # Bob's outcomes for alpha cover every x, so each strategy of Alice is excluded
    for e in cert.evidence:
        assert sorted(b for _, b, _, _ in e.zero_cells) == list(range(3))


@pytest.mark.parametrize("d, n, spread", [(3, 4, 0.0), (4, 5, 0.08), (4, 3, 0.0), (5, 6, 0.05), (5, 4, 0.05)])
def test_bound_pass_implies_certified(d, n, spread):
    for seed in range(3):
        lam = near_uniform(seed, d, spread)
        if not bounds.theorem3_condition(lam, n).gram_fmin:
            continue
        cert = certify.certify_full_nonlocality(BipartitePureState.from_schmidt(lam), mubs(d).take(n), "frobenius")
        assert cert.certified, (lam, cert.failures[:1])


@settings(max_examples=30)
@given(d=st.sampled_from([4, 5]), seed=st.integers(0, 10**6), spread=st.floats(0.0, 0.3))
def test_bound_pass_implies_certified_property(d, seed, spread):
    lam = near_uniform(seed, d, spread)
    assume(bounds.theorem3_condition(lam, d + 1).gram_fmin)
    cert = certify.certify_full_nonlocality(BipartitePureState.from_schmidt(lam), mubs(d), "frobenius")
    assert cert.certified


@settings(max_examples=40)
@given(d=st.integers(3, 8), seed=st.integers(0, 10**6))
def test_overlap_bounds_sound(d, seed):
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.dirichlet(np.full(d, rng.choice([0.5, 2.0, 10.0]))))[::-1]
    state = BipartitePureState.from_schmidt(lam)
    fam = post_measurement_states(state, certify.alice_measurements(state, mubs(d)))
    ob = bounds.overlap_bounds(lam)
    for x, y in itertools.combinations(range(len(fam.states)), 2):
        cap = ob.sqrt_lambda_max if x == 0 else ob.fmin
        for u in fam.states[x]:
            for v in fam.states[y]:
                if u is not None and v is not None:
                    assert abs(np.vdot(u, v)) <= cap + 1e-9
    assert ob.fmin <= ob.lmin_bound + 1e-12


@given(seed=st.integers(0, 10**6))
def test_certified_states_have_no_lc_bound(seed):
    lam = near_uniform(seed, 4, 0.1)
    cert = certify.certify_full_nonlocality(BipartitePureState.from_schmidt(lam), mubs(4), "frobenius")
    if cert.certified:
        assert bounds.lc_lower_bound(lam, "povm") == 0.0


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("d, settings_", [(2, 2), (2, 3), (3, 2)])
def test_lc_bounds_below_lp(seed, d, settings_):
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.dirichlet(np.ones(d) * 0.4))[::-1]
    if seed % 2:
        lam = np.sort(0.02 * lam + 0.98 * np.eye(d)[0])[::-1]
    state = BipartitePureState.from_schmidt(lam, random_unitary(rng, d), random_unitary(rng, d))
    alice = MeasurementSet.from_bases([random_unitary(rng, d) for _ in range(settings_)])
    bob = MeasurementSet.from_bases([random_unitary(rng, d) for _ in range(settings_)])
    table = born_behavior(state, alice, bob)
    lc = local_content_lp(table, exact=False).lc
    assert lc == pytest.approx(lc_dual_linprog(table.probs), abs=1e-7)
    proj = bounds.lc_lower_bound(lam, "projective")
    assert bounds.lc_lower_bound(lam, "povm") <= proj <= lc + 1e-9
