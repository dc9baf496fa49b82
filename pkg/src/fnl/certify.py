"""Full-nonlocality certification: Alice measures a basis family, Bob must exclude every alpha-set.

For each choice ``alpha = (alpha_1, ..., alpha_n)`` of one realizable outcome per
setting, Bob's post-measurement states ``{psi_{alpha_x|x}}`` must be antidistinguishable.
Bob's setting for ``alpha`` answers ``b = x`` only when Alice cannot have obtained
``alpha_x`` on setting ``x``, which zeroes ``p(alpha_x, x | x, alpha)``. Every deterministic
strategy then hits a zero cell.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import antidist, bounds
from .config import DEFAULT, Config
from .errors import ResourceError, ValidationError
from .mub import BasisFamily, qutrit_five_set
from .quantum import BipartitePureState, MeasurementSet, Povm, post_measurement_states

METHODS = ("frobenius", "sdp", "auto")


class Verdict(str, enum.Enum):
    CERTIFIED = "certified"
    NOT_CERTIFIED = "not_certified"
    UNDECIDED = "undecided"


@dataclass(frozen=True, eq=False)
class AlphaEvidence:
    alpha: tuple
    method: str
    passed: bool
    gram_norm: float
    sdp: antidist.SdpResult | None
    bob_setting: int
    reason: str | None = None

    @property
    def zero_cells(self) -> tuple:
        """Cells ``(a, b, x, y)`` that vanish when Bob measures setting ``y`` for this alpha."""
        return tuple((a, x, x, self.bob_setting) for x, a in enumerate(self.alpha))


@dataclass(frozen=True, eq=False)
class FnlCertificate:
    d: int
    spectrum: tuple
    n: int
    m_a: int
    method: str
    verdict: Verdict
    evidence: tuple
    failures: tuple
    excluded_outcomes: tuple
    bob_measurements: tuple = ()
    frobenius_threshold: float = 0.0

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    @property
    def bob_setting_count(self) -> int:
        return len({e.bob_setting for e in self.evidence})


def alice_measurements(state: BipartitePureState, alice: BasisFamily) -> MeasurementSet:
    """Alice's bases expressed in the state's Schmidt frame: ``|A_{a|x}> = basis_a U_x |a>``."""
    if alice.dim != state.dim_a:
        raise ValidationError(f"bases act on dimension {alice.dim}, state has d_A = {state.dim_a}")
    return MeasurementSet.from_bases([state.basis_a @ u for u in alice.bases])


def copies_family(alice: BasisFamily, k: int) -> BasisFamily:
    """Setting ``x`` measures ``U_x`` on each of ``k`` copies."""
    bases = []
    for u in alice.bases:
        v = u
        for _ in range(k - 1):
            v = np.kron(v, u)
        bases.append(v)
    return BasisFamily(tuple(bases), f"{alice.name}^{k}")


def _state_array(fam, d):
    n = fam.settings
    m = max(len(row) for row in fam.states)
    s = np.zeros((n, m, d), dtype=complex)
    for x, row in enumerate(fam.states):
        for a, v in enumerate(row):
            if v is not None:
                s[x, a] = v
    return s


def _gram_norms(s: np.ndarray) -> np.ndarray:
    """``||G_alpha||_F`` for every alpha, as an array of shape ``(m,) * n``."""
    n, m, _ = s.shape
    ov = np.abs(np.einsum("xai,ybi->xayb", s.conj(), s)) ** 2
    sq = np.full((m,) * n, float(n))
    for x in range(n):
        for y in range(x + 1, n):
            shape = [1] * n
            shape[x], shape[y] = m, m
            sq = sq + 2 * ov[x, :, y, :].reshape(shape)
    return np.sqrt(sq)


def _sdp_job(args):
    states, tol, seed, cfg = args
    return antidist.solve_exclusion_sdp(states, tol=tol, cfg=cfg, seed=seed)


def _run_sdps(jobs_in, jobs: int):
    if jobs > 1 and len(jobs_in) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_sdp_job, jobs_in, chunksize=max(1, len(jobs_in) // (4 * jobs))))
    return [_sdp_job(j) for j in jobs_in]


def _dedup(povms, tol=1e-6):
    """Greedy grouping of near-identical measurements; returns representatives and an index map."""
    reps, ids = [], []
    for p in povms:
        e = np.array(p.elements)
        for i, r in enumerate(reps):
            if np.abs(np.array(r.elements) - e).max() <= tol:
                ids.append(i)
                break
        else:
            ids.append(len(reps))
            reps.append(p)
    return reps, ids


def certify_full_nonlocality(state: BipartitePureState, alice: BasisFamily, method: str = "auto",
                             tol: float | None = None, measurements: bool = False, jobs: int = 1,
                             seed: int = 0, cfg: Config = DEFAULT) -> FnlCertificate:
    """Check antidistinguishability of Bob's states for every realizable alpha-set.

    ``method`` picks the evidence: ``frobenius`` (sufficient Gram test only), ``sdp``
    (exclusion SDP for every set) or ``auto`` (Gram test first, SDP where it is
    inconclusive). With ``measurements=True`` Bob's exclusion measurements are extracted
    and near-duplicates merged into shared settings.
    """
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")
    tol = cfg.sdp_tol if tol is None else tol
    meas = alice_measurements(state, alice)
    n, m = alice.count, alice.dim
    if m**n > cfg.det_cap:
        raise ResourceError(f"{m}^{n} = {m**n} alpha-sets exceed the cap {cfg.det_cap}")
    if n < 2:
        raise ValidationError("need at least two settings for Alice")
    fam = post_measurement_states(state, meas, cfg)
    real = [fam.realizable(x) for x in range(n)]
    alphas = list(itertools.product(*real))
    s = _state_array(fam, state.dim_b)

    thr = n / math.sqrt(2.0)
    norms = _gram_norms(s)
    passed = {a: bool(norms[a] <= thr + cfg.threshold_slack) for a in alphas}

    need_sdp = [a for a in alphas if method == "sdp" or (method == "auto" and not passed[a])
                or (measurements and method != "frobenius")]
    sdp_results = dict(zip(need_sdp, _run_sdps(
        [([s[x, ax] for x, ax in enumerate(a)], tol, seed, cfg) for a in need_sdp], jobs)))

    povms = {}
    if measurements:
        for a in alphas:
            r = sdp_results.get(a)
            if r is None or r.status is not antidist.Status.ANTIDISTINGUISHABLE:
                continue
            states = [s[x, ax] for x, ax in enumerate(a)]
            povms[a] = antidist.merge_to_exact_form(r.measurement, states, tol=max(10 * tol, 1e-6), cfg=cfg)
    reps, ids = _dedup([povms[a] for a in alphas if a in povms])
    setting_of = dict(zip([a for a in alphas if a in povms], ids))

    evidence, failures = [], []
    undecided = False
    next_setting = len(reps)
    for i, a in enumerate(alphas):
        r = sdp_results.get(a)
        if method == "frobenius" or (method == "auto" and passed[a]):
            ok, used = passed[a], "frobenius"
            reason = None if ok else f"Gram norm {norms[a]:.6g} exceeds {thr:.6g}"
        else:
            used = "sdp"
            ok = r.status is antidist.Status.ANTIDISTINGUISHABLE
            if r.status is antidist.Status.UNDECIDED:
                undecided = True
            reason = None if ok else f"exclusion SDP {r.status.value} (primal {r.primal_value:.3e}, dual {r.dual_value:.3e})"
        if a in setting_of:
            y = setting_of[a]
        else:
            y, next_setting = next_setting, next_setting + 1
        evidence.append(AlphaEvidence(a, used, ok, float(norms[a]), r, y, reason))
        if not ok:
            failures.append((a, reason))

    if not failures:
        verdict = Verdict.CERTIFIED
    elif undecided and all("undecided" in f[1] for f in failures):
        verdict = Verdict.UNDECIDED
    else:
        verdict = Verdict.NOT_CERTIFIED
    return FnlCertificate(
        d=state.dim, spectrum=tuple(map(float, state.coeffs)), n=n, m_a=m, method=method,
        verdict=verdict, evidence=tuple(evidence), failures=tuple(failures),
        excluded_outcomes=tuple(fam.excluded), bob_measurements=tuple(reps), frobenius_threshold=thr,
    )


def qutrit_certify(state: BipartitePureState, method: str = "frobenius", cfg: Config = DEFAULT,
                   **kw) -> FnlCertificate:
    if state.dim != 3:
        raise ValidationError(f"qutrit certification needs d = 3, got {state.dim}")
    return certify_full_nonlocality(state, qutrit_five_set(), method=method, cfg=cfg, **kw)


def bob_behavior_check(state: BipartitePureState, alice: BasisFamily, cert: FnlCertificate,
                       cfg: Config = DEFAULT):
    """Born behavior with Alice's bases and Bob's extracted settings; returns ``(table, max zero-cell value)``."""
    from .quantum import born_behavior

    if not cert.bob_measurements:
        raise ValidationError("certificate carries no Bob measurements")
    bob = MeasurementSet(tuple(cert.bob_measurements))
    table = born_behavior(state, alice_measurements(state, alice), bob, cfg=cfg)
    worst = max(table.probs[x, e.bob_setting, a, b] for e in cert.evidence for a, b, x, _ in e.zero_cells)
    return table, float(worst)


__all__ = [
    "Verdict", "AlphaEvidence", "FnlCertificate", "certify_full_nonlocality", "qutrit_certify",
    "alice_measurements", "copies_family", "bob_behavior_check", "Povm",
] + [k for k in ("theorem3_condition", "overlap_bounds", "qutrit_condition", "activation_copies",
                 "lc_lower_bound", "BoundReport")]

theorem3_condition = bounds.theorem3_condition
overlap_bounds = bounds.overlap_bounds
qutrit_condition = bounds.qutrit_condition
activation_copies = bounds.activation_copies
lc_lower_bound = bounds.lc_lower_bound
BoundReport = bounds.BoundReport
