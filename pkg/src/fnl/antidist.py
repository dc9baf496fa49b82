"""Antidistinguishability: Gram/Frobenius criterion, exclusion SDP, measurement merging."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import numkit
from .config import DEFAULT, Config
from .errors import NotAntidistinguishingError, ValidationError
from .quantum import Povm


class Status(str, enum.Enum):
    ANTIDISTINGUISHABLE = "antidistinguishable"
    NOT_ANTIDISTINGUISHABLE = "not_antidistinguishable"
    UNDECIDED = "undecided"


def _unit_vectors(states, cfg: Config) -> np.ndarray:
    vs = [np.asarray(s, dtype=complex).ravel() for s in states]
    if not vs:
        raise ValidationError("need at least one state")
    d = vs[0].size
    for i, v in enumerate(vs):
        if v.size != d:
            raise ValidationError(f"state {i} has dimension {v.size}, expected {d}")
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > cfg.unit_norm_tol:
            raise ValidationError(f"state {i} is not normalized: norm = {nrm!r}")
    return np.array(vs)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def frobenius(self) -> float:
        return numkit.frobenius_norm(self.entries)


def gram(states, cfg: Config = DEFAULT) -> GramMatrix:
    """``G[i, j] = <psi_i|psi_j>`` for unit vectors."""
    v = _unit_vectors(states, cfg)
    g = v.conj() @ v.T
    g.setflags(write=False)
    return GramMatrix(g)


@dataclass(frozen=True)
class FrobeniusVerdict:
    sufficient: bool
    norm: float
    threshold: float
    max_overlap: float
    pairwise_threshold: float

    @property
    def label(self) -> str:
        return "sufficient_yes" if self.sufficient else "inconclusive"


def frobenius_criterion(g: GramMatrix, cfg: Config = DEFAULT) -> FrobeniusVerdict:
    """Sufficient test ``||G||_F <= n / sqrt(2)``; also reports the pairwise form."""
    n = g.n
    norm = g.frobenius
    thr = n / np.sqrt(2.0)
    off = np.abs(g.entries - np.diag(np.diag(g.entries)))
    pair_thr = np.sqrt((n - 2) / (2 * n - 2)) if n >= 2 else 0.0
    return FrobeniusVerdict(
        sufficient=bool(norm <= thr + cfg.threshold_slack),
        norm=norm,
        threshold=float(thr),
        max_overlap=float(off.max(initial=0.0)),
        pairwise_threshold=float(pair_thr),
    )


@dataclass(frozen=True, eq=False)
class SdpResult:
    primal_value: float
    measurement: Povm
    dual_value: float
    dual_witness: np.ndarray
    status: Status
    iterations: int
    per_state: tuple

    @property
    def gap(self) -> float:
        return self.primal_value - self.dual_value


def _as_density(states, cfg: Config) -> np.ndarray:
    rhos = []
    for i, s in enumerate(states):
        a = np.asarray(s, dtype=complex)
        if a.ndim == 1 or (a.ndim == 2 and 1 in a.shape):
            v = a.ravel()
            nrm = np.linalg.norm(v)
            if abs(nrm - 1.0) > cfg.unit_norm_tol:
                raise ValidationError(f"state {i} is not normalized: norm = {nrm!r}")
            rhos.append(np.outer(v, v.conj()))
        else:
            numkit.check_hermitian(a, 1e-10)
            tr = np.trace(a).real
            if abs(tr - 1.0) > cfg.normalization_tol or numkit.psd_min_eig(a) < -cfg.povm_psd_tol:
                raise ValidationError(f"state {i} is not a density operator (trace {tr!r})")
            rhos.append((a + a.conj().T) / 2)
    d = {r.shape for r in rhos}
    if len(d) != 1:
        raise ValidationError(f"states have different dimensions {sorted(d)}")
    return np.array(rhos)


def _herm(a):
    return (a + np.swapaxes(a, -1, -2).conj()) / 2


def _psd_part(a):
    w, v = np.linalg.eigh(_herm(a))
    return (v * np.clip(w, 0.0, None)[..., None, :]) @ np.swapaxes(v, -1, -2).conj()


def _inv_sqrt(s, floor=1e-13):
    w, v = np.linalg.eigh(_herm(s))
    keep = w > floor
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    return (v * inv) @ v.conj().T, v[:, ~keep]


def _kernel_projectors(rhos, tol=1e-10):
    """Projector onto the kernel of each state, used to polish near-optimal measurements."""
    out = []
    for r in rhos:
        w, v = np.linalg.eigh(r)
        k = v[:, w <= tol]
        out.append(k @ k.conj().T)
    return np.array(out)


def _normalize_povm(z, rhos):
    """Map PSD operators to an exact POVM via ``S^{-1/2} Z_i S^{-1/2}``, ``S = sum_i Z_i``."""
    s = z.sum(axis=0)
    t, null = _inv_sqrt(s)
    m = t @ z @ t
    if null.shape[1]:
        # directions no element covers go to the state that overlaps them least
        p0 = null @ null.conj().T
        i = int(np.argmin([np.trace(p0 @ r).real for r in rhos]))
        m[i] = m[i] + p0
    # tiny negative eigenvalues from rounding
    return _psd_part(_herm(m))


def _polish(m, kernels, rounds=4):
    """Compress each element onto the kernel of its state and renormalize.

    The residual overlap ``Tr[M_i rho_i]`` is roughly squared per round.
    """
    for _ in range(rounds):
        z = kernels @ m @ kernels
        s = z.sum(axis=0)
        if np.linalg.eigvalsh(_herm(s))[0] <= 1e-12:
            break
        t, _ = _inv_sqrt(s)
        m = _herm(t @ z @ t)
    return m


def _primal_value(m, rhos):
    return float(np.einsum("kij,kji->", m, rhos).real)


def _feasible_dual(y, rhos):
    """Shift ``y`` down by a multiple of the identity until ``y <= rho_i`` for all ``i``."""
    y = _herm(y)
    lo = min(np.linalg.eigvalsh(_herm(r - y))[0] for r in rhos)
    if lo < 0:
        y = y + lo * np.eye(y.shape[0])
    return y, float(np.trace(y).real)


def solve_exclusion_sdp(states, tol: float | None = None, cfg: Config = DEFAULT,
                        max_iter: int | None = None, seed: int = 0) -> SdpResult:
    """Minimize ``sum_i Tr[M_i rho_i]`` over POVMs ``{M_i}`` by ADMM.

    The iterates alternate a closed-form projection onto ``sum_i M_i = I`` with an
    eigenvalue projection onto the PSD cone. Bounds reported are both checkable: the
    primal value comes from an exact POVM, the dual from ``Y`` shifted until
    ``Y <= rho_i`` holds for every state.
    """
    tol = cfg.sdp_tol if tol is None else tol
    max_iter = cfg.sdp_max_iter if max_iter is None else max_iter
    rhos = _as_density(states, cfg)
    n, d = rhos.shape[0], rhos.shape[1]
    if n < 2:
        raise ValidationError("need at least two states")
    if d > cfg.dim_cap:
        raise ValidationError(f"dimension {d} exceeds cap {cfg.dim_cap}")
    eye = np.eye(d)
    kernels = _kernel_projectors(rhos)
    has_kernel = all(np.trace(k).real > 0.5 for k in kernels)

    rng = np.random.default_rng(seed)
    z = np.repeat(eye[None] / n, n, axis=0)
    z = z + 1e-3 * _herm(rng.normal(size=z.shape) + 1j * rng.normal(size=z.shape))
    z = _psd_part(z)
    u = np.zeros_like(z)
    pen = 1.0
    best_m, best_p = None, np.inf
    best_y, best_dv = np.zeros((d, d), dtype=complex), -np.inf
    it = 0
    check_every = 20
    while it < max_iter:
        it += 1
        v = z - u - rhos / pen
        x = v - (v.sum(axis=0) - eye)[None] / n
        y_aff = (rhos + pen * (x - z + u)).mean(axis=0)
        z_old = z
        z = _psd_part(x + u)
        u = u + x - z

        if it % check_every == 0 or it == max_iter:
            m = _normalize_povm(z, rhos)
            if has_kernel:
                m = _polish(m, kernels)
            pv = _primal_value(m, rhos)
            if pv < best_p:
                best_p, best_m = pv, m
            yv, dv = _feasible_dual(y_aff, rhos)
            if dv > best_dv:
                best_y, best_dv = yv, dv
            if best_p <= tol / 10:
                break
            if best_dv >= tol and best_p - best_dv <= max(tol, 1e-9) * 1e-1:
                break
            r = np.linalg.norm(x - z)
            s = pen * np.linalg.norm(z - z_old)
            if r > 10 * s:
                pen *= 2.0
                u /= 2.0
            elif s > 10 * r:
                pen /= 2.0
                u *= 2.0

    # Y = 0 is always dual feasible and the value can never be negative
    if best_dv < 0:
        best_y, best_dv = np.zeros((d, d), dtype=complex), 0.0
    per_state = tuple(float(np.trace(best_m[i] @ rhos[i]).real) for i in range(n))
    measurement = Povm(tuple(best_m))
    if best_p <= tol and max(per_state) <= tol:
        status = Status.ANTIDISTINGUISHABLE
    elif best_dv >= tol:
        status = Status.NOT_ANTIDISTINGUISHABLE
    else:
        status = Status.UNDECIDED
    return SdpResult(
        primal_value=max(best_p, 0.0) if best_p > -1e-12 else best_p,
        measurement=measurement,
        dual_value=best_dv,
        dual_witness=best_y,
        status=status,
        iterations=it,
        per_state=per_state,
    )


def verify_dual_witness(y, states, cfg: Config = DEFAULT) -> bool:
    rhos = _as_density(states, cfg)
    return all(np.linalg.eigvalsh(_herm(r - y))[0] >= -cfg.dual_psd_tol for r in rhos)


def is_antidistinguishing(measurement: Povm, states, tol: float = DEFAULT.sdp_tol,
                          cfg: Config = DEFAULT) -> bool:
    """Every element annihilates at least one state, up to ``tol``."""
    rhos = _as_density(states, cfg)
    return all(
        min(np.trace(e @ r).real for r in rhos) <= tol for e in measurement.elements
    )


def merge_to_exact_form(measurement: Povm, states, tol: float = DEFAULT.sdp_tol,
                        cfg: Config = DEFAULT) -> Povm:
    """Group elements by the first state they annihilate, giving one outcome per state."""
    rhos = _as_density(states, cfg)
    n = rhos.shape[0]
    d = measurement.dim
    if rhos.shape[1] != d:
        raise ValidationError(f"measurement acts on {d}, states on {rhos.shape[1]}")
    merged = [np.zeros((d, d), dtype=complex) for _ in range(n)]
    for k, e in enumerate(measurement.elements):
        hits = [i for i in range(n) if np.trace(e @ rhos[i]).real <= tol]
        if not hits:
            raise NotAntidistinguishingError(
                f"measurement element {k} annihilates none of the {n} states", element=k
            )
        merged[hits[0]] = merged[hits[0]] + e
    return Povm(tuple(merged))
