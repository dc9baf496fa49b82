"""States, measurements, Born-rule behaviors and Bob's post-measurement states."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from . import numkit
from .config import DEFAULT, Config
from .errors import ResourceError, UnsupportedError, ValidationError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BipartitePureState:
    """A pure state ``sum_i sqrt(coeffs[i]) |basis_a[:, i]> |basis_b[:, i]>``."""

    coeffs: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValidationError("Schmidt coefficients must be a non-empty list")
        if np.any(c < -1e-15):
            raise ValidationError(f"negative Schmidt coefficient {c.min()!r}")
        if abs(c.sum() - 1.0) > DEFAULT.unit_norm_tol:
            raise ValidationError(f"Schmidt coefficients sum to {c.sum()!r}, not 1")
        if np.any(np.diff(c) > 1e-15):
            raise ValidationError("Schmidt coefficients must be sorted descending")
        for name in ("basis_a", "basis_b"):
            u = np.asarray(getattr(self, name), dtype=complex)
            if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < c.size:
                raise ValidationError(f"{name} must be a square matrix of size >= {c.size}")
            if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > 1e-9:
                raise ValidationError(f"{name} is not unitary")
            object.__setattr__(self, name, _frozen(u))
        object.__setattr__(self, "coeffs", _frozen(np.clip(c, 0.0, None)))

    @classmethod
    def from_schmidt(cls, coeffs, basis_a=None, basis_b=None) -> "BipartitePureState":
        """Build from coefficients in any order; bases default to the computational basis."""
        c = np.asarray(coeffs, dtype=float)
        d = c.size
        ua = np.eye(d, dtype=complex) if basis_a is None else np.asarray(basis_a, dtype=complex)
        ub = np.eye(d, dtype=complex) if basis_b is None else np.asarray(basis_b, dtype=complex)
        order = np.argsort(-c, kind="stable")
        ua = ua.copy()
        ub = ub.copy()
        ua[:, :d] = ua[:, order]
        ub[:, :d] = ub[:, order]
        return cls(c[order], ua, ub)

    @classmethod
    def from_vector(cls, v, dim_a: int | None = None, dim_b: int | None = None) -> "BipartitePureState":
        coeffs, ua, ub = numkit.schmidt_decompose(v, dim_a, dim_b)
        return cls(coeffs, ua, ub)

    @classmethod
    def maximally_entangled(cls, d: int) -> "BipartitePureState":
        return cls.from_schmidt(np.full(d, 1.0 / d))

    @property
    def dim_a(self) -> int:
        return self.basis_a.shape[0]

    @property
    def dim_b(self) -> int:
        return self.basis_b.shape[0]

    @property
    def dim(self) -> int:
        return self.dim_a

    @property
    def lambda_max(self) -> float:
        return float(self.coeffs[0])

    @property
    def lambda_min(self) -> float:
        return float(self.coeffs[-1])

    def amplitudes(self) -> np.ndarray:
        """Matrix ``Psi`` with ``|psi> = sum_ij Psi[i, j] |i>|j>``."""
        k = self.coeffs.size
        return (self.basis_a[:, :k] * np.sqrt(self.coeffs)) @ self.basis_b[:, :k].T

    def vector(self) -> np.ndarray:
        return self.amplitudes().ravel()


@dataclass(frozen=True, eq=False)
class Povm:
    elements: tuple
    vectors: tuple | None = None

    def __post_init__(self):
        els = tuple(_frozen(numkit.as_matrix(e)) for e in self.elements)
        if not els:
            raise ValidationError("a POVM needs at least one element")
        d = els[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for k, e in enumerate(els):
            if e.shape != (d, d):
                raise ValidationError(f"element {k} has shape {e.shape}, expected {(d, d)}")
            numkit.check_hermitian(e, 1e-10)
            lo = numkit.psd_min_eig(e)
            if lo < -DEFAULT.povm_psd_tol:
                raise ValidationError(f"element {k} is not PSD: min eigenvalue {lo:.3e}")
            total += e
        dev = np.abs(total - np.eye(d)).max()
        if dev > DEFAULT.povm_sum_tol:
            raise ValidationError(f"POVM elements sum to identity only within {dev:.3e}")
        object.__setattr__(self, "elements", els)
        if self.vectors is not None:
            object.__setattr__(self, "vectors", tuple(_frozen(np.asarray(v, dtype=complex)) for v in self.vectors))

    @classmethod
    def from_vectors(cls, vectors) -> "Povm":
        vs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
        return cls(tuple(np.outer(v, v.conj()) for v in vs), tuple(vs))

    @classmethod
    def from_basis(cls, u) -> "Povm":
        u = numkit.as_matrix(u)
        return cls.from_vectors([u[:, a] for a in range(u.shape[1])])

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.elements)

    def rank1_vectors(self, tol: float = 1e-9) -> list[np.ndarray]:
        """Vectors ``v_a`` with ``E_a = |v_a><v_a|``; raises if an element has rank above one."""
        if self.vectors is not None:
            return list(self.vectors)
        out = []
        for k, e in enumerate(self.elements):
            w, v = np.linalg.eigh(e)
            if w[-2:-1].size and w[-2] > tol:
                raise UnsupportedError(f"POVM element {k} has rank > 1 (second eigenvalue {w[-2]:.3e})")
            out.append(np.sqrt(max(w[-1], 0.0)) * v[:, -1])
        return out


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    povms: tuple

    def __post_init__(self):
        povms = tuple(self.povms)
        if not povms:
            raise ValidationError("a measurement set needs at least one setting")
        dims = {p.dim for p in povms}
        if len(dims) != 1:
            raise ValidationError(f"POVMs act on different dimensions {sorted(dims)}")
        object.__setattr__(self, "povms", povms)

    @classmethod
    def from_bases(cls, bases) -> "MeasurementSet":
        return cls(tuple(Povm.from_basis(u) for u in bases))

    @property
    def settings(self) -> int:
        return len(self.povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def outcomes(self) -> int:
        counts = {p.outcomes for p in self.povms}
        if len(counts) != 1:
            raise ValidationError(f"settings have different outcome counts {sorted(counts)}")
        return counts.pop()


@dataclass(frozen=True, eq=False)
class PostMeasurementFamily:
    """Bob's normalized conditional states ``states[x][a]`` and Alice's outcome weights.

    Zero-weight outcomes have ``states[x][a] is None`` and are listed in ``excluded``.
    """

    states: tuple
    weights: tuple
    excluded: tuple = ()

    def realizable(self, x: int) -> list[int]:
        return [a for a, s in enumerate(self.states[x]) if s is not None]

    @property
    def settings(self) -> int:
        return len(self.states)


@dataclass(frozen=True, eq=False)
class BehaviorTable:
    """Conditional distribution ``probs[x, y, a, b] = p(a, b | x, y)``.

    ``exact`` tables hold :class:`fractions.Fraction` entries in an object array.
    """

    probs: np.ndarray
    exact: bool = False
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=object if self.exact else float)
        if p.ndim != 4:
            raise ValidationError(f"behavior must be 4-d (x, y, a, b), got shape {p.shape}")
        if self.exact:
            p = np.vectorize(Fraction, otypes=[object])(p) if p.size else p
        object.__setattr__(self, "probs", _frozen(p))
        if self.check:
            self.validate()

    def validate(self, cfg: Config = DEFAULT) -> None:
        p = self.probs
        if self.exact:
            if any(v < 0 for v in p.flat):
                raise ValidationError("negative probability in exact table")
            sums = p.sum(axis=(2, 3))
            bad = [(x, y) for x, y in np.ndindex(sums.shape) if sums[x, y] != 1]
            if bad:
                x, y = bad[0]
                raise ValidationError(f"p(.,.|{x},{y}) sums to {sums[x, y]}, not exactly 1")
            return
        if p.size and p.min() < -cfg.normalization_tol:
            raise ValidationError(f"negative probability {p.min()!r}")
        dev = np.abs(p.sum(axis=(2, 3)) - 1.0)
        if dev.size and dev.max() > cfg.normalization_tol:
            x, y = np.unravel_index(int(np.argmax(dev)), dev.shape)
            raise ValidationError(f"p(.,.|{x},{y}) is not normalized (off by {dev[x, y]:.3e})")

    @property
    def dims(self) -> tuple[int, int, int, int]:
        """``(n, n', m_A, m_B)``."""
        return tuple(int(s) for s in self.probs.shape)

    def as_float(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def to_exact(self, max_denominator: int = DEFAULT.snap_max_denominator,
                 tol: float = DEFAULT.snap_tol) -> "BehaviorTable":
        """Snap every entry to a rational with bounded denominator."""
        if self.exact:
            return self
        out = np.empty(self.probs.shape, dtype=object)
        for idx, v in np.ndenumerate(self.probs):
            f = numkit.snap_fraction(v, max_denominator, tol)
            if f is None:
                raise ValidationError(
                    f"entry {idx} = {v!r} is not within {tol:g} of a rational with denominator <= {max_denominator}"
                )
            out[idx] = f
        return BehaviorTable(out, exact=True)

    def marginal_a(self) -> np.ndarray:
        return self.probs.sum(axis=3)

    def marginal_b(self) -> np.ndarray:
        return self.probs.sum(axis=2)


@dataclass(frozen=True)
class NonsignalingReport:
    alice_residual: object
    bob_residual: object

    @property
    def max_residual(self):
        return max(self.alice_residual, self.bob_residual)


def check_nonsignaling(b: BehaviorTable) -> NonsignalingReport:
    """Largest dependence of each party's marginal on the other party's setting."""
    ma = b.marginal_a()  # [x, y, a]
    mb = b.marginal_b()  # [x, y, b]
    if b.exact:
        # max-minus-min per fixed (x, a) equals the pairwise max over y, y'
        ra = max((max(ma[x, :, a]) - min(ma[x, :, a]) for x in range(ma.shape[0]) for a in range(ma.shape[2])),
                 default=Fraction(0))
        rb = max((max(mb[:, y, c]) - min(mb[:, y, c]) for y in range(mb.shape[1]) for c in range(mb.shape[2])),
                 default=Fraction(0))
        return NonsignalingReport(Fraction(ra), Fraction(rb))
    ma = np.asarray(ma, dtype=float)
    mb = np.asarray(mb, dtype=float)
    ra = float((ma.max(axis=1) - ma.min(axis=1)).max(initial=0.0))
    rb = float((mb.max(axis=0) - mb.min(axis=0)).max(initial=0.0))
    return NonsignalingReport(ra, rb)


def born_behavior(state: BipartitePureState, alice: MeasurementSet, bob: MeasurementSet,
                  exact: bool = False, cfg: Config = DEFAULT) -> BehaviorTable:
    """``p(a,b|x,y) = <psi| A_{a|x} (x) B_{b|y} |psi>``; ``exact`` snaps to small rationals."""
    if alice.dim != state.dim_a or bob.dim != state.dim_b:
        raise ValidationError(
            f"dimension mismatch: state is {state.dim_a}x{state.dim_b}, "
            f"measurements act on {alice.dim} and {bob.dim}"
        )
    psi = state.amplitudes()
    a_ops = np.array([[e for e in p.elements] for p in alice.povms])
    b_ops = np.array([[e for e in p.elements] for p in bob.povms])
    k = np.einsum("ij,xaik,kl->xajl", psi.conj(), a_ops, psi)
    probs = np.einsum("xajl,ybjl->xyab", k, b_ops).real
    probs = np.where(np.abs(probs) < 1e-15, 0.0, probs)
    table = BehaviorTable(probs, check=False)
    table.validate(cfg)
    if exact:
        return table.to_exact(cfg.snap_max_denominator, cfg.snap_tol)
    return table


def post_measurement_states(state: BipartitePureState, alice: MeasurementSet,
                            cfg: Config = DEFAULT) -> PostMeasurementFamily:
    """Bob's conditional states after Alice's rank-1 outcomes, with Alice's weights ``p(a|x)``."""
    if alice.dim != state.dim_a:
        raise ValidationError(f"Alice's measurements act on {alice.dim}, state has d_A = {state.dim_a}")
    psi = state.amplitudes()
    states, weights, excluded = [], [], []
    for x, povm in enumerate(alice.povms):
        row_s, row_w = [], []
        for a, v in enumerate(povm.rank1_vectors()):
            phi = psi.T @ v.conj()
            w = float(np.vdot(phi, phi).real)
            row_w.append(w)
            if w <= cfg.zero_tol:
                row_s.append(None)
                excluded.append((x, a))
            else:
                row_s.append(_frozen(phi / np.sqrt(w)))
        states.append(tuple(row_s))
        weights.append(tuple(row_w))
    return PostMeasurementFamily(tuple(states), tuple(weights), tuple(excluded))


def tensor_copies(state: BipartitePureState, k: int, cfg: Config = DEFAULT) -> BipartitePureState:
    """The ``k``-fold tensor power, with Schmidt data built from products of the factors."""
    if k < 1:
        raise ValidationError(f"copy count must be >= 1, got {k}")
    dim = state.dim_a ** k
    if dim > cfg.dim_cap or state.dim_b ** k > cfg.dim_cap:
        raise ResourceError(f"{k} copies need local dimension d^k = {dim} > cap {cfg.dim_cap}")
    if k == 1:
        return state
    r = state.coeffs.size
    coeffs = reduce(np.kron, [state.coeffs] * k)
    ua = reduce(np.kron, [state.basis_a[:, :r]] * k)
    ub = reduce(np.kron, [state.basis_b[:, :r]] * k)
    order = np.argsort(-coeffs, kind="stable")
    ua = numkit.complete_unitary(ua[:, order])
    ub = numkit.complete_unitary(ub[:, order])
    return BipartitePureState(coeffs[order] / coeffs.sum(), ua, ub)
