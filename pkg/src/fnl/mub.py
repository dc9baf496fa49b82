"""Mutually unbiased bases: generation, verification, file-backed families."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .config import DEFAULT, Config
from .errors import UnsupportedError, ValidationError


@dataclass(frozen=True, eq=False)
class BasisFamily:
    """Orthonormal bases as unitary matrices; column ``a`` of ``bases[x]`` is Alice's ``|A_{a|x}>``."""

    bases: tuple
    name: str = ""

    def __post_init__(self):
        bases = tuple(np.asarray(u, dtype=complex) for u in self.bases)
        if not bases:
            raise ValidationError("empty basis family")
        d = bases[0].shape[0]
        for x, u in enumerate(bases):
            if u.shape != (d, d):
                raise ValidationError(f"basis {x} has shape {u.shape}, expected {(d, d)}")
            u.setflags(write=False)
        object.__setattr__(self, "bases", bases)

    @property
    def dim(self) -> int:
        return self.bases[0].shape[0]

    @property
    def count(self) -> int:
        return len(self.bases)

    def vector(self, x: int, a: int) -> np.ndarray:
        return self.bases[x][:, a]

    def take(self, n: int) -> "BasisFamily":
        if n > self.count:
            raise ValidationError(f"family has {self.count} bases, {n} requested")
        return BasisFamily(self.bases[:n], self.name)


@dataclass(frozen=True)
class MubReport:
    """``max_overlap_deviation`` is the largest excess of a cross-basis overlap over ``1/sqrt(d)``;
    ``max_abs_deviation`` the largest distance from it in either direction."""

    max_overlap_deviation: float
    max_abs_deviation: float
    max_unitarity_residual: float
    is_mub: bool


def verify_mub(f: BasisFamily, tol: float = DEFAULT.mub_tol) -> MubReport:
    d = f.dim
    target = 1.0 / np.sqrt(d)
    unit = max(float(np.abs(u.conj().T @ u - np.eye(d)).max()) for u in f.bases)
    excess, dev = 0.0, 0.0
    for x in range(f.count):
        for y in range(x + 1, f.count):
            ov = np.abs(f.bases[x].conj().T @ f.bases[y])
            excess = max(excess, float((ov - target).max()))
            dev = max(dev, float(np.abs(ov - target).max()))
    return MubReport(excess, dev, unit, dev <= tol and unit <= tol)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n**0.5) + 1))


def prime_mubs(d: int, cfg: Config = DEFAULT) -> BasisFamily:
    """Complete set of ``d + 1`` MUBs for prime ``d``; the computational basis comes first.

    Odd primes use the quadratic-phase bases ``w^(k j^2 + a j) / sqrt(d)``; ``d = 2`` gives
    the Z, X and Y eigenbases.
    """
    if not is_prime(d):
        raise UnsupportedError(f"d = {d} is not prime; supply a basis family file instead")
    if d > cfg.dim_cap:
        raise UnsupportedError(f"d = {d} exceeds the dimension cap {cfg.dim_cap}")
    if d == 2:
        s = 1 / np.sqrt(2)
        z = np.eye(2, dtype=complex)
        x = s * np.array([[1, 1], [1, -1]], dtype=complex)
        y = s * np.array([[1, 1], [1j, -1j]], dtype=complex)
        return BasisFamily((z, x, y), "pauli")
    j = np.arange(d)
    bases = [np.eye(d, dtype=complex)]
    for k in range(d):
        # column a has entries w^(k j^2 + a j); exponents reduced mod d keep phases exact
        expo = (k * j[:, None] ** 2 + j[:, None] * j[None, :]) % d
        bases.append(np.exp(2j * np.pi * expo / d) / np.sqrt(d))
    return BasisFamily(tuple(bases), f"prime-{d}")


# Two-qubit stabilizer bases {ZI,IZ}, {XI,IX}, {YI,IY}, {XY,YZ}, {YX,ZY}; entry = i^e / 2
_D4_EXPONENTS = (
    ((0, 0, 0, 0), (0, 2, 0, 2), (0, 0, 2, 2), (0, 2, 2, 0)),
    ((0, 0, 0, 0), (1, 3, 1, 3), (1, 1, 3, 3), (2, 0, 0, 2)),
    ((0, 0, 0, 0), (2, 0, 0, 2), (1, 3, 1, 3), (1, 1, 3, 3)),
    ((0, 0, 0, 0), (1, 3, 1, 3), (2, 0, 0, 2), (1, 1, 3, 3)),
)


def builtin_mubs(d: int) -> BasisFamily:
    """The five MUBs in dimension 4."""
    if d != 4:
        raise UnsupportedError(f"no built-in MUB family for d = {d} (only d = 4)")
    bases = [np.eye(4, dtype=complex)]
    for table in _D4_EXPONENTS:
        bases.append(np.array(1j) ** np.array(table) / 2)
    return BasisFamily(tuple(np.asarray(b, dtype=complex) for b in bases), "builtin-4")


def _factorize(d: int) -> list[int]:
    out, p = [], 2
    while d > 1:
        while d % p == 0:
            out.append(p)
            d //= p
        p += 1
    return out


def tensor_mubs(d: int, cfg: Config = DEFAULT) -> BasisFamily:
    """``min_p (p + 1)`` MUBs in composite ``d`` from tensor products of prime-factor families."""
    factors = _factorize(d)
    if not factors:
        raise UnsupportedError(f"no MUBs for d = {d}")
    if d > cfg.dim_cap:
        raise UnsupportedError(f"d = {d} exceeds the dimension cap {cfg.dim_cap}")
    fams = [prime_mubs(p, cfg) for p in factors]
    n = min(f.count for f in fams)
    bases = tuple(reduce(np.kron, [f.bases[x] for f in fams]) for x in range(n))
    return BasisFamily(bases, f"tensor-{d}")


def mubs(d: int, cfg: Config = DEFAULT) -> BasisFamily:
    """Best available family: prime construction, the d = 4 table, else tensor products."""
    if is_prime(d):
        return prime_mubs(d, cfg)
    if d == 4:
        return builtin_mubs(4)
    return tensor_mubs(d, cfg)


def qutrit_five_set() -> BasisFamily:
    """Five qutrit bases: the identity plus four row-sign variants of one unitary."""
    w = np.exp(2j * np.pi / 3)
    base = np.array([[1, 1, w**2], [w, 1, w], [w**2, 1, 1]], dtype=complex) / np.sqrt(3)
    flips = [None, (1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)]
    bases = [np.eye(3, dtype=complex)]
    for s in flips[1:]:
        bases.append(np.diag(np.array(s, dtype=complex)) @ base)
    return BasisFamily(tuple(bases), "qutrit-five")
