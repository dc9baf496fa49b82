"""Dense complex linear algebra and exact rationals used by the rest of the package.

Matrices are plain ``numpy`` complex arrays. Rationals are :class:`fractions.Fraction`,
which already keeps values in lowest terms with a positive denominator.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .config import DEFAULT, Config
from .errors import ValidationError

BigRational = Fraction


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValidationError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def check_hermitian(m: np.ndarray, tol: float = DEFAULT.hermitian_tol) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"matrix is not square: shape {m.shape}")
    dev = np.abs(m - m.conj().T)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    if dev[i, j] > tol:
        raise ValidationError(
            f"matrix is not Hermitian: |M[{i}][{j}] - conj(M[{j}][{i}])| = {dev[i, j]:.3e} > {tol:g}"
        )


def jacobi_eigh(m, tol: float = 1e-15, max_sweeps: int = 100):
    """Cyclic complex Jacobi eigensolver for a Hermitian matrix.

    Each rotation first removes the phase of the pivot entry, then applies a real
    Givens rotation. Returns ascending eigenvalues and the unitary of eigenvectors.
    """
    a = as_matrix(m).copy()
    check_hermitian(a)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1e-300)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[offdiag])
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= tol * scale * 1e-3:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                u = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ u
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eig(m, method: str = "lapack", cfg: Config = DEFAULT):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    ``method="jacobi"`` uses :func:`jacobi_eigh`; the default defers to LAPACK,
    which the SDP solver relies on for speed.
    """
    a = as_matrix(m)
    check_hermitian(a, cfg.hermitian_tol * max(1.0, float(np.abs(a).max(initial=0.0))))
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return w, v


def complete_unitary(cols: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a full unitary, keeping the given columns."""
    cols = np.asarray(cols, dtype=complex)
    d, k = cols.shape
    if k == d:
        return cols.copy()
    q, r = np.linalg.qr(np.hstack([cols, np.eye(d, dtype=complex)]))
    q = q[:, :d]
    q[:, :k] = cols
    return q


def schmidt_decompose(v, dim_a: int | None = None, dim_b: int | None = None, cfg: Config = DEFAULT):
    """Schmidt coefficients (descending, summing to one) and local bases of a pure state.

    Uses the eigen-decomposition of Alice's reduced density matrix; Bob's vectors are
    obtained by contracting the state with Alice's eigenvectors.
    """
    vec = np.asarray(v, dtype=complex).ravel()
    if dim_a is None and dim_b is None:
        dim_a = int(round(np.sqrt(vec.size)))
        dim_b = vec.size // dim_a
    elif dim_b is None:
        dim_b = vec.size // dim_a
    elif dim_a is None:
        dim_a = vec.size // dim_b
    if dim_a * dim_b != vec.size:
        raise ValidationError(f"vector of length {vec.size} is not {dim_a}x{dim_b}")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > cfg.unit_norm_tol:
        raise ValidationError(f"state is not normalized: norm = {norm!r}")
    psi = vec.reshape(dim_a, dim_b)
    w, ua = hermitian_eig(psi @ psi.conj().T, cfg=cfg)
    w, ua = w[::-1], ua[:, ::-1]
    w = np.clip(w, 0.0, None)
    r = min(dim_a, dim_b)
    coeffs = w[:r]
    coeffs = coeffs / coeffs.sum()

    # Bob's partners for the nonzero coefficients, then Gram-Schmidt for stability
    support = [i for i in range(r) if coeffs[i] > 1e-14]
    cols = []
    for i in support:
        b = psi.T @ ua[:, i].conj()
        for c in cols:
            b = b - (c.conj() @ b) * c
        nb = np.linalg.norm(b)
        if nb < 1e-12:
            break
        cols.append(b / nb)
    ub = complete_unitary(np.array(cols).T if cols else np.zeros((dim_b, 0), dtype=complex))
    return coeffs, ua, ub


def schmidt_recompose(coeffs, basis_a, basis_b) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    k = len(coeffs)
    amp = basis_a[:, :k] * np.sqrt(coeffs)
    return (amp @ basis_b[:, :k].T).ravel()


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def frobenius_norm(m) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(m)) ** 2)))


def psd_min_eig(m) -> float:
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def snap_fraction(x: float, max_denominator: int, tol: float) -> Fraction | None:
    """Closest rational with bounded denominator, or ``None`` if farther than ``tol``."""
    f = Fraction(float(x)).limit_denominator(max_denominator)
    return f if abs(float(f) - float(x)) <= tol else None
