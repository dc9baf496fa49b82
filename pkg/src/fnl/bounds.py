"""Closed-form spectral conditions: MUB overlap bounds, full-nonlocality tests, activation, LC bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Config
from .errors import ValidationError

QUTRIT_LAMBDA_MIN = (22 - math.sqrt(259)) / 18


def spectrum(values, d: int | None = None, tol: float = 1e-9) -> np.ndarray:
    """Validate a Schmidt spectrum and return it sorted in descending order."""
    lam = np.asarray(values, dtype=float).ravel()
    if lam.size == 0:
        raise ValidationError("empty spectrum")
    if d is not None and lam.size != d:
        raise ValidationError(f"spectrum has {lam.size} entries, expected d = {d}")
    if lam.min() < -tol:
        raise ValidationError(f"negative Schmidt coefficient {lam.min()!r}")
    if abs(lam.sum() - 1.0) > tol:
        raise ValidationError(f"Schmidt coefficients sum to {lam.sum()!r}, not 1")
    return np.sort(np.clip(lam, 0.0, None))[::-1]


def parse_spectrum(text: str) -> np.ndarray:
    """Parse ``"0.51,0.07x7"`` style lists; ``vxk`` repeats ``v`` ``k`` times; ``p/q`` allowed."""
    out = []
    for tok in text.replace(" ", "").split(","):
        if not tok:
            continue
        val, _, rep = tok.partition("x")
        if "/" in val:
            num, den = val.split("/")
            v = float(num) / float(den)
        else:
            v = float(val)
        out.extend([v] * (int(rep) if rep else 1))
    return np.array(out)


def pairwise_threshold(n: int) -> float:
    return math.sqrt((n - 2) / (2 * n - 2))


def f_value(lam: np.ndarray, at: float) -> float:
    """``f(t) = sum_j |lambda_j - t| + t sqrt(d)``."""
    return float(np.abs(lam - at).sum() + at * math.sqrt(lam.size))


def fmin_index(d: int) -> int:
    """Position (0-based, ascending order) of the coefficient minimizing ``f``.

    The slope of ``f`` just right of the ``m``-th smallest coefficient is
    ``2m + 2 - d + sqrt(d)``, so the sign change sits at ``ceil((d - sqrt d)/2) - 1``.
    """
    return max(math.ceil((d - math.sqrt(d)) / 2 - 1e-12) - 1, 0)


def fmin(values) -> float:
    lam = spectrum(values)
    asc = lam[::-1]
    return f_value(lam, asc[fmin_index(lam.size)])


@dataclass(frozen=True)
class OverlapBounds:
    sqrt_lambda_max: float
    lmin_bound: float
    fmin: float

    @property
    def c(self) -> float:
        """The largest cross-setting overlap bound: ``max(sqrt(lambda_max), 1 - (d - sqrt d) lambda_min)``."""
        return max(self.sqrt_lambda_max, self.lmin_bound)


def overlap_bounds(values, d: int | None = None) -> OverlapBounds:
    """Upper bounds on Bob's post-measurement overlaps when Alice measures MUBs.

    Overlaps against the Schmidt basis are at most ``sqrt(lambda_max)``; between two
    other bases at most ``fmin``, which never exceeds ``1 - (d - sqrt d) lambda_min``.
    """
    lam = spectrum(values, d)
    d = lam.size
    return OverlapBounds(
        sqrt_lambda_max=math.sqrt(lam[0]),
        lmin_bound=float(1.0 - (d - math.sqrt(d)) * lam[-1]),
        fmin=fmin(lam),
    )


@dataclass(frozen=True)
class BoundReport:
    spectrum: tuple
    n: int
    d: int
    sqrt_lambda_max: float
    lmin_bound: float
    fmin: float
    threshold: float
    gram_lmin_lhs: float
    max_overlap_lhs: float
    gram_fmin_lhs: float
    gram_lmin: bool
    max_overlap: bool
    gram_fmin: bool
    applicable: bool

    def as_dict(self) -> dict:
        return {
            "spectrum": list(self.spectrum), "n": self.n, "d": self.d,
            "sqrt_lambda_max": self.sqrt_lambda_max, "lmin_bound": self.lmin_bound,
            "fmin": self.fmin, "applicable": self.applicable,
            "conditions": {
                "gram_lmin": {"lhs": self.gram_lmin_lhs, "rhs": self.threshold ** 2 if self.applicable else None,
                              "passes": self.gram_lmin},
                "max_overlap": {"lhs": self.max_overlap_lhs, "rhs": self.threshold if self.applicable else None,
                                "passes": self.max_overlap},
                "gram_fmin": {"lhs": self.gram_fmin_lhs, "rhs": self.threshold ** 2 if self.applicable else None,
                              "passes": self.gram_fmin},
            },
        }


def theorem3_condition(values, n: int, d: int | None = None, cfg: Config = DEFAULT) -> BoundReport:
    """Spectral sufficient conditions for full nonlocality with ``n`` MUBs on Alice's side.

    * ``gram_lmin``: ``(2/n) lambda_max + ((n-2)/n) (1 - (d - sqrt d) lambda_min)^2 <= (n-2)/(2n-2)``
    * ``max_overlap``: ``max(sqrt lambda_max, 1 - (d - sqrt d) lambda_min) <= sqrt((n-2)/(2n-2))``
    * ``gram_fmin``: the first with ``fmin`` in place of the ``lambda_min`` bracket.

    For ``n < 3`` nothing is certified and ``applicable`` is false.
    """
    lam = spectrum(values, d)
    d = lam.size
    ob = overlap_bounds(lam)
    lmax = float(lam[0])
    if n < 3:
        nan = float("nan")
        return BoundReport(tuple(map(float, lam)), n, d, ob.sqrt_lambda_max, ob.lmin_bound, ob.fmin,
                           nan, nan, ob.c, nan, False, False, False, False)
    thr = pairwise_threshold(n)
    rhs = thr * thr
    s = cfg.threshold_slack
    g_lmin = 2 / n * lmax + (n - 2) / n * ob.lmin_bound ** 2
    g_fmin = 2 / n * lmax + (n - 2) / n * ob.fmin ** 2
    g_over = ob.c
    return BoundReport(
        tuple(map(float, lam)), n, d, ob.sqrt_lambda_max, ob.lmin_bound, ob.fmin, thr,
        g_lmin, g_over, g_fmin, g_lmin <= rhs + s, g_over <= thr + s, g_fmin <= rhs + s, True,
    )


def qutrit_condition(values, cfg: Config = DEFAULT) -> bool:
    """``(22 - sqrt 259)/18 <= lambda_min <= 1/3`` for a qutrit spectrum."""
    lam = spectrum(values, 3)
    s = cfg.threshold_slack
    return bool(QUTRIT_LAMBDA_MIN - s <= lam[-1] <= 1 / 3 + s)


def qutrit_gram_bound(values) -> float:
    """Upper bound on ``||G||_F^2`` for the five-basis qutrit family (compare with 25/2)."""
    lam = spectrum(values, 3)
    lmin, lmax = float(lam[-1]), float(lam[0])
    return 5 + 8 * lmax + 2 * (1 - 2 * lmin) ** 2 + 10 * (1 - lmin) ** 2


@dataclass(frozen=True)
class Activation:
    c: float
    k: int
    threshold: float


def activation_copies(values, n: int = 3, cfg: Config = DEFAULT) -> Activation:
    """Smallest number of copies ``k`` with ``c^k <= sqrt((n-2)/(2n-2))``."""
    if n < 3:
        raise ValidationError("activation needs n >= 3 bases")
    lam = spectrum(values)
    if lam[0] >= 1 - 1e-15:
        raise ValidationError("product state: no number of copies suffices")
    c = overlap_bounds(lam).c
    thr = pairwise_threshold(n)
    s = cfg.threshold_slack
    if c <= thr + s:
        return Activation(c, 1, thr)
    k = max(1, math.ceil(math.log(thr) / math.log(c)))
    # guard the logarithm against rounding on either side of an integer
    while k > 1 and c ** (k - 1) <= thr + s:
        k -= 1
    while c**k > thr + s:
        k += 1
    return Activation(c, k, thr)


def qubit_spectrum(p: float) -> np.ndarray:
    return spectrum([p, 1 - p])


def copies_spectrum(values, k: int) -> np.ndarray:
    """Schmidt spectrum of ``k`` copies: all ``k``-fold products."""
    lam = spectrum(values)
    out = np.ones(1)
    for _ in range(k):
        out = np.outer(out, lam).ravel()
    return np.sort(out)[::-1]


def two_copy_window_edge() -> float:
    """Largest ``p`` for which two copies of ``sqrt p|00> + sqrt(1-p)|11>`` pass the d = 4 max-overlap test."""
    return 1 - math.sqrt(0.5 - math.sqrt(3 / 32))


def lc_lower_bound(values, mode: str, d: int | None = None, m_a: int | None = None,
                   m_b: int | None = None) -> float:
    """Lower bound on the local content of any behavior produced from the state.

    ``mode`` is ``"rank1"`` (needs ``m_a``, ``m_b`` outcome counts), ``"projective"`` or
    ``"povm"``. The returned value is the square of the bracketed inner-product bound,
    or 0 when that bracket is not positive.
    """
    lam = spectrum(values)
    d = lam.size if d is None else d
    if lam.size < 2:
        return 1.0
    l0, l1 = math.sqrt(lam[0]), math.sqrt(lam[1])
    if mode == "rank1":
        if m_a is None or m_b is None:
            raise ValidationError("rank1 mode needs m_a and m_b")
        val = (l0 - l1 * math.sqrt((m_a - 1) * (m_b - 1))) / math.sqrt(m_a * m_b)
    elif mode == "projective":
        val = (l0 - l1 * (d - 1)) / d
    elif mode == "povm":
        val = (l0 - l1 * (d * d - 1)) / (d * d)
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return val * val if val > 0 else 0.0
