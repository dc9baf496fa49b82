"""Numerical tolerances and resource caps, gathered in one place."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class Config:
    hermitian_tol: float = 1e-12
    eig_tol: float = 1e-10
    unit_norm_tol: float = 1e-10
    povm_psd_tol: float = 1e-10
    povm_sum_tol: float = 1e-9
    normalization_tol: float = 1e-9
    nonsignaling_tol: float = 1e-9
    zero_tol: float = 1e-9
    pivot_tol: float = 1e-10
    # slack on closed-form threshold comparisons (Frobenius, spectral conditions, c^k)
    threshold_slack: float = 1e-12
    sdp_tol: float = 1e-7
    sdp_max_iter: int = 50_000
    dual_psd_tol: float = 1e-9
    mub_tol: float = 1e-9
    snap_max_denominator: int = 64
    snap_tol: float = 1e-9
    det_cap: int = 10**7
    dim_cap: int = 128

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def from_env(base: Config | None = None) -> Config:
    """Apply ``FNL_DET_CAP`` / ``FNL_DIM_CAP`` overrides."""
    cfg = base or Config()
    changes = {}
    for var, key in (("FNL_DET_CAP", "det_cap"), ("FNL_DIM_CAP", "dim_cap")):
        raw = os.environ.get(var)
        if raw:
            try:
                changes[key] = int(raw)
            except ValueError:
                raise ValidationError(f"{var} must be an integer, got {raw!r}") from None
            if changes[key] < 1:
                raise ValidationError(f"{var} must be positive, got {raw!r}")
    return cfg.replace(**changes) if changes else cfg


try:
    DEFAULT = from_env()
except ValidationError:
    DEFAULT = Config()
