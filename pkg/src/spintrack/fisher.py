"""Monte-Carlo Fisher information and Cramer-Rao bound from record batches.

Given simulated batches Y (records) and B (fields), both M x d, the
information about the field in a single time bin i is estimated by linear
regression: the response vector is the per-column regression slope of Y on
B[:, i], the residual covariance is inverted (with optional recorded ridge),
and the quadratic form gives F(B_i). The residual covariance conditions on
the target bin only, so for temporally correlated signals F is exactly the
estimator this procedure defines rather than the exact marginal bound; the
two coincide for white signals and are close whenever the record is strongly
informative.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalError

__all__ = [
    "FisherConfig",
    "FisherResult",
    "partial_mean",
    "conditional_cov_inverse",
    "fisher_information",
    "cramer_rao",
    "fisher_pipeline",
]


@dataclass(frozen=True)
class FisherConfig:
    """Batch geometry and conditioning controls.

    ``m`` trajectories of length ``d``; inversion is refused unless m > d.
    ``ridge`` is the relative Tikhonov strength applied only when the plain
    inversion is untrustworthy.
    """

    m: int = 20000
    d: int = 200
    ridge: float = 1e-10
    target_bins: Optional[Sequence[int]] = None

    def __post_init__(self) -> None:
        if self.m <= self.d:
            raise DomainError("need more trajectories than record bins (m > d)")
        if self.ridge < 0:
            raise DomainError("ridge must be non-negative")


@dataclass(frozen=True)
class FisherResult:
    """Per-bin Fisher information (1/pT^2) and Cramer-Rao bound (pT^2)."""

    bins: np.ndarray
    f: np.ndarray
    crb: np.ndarray
    repetitions: int
    diagnostics: list = field(default_factory=list)


def partial_mean(y: np.ndarray, b: np.ndarray, i: int) -> np.ndarray:
    """Regression slope of every record column on the field in bin ``i``.

    Element n is Cov(Y[:, n], B[:, i]) / Var(B[:, i]).
    """
    y = np.asarray(y, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if y.shape != b.shape or y.ndim != 2:
        raise DomainError("Y and B must be matching 2-d matrices")
    bi = b[:, i]
    var_b = bi.var(ddof=1)
    if var_b <= 0:
        raise DomainError(f"degenerate field column {i}: zero variance")
    centered = bi - bi.mean()
    return (y - y.mean(axis=0)).T @ centered / ((y.shape[0] - 1) * var_b)


def conditional_cov_inverse(
    y: np.ndarray,
    b: np.ndarray,
    partial: np.ndarray,
    i: int,
    ridge: float = 1e-10,
) -> tuple[np.ndarray, dict]:
    """Inverse covariance of the records conditioned on the field bin ``i``.

    Subtracts the regressed response partial * B[:, i] from every record,
    estimates the residual covariance (symmetrized), and inverts it. When the
    plain Cholesky factorization fails, ridge * mean(diagonal) is added to the
    diagonal and recorded in the diagnostics.
    """
    y = np.asarray(y, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, d = y.shape
    if m <= d:
        raise DomainError("need more trajectories than record bins (m > d)")
    resid = y - np.outer(b[:, i], partial)
    sigma = np.atleast_2d(np.cov(resid, rowvar=False, ddof=1))
    sigma = 0.5 * (sigma + sigma.T)
    diag_mean = float(np.mean(np.diag(sigma)))
    diagnostics = {"bin": int(i), "ridge_applied": 0.0, "diag_mean": diag_mean}
    eye = np.eye(d)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        if ridge <= 0:
            cond = float(np.linalg.cond(sigma))
            raise NumericalError(
                f"residual covariance for bin {i} is not positive definite "
                f"(condition number {cond:.3e}) and ridge is disabled"
            )
        sigma = sigma + ridge * diag_mean * eye
        diagnostics["ridge_applied"] = ridge * diag_mean
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            cond = float(np.linalg.cond(sigma))
            raise NumericalError(
                f"residual covariance for bin {i} stays singular after ridge "
                f"{ridge:.1e} (condition number {cond:.3e})"
            )
    inv_chol = np.linalg.solve(chol, eye)
    sigma_inv = inv_chol.T @ inv_chol
    sigma_inv = 0.5 * (sigma_inv + sigma_inv.T)
    diag_chol = np.diag(chol)
    diagnostics["condition_number"] = float((diag_chol.max() / diag_chol.min()) ** 2)
    return sigma_inv, diagnostics


def fisher_information(partial: np.ndarray, sigma_inv: np.ndarray) -> float:
    """Quadratic form partial^T Sigma^-1 partial, clipped at zero within 1e-12."""
    partial = np.asarray(partial, dtype=np.float64)
    if sigma_inv.shape != (partial.size, partial.size):
        raise DomainError("dimension mismatch between response vector and inverse covariance")
    f = float(partial @ sigma_inv @ partial)
    if f < -1e-12:
        raise NumericalError(f"Fisher information came out negative: {f:.3e}")
    return max(f, 0.0)


def cramer_rao(f: float, repetitions: int) -> float:
    """Variance bound 1 / (M * F) for M independent repetitions."""
    if f <= 0:
        raise DomainError("Fisher information must be positive")
    if repetitions < 1:
        raise DomainError("repetitions must be at least 1")
    return 1.0 / (repetitions * f)


def fisher_pipeline(
    y: np.ndarray,
    b: np.ndarray,
    cfg: Optional[FisherConfig] = None,
) -> FisherResult:
    """Fisher information and Cramer-Rao bound for every target bin."""
    y = np.asarray(y, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if cfg is None:
        cfg = FisherConfig(m=y.shape[0], d=y.shape[1])
    if y.shape != b.shape or y.shape != (cfg.m, cfg.d):
        raise DomainError("batch shape does not match the Fisher config")
    bins = (
        np.asarray(cfg.target_bins, dtype=np.int64)
        if cfg.target_bins is not None
        else np.arange(cfg.d)
    )
    f_vals = np.empty(bins.size)
    crb_vals = np.empty(bins.size)
    diagnostics = []
    for j, i in enumerate(bins):
        s = partial_mean(y, b, int(i))
        sigma_inv, diag = conditional_cov_inverse(y, b, s, int(i), ridge=cfg.ridge)
        f_vals[j] = fisher_information(s, sigma_inv)
        crb_vals[j] = cramer_rao(f_vals[j], cfg.m) if f_vals[j] > 0 else np.inf
        diagnostics.append(diag)
    return FisherResult(bins=bins, f=f_vals, crb=crb_vals, repetitions=cfg.m, diagnostics=diagnostics)
