"""Squeezing and sensitivity figures of merit, calibration arithmetic and the
rearrangement noise budget."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "SqlParams",
    "PickupCoil",
    "squeezing_db",
    "wineland",
    "sql_from_variances",
    "sensitivity",
    "mse",
    "rf_from_emf",
    "rf_from_power",
    "rearrangement_budget",
    "RearrangementBudget",
]


@dataclass(frozen=True)
class SqlParams:
    """Correction factors of the thermal-state quantum-limit calibration.

    eps1: linewidth correction; eps2: residual-population correction;
    factor: thermal-to-coherent-state noise conversion.
    """

    eps1: float = 0.98
    eps2: float = 0.96
    factor: float = 0.8

    def __post_init__(self) -> None:
        for name in ("eps1", "eps2", "factor"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise DomainError(f"{name} must lie in (0, 1]")

    @property
    def eps_tot(self) -> float:
        return self.eps1 * self.eps2


@dataclass(frozen=True)
class PickupCoil:
    """Field-calibration pickup coil and readout impedances (SI units)."""

    n_turns: int = 90
    diameter: float = 10.5e-3
    inductance: float = 60.9e-6
    resistance: float = 2.2
    reactance: float = 195.0
    r_m: float = 50.0

    def __post_init__(self) -> None:
        if min(self.n_turns, self.diameter, self.inductance, self.r_m) <= 0:
            raise DomainError("coil parameters must be positive")

    @property
    def area(self) -> float:
        return math.pi * (self.diameter / 2.0) ** 2

    @property
    def impedance(self) -> complex:
        return complex(self.resistance, self.reactance)


def squeezing_db(v_cond: float, v_ref: float) -> float:
    """Noise reduction 10 log10(v_cond / v_ref) in dB (negative = squeezed)."""
    if v_cond <= 0 or v_ref <= 0:
        raise DomainError("variances must be positive")
    return 10.0 * math.log10(v_cond / v_ref)


def wineland(xi_sq: float, c_sq: float) -> float:
    """Metrological squeezing parameter: noise ratio divided by squared contrast."""
    if xi_sq <= 0 or c_sq <= 0:
        raise DomainError("ratios must be positive")
    return xi_sq / c_sq


def sql_from_variances(
    var_thermal: float, var_light: float, params: Optional[SqlParams] = None
) -> float:
    """Projection-noise reference from thermal-state and light-only variances.

    factor * eps1 * eps2 * (var_thermal - var_light), in the units of the
    input variances.
    """
    if params is None:
        params = SqlParams()
    if var_thermal < var_light:
        raise DomainError("thermal variance must not be below the light variance")
    return params.factor * params.eps_tot * (var_thermal - var_light)


def sensitivity(std_b_pt: float, t_meas_s: float) -> float:
    """Field sensitivity in fT/sqrt(Hz) from an estimation error over one shot.

    std_b_pt is the single-shot standard error in pT, t_meas_s the
    measurement time in seconds: sensitivity = std * sqrt(T), single-sided.
    """
    if std_b_pt <= 0 or t_meas_s <= 0:
        raise DomainError("inputs must be positive")
    return std_b_pt * 1e3 * math.sqrt(t_meas_s)


def mse(est, truth, mask=None) -> float:
    """Mean squared error between two equal-length traces in pT^2."""
    est = np.asarray(getattr(est, "values", est), dtype=np.float64)
    truth = np.asarray(getattr(truth, "values", truth), dtype=np.float64)
    if est.shape != truth.shape:
        raise DomainError("traces must have equal length")
    diff = est - truth
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != est.shape:
            raise DomainError("mask must match the trace shape")
        diff = diff[mask]
        if diff.size == 0:
            raise DomainError("mask selects no bins")
    return float(np.mean(diff**2))


def rf_from_emf(u_sa: float, omega: float, coil: Optional[PickupCoil] = None) -> float:
    """Field amplitude (T) from the analyzer voltage induced in the pickup coil.

    |B| = sqrt(2) |1 + Z_coil / R_m| |U| / (N A omega).
    """
    if coil is None:
        coil = PickupCoil()
    if u_sa <= 0 or omega <= 0:
        raise DomainError("voltage and frequency must be positive")
    loading = abs(1.0 + coil.impedance / coil.r_m)
    return math.sqrt(2.0) * loading * u_sa / (coil.n_turns * coil.area * omega)


def rf_from_power(p_set_dbm: float) -> float:
    """Field amplitude (T) from the generator's set output power in dBm.

    B = 1.428e-7 * 10^(P/20), the measured linear characteristic of the
    source-coil chain.
    """
    return 1.428e-7 * 10.0 ** (p_set_dbm / 20.0)


class RearrangementBudget(NamedTuple):
    an: float
    mse_corr: float
    mse_uncorr: float
    strong_standard_factor: float


def rearrangement_budget(
    ln_per_point: float, kappa_sq: float, tau: float, v_atom: float
) -> RearrangementBudget:
    """Noise budget of the record-rearrangement comparison.

    For a subtract-the-neighbor linear decoder with unit feedback: the atomic
    noise per data point is AN = (kappa^2 tau v_atom / 0.5) * LN; with intact
    half-correlated atomic noise the error budget is 2 LN + AN, with fully
    decorrelated (rearranged) noise 2 LN + 2 AN. The strong-standard factor
    (2 LN + AN) / (2 LN + 2 AN) converts a rearranged error into the bound an
    unrearranged run must beat.
    """
    if min(ln_per_point, kappa_sq, tau, v_atom) < 0 or ln_per_point == 0:
        raise DomainError("budget inputs must be positive (kappa_sq may be zero)")
    an = kappa_sq * tau * v_atom / 0.5 * ln_per_point
    mse_corr = 2.0 * ln_per_point + an
    mse_uncorr = 2.0 * ln_per_point + 2.0 * an
    return RearrangementBudget(
        an=an,
        mse_corr=mse_corr,
        mse_uncorr=mse_uncorr,
        strong_standard_factor=mse_corr / mse_uncorr,
    )
