"""Physical constants, sensor parameter types and derived coupling quantities.

Conventions
-----------
* hbar = c = 1 throughout.
* Internal rates are stored in 1/ms and times in ms wherever a type is shared
  with the simulation and estimation layers; helpers named ``*_si`` accept or
  return 1/s. Mixing s and ms silently is the classic factor-1000 bug, hence
  the single internal unit.
* "Blue detuned by 2.5 GHz" corresponds to a *negative* detuning argument in
  the polarizability formulas used here; only the negative sign reproduces the
  measured ratio of tensor to vector polarizability (about 0.008) at that
  detuning magnitude. The default probe therefore carries detuning
  -2*pi*2.5e9 rad/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

TWO_PI = 2.0 * math.pi

#: Ground-manifold total spin of the probed alkali species (F = 2).
TOTAL_SPIN_F = 2


@dataclass(frozen=True)
class PhysicalConstants:
    """Probe-transition constants of the alkali species.

    All frequencies are angular (rad/s). ``delta_13`` and ``delta_23`` are the
    excited-state hyperfine splittings entering the polarizability formulas.
    """

    wavelength: float = 780e-9
    gamma_fwhm: float = TWO_PI * 6.07e6
    delta_13: float = TWO_PI * 423.60e6
    delta_23: float = TWO_PI * 266.65e6

    def __post_init__(self) -> None:
        for name in ("wavelength", "gamma_fwhm", "delta_13", "delta_23"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be strictly positive")
        if not self.delta_13 > self.delta_23:
            raise DomainError("delta_13 must exceed delta_23")


RUBIDIUM87 = PhysicalConstants()


@dataclass(frozen=True)
class EnsembleParams:
    """Collective-spin ensemble parameters.

    ``gamma_tot`` is the transverse coherence decay rate in 1/ms. ``v0`` is
    the measured steady unconditional variance of the canonical transverse
    quadrature; 0.5 is the coherent-state value, excess above it bundles
    orientation and classical noise and is taken as a single input.
    """

    n_at: float = 4e10
    v0: float = 0.60
    gamma_tot: float = 0.345
    orientation: float = 0.958
    omega_l: float = TWO_PI * 510e3
    b_bias: float = 7.2e-5

    def __post_init__(self) -> None:
        if self.n_at < 0:
            raise DomainError("n_at must be non-negative")
        if self.v0 < 0.5:
            raise DomainError("v0 below the coherent-state value 0.5 is unphysical here")
        if self.gamma_tot <= 0:
            raise DomainError("gamma_tot must be positive")
        if not 0.0 <= self.orientation <= 1.0:
            raise DomainError("orientation must lie in [0, 1]")

    @property
    def j_x(self) -> float:
        """Mean collective spin along the pump axis, 2 * n_at."""
        return 2.0 * self.n_at


@dataclass(frozen=True)
class ProbeParams:
    """Probe-beam parameters.

    ``phi`` is the photon flux in 1/s, ``detuning`` the signed detuning in
    rad/s, ``area`` the beam cross-section in m^2. ``kappa_sq`` records the
    target measurement rate in 1/ms used by the simulation layer.
    """

    phi: float
    detuning: float = -TWO_PI * 2.5e9
    area: float = 9e-6
    eta: float = 1.0
    kappa_sq: float = 3.0

    def __post_init__(self) -> None:
        if self.detuning == 0.0:
            raise DomainError("detuning must be non-zero")
        if self.area <= 0:
            raise DomainError("beam area must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError("eta must lie in [0, 1]")
        if self.kappa_sq < 0:
            raise DomainError("kappa_sq must be non-negative")
        if self.phi < 0:
            raise DomainError("photon flux must be non-negative")

    @property
    def s_x(self) -> float:
        """Mean Stokes component of the linearly polarized probe, phi/2."""
        return self.phi / 2.0


def _pole_check(delta: float, constants: PhysicalConstants) -> None:
    if delta == 0.0:
        raise DomainError("detuning must be non-zero")
    for name, pole in (("delta_13", constants.delta_13), ("delta_23", constants.delta_23)):
        if abs(1.0 - pole / delta) < 1e-12:
            raise DomainError(f"detuning sits on the {name} resonance pole")


def vector_polarizability(delta: float, constants: PhysicalConstants = RUBIDIUM87) -> float:
    """Vector polarizability a1 at signed detuning ``delta`` (rad/s).

    Tends to sqrt(2) for |delta| -> infinity.
    """
    _pole_check(delta, constants)
    return math.sqrt(2.0) / 100.0 * (
        -15.0 / (1.0 - constants.delta_13 / delta)
        - 25.0 / (1.0 - constants.delta_23 / delta)
        + 140.0
    )


def tensor_polarizability(delta: float, constants: PhysicalConstants = RUBIDIUM87) -> float:
    """Tensor polarizability a2 at signed detuning ``delta`` (rad/s). Vanishes as |delta| -> infinity."""
    _pole_check(delta, constants)
    return math.sqrt(2.0) / 40.0 * (
        1.0 / (1.0 - constants.delta_13 / delta)
        - 5.0 / (1.0 - constants.delta_23 / delta)
        + 4.0
    )


def coupling_kappa(
    probe: ProbeParams,
    ensemble: EnsembleParams,
    constants: PhysicalConstants = RUBIDIUM87,
) -> float:
    """Light-atom coupling kappa in 1/sqrt(s).

    kappa = -Gamma lambda^2 a1 / (16 A Delta pi) * sqrt(phi * n_at); the sign
    follows -a1/Delta. Downstream code consumes kappa^2 only, so the sign is
    informational.
    """
    if probe.area <= 0:
        raise DomainError("beam area must be positive")
    a1 = vector_polarizability(probe.detuning, constants)
    prefactor = -constants.gamma_fwhm * constants.wavelength**2 * a1 / (
        16.0 * probe.area * probe.detuning * math.pi
    )
    return prefactor * math.sqrt(probe.phi * ensemble.n_at)


def flux_for_kappa_sq(
    kappa_sq_si: float,
    ensemble: EnsembleParams = EnsembleParams(),
    detuning: float = -TWO_PI * 2.5e9,
    area: float = 9e-6,
    constants: PhysicalConstants = RUBIDIUM87,
) -> float:
    """Photon flux (1/s) that calibrates the coupling to ``kappa_sq_si`` (1/s).

    Inverts the kappa formula; used to build the default probe so that the
    default sensor realizes the calibration target kappa^2 = 3000 / s.
    """
    if kappa_sq_si < 0:
        raise DomainError("kappa_sq must be non-negative")
    if ensemble.n_at == 0:
        raise DomainError("cannot calibrate flux for an empty ensemble")
    a1 = vector_polarizability(detuning, constants)
    prefactor = -constants.gamma_fwhm * constants.wavelength**2 * a1 / (
        16.0 * area * detuning * math.pi
    )
    return kappa_sq_si / (prefactor**2 * ensemble.n_at)


def paper_probe(kappa_sq_si: float = 3000.0, eta: float = 1.0) -> ProbeParams:
    """Default probe, flux-calibrated so that coupling_kappa()**2 == kappa_sq_si."""
    phi = flux_for_kappa_sq(kappa_sq_si)
    return ProbeParams(phi=phi, eta=eta, kappa_sq=kappa_sq_si / 1e3)


def gyromagnetic_ratio(omega_l: float, b_bias: float) -> float:
    """Gyromagnetic ratio omega_l / b_bias in rad/(s T)."""
    if b_bias <= 0:
        raise DomainError("bias field must be positive")
    return omega_l / b_bias


def tensor_shift_rate(
    probe: ProbeParams,
    ensemble: EnsembleParams,
    constants: PhysicalConstants = RUBIDIUM87,
    sigma_jx: int = -1,
) -> float:
    """Effective precession rate (rad/s) induced by the tensor part of the coupling.

    Scalar diagnostic only; the trajectory model assumes this term is
    compensated. ``sigma_jx`` (+1 or -1) selects the pump orientation sign;
    the default makes the rate positive for the default red-signed detuning.
    """
    if sigma_jx not in (-1, 1):
        raise DomainError("sigma_jx must be +1 or -1")
    a2 = tensor_polarizability(probe.detuning, constants)
    return (
        constants.gamma_fwhm
        / (8.0 * probe.area * probe.detuning)
        * constants.wavelength**2
        / TWO_PI
        * a2
        * 2.0
        * (2 * TOTAL_SPIN_F - 1)
        * sigma_jx
        * probe.phi
    )
