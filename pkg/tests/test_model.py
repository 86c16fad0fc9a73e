import math

import pytest

from spintrack import model
from spintrack.errors import DomainError

TWO_PI = 2.0 * math.pi
DETUNING = -TWO_PI * 2.5e9

# frozen from a 30-digit evaluation of the polarizability closed forms at
# delta = -2*pi*2.5e9 with splittings 2*pi*423.60e6 / 2*pi*266.65e6
A1_REF = 1.4790248541896604
A2_REF = 0.011915125145481916


class TestPolarizabilities:
    def test_vector_asymptote(self):
        assert model.vector_polarizability(1e18) == pytest.approx(math.sqrt(2), rel=1e-9)
        assert model.vector_polarizability(-1e18) == pytest.approx(math.sqrt(2), rel=1e-9)

    def test_tensor_asymptote(self):
        assert model.tensor_polarizability(1e18) == pytest.approx(0.0, abs=1e-9)

    def test_values_at_default_detuning(self):
        assert model.vector_polarizability(DETUNING) == pytest.approx(A1_REF, rel=1e-9)
        assert model.tensor_polarizability(DETUNING) == pytest.approx(A2_REF, rel=1e-9)

    def test_measured_ratio(self):
        ratio = model.tensor_polarizability(DETUNING) / model.vector_polarizability(DETUNING)
        assert ratio == pytest.approx(0.0081, abs=0.0003)

    def test_positive_detuning_flips_ratio_sign(self):
        ratio = model.tensor_polarizability(-DETUNING) / model.vector_polarizability(-DETUNING)
        assert ratio < 0

    def test_tensor_coupling_strength(self):
        zeta_sq = 6.0 * A2_REF / A1_REF
        assert zeta_sq == pytest.approx(0.0484, abs=5e-4)

    @pytest.mark.parametrize("func", [model.vector_polarizability, model.tensor_polarizability])
    def test_smooth_away_from_poles(self, func):
        a = func(DETUNING)
        b = func(DETUNING * (1.0 + 1e-12))
        assert abs(b - a) / abs(a) < 1e-6

    def test_pole_rejection(self):
        c = model.RUBIDIUM87
        with pytest.raises(DomainError, match="delta_13"):
            model.vector_polarizability(c.delta_13)
        with pytest.raises(DomainError, match="delta_23"):
            model.tensor_polarizability(c.delta_23)
        with pytest.raises(DomainError):
            model.vector_polarizability(0.0)


class TestCoupling:
    def test_default_calibration_target(self):
        probe = model.paper_probe()
        kappa = model.coupling_kappa(probe, model.EnsembleParams())
        assert kappa**2 == pytest.approx(3000.0, rel=1e-9)
        assert kappa > 0  # negative detuning, positive a1

    def test_flux_zero(self):
        probe = model.ProbeParams(phi=0.0)
        assert model.coupling_kappa(probe, model.EnsembleParams()) == 0.0

    def test_empty_ensemble(self):
        probe = model.paper_probe()
        ens = model.EnsembleParams(n_at=0.0)
        assert model.coupling_kappa(probe, ens) == 0.0

    def test_sqrt_flux_scaling_exact(self):
        ens = model.EnsembleParams()
        p1 = model.paper_probe()
        p4 = model.ProbeParams(phi=4.0 * p1.phi, detuning=p1.detuning, area=p1.area)
        assert model.coupling_kappa(p4, ens) == 2.0 * model.coupling_kappa(p1, ens)

    def test_invalid_probe(self):
        with pytest.raises(DomainError):
            model.ProbeParams(phi=1e15, detuning=0.0)
        with pytest.raises(DomainError):
            model.ProbeParams(phi=1e15, area=0.0)


class TestGyromagneticRatio:
    def test_default_value(self):
        g = model.gyromagnetic_ratio(TWO_PI * 510e3, 7.2e-5)
        assert g == pytest.approx(4.45059e10, rel=1e-5)

    def test_unit_field(self):
        assert model.gyromagnetic_ratio(1.234, 1.0) == 1.234

    def test_inverse_linearity(self):
        assert model.gyromagnetic_ratio(3.0, 2.0) == 0.5 * model.gyromagnetic_ratio(3.0, 1.0)

    def test_zero_field(self):
        with pytest.raises(DomainError):
            model.gyromagnetic_ratio(1.0, 0.0)


class TestTensorShift:
    def test_zero_flux(self):
        probe = model.ProbeParams(phi=0.0)
        assert model.tensor_shift_rate(probe, model.EnsembleParams()) == 0.0

    def test_far_detuned(self):
        probe = model.ProbeParams(phi=3.2e15, detuning=-1e18)
        assert abs(model.tensor_shift_rate(probe, model.EnsembleParams())) < 1e-6

    def test_golden_value(self):
        # pinned on first evaluation of the default configuration
        rate = model.tensor_shift_rate(model.paper_probe(), model.EnsembleParams())
        assert rate > 0
        assert rate == pytest.approx(750.6451011281187, rel=1e-9)

    def test_orientation_sign(self):
        probe = model.paper_probe()
        ens = model.EnsembleParams()
        plus = model.tensor_shift_rate(probe, ens, sigma_jx=1)
        minus = model.tensor_shift_rate(probe, ens, sigma_jx=-1)
        assert plus == -minus
        with pytest.raises(DomainError):
            model.tensor_shift_rate(probe, ens, sigma_jx=0)


class TestParameterTypes:
    def test_constants_ordering(self):
        with pytest.raises(DomainError):
            model.PhysicalConstants(delta_13=1.0, delta_23=2.0)

    def test_ensemble_invariants(self):
        ens = model.EnsembleParams()
        assert ens.j_x == 2.0 * ens.n_at
        with pytest.raises(DomainError):
            model.EnsembleParams(v0=0.4)
        with pytest.raises(DomainError):
            model.EnsembleParams(gamma_tot=0.0)

    def test_probe_stokes_mean(self):
        probe = model.ProbeParams(phi=2e15)
        assert probe.s_x == 1e15
