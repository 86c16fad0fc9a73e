"""Conditional-variance dynamics and optimal linear estimation.

Closed-form steady variances, the Riccati curve, the discrete Kalman filter
matched to the record generator, a two-filter smoother over the joint
(signal, spin) state, and the regression-based squeezing analysis with
time-mode weighting.

The exact protocol analytics (:func:`protocol_variances`) compute, by direct
Gaussian covariance algebra over the sample grid, the population value of
every quantity the Monte-Carlo squeezing pipeline estimates. The latent spin
of the generator is an AR(1) process with coefficient (1 - Gamma tau), so
these values are exact for simulated records, not small-tau approximations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, DomainError, NumericalError, UnsupportedModelError
from .signals import OUParams, WhiteParams
from .trajectory import MeasurementRecord, TrajectoryConfig

__all__ = [
    "VarianceCurve",
    "FilterResult",
    "SmootherResult",
    "SegmentStats",
    "SqueezingResult",
    "ProtocolVariances",
    "steady_variance_prediction",
    "steady_variance_retrodiction",
    "steady_variance_backaction",
    "combine_pqs",
    "variance_ode_forward",
    "variance_ode_retrodiction",
    "kalman_filter",
    "kalman_filter_batch",
    "augmented_smoother",
    "augmented_smoother_batch",
    "time_mode_weight",
    "conditional_variance_1",
    "conditional_variance_2",
    "segment_statistics",
    "squeezing_pipeline",
    "protocol_variances",
    "optimal_kernel_rate",
]


# ---------------------------------------------------------------------------
# closed-form steady variances
# ---------------------------------------------------------------------------

def steady_variance_prediction(kappa_sq: float, gamma_tot: float, v0: float, eta: float) -> float:
    """Steady conditional variance under forward (past-record) conditioning.

    V_P = (sqrt(1 + 4 v0 kappa^2 eta / Gamma) - 1) / (2 kappa^2 eta / Gamma),
    evaluated in the cancellation-free form 2 v0 / (sqrt(...) + 1) so the
    kappa^2 -> 0 limit returns v0 exactly. Any consistent rate units.
    """
    if min(kappa_sq, v0, eta) < 0 or gamma_tot <= 0:
        raise DomainError("rates must be non-negative and gamma_tot positive")
    r = kappa_sq * eta / gamma_tot
    return 2.0 * v0 / (math.sqrt(1.0 + 4.0 * v0 * r) + 1.0)


def steady_variance_retrodiction(kappa_sq: float, gamma_tot: float, v0: float, eta: float) -> float:
    """Steady variance under backward (future-record) conditioning.

    V_R = (sqrt(1 + 4 v0 kappa^2 eta / Gamma) + 1) / (2 kappa^2 eta / Gamma);
    infinite when the measurement is off.
    """
    if min(kappa_sq, v0, eta) < 0 or gamma_tot <= 0:
        raise DomainError("rates must be non-negative and gamma_tot positive")
    r = kappa_sq * eta / gamma_tot
    if r == 0:
        return math.inf
    return (math.sqrt(1.0 + 4.0 * v0 * r) + 1.0) / (2.0 * r)


def steady_variance_backaction(
    kappa_z_sq: float, kappa_y_sq: float, gamma_tot: float, v0: float, eta: float
) -> float:
    """Forward steady variance with a conjugate-quadrature probe heating the spin.

    Adds kappa_z^2 kappa_y^2 eta / Gamma^2 under the root; reduces to
    :func:`steady_variance_prediction` at kappa_y = 0, and to the heated
    unconditional variance v0 + kappa_y^2 / (4 Gamma) at kappa_z = 0.
    """
    if min(kappa_z_sq, kappa_y_sq, v0, eta) < 0 or gamma_tot <= 0:
        raise DomainError("rates must be non-negative and gamma_tot positive")
    r = kappa_z_sq * eta / gamma_tot
    disc = math.sqrt(1.0 + 4.0 * v0 * r + kappa_z_sq * kappa_y_sq * eta / gamma_tot**2)
    # (disc - 1) / (2 r) without cancellation:
    return (4.0 * v0 + kappa_y_sq / gamma_tot) / (2.0 * (disc + 1.0))


def combine_pqs(v_p: float, v_r: float) -> float:
    """Harmonic combination of prediction and retrodiction variances."""
    if v_p <= 0 or v_r <= 0:
        raise DomainError("variances must be positive")
    if math.isinf(v_r):
        return v_p
    if math.isinf(v_p):
        return v_r
    return v_p * v_r / (v_p + v_r)


def optimal_kernel_rate(cfg: TrajectoryConfig) -> float:
    """Decay rate of the steady optimal exponential conditioning kernel.

    Gamma * sqrt(1 + 4 v0 kappa^2 eta / Gamma): the effective relaxation rate
    of the steady-state filter. A scalar exponential time mode at this rate
    extracts the full prediction squeezing from a long record.
    """
    return cfg.gamma_tot * math.sqrt(
        1.0 + 4.0 * cfg.v0 * cfg.kappa_z_sq * cfg.eta / cfg.gamma_tot
    )


# ---------------------------------------------------------------------------
# Riccati variance curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarianceCurve:
    times: np.ndarray
    v: np.ndarray

    @property
    def final(self) -> float:
        return float(self.v[-1])


def _integrate_riccati(rhs, v_init: float, horizon: float, step: Optional[float]) -> VarianceCurve:
    if v_init <= 0:
        raise DomainError("v_init must be positive")
    if horizon <= 0:
        raise DomainError("horizon must be positive")
    if step is None:
        step = horizon / 4096.0
    n = max(1, int(round(horizon / step)))
    h = horizon / n
    v = np.empty(n + 1)
    v[0] = v_init
    x = v_init
    for i in range(n):
        k1 = rhs(x)
        k2 = rhs(x + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h * k2)
        k4 = rhs(x + h * k3)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        v[i + 1] = x
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise NumericalError("variance curve left the positive domain; reduce the step")
    return VarianceCurve(times=np.linspace(0.0, horizon, n + 1), v=v)


def variance_ode_forward(
    cfg: TrajectoryConfig, v_init: float, horizon: float, step: Optional[float] = None
) -> VarianceCurve:
    """Forward conditional-variance curve.

    dV/dt = -2 Gamma V + 2 Gamma V0 + kappa_y^2/2 - 2 kappa_z^2 eta V^2;
    converges to the prediction (or back-action) steady form.
    """
    g, v0 = cfg.gamma_tot, cfg.v0
    ksq, kysq, eta = cfg.kappa_z_sq, cfg.kappa_y_sq, cfg.eta

    def rhs(v):
        return -2.0 * g * v + 2.0 * g * v0 + 0.5 * kysq - 2.0 * ksq * eta * v * v

    return _integrate_riccati(rhs, v_init, horizon, step)


def variance_ode_retrodiction(
    cfg: TrajectoryConfig, v_init: float, horizon: float, step: Optional[float] = None
) -> VarianceCurve:
    """Backward conditional-variance curve (integrated in reversed time).

    dV/ds = +2 Gamma V + 2 Gamma V0 + kappa_y^2/2 - 2 kappa_z^2 eta V^2;
    converges to the retrodiction steady form.
    """
    g, v0 = cfg.gamma_tot, cfg.v0
    ksq, kysq, eta = cfg.kappa_z_sq, cfg.kappa_y_sq, cfg.eta
    if ksq * eta == 0:
        raise DomainError("retrodiction variance diverges without a measurement")

    def rhs(v):
        return 2.0 * g * v + 2.0 * g * v0 + 0.5 * kysq - 2.0 * ksq * eta * v * v

    return _integrate_riccati(rhs, v_init, horizon, step)


# ---------------------------------------------------------------------------
# discrete Kalman filter matched to the record generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterResult:
    """Filter output; variance arrays are shared across a batch (they do not
    depend on record values), mean and innovation arrays are per record."""

    mean_prior: np.ndarray
    mean_post: np.ndarray
    var_prior: np.ndarray
    var_post: np.ndarray
    innovations: np.ndarray
    innovation_var: np.ndarray
    gains: np.ndarray


def _filter_variance_trace(cfg: TrajectoryConfig, d: int, v_init: float):
    gain = cfg.record_gain
    a = 1.0 - cfg.gamma_tot * cfg.tau
    q = 2.0 * cfg.gamma_tot * cfg.v0 * cfg.tau + 0.5 * cfg.kappa_y_sq * cfg.tau
    v_prior = np.empty(d)
    v_post = np.empty(d)
    gains = np.empty(d)
    s_innov = np.empty(d)
    v = v_init
    for i in range(d):
        s = 0.5 + gain * gain * v
        k = gain * v / s
        v_prior[i] = v
        gains[i] = k
        s_innov[i] = s
        vp = v - k * gain * v
        v_post[i] = vp
        v = a * a * vp + q
    return v_prior, v_post, gains, s_innov


def kalman_filter_batch(
    y: np.ndarray,
    cfg: TrajectoryConfig,
    b: Optional[np.ndarray] = None,
    v_init: Optional[float] = None,
    mean_init: float = 0.0,
) -> FilterResult:
    """Optimal linear filter over a batch of records (rows).

    ``b`` is the known driving signal (per record or shared per column);
    omit it for zero-signal records. The per-step cycle matches the
    generator: update on Y_i, then propagate with B_i.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    m, d = y.shape
    if b is None:
        b = np.zeros((1, d))
    else:
        b = np.atleast_2d(np.asarray(b, dtype=np.float64))
        if b.shape[-1] != d:
            raise ConfigError("signal length does not match record length")
    if v_init is None:
        v_init = cfg.stationary_variance
    if v_init <= 0:
        raise DomainError("v_init must be positive")
    gain = cfg.record_gain
    v_prior, v_post, gains, s_innov = _filter_variance_trace(cfg, d, v_init)
    mean_prior = np.empty((m, d))
    mean_post = np.empty((m, d))
    innov = np.empty((m, d))
    mu = np.full(m, float(mean_init))
    gt, tau = cfg.gamma_tot, cfg.tau
    for i in range(d):
        mean_prior[:, i] = mu
        e = y[:, i] - gain * mu
        innov[:, i] = e
        mu_post = mu + gains[i] * e
        mean_post[:, i] = mu_post
        bi = b[:, i] if b.shape[0] == m else b[0, i]
        mu = mu_post + (cfg.g_b * bi - gt * mu_post) * tau
    return FilterResult(
        mean_prior=mean_prior,
        mean_post=mean_post,
        var_prior=v_prior,
        var_post=v_post,
        innovations=innov,
        innovation_var=s_innov,
        gains=gains,
    )


def kalman_filter(
    record: MeasurementRecord,
    cfg: TrajectoryConfig,
    signal=None,
    v_init: Optional[float] = None,
) -> FilterResult:
    """Filter a single record; ``signal`` may be a SignalTrace, array or None."""
    b = None
    if signal is not None:
        values = getattr(signal, "values", signal)
        b = np.asarray(values, dtype=np.float64)[None, :]
    res = kalman_filter_batch(record.values[None, :], cfg, b=b, v_init=v_init)
    return FilterResult(
        mean_prior=res.mean_prior[0],
        mean_post=res.mean_post[0],
        var_prior=res.var_prior,
        var_post=res.var_post,
        innovations=res.innovations[0],
        innovation_var=res.innovation_var,
        gains=res.gains,
    )


# ---------------------------------------------------------------------------
# augmented two-filter smoother over the joint (signal, spin) state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmootherResult:
    """Signal estimate with its posterior variance and the spin-variance split.

    ``v_p`` / ``v_r`` are the steady forward-conditioned and
    backward-conditioned spin variances at the interior reference bin;
    ``v_pr`` is their harmonic combination.
    """

    v_p: float
    v_r: float
    v_pr: float
    b_est: np.ndarray
    b_var: np.ndarray


def _signal_steps(model: Union[OUParams, WhiteParams], cfg: TrajectoryConfig, d: int):
    """Per-step signal transition phi_i, process noise q_i and prior variance."""
    if isinstance(model, OUParams):
        if model.beta <= 0:
            raise UnsupportedModelError("OU signal model needs beta > 0 for a stationary prior")
        phi = math.exp(-model.beta * cfg.tau)
        q = model.v_ss * (1.0 - phi * phi)
        return np.full(d, phi), np.full(d, q), model.v_ss
    if isinstance(model, WhiteParams):
        h = max(1, int(round(model.hold / cfg.tau)))
        var = model.level_std**2
        phi = np.ones(d)
        q = np.zeros(d)
        boundary = (np.arange(d) + 1) % h == 0
        phi[boundary] = 0.0
        q[boundary] = var
        return phi, q, var
    raise UnsupportedModelError(
        f"no Gaussian state-space form for signal model {type(model).__name__}"
    )


def _inv2(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0 or not np.isfinite(det):
        raise NumericalError("singular 2x2 matrix in smoother recursion")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def _marginal_p_variance(om: np.ndarray, tiny: float = 1e-300) -> float:
    """Marginal variance of the spin component under a (possibly flat in the
    signal direction) information matrix."""
    a_, b_, g_ = om[0, 0], om[0, 1], om[1, 1]
    if a_ > tiny:
        det = a_ * g_ - b_ * b_
        return float(a_ / det) if det > tiny else math.inf
    if abs(b_) <= tiny:
        return float(1.0 / g_) if g_ > tiny else math.inf
    return math.inf


def augmented_smoother_batch(
    y: np.ndarray,
    cfg: TrajectoryConfig,
    model: Union[OUParams, WhiteParams],
    interior: Optional[int] = None,
):
    """Two-filter smoother for a batch of records; returns (b_est, b_var, result0).

    b_est is (M, d); b_var is shared across the batch. ``result0`` is the
    SmootherResult of the first record.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    m_rows, d = y.shape
    if interior is None:
        interior = d // 2
    phi_arr, q_arr, b_prior = _signal_steps(model, cfg, d)
    gain = cfg.record_gain
    a = 1.0 - cfg.gamma_tot * cfg.tau
    q_spin = 2.0 * cfg.gamma_tot * cfg.v0 * cfg.tau + 0.5 * cfg.kappa_y_sq * cfg.tau
    gbt = cfg.g_b * cfg.tau
    h_vec = np.array([0.0, gain])
    r_shot = 0.5
    eye2 = np.eye(2)

    # --- covariance passes (record independent) ---
    p_prior = np.empty((d, 2, 2))
    k_gain = np.empty((d, 2))
    p = np.array([[b_prior, 0.0], [0.0, cfg.stationary_variance]])
    f_mats = np.empty((d, 2, 2))
    for i in range(d):
        f_mats[i] = [[phi_arr[i], 0.0], [gbt, a]]
        p_prior[i] = p
        s = h_vec @ p @ h_vec + r_shot
        k = (p @ h_vec) / s
        k_gain[i] = k
        p_post = p - np.outer(k, h_vec @ p)
        q_mat = np.diag([q_arr[i], q_spin])
        p = f_mats[i] @ p_post @ f_mats[i].T + q_mat
        p = 0.5 * (p + p.T)

    omega_after = np.empty((d, 2, 2))  # information from records strictly after i
    g_mats = np.empty((d, 2, 2))       # maps theta including obs i to theta_after[i-1]
    om = np.zeros((2, 2))
    hht = np.outer(h_vec, h_vec) / r_shot
    for i in range(d - 1, -1, -1):
        omega_after[i] = om
        om_obs = om + hht
        if i > 0:
            # propagate across the transition z_{i-1} -> z_i
            q_mat = np.diag([q_arr[i - 1], q_spin])
            f = f_mats[i - 1]
            m_inv = _inv2(eye2 + om_obs @ q_mat)
            g_mats[i] = f.T @ m_inv
            om = f.T @ (om_obs @ m_inv.T) @ f
            om = 0.5 * (om + om.T)

    # posterior covariance per step: prior x (backward including obs at i)
    b_var = np.empty(d)
    lam_inv = np.empty((d, 2, 2))
    prior_info = np.empty((d, 2, 2))
    for i in range(d):
        pi = _inv2(p_prior[i])
        prior_info[i] = pi
        lam = pi + omega_after[i] + hht
        lam_inv[i] = _inv2(lam)
        b_var[i] = lam_inv[i][0, 0]

    # --- mean passes (vectorized across records) ---
    mean_prior = np.empty((m_rows, d, 2))
    mu = np.zeros((m_rows, 2))
    for i in range(d):
        mean_prior[:, i] = mu
        e = y[:, i] - mu @ h_vec
        mu_post = mu + e[:, None] * k_gain[i]
        mu = mu_post @ f_mats[i].T

    theta = np.zeros((m_rows, 2))
    b_est = np.empty((m_rows, d))
    for i in range(d - 1, -1, -1):
        theta_obs = theta + np.outer(y[:, i], h_vec) / r_shot
        combined = mean_prior[:, i] @ prior_info[i].T + theta_obs
        post_mean = combined @ lam_inv[i].T
        b_est[:, i] = post_mean[:, 0]
        if i > 0:
            theta = theta_obs @ g_mats[i].T

    # spin-variance split at the interior bin: forward posterior (records up
    # to and including i) against the strictly-future backward information
    v_p = float(
        (p_prior[interior] - np.outer(k_gain[interior], h_vec @ p_prior[interior]))[1, 1]
    )
    om_int = omega_after[interior]
    v_r = _marginal_p_variance(om_int)
    result0 = SmootherResult(
        v_p=v_p, v_r=v_r, v_pr=combine_pqs(v_p, v_r), b_est=b_est[0], b_var=b_var
    )
    return b_est, b_var, result0


def augmented_smoother(
    record: MeasurementRecord,
    cfg: TrajectoryConfig,
    model: Union[OUParams, WhiteParams],
) -> SmootherResult:
    """Gaussian-optimal signal estimate from one record under an OU or white model."""
    _, _, result = augmented_smoother_batch(record.values[None, :], cfg, model)
    return result


# ---------------------------------------------------------------------------
# time modes and regression conditioning
# ---------------------------------------------------------------------------

def time_mode_weight(values, tau: float, t0: float, gamma_tot: float) -> float:
    """Exponentially weighted segment outcome sum_i exp(-gamma |t0 - t_i|) Y_i.

    ``t0`` is the anchor in the segment's own clock (sample i sits at i*tau).
    gamma_tot = 0 reduces to the plain sum.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise DomainError("segment must be a non-empty 1-d array")
    if tau <= 0:
        raise DomainError("tau must be positive")
    t = np.arange(values.size) * tau
    return float(np.exp(-gamma_tot * np.abs(t0 - t)) @ values)


def conditional_variance_1(m2s, m1s) -> tuple[float, float]:
    """Optimal single-regressor conditioning Var(m2 - alpha m1).

    Returns (var_cond, alpha) with alpha = Cov(m2, m1) / Var(m1); unbiased
    (n - 1) covariance estimates throughout.
    """
    m2s = np.asarray(m2s, dtype=np.float64)
    m1s = np.asarray(m1s, dtype=np.float64)
    if m2s.shape != m1s.shape or m2s.ndim != 1:
        raise DomainError("paired 1-d samples required")
    if m2s.size < 2:
        raise DomainError("need at least two pairs")
    c = np.cov(m2s, m1s, ddof=1)
    if c[1, 1] == 0:
        raise NumericalError("degenerate regressor: Var(m1) = 0")
    alpha = c[0, 1] / c[1, 1]
    return float(c[0, 0] - c[0, 1] ** 2 / c[1, 1]), float(alpha)


def conditional_variance_2(m2s, m1s, m3s) -> tuple[float, float, float]:
    """Optimal two-regressor conditioning Var(m2 - alpha m1 - beta m3).

    Returns (var_cond, alpha, beta); raises NumericalError with condition
    diagnostics when the regressor covariance is singular.
    """
    m2s = np.asarray(m2s, dtype=np.float64)
    m1s = np.asarray(m1s, dtype=np.float64)
    m3s = np.asarray(m3s, dtype=np.float64)
    if not (m2s.shape == m1s.shape == m3s.shape) or m2s.ndim != 1:
        raise DomainError("matched 1-d samples required")
    if m2s.size < 3:
        raise DomainError("need at least three triples")
    c = np.cov(np.vstack([m1s, m2s, m3s]), ddof=1)
    c11, c22, c33 = c[0, 0], c[1, 1], c[2, 2]
    c21, c23, c13 = c[1, 0], c[1, 2], c[0, 2]
    det = c11 * c33 - c13**2
    scale = c11 * c33
    if det <= 1e-14 * max(scale, 1e-300):
        raise NumericalError(
                f"singular regressor covariance: det={det:.3e}, Var(m1)={c11:.3e}, "
                f"Var(m3)={c33:.3e}, Cov(m1,m3)={c13:.3e}"
        )
    alpha = (c21 * c33 - c23 * c13) / det
    beta = (c23 * c11 - c21 * c13) / det
    var_cond = (
        c22
        + alpha**2 * c11
        + beta**2 * c33
        - 2.0 * alpha * c21
        - 2.0 * beta * c23
        + 2.0 * alpha * beta * c13
    )
    return float(var_cond), float(alpha), float(beta)


# ---------------------------------------------------------------------------
# squeezing pipeline over (squeeze | gap | verify | gap | back-squeeze)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentStats:
    """Per-record weighted segment outcomes and the optimal feedback factors."""

    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    alpha: float
    beta: float
    var_cond: float


@dataclass(frozen=True)
class _Geometry:
    n_seg: int
    n_gap: int
    n_ver: int

    @property
    def total(self) -> int:
        return 2 * self.n_seg + 2 * self.n_gap + self.n_ver


def _protocol_geometry(tau: float, seg_len: float, gap: float, ver_len: float) -> _Geometry:
    n_seg = int(round(seg_len / tau))
    n_gap = int(round(gap / tau))
    n_ver = int(round(ver_len / tau))
    if n_seg < 1 or n_ver < 1 or n_gap < 0:
        raise ConfigError("segmentation infeasible: segments and verification need >= 1 sample")
    return _Geometry(n_seg=n_seg, n_gap=n_gap, n_ver=n_ver)


def _protocol_weights(geo: _Geometry, tau: float, rate: float, anchor: str):
    t_seg = np.arange(geo.n_seg) * tau
    u1 = np.exp(-rate * (t_seg[-1] - t_seg))
    u3 = np.exp(-rate * t_seg)
    if anchor == "midpoint":
        shift = math.exp(-rate * (geo.n_gap * tau + 0.5 * geo.n_ver * tau))
        u1 = u1 * shift
        u3 = u3 * shift
    elif anchor != "edge":
        raise ConfigError(f"unknown anchor {anchor!r}")
    u2 = np.full(geo.n_ver, 1.0 / geo.n_ver)
    return u1, u2, u3


def segment_statistics(
    y: np.ndarray,
    tau: float,
    seg_len: float,
    gap: float,
    ver_len: float,
    kernel_rate: float,
    anchor: str = "edge",
) -> SegmentStats:
    """Split records into the five-part protocol and condition the verification
    outcome on the weighted outer segments."""
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    geo = _protocol_geometry(tau, seg_len, gap, ver_len)
    if y.shape[1] < geo.total:
        raise ConfigError(
            f"records too short for the protocol: need {geo.total} samples, have {y.shape[1]}"
        )
    u1, u2, u3 = _protocol_weights(geo, tau, kernel_rate, anchor)
    i_ver = geo.n_seg + geo.n_gap
    i_seg3 = i_ver + geo.n_ver + geo.n_gap
    m1 = y[:, : geo.n_seg] @ u1
    m2 = y[:, i_ver : i_ver + geo.n_ver] @ u2
    m3 = y[:, i_seg3 : i_seg3 + geo.n_seg] @ u3
    var_cond, alpha, beta = conditional_variance_2(m2, m1, m3)
    return SegmentStats(m1=m1, m2=m2, m3=m3, alpha=alpha, beta=beta, var_cond=var_cond)


@dataclass(frozen=True)
class SqueezingResult:
    """Monte-Carlo squeezing analysis of a record batch.

    ``raw_*_db`` compare the conditioned verification variance directly to the
    reference batch's unconditioned one. ``pred_db`` / ``pqs_db`` are the
    atomic-equivalent conditional variances (light floor subtracted, atomic
    window gain divided out) in dB relative to the coherent-state value 0.5;
    they are NaN when the measurement is off.
    """

    var_unc: float
    var_cond1: float
    var_cond2: float
    alpha: float
    beta: float
    light_ref: float
    atomic_gain: float
    v_eff_uncond: float
    v_eff_pred: float
    v_eff_pqs: float
    pred_db: float
    pqs_db: float
    raw_pred_db: float
    raw_pqs_db: float


def _atomic_window_gain(cfg: TrajectoryConfig, geo: _Geometry, u2: np.ndarray) -> float:
    a = 1.0 - cfg.gamma_tot * cfg.tau
    idx = np.arange(geo.n_ver)
    corr = a ** np.abs(idx[:, None] - idx[None, :])
    return float(cfg.record_gain**2 * (u2 @ corr @ u2))


def squeezing_pipeline(
    y: np.ndarray,
    cfg: TrajectoryConfig,
    seg_len: float,
    gap: float,
    ver_len: float = 0.375,
    kernel_rate: Optional[float] = None,
    anchor: str = "edge",
    y_reference: Optional[np.ndarray] = None,
) -> SqueezingResult:
    """Conditional-variance squeezing analysis of a simulated record batch.

    ``y_reference`` is a matched measurement-off batch whose unconditioned
    verification variance supplies the light-noise floor; when omitted the
    analytic floor (shot variance 1/2 per sample) is used. The default time
    mode decays at gamma_tot; pass :func:`optimal_kernel_rate` to extract the
    full squeezing.
    """
    rate = cfg.gamma_tot if kernel_rate is None else kernel_rate
    stats = segment_statistics(y, cfg.tau, seg_len, gap, ver_len, rate, anchor)
    var_cond1, alpha1 = conditional_variance_1(stats.m2, stats.m1)
    var_cond2 = stats.var_cond
    var_unc = float(np.var(stats.m2, ddof=1))
    geo = _protocol_geometry(cfg.tau, seg_len, gap, ver_len)
    _, u2, _ = _protocol_weights(geo, cfg.tau, rate, anchor)
    if y_reference is not None:
        ref_stats = segment_statistics(y_reference, cfg.tau, seg_len, gap, ver_len, rate, anchor)
        light = float(np.var(ref_stats.m2, ddof=1))
    else:
        light = float(0.5 * u2 @ u2)
    gain_w = _atomic_window_gain(cfg, geo, u2)
    if gain_w > 0:
        v_eff_u = (var_unc - light) / gain_w
        v_eff_1 = (var_cond1 - light) / gain_w
        v_eff_2 = (var_cond2 - light) / gain_w
        pred_db = 10.0 * math.log10(v_eff_1 / 0.5) if v_eff_1 > 0 else math.nan
        pqs_db = 10.0 * math.log10(v_eff_2 / 0.5) if v_eff_2 > 0 else math.nan
    else:
        v_eff_u = v_eff_1 = v_eff_2 = math.nan
        pred_db = pqs_db = math.nan
    return SqueezingResult(
        var_unc=var_unc,
        var_cond1=var_cond1,
        var_cond2=var_cond2,
        alpha=alpha1,
        beta=stats.beta,
        light_ref=light,
        atomic_gain=gain_w,
        v_eff_uncond=v_eff_u,
        v_eff_pred=v_eff_1,
        v_eff_pqs=v_eff_2,
        pred_db=pred_db,
        pqs_db=pqs_db,
        raw_pred_db=10.0 * math.log10(var_cond1 / light),
        raw_pqs_db=10.0 * math.log10(var_cond2 / light),
    )


# ---------------------------------------------------------------------------
# exact protocol analytics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProtocolVariances:
    """Population values of the squeezing-pipeline quantities for a protocol."""

    cov: np.ndarray
    var_unc: float
    var_cond1: float
    var_cond2: float
    light: float
    atomic_gain: float
    v_eff_uncond: float
    v_eff_pred: float
    v_eff_pqs: float
    pred_db: float
    pqs_db: float


def protocol_variances(
    cfg: TrajectoryConfig,
    seg_len: float,
    gap: float,
    ver_len: float = 0.375,
    kernel_rate: Optional[float] = None,
    anchor: str = "edge",
) -> ProtocolVariances:
    """Exact Gaussian analytics of the five-segment protocol.

    Builds the covariance of (m1, m2, m3) from the stationary AR(1) law of
    the latent spin plus per-sample shot noise, then applies the same
    conditioning formulas as the Monte-Carlo pipeline. Exact for the record
    generator at any sampling interval.
    """
    rate = cfg.gamma_tot if kernel_rate is None else kernel_rate
    geo = _protocol_geometry(cfg.tau, seg_len, gap, ver_len)
    u1, u2, u3 = _protocol_weights(geo, cfg.tau, rate, anchor)
    i1 = np.arange(geo.n_seg)
    i2 = geo.n_seg + geo.n_gap + np.arange(geo.n_ver)
    i3 = geo.n_seg + 2 * geo.n_gap + geo.n_ver + np.arange(geo.n_seg)
    idx = [i1, i2, i3]
    weights = [u1, u2, u3]
    a = 1.0 - cfg.gamma_tot * cfg.tau
    v_stat = cfg.stationary_variance
    g2 = cfg.record_gain**2
    cov = np.empty((3, 3))
    for r in range(3):
        for c in range(r, 3):
            lag = np.abs(idx[r][:, None] - idx[c][None, :])
            block = v_stat * a**lag
            val = g2 * (weights[r] @ block @ weights[c])
            if r == c:
                val += 0.5 * weights[r] @ weights[c]
            cov[r, c] = cov[c, r] = val
    var_unc = cov[1, 1]
    var_cond1 = var_unc - cov[1, 0] ** 2 / cov[0, 0]
    det = cov[0, 0] * cov[2, 2] - cov[0, 2] ** 2
    alpha = (cov[1, 0] * cov[2, 2] - cov[1, 2] * cov[0, 2]) / det
    beta = (cov[1, 2] * cov[0, 0] - cov[1, 0] * cov[0, 2]) / det
    var_cond2 = (
        var_unc
        + alpha**2 * cov[0, 0]
        + beta**2 * cov[2, 2]
        - 2 * alpha * cov[1, 0]
        - 2 * beta * cov[1, 2]
        + 2 * alpha * beta * cov[0, 2]
    )
    light = float(0.5 * u2 @ u2)
    gain_w = _atomic_window_gain(cfg, geo, u2)
    if gain_w > 0:
        v_eff_u = (var_unc - light) / gain_w
        v_eff_1 = (var_cond1 - light) / gain_w
        v_eff_2 = (var_cond2 - light) / gain_w
        pred_db = 10.0 * math.log10(v_eff_1 / 0.5)
        pqs_db = 10.0 * math.log10(v_eff_2 / 0.5)
    else:
        v_eff_u = v_eff_1 = v_eff_2 = pred_db = pqs_db = math.nan
    return ProtocolVariances(
        cov=cov,
        var_unc=float(var_unc),
        var_cond1=float(var_cond1),
        var_cond2=float(var_cond2),
        light=light,
        atomic_gain=gain_w,
        v_eff_uncond=v_eff_u,
        v_eff_pred=v_eff_1,
        v_eff_pqs=v_eff_2,
        pred_db=pred_db,
        pqs_db=pqs_db,
    )
