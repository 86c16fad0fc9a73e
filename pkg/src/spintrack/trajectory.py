"""Homodyne-record simulation of the continuously monitored collective spin.

The generator is the classical-equivalent model of a back-action-evaded
measurement of a linearly damped collective spin: per sample interval tau,

    p_{i+1} = p_i + (g_b B_i - Gamma_tot p_i) tau
              + sqrt(2 Gamma_tot v0 tau) xi_spin + sqrt(kappa_y^2 tau / 2) xi_ba
    Y_i     = sqrt(eta kappa_z^2 tau) p_i + xi_shot,   Var(xi_shot) = 1/2

with p in canonical units (coherent-state variance 1/2). The injection rates
are chosen so the conditional-variance dynamics of the optimal filter for
these records is exactly the Riccati equation used by the estimation layer;
an innovations-form backend that simulates that filter driven by white
innovations is available for cross-checks.

The latent spin is propagated with the Euler-Maruyama step, which biases the
stationary variance by a factor 1/(1 - Gamma tau / 2); configs enforce
tau <= 0.1 / Gamma_tot and tests run well below that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import rng
from ._kernels import damped_paths, spin_record_paths
from .errors import ConfigError, DomainError
from .signals import SignalTrace

__all__ = [
    "TrajectoryConfig",
    "MeasurementRecord",
    "LatentTrace",
    "simulate_record",
    "simulate_batch",
    "rearrange_records",
    "PAPER_SYSTEM",
]


@dataclass(frozen=True)
class TrajectoryConfig:
    """One simulated sensor: sampling, measurement and decay rates.

    Rates in 1/ms, times in ms, signal coupling ``g_b`` in canonical units
    per pT per ms. ``lia_bandwidth_khz`` enables an optional first-order
    low-pass on the record (off by default; the hardware demodulator is
    otherwise modeled as an ideal sampler).
    """

    tau: float
    kappa_z_sq: float = 3.0
    kappa_y_sq: float = 0.0
    eta: float = 1.0
    gamma_tot: float = 0.345
    v0: float = 0.60
    g_b: float = 0.5
    lia_bandwidth_khz: Optional[float] = None

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if min(self.kappa_z_sq, self.kappa_y_sq, self.gamma_tot) < 0:
            raise ConfigError("rates must be non-negative")
        if self.gamma_tot <= 0:
            raise ConfigError("gamma_tot must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError("eta must lie in [0, 1]")
        if self.v0 < 0:
            raise ConfigError("v0 must be non-negative")
        if self.tau > 0.1 / self.gamma_tot:
            raise ConfigError(
                f"tau={self.tau} violates the stability bound 0.1/gamma_tot="
                f"{0.1 / self.gamma_tot:.4g}"
            )

    @classmethod
    def from_si(cls, tau_s: float, kappa_z_sq_si: float, gamma_tot_si: float, **kw) -> "TrajectoryConfig":
        """Build from rates in 1/s and sampling time in s."""
        kappa_y_sq_si = kw.pop("kappa_y_sq_si", 0.0)
        return cls(
            tau=tau_s * 1e3,
            kappa_z_sq=kappa_z_sq_si / 1e3,
            kappa_y_sq=kappa_y_sq_si / 1e3,
            gamma_tot=gamma_tot_si / 1e3,
            **kw,
        )

    @property
    def record_gain(self) -> float:
        """Per-sample gain of p in the record, sqrt(eta kappa_z^2 tau)."""
        return math.sqrt(self.eta * self.kappa_z_sq * self.tau)

    @property
    def stationary_variance(self) -> float:
        """Steady unconditional Var(p) of the discrete update (v0 plus back-action heating)."""
        q = 2.0 * self.gamma_tot * self.v0 * self.tau + 0.5 * self.kappa_y_sq * self.tau
        a = 1.0 - self.gamma_tot * self.tau
        return q / (1.0 - a * a)

    def with_(self, **kw) -> "TrajectoryConfig":
        return replace(self, **kw)


#: Sensor defaults used throughout: kappa^2 = 3/ms, Gamma = 0.345/ms, V0 = 0.6.
PAPER_SYSTEM = TrajectoryConfig(tau=0.025)


@dataclass(frozen=True)
class MeasurementRecord:
    """Demodulated homodyne record in canonical units (shot variance 1/2)."""

    tau: float
    values: np.ndarray
    signal_id: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise DomainError("record contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class LatentTrace:
    """Canonical transverse quadratures of the simulated spin."""

    p: np.ndarray
    x: Optional[np.ndarray] = None


def _noise_block(g: np.random.Generator, shape) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (spin, back-action, shot) unit normals in a fixed order."""
    zs = g.standard_normal(shape)
    zb = g.standard_normal(shape)
    zy = g.standard_normal(shape)
    return zs, zb, zy


def _lowpass(y: np.ndarray, cfg: TrajectoryConfig) -> np.ndarray:
    """First-order IIR low-pass at the configured 3 dB bandwidth."""
    w = 2.0 * math.pi * cfg.lia_bandwidth_khz * cfg.tau  # bandwidth in kHz == 1/ms
    alpha = 1.0 - math.exp(-w)
    out = np.empty_like(y)
    acc = np.zeros(y.shape[:-1])
    for i in range(y.shape[-1]):
        acc = acc + alpha * (y[..., i] - acc)
        out[..., i] = acc
    return out


def _simulate_rows(b: np.ndarray, cfg: TrajectoryConfig, seeds: Sequence[int], want_x: bool):
    """Core batch simulation; row j uses its own generator seeded with seeds[j]."""
    m, d = b.shape
    zs = np.empty((m, d))
    zb = np.empty((m, d))
    zy = np.empty((m, d))
    p0 = np.empty(m)
    gens = [rng.generator(s) for s in seeds]
    sd0 = math.sqrt(cfg.stationary_variance)
    for j, g in enumerate(gens):
        p0[j] = g.standard_normal() * sd0
        zs[j], zb[j], zy[j] = _noise_block(g, d)
    q_spin = math.sqrt(2.0 * cfg.gamma_tot * cfg.v0 * cfg.tau)
    q_ba = math.sqrt(0.5 * cfg.kappa_y_sq * cfg.tau)
    y, p = spin_record_paths(
        b,
        zs,
        zb,
        zy,
        p0,
        cfg.gamma_tot * cfg.tau,
        cfg.g_b * cfg.tau,
        q_spin,
        q_ba,
        cfg.record_gain,
        math.sqrt(0.5),
    )
    x = None
    if want_x:
        zxs = np.empty((m, d))
        zxb = np.empty((m, d))
        x0 = np.empty(m)
        sdx = math.sqrt(
            (2.0 * cfg.gamma_tot * cfg.v0 * cfg.tau + 0.5 * cfg.kappa_z_sq * cfg.tau)
            / (1.0 - (1.0 - cfg.gamma_tot * cfg.tau) ** 2)
        )
        for j, g in enumerate(gens):
            x0[j] = g.standard_normal() * sdx
            zxs[j] = g.standard_normal(d)
            zxb[j] = g.standard_normal(d)
        # measuring p kicks x at rate kappa_z^2 / 2
        x = damped_paths(
            zxs, zxb, x0, cfg.gamma_tot * cfg.tau, q_spin, math.sqrt(0.5 * cfg.kappa_z_sq * cfg.tau)
        )
    if cfg.lia_bandwidth_khz:
        y = _lowpass(y, cfg)
    return y, p, x


def _simulate_innovations(b: np.ndarray, cfg: TrajectoryConfig, seeds: Sequence[int]):
    """Alternative backend: run the optimal filter driven by white innovations.

    Produces records with the same law as the classical generator (the two
    are related by the standard innovations representation of a linear
    Gaussian state-space model).
    """
    m, d = b.shape
    gain = cfg.record_gain
    a = 1.0 - cfg.gamma_tot * cfg.tau
    q = 2.0 * cfg.gamma_tot * cfg.v0 * cfg.tau + 0.5 * cfg.kappa_y_sq * cfg.tau
    v = cfg.stationary_variance
    v_tr = np.empty(d)
    k_tr = np.empty(d)
    s_tr = np.empty(d)
    for i in range(d):
        s = 0.5 + gain * gain * v
        k = gain * v / s
        v_tr[i] = v
        k_tr[i] = k
        s_tr[i] = s
        v_post = v - k * gain * v
        v = a * a * v_post + q
    y = np.empty((m, d))
    mean = np.zeros(m)
    e = np.empty((m, d))
    for j, s in enumerate(seeds):
        e[j] = rng.generator(s).standard_normal(d)
    for i in range(d):
        innov = math.sqrt(s_tr[i]) * e[:, i]
        y[:, i] = gain * mean + innov
        mean_post = mean + k_tr[i] * innov
        mean = mean_post + (cfg.g_b * b[:, i] - cfg.gamma_tot * mean_post) * cfg.tau
    return y


def simulate_record(
    signal: SignalTrace,
    cfg: TrajectoryConfig,
    seed: int,
    backend: str = "classical",
) -> tuple[MeasurementRecord, LatentTrace]:
    """Simulate one homodyne record driven by ``signal``.

    The record has the same length and sampling as the signal. The latent
    trace carries p, and also x when the back-action probe is on.
    """
    if not math.isclose(signal.tau, cfg.tau, rel_tol=1e-12):
        raise ConfigError(f"signal tau {signal.tau} does not match config tau {cfg.tau}")
    b = signal.values[None, :]
    if backend == "classical":
        y, p, x = _simulate_rows(b, cfg, [seed], want_x=cfg.kappa_y_sq > 0)
        latent = LatentTrace(p=p[0], x=None if x is None else x[0])
    elif backend == "innovations":
        y = _simulate_innovations(b, cfg, [seed])
        latent = LatentTrace(p=np.full(len(signal), np.nan))
    else:
        raise ConfigError(f"unknown backend {backend!r}")
    record = MeasurementRecord(tau=cfg.tau, values=y[0], signal_id=signal.seed, seed=seed)
    return record, latent


def simulate_batch(
    signals,
    cfg: TrajectoryConfig,
    base_seed: int,
    backend: str = "classical",
    return_latent: bool = False,
    chunk_rows: int = 4096,
):
    """Simulate records for a batch of signals.

    ``signals`` is a sequence of SignalTrace objects or an (M, d) array of
    field values at the config sampling. Row j draws its noise from child
    seed j of ``base_seed``, so rows are independent and the batch can be
    chunked or parallelized without changing any value. Returns (Y, B), plus
    the latent p matrix when ``return_latent`` is set.
    """
    if isinstance(signals, np.ndarray):
        b = np.ascontiguousarray(signals, dtype=np.float64)
        if b.ndim != 2:
            raise DomainError("signal array must be 2-d")
    else:
        signals = list(signals)
        if len(signals) == 0:
            raise DomainError("empty signal batch")
        lengths = {len(s) for s in signals}
        if len(lengths) != 1:
            raise DomainError("all signals must have equal length")
        for s in signals:
            if not math.isclose(s.tau, cfg.tau, rel_tol=1e-12):
                raise ConfigError("signal tau does not match config tau")
        b = np.stack([s.values for s in signals])
    m, d = b.shape
    y = np.empty((m, d))
    p = np.empty((m, d)) if return_latent else None
    for lo in range(0, m, chunk_rows):
        hi = min(lo + chunk_rows, m)
        seeds = [rng.child_seed(base_seed, j) for j in range(lo, hi)]
        if backend == "classical":
            yc, pc, _ = _simulate_rows(b[lo:hi], cfg, seeds, want_x=False)
        elif backend == "innovations":
            yc = _simulate_innovations(b[lo:hi], cfg, seeds)
            pc = np.full((hi - lo, d), np.nan)
        else:
            raise ConfigError(f"unknown backend {backend!r}")
        y[lo:hi] = yc
        if return_latent:
            p[lo:hi] = pc
    if return_latent:
        return y, b, p
    return y, b


_DEGREE_STRIDES = {0.0: 0, 1.0 / 3.0: 3, 0.5: 2, 1.0: 1}


def rearrange_records(
    y: np.ndarray,
    group_ids: np.ndarray,
    degree: float,
    seed: int,
) -> np.ndarray:
    """Shuffle record values across repetitions of the same signal.

    Rows with equal ``group_ids`` must be repetitions of one signal
    realization. For every time column selected by ``degree`` (0: none,
    1/3: every third, 1/2: every second, 1: all) the column's values are
    permuted across each group's rows, preserving the per-column multiset
    exactly while destroying cross-time noise correlations.
    """
    y = np.asarray(y)
    if y.ndim != 2:
        raise DomainError("record matrix must be 2-d")
    group_ids = np.asarray(group_ids)
    if group_ids.shape != (y.shape[0],):
        raise DomainError("group_ids must label every record row")
    stride = None
    for value, s in _DEGREE_STRIDES.items():
        if math.isclose(degree, value, abs_tol=1e-9):
            stride = s
            break
    if stride is None:
        raise DomainError(f"degree must be one of 0, 1/3, 1/2, 1 (got {degree})")
    out = y.copy()
    if stride == 0:
        return out
    groups = [np.flatnonzero(group_ids == gid) for gid in np.unique(group_ids)]
    if any(len(idx) < 2 for idx in groups):
        raise DomainError("every group needs at least two repetitions to rearrange")
    cols = np.arange(0, y.shape[1], stride)
    for gi, idx in enumerate(groups):
        g = rng.child_generator(seed, gi)
        for c in cols:
            out[idx, c] = out[idx[g.permutation(len(idx))], c]
    return out
