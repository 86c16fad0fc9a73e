"""Seeded generators for every magnetic-signal class used by the experiments.

All generators are pure functions of (params, n, tau, seed): the same inputs
reproduce the same trace bit for bit (see :mod:`spintrack.rng`). Amplitudes
are in pT, times in ms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng
from ._kernels import ou_paths
from .errors import ConfigError, DomainError

__all__ = [
    "SignalTrace",
    "OUParams",
    "DOUParams",
    "PulseParams",
    "WhiteParams",
    "HMMParams",
    "gen_ou",
    "gen_dou",
    "gen_white",
    "gen_pulses",
    "gen_hmm",
    "gen_ou_batch",
    "signal_covariance",
]


@dataclass(frozen=True)
class SignalTrace:
    """A sampled field realization B(t) with its generator provenance."""

    tau: float
    values: np.ndarray
    kind: str
    params: dict
    seed: int

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise DomainError("tau must be positive")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("values must be a non-empty 1-d array")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.tau


@dataclass(frozen=True)
class OUParams:
    """Mean-reverting Gaussian process dB = -beta*B dt + sigma_ou dW.

    ``beta`` in 1/ms, ``sigma_ou`` in pT/sqrt(ms). The stationary variance is
    sigma_ou^2 / (2 beta); use :meth:`from_stationary` to parameterize by it.
    """

    beta: float
    sigma_ou: float

    def __post_init__(self) -> None:
        if self.beta < 0 or self.sigma_ou < 0:
            raise DomainError("beta and sigma_ou must be non-negative")

    @classmethod
    def from_stationary(cls, beta: float, v_ss: float) -> "OUParams":
        if beta <= 0 or v_ss < 0:
            raise DomainError("stationary parameterization needs beta > 0 and v_ss >= 0")
        return cls(beta=beta, sigma_ou=math.sqrt(2.0 * beta * v_ss))

    @property
    def v_ss(self) -> float:
        """Stationary variance in pT^2 (inf for beta = 0 with noise)."""
        if self.beta == 0:
            return 0.0 if self.sigma_ou == 0 else math.inf
        return self.sigma_ou**2 / (2.0 * self.beta)


#: Tracking-experiment default: relaxation 0.268/ms, stationary variance 6.12 pT^2.
PAPER_OU = OUParams.from_stationary(0.268, 6.12)


@dataclass(frozen=True)
class DOUParams:
    """Oscillating-weight sum of two OU processes.

    B(t) = B1(t) cos(omega_d t) + B2(t) sin(omega_d t), omega_d in rad/ms.
    """

    ou1: OUParams
    ou2: OUParams
    omega_d: float

    def __post_init__(self) -> None:
        if self.omega_d < 0:
            raise DomainError("omega_d must be non-negative")


PAPER_DOU = DOUParams(
    ou1=OUParams.from_stationary(0.402, 5.82),
    ou2=OUParams.from_stationary(0.160, 5.82),
    omega_d=2.0 * math.pi * 0.134,
)


@dataclass(frozen=True)
class PulseParams:
    """Randomly placed, non-overlapping rectangular pulses."""

    width: float = 0.375
    amp_low: float = -14.0
    amp_high: float = 14.0
    n_pulses: int = 8
    duration: float = 180.0

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise DomainError("pulse width must be positive")
        if self.n_pulses < 0:
            raise DomainError("n_pulses must be non-negative")
        if self.amp_high < self.amp_low:
            raise DomainError("amp_high must be >= amp_low")
        if self.n_pulses * self.width > self.duration:
            raise DomainError("pulses do not fit into the trace duration")


@dataclass(frozen=True)
class WhiteParams:
    """Piecewise-constant levels redrawn every ``hold`` ms, i.i.d. N(0, level_std^2)."""

    hold: float = 0.740
    level_std: float = 2.474

    def __post_init__(self) -> None:
        if self.hold <= 0:
            raise DomainError("hold must be positive")
        if self.level_std < 0:
            raise DomainError("level_std must be non-negative")


def _default_levels() -> np.ndarray:
    return np.linspace(-14.0, 14.0, 10)


def _default_transition(n_states: int = 10, p_stay: float = 0.8) -> np.ndarray:
    t = np.full((n_states, n_states), (1.0 - p_stay) / (n_states - 1))
    np.fill_diagonal(t, p_stay)
    return t


@dataclass(frozen=True)
class HMMParams:
    """Hidden Markov chain over field levels, advanced every ``hold`` ms.

    Default chain: p_stay on the diagonal, uniform off-diagonal, levels
    equally spaced over +-14 pT.
    """

    n_states: int = 10
    levels: np.ndarray = field(default_factory=_default_levels)
    transition: np.ndarray = field(default_factory=_default_transition)
    hold: float = 0.740

    def __post_init__(self) -> None:
        levels = np.asarray(self.levels, dtype=np.float64)
        transition = np.asarray(self.transition, dtype=np.float64)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "transition", transition)
        if levels.size != self.n_states:
            raise DomainError("levels length must equal n_states")
        if transition.shape != (self.n_states, self.n_states):
            raise DomainError("transition must be n_states x n_states")
        if np.any(transition < 0):
            raise DomainError("transition probabilities must be non-negative")
        if np.any(np.abs(transition.sum(axis=1) - 1.0) > 1e-12):
            raise DomainError("transition rows must sum to 1 within 1e-12")
        if self.hold <= 0:
            raise DomainError("hold must be positive")


def _hold_steps(hold: float, tau: float) -> int:
    n = int(round(hold / tau))
    if n < 1:
        raise DomainError("hold must be at least one sample interval")
    return n


def gen_ou(
    params: OUParams,
    n: int,
    tau: float,
    seed: int,
    method: str = "exact",
    b0: Optional[float] = None,
) -> SignalTrace:
    """One OU realization of ``n`` samples.

    The default update is the exact Gaussian transition
    B_{i+1} = B_i e^(-beta tau) + N(0, v_ss (1 - e^(-2 beta tau))), which is
    free of step-size bias; ``method='euler'`` selects the first-order scheme
    for cross-checks. B_0 is drawn from the stationary law unless ``b0`` is
    given. For beta = 0 the process is a driftless random walk started at 0.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if tau <= 0:
        raise DomainError("tau must be positive")
    if method not in ("exact", "euler"):
        raise ConfigError(f"unknown OU method {method!r}")
    g = rng.generator(seed)
    if method == "exact":
        if params.beta > 0:
            phi = math.exp(-params.beta * tau)
            sd = math.sqrt(params.v_ss * (1.0 - phi * phi))
        else:
            phi = 1.0
            sd = params.sigma_ou * math.sqrt(tau)
    else:
        phi = 1.0 - params.beta * tau
        sd = params.sigma_ou * math.sqrt(tau)
    if b0 is None:
        b0 = float(g.standard_normal() * math.sqrt(params.v_ss)) if params.beta > 0 else 0.0
    z = g.standard_normal((1, n))
    values = ou_paths(z, np.array([float(b0)]), phi, sd)[0]
    meta = {"beta": params.beta, "sigma_ou": params.sigma_ou, "method": method}
    return SignalTrace(tau=tau, values=values, kind="ou", params=meta, seed=seed)


def gen_ou_batch(params: OUParams, m: int, n: int, tau: float, base_seed: int) -> np.ndarray:
    """m independent exact-discretization OU rows, row j seeded with child j."""
    if m < 1 or n < 1:
        raise DomainError("m and n must be at least 1")
    if params.beta > 0:
        phi = math.exp(-params.beta * tau)
        sd = math.sqrt(params.v_ss * (1.0 - phi * phi))
        scale0 = math.sqrt(params.v_ss)
    else:
        phi = 1.0
        sd = params.sigma_ou * math.sqrt(tau)
        scale0 = 0.0
    b0 = np.empty(m)
    z = np.empty((m, n))
    for j in range(m):
        g = rng.child_generator(base_seed, j)
        b0[j] = g.standard_normal() * scale0
        z[j] = g.standard_normal(n)
    return ou_paths(z, b0, phi, sd)


def gen_dou(params: DOUParams, n: int, tau: float, seed: int) -> SignalTrace:
    """Oscillating-weight sum of two OU streams drawn from child seeds 0 and 1."""
    if n < 1:
        raise DomainError("n must be at least 1")
    t1 = gen_ou(params.ou1, n, tau, rng.child_seed(seed, 0))
    t2 = gen_ou(params.ou2, n, tau, rng.child_seed(seed, 1))
    t = np.arange(n) * tau
    values = t1.values * np.cos(params.omega_d * t) + t2.values * np.sin(params.omega_d * t)
    meta = {
        "beta1": params.ou1.beta,
        "beta2": params.ou2.beta,
        "sigma1": params.ou1.sigma_ou,
        "sigma2": params.ou2.sigma_ou,
        "omega_d": params.omega_d,
    }
    return SignalTrace(tau=tau, values=values, kind="dou", params=meta, seed=seed)


def gen_white(params: WhiteParams, n: int, tau: float, seed: int) -> SignalTrace:
    """Piecewise-constant trace; each level i.i.d. N(0, level_std^2).

    ``hold`` is rounded to an integer number of samples and the realized value
    is recorded in the trace params.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    n_hold = _hold_steps(params.hold, tau)
    n_levels = -(-n // n_hold)
    g = rng.generator(seed)
    levels = g.normal(0.0, params.level_std, n_levels)
    values = np.repeat(levels, n_hold)[:n]
    meta = {"hold": n_hold * tau, "hold_steps": n_hold, "level_std": params.level_std}
    return SignalTrace(tau=tau, values=values, kind="white", params=meta, seed=seed)


def gen_pulses(params: PulseParams, tau: float, seed: int) -> SignalTrace:
    """Non-overlapping rectangular pulses at uniformly drawn start slots.

    Start positions are uniform over all non-overlapping placements (drawn via
    the standard combination-with-gaps construction); amplitudes are uniform
    in [amp_low, amp_high]. Pulse width is rounded to whole samples.
    """
    n = int(round(params.duration / tau))
    w = max(1, int(round(params.width / tau)))
    k = params.n_pulses
    if k * w > n:
        raise DomainError("infeasible pulse packing")
    g = rng.generator(seed)
    values = np.zeros(n)
    starts = np.empty(0, dtype=np.int64)
    amps = np.empty(0)
    if k > 0:
        slots = g.choice(n - k * w + k, size=k, replace=False)
        slots.sort()
        starts = slots - np.arange(k) + np.arange(k) * w
        amps = g.uniform(params.amp_low, params.amp_high, k)
        for s, a in zip(starts, amps):
            values[s : s + w] = a
    meta = {
        "width": w * tau,
        "width_steps": w,
        "starts": starts.tolist(),
        "amplitudes": amps.tolist(),
        "n_pulses": k,
    }
    return SignalTrace(tau=tau, values=values, kind="pulses", params=meta, seed=seed)


def gen_hmm(params: HMMParams, n: int, tau: float, seed: int) -> tuple[SignalTrace, np.ndarray]:
    """Markov-chain trace plus its hidden-state sequence (one state per hold)."""
    if n < 1:
        raise DomainError("n must be at least 1")
    n_hold = _hold_steps(params.hold, tau)
    n_steps = -(-n // n_hold)
    g = rng.generator(seed)
    cum = np.cumsum(params.transition, axis=1)
    states = np.empty(n_steps, dtype=np.int64)
    state = int(g.integers(params.n_states))
    u = g.random(n_steps)
    for i in range(n_steps):
        states[i] = state
        state = int(np.searchsorted(cum[state], u[i], side="right"))
        state = min(state, params.n_states - 1)
    values = np.repeat(params.levels[states], n_hold)[:n]
    meta = {"n_states": params.n_states, "hold": n_hold * tau, "hold_steps": n_hold}
    trace = SignalTrace(tau=tau, values=values, kind="hmm", params=meta, seed=seed)
    return trace, states


def signal_covariance(traces) -> np.ndarray:
    """Unbiased empirical covariance across a batch, per time-index pair.

    Accepts a sequence of equal-length SignalTrace objects or an (M, d) array;
    returns the d x d matrix in pT^2.
    """
    if isinstance(traces, np.ndarray):
        x = np.asarray(traces, dtype=np.float64)
        if x.ndim != 2:
            raise DomainError("expected a 2-d batch array")
    else:
        traces = list(traces)
        if len(traces) >= 1 and isinstance(traces[0], SignalTrace):
            lengths = {len(t) for t in traces}
            if len(lengths) > 1:
                raise DomainError("all traces must have equal length")
            x = np.stack([t.values for t in traces]) if traces else np.empty((0, 0))
        else:
            x = np.asarray(traces, dtype=np.float64)
    if x.shape[0] < 2:
        raise DomainError("need at least two traces for a covariance estimate")
    return np.cov(x, rowvar=False, ddof=1)
