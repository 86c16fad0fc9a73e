"""Reproducible experiment drivers behind the CLI.

Every driver maps an :class:`~spintrack.config.ExperimentSpec` to a
:class:`Table`; tables serialize to CSV with the spec hash and toolkit
version embedded, and re-running a driver from the same spec produces
byte-identical output regardless of the kernel backend's thread count
(all randomness flows through per-row child seeds).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, estimation as est, metrics, rng
from .config import ExperimentSpec
from .dataset import Dataset, read_dataset, write_dataset
from .errors import ConfigError, DomainError
from .fisher import FisherConfig, fisher_pipeline
from .model import EnsembleParams, coupling_kappa, paper_probe, vector_polarizability, tensor_polarizability
from .signals import OUParams, PulseParams, SignalTrace, WhiteParams, gen_dou, gen_hmm, gen_ou, gen_ou_batch, gen_pulses, gen_white
from .trajectory import TrajectoryConfig, rearrange_records, simulate_batch

__all__ = [
    "Table",
    "run_squeezing_sweep",
    "run_pulse_magnetometer",
    "run_ou_tracking",
    "run_backaction_sweep",
    "run_rearrangement",
    "run_fisher",
    "run_report",
    "simulate_trace",
    "export_dataset",
    "import_dataset",
]


# ---------------------------------------------------------------------------
# result tables
# ---------------------------------------------------------------------------

def _format_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError("row width does not match columns")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# {k}={v}" for k, v in sorted(self.meta.items())]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_format_cell(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
        return path


def _table(spec: ExperimentSpec, columns, extra_meta=None) -> Table:
    meta = {
        "name": spec.name,
        "config_sha256": spec.sha256,
        "version": __version__,
        "seed": spec.seed,
    }
    if extra_meta:
        meta.update(extra_meta)
    return Table(columns=columns, meta=meta)


def _generate_signal(kind_params, n: int, tau: float, seed: int) -> SignalTrace:
    if isinstance(kind_params, OUParams):
        return gen_ou(kind_params, n, tau, seed)
    if isinstance(kind_params, WhiteParams):
        return gen_white(kind_params, n, tau, seed)
    if isinstance(kind_params, PulseParams):
        return gen_pulses(kind_params, tau, seed)
    from .signals import DOUParams, HMMParams

    if isinstance(kind_params, DOUParams):
        return gen_dou(kind_params, n, tau, seed)
    if isinstance(kind_params, HMMParams):
        return gen_hmm(kind_params, n, tau, seed)[0]
    raise ConfigError(f"cannot generate signal for {type(kind_params).__name__}")


# ---------------------------------------------------------------------------
# squeezing sweeps (verification-conditioning protocol)
# ---------------------------------------------------------------------------

def _squeezing_point(
    cfg: TrajectoryConfig,
    n_records: int,
    seg: float,
    gap: float,
    ver: float,
    rate,
    seed: int,
    ref_factor: int = 4,
):
    geo_len = 2 * int(round(seg / cfg.tau)) + 2 * int(round(gap / cfg.tau)) + int(
        round(ver / cfg.tau)
    )
    b = np.zeros((n_records, geo_len))
    y, _ = simulate_batch(b, cfg, base_seed=seed)
    # the light floor is subtracted from the conditioned variance, so estimate
    # it on a larger measurement-off batch to keep its noise subdominant
    b_ref = np.zeros((ref_factor * n_records, geo_len))
    y_ref, _ = simulate_batch(b_ref, cfg.with_(kappa_z_sq=0.0), base_seed=rng.child_seed(seed, 1))
    result = est.squeezing_pipeline(
        y, cfg, seg, gap, ver_len=ver, kernel_rate=rate, y_reference=y_ref
    )
    analytic = est.protocol_variances(cfg, seg, gap, ver_len=ver, kernel_rate=rate)
    return result, analytic


def run_squeezing_sweep(spec: ExperimentSpec) -> Table:
    """Squeezing versus segment duration and versus gap time."""
    cfg = spec.trajectory_config()
    a = spec.analysis
    n_records = int(a.get("n_records", 4000))
    durations = list(a.get("durations", [0.25, 0.5, 1.0, 1.5, 2.5, 4.0]))
    gaps = list(a.get("gaps", [0.0, 0.15, 0.3, 0.6, 1.0, 1.5]))
    seg_fixed = float(a.get("seg_len", 1.5))
    gap_fixed = float(a.get("gap", 0.3))
    ver = float(a.get("ver_len", 0.375))
    kernel = a.get("kernel", "gamma")
    rate = est.optimal_kernel_rate(cfg) if kernel == "optimal" else None
    table = _table(
        spec,
        [
            "sweep",
            "value",
            "pred_db",
            "pqs_db",
            "raw_pred_db",
            "raw_pqs_db",
            "analytic_pred_db",
            "analytic_pqs_db",
        ],
        {"kernel": kernel, "n_records": n_records},
    )
    for k, seg in enumerate(durations):
        r, an = _squeezing_point(
            cfg, n_records, seg, gap_fixed, ver, rate, rng.child_seed(spec.seed, k)
        )
        table.add("duration", seg, r.pred_db, r.pqs_db, r.raw_pred_db, r.raw_pqs_db, an.pred_db, an.pqs_db)
    for k, gap in enumerate(gaps):
        r, an = _squeezing_point(
            cfg, n_records, seg_fixed, gap, ver, rate, rng.child_seed(spec.seed, 100 + k)
        )
        table.add("gap", gap, r.pred_db, r.pqs_db, r.raw_pred_db, r.raw_pqs_db, an.pred_db, an.pqs_db)
    return table


# ---------------------------------------------------------------------------
# pulse magnetometer
# ---------------------------------------------------------------------------

def conditioned_onset_variance(
    cfg: TrajectoryConfig, pre_seg: float, gap: float, kernel_rate: float
) -> float:
    """Population spin variance at a pulse onset, conditioned on the
    exponentially weighted pre-onset record across the gap."""
    n_pre = int(round(pre_seg / cfg.tau))
    n_gap = int(round(gap / cfg.tau))
    if n_pre < 1:
        raise ConfigError("pre-segment needs at least one sample")
    a = 1.0 - cfg.gamma_tot * cfg.tau
    v_stat = cfg.stationary_variance
    g = cfg.record_gain
    t = np.arange(n_pre) * cfg.tau
    u = np.exp(-kernel_rate * (t[-1] - t))
    lag = np.abs(np.arange(n_pre)[:, None] - np.arange(n_pre)[None, :])
    var_m = g * g * (u @ (v_stat * a**lag) @ u) + 0.5 * (u @ u)
    onset = n_pre + n_gap
    cov = g * v_stat * np.sum(u * a ** (onset - np.arange(n_pre)))
    return float(v_stat - cov * cov / var_m)


def _pulse_floor(cfg: TrajectoryConfig, u: np.ndarray) -> tuple[float, float]:
    """(onset coefficient, record-noise floor) of the weighted post-onset sum."""
    a = 1.0 - cfg.gamma_tot * cfg.tau
    g = cfg.record_gain
    n = u.size
    a0 = g * np.sum(u * a ** np.arange(n))
    w = np.zeros(n)
    for k in range(n - 2, -1, -1):
        w[k] = a * w[k + 1] + u[k + 1]
    q = 2.0 * cfg.gamma_tot * cfg.v0 * cfg.tau + 0.5 * cfg.kappa_y_sq * cfg.tau
    floor = 0.5 * float(u @ u) + g * g * q * float(w @ w)
    return float(a0), floor


def run_pulse_magnetometer(spec: ExperimentSpec) -> Table:
    """Pulse-amplitude estimation variance with and without pre-pulse conditioning."""
    cfg = spec.trajectory_config()
    a = spec.analysis
    n_runs = int(a.get("n_runs", 10000))
    gaps = list(a.get("gaps", [0.025, 0.3, 1.0, 3.0, 8.0]))
    pre_seg = float(a.get("pre_seg", 4.0))
    est_window = float(a.get("est_window", 2.0))
    width = float(a.get("pulse_width", 0.375))
    amp_low = float(a.get("amp_low", -14.0))
    amp_high = float(a.get("amp_high", 14.0))
    rate = est.optimal_kernel_rate(cfg)
    tau = cfg.tau
    n_pre = int(round(pre_seg / tau))
    n_est = int(round(est_window / tau))
    n_w = max(1, int(round(width / tau)))
    a_step = 1.0 - cfg.gamma_tot * tau
    t_pre = np.arange(n_pre) * tau
    u_pre = np.exp(-rate * (t_pre[-1] - t_pre))
    u_post = np.exp(-cfg.gamma_tot * np.arange(n_est) * tau)
    # unit-amplitude response of p over the estimation window
    resp = np.zeros(n_est)
    for i in range(n_est - 1):
        drive = cfg.g_b * tau if i < n_w else 0.0
        resp[i + 1] = a_step * resp[i] + drive
    gain_sig = cfg.record_gain * float(u_post @ resp)
    if gain_sig == 0:
        raise ConfigError("pulse response has zero gain; check g_b and kappa_z_sq")
    a0, floor = _pulse_floor(cfg, u_post)
    v_stat = cfg.stationary_variance
    table = _table(
        spec,
        [
            "gap",
            "var_uncond",
            "var_cond",
            "ratio_atomic",
            "ratio_analytic",
            "ratio_ideal",
            "mean_bias",
        ],
        {"n_runs": n_runs, "pulse_width": width},
    )
    vp_ideal = est.steady_variance_prediction(
        cfg.kappa_z_sq, cfg.gamma_tot, cfg.v0, cfg.eta
    )
    for k, gap in enumerate(gaps):
        n_gap = int(round(gap / tau))
        d = n_pre + n_gap + n_est
        g = rng.child_generator(spec.seed, 500 + k)
        amps = g.uniform(amp_low, amp_high, n_runs)
        b = np.zeros((n_runs, d))
        b[:, n_pre + n_gap : n_pre + n_gap + n_w] = amps[:, None]
        y, _ = simulate_batch(b, cfg, base_seed=rng.child_seed(spec.seed, 900 + k))
        m_pre = y[:, :n_pre] @ u_pre
        m_post = y[:, n_pre + n_gap :] @ u_post
        alpha = float(np.cov(m_post, m_pre, ddof=1)[0, 1] / np.var(m_pre, ddof=1))
        b_unc = m_post / gain_sig
        b_cond = (m_post - alpha * (m_pre - m_pre.mean())) / gain_sig
        var_unc = float(np.mean((b_unc - amps) ** 2))
        var_cond = float(np.mean((b_cond - amps) ** 2))
        mean_bias = float(np.mean(b_cond - amps))
        floor_b = floor / gain_sig**2
        ratio_atomic = (var_cond - floor_b) / (var_unc - floor_b)
        v_c = conditioned_onset_variance(cfg, pre_seg, gap, rate)
        table.add(
            gap,
            var_unc,
            var_cond,
            float(ratio_atomic),
            v_c / v_stat,
            vp_ideal / v_stat,
            mean_bias,
        )
    return table


# ---------------------------------------------------------------------------
# OU tracking sweep
# ---------------------------------------------------------------------------

def run_ou_tracking(spec: ExperimentSpec) -> Table:
    """Tracking error of the Gaussian-optimal smoother versus signal relaxation rate."""
    cfg = spec.trajectory_config()
    a = spec.analysis
    betas = list(a.get("betas", [0.067, 0.134, 0.268, 0.536, 1.072, 2.144]))
    v_ss = float(a.get("v_ss", 6.12))
    n_traces = int(a.get("n_traces", 300))
    n_samples = int(a.get("n_samples", 400))
    margin = int(a.get("interior_margin", 50))
    table = _table(spec, ["beta", "mse", "mean_bvar", "v_ss"], {"n_traces": n_traces})
    inner = slice(margin, n_samples - margin)
    for k, beta in enumerate(betas):
        ou = OUParams.from_stationary(beta, v_ss)
        b = gen_ou_batch(ou, n_traces, n_samples, cfg.tau, rng.child_seed(spec.seed, k))
        y, b = simulate_batch(b, cfg, base_seed=rng.child_seed(spec.seed, 300 + k))
        b_est, b_var, _ = est.augmented_smoother_batch(y, cfg, ou)
        err = float(np.mean((b_est[:, inner] - b[:, inner]) ** 2))
        table.add(beta, err, float(np.mean(b_var[inner])), v_ss)
    return table


# ---------------------------------------------------------------------------
# back-action sweep
# ---------------------------------------------------------------------------

def run_backaction_sweep(spec: ExperimentSpec) -> Table:
    """Conditional spin noise and tracking error versus conjugate-probe strength."""
    base = spec.trajectory_config()
    a = spec.analysis
    ky_values = list(a.get("kappa_y_sqs", [0.0, 0.6, 1.2, 1.8, 2.4, 3.0]))
    n_records = int(a.get("n_records", 1500))
    n_samples = int(a.get("n_samples", 1200))
    n_track = int(a.get("n_track", 200))
    margin = int(a.get("interior_margin", 200))
    white = WhiteParams(
        hold=float(a.get("hold", 0.74)), level_std=float(a.get("level_std", 2.474))
    )
    table = _table(
        spec,
        ["kappa_y_sq", "noise_mc", "noise_analytic", "normalized_noise", "tracking_mse"],
        {"n_records": n_records},
    )
    inner = slice(margin, n_samples - margin)
    for k, ky in enumerate(ky_values):
        cfg = base.with_(kappa_y_sq=float(ky))
        b = np.zeros((n_records, n_samples))
        y, _, p = simulate_batch(
            b, cfg, base_seed=rng.child_seed(spec.seed, k), return_latent=True
        )
        fr = est.kalman_filter_batch(y, cfg)
        # the continuous-time conditional variance lies midway between the
        # discrete prior and posterior errors; averaging cancels the O(tau) term
        err_prior = np.mean((p[:, inner] - fr.mean_prior[:, inner]) ** 2)
        err_post = np.mean((p[:, inner] - fr.mean_post[:, inner]) ** 2)
        noise_mc = float(0.5 * (err_prior + err_post))
        analytic = est.steady_variance_backaction(
            cfg.kappa_z_sq, cfg.kappa_y_sq, cfg.gamma_tot, cfg.v0, cfg.eta
        )
        # tracking error on a white-noise field with the same probe settings
        bsig = np.stack(
            [
                gen_white(white, n_samples, cfg.tau, rng.child_seed(spec.seed, 7000 + k * 1000 + j)).values
                for j in range(n_track)
            ]
        )
        yt, bt = simulate_batch(bsig, cfg, base_seed=rng.child_seed(spec.seed, 400 + k))
        b_est, _, _ = est.augmented_smoother_batch(yt, cfg, white)
        track = float(np.mean((b_est[:, inner] - bt[:, inner]) ** 2))
        table.add(float(ky), noise_mc, analytic, noise_mc / 0.5, track)
    return table


# ---------------------------------------------------------------------------
# rearrangement experiment
# ---------------------------------------------------------------------------

def window_mean_atomic_stats(cfg: TrajectoryConfig, n_win: int) -> tuple[float, float]:
    """(variance factor, adjacent-window correlation) of window means of the
    stationary latent spin; variance factor multiplies the stationary variance."""
    a = 1.0 - cfg.gamma_tot * cfg.tau
    idx = np.arange(n_win)
    within = a ** np.abs(idx[:, None] - idx[None, :])
    across = a ** np.abs(idx[:, None] - (idx[None, :] + n_win))
    var_fac = float(within.mean())
    rho = float(across.mean() / within.mean())
    return var_fac, rho


def run_rearrangement(spec: ExperimentSpec) -> Table:
    """Tracking error of a neighbor-subtracting linear decoder versus the degree
    of cross-repetition record rearrangement.

    Each signal realization is applied ``reps`` times; records are averaged
    into per-update data points, optionally rearranged column-wise across the
    repetitions, and decoded by the unit-feedback difference estimator the
    noise budget assumes. The update interval is chosen so the adjacent-point
    atomic correlation is one half, matching the budget's correlated case.
    """
    a = spec.analysis
    tau = float(a.get("tau", 0.05))
    n_win = int(a.get("window_samples", 67))
    n_points = int(a.get("n_points", 20))
    n_signals = int(a.get("n_signals", 150))
    reps = int(a.get("reps", 50))
    degrees = [0.0, 1.0 / 3.0, 0.5, 1.0]
    cfg = spec.trajectory_config(
        tau=tau,
        v0=float(spec.system.get("v0", 0.5)),
        g_b=float(spec.system.get("g_b", 0.25)),
    )
    hold = n_win * tau
    level_std = float(a.get("level_std", 0.4))
    white = WhiteParams(hold=hold, level_std=level_std)
    d = n_points * n_win
    m = n_signals * reps
    sig_rows = np.empty((n_signals, d))
    for j in range(n_signals):
        sig_rows[j] = gen_white(white, d, tau, rng.child_seed(spec.seed, j)).values
    b = np.repeat(sig_rows, reps, axis=0)
    group_ids = np.repeat(np.arange(n_signals), reps)
    y, b = simulate_batch(b, cfg, base_seed=rng.child_seed(spec.seed, 10_000))
    y_pts = y.reshape(m, n_points, n_win).mean(axis=2)
    b_pts = b[:, ::n_win]
    delta = b_pts[:, 1:] - b_pts[:, :-1]
    # decoder gain from the unrearranged batch (shared across degrees)
    d0 = y_pts[:, 1:] - y_pts[:, :-1]
    ghat = float(np.sum(d0 * delta) / np.sum(delta * delta))
    ln = 0.5 / n_win
    var_fac, rho = window_mean_atomic_stats(cfg, n_win)
    v_atom_eff = cfg.stationary_variance * var_fac
    budget = metrics.rearrangement_budget(ln, cfg.kappa_z_sq, hold, v_atom_eff)
    table = _table(
        spec,
        ["degree", "mse", "ratio_to_degree0", "budget_ratio", "an", "ln", "adjacent_rho"],
        {"n_signals": n_signals, "reps": reps, "update_interval": hold},
    )
    mse0 = None
    for k, degree in enumerate(degrees):
        y_r = rearrange_records(y_pts, group_ids, degree, rng.child_seed(spec.seed, 20_000 + k))
        diff = y_r[:, 1:] - y_r[:, :-1]
        err = float(np.mean((diff / ghat - delta) ** 2))
        if mse0 is None:
            mse0 = err
        table.add(
            degree,
            err,
            err / mse0,
            budget.mse_uncorr / budget.mse_corr,
            budget.an,
            ln,
            rho,
        )
    return table


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------

def run_fisher(spec: ExperimentSpec) -> Table:
    """Monte-Carlo Fisher information and Cramer-Rao bound on an OU batch."""
    cfg = spec.trajectory_config()
    a = spec.analysis
    m = int(a.get("m", 20000))
    d = int(a.get("d", 200))
    ridge = float(a.get("ridge", 1e-10))
    bins = list(a.get("bins", [60, 80, 100, 120, 140]))
    model = spec.signal_params()
    if not isinstance(model, OUParams):
        raise ConfigError("the Fisher driver needs an OU signal block")
    b = gen_ou_batch(model, m, d, cfg.tau, rng.child_seed(spec.seed, 0))
    y, b = simulate_batch(b, cfg, base_seed=rng.child_seed(spec.seed, 1))
    fres = fisher_pipeline(y, b, FisherConfig(m=m, d=d, ridge=ridge, target_bins=bins))
    _, b_var, _ = est.augmented_smoother_batch(y[:1], cfg, model)
    table = _table(
        spec,
        [
            "bin",
            "t_ms",
            "fisher",
            "crb_single",
            "crb_batch",
            "smoother_bvar",
            "condition_number",
            "ridge_applied",
        ],
        {"m": m, "d": d},
    )
    for j, i in enumerate(fres.bins):
        diag = fres.diagnostics[j]
        table.add(
            int(i),
            float(i * cfg.tau),
            float(fres.f[j]),
            float(1.0 / fres.f[j]) if fres.f[j] > 0 else math.inf,
            float(fres.crb[j]),
            float(b_var[int(i)]),
            diag.get("condition_number", math.nan),
            diag.get("ridge_applied", 0.0),
        )
    return table


# ---------------------------------------------------------------------------
# single-trace simulation, dataset export, analytic report
# ---------------------------------------------------------------------------

def simulate_trace(spec: ExperimentSpec) -> Table:
    """One signal realization and its measurement record, as a table."""
    cfg = spec.trajectory_config()
    a = spec.analysis
    n = int(a.get("n_samples", 2000))
    params = spec.signal_params()
    trace = _generate_signal(params, n, cfg.tau, rng.child_seed(spec.seed, 0))
    y, b = simulate_batch([trace], cfg, base_seed=rng.child_seed(spec.seed, 1))
    table = _table(spec, ["t_ms", "b_pt", "y"], {"signal_kind": trace.kind})
    for i in range(len(trace)):
        table.add(float(i * cfg.tau), float(b[0, i]), float(y[0, i]))
    return table


def export_dataset(spec: ExperimentSpec, split: float = 0.8, out="dataset") -> Path:
    """Simulate a record/field dataset with the fixed calibration tail and a
    seed-deterministic train/test split, persisted in the binary format."""
    if not 0.0 < split < 1.0:
        raise ConfigError("split fraction must lie in (0, 1)")
    cfg = spec.trajectory_config()
    a = spec.analysis
    n_traces = int(a.get("n_traces", 400))
    n_signal = int(a.get("signal_samples", 498))
    n_tail = int(a.get("tail_samples", 158))
    tail_value = float(a.get("tail_value", 1.0))
    params = spec.signal_params()
    total = n_signal + n_tail
    b = np.empty((n_traces, total))
    for j in range(n_traces):
        trace = _generate_signal(params, n_signal, cfg.tau, rng.child_seed(spec.seed, 100 + j))
        b[j, :n_signal] = trace.values[:n_signal]
        b[j, n_signal:] = tail_value
    y, b = simulate_batch(b, cfg, base_seed=rng.child_seed(spec.seed, 1))
    g = rng.child_generator(spec.seed, 2)
    perm = g.permutation(n_traces)
    n_train = int(math.floor(split * n_traces))
    train = np.sort(perm[:n_train])
    test = np.sort(perm[n_train:])
    metadata = {
        "name": spec.name,
        "version": __version__,
        "config_sha256": spec.sha256,
        "seed": spec.seed,
        "system": dict(spec.system),
        "signal": dict(spec.signal),
        "units": {"fields": "pT", "records": "canonical (shot variance 1/2)", "tau": "ms"},
        "tau": cfg.tau,
        "n_traces": n_traces,
        "signal_samples": n_signal,
        "tail_samples": n_tail,
        "tail_value": tail_value,
        "split": {"train": int(n_train), "test": int(n_traces - n_train), "fraction": split},
    }
    arrays = {
        "fields": b,
        "records": y,
        "train_indices": train.astype(np.float64),
        "test_indices": test.astype(np.float64),
    }
    return write_dataset(Path(out), metadata, arrays)


def import_dataset(path) -> Dataset:
    """Load a dataset written by :func:`export_dataset`, verifying integrity."""
    ds = read_dataset(path)
    n_signal = ds.metadata["signal_samples"]
    n_tail = ds.metadata["tail_samples"]
    if ds.b.shape[1] != n_signal + n_tail:
        raise DomainError(
            f"trace length {ds.b.shape[1]} != signal {n_signal} + tail {n_tail}"
        )
    return ds


def run_report(spec: ExperimentSpec) -> Table:
    """Analytic headline numbers for the configured sensor."""
    cfg = spec.trajectory_config()
    ksq, g, v0, eta = cfg.kappa_z_sq, cfg.gamma_tot, cfg.v0, cfg.eta
    v_p = est.steady_variance_prediction(ksq, g, v0, eta)
    v_r = est.steady_variance_retrodiction(ksq, g, v0, eta)
    v_pr = est.combine_pqs(v_p, v_r)
    probe = paper_probe()
    ens = EnsembleParams()
    a1 = vector_polarizability(probe.detuning)
    a2 = tensor_polarizability(probe.detuning)
    budget = metrics.rearrangement_budget(1.0, 3.0, 0.375, 0.5)
    rows = [
        ("steady_prediction_variance", v_p, "canonical"),
        ("steady_retrodiction_variance", v_r, "canonical"),
        ("steady_combined_variance", v_pr, "canonical"),
        ("prediction_db_vs_css", metrics.squeezing_db(v_p, 0.5), "dB"),
        ("combined_db_vs_css", metrics.squeezing_db(v_pr, 0.5), "dB"),
        ("coupling_kappa_sq", coupling_kappa(probe, ens) ** 2, "1/s"),
        ("polarizability_ratio", a2 / a1, "dimensionless"),
        ("pulse_sensitivity_example", metrics.sensitivity(1.12, 625e-6), "fT/sqrt(Hz)"),
        ("rf_field_at_minus80dbm", metrics.rf_from_power(-80.0) * 1e12, "pT"),
        ("budget_correlated", budget.mse_corr, "light-noise units"),
        ("budget_uncorrelated", budget.mse_uncorr, "light-noise units"),
        ("budget_strong_standard_factor", budget.strong_standard_factor, "dimensionless"),
    ]
    table = _table(spec, ["quantity", "value", "unit"])
    for row in rows:
        table.add(*row)
    return table
