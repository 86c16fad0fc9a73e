"""Experiment specification loading and validation.

A spec is a single TOML or JSON document with blocks ``system`` (sensor
parameters), ``signal`` (field-generator selection), ``analysis``
(driver-specific knobs), a ``seed`` and a ``name``. Re-running a driver from
an identical spec reproduces identical outputs, so the canonical hash of the
loaded document is embedded in every result table.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError
from .signals import DOUParams, HMMParams, OUParams, PulseParams, WhiteParams
from .trajectory import TrajectoryConfig

_SYSTEM_KEYS = {
    "tau",
    "kappa_z_sq",
    "kappa_y_sq",
    "eta",
    "gamma_tot",
    "v0",
    "g_b",
    "lia_bandwidth_khz",
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Parsed experiment specification."""

    name: str
    system: dict
    signal: dict
    analysis: dict
    seed: int
    raw: dict = field(default_factory=dict)

    @property
    def sha256(self) -> str:
        doc = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(doc.encode()).hexdigest()

    def trajectory_config(self, **overrides) -> TrajectoryConfig:
        params = {k: v for k, v in self.system.items()}
        params.update(overrides)
        try:
            return TrajectoryConfig(**params)
        except TypeError as exc:
            raise ConfigError(f"bad system block: {exc}") from exc

    def signal_params(self):
        return build_signal_params(self.signal)


def build_signal_params(block: dict):
    """Construct the generator parameter object selected by ``block['kind']``."""
    if "kind" not in block:
        raise ConfigError("signal block needs a 'kind'")
    kind = block["kind"]
    opts = {k: v for k, v in block.items() if k != "kind"}
    try:
        if kind == "ou":
            if "v_ss" in opts:
                return OUParams.from_stationary(opts["beta"], opts["v_ss"])
            return OUParams(beta=opts["beta"], sigma_ou=opts["sigma_ou"])
        if kind == "dou":
            return DOUParams(
                ou1=OUParams.from_stationary(opts["beta1"], opts["v_ss1"]),
                ou2=OUParams.from_stationary(opts["beta2"], opts["v_ss2"]),
                omega_d=opts["omega_d"],
            )
        if kind == "white":
            return WhiteParams(**opts)
        if kind == "pulses":
            return PulseParams(**opts)
        if kind == "hmm":
            n_states = opts.get("n_states", 10)
            p_stay = opts.get("p_stay", 0.8)
            b_max = opts.get("b_max", 14.0)
            import numpy as np

            levels = np.linspace(-b_max, b_max, n_states)
            trans = np.full((n_states, n_states), (1.0 - p_stay) / (n_states - 1))
            np.fill_diagonal(trans, p_stay)
            return HMMParams(
                n_states=n_states,
                levels=levels,
                transition=trans,
                hold=opts.get("hold", 0.740),
            )
    except KeyError as exc:
        raise ConfigError(f"signal block for kind {kind!r} misses {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"bad signal block: {exc}") from exc
    raise ConfigError(f"unknown signal kind {kind!r}")


def _load_document(path: Path) -> dict:
    text = path.read_bytes()
    if path.suffix.lower() == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # python >= 3.11
        except ImportError:
            try:
                import tomli as tomllib
            except ImportError as exc:
                raise ConfigError("TOML support needs python >= 3.11 or the tomli package") from exc
        try:
            return tomllib.loads(text.decode())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    raise ConfigError(f"unsupported config suffix {path.suffix!r} (use .json or .toml)")


def load_spec(path, seed_override: Optional[int] = None) -> ExperimentSpec:
    """Load and validate an experiment spec from a TOML/JSON file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    doc = _load_document(path)
    return spec_from_dict(doc, seed_override=seed_override)


def spec_from_dict(doc: dict, seed_override: Optional[int] = None) -> ExperimentSpec:
    if not isinstance(doc, dict):
        raise ConfigError("spec document must be a table/object")
    system = dict(doc.get("system", {}))
    if not isinstance(system, dict):
        raise ConfigError("'system' must be a table")
    unknown = set(system) - _SYSTEM_KEYS
    if unknown:
        raise ConfigError(f"unknown system keys: {sorted(unknown)}")
    system.setdefault("tau", 0.025)
    for key, value in system.items():
        if value is not None and not isinstance(value, (int, float)):
            raise ConfigError(f"system.{key} must be numeric")
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"system.{key} must be finite")
    signal = doc.get("signal", {"kind": "ou", "beta": 0.268, "v_ss": 6.12})
    analysis = doc.get("analysis", {})
    if not isinstance(analysis, dict):
        raise ConfigError("'analysis' must be a table")
    seed = doc.get("seed", 20240817)
    if seed_override is not None:
        seed = seed_override
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    spec = ExperimentSpec(
        name=str(doc.get("name", "experiment")),
        system=dict(system),
        signal=dict(signal),
        analysis=dict(analysis),
        seed=int(seed),
        raw=doc,
    )
    # fail early on inconsistent blocks
    spec.trajectory_config()
    spec.signal_params()
    return spec


def default_spec(**overrides) -> ExperimentSpec:
    doc: dict[str, Any] = {
        "name": "default",
        "system": {"tau": 0.025},
        "signal": {"kind": "ou", "beta": 0.268, "v_ss": 6.12},
        "analysis": {},
        "seed": 20240817,
    }
    doc.update(overrides)
    return spec_from_dict(doc)
