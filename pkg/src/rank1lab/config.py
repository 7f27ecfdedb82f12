"""Run configuration: a flat key-value text format with dotted keys, plus
defaults sized so the stock scans carry their advertised statistical weight
(>= 1e5 ellipticity probes, >= 1e3 injectivity starts).

Example::

    seed = 42
    spread = 0.4
    output_dir = out
    scan.n_f = 500
    scan.n_dir = 200
    model.blatz_ko.mu = 1.0
    probe_f.compressive = 0.4 0 0  0 1 0  0 0 1
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .materials import MODEL_REGISTRY, canonical_model_name
from .tensors import det3

ENV_SEED = "RANK1LAB_SEED"


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def default_models() -> dict:
    return {
        "blatz-ko": {"mu": 1.0},
        "neo-hooke": {"mu": 1.0, "lam": 1.0},
        "svk": {"mu": 1.0, "lam": 1.0},
        "volumetric-cubic": {"c": 1.0},
    }


def default_probes() -> list:
    return [np.eye(3), np.diag([0.4, 1.0, 1.0])]


@dataclass
class RunConfig:
    seed: int = 0
    spread: float = 0.4
    output_dir: str = "out"
    n_F: int = 500
    n_dir: int = 200
    n_starts: int = 1024
    s_max: float = 3.0
    refine_k: int = 8
    identity_samples: int = 10000
    gradcheck_n_F: int = 100
    theorem_samples: int = 10000
    twin_samples: int = 100000
    twin_det_samples: int = 10000
    bk_alpha_min: float = 1.0
    bk_alpha_max: float = 4.0
    bk_n: int = 512
    pc_lambda_min: float = 0.2
    pc_lambda_max: float = 5.0
    pc_n: int = 25
    models: dict = field(default_factory=default_models)
    probe_F: list = field(default_factory=default_probes)

    def validate(self):
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not 0.0 < self.spread < 1.0:
            raise ConfigError("spread must lie in (0, 1)")
        positive = [
            ("scan.n_f", self.n_F),
            ("scan.n_dir", self.n_dir),
            ("scan.n_starts", self.n_starts),
            ("scan.refine_k", self.refine_k),
            ("suite.identity_samples", self.identity_samples),
            ("suite.gradcheck_n_f", self.gradcheck_n_F),
            ("suite.theorem_samples", self.theorem_samples),
            ("suite.twin_samples", self.twin_samples),
            ("suite.twin_det_samples", self.twin_det_samples),
            ("blatzko.n", self.bk_n),
            ("pc.n", self.pc_n),
        ]
        for name, value in positive:
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        for name, params in self.models.items():
            if name not in MODEL_REGISTRY:
                raise ConfigError(f"unknown model '{name}'")
            try:
                MODEL_REGISTRY[name](**params)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad parameters for model '{name}': {exc}") from None
        for P in self.probe_F:
            if np.asarray(P).shape != (3, 3) or not np.isfinite(P).all():
                raise ConfigError("probe matrices must be finite 3x3")
            if det3(np.asarray(P, dtype=float)) <= 0.0:
                raise ConfigError("probe matrices must lie in GL+(3)")

    def jsonable(self) -> dict:
        # output_dir is intentionally absent: it is environmental (reported
        # in the meta block) so reports stay comparable across locations.
        out = {
            "seed": self.seed,
            "spread": self.spread,
            "scan": {
                "n_f": self.n_F,
                "n_dir": self.n_dir,
                "n_starts": self.n_starts,
                "s_max": self.s_max,
                "refine_k": self.refine_k,
            },
            "suite": {
                "identity_samples": self.identity_samples,
                "gradcheck_n_f": self.gradcheck_n_F,
                "theorem_samples": self.theorem_samples,
                "twin_samples": self.twin_samples,
                "twin_det_samples": self.twin_det_samples,
            },
            "blatzko": {
                "alpha_min": self.bk_alpha_min,
                "alpha_max": self.bk_alpha_max,
                "n": self.bk_n,
            },
            "pc": {
                "lambda_min": self.pc_lambda_min,
                "lambda_max": self.pc_lambda_max,
                "n": self.pc_n,
            },
            "models": self.models,
            "probe_f": [np.asarray(P).tolist() for P in self.probe_F],
        }
        return out


_SCALAR_KEYS = {
    "seed": ("seed", int),
    "spread": ("spread", float),
    "output_dir": ("output_dir", str),
    "scan.n_f": ("n_F", int),
    "scan.n_dir": ("n_dir", int),
    "scan.n_starts": ("n_starts", int),
    "scan.s_max": ("s_max", float),
    "scan.refine_k": ("refine_k", int),
    "suite.identity_samples": ("identity_samples", int),
    "suite.gradcheck_n_f": ("gradcheck_n_F", int),
    "suite.theorem_samples": ("theorem_samples", int),
    "suite.twin_samples": ("twin_samples", int),
    "suite.twin_det_samples": ("twin_det_samples", int),
    "blatzko.alpha_min": ("bk_alpha_min", float),
    "blatzko.alpha_max": ("bk_alpha_max", float),
    "blatzko.n": ("bk_n", int),
    "pc.lambda_min": ("pc_lambda_min", float),
    "pc.lambda_max": ("pc_lambda_max", float),
    "pc.n": ("pc_n", int),
}


def parse_config_text(text: str) -> RunConfig:
    """Parse the flat dotted-key format into a RunConfig.

    Unknown keys are rejected. probe_f.* entries, when present, replace the
    default probe list (sorted by label for reproducibility).
    """
    cfg = RunConfig()
    probes: dict[str, np.ndarray] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key_lc = key.lower()
        if key_lc in _SCALAR_KEYS:
            attr, typ = _SCALAR_KEYS[key_lc]
            try:
                setattr(cfg, attr, typ(value))
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        elif key_lc.startswith("model."):
            parts = key_lc.split(".")
            if len(parts) != 3:
                raise ConfigError(f"line {lineno}: model keys look like model.<name>.<param>")
            name = canonical_model_name(parts[1])
            if name not in MODEL_REGISTRY:
                raise ConfigError(f"line {lineno}: unknown model '{parts[1]}'")
            try:
                cfg.models.setdefault(name, {})[parts[2]] = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: model parameters must be numbers") from None
        elif key_lc.startswith("probe_f."):
            label = key_lc.split(".", 1)[1]
            entries = value.replace(",", " ").split()
            if len(entries) != 9:
                raise ConfigError(f"line {lineno}: probe matrices need 9 numbers (row-major)")
            try:
                probes[label] = np.array([float(v) for v in entries]).reshape(3, 3)
            except ValueError:
                raise ConfigError(f"line {lineno}: probe entries must be numbers") from None
        else:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
    if probes:
        cfg.probe_F = [probes[label] for label in sorted(probes)]
    return cfg


def load_run_config(path: str | None, seed_override: int | None = None,
                    out_override: str | None = None) -> RunConfig:
    """Config file -> RANK1LAB_SEED env -> explicit overrides, then validate."""
    if path is None:
        cfg = RunConfig()
    else:
        with open(path, encoding="utf-8") as fh:
            cfg = parse_config_text(fh.read())
    env_seed = os.environ.get(ENV_SEED)
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer, got {env_seed!r}") from None
    if seed_override is not None:
        cfg.seed = seed_override
    if out_override is not None:
        cfg.output_dir = out_override
    cfg.validate()
    return cfg
