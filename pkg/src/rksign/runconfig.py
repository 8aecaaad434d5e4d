"""Run configuration: defaults, INI file loading, flag overrides, validation.

A config file is a plain ``key = value`` text file under a ``[run]``
section (INI syntax); command-line flags override file values.  The fully
resolved configuration is snapshotted as ``resolved_config.json`` next to
every run's outputs.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ConfigError

EXPERIMENTS = (
    "generate",
    "entropy-scan",
    "fidelity-scan",
    "ess",
    "fluctuations",
    "magic",
    "disentangle",
    "frame-potential",
)

# Stable ids feeding the per-(experiment, N) seed streams; appending new
# kinds must not renumber existing ones.
KIND_IDS = {name: i + 1 for i, name in enumerate(EXPERIMENTS)}


@dataclass
class RunConfig:
    experiment: str
    qubits: list = field(default_factory=lambda: [8])
    lambda_min: float = 0.0
    lambda_max: float = 1.5
    lambda_steps: int = 16
    samples: int = 100
    seed: int = 2024
    out: str = "runs/out"
    workers: int = 1
    resume: bool = False
    # fidelity
    epsilon: float = 1e-3
    # ess
    histograms: bool = False
    # magic
    magic_cap: int = 12
    # disentangler
    schedule: str = "const"
    beta0: float = 400.0
    exponent: float = 0.1
    coeff: float = 7.1e-6
    tmax: int = 0  # 0 means "use k_factor * N^2"
    k_factor: int = 100
    cost_mode: str = "ring"
    states: str = ""  # directory of `generate` dumps to anneal instead
    # frame potential
    t_list: list = field(default_factory=lambda: [1, 2, 3, 4])

    def lambda_grid(self) -> list:
        if self.lambda_steps == 1:
            return [float(self.lambda_min)]
        return [float(x) for x in
                np.linspace(self.lambda_min, self.lambda_max, self.lambda_steps)]

    def t_max_for(self, n_qubits: int) -> int:
        return self.tmax if self.tmax > 0 else self.k_factor * n_qubits**2

    def validate(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}")
        if not self.qubits:
            raise ConfigError("qubits", "need at least one system size")
        for n in self.qubits:
            if not 1 <= n <= 20:
                raise ConfigError("qubits", f"n_qubits={n} outside [1, 20]")
        if self.lambda_min < 0:
            raise ConfigError("lambda_min", "must be >= 0")
        if self.lambda_max < self.lambda_min:
            raise ConfigError("lambda_max", "must be >= lambda_min")
        if self.lambda_steps < 1:
            raise ConfigError("lambda_steps", "must be >= 1")
        if self.samples < 1:
            raise ConfigError("samples", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.epsilon <= 0:
            raise ConfigError("epsilon", "must be > 0")
        if self.schedule not in ("const", "power", "quad"):
            raise ConfigError("schedule", f"unknown schedule {self.schedule!r}")
        if self.cost_mode not in ("ring", "full"):
            raise ConfigError("cost_mode", f"unknown cost mode {self.cost_mode!r}")
        if self.tmax < 0:
            raise ConfigError("tmax", "must be >= 0 (0 selects k_factor * N^2)")
        if self.k_factor < 1:
            raise ConfigError("k_factor", "must be >= 1")
        for t in self.t_list:
            if not 1 <= t <= 8:
                raise ConfigError("t_list", f"moment index {t} outside [1, 8]")
        if self.experiment == "frame-potential" and self.samples < 2:
            raise ConfigError("samples", "frame potential needs at least 2 states")
        return self

    def resolved(self) -> dict:
        return asdict(self)


_LIST_FIELDS = {"qubits": int, "t_list": int}
_SCALARS = {
    "experiment": str, "lambda_min": float, "lambda_max": float,
    "lambda_steps": int, "samples": int, "seed": int, "out": str,
    "workers": int, "resume": bool, "epsilon": float, "histograms": bool,
    "magic_cap": int, "schedule": str, "beta0": float, "exponent": float,
    "coeff": float, "tmax": int, "k_factor": int, "cost_mode": str,
    "states": str,
}


def _parse_value(name, kind, raw):
    try:
        if kind is bool:
            if isinstance(raw, bool):
                return raw
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"cannot parse {raw!r} as {kind.__name__}") from exc


def parse_int_list(name, raw) -> list:
    if isinstance(raw, (list, tuple)):
        return [int(v) for v in raw]
    try:
        return [int(tok) for tok in str(raw).replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse {raw!r} as an integer list") from exc


def load_config_file(path) -> dict:
    """Key/value pairs from the [run] section of an INI config file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError("config", f"cannot read config file {path}")
    if "run" not in parser:
        raise ConfigError("config", f"{path} has no [run] section")
    return dict(parser["run"])


def build_config(experiment: str, file_values: dict, overrides: dict) -> RunConfig:
    """Merge defaults <- config file <- CLI overrides, then validate."""
    known = {f.name for f in fields(RunConfig)}
    merged = {}
    for source in (file_values, overrides):
        for key, raw in source.items():
            key = key.replace("-", "_")
            if raw is None:
                continue
            if key == "experiment":
                continue
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
            if key in _LIST_FIELDS:
                merged[key] = parse_int_list(key, raw)
            else:
                merged[key] = _parse_value(key, _SCALARS[key], raw)
    return RunConfig(experiment=experiment, **merged).validate()


def effective_master_seed(master_seed: int, experiment: str, n_qubits: int) -> int:
    """Per-(experiment, N) stream seed.

    The tuple (master_seed, experiment kind, N, sample index) determines
    every random draw; lambda never enters, so realizations are paired
    across the grid and adding grid points cannot change existing draws.
    """
    ss = np.random.SeedSequence(
        entropy=int(master_seed) & (2**64 - 1),
        spawn_key=(KIND_IDS[experiment], int(n_qubits)),
    )
    return int(ss.generate_state(1, np.uint64)[0])
