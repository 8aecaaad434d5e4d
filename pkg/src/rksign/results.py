"""Result tables: CSV schemas, round-trip-safe formatting, file helpers.

Every numeric field is written with 17 significant digits, which
round-trips float64 exactly; rerunning a scan with the same config
therefore reproduces the numeric columns byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

SCAN_SCHEMA = [
    "experiment", "n_qubits", "lambda", "statistic", "value", "error",
    "n_samples", "master_seed", "version",
]
FIDELITY_SCHEMA = [
    "n_qubits", "lambda", "g_over_n_mean", "g_over_n_stderr", "epsilon",
    "n_samples", "master_seed",
]
MAGIC_SCHEMA = ["n_qubits", "lambda", "m2_mean", "m2_stderr", "n_samples", "seed"]
DISENTANGLE_SCHEMA = [
    "n_qubits", "lambda", "eta_mean", "eta_stderr", "schedule", "t_max",
    "n_samples", "excluded_count",
]
FRAME_SCHEMA = [
    "n_qubits", "lambda", "t", "log_phi_tilde_dt", "log_stderr", "k_states", "seed",
]
HISTOGRAM_SCHEMA = [
    "bin_low", "bin_high", "empirical_p", "goe_q", "gue_q", "poisson_q",
]
THETA_SCHEMA = ["lambda", "theta", "theta_sigma", "r2"]

SCHEMAS = {
    "entropy-scan": SCAN_SCHEMA,
    "fluctuations": SCAN_SCHEMA,
    "ess": SCAN_SCHEMA,
    "fidelity-scan": FIDELITY_SCHEMA,
    "magic": MAGIC_SCHEMA,
    "disentangle": DISENTANGLE_SCHEMA,
    "frame-potential": FRAME_SCHEMA,
}


def format_value(value) -> str:
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def read_csv(path):
    """(header, rows-as-string-lists) of a result table."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
