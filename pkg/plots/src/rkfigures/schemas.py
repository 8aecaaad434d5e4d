"""Declared input-table schemas and strict CSV loading."""

from __future__ import annotations

import csv

SCAN = [
    "experiment", "n_qubits", "lambda", "statistic", "value", "error",
    "n_samples", "master_seed", "version",
]
FIDELITY = [
    "n_qubits", "lambda", "g_over_n_mean", "g_over_n_stderr", "epsilon",
    "n_samples", "master_seed",
]
MAGIC = ["n_qubits", "lambda", "m2_mean", "m2_stderr", "n_samples", "seed"]
DISENTANGLE = [
    "n_qubits", "lambda", "eta_mean", "eta_stderr", "schedule", "t_max",
    "n_samples", "excluded_count",
]
FRAME = [
    "n_qubits", "lambda", "t", "log_phi_tilde_dt", "log_stderr", "k_states", "seed",
]
HISTOGRAM = ["bin_low", "bin_high", "empirical_p", "goe_q", "gue_q", "poisson_q"]
THETA = ["lambda", "theta", "theta_sigma", "r2"]


class SchemaError(ValueError):
    """Input table header does not match the figure kind's schema."""


def load_table(path, schema) -> list:
    """Rows as dicts, with the header checked against ``schema`` exactly."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != schema:
            raise SchemaError(
                f"{path}: header {header} does not match the expected schema {schema}"
            )
        rows = [dict(zip(schema, row)) for row in reader]
    if not rows:
        raise SchemaError(f"{path}: table has no data rows")
    return rows


def floats(rows, column) -> list:
    return [float(r[column]) for r in rows]
