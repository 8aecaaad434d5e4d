"""The nine figure kinds rendered from rksign result tables.

Every renderer consumes validated rows (see ``schemas``) and draws with
matplotlib only; no physics is recomputed here.  The three reference
constants that appear as guide lines are hardcoded:

* ``LAMBDA_C``      REM transition sqrt(2 ln 2)/2, dashed step in the
                    fidelity figure;
* ``RTILDE_GOE``    0.53, GOE value of the mean adjacent-gap ratio;
* ``RTILDE_POISSON``0.39, Poisson value of the same.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import schemas
from .schemas import SchemaError, floats, load_table

LAMBDA_C = math.sqrt(2.0 * math.log(2.0)) / 2.0  # ~ 0.589
RTILDE_GOE = 0.53
RTILDE_POISSON = 0.39

RC_PARAMS = {
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "lines.linewidth": 1.3,
    "lines.markersize": 4.5,
    "legend.fontsize": 8,
    "svg.hashsalt": "rkfigures",
}


def _group(rows, key):
    grouped = defaultdict(list)
    for row in rows:
        grouped[row[key]].append(row)
    return dict(sorted(grouped.items(), key=lambda kv: _maybe_number(kv[0])))


def _maybe_number(value):
    try:
        return (0, float(value))
    except ValueError:
        return (1, value)


def _scan_statistic(rows, statistic, path):
    picked = [r for r in rows if r["statistic"] == statistic]
    if not picked:
        raise SchemaError(f"{path}: no rows with statistic {statistic!r}")
    return picked


def _errorbar_by_n(ax, rows, ycol, yerrcol, scale_by_n=False):
    for n, group in _group(rows, "n_qubits").items():
        group = sorted(group, key=lambda r: float(r["lambda"]))
        lam = floats(group, "lambda")
        scale = float(n) if scale_by_n else 1.0
        y = [float(r[ycol]) / scale for r in group]
        err = [float(r[yerrcol]) / scale if r[yerrcol] not in ("", "nan") else 0.0
               for r in group]
        ax.errorbar(lam, y, yerr=err, marker="o", capsize=2, label=f"N={n}")
    ax.set_xlabel(r"$\lambda$")
    ax.legend()


def render_fidelity(paths, fit_path, axs):
    rows = load_table(paths[0], schemas.FIDELITY)
    (ax,) = axs
    _errorbar_by_n(ax, rows, "g_over_n_mean", "g_over_n_stderr")
    lam = floats(rows, "lambda")
    step_x = [min(lam), LAMBDA_C, LAMBDA_C, max(lam)]
    ax.plot(step_x, [1.0, 1.0, 0.0, 0.0], "k--", alpha=0.7,
            label=r"$N\to\infty$ step")
    ax.legend()
    ax.set_ylabel(r"$g_{\lambda\lambda}/N$")


def render_entropy(paths, fit_path, axs):
    rows = _scan_statistic(load_table(paths[0], schemas.SCAN),
                           "entropy_half_mean", paths[0])
    ax_lam, ax_n = axs
    _errorbar_by_n(ax_lam, rows, "value", "error", scale_by_n=True)
    ax_lam.set_ylabel(r"$S_{N/2}/N$")
    for lam, group in _group(rows, "lambda").items():
        group = sorted(group, key=lambda r: int(r["n_qubits"]))
        ns = [int(r["n_qubits"]) for r in group]
        ax_n.plot(ns, [float(r["value"]) / n for r, n in zip(group, ns)],
                  marker="s", label=rf"$\lambda={float(lam):g}$")
    ax_n.set_xlabel("N")
    ax_n.set_ylabel(r"$S_{N/2}/N$")
    ax_n.legend()


def render_ess_hist(paths, fit_path, axs):
    rows = load_table(paths[0], schemas.HISTOGRAM)
    (ax,) = axs
    finite = [r for r in rows if math.isfinite(float(r["bin_high"]))]
    lows = floats(finite, "bin_low")
    highs = floats(finite, "bin_high")
    widths = [h - l for l, h in zip(lows, highs)]
    centers = [(h + l) / 2 for l, h in zip(lows, highs)]
    emp = [float(r["empirical_p"]) / w for r, w in zip(finite, widths)]
    ax.bar(centers, emp, width=widths, alpha=0.45, label="pooled ratios")
    for column, label in (("goe_q", "GOE"), ("gue_q", "GUE"),
                          ("poisson_q", "Poisson")):
        dens = [float(r[column]) / w for r, w in zip(finite, widths)]
        ax.plot(centers, dens, label=label)
    ax.set_xlabel("r")
    ax.set_ylabel("P(r)")
    ax.legend()


def render_ess_trend(paths, fit_path, axs):
    rows = load_table(paths[0], schemas.SCAN)
    ax_dkl, ax_rt = axs
    _errorbar_by_n(ax_dkl, _scan_statistic(rows, "dkl_goe", paths[0]),
                   "value", "error")
    ax_dkl.set_ylabel(r"$D_{\mathrm{KL}}$ vs GOE")
    _errorbar_by_n(ax_rt, _scan_statistic(rows, "rtilde_mean", paths[0]),
                   "value", "error")
    ax_rt.axhline(RTILDE_GOE, color="k", ls="--", alpha=0.7, label="GOE 0.53")
    ax_rt.axhline(RTILDE_POISSON, color="k", ls=":", alpha=0.7,
                  label="Poisson 0.39")
    ax_rt.set_ylabel(r"$\langle \tilde r \rangle$")
    ax_rt.legend()


def render_variance(paths, fit_path, axs):
    rows = _scan_statistic(load_table(paths[0], schemas.SCAN),
                           "entropy_half_var", paths[0])
    (ax,) = axs
    _errorbar_by_n(ax, rows, "value", "error")
    ax.set_ylabel(r"$\mathrm{Var}(S_{N/2})$")


def render_theta(paths, fit_path, axs):
    rows = load_table(paths[0], schemas.THETA)
    (ax,) = axs
    rows = sorted(rows, key=lambda r: float(r["lambda"]))
    ax.errorbar(floats(rows, "lambda"), floats(rows, "theta"),
                yerr=floats(rows, "theta_sigma"), marker="o", capsize=2)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\theta$")


def render_magic(paths, fit_path, axs):
    rows = load_table(paths[0], schemas.MAGIC)
    ax_lam, ax_inv = axs
    _errorbar_by_n(ax_lam, rows, "m2_mean", "m2_stderr", scale_by_n=True)
    ax_lam.set_ylabel(r"$M_2/N$")
    lam_min = min(float(r["lambda"]) for r in rows)
    at_min = [r for r in rows if float(r["lambda"]) == lam_min]
    at_min = sorted(at_min, key=lambda r: int(r["n_qubits"]))
    inv_n = [1.0 / int(r["n_qubits"]) for r in at_min]
    dens = [float(r["m2_mean"]) / int(r["n_qubits"]) for r in at_min]
    errs = [float(r["m2_stderr"]) / int(r["n_qubits"]) for r in at_min]
    ax_inv.errorbar(inv_n, dens, yerr=errs, marker="o", ls="none", capsize=2,
                    label=rf"$\lambda={lam_min:g}$")
    if fit_path is not None:
        with open(fit_path) as fh:
            fit = json.load(fh)
        params = {p["name"]: p["value"] for p in fit.get("params", [])}
        if "slope" in params and "intercept" in params:
            xs = np.linspace(0.0, max(inv_n) * 1.05, 50)
            ax_inv.plot(xs, params["intercept"] + params["slope"] * xs, "k--",
                        label=f"fit: intercept {params['intercept']:.3f}")
    ax_inv.set_xlabel("1/N")
    ax_inv.set_ylabel(r"$M_2/N$")
    ax_inv.set_xlim(left=0.0)
    ax_inv.legend()


def render_disentangle(paths, fit_path, axs):
    rows = load_table(paths[0], schemas.DISENTANGLE)
    (ax,) = axs
    for (n, sched, tmax), group in sorted(
        _group_multi(rows, ("n_qubits", "schedule", "t_max")).items()
    ):
        group = sorted(group, key=lambda r: float(r["lambda"]))
        ax.errorbar(
            floats(group, "lambda"),
            floats(group, "eta_mean"),
            yerr=floats(group, "eta_stderr"),
            marker="o",
            capsize=2,
            label=f"N={n}, {sched}, $t_{{max}}$={tmax}",
        )
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\eta$")
    ax.legend()


def _group_multi(rows, keys):
    grouped = defaultdict(list)
    for row in rows:
        grouped[tuple(row[k] for k in keys)].append(row)
    return grouped


def render_frame_potential(paths, fit_path, axs):
    rows = load_table(paths[0], schemas.FRAME)
    (ax,) = axs
    for t, group in _group(rows, "t").items():
        group = sorted(group, key=lambda r: float(r["lambda"]))
        ax.errorbar(
            floats(group, "lambda"),
            floats(group, "log_phi_tilde_dt"),
            yerr=floats(group, "log_stderr"),
            marker="o",
            capsize=2,
            label=f"t={t}",
        )
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\log\,\tilde\Phi_t D_t$")
    ax.legend()


# kind -> (renderer, number of panels)
FIGURE_KINDS = {
    "fidelity": (render_fidelity, 1),
    "entropy": (render_entropy, 2),
    "ess-hist": (render_ess_hist, 1),
    "ess-trend": (render_ess_trend, 2),
    "variance": (render_variance, 1),
    "theta": (render_theta, 1),
    "magic": (render_magic, 2),
    "disentangle": (render_disentangle, 1),
    "frame-potential": (render_frame_potential, 1),
}


def render(kind, in_paths, out_base, style=None, fit_path=None) -> list:
    """Draw one figure kind and write <out_base>.png and <out_base>.svg."""
    if kind not in FIGURE_KINDS:
        raise SchemaError(
            f"unknown figure kind {kind!r}; known: {sorted(FIGURE_KINDS)}"
        )
    if not in_paths:
        raise SchemaError("need at least one input table")
    renderer, n_panels = FIGURE_KINDS[kind]
    with plt.rc_context(RC_PARAMS):
        if style is not None:
            plt.style.use(style)
        fig, axs = plt.subplots(
            1, n_panels, figsize=(4.2 * n_panels, 3.2), squeeze=False
        )
        try:
            renderer(list(in_paths), fit_path, list(axs[0]))
            fig.tight_layout()
            written = []
            for suffix, metadata in (
                (".png", {"Software": None}),
                (".svg", {"Date": None}),
            ):
                target = str(out_base) + suffix
                fig.savefig(target, metadata=metadata)
                written.append(target)
        finally:
            plt.close(fig)
    return written
