"""Run outputs: report.json, delimited data files, and rendered figures.

The metrics layer only aggregates; everything written to disk lives here
so runs stay reproducible (fixed float formatting, stable row order).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import RunReport
from .simrunner import POLICY_ORDER

_FLOAT_FMT = ".10g"


def _fmt(x) -> str:
    return format(float(x), _FLOAT_FMT)


def _report_payload(report: RunReport) -> dict:
    policies = {}
    for name, stats in report.policies.items():
        policies[name] = {
            "mean_bps": stats.mean,
            "normalized_mean": stats.normalized_mean,
            "requests": stats.requests,
            "grants": stats.grants,
            "n_samples": stats.n_samples,
            "cdf_grid_bps": stats.cdf_grid.tolist(),
            "cdf_values": stats.cdf_values.tolist(),
        }
    classifier = None
    if report.classifier is not None:
        c = report.classifier
        classifier = {
            "kind": c.kind,
            "feature_mode": c.feature_mode,
            "confusion_matrix": c.confusion.tolist(),
            "misclassification_count": c.error_count,
            "misclassification_error": c.error_rate,
            "roc_area": c.roc_area,
            "n_scored": c.n_scored,
            "n_training": c.n_training,
        }
    return {
        "scenario": report.scenario,
        "coherence_time_sub6_s": report.t_c_sub6,
        "coherence_time_mmwave_s": report.t_c_mmwave,
        "policies": policies,
        "classifier": classifier,
        "warnings": report.warnings,
        "config": report.config,
    }


def write_run_outputs(report: RunReport, outdir, figures: bool = True) -> dict[str, Path]:
    """Write the run's contract files; returns name -> path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    paths["report"] = outdir / "report.json"
    with open(paths["report"], "w") as fh:
        json.dump(_report_payload(report), fh, indent=2)
        fh.write("\n")

    paths["summary"] = outdir / "summary.csv"
    with open(paths["summary"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "policy", "mean_bps", "normalized_mean",
                         "requests", "grants", "n_samples"])
        for name in POLICY_ORDER:
            if name not in report.policies:
                continue
            s = report.policies[name]
            writer.writerow([report.scenario, name, _fmt(s.mean), _fmt(s.normalized_mean),
                             s.requests, s.grants, s.n_samples])

    for name, stats in report.policies.items():
        path = outdir / f"cdf_{name}.csv"
        paths[f"cdf_{name}"] = path
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rate_bps", "cdf"])
            for x, v in zip(stats.cdf_grid, stats.cdf_values):
                writer.writerow([_fmt(x), _fmt(v)])

    if report.classifier is not None:
        c = report.classifier
        path = outdir / f"confusion_{c.kind}.csv"
        paths["confusion"] = path
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["true_label", "predicted_label", "count"])
            for t in (0, 1):
                for p in (0, 1):
                    writer.writerow([t, p, int(c.confusion[t, p])])

    if figures:
        paths["figure_cdf"] = _render_cdf_figure(report, outdir)
        if report.classifier is not None:
            paths["figure_confusion"] = _render_confusion_figure(report, outdir)
    return paths


def _render_cdf_figure(report: RunReport, outdir: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for name in POLICY_ORDER:
        if name not in report.policies:
            continue
        s = report.policies[name]
        ax.plot(s.cdf_grid / 1e6, s.cdf_values, label=name)
    ax.set_xlabel("Effective throughput (Mbit/s)")
    ax.set_ylabel("CDF")
    ax.set_title(f"Scenario {report.scenario}: effective throughput by policy")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    path = outdir / f"cdf_scenario_{report.scenario}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _render_confusion_figure(report: RunReport, outdir: Path) -> Path:
    c = report.classifier
    fig, ax = plt.subplots(figsize=(4.2, 3.8))
    ax.imshow(c.confusion, cmap="Blues")
    for t in (0, 1):
        for p in (0, 1):
            ax.text(p, t, str(int(c.confusion[t, p])), ha="center", va="center")
    ax.set_xticks([0, 1], ["deny", "grant"])
    ax.set_yticks([0, 1], ["deny", "grant"])
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    mu = c.error_rate
    xi = "n/a" if c.roc_area is None else f"{c.roc_area:.4f}"
    ax.set_title(f"{c.kind} ({c.feature_mode}): mu={mu:.4%}, roc={xi}")
    fig.tight_layout()
    path = outdir / f"confusion_{c.kind}.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_sweep_outputs(kind: str, value_label: str, results, outdir,
                        figures: bool = True) -> dict[str, Path]:
    """Write sweep_<kind>.csv plus per-point run directories and a trend figure."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    paths["sweep"] = outdir / f"sweep_{kind}.csv"
    with open(paths["sweep"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([value_label, "policy", "mean_bps", "normalized_mean"])
        for value, report in results:
            for name in POLICY_ORDER:
                if name not in report.policies:
                    continue
                s = report.policies[name]
                writer.writerow([_fmt(value), name, _fmt(s.mean), _fmt(s.normalized_mean)])

    for value, report in results:
        sub = outdir / f"{kind}_{value:g}"
        write_run_outputs(report, sub, figures=False)

    if figures:
        fig, ax = plt.subplots(figsize=(6.5, 4.5))
        values = [v for v, _ in results]
        for name in POLICY_ORDER:
            if name not in results[0][1].policies:
                continue
            ys = [r.policies[name].normalized_mean for _, r in results]
            ax.plot(values, ys, marker="o", label=name)
        ax.set_xlabel(value_label)
        ax.set_ylabel("Normalized mean effective throughput")
        ax.grid(True, alpha=0.4)
        ax.legend()
        fig.tight_layout()
        paths["figure"] = outdir / f"sweep_{kind}.png"
        fig.savefig(paths["figure"], dpi=150)
        plt.close(fig)
    return paths
