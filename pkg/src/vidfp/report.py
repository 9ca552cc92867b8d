"""Evaluation report rendering: console table, JSON, confusion-matrix CSV,
and matplotlib figures written next to the delimited output."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .evaluate import CvReport


def render_text(report: CvReport) -> str:
    lines = []
    lines.append("cross-validation: %d folds x %d runs (seed %d)" % (report.k, report.runs, report.seed))
    lines.append("representation=%s level1=%s exclusions=%s classes=%d"
                 % (report.representation, report.level1, report.exclusion_profile, len(report.classes)))
    lines.append("")
    lines.append("run   balanced-acc   metaclasses   unknown%   level1-miss%")
    for stats in report.run_stats:
        lines.append("%3d   %12.4f   %11.1f   %8.2f   %12.2f" % (
            stats.run, stats.balanced_accuracy, stats.metaclass_count,
            100.0 * stats.unknown_fraction, 100.0 * stats.misassigned_fraction))
    lines.append("")
    lines.append("mean balanced accuracy: %.4f  (std %.4f)"
                 % (report.mean_balanced_accuracy, report.std_balanced_accuracy))
    for warning in report.warnings:
        lines.append("warning: %s" % warning)
    return "\n".join(lines)


def to_json_dict(report: CvReport) -> dict:
    return {
        "k": report.k,
        "runs": report.runs,
        "seed": report.seed,
        "representation": report.representation,
        "level1": report.level1,
        "exclusion_profile": report.exclusion_profile,
        "classes": list(report.classes),
        "mean_balanced_accuracy": report.mean_balanced_accuracy,
        "std_balanced_accuracy": report.std_balanced_accuracy,
        "runs_detail": [
            {"run": s.run, "balanced_accuracy": s.balanced_accuracy,
             "metaclass_count": s.metaclass_count,
             "unknown_fraction": s.unknown_fraction,
             "misassigned_fraction": s.misassigned_fraction}
            for s in report.run_stats
        ],
        "confusion": report.confusion,
        "warnings": list(report.warnings),
    }


def confusion_matrix_array(report: CvReport) -> np.ndarray:
    classes = list(report.classes)
    matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
    pos = {label: i for i, label in enumerate(classes)}
    for truth, row in report.confusion.items():
        for pred, count in row.items():
            if truth in pos and pred in pos:
                matrix[pos[truth], pos[pred]] = count
    return matrix


def write_confusion_csv(report: CvReport, path: Path) -> None:
    matrix = confusion_matrix_array(report)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\pred"] + list(report.classes))
        for label, row in zip(report.classes, matrix):
            writer.writerow([label] + [int(v) for v in row])


def write_confusion_figure(report: CvReport, path: Path) -> None:
    matrix = confusion_matrix_array(report)
    normalized = matrix / np.maximum(matrix.sum(axis=1, keepdims=True), 1)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(report.classes) + 2.0),) * 2)
    image = ax.imshow(normalized, cmap="viridis", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(report.classes)))
    ax.set_yticks(range(len(report.classes)))
    ax.set_xticklabels(report.classes, rotation=90, fontsize=7)
    ax.set_yticklabels(report.classes, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title("confusion (row-normalized)")
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_accuracy_figure(report: CvReport, path: Path) -> None:
    scores = [s.balanced_accuracy for s in report.run_stats]
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.plot(range(len(scores)), scores, marker="o", lw=1.0, label="per run")
    ax.axhline(report.mean_balanced_accuracy, color="tab:red", ls="--", lw=1.0,
               label="mean %.4f" % report.mean_balanced_accuracy)
    ax.set_xlabel("run")
    ax.set_ylabel("balanced accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("%d-fold CV, %d runs" % (report.k, report.runs))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_outputs(report: CvReport, out_dir) -> list[Path]:
    """Write report.json, confusion_matrix.csv, and the figures; returns
    the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = out / "report.json"
    json_path.write_text(json.dumps(to_json_dict(report), indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    written.append(json_path)

    csv_path = out / "confusion_matrix.csv"
    write_confusion_csv(report, csv_path)
    written.append(csv_path)

    heatmap_path = out / "confusion_matrix.png"
    write_confusion_figure(report, heatmap_path)
    written.append(heatmap_path)

    accuracy_path = out / "balanced_accuracy_runs.png"
    write_accuracy_figure(report, accuracy_path)
    written.append(accuracy_path)
    return written
