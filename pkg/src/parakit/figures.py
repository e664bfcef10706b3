"""Figure rendering: score scatter, dataset histograms, calibration bars.

All renderers draw to image files (format inferred from the extension)
using a non-interactive backend, so they work headless. They are wired
to the command line's --figures flag and usable directly.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus import CalibrationReport, ScoredPair
from .errors import InputError
from .selection import SelectionReport

VERDICT_COLORS = {
    "accepted": "#2a9d3e",
    "rejected_rouge": "#e08f00",
    "rejected_similarity": "#c62828",
    "rejected_empty": "#9e9e9e",
}


def render_selection_figure(reports: Sequence[SelectionReport], out_path: str) -> str:
    """Scatter every candidate by (ROUGE-L f, similarity) with thresholds.

    Points are colored by verdict; selected candidates get a star marker.
    Threshold lines come from the first report's policy. Returns the
    output path.
    """
    if not reports:
        raise InputError("reports must be non-empty")
    policy = reports[0].policy
    fig, ax = plt.subplots(figsize=(7, 5), constrained_layout=True)
    seen_verdicts: set[str] = set()
    for report in reports:
        for i, cand in enumerate(report.candidates):
            label = cand.verdict if cand.verdict not in seen_verdicts else None
            seen_verdicts.add(cand.verdict)
            ax.scatter(
                cand.rouge_l.f_measure,
                cand.similarity,
                color=VERDICT_COLORS[cand.verdict],
                label=label,
                s=36,
                zorder=3,
            )
            if i == report.selected_index:
                ax.scatter(
                    cand.rouge_l.f_measure,
                    cand.similarity,
                    marker="*",
                    s=260,
                    facecolors="none",
                    edgecolors="#1a237e",
                    linewidths=1.2,
                    zorder=4,
                    label="selected" if "selected" not in seen_verdicts else None,
                )
                seen_verdicts.add("selected")
    ax.axvline(policy.rouge_max, color="#555555", linestyle="--", linewidth=1)
    ax.axhline(policy.similarity_min, color="#555555", linestyle=":", linewidth=1)
    if policy.similarity_max is not None:
        ax.axhline(policy.similarity_max, color="#555555", linestyle=":", linewidth=1)
    ax.set_xlabel("ROUGE-L f-measure (lexical overlap)")
    ax.set_ylabel("embedding cosine similarity")
    ax.set_title("Candidate scores and filter thresholds")
    ax.legend(loc="lower right", fontsize=8)
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def render_stats_figure(scored: Sequence[ScoredPair], out_path: str) -> str:
    """Histograms of per-pair similarity, ROUGE-L, and BLEU."""
    if not scored:
        raise InputError("scored pairs must be non-empty")
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.6), constrained_layout=True)
    panels = [
        ("similarity", [s.similarity for s in scored]),
        ("ROUGE-L f-measure", [s.rouge_l.f_measure for s in scored]),
        ("BLEU", [s.bleu.score for s in scored]),
    ]
    for ax, (name, values) in zip(axes, panels):
        ax.hist(values, bins=min(30, max(5, len(values))), color="#4a7db5")
        ax.set_xlabel(name)
        ax.set_ylabel("pairs")
    fig.suptitle(f"Score distributions over {len(scored)} pairs")
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def render_calibration_figure(report: CalibrationReport, out_path: str) -> str:
    """Horizontal bars of overall error per configuration, best highlighted."""
    entries = report.entries
    labels = [
        f"fold={e.tokenization.case_fold} {e.tokenization.punctuation_mode} "
        f"smooth={e.smoothing}"
        for e in entries
    ]
    values = [e.overall_mae for e in entries]
    colors = ["#2a9d3e" if e == report.best else "#4a7db5" for e in entries]
    fig, ax = plt.subplots(figsize=(8, 0.45 * len(entries) + 1.5), constrained_layout=True)
    ax.barh(range(len(entries)), values, color=colors)
    ax.set_yticks(range(len(entries)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("mean absolute error vs known scores")
    ax.set_title("Tokenization calibration sweep")
    fig.savefig(out_path)
    plt.close(fig)
    return out_path
