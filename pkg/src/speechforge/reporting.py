"""Report rendering: tab-separated tables with matplotlib figures alongside."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .wer import WerBreakdown, relative_improvement


def _write_tsv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as f:
        f.write("\t".join(header) + "\n")
        for row in rows:
            f.write("\t".join(str(c) for c in row) + "\n")


def write_wer_report(
    out_dir: str | Path,
    corpus: WerBreakdown,
    per_utt: dict[str, WerBreakdown] | None = None,
    stem: str = "wer_report",
) -> tuple[Path, Path]:
    """Per-utterance and pooled WER as TSV plus a bar-chart figure."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_utt = per_utt or {}

    rows = [
        [utt_id, b.ref_words, b.substitutions, b.deletions, b.insertions, f"{b.wer:.1f}"]
        for utt_id, b in sorted(per_utt.items())
    ]
    rows.append(
        ["ALL", corpus.ref_words, corpus.substitutions, corpus.deletions,
         corpus.insertions, f"{corpus.wer:.1f}"]
    )
    tsv = out_dir / f"{stem}.tsv"
    _write_tsv(tsv, ["utt_id", "ref_words", "sub", "del", "ins", "wer"], rows)

    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.35 * (len(per_utt) + 1))))
    names = [r[0] for r in rows]
    values = [float(r[5]) for r in rows]
    ax.barh(np.arange(len(names)), values, color="#4878d0")
    ax.set_yticks(np.arange(len(names)))
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.set_xlabel("WER [%]")
    ax.axvline(corpus.wer, color="#d65f5f", linestyle="--", label=f"pooled {corpus.wer:.1f}%")
    ax.legend(loc="lower right")
    fig.tight_layout()
    png = out_dir / f"{stem}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return tsv, png


def write_comparison_report(
    out_dir: str | Path,
    systems: list[tuple[str, float]],
    baseline: str,
    stem: str = "comparison",
) -> tuple[Path, Path]:
    """System-vs-baseline table (WER, relative improvement) plus figure."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_name = dict(systems)
    if baseline not in by_name:
        raise ValueError(f"baseline {baseline!r} not among the systems")
    base_wer = by_name[baseline]

    rows = []
    for name, wer_pct in systems:
        impr = relative_improvement(base_wer, wer_pct)
        rows.append([name, f"{wer_pct:.1f}", f"{impr:.1f}"])
    tsv = out_dir / f"{stem}.tsv"
    _write_tsv(tsv, ["system", "wer", "impr"], rows)

    fig, ax = plt.subplots(figsize=(1.8 + 1.3 * len(systems), 4))
    names = [name for name, _ in systems]
    values = [v for _, v in systems]
    colors = ["#d65f5f" if n == baseline else "#4878d0" for n in names]
    ax.bar(names, values, color=colors)
    for i, (name, v) in enumerate(systems):
        impr = relative_improvement(base_wer, v)
        ax.annotate(f"{v:.1f}\n({impr:+.1f}%)", (i, v), ha="center", va="bottom")
    ax.set_ylabel("WER [%]")
    ax.set_ylim(0, max(values) * 1.25)
    fig.tight_layout()
    png = out_dir / f"{stem}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return tsv, png


def write_convergence_report(
    out_dir: str | Path,
    errors: np.ndarray,
    stem: str = "convergence",
) -> tuple[Path, Path]:
    """Per-iteration spectral convergence error as TSV plus semilog figure."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [[i, f"{e:.8f}"] for i, e in enumerate(errors)]
    tsv = out_dir / f"{stem}.tsv"
    _write_tsv(tsv, ["iteration", "error"], rows)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(np.arange(len(errors)), np.maximum(errors, 1e-12), marker=".")
    ax.set_xlabel("iteration")
    ax.set_ylabel("spectral convergence error")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    png = out_dir / f"{stem}.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return tsv, png
