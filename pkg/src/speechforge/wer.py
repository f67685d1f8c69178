"""Word error rate scoring and relative-improvement arithmetic.

Levenshtein alignment with unit costs over whitespace-split words; among
minimal-cost alignments the one with fewer insertions, then fewer
deletions, is reported. Corpus WER pools counts, never averages
percentages.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import DataError


@dataclass
class WerBreakdown:
    substitutions: int
    deletions: int
    insertions: int
    ref_words: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        return 100.0 * self.errors / self.ref_words


def wer(ref: list[str] | str, hyp: list[str] | str) -> WerBreakdown:
    """Align hyp against a non-empty ref; costs compare as (total, ins, del)."""
    ref_words = ref.split() if isinstance(ref, str) else list(ref)
    hyp_words = hyp.split() if isinstance(hyp, str) else list(hyp)
    if not ref_words:
        raise ValueError("empty reference")

    n, m = len(ref_words), len(hyp_words)
    # dp[i][j] = (edits, insertions, deletions) for ref[:i] vs hyp[:j]
    dp = [[(0, 0, 0)] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = (i, 0, i)
    for j in range(1, m + 1):
        dp[0][j] = (j, j, 0)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            e, ins, dele = dp[i - 1][j - 1]
            if ref_words[i - 1] == hyp_words[j - 1]:
                best = (e, ins, dele)
            else:
                best = (e + 1, ins, dele)
            e, ins, dele = dp[i][j - 1]
            cand = (e + 1, ins + 1, dele)
            if cand < best:
                best = cand
            e, ins, dele = dp[i - 1][j]
            cand = (e + 1, ins, dele + 1)
            if cand < best:
                best = cand
            dp[i][j] = best
    edits, insertions, deletions = dp[n][m]
    substitutions = edits - insertions - deletions
    return WerBreakdown(substitutions, deletions, insertions, n)


def corpus_wer(pairs: dict[str, tuple[str, str]]) -> WerBreakdown:
    """Pooled counts over utterances keyed by id; values are (ref, hyp)."""
    if not pairs:
        raise ValueError("no utterances to score")
    total = WerBreakdown(0, 0, 0, 0)
    for utt_id in pairs:
        ref, hyp = pairs[utt_id]
        b = wer(ref, hyp)
        total = WerBreakdown(
            total.substitutions + b.substitutions,
            total.deletions + b.deletions,
            total.insertions + b.insertions,
            total.ref_words + b.ref_words,
        )
    return total


def relative_improvement(baseline_wer: float, system_wer: float) -> float:
    """100 * (baseline - system) / baseline."""
    if baseline_wer <= 0.0:
        raise ValueError("baseline WER must be positive")
    return 100.0 * (baseline_wer - system_wer) / baseline_wer


def read_trn(path: str | Path) -> dict[str, str]:
    """Lines of "UTTID<space>TRANSCRIPT"; the transcript may be empty."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split(None, 1)
        utt_id = parts[0]
        if utt_id in out:
            raise DataError(f"{path}:{lineno}: duplicate utterance id {utt_id}")
        out[utt_id] = parts[1] if len(parts) > 1 else ""
    return out


def pair_refs_hyps(refs: dict[str, str], hyps: dict[str, str]) -> dict[str, tuple[str, str]]:
    missing = sorted(set(hyps) - set(refs))
    if missing:
        raise DataError(f"hypothesis ids without a reference: {', '.join(missing[:5])}")
    return {utt_id: (refs[utt_id], hyps[utt_id]) for utt_id in hyps}
