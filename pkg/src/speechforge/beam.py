"""Prefix beam search with log-linear fusion of CTC, aux, and LM scores.

Every hypothesis satisfies
    score_total = ctc_weight * score_ctc
                + (1 - ctc_weight) * score_aux
                + lm_weight * score_lm
as an exact arithmetic identity. The auxiliary sequence scorer is an
interface; an n-gram adapter and a deterministic table stub are provided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ctc import LOG_ZERO, PosteriorGram
from .ngram import EOS, NGramModel, ngram_logprob

DEFAULT_BEAM_SIZE = 20
DEFAULT_CTC_WEIGHT = 0.5
DEFAULT_LM_WEIGHT = 0.7


@dataclass(frozen=True)
class FusionWeights:
    ctc_weight: float = DEFAULT_CTC_WEIGHT
    lm_weight: float = DEFAULT_LM_WEIGHT
    beam_size: int = DEFAULT_BEAM_SIZE

    def __post_init__(self):
        if not (0.0 <= self.ctc_weight <= 1.0):
            raise ValueError("ctc_weight must lie in [0, 1]")
        if self.lm_weight < 0.0:
            raise ValueError("lm_weight must be >= 0")
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[int, ...]
    score_total: float
    score_ctc: float
    score_aux: float
    score_lm: float


class SequenceScorer:
    """Deterministic per-token scorer: same (prefix, token) -> same score."""

    def score_step(self, prefix: tuple[int, ...], token: int) -> float:
        raise NotImplementedError

    def final(self, prefix: tuple[int, ...]) -> float:
        return 0.0


class TableScorer(SequenceScorer):
    """Test stub scoring from an explicit (prefix, token) table."""

    def __init__(self, table=None, default: float = -2.3, finals=None):
        self.table = dict(table or {})
        self.default = default
        self.finals = dict(finals or {})

    def score_step(self, prefix, token):
        return self.table.get((tuple(prefix), token), self.default)

    def final(self, prefix):
        return self.finals.get(tuple(prefix), 0.0)


class NGramScorer(SequenceScorer):
    """Shallow-fusion adapter mapping token ids through a vocabulary."""

    def __init__(self, model: NGramModel, vocab: list[str]):
        self.model = model
        self.vocab = list(vocab)

    def _strings(self, ids):
        from .ngram import BOS

        return [BOS] * (self.model.order - 1) + [self.vocab[i] for i in ids]

    def score_step(self, prefix, token):
        return ngram_logprob(self.model, self._strings(prefix), self.vocab[token])

    def final(self, prefix):
        return ngram_logprob(self.model, self._strings(prefix), EOS)


def fuse_scores(ctc: float, aux: float, lm: float, w: FusionWeights) -> float:
    """lambda * ctc + (1 - lambda) * aux + beta * lm."""
    return w.ctc_weight * ctc + (1.0 - w.ctc_weight) * aux + w.lm_weight * lm


def _logaddexp(a: float, b: float) -> float:
    if a == LOG_ZERO:
        return b
    if b == LOG_ZERO:
        return a
    return float(np.logaddexp(a, b))


def ctc_prefix_beam(
    pg: PosteriorGram,
    w: FusionWeights | None = None,
    lm: SequenceScorer | None = None,
    aux: SequenceScorer | None = None,
) -> list[Hypothesis]:
    """N-best prefix beam search over the posteriorgram.

    Per-prefix blank/non-blank probabilities, combined interim score for
    pruning, deterministic tie-breaking by token sequence. LM and aux pay
    one step per emitted token plus a final term.
    """
    w = w or FusionWeights()
    lp = pg.log_probs
    n_frames, n_tokens = lp.shape
    if n_frames == 0:
        raise ValueError("empty posteriorgram")

    # prefix -> [p_blank, p_nonblank]; scorer totals are pure functions of
    # the prefix and are cached separately
    beams: dict[tuple[int, ...], list[float]] = {(): [0.0, LOG_ZERO]}
    lm_totals: dict[tuple[int, ...], float] = {(): 0.0}
    aux_totals: dict[tuple[int, ...], float] = {(): 0.0}

    def interim(prefix, probs):
        ctc_score = _logaddexp(probs[0], probs[1])
        return fuse_scores(ctc_score, aux_totals[prefix], lm_totals[prefix], w)

    for t in range(n_frames):
        next_beams: dict[tuple[int, ...], list[float]] = {}

        def bucket(prefix):
            probs = next_beams.get(prefix)
            if probs is None:
                probs = [LOG_ZERO, LOG_ZERO]
                next_beams[prefix] = probs
            return probs

        for prefix, (p_b, p_nb) in beams.items():
            p_tot = _logaddexp(p_b, p_nb)
            # stay via blank
            probs = bucket(prefix)
            probs[0] = _logaddexp(probs[0], p_tot + lp[t, 0])
            # stay via repeated last token (no emission)
            if prefix:
                probs[1] = _logaddexp(probs[1], p_nb + lp[t, prefix[-1]])
            # emit a token
            for c in range(1, n_tokens):
                new_prefix = prefix + (c,)
                base = p_b if prefix and c == prefix[-1] else p_tot
                if base == LOG_ZERO:
                    continue
                nprobs = bucket(new_prefix)
                nprobs[1] = _logaddexp(nprobs[1], base + lp[t, c])
                if new_prefix not in lm_totals:
                    lm_totals[new_prefix] = lm_totals[prefix] + (
                        lm.score_step(prefix, c) if lm else 0.0
                    )
                    aux_totals[new_prefix] = aux_totals[prefix] + (
                        aux.score_step(prefix, c) if aux else 0.0
                    )

        ranked = sorted(
            next_beams.items(), key=lambda kv: (-interim(kv[0], kv[1]), kv[0])
        )
        beams = dict(ranked[: w.beam_size])

    hyps = []
    for prefix, (p_b, p_nb) in beams.items():
        score_ctc = _logaddexp(p_b, p_nb)
        score_lm = lm_totals[prefix] + (lm.final(prefix) if lm else 0.0)
        score_aux = aux_totals[prefix] + (aux.final(prefix) if aux else 0.0)
        hyps.append(
            Hypothesis(
                prefix,
                fuse_scores(score_ctc, score_aux, score_lm, w),
                score_ctc,
                score_aux,
                score_lm,
            )
        )
    hyps.sort(key=lambda h: (-h.score_total, h.tokens))
    return hyps
