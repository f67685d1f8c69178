import itertools
import math

import numpy as np
import pytest

from speechforge.beam import (
    FusionWeights,
    NGramScorer,
    TableScorer,
    ctc_prefix_beam,
    fuse_scores,
)
from speechforge.ctc import PosteriorGram
from speechforge.ngram import ngram_train

from test_ctc import brute_force_loss, random_pg


def exhaustive_ranking(pg, w, lm=None, aux=None):
    """Oracle: score every label sequence by exact alignment enumeration."""
    T, V = pg.log_probs.shape
    results = []
    for L in range(T + 1):
        for labels in itertools.product(range(1, V), repeat=L):
            ctc = -brute_force_loss(pg.log_probs, labels)
            if math.isinf(ctc):
                continue
            lm_score = aux_score = 0.0
            if lm:
                prefix = ()
                for tok in labels:
                    lm_score += lm.score_step(prefix, tok)
                    prefix += (tok,)
                lm_score += lm.final(labels)
            if aux:
                prefix = ()
                for tok in labels:
                    aux_score += aux.score_step(prefix, tok)
                    prefix += (tok,)
                aux_score += aux.final(labels)
            total = fuse_scores(ctc, aux_score, lm_score, w)
            results.append((labels, total))
    results.sort(key=lambda kv: (-kv[1], kv[0]))
    return results


class TestPrefixBeam:
    def test_two_frame_example(self):
        pg = PosteriorGram(np.log(np.array([[0.4, 0.6], [0.4, 0.6]])))
        w = FusionWeights(ctc_weight=1.0, lm_weight=0.0, beam_size=4)
        hyps = ctc_prefix_beam(pg, w)
        assert hyps[0].tokens == (1,)
        assert hyps[0].score_ctc == pytest.approx(math.log(0.84), abs=1e-10)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            T = int(rng.integers(1, 5))
            V = int(rng.integers(2, 4))
            pg = random_pg(rng, T, V)
            w = FusionWeights(ctc_weight=1.0, lm_weight=0.0, beam_size=V**T + 10)
            hyps = ctc_prefix_beam(pg, w)
            oracle = exhaustive_ranking(pg, w)
            want = {tuple(lbl): s for lbl, s in oracle}
            for h in hyps:
                assert h.score_total == pytest.approx(want[h.tokens], abs=1e-8)
            assert hyps[0].tokens == oracle[0][0]

    def test_oracle_with_fusion(self):
        rng = np.random.default_rng(4)
        lm = TableScorer(default=-0.7)
        aux = TableScorer(default=-1.1)
        pg = random_pg(rng, 3, 3)
        w = FusionWeights(ctc_weight=0.6, lm_weight=0.4, beam_size=100)
        hyps = ctc_prefix_beam(pg, w, lm=lm, aux=aux)
        oracle = exhaustive_ranking(pg, w, lm=lm, aux=aux)
        assert hyps[0].tokens == oracle[0][0]
        assert hyps[0].score_total == pytest.approx(oracle[0][1], abs=1e-10)

    def test_beam_monotonicity(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            pg = random_pg(rng, 4, 3)
            w0 = FusionWeights(ctc_weight=1.0, lm_weight=0.0, beam_size=1)
            best = ctc_prefix_beam(pg, w0)[0].score_total
            for beam in (2, 4, 8, 20):
                w = FusionWeights(ctc_weight=1.0, lm_weight=0.0, beam_size=beam)
                score = ctc_prefix_beam(pg, w)[0].score_total
                assert score >= best - 1e-12
                best = max(best, score)

    def test_fusion_identity_exact(self):
        rng = np.random.default_rng(6)
        lm = TableScorer(default=-0.5, finals={(1,): -0.25})
        aux = TableScorer(default=-0.9)
        pg = random_pg(rng, 4, 3)
        w = FusionWeights(ctc_weight=0.3, lm_weight=0.7, beam_size=8)
        for h in ctc_prefix_beam(pg, w, lm=lm, aux=aux):
            expected = w.ctc_weight * h.score_ctc + (1 - w.ctc_weight) * h.score_aux \
                + w.lm_weight * h.score_lm
            assert abs(h.score_total - expected) <= 1e-12

    def test_deterministic_tie_break(self):
        uniform = np.log(np.full((2, 3), 1 / 3))
        pg = PosteriorGram(uniform)
        w = FusionWeights(ctc_weight=1.0, lm_weight=0.0, beam_size=10)
        a = [h.tokens for h in ctc_prefix_beam(pg, w)]
        b = [h.tokens for h in ctc_prefix_beam(pg, w)]
        assert a == b
        # symmetric tokens 1 and 2 tie; lower sequence sorts first
        scores = {h.tokens: h.score_total for h in ctc_prefix_beam(pg, w)}
        assert scores[(1,)] == pytest.approx(scores[(2,)])
        assert a.index((1,)) < a.index((2,))

    def test_ngram_scorer_integration(self):
        model = ngram_train(["a b", "a b", "a"], order=2)
        vocab = ["<blank>", "a", "b"]
        lm = NGramScorer(model, vocab)
        pg = PosteriorGram(np.log(np.array([[0.2, 0.6, 0.2], [0.2, 0.2, 0.6]])), vocab)
        hyps = ctc_prefix_beam(pg, FusionWeights(0.5, 0.5, 8), lm=lm)
        assert hyps[0].tokens == (1, 2)  # "a b" is both acoustically and LM best
        assert all(np.isfinite(h.score_lm) for h in hyps)

    def test_empty_posteriorgram_rejected(self):
        with pytest.raises(ValueError):
            PosteriorGram(np.zeros((0, 3)))


class TestFuseScores:
    def test_pure_ctc(self):
        w = FusionWeights(ctc_weight=1.0, lm_weight=0.0)
        assert fuse_scores(-1.5, -99.0, -99.0, w) == -1.5

    def test_arithmetic(self):
        w = FusionWeights(ctc_weight=0.5, lm_weight=0.7)
        assert fuse_scores(-1.0, -2.0, -3.0, w) == pytest.approx(-3.6)

    def test_lambda_scaling_with_zero_aux(self):
        w = FusionWeights(ctc_weight=0.25, lm_weight=0.0)
        assert fuse_scores(-2.0, 0.0, 0.0, w) == pytest.approx(0.25 * -2.0)

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            FusionWeights(ctc_weight=1.5)
        with pytest.raises(ValueError):
            FusionWeights(lm_weight=-0.1)
        with pytest.raises(ValueError):
            FusionWeights(beam_size=0)
