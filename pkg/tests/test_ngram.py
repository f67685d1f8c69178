import math

import numpy as np
import pytest

from speechforge.errors import DataError
from speechforge.ngram import (
    EOS,
    UNK,
    load_ngram,
    ngram_logprob,
    ngram_train,
    save_ngram,
    sentence_logprob,
)


class TestAddK:
    def test_bigram_count_arithmetic(self):
        # declared event space {a, b, </s>}: p(b|a) = (2+1)/(2+3)
        model = ngram_train(["a b a b"], order=2, smoothing="add_k", k=1.0,
                            vocab=["a", "b", EOS])
        assert math.exp(ngram_logprob(model, ["a"], "b")) == pytest.approx(0.6)

    def test_unigram_mle(self):
        model = ngram_train(["a a a"], order=1, smoothing="add_k", k=0.0)
        assert math.exp(ngram_logprob(model, [], "a")) == pytest.approx(0.75)
        assert math.exp(ngram_logprob(model, [], EOS)) == pytest.approx(0.25)

    def test_certain_event_logprob_zero(self):
        model = ngram_train(["a b", "a b"], order=2, smoothing="add_k", k=0.0)
        assert ngram_logprob(model, ["a"], "b") == pytest.approx(0.0)

    def test_normalization(self):
        model = ngram_train(["a b b a", "b a a b"], order=2, smoothing="add_k", k=0.5)
        for ctx in (["a"], ["b"], ["zzz"]):
            total = sum(math.exp(ngram_logprob(model, ctx, t)) for t in model.vocab)
            assert total == pytest.approx(1.0, abs=1e-6)


class TestWittenBell:
    def test_unseen_token_finite(self):
        model = ngram_train(["a b c", "b c a"], order=3)
        lp = ngram_logprob(model, ["a"], UNK)
        assert lp < 0.0 and np.isfinite(lp)

    def test_unseen_context_backs_off(self):
        model = ngram_train(["a b c d", "b c d a"], order=4)
        lp = ngram_logprob(model, ["d", "zzz", "qqq"], "a")
        assert np.isfinite(lp)

    def test_normalization_every_seen_context(self):
        corpus = ["the cat sat", "the dog sat", "a cat ran"]
        model = ngram_train(corpus, order=3)
        for ctx in list(model.logprobs):
            if len(ctx) == model.order - 1:
                total = sum(math.exp(ngram_logprob(model, list(ctx), t)) for t in model.vocab)
                assert total == pytest.approx(1.0, abs=1e-6), ctx

    def test_normalization_random_context(self):
        model = ngram_train(["x y z", "y z x"], order=2)
        total = sum(math.exp(ngram_logprob(model, ["never seen"], t)) for t in model.vocab)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_seen_events_preferred(self):
        model = ngram_train(["a b", "a b", "a c"], order=2)
        assert ngram_logprob(model, ["a"], "b") > ngram_logprob(model, ["a"], "c")
        assert ngram_logprob(model, ["a"], "c") > ngram_logprob(model, ["a"], UNK)


class TestApi:
    def test_order_validation(self):
        with pytest.raises(ValueError):
            ngram_train(["a"], order=0)

    def test_empty_corpus(self):
        with pytest.raises(DataError):
            ngram_train(["", " "], order=2)

    def test_sentence_logprob_sums_steps(self):
        model = ngram_train(["a b", "b a"], order=2)
        by_hand = (
            ngram_logprob(model, ["<s>"], "a")
            + ngram_logprob(model, ["a"], "b")
            + ngram_logprob(model, ["b"], EOS)
        )
        assert sentence_logprob(model, ["a", "b"]) == pytest.approx(by_hand)

    def test_save_load_round_trip(self, tmp_path):
        model = ngram_train(["a b c", "c b a", "a c b"], order=3)
        path = tmp_path / "lm.txt"
        save_ngram(path, model)
        loaded = load_ngram(path)
        assert loaded.vocab == model.vocab
        for ctx in (["a"], ["a", "b"], ["zzz"], []):
            for t in model.vocab:
                assert ngram_logprob(loaded, ctx, t) == pytest.approx(
                    ngram_logprob(model, ctx, t), abs=1e-12
                )

    def test_save_load_add_k(self, tmp_path):
        model = ngram_train(["a b a", "b a b"], order=2, smoothing="add_k", k=1.0)
        path = tmp_path / "lm.txt"
        save_ngram(path, model)
        loaded = load_ngram(path)
        for ctx in (["a"], ["b"], ["q"]):
            for t in model.vocab:
                assert ngram_logprob(loaded, ctx, t) == pytest.approx(
                    ngram_logprob(model, ctx, t), abs=1e-12
                )

    def test_bad_file(self, tmp_path):
        path = tmp_path / "bad.lm"
        path.write_text("garbage\n")
        with pytest.raises(DataError):
            load_ngram(path)
