"""Backoff n-gram language model used as the fusion LM.

Witten-Bell interpolation (default) compiled into backoff tables, plus
add-k for hand-checkable arithmetic. Both forms normalize exactly over the
event vocabulary (tokens seen in training plus the end marker and unk, or
an explicitly declared vocabulary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

DEFAULT_ORDER = 4
SMOOTHINGS = ("witten_bell", "add_k")

_FILE_VERSION = "SFLM1"


@dataclass
class NGramModel:
    order: int
    smoothing: str
    k: float
    vocab: list[str]
    logprobs: dict[tuple[str, ...], dict[str, float]]
    backoffs: dict[tuple[str, ...], float]
    _vocab_set: set[str] = field(init=False, repr=False)

    def __post_init__(self):
        self._vocab_set = set(self.vocab)

    def has(self, token: str) -> bool:
        return token in self._vocab_set


def _count_tables(lines: list[list[str]], order: int):
    """contexts[m] maps a length-m context tuple to its follower counts."""
    contexts: list[dict[tuple[str, ...], dict[str, int]]] = [dict() for _ in range(order)]
    for tokens in lines:
        padded = [BOS] * (order - 1) + tokens + [EOS]
        for i in range(order - 1, len(padded)):
            token = padded[i]
            for m in range(order):
                ctx = tuple(padded[i - m : i])
                row = contexts[m].setdefault(ctx, {})
                row[token] = row.get(token, 0) + 1
    return contexts


def ngram_train(
    corpus: list[str],
    order: int = DEFAULT_ORDER,
    smoothing: str = "witten_bell",
    k: float = 1.0,
    vocab: list[str] | None = None,
) -> NGramModel:
    """Train on pre-tokenized lines (whitespace-separated tokens).

    vocab declares the event space explicitly; by default it is the seen
    tokens plus the end marker and unk, so unseen events always keep
    positive probability under either smoothing (for add-k, when k > 0).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if smoothing not in SMOOTHINGS:
        raise ValueError(f"unknown smoothing {smoothing!r}")
    lines = [line.split() for line in corpus if line.split()]
    if not lines:
        raise DataError("empty training corpus")

    contexts = _count_tables(lines, order)
    if vocab is None:
        seen = sorted({t for tokens in lines for t in tokens})
        vocab = seen + [EOS, UNK]
    else:
        vocab = list(vocab)
    n_vocab = len(vocab)
    vocab_set = set(vocab)

    logprobs: dict[tuple[str, ...], dict[str, float]] = {}
    backoffs: dict[tuple[str, ...], float] = {}

    def log_or_inf(x: float) -> float:
        return math.log(x) if x > 0.0 else -math.inf

    if smoothing == "add_k":
        for m in range(order):
            for ctx, row in contexts[m].items():
                total = sum(row.values())
                denom = total + k * n_vocab
                logprobs[ctx] = {
                    t: log_or_inf((c + k) / denom)
                    for t, c in row.items()
                    if t in vocab_set
                }
                backoffs[ctx] = log_or_inf(k * n_vocab / denom)
    else:
        # Witten-Bell, interpolated then stored in backoff form: the
        # interpolation weight T/(c+T) doubles as the backoff factor.
        uniform = 1.0 / n_vocab

        def interp(ctx: tuple[str, ...], t: str) -> float:
            row = contexts[len(ctx)].get(ctx)
            if row is None:
                return interp(ctx[1:], t) if ctx else uniform
            total = sum(row.values())
            types = len(row)
            lower = interp(ctx[1:], t) if ctx else uniform
            return (row.get(t, 0) + types * lower) / (total + types)

        for m in range(order):
            for ctx, row in contexts[m].items():
                total = sum(row.values())
                types = len(row)
                backoffs[ctx] = math.log(types / (total + types))
                targets = vocab if m == 0 else [t for t in row if t in vocab_set]
                logprobs[ctx] = {t: math.log(interp(ctx, t)) for t in targets}

    return NGramModel(order, smoothing, k, vocab, logprobs, backoffs)


def _normalize_token(model: NGramModel, token: str) -> str:
    if model.has(token):
        return token
    if model.has(UNK):
        return UNK
    raise ValueError(f"token {token!r} outside the declared vocabulary")


def ngram_logprob(model: NGramModel, context: list[str], token: str) -> float:
    """log p(token | context), backing off through shorter contexts."""
    token = _normalize_token(model, token)
    ctx = tuple(t if model.has(t) or t == BOS else UNK for t in context)
    ctx = ctx[max(0, len(ctx) - (model.order - 1)) :]

    if model.smoothing == "add_k":
        # add-k backs off to the uniform distribution, which reproduces the
        # direct (c + k) / (c(ctx) + k|V|) formula exactly
        row = model.logprobs.get(ctx)
        if row is not None and token in row:
            return row[token]
        return model.backoffs.get(ctx, 0.0) + math.log(1.0 / len(model.vocab))

    acc = 0.0
    while True:
        row = model.logprobs.get(ctx)
        if row is not None and token in row:
            return acc + row[token]
        if row is not None:
            acc += model.backoffs[ctx]  # seen context, unseen follower
        if not ctx:
            return -math.inf  # token missing even at the unigram level
        ctx = ctx[1:]


def sentence_logprob(model: NGramModel, tokens: list[str]) -> float:
    """Total log probability of a token line including the end event."""
    history = [BOS] * (model.order - 1)
    total = 0.0
    for t in tokens + [EOS]:
        total += ngram_logprob(model, history, t)
        history.append(t if model.has(t) else UNK)
    return total


def save_ngram(path: str | Path, model: NGramModel) -> None:
    """Rows of (context, token, logprob, backoff-of-extended-context)."""
    lines = [
        _FILE_VERSION,
        f"order {model.order}",
        f"smoothing {model.smoothing}",
        f"k {model.k!r}",
        f"vocab {len(model.vocab)}",
    ]
    lines.extend(model.vocab)
    rows = []
    for ctx in sorted(model.logprobs, key=lambda c: (len(c), c)):
        for token in sorted(model.logprobs[ctx]):
            extended = ctx + (token,)
            backoff = model.backoffs.get(extended, math.nan)
            rows.append(
                f"{' '.join(ctx)}\t{token}\t{model.logprobs[ctx][token]!r}\t"
                f"{'' if math.isnan(backoff) else repr(backoff)}"
            )
    lines.append(f"rows {len(rows)}")
    lines.extend(rows)
    # contexts whose backoff is not attached to any stored row (e.g. the
    # empty context) are persisted separately
    extra = [
        f"{' '.join(ctx)}\t{model.backoffs[ctx]!r}"
        for ctx in sorted(model.backoffs, key=lambda c: (len(c), c))
        if not (len(ctx) > 0 and ctx[:-1] in model.logprobs and ctx[-1] in model.logprobs[ctx[:-1]])
    ]
    lines.append(f"orphans {len(extra)}")
    lines.extend(extra)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_ngram(path: str | Path) -> NGramModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        if lines[0] != _FILE_VERSION:
            raise DataError(f"{path}: not an {_FILE_VERSION} model file")
        order = int(lines[1].split()[1])
        smoothing = lines[2].split()[1]
        k = float(lines[3].split()[1])
        n_vocab = int(lines[4].split()[1])
        pos = 5
        vocab = lines[pos : pos + n_vocab]
        pos += n_vocab
        n_rows = int(lines[pos].split()[1])
        pos += 1
        logprobs: dict[tuple[str, ...], dict[str, float]] = {}
        backoffs: dict[tuple[str, ...], float] = {}
        for row in lines[pos : pos + n_rows]:
            ctx_s, token, lp, bo = row.split("\t")
            ctx = tuple(ctx_s.split()) if ctx_s else ()
            logprobs.setdefault(ctx, {})[token] = float(lp)
            if bo:
                backoffs[ctx + (token,)] = float(bo)
        pos += n_rows
        n_extra = int(lines[pos].split()[1])
        pos += 1
        for row in lines[pos : pos + n_extra]:
            ctx_s, bo = row.split("\t")
            ctx = tuple(ctx_s.split()) if ctx_s else ()
            backoffs[ctx] = float(bo)
    except (IndexError, ValueError) as exc:
        raise DataError(f"{path}: malformed LM file: {exc}") from exc
    return NGramModel(order, smoothing, k, vocab, logprobs, backoffs)
