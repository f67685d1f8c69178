"""Byte-pair-encoding subword tokenizer: training, encoding, decoding.

Words are symbolized as a standalone word-boundary symbol followed by their
characters; merges are learned greedily on adjacent symbol pairs (highest
count first, ties broken lexicographically on the pair) until the
vocabulary reaches the requested size or no pair occurs twice. Emitted
token strings fuse a remaining standalone boundary symbol into the
following token, which is the familiar "▁word"-prefixed surface; token ids
index the unfused symbol sequence so decoding is an exact inverse.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

BOUNDARY = "▁"
UNK = "<unk>"
DEFAULT_VOCAB_SIZE = 5000

_FILE_VERSION = "SFBPE1"


@dataclass
class BpeModel:
    base_symbols: list[str]
    merges: list[tuple[str, str]]
    specials: list[str] = field(default_factory=lambda: [UNK])
    boundary: str = BOUNDARY
    vocab: dict[str, int] = field(init=False)
    merge_ranks: dict[tuple[str, str], int] = field(init=False)

    def __post_init__(self):
        symbols = list(self.base_symbols) + [a + b for a, b in self.merges] + list(self.specials)
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate symbols in vocabulary")
        self.vocab = {s: i for i, s in enumerate(symbols)}
        self.merge_ranks = {pair: i for i, pair in enumerate(self.merges)}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    @property
    def unk_id(self) -> int:
        return self.vocab[UNK]

    def id_to_symbol(self, i: int) -> str:
        symbols = list(self.vocab)
        if not (0 <= i < len(symbols)):
            raise ValueError(f"unknown token id {i}")
        return symbols[i]


def _word_symbols(word: str, boundary: str) -> list[str]:
    return [boundary] + list(word)


def _pair_positions(symbols: list[str]) -> list[tuple[str, str]]:
    return list(zip(symbols, symbols[1:]))


def _merge_word(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    """Replace non-overlapping occurrences of pair, left to right."""
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
            out.append(symbols[i] + symbols[i + 1])
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def bpe_train(corpus: list[str], vocab_size: int = DEFAULT_VOCAB_SIZE) -> BpeModel:
    """Train a BPE model on text lines (whitespace-delimited words)."""
    word_counts: dict[str, int] = {}
    for line in corpus:
        for word in line.split():
            word_counts[word] = word_counts.get(word, 0) + 1
    if not word_counts:
        raise DataError("empty training corpus")

    chars = sorted({c for w in word_counts for c in w})
    base = [BOUNDARY] + chars
    if vocab_size < len(base):
        raise ValueError(
            f"vocab_size {vocab_size} is below the {len(base)} base symbols"
        )

    words = [_word_symbols(w, BOUNDARY) for w in word_counts]
    counts = list(word_counts.values())

    pair_counts: dict[tuple[str, str], int] = {}
    pair_words: dict[tuple[str, str], set[int]] = {}
    for wi, syms in enumerate(words):
        for pair in _pair_positions(syms):
            pair_counts[pair] = pair_counts.get(pair, 0) + counts[wi]
            pair_words.setdefault(pair, set()).add(wi)

    # lazy max-heap keyed by (-count, pair); stale entries skipped on pop
    heap = [(-c, p) for p, c in pair_counts.items()]
    heapq.heapify(heap)

    merges: list[tuple[str, str]] = []
    n_vocab = len(base) + 1  # + <unk>
    while n_vocab < vocab_size and heap:
        neg, pair = heapq.heappop(heap)
        if pair_counts.get(pair, 0) != -neg:
            continue
        if -neg < 2:
            break
        merges.append(pair)
        n_vocab += 1
        for wi in sorted(pair_words.get(pair, ())):
            old = words[wi]
            new = _merge_word(old, pair)
            if new == old:
                continue
            for p in _pair_positions(old):
                pair_counts[p] -= counts[wi]
                if pair_counts[p] <= 0:
                    del pair_counts[p]
                else:
                    # decrements need a fresh heap entry too, or the pair's
                    # current count could never surface again
                    heapq.heappush(heap, (-pair_counts[p], p))
                ws = pair_words.get(p)
                if ws is not None:
                    ws.discard(wi)
            for p in _pair_positions(new):
                pair_counts[p] = pair_counts.get(p, 0) + counts[wi]
                pair_words.setdefault(p, set()).add(wi)
                heapq.heappush(heap, (-pair_counts[p], p))
            words[wi] = new
        pair_counts.pop(pair, None)

    return BpeModel(base, merges)


def _encode_word(word: str, model: BpeModel) -> list[str]:
    symbols = _word_symbols(word, model.boundary)
    ranks = model.merge_ranks
    while len(symbols) > 1:
        best_rank, best_pair = None, None
        for pair in _pair_positions(symbols):
            r = ranks.get(pair)
            if r is not None and (best_rank is None or r < best_rank):
                best_rank, best_pair = r, pair
        if best_pair is None:
            break
        symbols = _merge_word(symbols, best_pair)
    return symbols


def bpe_symbols(text: str, model: BpeModel) -> list[str]:
    """Unfused symbol sequence (the form token ids index)."""
    out: list[str] = []
    for word in text.split():
        out.extend(_encode_word(word, model))
    return out


def bpe_tokens(text: str, model: BpeModel) -> list[str]:
    """Visible tokens: a standalone boundary symbol fuses into its word."""
    symbols = bpe_symbols(text, model)
    out: list[str] = []
    i = 0
    while i < len(symbols):
        if symbols[i] == model.boundary and i + 1 < len(symbols):
            out.append(symbols[i] + symbols[i + 1])
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def bpe_encode(text: str, model: BpeModel) -> list[int]:
    """Token id sequence; characters outside the base alphabet map to unk."""
    return [model.vocab.get(s, model.unk_id) for s in bpe_symbols(text, model)]


def bpe_decode(ids: list[int], model: BpeModel) -> str:
    """Inverse of bpe_encode for text over the base alphabet."""
    symbols = list(model.vocab)
    parts = []
    for i in ids:
        if not (0 <= i < len(symbols)):
            raise ValueError(f"unknown token id {i}")
        parts.append(symbols[i])
    return "".join(parts).replace(model.boundary, " ").strip()


def save_bpe(path: str | Path, model: BpeModel) -> None:
    """Versioned text format: base symbols, ordered merges, specials."""
    lines = [_FILE_VERSION, f"base {len(model.base_symbols)}"]
    lines.extend(model.base_symbols)
    lines.append(f"merges {len(model.merges)}")
    lines.extend(f"{a} {b}" for a, b in model.merges)
    lines.append(f"specials {len(model.specials)}")
    lines.extend(model.specials)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_bpe(path: str | Path) -> BpeModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        if lines[0] != _FILE_VERSION:
            raise DataError(f"{path}: not a {_FILE_VERSION} model file")
        pos = 1

        def section(name: str) -> list[str]:
            nonlocal pos
            tag, n = lines[pos].split()
            if tag != name:
                raise DataError(f"{path}: expected {name} section, found {tag}")
            rows = lines[pos + 1 : pos + 1 + int(n)]
            pos += 1 + int(n)
            return rows

        base = section("base")
        merges = [tuple(row.split(" ", 1)) for row in section("merges")]
        specials = section("specials")
    except (IndexError, ValueError) as exc:
        raise DataError(f"{path}: malformed BPE model file: {exc}") from exc
    return BpeModel(base, merges, specials)
