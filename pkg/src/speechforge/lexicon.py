"""Lexicon-based G2P lookup.

The lexicon file is tab-separated "WORD\\tPH1 PH2 ..." with one
pronunciation per line; repeated words collect alternative pronunciations.
Lookup returns the first pronunciation of the uppercase-normalized word.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError


class OovError(KeyError):
    """Word missing from the lexicon under the strict policy."""

    def __init__(self, word: str):
        super().__init__(word)
        self.word = word

    def __str__(self):
        return f"word not in lexicon: {self.word}"


@dataclass
class Lexicon:
    entries: dict[str, list[list[str]]] = field(default_factory=dict)

    @property
    def phoneme_inventory(self) -> set[str]:
        return {ph for prons in self.entries.values() for pron in prons for ph in pron}

    def add(self, word: str, phonemes: list[str]) -> None:
        if not phonemes:
            raise ValueError(f"empty pronunciation for {word!r}")
        self.entries.setdefault(word.upper(), []).append(list(phonemes))


def load_lexicon(path: str | Path) -> Lexicon:
    lex = Lexicon()
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise DataError(f"{path}:{lineno}: expected WORD<TAB>PHONEMES")
        word, phones = line.split("\t", 1)
        phonemes = phones.split()
        if not word or not phonemes:
            raise DataError(f"{path}:{lineno}: empty word or pronunciation")
        lex.add(word, phonemes)
    return lex


def lexicon_lookup(word: str, lex: Lexicon, oov_policy: str = "strict") -> list[str]:
    """First pronunciation of the word; OOV either errors or spells out.

    The spell-out fallback returns the uppercased characters as symbols.
    """
    normalized = word.upper()
    prons = lex.entries.get(normalized)
    if prons:
        return list(prons[0])
    if oov_policy == "strict":
        raise OovError(normalized)
    if oov_policy == "spell":
        return list(normalized)
    raise ValueError(f"unknown OOV policy {oov_policy!r}")
