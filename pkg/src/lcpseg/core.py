"""Shared data model: tokens, symbol sequences, vocabularies, bigram tables.

A sentence is held as a tuple of token strings; the meta separator between
subwords is implicit in the tuple structure and never appears in token text.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

BLANK = " "

Token = str
Pair = tuple[str, str]
FreqTable = Counter  # Counter[Pair]


class LcpsegError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(LcpsegError, ValueError):
    pass


class ContractError(LcpsegError, ValueError):
    """An input violates a precondition of the called operation."""


class BoundaryMode(str, enum.Enum):
    MERGE_ACROSS = "merge-across-blanks"
    RESPECT = "respect-word-boundaries"


_NO_BARRIERS: frozenset[str] = frozenset()
_BLANK_BARRIER: frozenset[str] = frozenset({BLANK})


@dataclass(frozen=True)
class SymbolSequence:
    """One sentence as an ordered run of tokens.

    ``barriers`` lists token texts that may never take part in a merge
    (the blank symbol when word boundaries are respected).
    """

    tokens: tuple[str, ...]
    origin: int = 0
    barriers: frozenset[str] = field(default=_NO_BARRIERS, repr=False)

    def __post_init__(self) -> None:
        if "" in self.tokens:
            raise ContractError("tokens must be non-empty strings")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    @property
    def text(self) -> str:
        return "".join(self.tokens)

    def mergeable(self, left: str, right: str) -> bool:
        return not self.barriers or (left not in self.barriers and right not in self.barriers)

    def replace(self, tokens: Sequence[str]) -> "SymbolSequence":
        return SymbolSequence(tuple(tokens), self.origin, self.barriers)


def tokenize_sentence(
    raw_text: str | bytes,
    boundary_mode: BoundaryMode | str = BoundaryMode.RESPECT,
    origin: int = 0,
) -> SymbolSequence:
    """Split ``raw_text`` into one token per Unicode scalar value.

    Bytes are decoded as strict UTF-8. In respect-word-boundaries mode the
    blank is kept as its own token but marked unmergeable.
    """
    if isinstance(raw_text, bytes):
        raw_text = raw_text.decode("utf-8")
    mode = BoundaryMode(boundary_mode)
    barriers = _BLANK_BARRIER if mode is BoundaryMode.RESPECT else _NO_BARRIERS
    return SymbolSequence(tuple(raw_text), origin, barriers)


def validate_segmentation(seq: SymbolSequence | Sequence[str], raw_text: str) -> bool:
    tokens = seq.tokens if isinstance(seq, SymbolSequence) else tuple(seq)
    return all(tokens) and "".join(tokens) == raw_text


class Vocabulary:
    """Insertion-ordered set of subword strings with dense 0-based ranks."""

    __slots__ = ("_rank", "_entries")

    def __init__(self, entries: Iterable[str] = ()) -> None:
        self._rank: dict[str, int] = {}
        self._entries: list[str] = []
        for e in entries:
            self.add(e)

    @classmethod
    def from_corpus(cls, corpus: Iterable[SymbolSequence]) -> "Vocabulary":
        """Base alphabet of ``corpus`` in code point order."""
        symbols: set[str] = set()
        for seq in corpus:
            symbols.update(seq.tokens)
        return cls(sorted(symbols))

    def add(self, entry: str) -> bool:
        """Append ``entry``; return False if it was already present."""
        if not entry:
            raise ContractError("vocabulary entries must be non-empty")
        if entry in self._rank:
            return False
        self._rank[entry] = len(self._entries)
        self._entries.append(entry)
        return True

    def update(self, entries: Iterable[str]) -> int:
        return sum(self.add(e) for e in entries)

    def rank(self, entry: str) -> int:
        return self._rank[entry]

    def copy(self) -> "Vocabulary":
        new = Vocabulary()
        new._rank = dict(self._rank)
        new._entries = list(self._entries)
        return new

    @property
    def entries(self) -> list[str]:
        return list(self._entries)

    def __contains__(self, entry: object) -> bool:
        return entry in self._rank

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._entries == other._entries

    def __repr__(self) -> str:
        return f"Vocabulary({self._entries!r})"


def base_alphabet(corpus: Iterable[SymbolSequence]) -> set[str]:
    symbols: set[str] = set()
    for seq in corpus:
        symbols.update(seq.tokens)
    return symbols


@dataclass
class PassTrace:
    """Per-pass bookkeeping; ``depth`` counts every labeling drawn."""

    depth: int = 0
    added_per_depth: list[int] = field(default_factory=list)
    relabel_retries: int = 0
    inner_limit_hit: bool = False
    relabel_exhausted: bool = False


@dataclass
class PassRecord:
    segmentation: list[SymbolSequence]
    vocab: Vocabulary
    trace: PassTrace


@dataclass
class MultiSegmentation:
    """Several segmentations of one corpus plus the union vocabulary."""

    passes: list[PassRecord]
    global_vocab: Vocabulary
    params: object = None
    stop_reason: str = "vocab-reached"

    @property
    def segmentations(self) -> list[list[SymbolSequence]]:
        return [p.segmentation for p in self.passes]


class PackedCorpus:
    """Whole corpus as one int32 array of interned token ids.

    Sentences are separated by -1. Ids index into ``symbols``; the intern
    table only grows, so equal strings always share an id. Used by the
    training engines; the list-of-SymbolSequence functions are the readable
    reference path.
    """

    SEP = -1

    def __init__(self, corpus: Sequence[SymbolSequence]) -> None:
        self.symbols: list[str] = []
        self.ids: dict[str, int] = {}
        self.origins = [seq.origin for seq in corpus]
        self.barriers = [seq.barriers for seq in corpus]
        self._blocked_texts: set[str] = set()
        for b in self.barriers:
            self._blocked_texts.update(b)
        self._blocked = np.zeros(0, dtype=bool)
        for sym in sorted(base_alphabet(corpus)):
            self.intern(sym)
        flat: list[int] = []
        for seq in corpus:
            flat.extend(self.ids[t] for t in seq.tokens)
            flat.append(self.SEP)
        self.data = np.asarray(flat, dtype=np.int32)
        # Barriers are applied corpus-wide, so they must agree.
        if len(set(self.barriers)) > 1:
            raise ContractError("all sentences of a corpus must share one boundary mode")

    def intern(self, text: str) -> int:
        idx = self.ids.get(text)
        if idx is None:
            idx = len(self.symbols)
            self.ids[text] = idx
            self.symbols.append(text)
        return idx

    def blocked_mask(self) -> np.ndarray:
        """Boolean array over ids: True for unmergeable tokens."""
        n = len(self.symbols)
        if len(self._blocked) < n:
            grown = np.zeros(n, dtype=bool)
            grown[: len(self._blocked)] = self._blocked
            for text in self._blocked_texts:
                if text in self.ids:
                    grown[self.ids[text]] = True
            self._blocked = grown
        return self._blocked

    def pair_positions(self, data: np.ndarray | None = None) -> np.ndarray:
        """Indices i where data[i], data[i+1] form a mergeable bigram."""
        d = self.data if data is None else data
        if len(d) < 2 or not self.symbols:
            return np.zeros(0, dtype=np.int64)
        left, right = d[:-1], d[1:]
        ok = (left >= 0) & (right >= 0)
        if self._blocked_texts:
            blocked = self.blocked_mask()
            ok &= ~blocked[np.where(left >= 0, left, 0)]
            ok &= ~blocked[np.where(right >= 0, right, 0)]
        return np.flatnonzero(ok)

    def pair_keys(self, positions: np.ndarray, data: np.ndarray | None = None) -> np.ndarray:
        d = self.data if data is None else data
        n = np.int64(len(self.symbols))
        return d[positions].astype(np.int64) * n + d[positions + 1]

    def split_key(self, key: int) -> tuple[int, int]:
        return divmod(int(key), len(self.symbols))

    def merge_at(self, positions: np.ndarray, new_ids: np.ndarray, data: np.ndarray | None = None) -> np.ndarray:
        """Replace bigrams starting at disjoint ``positions`` by ``new_ids``."""
        d = (self.data if data is None else data).copy()
        d[positions] = new_ids
        keep = np.ones(len(d), dtype=bool)
        keep[positions + 1] = False
        return d[keep]

    def unpack(self, data: np.ndarray | None = None) -> list[SymbolSequence]:
        d = self.data if data is None else data
        symbols = self.symbols
        out: list[SymbolSequence] = []
        current: list[str] = []
        idx = 0
        for tok in d.tolist():
            if tok < 0:
                out.append(SymbolSequence(tuple(current), self.origins[idx], self.barriers[idx]))
                current = []
                idx += 1
            else:
                current.append(symbols[tok])
        return out

    def lex_rank(self) -> np.ndarray:
        """Rank of every interned id under code point order of its text."""
        order = sorted(range(len(self.symbols)), key=self.symbols.__getitem__)
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        return rank
