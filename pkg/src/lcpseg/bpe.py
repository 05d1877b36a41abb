"""Frequency-greedy BPE training, deterministic segmentation and BPE-dropout."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import (
    FreqTable,
    MultiSegmentation,
    PackedCorpus,
    Pair,
    ParameterError,
    PassRecord,
    PassTrace,
    SymbolSequence,
    Vocabulary,
    base_alphabet,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str
    priority: int

    @property
    def merged(self) -> str:
        return self.left + self.right


@dataclass
class MergeTable:
    rules: list[MergeRule] = field(default_factory=list)
    base_vocab: Vocabulary = field(default_factory=Vocabulary)

    def __post_init__(self) -> None:
        self._ranks: dict[Pair, int] = {}
        for i, rule in enumerate(self.rules):
            if rule.priority != i:
                raise ParameterError(f"rule priorities must be dense, got {rule.priority} at {i}")
            self._ranks.setdefault((rule.left, rule.right), i)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair], base_vocab: Iterable[str] = ()) -> "MergeTable":
        rules = [MergeRule(l, r, i) for i, (l, r) in enumerate(pairs)]
        return cls(rules, Vocabulary(base_vocab))

    @property
    def pairs(self) -> list[Pair]:
        return [(r.left, r.right) for r in self.rules]

    def priority(self, pair: Pair) -> int | None:
        return self._ranks.get(pair)

    def vocab(self) -> Vocabulary:
        v = self.base_vocab.copy()
        v.update(r.merged for r in self.rules)
        return v

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MergeTable):
            return NotImplemented
        return self.rules == other.rules and self.base_vocab == other.base_vocab


def count_bigrams(corpus: Iterable[SymbolSequence]) -> FreqTable:
    """Count adjacent token pairs over all sentences, skipping barrier pairs."""
    table: FreqTable = Counter()
    for seq in corpus:
        toks = seq.tokens
        if seq.barriers:
            table.update(p for p in zip(toks, toks[1:]) if seq.mergeable(*p))
        else:
            table.update(zip(toks, toks[1:]))
    return table


def most_frequent_bigram(table: FreqTable) -> Pair | None:
    """Highest-count pair; ties go to the lexicographically smallest pair."""
    if not table:
        return None
    return min(table.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def _merge_tokens(tokens: Sequence[str], left: str, right: str) -> list[str]:
    out: list[str] = []
    i, n = 0, len(tokens)
    while i < n:
        if i + 1 < n and tokens[i] == left and tokens[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(tokens[i])
            i += 1
    return out


def merge_all(corpus: Iterable[SymbolSequence], pair: Pair) -> list[SymbolSequence]:
    """Replace every occurrence of ``pair``, leftmost first, without overlap."""
    left, right = pair
    if not left or not right:
        raise ParameterError("pair tokens must be non-empty")
    out = []
    for seq in corpus:
        if seq.mergeable(left, right) and len(seq) > 1:
            out.append(seq.replace(_merge_tokens(seq.tokens, left, right)))
        else:
            out.append(seq)
    return out


def _leftmost_nonoverlapping(pos: np.ndarray) -> np.ndarray:
    """From sorted match positions of a pair (x, x), keep every other one per run."""
    if len(pos) < 2:
        return pos
    starts = np.ones(len(pos), dtype=bool)
    starts[1:] = np.diff(pos) != 1
    idx = np.arange(len(pos))
    run_start = np.maximum.accumulate(np.where(starts, idx, 0))
    return pos[(idx - run_start) % 2 == 0]


def train_bpe(
    corpus: Sequence[SymbolSequence],
    vocab_size: int,
    merge_singletons: bool = False,
) -> MergeTable:
    """Learn merge rules until the vocabulary reaches ``vocab_size``.

    Each iteration recounts all bigrams from scratch, picks the most frequent
    (lexicographic tie-break) and merges it everywhere. Training stops early
    when no pair occurs twice, unless ``merge_singletons`` is set.
    """
    base = sorted(base_alphabet(corpus))
    if vocab_size < len(base):
        raise ParameterError(f"vocab size {vocab_size} is below the base alphabet size {len(base)}")
    packed = PackedCorpus(corpus)
    vocab = Vocabulary(base)
    rules: list[MergeRule] = []
    data = packed.data
    min_count = 1 if merge_singletons else 2
    while len(vocab) < vocab_size:
        pos = packed.pair_positions(data)
        if len(pos) == 0:
            break
        n = len(packed.symbols)
        keys = data[pos].astype(np.int64) * n + data[pos + 1]
        uniq, counts = np.unique(keys, return_counts=True)
        top = counts.max()
        if top < min_count:
            break
        ties = uniq[counts == top]
        syms = packed.symbols
        best = min((syms[k // n], syms[k % n]) for k in ties.tolist())
        left_id, right_id = packed.ids[best[0]], packed.ids[best[1]]
        match = pos[keys == left_id * n + right_id]
        if left_id == right_id:
            match = _leftmost_nonoverlapping(match)
        new_id = packed.intern(best[0] + best[1])
        data = packed.merge_at(match, np.full(len(match), new_id, dtype=np.int32), data)
        rules.append(MergeRule(best[0], best[1], len(rules)))
        vocab.add(best[0] + best[1])
        log.debug("merge %d: %r + %r (count %d)", len(rules) - 1, best[0], best[1], top)
    return MergeTable(rules, Vocabulary(base))


def apply_bpe(
    sentence: SymbolSequence,
    table: MergeTable,
    p: float = 0.0,
    rng: np.random.Generator | None = None,
) -> SymbolSequence:
    """Segment a depth-0 sentence by replaying rules in priority order.

    With ``p > 0`` every individual merge occurrence is skipped with
    probability ``p``. ``p == 0`` never touches ``rng``.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"dropout probability must lie in [0, 1], got {p}")
    if p > 0 and rng is None:
        raise ParameterError("an rng is required when p > 0")
    tokens = list(sentence.tokens)
    rules = table.rules
    last = -1
    while len(tokens) > 1:
        best = None
        for pair in zip(tokens, tokens[1:]):
            pr = table.priority(pair)
            if pr is not None and pr > last and (best is None or pr < best):
                best = pr
        if best is None:
            break
        last = best
        left, right = rules[best].left, rules[best].right
        if not sentence.mergeable(left, right):
            continue
        out: list[str] = []
        i, n = 0, len(tokens)
        while i < n:
            if (
                i + 1 < n
                and tokens[i] == left
                and tokens[i + 1] == right
                and not (p > 0 and rng.random() < p)
            ):
                out.append(left + right)
                i += 2
            else:
                out.append(tokens[i])
                i += 1
        tokens = out
    return sentence.replace(tokens)


def bpe_segmentations(
    corpus: Sequence[SymbolSequence],
    table: MergeTable,
    p: float,
    samples: int,
    rng: np.random.Generator | None,
) -> MultiSegmentation:
    """Segment ``corpus`` ``samples`` times with BPE-dropout rate ``p``."""
    if samples <= 0:
        raise ParameterError("samples must be positive")
    passes = []
    global_vocab = Vocabulary(sorted(base_alphabet(corpus)))
    for _ in range(samples):
        seg = [apply_bpe(seq, table, p, rng) for seq in corpus]
        vocab = Vocabulary(sorted(base_alphabet(corpus)))
        for seq in seg:
            vocab.update(seq.tokens)
        global_vocab.update(vocab)
        passes.append(PassRecord(seg, vocab, PassTrace()))
    return MultiSegmentation(passes, global_vocab, {"p": p, "samples": samples}, "samples-done")
