"""Locally consistent parsing with frequency gating, and LCP-dropout.

One step draws a random bit for every vocabulary entry, finds the adjacent
pairs labelled ``1 0`` (landmarks), keeps the most frequent fraction ``k`` of
the distinct landmark pairs and merges all their landmark occurrences at
once. Landmarks never overlap: the right half of a landmark carries a 0, so
no landmark can start there. LCP-dropout repeats whole parsing passes from
the character level with fresh labels, collecting one segmentation per pass.
"""

from __future__ import annotations

import enum
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .core import (
    ContractError,
    PackedCorpus,
    Pair,
    ParameterError,
    MultiSegmentation,
    PassRecord,
    PassTrace,
    SymbolSequence,
    Vocabulary,
    base_alphabet,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Labeling:
    bits: Mapping[str, int]
    seed_record: object = None

    def __getitem__(self, token: str) -> int:
        try:
            return self.bits[token]
        except KeyError:
            raise ContractError(f"token {token!r} has no label") from None


Labeler = Callable[[Vocabulary, np.random.Generator], Labeling]


@dataclass(frozen=True)
class LcpParams:
    v: int
    l: int
    k: float = 0.01
    max_passes: int = 100
    max_inner: int = 10_000
    max_relabel: int = 32
    max_stall: int = 10

    def __post_init__(self) -> None:
        if self.v <= 0:
            raise ParameterError(f"v must be positive, got {self.v}")
        if not 0 < self.l <= self.v:
            raise ParameterError(f"l must satisfy 0 < l <= v, got l={self.l}, v={self.v}")
        if not 0 < self.k <= 1:
            raise ParameterError(f"k must lie in (0, 1], got {self.k}")
        for name in ("max_passes", "max_inner", "max_relabel", "max_stall"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")

    @classmethod
    def with_defaults(cls, v: int, **kw) -> "LcpParams":
        """``l = v // 2`` and ``k = 0.01`` unless given."""
        kw.setdefault("l", max(1, v // 2))
        return cls(v=v, **kw)


def top_k_count(k: float, n_candidates: int) -> int:
    """ceil(k * n), robust to binary rounding (0.01 * 300 must give 3)."""
    return math.ceil(round(k * n_candidates, 9))


def assign_labels(vocab: Vocabulary, rng: np.random.Generator) -> Labeling:
    """One fair bit per entry, drawn in rank order."""
    if len(vocab) == 0:
        raise ParameterError("cannot label an empty vocabulary")
    state = rng.bit_generator.state.get("state", {}).get("state")
    bits = rng.integers(0, 2, size=len(vocab)).tolist()
    return Labeling(dict(zip(vocab, bits)), state)


def replay_labeler(script: Iterable[Mapping[str, int]]) -> Labeler:
    """Labeler that hands out pre-recorded labelings in order.

    Each mapping must cover the vocabulary it is asked to label. Used to
    replay hand-worked traces; raises once the script runs out.
    """
    it = iter(list(script))

    def labeler(vocab: Vocabulary, rng: np.random.Generator) -> Labeling:
        try:
            bits = next(it)
        except StopIteration:
            raise ContractError("label script exhausted") from None
        missing = [e for e in vocab if e not in bits]
        if missing:
            raise ContractError(f"scripted labeling misses {missing!r}")
        return Labeling({e: int(bits[e]) for e in vocab}, "scripted")

    return labeler


def landmark_pairs(corpus: Iterable[SymbolSequence], labeling: Labeling) -> Counter:
    """Frequency of every distinct pair (a, b) occurring with labels 1 0."""
    counts: Counter = Counter()
    for seq in corpus:
        toks = seq.tokens
        labels = [labeling[t] for t in toks]
        for i in range(len(toks) - 1):
            if labels[i] == 1 and labels[i + 1] == 0 and seq.mergeable(toks[i], toks[i + 1]):
                counts[toks[i], toks[i + 1]] += 1
    return counts


def select_candidates(
    corpus: Iterable[SymbolSequence],
    labeling: Labeling,
    k: float,
    allowed: Vocabulary | None = None,
) -> list[Pair]:
    """Top ``ceil(k * C)`` of the C distinct landmark pairs.

    Pairs are ranked by corpus frequency, ties lexicographically. With
    ``allowed`` only pairs whose concatenation is already in it compete.
    """
    counts = landmark_pairs(corpus, labeling)
    if allowed is not None:
        counts = Counter({p: c for p, c in counts.items() if p[0] + p[1] in allowed})
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [p for p, _ in ranked[: top_k_count(k, len(ranked))]]


def lcp_step(
    corpus: Sequence[SymbolSequence],
    vocab: Vocabulary,
    labeling: Labeling,
    k: float,
    allowed: Vocabulary | None = None,
) -> tuple[list[SymbolSequence], list[str]]:
    """Merge all landmark occurrences of the selected pairs.

    ``vocab`` is extended in place with every new concatenation, in candidate
    rank order; the list of newly added entries is returned alongside the
    rewritten corpus.
    """
    ranked = select_candidates(corpus, labeling, k, allowed)
    if not ranked:
        return list(corpus), []
    selected = set(ranked)
    out: list[SymbolSequence] = []
    for seq in corpus:
        toks = seq.tokens
        new: list[str] = []
        i, n = 0, len(toks)
        while i < n:
            # A selected pair always has labels 1 0, so matches never overlap.
            if i + 1 < n and (toks[i], toks[i + 1]) in selected:
                new.append(toks[i] + toks[i + 1])
                i += 2
            else:
                new.append(toks[i])
                i += 1
        out.append(seq.replace(new) if len(new) != n else seq)
    added = [a + b for a, b in ranked if vocab.add(a + b)]
    return out, added


class _PackedLcp:
    """Array-backed pass runner; semantics match ``lcp_step``."""

    def __init__(self, corpus: Sequence[SymbolSequence]) -> None:
        self.packed = PackedCorpus(corpus)
        self.base = list(self.packed.symbols)
        self._lex: np.ndarray | None = None

    def lex_rank(self) -> np.ndarray:
        if self._lex is None or len(self._lex) < len(self.packed.symbols):
            self._lex = self.packed.lex_rank()
        return self._lex

    def step(self, data: np.ndarray, vocab: Vocabulary, labeling: Labeling, k: float):
        packed = self.packed
        n = len(packed.symbols)
        labels = np.full(n, -1, dtype=np.int8)
        for entry, bit in labeling.bits.items():
            idx = packed.ids.get(entry)
            if idx is not None:
                labels[idx] = bit
        tokens = data[data >= 0]
        if len(tokens) and (labels[tokens] < 0).any():
            bad = packed.symbols[int(tokens[labels[tokens] < 0][0])]
            raise ContractError(f"token {bad!r} has no label")
        pos = packed.pair_positions(data)
        if len(pos) == 0:
            return data, None
        left, right = data[pos], data[pos + 1]
        hit = (labels[left] == 1) & (labels[right] == 0)
        pos, left, right = pos[hit], left[hit], right[hit]
        if len(pos) == 0:
            return data, None
        keys = left.astype(np.int64) * n + right
        uniq, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        take = top_k_count(k, len(uniq))
        lex = self.lex_rank()
        order = np.lexsort((lex[uniq % n], lex[uniq // n], -counts))[:take]
        chosen = np.zeros(len(uniq), dtype=bool)
        chosen[order] = True
        new_ids = np.empty(len(uniq), dtype=np.int32)
        added: list[str] = []
        for u in order.tolist():
            a, b = divmod(int(uniq[u]), n)
            merged = packed.symbols[a] + packed.symbols[b]
            new_ids[u] = packed.intern(merged)
            if vocab.add(merged):
                added.append(merged)
        mask = chosen[inverse]
        return packed.merge_at(pos[mask], new_ids[inverse[mask]], data), added

    def run_pass(
        self,
        params: LcpParams,
        rng: np.random.Generator,
        labeler: Labeler,
    ) -> tuple[np.ndarray, Vocabulary, PassTrace]:
        data = self.packed.data
        vocab = Vocabulary(self.base)
        trace = PassTrace()
        idle = 0
        while len(vocab) < params.l:
            if trace.depth >= params.max_inner:
                trace.inner_limit_hit = True
                break
            labeling = labeler(vocab, rng)
            trace.depth += 1
            data, added = self.step(data, vocab, labeling, params.k)
            if added is None:
                trace.relabel_retries += 1
                idle += 1
                if idle >= params.max_relabel:
                    trace.relabel_exhausted = True
                    break
                continue
            idle = 0
            trace.added_per_depth.append(len(added))
        return data, vocab, trace


def lcp_dropout(
    corpus: Sequence[SymbolSequence],
    params: LcpParams,
    rng: np.random.Generator,
    labeler: Labeler = assign_labels,
) -> MultiSegmentation:
    """Produce several segmentations of ``corpus`` until |V| reaches ``v``.

    Every pass restarts from the character-level corpus with a fresh pass
    vocabulary of base symbols and parses while the pass vocabulary is
    smaller than ``l``. The pass vocabulary is then folded into the global
    one. Safety limits end degenerate runs; ``stop_reason`` tells which.
    """
    base = sorted(base_alphabet(corpus))
    if params.v < len(base):
        raise ParameterError(f"v={params.v} is below the base alphabet size {len(base)}")
    engine = _PackedLcp(corpus)
    global_vocab = Vocabulary(base)
    passes: list[PassRecord] = []
    if not base:
        passes.append(PassRecord(list(corpus), Vocabulary(), PassTrace()))
        return MultiSegmentation(passes, global_vocab, params, "empty-corpus")
    stall = 0
    while True:
        data, vocab, trace = engine.run_pass(params, rng, labeler)
        grew = global_vocab.update(vocab)
        passes.append(PassRecord(engine.packed.unpack(data), vocab, trace))
        log.info(
            "pass %d: depth %d, |V_m|=%d, |V|=%d", len(passes), trace.depth, len(vocab), len(global_vocab)
        )
        if len(global_vocab) >= params.v:
            reason = "vocab-reached"
            break
        stall = 0 if grew else stall + 1
        if stall >= params.max_stall:
            reason = "stalled"
            break
        if len(passes) >= params.max_passes:
            reason = "max-passes"
            break
    return MultiSegmentation(passes, global_vocab, params, reason)


class SegmentMode(str, enum.Enum):
    GREEDY = "greedy-longest-match"
    LCP_SAMPLE = "lcp-sample"


def greedy_longest_match(sentence: SymbolSequence, vocab: Vocabulary) -> SymbolSequence:
    """Left-to-right longest prefix match; unknown symbols pass through."""
    text = sentence.text
    max_len = max((len(e) for e in vocab), default=1)
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        for j in range(min(n, i + max_len), i, -1):
            piece = text[i:j]
            if j == i + 1 or (piece in vocab and not any(b in piece for b in sentence.barriers)):
                out.append(piece)
                i = j
                break
    return sentence.replace(out)


def segment_test_time(
    sentence: SymbolSequence,
    vocab: Vocabulary,
    mode: SegmentMode | str = SegmentMode.GREEDY,
    k: float = 0.01,
    rng: np.random.Generator | None = None,
    max_relabel: int = 32,
) -> SymbolSequence:
    """Segment an unseen depth-0 sentence with a trained vocabulary.

    ``lcp-sample`` reruns labeled parsing on the sentence alone, but only
    merges pairs whose concatenation is already in ``vocab``; it stops once
    ``max_relabel`` consecutive labelings merge nothing.
    """
    mode = SegmentMode(mode)
    if mode is SegmentMode.GREEDY:
        return greedy_longest_match(sentence, vocab)
    if rng is None:
        raise ParameterError("lcp-sample needs an rng")
    label_vocab = vocab.copy()
    label_vocab.update(sorted(set(sentence.tokens) - set(vocab)))
    current = [sentence]
    idle = 0
    while len(current[0]) > 1 and idle < max_relabel:
        labeling = assign_labels(label_vocab, rng)
        # allowed is a subset of label_vocab, so lcp_step never extends it
        nxt, _ = lcp_step(current, label_vocab, labeling, k, allowed=vocab)
        if nxt[0] == current[0]:
            idle += 1
        else:
            idle = 0
        current = nxt
    return current[0]
