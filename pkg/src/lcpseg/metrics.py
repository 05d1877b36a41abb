"""Segmentation statistics and corpus-level BLEU."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Sequence

from .core import ContractError, MultiSegmentation, ParameterError, PassTrace, validate_segmentation


@dataclass(frozen=True)
class SegmentationStats:
    """Corpus statistics of a multi-pass segmentation.

    ``multiplicity_passes`` is the number of passes (segmentations emitted per
    input string); ``multiplicity_distinct`` averages, over sentences, how many
    of those are pairwise different. Token and symbol counts include blanks.
    """

    multiplicity_passes: float
    multiplicity_distinct: float
    mean_depth: float
    avg_subword_len: float
    compression_ratio: float
    mean_tokens_per_sentence: float
    vocab_size: int

    def as_dict(self) -> dict:
        return asdict(self)


def segmentation_stats(
    passes: Sequence[Sequence[Sequence[str]]],
    traces: Sequence[PassTrace],
    raw_corpus: Sequence[str],
) -> SegmentationStats:
    """Statistics from plain token lists, one list of sentences per pass."""
    n_sent = len(raw_corpus)
    for i, seg in enumerate(passes):
        if len(seg) != n_sent:
            raise ContractError(f"pass {i + 1} has {len(seg)} sentences, corpus has {n_sent}")
        for j, (toks, raw) in enumerate(zip(seg, raw_corpus)):
            if not validate_segmentation(toks, raw):
                raise ContractError(f"pass {i + 1}, sentence {j + 1} does not reproduce the corpus")
    m = len(passes)
    symbols = sum(len(s) for s in raw_corpus) * m
    tokens = sum(len(t) for seg in passes for t in seg)
    if n_sent and m:
        distinct = sum(len({tuple(seg[j]) for seg in passes}) for j in range(n_sent)) / n_sent
        per_sentence = tokens / (n_sent * m)
    else:
        distinct = float(m > 0)
        per_sentence = 0.0
    vocab = {t for seg in passes for toks in seg for t in toks}
    return SegmentationStats(
        multiplicity_passes=float(m),
        multiplicity_distinct=float(distinct),
        mean_depth=sum(t.depth for t in traces) / len(traces) if traces else 0.0,
        avg_subword_len=symbols / tokens if tokens else 1.0,
        compression_ratio=tokens / symbols if symbols else 1.0,
        mean_tokens_per_sentence=per_sentence,
        vocab_size=len(vocab),
    )


def compute_stats(result: MultiSegmentation, raw_corpus: Sequence[str]) -> SegmentationStats:
    passes = [[seq.tokens for seq in rec.segmentation] for rec in result.passes]
    return segmentation_stats(passes, [rec.trace for rec in result.passes], raw_corpus)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(
    candidates: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
    weights: Sequence[float] | None = None,
    clip: bool = True,
) -> float:
    """Corpus BLEU with one reference per candidate and no smoothing.

    Matches and candidate n-gram counts are summed over the corpus before
    dividing. Orders for which the candidate side has no n-grams at all are
    left out of the geometric mean. ``clip=False`` counts every candidate
    n-gram that occurs in the reference, without capping.
    """
    if len(candidates) != len(references):
        raise ParameterError(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise ParameterError("empty corpus")
    if max_n < 1:
        raise ParameterError("max_n must be positive")
    if weights is None:
        weights = [1.0 / max_n] * max_n
    if len(weights) != max_n or abs(sum(weights) - 1.0) > 1e-9:
        raise ParameterError("weights must have max_n entries summing to 1")
    cand_len = sum(len(c) for c in candidates)
    ref_len = sum(len(r) for r in references)
    matches = [0] * max_n
    totals = [0] * max_n
    for cand, ref in zip(candidates, references):
        for n in range(1, max_n + 1):
            c_counts = _ngrams(cand, n)
            r_counts = _ngrams(ref, n)
            totals[n - 1] += sum(c_counts.values())
            if clip:
                matches[n - 1] += sum(min(c, r_counts[g]) for g, c in c_counts.items())
            else:
                matches[n - 1] += sum(c for g, c in c_counts.items() if g in r_counts)
    log_sum = 0.0
    for w, hit, total in zip(weights, matches, totals):
        if total == 0:
            continue
        if hit == 0:
            return 0.0
        log_sum += w * math.log(hit / total)
    if cand_len == 0:
        return 1.0 if ref_len == 0 else 0.0
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_sum)
