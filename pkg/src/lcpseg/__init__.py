"""Subword segmentation with BPE, BPE-dropout and LCP-dropout."""

from .bpe import (
    MergeRule,
    MergeTable,
    apply_bpe,
    bpe_segmentations,
    count_bigrams,
    merge_all,
    most_frequent_bigram,
    train_bpe,
)
from .core import (
    BoundaryMode,
    ContractError,
    LcpsegError,
    MultiSegmentation,
    ParameterError,
    PassRecord,
    PassTrace,
    SymbolSequence,
    Vocabulary,
    tokenize_sentence,
    validate_segmentation,
)
from .io import LcpModel, RunConfig, load_corpus, load_model, save_model
from .lcp import (
    Labeling,
    LcpParams,
    SegmentMode,
    assign_labels,
    lcp_dropout,
    lcp_step,
    replay_labeler,
    segment_test_time,
    select_candidates,
)
from .metrics import SegmentationStats, compute_stats, corpus_bleu

__version__ = "0.1.0"
