import numpy as np
import pytest

from lcpseg import (
    BoundaryMode,
    MergeTable,
    ParameterError,
    apply_bpe,
    count_bigrams,
    merge_all,
    most_frequent_bigram,
    tokenize_sentence,
    train_bpe,
)
from lcpseg.bpe import bpe_segmentations

import oracles
from conftest import make_corpus, synthetic_lines

ABRA = list("abracadabra")


def test_count_bigrams_abracadabra():
    # frozen from oracles.bigram_counts
    expected = {
        ("a", "b"): 2,
        ("b", "r"): 2,
        ("r", "a"): 2,
        ("a", "c"): 1,
        ("c", "a"): 1,
        ("a", "d"): 1,
        ("d", "a"): 1,
    }
    assert oracles.bigram_counts([ABRA]) == expected
    assert dict(count_bigrams(make_corpus(["abracadabra"]))) == expected


def test_count_bigrams_degenerate():
    assert not count_bigrams([])
    assert not count_bigrams(make_corpus(["a"]))


def test_count_bigrams_total_matches_length():
    corpus = make_corpus(["aaab", "", "ba", "x"])
    assert sum(count_bigrams(corpus).values()) == sum(max(len(s) - 1, 0) for s in corpus)


def test_most_frequent_tie_break():
    table = count_bigrams(make_corpus(["abracadabra"]))
    assert most_frequent_bigram(table) == ("a", "b")
    merged = merge_all(make_corpus(["abracadabra"]), ("a", "b"))
    assert most_frequent_bigram(count_bigrams(merged)) == ("ab", "r")
    assert most_frequent_bigram(count_bigrams([])) is None


def test_merge_all_walkthrough():
    step1 = merge_all(make_corpus(["abracadabra"]), ("a", "b"))
    assert step1[0].tokens == ("ab", "r", "a", "c", "a", "d", "ab", "r", "a")
    step2 = merge_all(step1, ("ab", "r"))
    assert step2[0].tokens == ("abr", "a", "c", "a", "d", "abr", "a")
    assert merge_all(make_corpus(["ab"]), ("x", "y"))[0].tokens == ("a", "b")


def test_merge_all_same_pair_is_leftmost():
    assert merge_all(make_corpus(["aaa"]), ("a", "a"))[0].tokens == ("aa", "a")
    assert merge_all(make_corpus(["aaaa"]), ("a", "a"))[0].tokens == ("aa", "aa")


def test_train_bpe_walkthrough():
    table = train_bpe(make_corpus(["abracadabra"]), vocab_size=5 + 2)
    assert table.pairs == [("a", "b"), ("ab", "r")]
    assert table.base_vocab.entries == ["a", "b", "c", "d", "r"]


def test_train_bpe_trivial_budgets():
    corpus = make_corpus(["abracadabra"])
    assert train_bpe(corpus, 5).rules == []
    distinct = make_corpus(["abcdefg"])
    assert max(oracles.bigram_counts([list("abcdefg")]).values()) == 1
    assert train_bpe(distinct, 100).rules == []
    assert len(train_bpe(distinct, 100, merge_singletons=True).rules) > 0


def test_train_bpe_rejects_small_budget():
    with pytest.raises(ParameterError):
        train_bpe(make_corpus(["abc"]), 2)


def test_train_bpe_runs_of_identical_symbols():
    table = train_bpe(make_corpus(["aaaaa", "aaa"]), vocab_size=4)
    assert table.pairs == oracles.naive_bpe(["aaaaa", "aaa"], 4)


@pytest.mark.parametrize("seed", range(5))
def test_train_bpe_matches_naive_trainer(seed):
    lines = synthetic_lines(30, 4, 3, 15, seed)
    table = train_bpe(make_corpus(lines), vocab_size=40)
    assert table.pairs == oracles.naive_bpe(lines, 40)


def test_apply_bpe_reproduces_training():
    corpus = make_corpus(["abracadabra"])
    table = train_bpe(corpus, 7)
    assert apply_bpe(corpus[0], table).tokens == ("abr", "a", "c", "a", "d", "abr", "a")


def test_apply_bpe_full_dropout_is_identity():
    seq = tokenize_sentence("abracadabra")
    table = train_bpe([seq], 9)
    assert apply_bpe(seq, table, 1.0, np.random.default_rng(0)) == seq


def test_apply_bpe_dropout_is_seeded():
    lines = synthetic_lines(20, 3, 10, 20, 1)
    corpus = make_corpus(lines)
    table = train_bpe(corpus, 30)
    runs = [
        [apply_bpe(s, table, 0.1, np.random.default_rng(42)).tokens for s in corpus] for _ in range(2)
    ]
    assert runs[0] == runs[1]
    plain = [apply_bpe(s, table).tokens for s in corpus]
    varied = [apply_bpe(s, table, 0.5, np.random.default_rng(3)).tokens for s in corpus]
    assert plain != varied


def test_apply_bpe_validates_p():
    with pytest.raises(ParameterError):
        apply_bpe(tokenize_sentence("ab"), MergeTable(), 1.5)
    with pytest.raises(ParameterError):
        apply_bpe(tokenize_sentence("ab"), MergeTable(), 0.5)


def test_apply_bpe_skips_rules_across_blanks():
    table = MergeTable.from_pairs([("a", " "), ("a", "b")])
    seq = tokenize_sentence("a ab", BoundaryMode.RESPECT)
    assert apply_bpe(seq, table).tokens == ("a", " ", "ab")


def test_bpe_segmentations_samples():
    corpus = make_corpus(synthetic_lines(10, 3, 5, 12, 0))
    table = train_bpe(corpus, 20)
    result = bpe_segmentations(corpus, table, 0.1, 3, np.random.default_rng(0))
    assert len(result.passes) == 3
    for rec in result.passes:
        assert [s.text for s in rec.segmentation] == [s.text for s in corpus]


def test_train_bpe_blank_lines_only():
    corpus = make_corpus(["", ""], "respect-word-boundaries")
    table = train_bpe(corpus, 3)
    assert table.pairs == []
