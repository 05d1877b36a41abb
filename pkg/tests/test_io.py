import numpy as np
import pytest

from lcpseg import LcpParams, MergeTable, Vocabulary, lcp_dropout, replay_labeler, train_bpe
from lcpseg.io import (
    BLANK_MARKER,
    CorpusError,
    LcpModel,
    ModelFormatError,
    RunConfig,
    dumps_bpe,
    dumps_lcp,
    escape,
    load_corpus,
    load_model,
    loads_bpe,
    loads_lcp,
    parse_tokens,
    read_segmented,
    render_tokens,
    save_model,
    unescape,
    write_passes,
)

from conftest import WORKED_LABELS, make_corpus


def test_load_corpus_worked_example(tmp_path):
    path = tmp_path / "c.txt"
    path.write_bytes(b"ababcaacabcb\n")
    corpus = load_corpus(path)
    assert len(corpus) == 1 and len(corpus[0]) == 12


def test_load_corpus_empty_and_blank_lines(tmp_path):
    empty = tmp_path / "e.txt"
    empty.write_bytes(b"")
    assert load_corpus(empty) == []
    three = tmp_path / "t.txt"
    three.write_bytes(b"ab\n\ncd\n")
    corpus = load_corpus(three)
    assert [s.text for s in corpus] == ["ab", "", "cd"]
    assert [s.origin for s in corpus] == [0, 1, 2]


def test_load_corpus_bad_encoding_names_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_bytes(b"ok\nfine\n\xff\xfe\n")
    with pytest.raises(CorpusError, match=":3:"):
        load_corpus(path)


@pytest.mark.parametrize("text", ["plain", "tab\there", "nl\nx", "back\\slash", "\r", "\\t"])
def test_escape_roundtrip(text):
    assert unescape(escape(text)) == text
    assert "\t" not in escape(text) and "\n" not in escape(text)


def test_unescape_rejects_unknown_sequence():
    with pytest.raises(ValueError):
        unescape("a\\q")


@pytest.mark.parametrize(
    "tokens, sep",
    [
        (["ab", " ", "c"], " "),
        (["a b", "c"], " "),
        ([BLANK_MARKER, "\\", "x"], " "),
        (["a|b", "c"], "|"),
        (["x@@ y", "@@"], "@@ "),
        ([], " "),
    ],
)
def test_render_parse_roundtrip(tokens, sep):
    assert parse_tokens(render_tokens(tokens, sep), sep) == tokens


def test_render_uses_marker_for_blanks():
    assert render_tokens(["ab", " ", "c"]) == f"ab {BLANK_MARKER} c"


def test_bpe_model_roundtrip(tmp_path):
    table = train_bpe(make_corpus(["abracadabra", "a\tb a\\b"]), 14)
    path = tmp_path / "m.bpe"
    save_model(table, path)
    loaded = load_model(path)
    assert loaded == table
    save_model(loaded, tmp_path / "m2.bpe")
    assert path.read_bytes() == (tmp_path / "m2.bpe").read_bytes()


def test_empty_merge_table_roundtrip():
    text = dumps_bpe(MergeTable())
    assert text.splitlines()[0] == "#lcpseg-bpe v1"
    assert loads_bpe(text) == MergeTable()


def test_lcp_model_worked_roundtrip(tmp_path, worked_corpus):
    result = lcp_dropout(
        worked_corpus, LcpParams(6, 5, 0.5), np.random.default_rng(0), replay_labeler(WORKED_LABELS)
    )
    model = LcpModel(result.global_vocab, 6, 5, 0.5, 0)
    text = dumps_lcp(model)
    assert text.splitlines() == ["#lcpseg-lcp v1", "v=6 l=5 k=0.5 seed=0", "a", "b", "c", "ab", "abc", "ca"]
    path = tmp_path / "m.lcp"
    save_model(model, path)
    assert load_model(path) == model


@pytest.mark.parametrize(
    "text",
    [
        "#lcpseg-bpe v2\n#base\n",
        "garbage\n",
        "",
        "#lcpseg-lcp v1\nv=6 l=x k=0.5 seed=0\n",
        "#lcpseg-lcp v1\nv=6 l=5 k=0.5 seed=0\na\na\n",
    ],
)
def test_corrupt_models_raise(tmp_path, text):
    path = tmp_path / "bad"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_malformed_rule_reports_line():
    with pytest.raises(ModelFormatError, match="line 4"):
        loads_bpe("#lcpseg-bpe v1\n#base\ta\na\ta\nonly-one-field\n")
    with pytest.raises(ModelFormatError, match="line 3"):
        loads_lcp("#lcpseg-lcp v1\nv=1 l=1 k=1.0 seed=0\nbad\\q\n")


def test_write_passes_are_line_aligned(tmp_path):
    corpus = make_corpus(["ab ab", "", "b a"], "respect-word-boundaries")
    result = lcp_dropout(corpus, LcpParams(8, 4, 0.5), np.random.default_rng(1))
    paths = write_passes(tmp_path / "out", result)
    assert [p.name for p in paths] == [f"out.pass{i}.txt" for i in range(1, len(paths) + 1)]
    for path, rec in zip(paths, result.passes):
        assert read_segmented(path) == [list(s.tokens) for s in rec.segmentation]


def test_run_config_roundtrip(tmp_path):
    cfg = RunConfig("lcp-dropout", 123, {"v": 10, "l": 5, "k": 0.01}, input="in.txt", output="out")
    cfg.save(tmp_path / "c.json")
    assert RunConfig.load(tmp_path / "c.json") == cfg
    with pytest.raises(ValueError):
        RunConfig("unigram", 1)


def test_vocabulary_equality_is_ordered():
    assert Vocabulary(["a", "b"]) != Vocabulary(["b", "a"])
