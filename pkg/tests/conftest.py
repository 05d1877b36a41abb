import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from lcpseg import BoundaryMode, tokenize_sentence  # noqa: E402

WORKED_TEXT = "ababcaacabcb"
WORKED_LABELS = [
    {"a": 1, "b": 0, "c": 0},
    {"ab": 1, "c": 0, "a": 1, "b": 1},
    {"a": 0, "b": 1, "c": 1},
    {"a": 1, "b": 0, "ca": 0, "c": 0},
]


def sentences_strategy(alphabet="abc ", min_size=0, max_size=12, max_sentences=4):
    sentence = st.text(alphabet=alphabet, min_size=min_size, max_size=max_size)
    return st.lists(sentence, min_size=1, max_size=max_sentences)


boundary_modes = st.sampled_from([BoundaryMode.MERGE_ACROSS, BoundaryMode.RESPECT])


def make_corpus(lines, mode=BoundaryMode.MERGE_ACROSS):
    return [tokenize_sentence(s, mode, i) for i, s in enumerate(lines)]


def synthetic_lines(n_sentences, alphabet_size, min_len, max_len, seed):
    rng = np.random.default_rng(seed)
    letters = [chr(ord("a") + i) for i in range(alphabet_size)]
    return [
        "".join(rng.choice(letters, size=int(rng.integers(min_len, max_len + 1))))
        for _ in range(n_sentences)
    ]


@pytest.fixture
def worked_corpus():
    return make_corpus([WORKED_TEXT])


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, elapsed in results:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  ({elapsed})")
