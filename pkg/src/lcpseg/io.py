"""Corpus ingestion, model persistence and segmented-corpus text format."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .bpe import MergeRule, MergeTable
from .core import (
    BLANK,
    BoundaryMode,
    LcpsegError,
    MultiSegmentation,
    PassTrace,
    SymbolSequence,
    Vocabulary,
    tokenize_sentence,
)

BPE_HEADER = "#lcpseg-bpe v1"
LCP_HEADER = "#lcpseg-lcp v1"
BASE_PREFIX = "#base"
BLANK_MARKER = "▁"


class CorpusError(LcpsegError):
    pass


class ModelFormatError(LcpsegError):
    pass


# -- escaping ---------------------------------------------------------------

_ESC = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESC = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape(text: str) -> str:
    return "".join(_ESC.get(c, c) for c in text)


def unescape(text: str) -> str:
    out = []
    chars = iter(text)
    for c in chars:
        if c != "\\":
            out.append(c)
            continue
        nxt = next(chars, None)
        if nxt not in _UNESC:
            raise ValueError(f"bad escape sequence \\{nxt or ''} in {text!r}")
        out.append(_UNESC[nxt])
    return "".join(out)


# -- corpora ----------------------------------------------------------------


def iter_corpus(path: str | os.PathLike, boundary_mode=BoundaryMode.RESPECT) -> Iterator[SymbolSequence]:
    """Stream one SymbolSequence per LF-terminated line, empty lines kept."""
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            if raw.endswith(b"\n"):
                raw = raw[:-1]
            try:
                yield tokenize_sentence(raw, boundary_mode, origin=lineno - 1)
            except UnicodeDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: invalid UTF-8 ({e.reason})") from e


def load_corpus(path: str | os.PathLike, boundary_mode=BoundaryMode.RESPECT) -> list[SymbolSequence]:
    return list(iter_corpus(path, boundary_mode))


def read_lines(path: str | os.PathLike) -> list[str]:
    """Raw sentences of a corpus file, same line splitting as ``load_corpus``."""
    return [seq.text for seq in iter_corpus(path, BoundaryMode.MERGE_ACROSS)]


def render_tokens(tokens: Iterable[str], sep: str = " ", marker: str = BLANK_MARKER) -> str:
    """Join tokens with ``sep``; blanks become ``marker``.

    Literal backslashes, markers and separator starts inside tokens are
    backslash-escaped so that ``parse_tokens`` inverts this exactly.
    """
    parts = []
    for tok in tokens:
        buf = []
        i = 0
        while i < len(tok):
            c = tok[i]
            if c == "\\" or c == marker:
                buf.append("\\" + c)
            elif c == BLANK:
                buf.append(marker)
            elif tok.startswith(sep, i):
                buf.append("\\" + c)
            else:
                buf.append(c)
            i += 1
        parts.append("".join(buf))
    return sep.join(parts)


def parse_tokens(line: str, sep: str = " ", marker: str = BLANK_MARKER) -> list[str]:
    if not line:
        return []
    tokens: list[str] = []
    buf: list[str] = []
    i, n = 0, len(line)
    while i < n:
        c = line[i]
        if c == "\\" and i + 1 < n:
            buf.append(line[i + 1])
            i += 2
        elif line.startswith(sep, i):
            tokens.append("".join(buf))
            buf = []
            i += len(sep)
        else:
            buf.append(BLANK if c == marker else c)
            i += 1
    tokens.append("".join(buf))
    return tokens


def write_segmented(
    path: str | os.PathLike, corpus: Iterable[SymbolSequence | Sequence[str]], sep: str = " ", marker: str = BLANK_MARKER
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for seq in corpus:
            fh.write(render_tokens(seq, sep, marker))
            fh.write("\n")


def read_segmented(path: str | os.PathLike, sep: str = " ", marker: str = BLANK_MARKER) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="\n") as fh:
        return [parse_tokens(line[:-1] if line.endswith("\n") else line, sep, marker) for line in fh]


def pass_path(stem: str | os.PathLike, index: int) -> Path:
    """``<stem>.pass<i>.txt`` with 1-based ``index``."""
    return Path(f"{stem}.pass{index}.txt")


def trace_path(stem: str | os.PathLike) -> Path:
    return Path(f"{stem}.trace.json")


def write_passes(stem, result: MultiSegmentation, sep: str = " ", marker: str = BLANK_MARKER) -> list[Path]:
    paths = []
    for i, rec in enumerate(result.passes, 1):
        p = pass_path(stem, i)
        write_segmented(p, rec.segmentation, sep, marker)
        paths.append(p)
    return paths


# -- models -----------------------------------------------------------------


@dataclass
class LcpModel:
    vocab: Vocabulary
    v: int
    l: int
    k: float
    seed: int


def dumps_bpe(table: MergeTable) -> str:
    lines = [BPE_HEADER, "\t".join([BASE_PREFIX, *(escape(s) for s in table.base_vocab)])]
    lines.extend(f"{escape(r.left)}\t{escape(r.right)}" for r in table.rules)
    return "\n".join(lines) + "\n"


def loads_bpe(text: str) -> MergeTable:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != BPE_HEADER:
        raise ModelFormatError(f"expected header {BPE_HEADER!r}, got {lines[0] if lines else ''!r}")
    if len(lines) < 2 or lines[1].split("\t")[0] != BASE_PREFIX:
        raise ModelFormatError(f"line 2: expected {BASE_PREFIX!r} alphabet line")
    try:
        base = [unescape(s) for s in lines[1].split("\t")[1:]]
        rules = []
        for lineno, line in enumerate(lines[2:], 3):
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ModelFormatError(f"line {lineno}: expected '<left>\\t<right>'")
            rules.append(MergeRule(unescape(parts[0]), unescape(parts[1]), lineno - 3))
        return MergeTable(rules, Vocabulary(base))
    except ValueError as e:
        raise ModelFormatError(str(e)) from e


def dumps_lcp(model: LcpModel) -> str:
    lines = [LCP_HEADER, f"v={model.v} l={model.l} k={model.k!r} seed={model.seed}"]
    lines.extend(escape(e) for e in model.vocab)
    return "\n".join(lines) + "\n"


def loads_lcp(text: str) -> LcpModel:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != LCP_HEADER:
        raise ModelFormatError(f"expected header {LCP_HEADER!r}, got {lines[0] if lines else ''!r}")
    if len(lines) < 2:
        raise ModelFormatError("line 2: missing hyperparameter line")
    try:
        fields = dict(item.split("=", 1) for item in lines[1].split(" "))
        v, l, k, seed = int(fields["v"]), int(fields["l"]), float(fields["k"]), int(fields["seed"])
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"line 2: malformed hyperparameters {lines[1]!r}") from e
    vocab = Vocabulary()
    for lineno, line in enumerate(lines[2:], 3):
        try:
            entry = unescape(line)
        except ValueError as e:
            raise ModelFormatError(f"line {lineno}: {e}") from e
        if not entry or not vocab.add(entry):
            raise ModelFormatError(f"line {lineno}: empty or duplicate vocabulary entry")
    return LcpModel(vocab, v, l, k, seed)


def save_model(model: MergeTable | LcpModel, path: str | os.PathLike) -> None:
    text = dumps_bpe(model) if isinstance(model, MergeTable) else dumps_lcp(model)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_model(path: str | os.PathLike) -> MergeTable | LcpModel:
    with open(path, encoding="utf-8", newline="\n") as fh:
        text = fh.read()
    first = text.split("\n", 1)[0]
    if first == BPE_HEADER:
        return loads_bpe(text)
    if first == LCP_HEADER:
        return loads_lcp(text)
    raise ModelFormatError(f"{path}: unknown or unsupported model header {first!r}")


# -- run configuration and traces -------------------------------------------

ALGORITHMS = ("bpe", "bpe-dropout", "lcp-dropout")


@dataclass
class RunConfig:
    algorithm: str
    seed: int
    params: dict = field(default_factory=dict)
    boundary_mode: str = BoundaryMode.RESPECT.value
    input: str | None = None
    output: str | None = None

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        BoundaryMode(self.boundary_mode)

    def dumps(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def params_dict(params) -> dict:
    if params is None:
        return {}
    return dict(params) if isinstance(params, dict) else asdict(params)


def trace_dict(result: MultiSegmentation, seed: int | None, algorithm: str = "lcp-dropout") -> dict:
    return {
        "algorithm": algorithm,
        "seed": seed,
        "params": params_dict(result.params),
        "stop_reason": result.stop_reason,
        "vocab_size": len(result.global_vocab),
        "passes": [asdict(p.trace) for p in result.passes],
    }


def write_trace(path, result: MultiSegmentation, seed: int | None, algorithm: str = "lcp-dropout") -> None:
    Path(path).write_text(json.dumps(trace_dict(result, seed, algorithm), indent=2) + "\n", encoding="utf-8")


def read_trace(path) -> tuple[dict, list[PassTrace]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return doc, [PassTrace(**t) for t in doc["passes"]]
