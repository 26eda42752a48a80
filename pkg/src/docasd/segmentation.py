"""Rule-based sentence segmentation with character spans.

Documents are NFC-normalized first; every span refers to the normalized
text.  Newlines are hard boundaries, terminal punctuation splits within a
line.  An external line-based segmenter can be plugged in instead of the
builtin rules (plain text on stdin, one sentence per line on stdout).
"""

from __future__ import annotations

import shlex
import subprocess
import unicodedata
from dataclasses import dataclass, field

from .errors import EmptyDocument, InvalidInput, SegmenterBackendError

# Terminal punctuation. CJK terminals end a sentence unconditionally;
# Latin terminals require following whitespace (or end of line) so that
# decimals ("3.14") and inline dots never split.
_LATIN_TERMINALS = ".!?"
_CJK_TERMINALS = "。！？…"  # 。 ！ ？ …
_TERMINALS = _LATIN_TERMINALS + _CJK_TERMINALS

# Closing quotes/brackets that belong to the sentence they terminate.
_CLOSERS = "\"'”’»›)\\]}」』】〉》）"

# Lowercased tokens (including the trailing dot) that never end a sentence.
_ABBREVIATIONS = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "no.",
    "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "fig.", "inc.", "ltd.",
    "co.", "dept.", "est.", "approx.", "u.s.", "u.k.", "u.n.",
    "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.",
    "sept.", "oct.", "nov.", "dec.",
})

# Languages segmented with the CJK rule set by default.
_CJK_LANGS = frozenset({"zh", "ja", "yue"})


@dataclass(frozen=True)
class SentenceList:
    """A segmented document: ordered sentences plus their character spans.

    ``text`` is the NFC-normalized document; ``text[start:end] == sentence``
    for every span, spans are strictly increasing and non-overlapping, and
    no sentence is empty.
    """

    doc_id: str
    language: str
    sentences: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]
    text: str

    def __post_init__(self):
        if len(self.sentences) != len(self.spans):
            raise InvalidInput("sentences and spans differ in length")
        prev_end = 0
        for sent, (start, end) in zip(self.sentences, self.spans):
            if start < prev_end or end <= start:
                raise InvalidInput(f"spans not strictly increasing at ({start}, {end})")
            if self.text[start:end].strip() != sent:
                raise InvalidInput(f"span ({start}, {end}) does not match its sentence")
            if not sent.strip():
                raise InvalidInput("empty sentence")
            prev_end = end

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class SegmenterConfig:
    """How to segment: builtin rules or an external line-based tool."""

    backend: str = "builtin-rules"
    external_command: str | None = None
    language_overrides: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.backend not in ("builtin-rules", "external"):
            raise InvalidInput(f"unknown segmenter backend {self.backend!r}")
        if self.backend == "external" and not self.external_command:
            raise InvalidInput("external backend requires a command template")


def _rule_set(language: str, overrides: dict[str, str]) -> str:
    primary = language.split("-")[0].split("_")[0].lower()
    if primary in overrides:
        return overrides[primary]
    if language.lower() in overrides:
        return overrides[language.lower()]
    return "cjk" if primary in _CJK_LANGS else "latin"


def _preceding_token(text: str, dot_pos: int) -> str:
    """Token (word plus internal dots) whose final character is at dot_pos."""
    start = dot_pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start : dot_pos + 1].lstrip("\"'(“‘«")


def _split_line(line: str, offset: int, rules: str) -> list[tuple[int, int]]:
    """Boundary spans (absolute offsets) for one newline-free line."""
    spans: list[tuple[int, int]] = []
    n = len(line)
    start = 0
    i = 0
    while i < n:
        ch = line[i]
        if ch not in _TERMINALS:
            i += 1
            continue
        # absorb a run of terminals ("?!", "...", "！！")
        run_start = i
        while i < n and line[i] in _TERMINALS:
            i += 1
        run = line[run_start:i]
        # absorb closing quotes/brackets
        while i < n and line[i] in _CLOSERS:
            i += 1
        has_cjk = any(c in _CJK_TERMINALS for c in run)
        if has_cjk:
            boundary = True
        else:
            boundary = i >= n or line[i].isspace()
            if boundary and run == "." and rules == "latin":
                token = _preceding_token(line, run_start).lower()
                if token in _ABBREVIATIONS:
                    boundary = False
                elif len(token) == 2 and token[0].isalpha():
                    boundary = False  # single-letter initial, "J. Smith"
        if boundary:
            spans.append((offset + start, offset + i))
            start = i
    if start < n:
        spans.append((offset + start, offset + n))
    return spans


def _trim_span(text: str, start: int, end: int) -> tuple[int, int] | None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start == end:
        return None
    return start, end


def segment(document: str, language: str, config: SegmenterConfig | None = None,
            doc_id: str = "") -> SentenceList:
    """Split a raw document into sentences with spans.

    Deterministic: identical inputs always produce identical output.
    Raises EmptyDocument when the document is whitespace-only.
    """
    config = config or SegmenterConfig()
    if config.backend == "external":
        return segment_via_external(document, language, config.external_command,
                                    doc_id=doc_id)

    text = unicodedata.normalize("NFC", document)
    if not text.strip():
        raise EmptyDocument("document is empty after trimming")

    rules = _rule_set(language, config.language_overrides)
    sentences: list[str] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    for line in text.split("\n"):
        for raw_start, raw_end in _split_line(line, pos, rules):
            trimmed = _trim_span(text, raw_start, raw_end)
            if trimmed is None:
                continue
            spans.append(trimmed)
            sentences.append(text[trimmed[0] : trimmed[1]])
        pos += len(line) + 1

    return SentenceList(doc_id=doc_id, language=language,
                        sentences=tuple(sentences), spans=tuple(spans), text=text)


def segment_via_external(document: str, language: str, command: str | None,
                         doc_id: str = "", timeout: float = 120.0) -> SentenceList:
    """Segment with an external tool: raw text in on stdin, one sentence per
    line out.  Lines are mapped back to spans by greedy left-to-right search;
    any line that cannot be located in the document is a contract violation.
    """
    if not command:
        raise InvalidInput("external segmenter requires a command template")
    text = unicodedata.normalize("NFC", document)
    if not text.strip():
        raise EmptyDocument("document is empty after trimming")

    argv = [part.replace("{language}", language) for part in shlex.split(command)]
    try:
        proc = subprocess.run(argv, input=text.encode("utf-8"),
                              capture_output=True, timeout=timeout)
    except OSError as exc:
        raise SegmenterBackendError(f"cannot run {argv[0]!r}: {exc}") from exc
    except subprocess.TimeoutExpired as exc:
        raise SegmenterBackendError(f"segmenter timed out after {timeout}s") from exc
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", "replace").strip()
        raise SegmenterBackendError(
            f"segmenter exited with {proc.returncode}: {stderr[:500]}")

    sentences: list[str] = []
    spans: list[tuple[int, int]] = []
    cursor = 0
    for lineno, raw_line in enumerate(proc.stdout.decode("utf-8", "replace").splitlines(), 1):
        line = unicodedata.normalize("NFC", raw_line).strip()
        if not line:
            continue
        idx = text.find(line, cursor)
        if idx < 0:
            raise SegmenterBackendError(
                f"output line {lineno} not found in document: {line[:80]!r}")
        sentences.append(line)
        spans.append((idx, idx + len(line)))
        cursor = idx + len(line)
    if not sentences:
        raise SegmenterBackendError("segmenter produced no sentences")

    return SentenceList(doc_id=doc_id, language=language,
                        sentences=tuple(sentences), spans=tuple(spans), text=text)
