"""Scoring backends and the source-by-target similarity matrix.

One abstraction covers everything that turns (src, mt[, ref]) items into
scores: the deterministic local backends used in tests and offline runs
(``lexical``, ``constant:<c>``, ``oracle-matrix:<path>``) and the client
for the remote neural sidecar (``qe-remote:<model>``, ``ref-remote:<model>``).
Scores are raw metric values; nothing is clamped or rescaled.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
import time
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import httpx
import numpy as np

from .errors import DataError, InvalidInput, MetricContractError, ScorerUnavailable
from .segmentation import SentenceList

if TYPE_CHECKING:  # pragma: no cover
    from .config import RunConfig

log = logging.getLogger(__name__)

_METRIC_KINDS = ("lexical", "constant", "oracle-matrix", "qe-remote", "ref-remote",
                 "asd-align")

# Model the alignment-stage alias resolves to when a sidecar is configured.
DEFAULT_ALIGN_MODEL = "wmt22-cometkiwi-da"


@dataclass(frozen=True)
class MetricId:
    """Identifier of a scoring backend, e.g. ``lexical`` or
    ``qe-remote:wmt22-cometkiwi-da``.  All in-scope metrics are
    higher-is-better."""

    name: str

    def __post_init__(self):
        kind = self.kind
        if kind not in _METRIC_KINDS:
            raise InvalidInput(f"unknown metric {self.name!r}")
        if kind in ("qe-remote", "ref-remote", "oracle-matrix", "constant") and not self.arg:
            raise InvalidInput(f"metric {self.name!r} requires an argument after ':'")
        if kind == "constant":
            try:
                float(self.arg)
            except ValueError:
                raise InvalidInput(f"constant metric needs a number, got {self.arg!r}")

    @property
    def kind(self) -> str:
        return self.name.split(":", 1)[0]

    @property
    def arg(self) -> str:
        parts = self.name.split(":", 1)
        return parts[1] if len(parts) > 1 else ""

    @property
    def requires_reference(self) -> bool:
        return self.kind == "ref-remote"

    @property
    def is_remote(self) -> bool:
        return self.kind in ("qe-remote", "ref-remote")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ScoreItem:
    """One scoring request: source text, hypothesis (may be the empty
    placeholder), and a reference iff the metric is reference-based."""

    src: str
    mt: str = ""
    ref: str | None = None


@dataclass
class SimilarityMatrix:
    """The m-by-n grid of sentence-pair scores feeding the path search."""

    m: int
    n: int
    values: np.ndarray
    metric: MetricId
    src_digest: str
    tgt_digest: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.m < 1 or self.n < 1:
            raise InvalidInput("similarity matrix must be at least 1x1")
        if self.values.shape != (self.m, self.n):
            raise InvalidInput(
                f"matrix shape {self.values.shape} does not match ({self.m}, {self.n})")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInput("similarity matrix contains non-finite values")


def _bigram_counts(text: str) -> Counter:
    t = unicodedata.normalize("NFC", text).lower()
    return Counter(t[i : i + 2] for i in range(len(t) - 1))


def lexical_similarity(a: str, b: str) -> float:
    """Cosine similarity of character-bigram counts, in [0, 1].

    Deterministic stand-in for a learned similarity: symmetric, 1.0 for
    proportional bigram distributions, 0.0 when either side has no bigrams.
    """
    ca = _bigram_counts(a)
    cb = _bigram_counts(b)
    if not ca or not cb:
        return 0.0
    dot = sum(count * cb.get(gram, 0) for gram, count in ca.items())
    if dot == 0:
        return 0.0
    norm_sq = sum(v * v for v in ca.values()) * sum(v * v for v in cb.values())
    return min(1.0, dot / math.sqrt(norm_sq))


class LexicalScorer:
    requires_reference = False

    def score_items(self, items: Sequence[ScoreItem]) -> list[float]:
        return [lexical_similarity(item.src, item.mt) for item in items]


class ConstantScorer:
    """Returns a fixed score for every item; diagnostics and tests."""

    requires_reference = False

    def __init__(self, value: float):
        self.value = float(value)

    def score_items(self, items: Sequence[ScoreItem]) -> list[float]:
        return [self.value] * len(items)


class OracleMatrixScorer:
    """Replays a fixture grid: items are looked up by their exact
    (src, mt) texts, so results are independent of batching and order."""

    requires_reference = False

    def __init__(self, fixture_path: str | Path):
        try:
            payload = json.loads(Path(fixture_path).read_text(encoding="utf-8"))
            src_sentences = payload["src_sentences"]
            tgt_sentences = payload["tgt_sentences"]
            values = payload["values"]
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"cannot load oracle matrix {fixture_path}: {exc}") from exc
        if len(values) != len(src_sentences) or any(
                len(row) != len(tgt_sentences) for row in values):
            raise DataError(f"oracle matrix {fixture_path} has inconsistent shape")
        self.path = str(fixture_path)
        self._src_index = {s: i for i, s in enumerate(src_sentences)}
        self._tgt_index = {t: j for j, t in enumerate(tgt_sentences)}
        self._values = values

    def score_items(self, items: Sequence[ScoreItem]) -> list[float]:
        scores = []
        for item in items:
            i = self._src_index.get(item.src)
            j = self._tgt_index.get(item.mt)
            if i is None or j is None:
                raise MetricContractError(
                    f"pair not covered by oracle matrix {self.path}: "
                    f"({item.src[:40]!r}, {item.mt[:40]!r})")
            scores.append(float(self._values[i][j]))
        return scores


class RemoteScorer:
    """Client for the scoring sidecar: batches requests, retries with
    exponential backoff, and preserves item order."""

    def __init__(self, base_url: str, model: str, *, reference_based: bool,
                 batch_size: int = 64, retry_attempts: int = 3,
                 retry_backoff: float = 1.0, timeout: float = 120.0,
                 transport: httpx.BaseTransport | None = None):
        if batch_size < 1:
            raise InvalidInput("batch size must be >= 1")
        self.model = model
        self.requires_reference = reference_based
        self.batch_size = batch_size
        self.retry_attempts = max(1, retry_attempts)
        self.retry_backoff = retry_backoff
        self._client = httpx.Client(base_url=base_url.rstrip("/"),
                                    timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def score_items(self, items: Sequence[ScoreItem]) -> list[float]:
        scores: list[float] = []
        for lo in range(0, len(items), self.batch_size):
            scores.extend(self._score_one_batch(items[lo : lo + self.batch_size]))
        return scores

    def _score_one_batch(self, items: Sequence[ScoreItem]) -> list[float]:
        payload = {
            "metric": self.model,
            "items": [
                {"src": it.src, "mt": it.mt, **({"ref": it.ref} if it.ref is not None else {})}
                for it in items
            ],
        }
        last_error: Exception | None = None
        for attempt in range(self.retry_attempts):
            if attempt:
                time.sleep(self.retry_backoff * 2 ** (attempt - 1))
            try:
                response = self._client.post("/v1/score", json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                log.warning("sidecar request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if response.status_code >= 500:
                last_error = ScorerUnavailable(
                    f"sidecar returned {response.status_code}: {response.text[:200]}")
                log.warning("sidecar 5xx (attempt %d): %s", attempt + 1, response.status_code)
                continue
            if response.status_code >= 400:
                raise MetricContractError(
                    f"sidecar rejected request ({response.status_code}): {response.text[:500]}")
            scores = response.json().get("scores")
            if not isinstance(scores, list) or len(scores) != len(items):
                raise MetricContractError(
                    f"sidecar returned {len(scores) if isinstance(scores, list) else 'no'} "
                    f"scores for {len(items)} items")
            result = [float(s) for s in scores]
            if not all(math.isfinite(s) for s in result):
                raise MetricContractError("sidecar returned non-finite scores")
            return result
        raise ScorerUnavailable(
            f"sidecar unreachable after {self.retry_attempts} attempts: {last_error}")


def get_scorer(metric: MetricId, config: "RunConfig | None" = None):
    """Resolve a MetricId to a backend instance.

    ``asd-align`` names the alignment-stage scorer: the remote QE model when
    a sidecar is configured, the local lexical scorer otherwise.
    """
    if config is None:
        from .config import RunConfig
        config = RunConfig()
    kind = metric.kind
    if kind == "asd-align":
        if config.sidecar_url:
            metric = MetricId(f"qe-remote:{DEFAULT_ALIGN_MODEL}")
            kind = "qe-remote"
        else:
            return LexicalScorer()
    if kind == "lexical":
        return LexicalScorer()
    if kind == "constant":
        return ConstantScorer(float(metric.arg))
    if kind == "oracle-matrix":
        return OracleMatrixScorer(metric.arg)
    if not config.sidecar_url:
        raise ScorerUnavailable(
            f"metric {metric.name!r} needs a sidecar; none configured (--sidecar-url)")
    return RemoteScorer(config.sidecar_url, metric.arg,
                        reference_based=metric.requires_reference,
                        batch_size=config.batch_size,
                        retry_attempts=config.retry_attempts,
                        retry_backoff=config.retry_backoff,
                        transport=config.sidecar_transport)


def _validate_items(items: Sequence[ScoreItem], metric: MetricId) -> None:
    for pos, item in enumerate(items):
        if not item.src:
            raise MetricContractError(f"item {pos}: empty source text")
        if metric.requires_reference and item.ref is None:
            raise MetricContractError(
                f"item {pos}: metric {metric.name!r} requires a reference")
        if not metric.requires_reference and item.ref is not None:
            raise MetricContractError(
                f"item {pos}: reference passed to reference-free metric {metric.name!r}")


def score_batch(items: Sequence[ScoreItem], metric: MetricId,
                config: "RunConfig | None" = None) -> list[float]:
    """Score items in order; results are independent of how the caller
    partitions the sequence."""
    items = list(items)
    _validate_items(items, metric)
    scorer = get_scorer(metric, config)
    try:
        scores = scorer.score_items(items)
    finally:
        close = getattr(scorer, "close", None)
        if close is not None:
            close()
    if len(scores) != len(items):
        raise MetricContractError("scorer returned wrong number of scores")
    return scores


def digest_sentences(sentences: SentenceList) -> str:
    h = hashlib.sha256()
    h.update(sentences.language.encode("utf-8"))
    for sent in sentences.sentences:
        h.update(b"\x1f")
        h.update(sent.encode("utf-8"))
    return h.hexdigest()


def _cache_path(cache_dir: str, src_digest: str, tgt_digest: str, metric: MetricId) -> Path:
    key = hashlib.sha256(
        f"{src_digest}\x1f{tgt_digest}\x1f{metric.name}".encode("utf-8")).hexdigest()
    return Path(cache_dir) / f"matrix-{key[:32]}.json"


def _load_cached_matrix(path: Path, src_digest: str, tgt_digest: str,
                        metric: MetricId) -> SimilarityMatrix | None:
    if not path.exists():
        return None
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        if (payload["format"] != "docasd-matrix/1"
                or payload["src_digest"] != src_digest
                or payload["tgt_digest"] != tgt_digest
                or payload["metric"] != metric.name):
            return None
        return SimilarityMatrix(m=payload["m"], n=payload["n"],
                                values=np.array(payload["values"], dtype=np.float64),
                                metric=metric, src_digest=src_digest,
                                tgt_digest=tgt_digest)
    except (OSError, ValueError, KeyError, TypeError, InvalidInput) as exc:
        log.warning("discarding corrupt matrix cache %s: %s", path, exc)
        return None


def _store_cached_matrix(path: Path, matrix: SimilarityMatrix) -> None:
    payload = {
        "format": "docasd-matrix/1",
        "m": matrix.m,
        "n": matrix.n,
        "metric": matrix.metric.name,
        "src_digest": matrix.src_digest,
        "tgt_digest": matrix.tgt_digest,
        "values": matrix.values.tolist(),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
        os.replace(tmp, path)  # atomic per key, last writer wins
    except OSError as exc:
        log.warning("cannot write matrix cache %s: %s", path, exc)
        try:
            os.unlink(tmp)
        except OSError:
            pass


def build_matrix(src: SentenceList, tgt: SentenceList, metric: MetricId,
                 config: "RunConfig | None" = None) -> SimilarityMatrix:
    """Score every (source sentence, target sentence) pair.

    The grid is cached on disk keyed by content digests and metric, so
    re-evaluating the same document pair is free.  Remote metrics are
    batched; the alignment stage is reference-free by construction.
    """
    if config is None:
        from .config import RunConfig
        config = RunConfig()
    if metric.requires_reference:
        raise MetricContractError(
            f"alignment scoring is reference-free; {metric.name!r} is reference-based")
    m, n = len(src), len(tgt)
    if m < 1 or n < 1:
        raise InvalidInput("cannot build a similarity matrix for empty sentence lists")

    src_digest = digest_sentences(src)
    tgt_digest = digest_sentences(tgt)
    cache_file = None
    if config.cache_dir:
        cache_file = _cache_path(config.cache_dir, src_digest, tgt_digest, metric)
        cached = _load_cached_matrix(cache_file, src_digest, tgt_digest, metric)
        if cached is not None:
            return cached

    items = [ScoreItem(src=s, mt=t) for s in src.sentences for t in tgt.sentences]
    scores = score_batch(items, metric, config)
    values = np.asarray(scores, dtype=np.float64).reshape(m, n)
    matrix = SimilarityMatrix(m=m, n=n, values=values, metric=metric,
                              src_digest=src_digest, tgt_digest=tgt_digest)
    if cache_file is not None:
        _store_cached_matrix(cache_file, matrix)
    return matrix
