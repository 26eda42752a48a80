"""Corpus processing and training-signal generation.

Reads line-delimited JSON corpora, evaluates every candidate translation,
and derives the three training signals: best-of selection, preference
triplets, and scalar rewards.  Corpus runs skip-and-log failing records
instead of aborting; reward calls never raise (RL rollouts must survive
bad hypotheses).
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .alignment import align_document
from .config import RunConfig
from .errors import DataError, DocasdError, InvalidInput, RecordSkipped
from .scorer import MetricId
from .slide_eval import ASDResult, asd_score

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DocRecord:
    """One corpus document: a source, one or more candidate translations,
    and optionally a reference."""

    doc_id: str
    src: str
    candidates: dict[str, str]
    src_lang: str
    tgt_lang: str
    ref: str | None = None

    def __post_init__(self):
        if not self.candidates:
            raise InvalidInput(f"record {self.doc_id!r} has no candidates")


@dataclass(frozen=True)
class PreferenceTriplet:
    """A preference pair: the higher-scoring translation is chosen."""

    src: str
    chosen: str
    rejected: str
    score_chosen: float
    score_rejected: float
    margin: float


def parse_record(obj: dict[str, Any]) -> DocRecord:
    try:
        doc_id = str(obj["doc_id"])
        src = obj["src"]
        src_lang = obj["src_lang"]
        tgt_lang = obj["tgt_lang"]
    except KeyError as exc:
        raise DataError(f"record missing field {exc}") from exc
    if "candidates" in obj:
        candidates = {str(k): str(v) for k, v in obj["candidates"].items()}
    elif "tgt" in obj:
        candidates = {str(obj.get("system", "system")): str(obj["tgt"])}
    else:
        raise DataError(f"record {doc_id!r} needs 'tgt' or 'candidates'")
    return DocRecord(doc_id=doc_id, src=str(src), candidates=candidates,
                     src_lang=str(src_lang), tgt_lang=str(tgt_lang),
                     ref=str(obj["ref"]) if obj.get("ref") is not None else None)


def read_corpus(path: str | Path) -> list[DocRecord]:
    """Parse a JSONL corpus; reports every offending line number at once."""
    records: list[DocRecord] = []
    errors: list[str] = []
    seen_ids: set[str] = set()
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            record = parse_record(json.loads(line))
        except (ValueError, DataError, InvalidInput) as exc:
            errors.append(f"line {lineno}: {exc}")
            continue
        if record.doc_id in seen_ids:
            errors.append(f"line {lineno}: duplicate doc_id {record.doc_id!r}")
            continue
        seen_ids.add(record.doc_id)
        records.append(record)
    if errors:
        raise DataError(f"corpus {path} has {len(errors)} bad line(s): "
                        + "; ".join(errors[:20]))
    if not records:
        raise DataError(f"corpus {path} is empty")
    return records


def score_candidate(record: DocRecord, candidate: str, metric: MetricId,
                    config: RunConfig) -> ASDResult:
    # the reference is aligned only when the evaluation metric will use it
    ref_doc = record.ref if metric.requires_reference else None
    pair = align_document(record.src, candidate, record.src_lang, record.tgt_lang,
                          config, ref_doc=ref_doc, doc_id=record.doc_id)
    return asd_score(pair, metric, ks=config.ks, config=config)


def select_best(record: DocRecord, metric: MetricId,
                config: RunConfig | None = None) -> tuple[str, ASDResult]:
    """Evaluate every candidate and return the argmax by final score.

    Ties keep the earlier candidate (insertion order).  Raises
    RecordSkipped only when every candidate fails.
    """
    config = config or RunConfig()
    best: tuple[str, ASDResult] | None = None
    failures: list[str] = []
    for system, text in record.candidates.items():
        try:
            result = score_candidate(record, text, metric, config)
        except DocasdError as exc:
            failures.append(f"{system}: {exc}")
            log.warning("candidate %s of %s failed: %s", system, record.doc_id, exc)
            continue
        if best is None or result.final > best[1].final:
            best = (system, result)
    if best is None:
        raise RecordSkipped(record.doc_id, "all candidates failed: " + "; ".join(failures))
    return best


def build_preference_pairs(record: DocRecord, a: str, b: str, metric: MetricId,
                           margin: float = 0.0,
                           config: RunConfig | None = None) -> PreferenceTriplet | None:
    """Score candidates a and b; emit a triplet iff the score gap exceeds
    the margin, chosen being the higher one.  Returns None for near-ties."""
    if margin < 0:
        raise InvalidInput("margin must be >= 0")
    config = config or RunConfig()
    for name in (a, b):
        if name not in record.candidates:
            raise InvalidInput(f"record {record.doc_id!r} has no candidate {name!r}")
    try:
        result_a = score_candidate(record, record.candidates[a], metric, config)
        result_b = score_candidate(record, record.candidates[b], metric, config)
    except DocasdError as exc:
        raise RecordSkipped(record.doc_id, str(exc)) from exc
    gap = abs(result_a.final - result_b.final)
    if gap <= margin:
        return None
    if result_a.final > result_b.final:
        chosen, rejected = a, b
        score_chosen, score_rejected = result_a.final, result_b.final
    else:
        chosen, rejected = b, a
        score_chosen, score_rejected = result_b.final, result_a.final
    return PreferenceTriplet(src=record.src,
                             chosen=record.candidates[chosen],
                             rejected=record.candidates[rejected],
                             score_chosen=score_chosen,
                             score_rejected=score_rejected,
                             margin=gap)


def reward(src_doc: str, hyp_doc: str, metric: MetricId,
           config: RunConfig | None = None, *, src_lang: str = "en",
           tgt_lang: str = "en", failure_reward: float = 0.0) -> float:
    """Scalar reward for one hypothesis: align, slide, average.

    Failures (unsegmentable hypothesis, scorer trouble) return the sentinel
    ``failure_reward`` with a logged diagnostic instead of raising, so RL
    loops never die mid-rollout.
    """
    if metric.requires_reference:
        raise InvalidInput("reward requires a reference-free metric")
    config = config or RunConfig()
    try:
        pair = align_document(src_doc, hyp_doc, src_lang, tgt_lang, config)
        return asd_score(pair, metric, ks=config.ks, config=config).final
    except Exception as exc:  # noqa: BLE001 - sentinel by contract
        log.warning("reward failed (%s); returning sentinel %s", exc, failure_reward)
        return failure_reward


def reward_batch(src_doc: str, hyp_docs: Iterable[str], metric: MetricId,
                 config: RunConfig | None = None, *, src_lang: str = "en",
                 tgt_lang: str = "en", failure_reward: float = 0.0) -> list[float]:
    """Rewards for several sampled hypotheses of one source document."""
    return [reward(src_doc, hyp, metric, config, src_lang=src_lang,
                   tgt_lang=tgt_lang, failure_reward=failure_reward)
            for hyp in hyp_docs]


def evaluate_corpus(records: list[DocRecord], metric: MetricId,
                    config: RunConfig | None = None
                    ) -> tuple[list[tuple[str, str, ASDResult]], list[dict[str, str]]]:
    """Evaluate every (record, candidate) pair.

    Records are processed by a bounded worker pool; output is ordered by
    (doc_id, system) regardless of scheduling.  Failures are collected as
    skip entries, not raised.
    """
    config = config or RunConfig()

    def run_one(record: DocRecord) -> tuple[list[tuple[str, str, ASDResult]],
                                            list[dict[str, str]]]:
        results, skipped = [], []
        for system, text in record.candidates.items():
            try:
                results.append((record.doc_id, system,
                                score_candidate(record, text, metric, config)))
            except DocasdError as exc:
                skipped.append({"doc_id": record.doc_id, "system": system,
                                "reason": str(exc)})
        return results, skipped

    all_results: list[tuple[str, str, ASDResult]] = []
    all_skipped: list[dict[str, str]] = []
    if config.workers == 1:
        outcomes = [run_one(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(run_one, records))
    for results, skipped in outcomes:
        all_results.extend(results)
        all_skipped.extend(skipped)
    all_results.sort(key=lambda item: (item[0], item[1]))
    all_skipped.sort(key=lambda item: (item["doc_id"], item.get("system", "")))
    return all_results, all_skipped


def write_preference_file(triplets: Iterable[PreferenceTriplet], path: str | Path) -> None:
    """Line-delimited JSON: {src, chosen, rejected, score_chosen, score_rejected}."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for t in triplets:
            fh.write(json.dumps({
                "src": t.src,
                "chosen": t.chosen,
                "rejected": t.rejected,
                "score_chosen": t.score_chosen,
                "score_rejected": t.score_rejected,
            }, ensure_ascii=False) + "\n")
