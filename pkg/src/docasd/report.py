"""The per-run evaluation report: one self-describing JSON document.

Sections: config_echo, documents[], systems[], skipped[].  Reports are
replayable: re-reading the documents section and re-ranking reproduces the
systems section exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import DataError
from .ranking import SystemScore, rank_systems
from .slide_eval import ASDResult

REPORT_FORMAT = "docasd-report/1"


def document_entry(system: str, result: ASDResult) -> dict[str, Any]:
    return {
        "doc_id": result.doc_id,
        "system": system,
        "metric": result.metric.name,
        "final": result.final,
        "per_k": {
            str(k): {"mean": cs.mean, "unit_scores": list(cs.unit_scores)}
            for k, cs in sorted(result.per_k.items())
        },
        "placeholder_count": result.placeholder_count,
    }


def build_report(config_echo: dict[str, Any], documents: list[dict[str, Any]],
                 skipped: list[dict[str, Any]]) -> dict[str, Any]:
    """Assemble the report; system scores are per-system means of the
    per-document finals."""
    return {
        "format": REPORT_FORMAT,
        "config_echo": config_echo,
        "documents": documents,
        "systems": [
            {"system": s.system, "score": s.score, "rank": s.rank}
            for s in systems_from_documents(documents)
        ],
        "skipped": skipped,
    }


def systems_from_documents(documents: list[dict[str, Any]]) -> list[SystemScore]:
    per_system: dict[str, list[float]] = {}
    for doc in documents:
        per_system.setdefault(doc["system"], []).append(float(doc["final"]))
    if len(per_system) < 2:
        return [SystemScore(system=name, score=sum(vals) / len(vals), rank=1.0)
                for name, vals in per_system.items()]
    means = {name: sum(vals) / len(vals) for name, vals in per_system.items()}
    return rank_systems(means)


def write_report(report: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n",
                          encoding="utf-8")


def read_report(path: str | Path) -> dict[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != REPORT_FORMAT:
        raise DataError(f"{path} is not a {REPORT_FORMAT} report")
    return payload


def report_system_scores(report: dict[str, Any]) -> list[SystemScore]:
    return [SystemScore(system=row["system"], score=float(row["score"]),
                        rank=float(row["rank"]))
            for row in report.get("systems", [])]


def render_systems_tsv(systems: list[SystemScore]) -> str:
    lines = ["system\tscore\trank"]
    for s in sorted(systems, key=lambda x: (x.rank, x.system)):
        rank = int(s.rank) if float(s.rank).is_integer() else s.rank
        lines.append(f"{s.system}\t{s.score:.6f}\t{rank}")
    return "\n".join(lines) + "\n"
