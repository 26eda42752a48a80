"""Metric registry: lazy model loading with per-metric inference locks.

Each metric owns one model instance.  Loading is guarded against
concurrent double-load; inference requests for the same metric serialize
through its lock while different metrics run concurrently.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence


class ModelLoadError(RuntimeError):
    """The backend for a metric could not be constructed."""


class ScoringModel(Protocol):
    def score(self, items: Sequence[dict]) -> list[float]: ...


@dataclass
class MetricEntry:
    name: str
    loader: Callable[[], ScoringModel]
    reference_based: bool = False
    model: ScoringModel | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class MetricRegistry:
    def __init__(self):
        self._entries: dict[str, MetricEntry] = {}
        self._loading: set[str] = set()
        self._state_lock = threading.Lock()

    def register(self, name: str, loader: Callable[[], ScoringModel], *,
                 reference_based: bool = False) -> None:
        self._entries[name] = MetricEntry(name=name, loader=loader,
                                          reference_based=reference_based)

    def names(self) -> list[str]:
        return sorted(self._entries)

    def get(self, name: str) -> MetricEntry | None:
        return self._entries.get(name)

    def loaded_metrics(self) -> list[str]:
        return sorted(name for name, e in self._entries.items() if e.model is not None)

    def loading(self) -> bool:
        with self._state_lock:
            return bool(self._loading)

    def score(self, name: str, items: Sequence[dict]) -> list[float]:
        entry = self._entries[name]
        with entry.lock:  # one inference stream per model
            if entry.model is None:
                with self._state_lock:
                    self._loading.add(name)
                try:
                    entry.model = entry.loader()
                except Exception as exc:
                    raise ModelLoadError(f"cannot load model for {name!r}: {exc}") from exc
                finally:
                    with self._state_lock:
                        self._loading.discard(name)
            return entry.model.score(items)


class StubModel:
    """No-weights model: the deterministic bigram-cosine stand-in."""

    def score(self, items: Sequence[dict]) -> list[float]:
        from .lexical import stub_similarity

        return [stub_similarity(item["src"], item.get("mt", "")) for item in items]


def _load_labse() -> ScoringModel:
    try:
        from sentence_transformers import SentenceTransformer, util
    except ImportError as exc:
        raise ModelLoadError("sentence-transformers is not installed") from exc

    model = SentenceTransformer("sentence-transformers/LaBSE")
    model.eval()

    class LabseModel:
        def score(self, items: Sequence[dict]) -> list[float]:
            src = model.encode([item["src"] for item in items], convert_to_tensor=True)
            mt = model.encode([item.get("mt", "") for item in items],
                              convert_to_tensor=True)
            return [float(util.cos_sim(s, m)) for s, m in zip(src, mt)]

    return LabseModel()


def _load_comet(checkpoint: str) -> Callable[[], ScoringModel]:
    def load() -> ScoringModel:
        try:
            from comet import download_model, load_from_checkpoint
        except ImportError as exc:
            raise ModelLoadError("unbabel-comet is not installed") from exc

        model = load_from_checkpoint(download_model(checkpoint))
        model.eval()

        class CometModel:
            def score(self, items: Sequence[dict]) -> list[float]:
                data = [{"src": item["src"], "mt": item.get("mt", ""),
                         **({"ref": item["ref"]} if item.get("ref") is not None else {})}
                        for item in items]
                output = model.predict(data, progress_bar=False)
                return [float(s) for s in output.scores]

        return CometModel()

    return load


# Metrics the service advertises; (checkpoint, reference_based).
KNOWN_METRICS = {
    "wmt20-comet-da": ("Unbabel/wmt20-comet-da", True),
    "wmt22-comet-da": ("Unbabel/wmt22-comet-da", True),
    "wmt22-cometkiwi-da": ("Unbabel/wmt22-cometkiwi-da", False),
    "labse": (None, False),
}


def build_registry(mode: str) -> MetricRegistry:
    """Registry for ``real`` or ``stub`` mode.

    Stub mode backs every advertised metric with the no-weights stand-in,
    keeping the reference contracts identical to production.
    """
    registry = MetricRegistry()
    registry.register("stub-lexical", StubModel)
    for name, (checkpoint, reference_based) in KNOWN_METRICS.items():
        if mode == "stub":
            registry.register(name, StubModel, reference_based=reference_based)
        elif name == "labse":
            registry.register(name, _load_labse, reference_based=reference_based)
        else:
            registry.register(name, _load_comet(checkpoint),
                              reference_based=reference_based)
    return registry
