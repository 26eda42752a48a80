"""Run configuration shared by the CLI, the service and the library API."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

from .errors import InvalidInput
from .scorer import MetricId
from .segmentation import SegmenterConfig

DP_MODES = ("strict", "relaxed")
JOINER_POLICIES = ("space", "none", "auto")

# Target languages written without inter-sentence spaces.
_NO_SPACE_LANGS = frozenset({"zh", "ja", "ko", "th", "yue"})


def resolve_joiner(policy: str, language: str) -> str:
    """Map a joiner policy to the literal string used between concatenated
    sentences of the given language."""
    if policy == "space":
        return " "
    if policy == "none":
        return ""
    if policy != "auto":
        raise InvalidInput(f"unknown joiner policy {policy!r}")
    primary = language.split("-")[0].split("_")[0].lower()
    return "" if primary in _NO_SPACE_LANGS else " "


@dataclass
class RunConfig:
    """Everything a pipeline run needs to be reproducible.

    Stage metrics are independent: ``metric_align`` scores sentence pairs
    for the path search, ``metric_eval`` scores the sliding chunks.
    """

    metric_align: MetricId = field(default_factory=lambda: MetricId("asd-align"))
    metric_eval: MetricId = field(default_factory=lambda: MetricId("lexical"))
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    dp_mode: str = "strict"
    allow_zero_step: bool = True
    ks: tuple[int, ...] = (1, 2, 3, 4)
    joiner: str = "auto"
    placeholder: str = ""
    sidecar_url: str | None = None
    batch_size: int = 64
    cache_dir: str | None = None
    workers: int = 1
    retry_attempts: int = 3
    retry_backoff: float = 1.0
    # test hook: injected httpx transport for the sidecar client
    sidecar_transport: Any = None

    def __post_init__(self):
        if isinstance(self.metric_align, str):
            self.metric_align = MetricId(self.metric_align)
        if isinstance(self.metric_eval, str):
            self.metric_eval = MetricId(self.metric_eval)
        if self.dp_mode not in DP_MODES:
            raise InvalidInput(f"dp mode must be one of {DP_MODES}, got {self.dp_mode!r}")
        if self.joiner not in JOINER_POLICIES:
            raise InvalidInput(f"joiner must be one of {JOINER_POLICIES}, got {self.joiner!r}")
        self.ks = tuple(sorted(set(int(k) for k in self.ks)))
        if not self.ks or not all(k in (1, 2, 3, 4) for k in self.ks):
            raise InvalidInput(f"ks must be a non-empty subset of {{1,2,3,4}}, got {self.ks}")
        if self.batch_size < 1:
            raise InvalidInput("batch size must be >= 1")
        if self.workers < 1:
            raise InvalidInput("workers must be >= 1")
        if self.retry_attempts < 1:
            raise InvalidInput("retry attempts must be >= 1")

    def with_overrides(self, **kwargs: Any) -> "RunConfig":
        """A copy with the given fields replaced (None values are ignored)."""
        changes = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **changes) if changes else self

    def echo(self) -> dict[str, Any]:
        """JSON-safe snapshot for report provenance."""
        return {
            "metric_align": self.metric_align.name,
            "metric_eval": self.metric_eval.name,
            "segmenter_backend": self.segmenter.backend,
            "dp_mode": self.dp_mode,
            "allow_zero_step": self.allow_zero_step,
            "ks": list(self.ks),
            "joiner": self.joiner,
            "placeholder": self.placeholder,
            "sidecar_url": self.sidecar_url,
            "batch_size": self.batch_size,
            "cache_dir": self.cache_dir,
            "workers": self.workers,
        }
