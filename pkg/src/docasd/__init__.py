"""Document-level MT evaluation: align a free-form translation to the
source sentence sequence, score sliding chunks at several granularities,
rank systems, and derive training signals from the scores."""

__version__ = "0.1.0"

from .alignment import (
    AlignedPair,
    AlignmentPath,
    ReconstructedEntry,
    align_document,
    brute_force_search,
    dp_search,
    reconstruct,
)
from .config import RunConfig
from .datapipe import (
    DocRecord,
    PreferenceTriplet,
    build_preference_pairs,
    read_corpus,
    reward,
    reward_batch,
    select_best,
)
from .ranking import (
    CorrelationReport,
    HumanRanking,
    SystemScore,
    correlate_rankings,
    kendall,
    pearson,
    rank_systems,
)
from .scorer import (
    MetricId,
    ScoreItem,
    SimilarityMatrix,
    build_matrix,
    lexical_similarity,
    score_batch,
)
from .segmentation import SegmenterConfig, SentenceList, segment, segment_via_external
from .slide_eval import ASDResult, ChunkScoreSet, ChunkUnit, asd_score, evaluate_k, make_units

__all__ = [
    "__version__",
    "AlignedPair",
    "AlignmentPath",
    "ASDResult",
    "ChunkScoreSet",
    "ChunkUnit",
    "CorrelationReport",
    "DocRecord",
    "HumanRanking",
    "MetricId",
    "PreferenceTriplet",
    "ReconstructedEntry",
    "RunConfig",
    "ScoreItem",
    "SegmenterConfig",
    "SentenceList",
    "SimilarityMatrix",
    "SystemScore",
    "align_document",
    "asd_score",
    "brute_force_search",
    "build_matrix",
    "build_preference_pairs",
    "correlate_rankings",
    "dp_search",
    "evaluate_k",
    "kendall",
    "lexical_similarity",
    "make_units",
    "pearson",
    "rank_systems",
    "read_corpus",
    "reconstruct",
    "reward",
    "reward_batch",
    "score_batch",
    "segment",
    "segment_via_external",
    "select_best",
]
