"""Training-free composed image retrieval with modality-weighted score fusion."""

from .benchmark import (
    AttributeSpec,
    BenchmarkQuery,
    BenchmarkSuite,
    EvalReport,
    SweepReport,
    average_precision,
    build_queries,
    evaluate,
    lambda_sweep,
    load_benchmark_spec,
    load_suite,
    parse_benchmark_spec,
    save_suite,
)
from .fusion import (
    ComposedQuery,
    Method,
    MethodKind,
    NormalizedScores,
    average_baseline,
    normalize_scores,
    retrieve,
    std_normal_cdf,
    weicom_fuse,
)
from .similarity import RankedItem, ScoreVector, paired_similarities, similarities, top_k
from .store import (
    Corpus,
    EmbeddingMatrix,
    ImageRecord,
    TextTable,
    ingest,
    l2_normalize,
    load_corpus,
    read_wcem,
    save_corpus,
    write_wcem,
)
from .synthetic import SyntheticParams, generate_corpus, write_synthetic_corpus

__version__ = "0.1.0"

__all__ = [
    "AttributeSpec",
    "BenchmarkQuery",
    "BenchmarkSuite",
    "ComposedQuery",
    "Corpus",
    "EmbeddingMatrix",
    "EvalReport",
    "ImageRecord",
    "Method",
    "MethodKind",
    "NormalizedScores",
    "RankedItem",
    "ScoreVector",
    "SweepReport",
    "SyntheticParams",
    "TextTable",
    "average_baseline",
    "average_precision",
    "build_queries",
    "evaluate",
    "generate_corpus",
    "ingest",
    "l2_normalize",
    "lambda_sweep",
    "load_benchmark_spec",
    "load_corpus",
    "load_suite",
    "normalize_scores",
    "paired_similarities",
    "parse_benchmark_spec",
    "read_wcem",
    "retrieve",
    "save_corpus",
    "save_suite",
    "similarities",
    "std_normal_cdf",
    "top_k",
    "weicom_fuse",
    "write_wcem",
]
