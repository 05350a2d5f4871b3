"""Raw similarity scoring and deterministic top-k selection.

The dot-product kernels accumulate in float64 over float32 rows with a
fixed left-to-right order inside each row; parallelism is across candidate
rows only.  This makes score vectors bitwise identical regardless of
thread count and of how the matrix is chunked into row blocks.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from typing import Iterable

import numba as nb
import numpy as np

from .errors import DimMismatch, LengthMismatch
from .store import Corpus

# One kernel launch at a time: queries are short (~10 ms at 30k x 768) and
# serializing launches keeps the shared OpenMP pool uncontended when many
# service requests arrive at once.
_KERNEL_LOCK = threading.Lock()


@nb.njit(
    "void(float32[:,::1], float64[::1], float64[::1])",
    parallel=True,
    fastmath=False,
    cache=True,
)
def _matvec_f64(matrix, query, out):  # pragma: no cover - exercised via wrapper
    m, k = matrix.shape
    for i in nb.prange(m):
        acc = 0.0
        for j in range(k):
            acc += matrix[i, j] * query[j]
        out[i] = acc


@nb.njit(
    "void(float32[:,::1], float64[::1], float64[::1], float64[::1], float64[::1])",
    parallel=True,
    fastmath=False,
    cache=True,
)
def _matvec2_f64(matrix, qa, qb, oa, ob):  # pragma: no cover - exercised via wrapper
    # Same per-row accumulation order as _matvec_f64 for each query, so the
    # fused pass is bitwise equal to two single passes while reading the
    # matrix only once.
    m, k = matrix.shape
    for i in nb.prange(m):
        acc_a = 0.0
        acc_b = 0.0
        for j in range(k):
            v = matrix[i, j]
            acc_a += v * qa[j]
            acc_b += v * qb[j]
        oa[i] = acc_a
        ob[i] = acc_b


@dataclass(frozen=True)
class ScoreVector:
    """Per-query scores against every corpus row, plus exclusions.

    ``excluded`` rows are never ranked and are left out of any statistics
    computed over the vector.
    """

    scores: np.ndarray
    excluded: frozenset[int] = frozenset()

    def __len__(self) -> int:
        return len(self.scores)

    def with_excluded(self, indices: Iterable[int]) -> "ScoreVector":
        excluded = frozenset(indices) | self.excluded
        for i in excluded:
            if not 0 <= i < len(self.scores):
                raise IndexError(f"excluded index {i} out of range")
        return replace(self, excluded=excluded)

    def eligible_indices(self) -> np.ndarray:
        if not self.excluded:
            return np.arange(len(self.scores))
        mask = np.ones(len(self.scores), dtype=bool)
        mask[list(self.excluded)] = False
        return np.flatnonzero(mask)


@dataclass(frozen=True)
class RankedItem:
    index: int
    image_id: str
    score: float


def _as_query(query: np.ndarray, corpus: Corpus) -> np.ndarray:
    q = np.ascontiguousarray(query, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != corpus.dim:
        raise DimMismatch(
            f"query dim {q.shape[0] if q.ndim == 1 else q.shape} "
            f"!= corpus dim {corpus.dim}"
        )
    return q


def similarities(query: np.ndarray, corpus: Corpus) -> ScoreVector:
    """Dot products of one unit query against every corpus image row."""
    q = _as_query(query, corpus)
    out = np.empty(corpus.count, dtype=np.float64)
    with _KERNEL_LOCK:
        _matvec_f64(corpus.images.data, q, out)
    return ScoreVector(scores=out)


def paired_similarities(
    image_query: np.ndarray, text_query: np.ndarray, corpus: Corpus
) -> tuple[ScoreVector, ScoreVector]:
    """Score both modalities in a single pass over the matrix.

    Bitwise identical to two :func:`similarities` calls.
    """
    qi = _as_query(image_query, corpus)
    qt = _as_query(text_query, corpus)
    sf = np.empty(corpus.count, dtype=np.float64)
    sg = np.empty(corpus.count, dtype=np.float64)
    with _KERNEL_LOCK:
        _matvec2_f64(corpus.images.data, qi, qt, sf, sg)
    return ScoreVector(scores=sf), ScoreVector(scores=sg)


def top_k(sv: ScoreVector, k: int, corpus: Corpus) -> list[RankedItem]:
    """Highest-scoring eligible rows, ties broken by ascending image id.

    Returns min(k, eligible) items.  Tie-break on ids (not row indices)
    keeps rankings stable under corpus re-ordering.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(sv.scores) != corpus.count:
        raise LengthMismatch(
            f"score vector length {len(sv.scores)} != corpus count {corpus.count}"
        )
    eligible = sv.eligible_indices()
    if eligible.size == 0:
        return []
    scores = sv.scores[eligible]
    k_eff = min(k, eligible.size)

    # Partition pre-selection keeps full-corpus sorts off the hot path; any
    # candidate tied with the k-th score is kept so id tie-breaks stay exact.
    if k_eff * 4 < eligible.size:
        part = np.argpartition(-scores, k_eff - 1)[:k_eff]
        threshold = scores[part].min()
        cand = np.flatnonzero(scores >= threshold)
    else:
        cand = np.arange(eligible.size)

    order = np.lexsort((corpus.id_rank[eligible[cand]], -scores[cand]))
    chosen = eligible[cand[order[:k_eff]]]
    return [
        RankedItem(index=int(i), image_id=corpus.ids[i], score=float(sv.scores[i]))
        for i in chosen
    ]
