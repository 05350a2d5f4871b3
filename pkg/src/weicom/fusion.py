"""Score calibration and the weighted composed-retrieval pipeline.

Raw similarity distributions differ sharply between modalities: image-to-
image scores run much higher than text-to-image scores, so naive averaging
is dominated by the image query.  Calibration standardizes each score
vector with its own mean and (population) standard deviation and maps the
result through the standard normal CDF, giving per-modality scores in
(0, 1) that are approximately uniform.  A convex combination with weight
``lam`` on the text side then blends the two: 0 is image-only, 1 is
text-only, 0.5 weighs both equally.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import (
    LambdaOutOfRange,
    LengthMismatch,
    TooFewCandidates,
)
from .similarity import (
    RankedItem,
    ScoreVector,
    paired_similarities,
    similarities,
    top_k,
)
from .store import Corpus

_SQRT2 = math.sqrt(2.0)

# Beyond |z| = 8 the CDF is numerically indistinguishable from its limits
# at float64 and contributes nothing to ranking.
Z_CLAMP = 8.0
SIGMA_FLOOR = 1e-12


class MethodKind(str, enum.Enum):
    TEXT_ONLY = "text_only"
    IMAGE_ONLY = "image_only"
    AVERAGE = "average"
    WEICOM = "weicom"


@dataclass(frozen=True)
class Method:
    """A retrieval method; ``lam`` is meaningful only for WEICOM."""

    kind: MethodKind
    lam: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise LambdaOutOfRange(f"lambda must be in [0, 1], got {self.lam}")

    @staticmethod
    def text_only() -> "Method":
        return Method(MethodKind.TEXT_ONLY)

    @staticmethod
    def image_only() -> "Method":
        return Method(MethodKind.IMAGE_ONLY)

    @staticmethod
    def average() -> "Method":
        return Method(MethodKind.AVERAGE)

    @staticmethod
    def weicom(lam: float) -> "Method":
        return Method(MethodKind.WEICOM, lam)

    @staticmethod
    def parse(name: str, lam: float = 0.5) -> "Method":
        try:
            kind = MethodKind(name.lower())
        except ValueError:
            raise ValueError(
                f"unknown method {name!r}; expected one of "
                f"{[m.value for m in MethodKind]}"
            ) from None
        return Method(kind, lam)

    @property
    def needs_image(self) -> bool:
        return self.kind is not MethodKind.TEXT_ONLY

    @property
    def needs_text(self) -> bool:
        return self.kind is not MethodKind.IMAGE_ONLY

    def label(self) -> str:
        if self.kind is MethodKind.WEICOM:
            return f"weicom(lambda={self.lam:g})"
        return self.kind.value


@dataclass(frozen=True)
class ComposedQuery:
    """An image/text query pair.

    Either embedding may be omitted when the method does not need it.
    ``query_image_id`` is set when the query image is a corpus member and
    enables excluding it from its own ranking.
    """

    image_embedding: np.ndarray | None = None
    text_embedding: np.ndarray | None = None
    query_image_id: str | None = None


@dataclass(frozen=True)
class NormalizedScores:
    """Calibrated scores in [0, 1]; excluded rows are emitted as 0."""

    scores: np.ndarray
    excluded: frozenset[int] = frozenset()

    def __len__(self) -> int:
        return len(self.scores)


def std_normal_cdf(z):
    """Standard normal CDF via the complementary error function.

    Accepts a scalar or an array; inputs are clamped to [-8, 8] before
    evaluation.  Satisfies cdf(z) + cdf(-z) == 1 to within 1e-12.
    """
    z_arr = np.clip(np.asarray(z, dtype=np.float64), -Z_CLAMP, Z_CLAMP)
    out = 0.5 * erfc(-z_arr / _SQRT2)
    if np.isscalar(z) or np.ndim(z) == 0:
        return float(out)
    return out


def normalize_scores(sv: ScoreVector) -> NormalizedScores:
    """Standardize eligible scores and map them through the normal CDF.

    Mean and population standard deviation (divide by N) are computed over
    the eligible entries only.  A constant vector (sigma below 1e-12)
    carries no ranking information and collapses to 0.5 everywhere.
    """
    eligible = sv.eligible_indices()
    if eligible.size < 2:
        raise TooFewCandidates(
            f"normalization needs >= 2 eligible candidates, got {eligible.size}"
        )
    values = sv.scores[eligible]
    mu = float(values.mean())
    sigma = float(values.std())
    out = np.zeros(len(sv.scores), dtype=np.float64)
    if sigma < SIGMA_FLOOR:
        out[eligible] = 0.5
    else:
        out[eligible] = std_normal_cdf((values - mu) / sigma)
    return NormalizedScores(scores=out, excluded=sv.excluded)


def _check_aligned(a, b) -> None:
    if len(a.scores) != len(b.scores):
        raise LengthMismatch(
            f"score vectors have lengths {len(a.scores)} and {len(b.scores)}"
        )
    if a.excluded != b.excluded:
        raise LengthMismatch("score vectors carry different exclusion sets")


def average_baseline(sg: ScoreVector, sf: ScoreVector) -> ScoreVector:
    """Unweighted mean of raw text and image scores.

    Equivalent to scoring the averaged feature (g + f) / 2 once, by
    linearity of the dot product.
    """
    _check_aligned(sg, sf)
    return ScoreVector(
        scores=(sg.scores + sf.scores) / 2.0,
        excluded=sg.excluded,
    )


def weicom_fuse(
    sg_norm: NormalizedScores, sf_norm: NormalizedScores, lam: float
) -> ScoreVector:
    """Convex combination lam * text + (1 - lam) * image of calibrated scores."""
    if not 0.0 <= lam <= 1.0:
        raise LambdaOutOfRange(f"lambda must be in [0, 1], got {lam}")
    _check_aligned(sg_norm, sf_norm)
    fused = lam * sg_norm.scores + (1.0 - lam) * sf_norm.scores
    return ScoreVector(scores=fused, excluded=sg_norm.excluded)


def retrieve(
    query: ComposedQuery,
    corpus: Corpus,
    method: Method,
    k: int,
    exclude_query_image: bool = True,
) -> list[RankedItem]:
    """Full pipeline: similarities, optional calibration, fusion, top-k.

    All methods share the same exclusion and tie-break semantics.  When the
    query image is excluded, that happens before normalization statistics
    are computed.
    """
    if method.needs_image and query.image_embedding is None:
        raise ValueError(f"method {method.label()} requires an image embedding")
    if method.needs_text and query.text_embedding is None:
        raise ValueError(f"method {method.label()} requires a text embedding")

    excluded: frozenset[int] = frozenset()
    if exclude_query_image and query.query_image_id is not None:
        excluded = frozenset({corpus.row_index(query.query_image_id)})

    sf = sg = None
    if method.needs_image and method.needs_text:
        sf, sg = paired_similarities(
            query.image_embedding, query.text_embedding, corpus
        )
    elif method.needs_image:
        sf = similarities(query.image_embedding, corpus)
    else:
        sg = similarities(query.text_embedding, corpus)
    if sf is not None and excluded:
        sf = sf.with_excluded(excluded)
    if sg is not None and excluded:
        sg = sg.with_excluded(excluded)

    if method.kind is MethodKind.IMAGE_ONLY:
        final = sf
    elif method.kind is MethodKind.TEXT_ONLY:
        final = sg
    elif method.kind is MethodKind.AVERAGE:
        final = average_baseline(sg, sf)
    else:
        final = weicom_fuse(normalize_scores(sg), normalize_scores(sf), method.lam)
    return top_k(final, k, corpus)
