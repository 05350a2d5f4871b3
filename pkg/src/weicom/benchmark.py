"""Attribute-modification benchmark construction and mAP evaluation.

A benchmark query takes an annotated image (class c, attribute value
v_src) and asks for images of the same class carrying a different target
value v_tgt.  Every image of class c annotated with any other value of the
attribute becomes one query per alternative target value, and the positive
set is exactly the images of class c annotated with v_tgt.  With per-class
value counts n_v this yields sum(n_w for w != v) queries targeting v, and
n_v positives for each of them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import AbstractSet, Iterable, Mapping, Sequence

from .errors import (
    EmptyValueGroup,
    FormatError,
    NoPositives,
    SingleValueAttribute,
    UnknownText,
)
from .fusion import ComposedQuery, Method, retrieve
from .runtime import apply_thread_cap
from .store import Corpus


@dataclass(frozen=True)
class AttributeSpec:
    """One attribute with, per class, the value vocabulary to modify over."""

    attribute: str
    entries: tuple[tuple[str, tuple[str, ...]], ...]


@dataclass(frozen=True)
class BenchmarkQuery:
    query_image_id: str
    query_text: str
    attribute: str
    class_name: str
    positives: frozenset[str]


@dataclass(frozen=True)
class BenchmarkSuite:
    queries: tuple[BenchmarkQuery, ...]
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.queries)

    def attributes(self) -> list[str]:
        return sorted({q.attribute for q in self.queries})


def parse_benchmark_spec(doc: dict) -> list[AttributeSpec]:
    """Parse the benchmark spec JSON document into attribute specs.

    Expected shape:
    {"attributes": [{"attribute": str,
                     "classes": [{"class": str, "values": [str, ...]}, ...]},
                    ...]}
    """
    if not isinstance(doc, dict) or not isinstance(doc.get("attributes"), list):
        raise FormatError("benchmark spec must be an object with an 'attributes' list")
    specs = []
    for a_idx, attr_obj in enumerate(doc["attributes"]):
        if not isinstance(attr_obj, dict):
            raise FormatError(f"attributes[{a_idx}] must be an object")
        name = attr_obj.get("attribute")
        if not isinstance(name, str) or not name:
            raise FormatError(f"attributes[{a_idx}].attribute must be a non-empty string")
        classes = attr_obj.get("classes")
        if not isinstance(classes, list) or not classes:
            raise FormatError(f"attributes[{a_idx}].classes must be a non-empty list")
        entries = []
        for c_idx, cls_obj in enumerate(classes):
            if not isinstance(cls_obj, dict):
                raise FormatError(f"attributes[{a_idx}].classes[{c_idx}] must be an object")
            cls = cls_obj.get("class")
            values = cls_obj.get("values")
            if not isinstance(cls, str) or not cls:
                raise FormatError(
                    f"attributes[{a_idx}].classes[{c_idx}].class must be a non-empty string"
                )
            if not isinstance(values, list) or not all(
                isinstance(v, str) and v for v in values
            ):
                raise FormatError(
                    f"attributes[{a_idx}].classes[{c_idx}].values must be a list of "
                    "non-empty strings"
                )
            lowered = []
            for v in values:
                lv = v.lower()
                if lv not in lowered:
                    lowered.append(lv)
            if len(lowered) < 2:
                raise SingleValueAttribute(
                    f"attribute {name!r} class {cls!r} needs >= 2 values, "
                    f"got {lowered}"
                )
            entries.append((cls.lower(), tuple(lowered)))
        specs.append(AttributeSpec(attribute=name.lower(), entries=tuple(entries)))
    return specs


def load_benchmark_spec(path: str | Path) -> list[AttributeSpec]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    return parse_benchmark_spec(doc)


def build_queries(corpus: Corpus, specs: Sequence[AttributeSpec]) -> BenchmarkSuite:
    """Expand attribute specs into composed queries with ground truth.

    Every image of a declared class annotated with one declared value
    becomes a query against each of the other declared values.  Images of
    the class missing the attribute never become queries but remain in the
    corpus as ranking distractors.
    """
    # (class, attribute, value) -> ids in corpus row order
    members: dict[tuple[str, str, str], list[str]] = {}
    for rec in corpus.records:
        for attr, value in rec.attributes.items():
            members.setdefault((rec.class_name, attr, value), []).append(rec.id)

    queries: list[BenchmarkQuery] = []
    dropped = 0
    for spec in specs:
        for class_name, values in spec.entries:
            for value in values:
                if not members.get((class_name, spec.attribute, value)):
                    raise EmptyValueGroup(
                        f"no image of class {class_name!r} has "
                        f"{spec.attribute}={value!r}"
                    )
            for v_src in values:
                for v_tgt in values:
                    if v_tgt == v_src:
                        continue
                    positives = frozenset(
                        members[(class_name, spec.attribute, v_tgt)]
                    )
                    if not positives:
                        dropped += len(members[(class_name, spec.attribute, v_src)])
                        continue
                    for image_id in members[(class_name, spec.attribute, v_src)]:
                        queries.append(
                            BenchmarkQuery(
                                query_image_id=image_id,
                                query_text=v_tgt,
                                attribute=spec.attribute,
                                class_name=class_name,
                                positives=positives,
                            )
                        )
    return BenchmarkSuite(queries=tuple(queries), dropped=dropped)


def save_suite(path: str | Path, suite: BenchmarkSuite) -> None:
    """Write a suite as JSON Lines, one query per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for q in suite.queries:
            fh.write(
                json.dumps(
                    {
                        "query_image_id": q.query_image_id,
                        "query_text": q.query_text,
                        "attribute": q.attribute,
                        "class": q.class_name,
                        "positives": sorted(q.positives),
                    },
                    sort_keys=True,
                    separators=(",", ":"),
                )
                + "\n"
            )


def load_suite(path: str | Path) -> BenchmarkSuite:
    queries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            queries.append(
                BenchmarkQuery(
                    query_image_id=obj["query_image_id"],
                    query_text=obj["query_text"],
                    attribute=obj["attribute"],
                    class_name=obj["class"],
                    positives=frozenset(obj["positives"]),
                )
            )
    return BenchmarkSuite(queries=tuple(queries))


def average_precision(
    ranked_ids: Iterable[str], positives: AbstractSet[str]
) -> float:
    """Mean of precision values at each rank where a positive is found.

    Positives absent from the ranking contribute zero, so the result is in
    [0, 1] with 1 exactly when all positives occupy the top ranks.
    """
    if not positives:
        raise NoPositives("average precision is undefined for an empty positive set")
    hits = 0
    total = 0.0
    for rank, image_id in enumerate(ranked_ids, start=1):
        if image_id in positives:
            hits += 1
            total += hits / rank
    return total / len(positives)


@dataclass(frozen=True)
class EvalReport:
    """Per-attribute and average mAP for one method over one suite.

    ``average_map`` is the unweighted mean of the per-attribute mAPs,
    not the query-weighted mean; attributes with very different query
    counts contribute equally.
    """

    method: Method
    per_attribute: Mapping[str, float]
    query_counts: Mapping[str, int]
    average_map: float
    query_count: int
    dropped: int = 0
    exclude_query_image: bool = True


@dataclass(frozen=True)
class SweepReport:
    lambda_grid: tuple[float, ...]
    per_attribute: Mapping[str, tuple[float, ...]]
    average_row: tuple[float, ...]
    best_lambda: float
    query_count: int
    dropped: int = 0
    exclude_query_image: bool = True


def _check_texts(corpus: Corpus, suite: BenchmarkSuite) -> None:
    missing: dict[str, list[str]] = {}
    for q in suite.queries:
        if q.query_text not in corpus.texts:
            missing.setdefault(q.query_text, []).append(q.query_image_id)
    if missing:
        parts = [
            f"{text!r} ({len(ids)} queries, e.g. {ids[0]})"
            for text, ids in sorted(missing.items())
        ]
        raise UnknownText(
            "query texts missing from the corpus text table: " + "; ".join(parts)
        )


def _query_ap(corpus: Corpus, q: BenchmarkQuery, method: Method) -> float:
    composed = ComposedQuery(
        image_embedding=corpus.image_embedding(q.query_image_id),
        text_embedding=corpus.text_embedding(q.query_text),
        query_image_id=q.query_image_id,
    )
    ranked = retrieve(
        composed, corpus, method, k=corpus.count, exclude_query_image=True
    )
    return average_precision((item.image_id for item in ranked), q.positives)


def evaluate(corpus: Corpus, suite: BenchmarkSuite, method: Method) -> EvalReport:
    """Run every suite query through retrieval and aggregate AP into mAP.

    The query image is always excluded from its own ranking, and the full
    corpus is ranked so that every positive is reachable.
    """
    apply_thread_cap()
    _check_texts(corpus, suite)
    ap_by_attribute: dict[str, list[float]] = {}
    for q in suite.queries:
        ap_by_attribute.setdefault(q.attribute, []).append(
            _query_ap(corpus, q, method)
        )
    per_attribute = {
        attr: sum(aps) / len(aps) for attr, aps in sorted(ap_by_attribute.items())
    }
    counts = {attr: len(aps) for attr, aps in sorted(ap_by_attribute.items())}
    average = (
        sum(per_attribute.values()) / len(per_attribute) if per_attribute else 0.0
    )
    return EvalReport(
        method=method,
        per_attribute=per_attribute,
        query_counts=counts,
        average_map=average,
        query_count=len(suite.queries),
        dropped=suite.dropped,
    )


def lambda_sweep(
    corpus: Corpus, suite: BenchmarkSuite, grid: Sequence[float]
) -> SweepReport:
    """Evaluate WEICOM at every grid point and mark the best average mAP."""
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise ValueError("lambda grid must not be empty")
    for g in grid:
        if not 0.0 <= g <= 1.0:
            raise ValueError(f"lambda grid values must lie in [0, 1], got {g}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be strictly increasing")

    reports = [evaluate(corpus, suite, Method.weicom(lam)) for lam in grid]
    attributes = sorted(reports[0].per_attribute) if reports else []
    per_attribute = {
        attr: tuple(r.per_attribute[attr] for r in reports) for attr in attributes
    }
    average_row = tuple(r.average_map for r in reports)
    best = max(range(len(grid)), key=lambda i: (average_row[i], -i))
    return SweepReport(
        lambda_grid=grid,
        per_attribute=per_attribute,
        average_row=average_row,
        best_lambda=grid[best],
        query_count=reports[0].query_count if reports else 0,
        dropped=suite.dropped,
    )
