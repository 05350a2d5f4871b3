"""Seeded synthetic corpora with planted class/value structure.

Image embeddings mix a class direction (dominant), a value direction
(secondary), and isotropic noise; text embeddings sit near the value
directions.  Image-to-image similarity is therefore class-driven while
text-to-image similarity is value-driven, so composed retrieval has a
recoverable planted structure.  All directions are drawn orthonormal.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .store import Corpus, EmbeddingMatrix, ImageRecord, TextTable, save_corpus

ATTRIBUTE = "variant"


@dataclass(frozen=True)
class SyntheticParams:
    classes: int = 4
    values: int = 3
    per_cell: int = 20
    dim: int = 32
    seed: int = 7
    alpha: float = 0.5  # value-direction strength inside image embeddings
    beta: float = 0.1  # noise strength inside text embeddings
    noise: float = 0.3  # isotropic noise strength inside image embeddings

    def __post_init__(self):
        if self.classes < 1 or self.values < 2 or self.per_cell < 1:
            raise ValueError("need classes >= 1, values >= 2, per_cell >= 1")
        if self.dim < self.classes + self.values:
            raise ValueError(
                f"dim {self.dim} too small for {self.classes} class + "
                f"{self.values} value orthonormal directions"
            )


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return (matrix / norms).astype(np.float32)


def generate_corpus(params: SyntheticParams) -> tuple[Corpus, dict]:
    """Build an in-memory corpus and its benchmark spec document."""
    rng = np.random.default_rng(params.seed)
    basis, _ = np.linalg.qr(
        rng.standard_normal((params.dim, params.classes + params.values))
    )
    class_dirs = basis[:, : params.classes].T
    value_dirs = basis[:, params.classes :].T

    class_names = [f"class{c:02d}" for c in range(params.classes)]
    value_names = [f"v{v:02d}" for v in range(params.values)]

    rows = []
    records = []
    for ci, class_name in enumerate(class_names):
        for vi, value in enumerate(value_names):
            for n in range(params.per_cell):
                vec = (
                    class_dirs[ci]
                    + params.alpha * value_dirs[vi]
                    + params.noise * rng.standard_normal(params.dim)
                )
                rows.append(vec)
                records.append(
                    ImageRecord(
                        id=f"img_{ci:02d}_{vi:02d}_{n:04d}",
                        class_name=class_name,
                        attributes={ATTRIBUTE: value},
                    )
                )
    images = _unit_rows(np.asarray(rows))

    text_rows = [
        value_dirs[vi] + params.beta * rng.standard_normal(params.dim)
        for vi in range(params.values)
    ]
    texts = TextTable(value_names, _unit_rows(np.asarray(text_rows)))

    corpus = Corpus(images=EmbeddingMatrix(images), records=records, texts=texts)
    spec_doc = {
        "attributes": [
            {
                "attribute": ATTRIBUTE,
                "classes": [
                    {"class": name, "values": list(value_names)}
                    for name in class_names
                ],
            }
        ]
    }
    return corpus, spec_doc


def write_synthetic_corpus(params: SyntheticParams, out_dir: str | Path) -> Path:
    """Generate and persist a corpus directory plus benchmark spec.

    Writes the standard corpus layout, ``benchmark.json`` with the matching
    attribute spec, and ``generation.json`` recording the seed and shape
    parameters.  Output bytes are identical across runs with equal params.
    """
    corpus, spec_doc = generate_corpus(params)
    out = save_corpus(out_dir, corpus)
    with open(out / "benchmark.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(spec_doc, sort_keys=True, indent=2) + "\n")
    with open(out / "generation.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(asdict(params), sort_keys=True, indent=2) + "\n")
    return out
