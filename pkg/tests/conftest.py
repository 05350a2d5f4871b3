import json
from pathlib import Path

import numpy as np
import pytest

from weicom.store import (
    Corpus,
    EmbeddingMatrix,
    ImageRecord,
    TextTable,
    write_wcem,
)


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Normalize rows to unit norm, returning float32."""
    m = np.asarray(matrix, dtype=np.float64)
    return (m / np.linalg.norm(m, axis=1, keepdims=True)).astype(np.float32)


def random_corpus(
    n: int = 20,
    d: int = 8,
    seed: int = 0,
    texts: dict[str, np.ndarray] | None = None,
) -> Corpus:
    """Random unit-row corpus with alternating classes and a tone attribute."""
    rng = np.random.default_rng(seed)
    images = unit_rows(rng.standard_normal((n, d)))
    records = [
        ImageRecord(
            id=f"img_{i:04d}",
            class_name="alpha" if i % 2 == 0 else "beta",
            attributes={"tone": "light" if i % 3 == 0 else "dark"},
        )
        for i in range(n)
    ]
    if texts is None:
        names = ["light", "dark"]
        matrix = unit_rows(rng.standard_normal((len(names), d)))
        table = TextTable(names, matrix)
    else:
        names = list(texts)
        table = TextTable(names, np.asarray([texts[t] for t in names], dtype=np.float32))
    return Corpus(images=EmbeddingMatrix(images), records=records, texts=table)


def write_input_files(
    root: Path,
    images: np.ndarray,
    meta_rows: list[dict],
    text_matrix: np.ndarray,
    text_rows: list[dict],
) -> tuple[Path, Path, Path, Path]:
    """Write the four raw ingest inputs and return their paths."""
    emb = root / "images.wcem"
    meta = root / "images.jsonl"
    tx = root / "texts.wcem"
    tx_meta = root / "texts.jsonl"
    write_wcem(emb, np.asarray(images, dtype=np.float32))
    meta.write_text(
        "".join(json.dumps(r) + "\n" for r in meta_rows), encoding="utf-8"
    )
    write_wcem(tx, np.asarray(text_matrix, dtype=np.float32))
    tx_meta.write_text(
        "".join(json.dumps(r) + "\n" for r in text_rows), encoding="utf-8"
    )
    return emb, meta, tx, tx_meta


@pytest.fixture
def axis_corpus() -> Corpus:
    """Four one-hot images over d=4 plus aligned texts; exact dot products."""
    images = np.eye(4, dtype=np.float32)
    records = [
        ImageRecord("img_a", "pool", {"shape": "rectangular"}),
        ImageRecord("img_b", "pool", {"shape": "oval"}),
        ImageRecord("img_c", "river", {"shape": "curved"}),
        ImageRecord("img_d", "river", {"shape": "straight"}),
    ]
    texts = TextTable(
        ["rectangular", "oval", "curved", "straight"],
        np.eye(4, dtype=np.float32),
    )
    return Corpus(images=EmbeddingMatrix(images), records=records, texts=texts)
