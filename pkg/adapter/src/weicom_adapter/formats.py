"""Writers for the engine's corpus input formats.

WCEM (binary, little-endian): magic ``WCEM``, u32 version = 1, u32 count,
u32 dim, then count*dim IEEE-754 float32 values row-major, no padding.
Sidecars are JSON Lines in row order.  Implemented here against the
format contract, so the adapter stays decoupled from the engine package.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

_HEADER = struct.Struct("<4sIII")


def write_wcem(path: str | Path, matrix: np.ndarray) -> None:
    data = np.ascontiguousarray(matrix, dtype="<f4")
    if data.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    count, dim = data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"WCEM", 1, count, dim))
        fh.write(data.tobytes())


def write_image_metadata(path: str | Path, rows: Iterable[Mapping]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            payload = {
                "id": row["id"],
                "class": row["class"],
                "attributes": dict(row.get("attributes", {})),
            }
            fh.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def write_text_metadata(path: str | Path, texts: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for text in texts:
            fh.write(json.dumps({"text": text}, separators=(",", ":")) + "\n")


def l2_normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Unit-normalize rows (float64 accumulation, float32 output)."""
    m = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    bad = np.flatnonzero(norms.ravel() < 1e-12)
    if bad.size:
        raise ValueError(f"row {int(bad[0])} has near-zero norm")
    return (m / norms).astype(np.float32)
