"""Batch extraction: annotated image directory + text list -> corpus inputs.

Produces exactly the files ``weicom ingest`` consumes: image and text
WCEM matrices with JSONL sidecars, one image row per annotation in
annotation order, every row unit-normalized before writing.  A manifest
records the checkpoint, the prompt template, and the preprocessing so a
corpus can be traced back to how it was encoded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotations import Annotation, parse_annotations
from .encoders import Encoder
from .formats import (
    l2_normalize_rows,
    write_image_metadata,
    write_text_metadata,
    write_wcem,
)

DEFAULT_TEMPLATE = "{}"  # bare value string


@dataclass(frozen=True)
class AdapterConfig:
    image_root: Path
    annotations: Path
    texts: tuple[str, ...]
    out_dir: Path
    template: str = DEFAULT_TEMPLATE
    batch_size: int = 16


def resolve_image_paths(root: Path, rows: list[Annotation]) -> list[Path]:
    """Map each annotation id to an image file under the root.

    Accepts either exact filenames or ids without extension; aborts with
    the full list of missing ids.
    """
    paths = []
    missing = []
    for row in rows:
        direct = root / row.id
        if direct.is_file():
            paths.append(direct)
            continue
        candidates = sorted(p for p in root.glob(f"{row.id}.*") if p.is_file())
        if candidates:
            paths.append(candidates[0])
        else:
            missing.append(row.id)
    if missing:
        raise FileNotFoundError(
            f"{len(missing)} image files missing under {root}: "
            + ", ".join(missing[:10])
            + ("..." if len(missing) > 10 else "")
        )
    return paths


def extract(config: AdapterConfig, encoder: Encoder) -> Path:
    """Encode everything and write a corpus input directory."""
    rows = parse_annotations(config.annotations)
    paths = resolve_image_paths(config.image_root, rows)

    image_features = np.asarray(encoder.encode_images(paths))
    texts = [t.lower() for t in config.texts]
    prompts = [config.template.format(t) for t in texts]
    text_features = np.asarray(encoder.encode_texts(prompts))

    if image_features.shape[0] != len(rows):
        raise ValueError(
            f"encoder returned {image_features.shape[0]} image rows for {len(rows)} annotations"
        )
    if text_features.shape[0] != len(texts):
        raise ValueError(
            f"encoder returned {text_features.shape[0]} text rows for {len(texts)} texts"
        )
    if image_features.shape[1] != text_features.shape[1]:
        raise ValueError(
            f"image dim {image_features.shape[1]} != text dim {text_features.shape[1]}"
        )

    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_wcem(out / "images.wcem", l2_normalize_rows(image_features))
    write_image_metadata(
        out / "images.jsonl",
        (
            {"id": r.id, "class": r.class_name, "attributes": r.attributes}
            for r in rows
        ),
    )
    write_wcem(out / "texts.wcem", l2_normalize_rows(text_features))
    write_text_metadata(out / "texts.jsonl", texts)

    manifest = {
        "checkpoint": encoder.name,
        "preprocessing": encoder.preprocessing,
        "prompt_template": config.template,
        "image_count": len(rows),
        "text_count": len(texts),
        "dim": int(image_features.shape[1]),
    }
    with open(out / "adapter_manifest.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return out
