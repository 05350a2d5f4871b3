"""Annotation CSV parsing.

Schema: header ``id,class,attr:NAME[,attr:NAME...]``; one row per image.
Attribute cells may be empty (the image then carries no value for that
attribute).  Classes, attribute names, and values are lowercased to match
the engine's ingest folding; ids are kept verbatim.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class Annotation:
    id: str
    class_name: str
    attributes: dict[str, str] = field(default_factory=dict)


def parse_annotations(path: str | Path) -> list[Annotation]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty annotation file") from None
        if len(header) < 2 or header[0] != "id" or header[1] != "class":
            raise ValueError(
                f"{path}: header must start with 'id,class', got {header[:2]}"
            )
        attr_names = []
        for col in header[2:]:
            if not col.startswith("attr:") or len(col) <= 5:
                raise ValueError(f"{path}: attribute columns must be 'attr:NAME', got {col!r}")
            attr_names.append(col[5:].lower())

        rows = []
        seen = set()
        for lineno, cells in enumerate(reader, start=2):
            if not cells or not any(c.strip() for c in cells):
                continue
            if len(cells) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}"
                )
            image_id = cells[0].strip()
            if not image_id:
                raise ValueError(f"{path}:{lineno}: empty id")
            if image_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate id {image_id!r}")
            seen.add(image_id)
            attributes = {
                name: value.strip().lower()
                for name, value in zip(attr_names, cells[2:])
                if value.strip()
            }
            rows.append(
                Annotation(
                    id=image_id,
                    class_name=cells[1].strip().lower(),
                    attributes=attributes,
                )
            )
    if not rows:
        raise ValueError(f"{path}: no annotation rows")
    return rows
