"""Corpus ingestion, persistence, and lookup.

A corpus bundles three things: an embedding matrix for the database images,
per-image metadata records aligned by row index, and a finite table of text
embeddings keyed by lowercase string.  Embeddings travel in WCEM files
(binary, little-endian): magic ``WCEM``, u32 version, u32 count, u32 dim,
then count*dim IEEE-754 float32 values row-major, no padding.  Metadata and
text sidecars are JSON Lines in row order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CountMismatch,
    DimMismatch,
    DuplicateId,
    FormatError,
    UnknownImage,
    UnknownText,
    ZeroVector,
)

WCEM_MAGIC = b"WCEM"
WCEM_VERSION = 1
_HEADER = struct.Struct("<4sIII")

NORM_TOLERANCE = 1e-4
ZERO_NORM_FLOOR = 1e-12


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Scale a vector to unit Euclidean norm.

    The sum of squares is accumulated in float64 regardless of the input
    dtype; the result is float64.  Raises :class:`ZeroVector` when the norm
    is below 1e-12.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a 1-d vector with at least one element")
    norm = float(np.sqrt(np.dot(v, v)))
    if norm < ZERO_NORM_FLOOR:
        raise ZeroVector(f"vector norm {norm:g} is below {ZERO_NORM_FLOOR:g}")
    return v / norm


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Re-normalize every row of a float32 matrix to unit norm.

    Norms are computed with a float64 accumulator; the result is float32.
    Raises :class:`ZeroVector` with the offending row index.
    """
    data = np.ascontiguousarray(matrix, dtype=np.float32)
    norms = np.sqrt(np.einsum("ij,ij->i", data, data, dtype=np.float64))
    bad = np.flatnonzero(norms < ZERO_NORM_FLOOR)
    if bad.size:
        raise ZeroVector(f"row {int(bad[0])} has near-zero norm")
    if data.shape[0] == 0:
        return data
    return np.ascontiguousarray(
        (data.astype(np.float64) / norms[:, None]).astype(np.float32)
    )


def read_wcem(path: str | Path) -> np.ndarray:
    """Read a WCEM file into a C-contiguous float32 matrix."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, count, dim = _HEADER.unpack_from(raw)
    if magic != WCEM_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != WCEM_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dim < 1:
        raise FormatError(f"{path}: dim must be positive, got {dim}")
    expected = _HEADER.size + 4 * count * dim
    if len(raw) != expected:
        raise FormatError(
            f"{path}: payload is {len(raw)} bytes, expected {expected} "
            f"for count={count} dim={dim}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    # copy: detaches from the read-only file buffer and yields a writable
    # C-contiguous array, which the scoring kernels require
    return data.reshape(count, dim).copy()


def write_wcem(path: str | Path, matrix: np.ndarray) -> None:
    """Write a float32 matrix as a WCEM file."""
    data = np.ascontiguousarray(matrix, dtype="<f4")
    if data.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    count, dim = data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(WCEM_MAGIC, WCEM_VERSION, count, dim))
        fh.write(data.tobytes())


@dataclass(frozen=True)
class EmbeddingMatrix:
    """A count x dim row-major matrix of unit-norm float32 vectors."""

    data: np.ndarray

    @property
    def count(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def row(self, i: int) -> np.ndarray:
        return self.data[i]


@dataclass(frozen=True)
class ImageRecord:
    """Metadata for one database image.

    ``class_name`` and the ``attributes`` names/values are lowercase; ids
    are kept verbatim.  Serialized JSON uses the key ``class``.
    """

    id: str
    class_name: str
    attributes: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class TextRecord:
    text: str
    embedding: np.ndarray


class TextTable:
    """Finite lookup table from lowercase text to its unit embedding row."""

    def __init__(self, texts: Sequence[str], matrix: np.ndarray):
        if len(texts) != matrix.shape[0]:
            raise CountMismatch(
                f"{len(texts)} text strings for {matrix.shape[0]} embedding rows"
            )
        self.texts: tuple[str, ...] = tuple(texts)
        self.matrix = matrix
        self._row: dict[str, int] = {}
        for i, text in enumerate(self.texts):
            if text in self._row:
                raise DuplicateId(f"duplicate text {text!r}")
            self._row[text] = i

    def __len__(self) -> int:
        return len(self.texts)

    def __contains__(self, text: str) -> bool:
        return text.lower() in self._row

    def embedding(self, text: str) -> np.ndarray:
        key = text.lower()
        if key not in self._row:
            raise UnknownText(f"text {key!r} is not in the corpus text table")
        return self.matrix[self._row[key]]


class Corpus:
    """Immutable bundle of image embeddings, aligned records, and texts.

    Lookup by image id is O(1).  ``id_rank`` holds each row's rank in the
    ascending lexicographic order of ids and backs the deterministic
    tie-break used when ranking.
    """

    def __init__(
        self,
        images: EmbeddingMatrix,
        records: Sequence[ImageRecord],
        texts: TextTable,
    ):
        if len(records) != images.count:
            raise CountMismatch(
                f"{len(records)} metadata records for {images.count} embedding rows"
            )
        if len(texts) and texts.matrix.shape[1] != images.dim:
            raise DimMismatch(
                f"text dim {texts.matrix.shape[1]} != image dim {images.dim}"
            )
        self.images = images
        self.records: tuple[ImageRecord, ...] = tuple(records)
        self.texts = texts
        self._row_by_id: dict[str, int] = {}
        for i, rec in enumerate(self.records):
            if rec.id in self._row_by_id:
                raise DuplicateId(f"duplicate image id {rec.id!r}")
            self._row_by_id[rec.id] = i
        self.ids: tuple[str, ...] = tuple(rec.id for rec in self.records)
        order = sorted(range(images.count), key=lambda i: self.ids[i])
        rank = np.empty(images.count, dtype=np.int64)
        rank[order] = np.arange(images.count)
        self.id_rank = rank

    @property
    def count(self) -> int:
        return self.images.count

    @property
    def dim(self) -> int:
        return self.images.dim

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._row_by_id

    def row_index(self, image_id: str) -> int:
        try:
            return self._row_by_id[image_id]
        except KeyError:
            raise UnknownImage(f"image id {image_id!r} is not in the corpus") from None

    def record(self, image_id: str) -> ImageRecord:
        return self.records[self.row_index(image_id)]

    def image_embedding(self, image_id: str) -> np.ndarray:
        return self.images.data[self.row_index(image_id)]

    def text_embedding(self, text: str) -> np.ndarray:
        """Embedding for lowercase(text); raises :class:`UnknownText`."""
        return self.texts.embedding(text)


def _read_jsonl(path: str | Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise FormatError(f"{path}:{lineno}: expected a JSON object")
            rows.append(obj)
    return rows


def _parse_image_records(rows: list[dict], path: str | Path) -> list[ImageRecord]:
    records = []
    for i, obj in enumerate(rows):
        image_id = obj.get("id")
        if not isinstance(image_id, str) or not image_id:
            raise FormatError(f"{path}: row {i}: 'id' must be a non-empty string")
        class_name = obj.get("class", "")
        if not isinstance(class_name, str):
            raise FormatError(f"{path}: row {i}: 'class' must be a string")
        attrs = obj.get("attributes", {})
        if not isinstance(attrs, dict):
            raise FormatError(f"{path}: row {i}: 'attributes' must be an object")
        lowered = {}
        for name, value in attrs.items():
            if not isinstance(name, str) or not isinstance(value, str):
                raise FormatError(
                    f"{path}: row {i}: attribute names and values must be strings"
                )
            lowered[name.lower()] = value.lower()
        records.append(
            ImageRecord(id=image_id, class_name=class_name.lower(), attributes=lowered)
        )
    return records


def _parse_texts(rows: list[dict], path: str | Path) -> list[str]:
    texts = []
    for i, obj in enumerate(rows):
        text = obj.get("text")
        if not isinstance(text, str) or not text:
            raise FormatError(f"{path}: row {i}: 'text' must be a non-empty string")
        texts.append(text.lower())
    return texts


def _record_to_json(rec: ImageRecord) -> str:
    payload = {
        "id": rec.id,
        "class": rec.class_name,
        "attributes": dict(sorted(rec.attributes.items())),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_corpus(out_dir: str | Path, corpus: Corpus) -> Path:
    """Persist a corpus directory: WCEM matrices, JSONL sidecars, manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_wcem(out / "images.wcem", corpus.images.data)
    with open(out / "images.jsonl", "w", encoding="utf-8") as fh:
        for rec in corpus.records:
            fh.write(_record_to_json(rec) + "\n")
    write_wcem(out / "texts.wcem", corpus.texts.matrix)
    with open(out / "texts.jsonl", "w", encoding="utf-8") as fh:
        for text in corpus.texts.texts:
            fh.write(json.dumps({"text": text}, separators=(",", ":")) + "\n")
    manifest = {"version": 1, "dim": corpus.dim, "count": corpus.count}
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n")
    return out


def load_corpus(corpus_dir: str | Path) -> Corpus:
    """Load a persisted corpus directory, validating manifest and alignment."""
    root = Path(corpus_dir)
    manifest_path = root / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path}: invalid JSON: {exc}") from None
    if manifest.get("version") != 1:
        raise FormatError(f"{manifest_path}: unsupported version {manifest.get('version')}")

    images = read_wcem(root / "images.wcem")
    if images.shape[0] != manifest.get("count") or images.shape[1] != manifest.get("dim"):
        raise FormatError(
            f"{manifest_path}: manifest count/dim {manifest.get('count')}x"
            f"{manifest.get('dim')} does not match images.wcem {images.shape}"
        )
    norms = np.sqrt(np.einsum("ij,ij->i", images, images, dtype=np.float64))
    if images.shape[0] and float(np.abs(norms - 1.0).max()) > NORM_TOLERANCE:
        worst = int(np.abs(norms - 1.0).argmax())
        raise FormatError(
            f"{root}/images.wcem: row {worst} norm {norms[worst]:.6f} exceeds "
            f"unit-norm tolerance {NORM_TOLERANCE:g}"
        )
    records = _parse_image_records(_read_jsonl(root / "images.jsonl"), root / "images.jsonl")
    if len(records) != images.shape[0]:
        raise CountMismatch(
            f"{root}: {len(records)} metadata records for {images.shape[0]} embedding rows"
        )

    text_matrix = read_wcem(root / "texts.wcem")
    text_strings = _parse_texts(_read_jsonl(root / "texts.jsonl"), root / "texts.jsonl")
    if len(text_strings) != text_matrix.shape[0]:
        raise CountMismatch(
            f"{root}: {len(text_strings)} text strings for "
            f"{text_matrix.shape[0]} embedding rows"
        )
    return Corpus(
        images=EmbeddingMatrix(images),
        records=records,
        texts=TextTable(text_strings, text_matrix),
    )


def ingest(
    embedding_file: str | Path,
    metadata_file: str | Path,
    text_file: str | Path,
    text_meta_file: str | Path,
    out_dir: str | Path,
) -> Corpus:
    """Validate raw embedding/metadata files, persist a corpus, and load it.

    Every embedding row is re-normalized to unit norm even if the producer
    claims normalization; downstream scoring treats dot products as cosine
    similarities, which is only valid on exactly unit vectors.
    """
    images = normalize_rows(read_wcem(embedding_file))
    meta_rows = _read_jsonl(metadata_file)
    if len(meta_rows) != images.shape[0]:
        raise CountMismatch(
            f"{metadata_file} has {len(meta_rows)} records but "
            f"{embedding_file} has {images.shape[0]} rows"
        )
    records = _parse_image_records(meta_rows, metadata_file)

    text_matrix = normalize_rows(read_wcem(text_file))
    text_rows = _read_jsonl(text_meta_file)
    if len(text_rows) != text_matrix.shape[0]:
        raise CountMismatch(
            f"{text_meta_file} has {len(text_rows)} records but "
            f"{text_file} has {text_matrix.shape[0]} rows"
        )
    texts = _parse_texts(text_rows, text_meta_file)

    corpus = Corpus(
        images=EmbeddingMatrix(images),
        records=records,
        texts=TextTable(texts, text_matrix),
    )
    save_corpus(out_dir, corpus)
    return load_corpus(out_dir)
