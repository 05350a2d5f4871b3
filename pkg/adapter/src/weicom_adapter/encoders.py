"""Encoder backends.

An encoder turns image paths and text strings into same-dimension float
vectors.  The extraction pipeline takes any object with this surface, so
tests inject deterministic fakes and the CLIP backend stays optional.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol, Sequence

import numpy as np


class Encoder(Protocol):
    name: str
    preprocessing: str

    def encode_images(self, paths: Sequence[Path]) -> np.ndarray: ...

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray: ...


class ClipEncoder:
    """Dual-encoder checkpoint via transformers (CLIP-style models).

    Uses the checkpoint's published preprocessing; runs on CPU in eval
    mode with gradients disabled, so repeated runs are deterministic.
    """

    def __init__(self, checkpoint: str, batch_size: int = 16):
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:  # pragma: no cover - environment dependent
            raise RuntimeError(
                "the CLIP backend needs the [clip] extra: "
                "pip install 'weicom-embed-adapter[clip]'"
            ) from exc
        self._torch = torch
        self.model = CLIPModel.from_pretrained(checkpoint).eval()
        self.processor = CLIPProcessor.from_pretrained(checkpoint)
        self.batch_size = batch_size
        self.name = checkpoint
        self.preprocessing = type(self.processor.image_processor).__name__

    def encode_images(self, paths: Sequence[Path]) -> np.ndarray:
        from PIL import Image

        chunks = []
        with self._torch.no_grad():
            for start in range(0, len(paths), self.batch_size):
                batch = [
                    Image.open(p).convert("RGB")
                    for p in paths[start : start + self.batch_size]
                ]
                inputs = self.processor(images=batch, return_tensors="pt")
                features = self.model.get_image_features(**inputs)
                chunks.append(features.cpu().numpy())
        return np.concatenate(chunks, axis=0)

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray:
        chunks = []
        with self._torch.no_grad():
            for start in range(0, len(texts), self.batch_size):
                inputs = self.processor(
                    text=list(texts[start : start + self.batch_size]),
                    return_tensors="pt",
                    padding=True,
                )
                features = self.model.get_text_features(**inputs)
                chunks.append(features.cpu().numpy())
        return np.concatenate(chunks, axis=0)
