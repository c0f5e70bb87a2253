"""Image sources and per-word image-set assembly.

Every vocabulary word maps to an ordered stack of 100 images: its own five
images followed by five per definition term, with PAD terms rendered as
blank (all-zero) images. Images are 3x32x32 RGB in [0, 1], channel-major.

Two sources are provided: a directory of P6 files and a seeded synthetic
generator. Both are deterministic, which makes the whole pipeline
reproducible end to end.
"""

from __future__ import annotations

import hashlib
import urllib.parse
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .ppm import PpmError, bilinear_resize, read_ppm
from .vocab import PAD, DefinitionEntry

IMAGE_SHAPE = (3, 32, 32)
IMAGES_PER_TERM = 5
IMAGES_PER_SET = 100  # (19 definition terms + the word itself) * 5


def blank_image() -> np.ndarray:
    """The canonical blank image used for PAD terms: all zeros, 3x32x32."""
    return np.zeros(IMAGE_SHAPE, dtype=np.float32)


class ImageSource(Protocol):
    def images_for(self, term: str) -> list:
        """Return exactly 5 deterministic 3x32x32 float32 images in [0, 1]."""
        ...


@dataclass
class ImageSet:
    word: str
    images: np.ndarray  # (100, 3, 32, 32) float32


def term_directory_name(term: str) -> str:
    """Directory name for a term; punctuation is percent-encoded ("," -> "%2C")."""
    return urllib.parse.quote(term, safe="")


class DirectorySource:
    """Reads ``<root>/<term>/<k>.ppm`` (k in 0..4), resizing to 32x32.

    Terms with fewer than 5 files are padded by repeating the last available
    image (all blanks if none); shortfalls are recorded in ``coverage``.
    Safe for concurrent reads: lookups never mutate shared state beyond the
    coverage dict, which is keyed per term.
    """

    def __init__(self, root):
        self.root = Path(root)
        if not self.root.is_dir():
            raise FileNotFoundError(f"image root not found: {self.root}")
        self.coverage = {}  # term -> found_count, only for terms with < 5 files

    def images_for(self, term: str) -> list:
        term_dir = self.root / term_directory_name(term)
        images = []
        for k in range(IMAGES_PER_TERM):
            path = term_dir / f"{k}.ppm"
            if not path.is_file():
                continue
            raw = read_ppm(path)  # raises PpmError naming the file
            resized = bilinear_resize(raw.astype(np.float64) / 255.0, 32, 32)
            images.append(np.transpose(resized, (2, 0, 1)).astype(np.float32))
        if len(images) < IMAGES_PER_TERM:
            self.coverage[term] = len(images)
            if images:
                images.extend([images[-1]] * (IMAGES_PER_TERM - len(images)))
            else:
                images = [blank_image() for _ in range(IMAGES_PER_TERM)]
        return images

    def write_coverage_report(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for term in sorted(self.coverage):
                fh.write(f"{term}\t{self.coverage[term]}\n")


def _hash64(term: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(term.encode("utf-8"), digest_size=8).digest(), "little"
    )


class SyntheticSource:
    """Deterministic synthetic images from a counter-based PRNG.

    Each (seed, term, slot) triple keys an independent Philox stream, so
    repeated calls are bit-identical and distinct terms collide only with
    negligible probability. Images are a saturated per-channel base color
    blended with a smooth low-frequency texture; the high contrast keeps the
    irreducible BCE low enough that a small autoencoder shows clear learning
    at desk scale, unlike white noise.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def images_for(self, term: str) -> list:
        h = _hash64(term)
        images = []
        for k in range(IMAGES_PER_TERM):
            bitgen = np.random.Philox(counter=[k, 0, 0, 0], key=[self.seed, h])
            rng = np.random.Generator(bitgen)
            u = rng.random(3)
            color = 0.5 + 0.45 * np.sign(u - 0.5) * np.abs(2.0 * u - 1.0) ** 0.25
            field = bilinear_resize(rng.random((4, 4, 3)), 32, 32)
            pixels = np.clip(
                0.9 * color[None, None, :] + 0.1 * field, 0.02, 0.98
            )
            images.append(np.transpose(pixels, (2, 0, 1)).astype(np.float32))
        return images


def assemble_image_set(entry: DefinitionEntry, source: ImageSource) -> ImageSet:
    """Stack the word's images and each term's images in definition order.

    PAD terms contribute blank images without consulting the source.
    """
    stack = np.empty((IMAGES_PER_SET,) + IMAGE_SHAPE, dtype=np.float32)
    sequence = [entry.word] + list(entry.terms)
    for i, term in enumerate(sequence):
        if term == PAD:
            block = [blank_image()] * IMAGES_PER_TERM
        else:
            block = source.images_for(term)
            if len(block) != IMAGES_PER_TERM:
                raise ValueError(
                    f"source returned {len(block)} images for '{term}', expected 5"
                )
        for k in range(IMAGES_PER_TERM):
            stack[i * IMAGES_PER_TERM + k] = block[k]
    return ImageSet(word=entry.word, images=stack)
