"""Word embeddings: encode a word's 100-image stack and concatenate the 100
latent vectors into one 3200-dim embedding, plus table persistence in a text
exchange format and a compact binary format."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .autoencoder.model import AutoencoderModel
from .imageset import ImageSet, assemble_image_set
from .vocab import Vocabulary

EMBEDDING_DIM = 3200  # (19 + 1) terms * 5 images * 32 latent dims

TABLE_MAGIC = b"DFVE"
TABLE_VERSION = 1


class TableFormatError(ValueError):
    pass


@dataclass
class WordEmbedding:
    word: str
    vector: np.ndarray  # (3200,) float32


@dataclass
class EmbeddingTable:
    dim: int
    rows: list

    def as_dict(self) -> dict:
        return {row.word: row.vector for row in self.rows}


def embed_word(model: AutoencoderModel, image_set: ImageSet) -> WordEmbedding:
    """Encode all 100 images in one batch and concatenate the latents in
    image-set order: components [32k, 32(k+1)) come from image k."""
    latents = model.encode(image_set.images)  # (100, 32, 1, 1)
    vector = latents.reshape(-1).astype(np.float32)
    if vector.size != model.latent_dim * image_set.images.shape[0]:
        raise ValueError(f"unexpected latent size {vector.size}")
    return WordEmbedding(word=image_set.word, vector=vector)


def embed_vocabulary(model: AutoencoderModel, vocab: Vocabulary, source) -> EmbeddingTable:
    """One row per base word, in vocabulary order."""
    rows = []
    for word in vocab.base_words:
        image_set = assemble_image_set(vocab.entries[word], source)
        rows.append(embed_word(model, image_set))
    dim = rows[0].vector.size if rows else EMBEDDING_DIM
    return EmbeddingTable(dim=dim, rows=rows)


def save_table(table: EmbeddingTable, path, fmt: str = "text") -> None:
    if fmt == "text":
        _save_text(table, path)
    elif fmt == "binary":
        _save_binary(table, path)
    else:
        raise TableFormatError(f"unknown table format '{fmt}'")


def load_table(path) -> EmbeddingTable:
    """Auto-detects the format by the binary magic."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == TABLE_MAGIC:
        return _load_binary(path)
    return _load_text(path)


def _save_text(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.rows)} {table.dim}\n")
        for row in table.rows:
            values = " ".join(f"{v:.9g}" for v in row.vector)
            fh.write(f"{row.word} {values}\n")


def _load_text(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise TableFormatError(f"{path}: malformed header at line 1")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise TableFormatError(f"{path}: malformed header at line 1") from None
        rows = []
        seen = set()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != dim + 1:
                raise TableFormatError(
                    f"{path}: expected {dim} values at line {lineno}, "
                    f"got {len(fields) - 1}"
                )
            word = fields[0]
            if word in seen:
                raise TableFormatError(f"{path}: duplicate word '{word}' at line {lineno}")
            seen.add(word)
            vector = np.array(fields[1:], dtype=np.float32)
            rows.append(WordEmbedding(word=word, vector=vector))
    if len(rows) != count:
        raise TableFormatError(f"{path}: header says {count} rows, found {len(rows)}")
    return EmbeddingTable(dim=dim, rows=rows)


def _save_binary(table, path):
    with open(path, "wb") as fh:
        fh.write(TABLE_MAGIC)
        fh.write(struct.pack("<III", TABLE_VERSION, len(table.rows), table.dim))
        for row in table.rows:
            word_bytes = row.word.encode("utf-8")
            fh.write(struct.pack("<H", len(word_bytes)))
            fh.write(word_bytes)
            fh.write(np.ascontiguousarray(row.vector, dtype="<f4").tobytes())


def _load_binary(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != TABLE_MAGIC:
        raise TableFormatError(f"{path}: not a defvec embedding table")
    try:
        version, count, dim = struct.unpack_from("<III", buf, 4)
    except struct.error as exc:
        raise TableFormatError(f"{path}: truncated header") from exc
    if version != TABLE_VERSION:
        raise TableFormatError(f"{path}: unsupported table version {version}")
    pos = 4 + 12
    rows = []
    seen = set()
    for _ in range(count):
        try:
            (wlen,) = struct.unpack_from("<H", buf, pos)
        except struct.error as exc:
            raise TableFormatError(f"{path}: truncated row") from exc
        pos += 2
        word = buf[pos : pos + wlen].decode("utf-8")
        pos += wlen
        end = pos + 4 * dim
        if end > len(buf):
            raise TableFormatError(f"{path}: truncated vector for '{word}'")
        vector = np.frombuffer(buf[pos:end], dtype="<f4").astype(np.float32)
        pos = end
        if word in seen:
            raise TableFormatError(f"{path}: duplicate word '{word}'")
        seen.add(word)
        rows.append(WordEmbedding(word=word, vector=vector))
    return EmbeddingTable(dim=dim, rows=rows)
