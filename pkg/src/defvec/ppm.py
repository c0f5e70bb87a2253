"""Binary PPM (P6, 8-bit) reading/writing and bilinear resizing.

Kept dependency-free on purpose: the on-disk image format for directory
sources is plain P6 so nothing beyond numpy is needed to decode it.
"""

from __future__ import annotations

import numpy as np


class PpmError(ValueError):
    """Raised for unreadable or malformed PPM files."""


def _read_header_token(data: bytes, pos: int):
    # Skip whitespace and '#' comments, then read one whitespace-delimited token.
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise PpmError("truncated header")
    return data[start:pos], pos


def read_ppm(path) -> np.ndarray:
    """Decode a binary P6 file into a (H, W, 3) uint8 array."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise PpmError(f"{path}: {exc}") from exc
    try:
        magic, pos = _read_header_token(data, 0)
        if magic != b"P6":
            raise PpmError(f"not a P6 file (magic {magic!r})")
        width_tok, pos = _read_header_token(data, pos)
        height_tok, pos = _read_header_token(data, pos)
        maxval_tok, pos = _read_header_token(data, pos)
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
        if width <= 0 or height <= 0:
            raise PpmError(f"bad dimensions {width}x{height}")
        if maxval != 255:
            raise PpmError(f"unsupported maxval {maxval} (only 8-bit supported)")
        pos += 1  # exactly one whitespace byte separates header from raster
        raster = data[pos : pos + width * height * 3]
        if len(raster) != width * height * 3:
            raise PpmError("truncated pixel data")
        return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    except PpmError as exc:
        raise PpmError(f"{path}: {exc}") from None


def write_ppm(path, pixels: np.ndarray) -> None:
    """Write a (H, W, 3) uint8 array as binary P6."""
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise PpmError(f"expected (H, W, 3) array, got shape {pixels.shape}")
    h, w = pixels.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a (H, W, C) array using half-pixel sample centers.

    Resizing to the input size is a bit-exact identity; resizing a constant
    image yields the same constant.
    """
    h, w = img.shape[:2]
    src = img.astype(np.float64, copy=False)

    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)

    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]

    top = src[y0][:, x0] * (1.0 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1.0 - fx) + src[y1][:, x1] * fx
    out = top * (1.0 - fy) + bot * fy
    return out.astype(img.dtype, copy=False)
