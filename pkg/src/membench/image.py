"""Images as interleaved ``(h, w, c)`` float32 arrays: validation, synthetic
test patterns, and binary PPM (P6) I/O."""

from __future__ import annotations

import os
from typing import Union

import numpy as np

PathLike = Union[str, os.PathLike]

PATTERNS = ("constant", "impulse", "gradient", "random")


class ImageError(ValueError):
    pass


class PPMFormatError(ImageError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


def as_image(img) -> np.ndarray:
    """Validate an ``(h, w, c)`` float32 C-contiguous image with c in {1, 3}."""
    if not isinstance(img, np.ndarray) or img.ndim != 3:
        raise ImageError(f"expected an (h, w, c) array, got shape {getattr(img, 'shape', None)}")
    h, w, c = img.shape
    if h < 1 or w < 1 or c not in (1, 3):
        raise ImageError(f"invalid image shape {img.shape}; need h, w >= 1 and 1 or 3 channels")
    if img.dtype != np.float32 or not img.flags.c_contiguous:
        raise ImageError("image must be C-contiguous float32")
    return img


def synth_image(w: int, h: int, c: int = 3, pattern: str = "random", *, value: float = 0.5,
                seed: int = 0, scale: float = 1.0) -> np.ndarray:
    """Deterministic test image.

    constant: every sample equals ``value``.
    impulse: 1.0 at pixel (h // 2, w // 2) in every channel, 0 elsewhere.
    gradient: (i + j) / (h + w - 2), same in every channel.
    random: uniform [0, 1) from ``numpy.random.default_rng(seed)``.
    Non-constant patterns are multiplied by ``scale`` (e.g. 255).
    """
    if w < 1 or h < 1:
        raise ImageError("w and h must be >= 1")
    if c not in (1, 3):
        raise ImageError("c must be 1 or 3")
    if pattern == "constant":
        return np.full((h, w, c), value, dtype=np.float32)
    if pattern == "impulse":
        img = np.zeros((h, w, c), dtype=np.float32)
        img[h // 2, w // 2, :] = 1.0
    elif pattern == "gradient":
        ii, jj = np.mgrid[0:h, 0:w]
        ramp = (ii + jj) / max(h + w - 2, 1)
        img = np.repeat(ramp[:, :, None], c, axis=2).astype(np.float32)
    elif pattern == "random":
        img = np.random.default_rng(seed).random((h, w, c), dtype=np.float32)
    else:
        raise ImageError(f"unknown pattern {pattern!r}; choose from {', '.join(PATTERNS)}")
    if scale != 1.0:
        img *= np.float32(scale)
    return np.ascontiguousarray(img)


# --- PPM ---------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\v\f"


def _header_tokens(buf: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens after the magic number.

    Returns the tokens with their offsets and the payload start offset.
    """
    pos = 2
    tokens = []
    while len(tokens) < count:
        if pos >= len(buf):
            raise PPMFormatError("truncated header", pos)
        ch = buf[pos:pos + 1]
        if ch in (b"#",):
            end = buf.find(b"\n", pos)
            if end < 0:
                raise PPMFormatError("unterminated comment in header", pos)
            pos = end + 1
        elif ch in _WHITESPACE:
            pos += 1
        else:
            start = pos
            while pos < len(buf) and buf[pos:pos + 1] not in _WHITESPACE and buf[pos:pos + 1] != b"#":
                pos += 1
            tokens.append((buf[start:pos], start))
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(buf) or buf[pos:pos + 1] not in _WHITESPACE:
        raise PPMFormatError("missing whitespace after maxval", pos)
    return tokens, pos + 1


def decode_ppm(buf: bytes) -> np.ndarray:
    if len(buf) < 2:
        raise PPMFormatError("file too short for a PPM header", len(buf))
    magic = buf[:2]
    if magic != b"P6":
        raise PPMFormatError(f"unsupported magic number {magic!r}; only binary PPM (P6) is supported", 0)
    tokens, start = _header_tokens(buf, 3)
    values = []
    for name, (tok, off) in zip(("width", "height", "maxval"), tokens):
        if not tok.isdigit():
            raise PPMFormatError(f"invalid {name} {tok!r}", off)
        values.append(int(tok))
    w, h, maxval = values
    if w < 1 or h < 1:
        raise PPMFormatError(f"invalid dimensions {w}x{h}", tokens[0][1])
    if maxval != 255:
        raise PPMFormatError(f"unsupported maxval {maxval}; only 255 is supported", tokens[2][1])
    need = w * h * 3
    have = len(buf) - start
    if have < need:
        raise PPMFormatError(f"truncated payload: expected {need} bytes, found {have}", len(buf))
    raster = np.frombuffer(buf, dtype=np.uint8, count=need, offset=start)
    return raster.reshape(h, w, 3).astype(np.float32)


def encode_ppm(img: np.ndarray) -> bytes:
    as_image(img)
    h, w, c = img.shape
    if c == 1:
        img = np.repeat(img, 3, axis=2)
    raster = np.rint(np.clip(img, 0.0, 255.0)).astype(np.uint8)
    return b"P6\n%d %d\n255\n" % (w, h) + raster.tobytes()


def load_ppm(path: PathLike) -> np.ndarray:
    """Read a binary P6 file (maxval 255) into a float32 ``(h, w, 3)`` image on the 0-255 scale."""
    with open(path, "rb") as f:
        return decode_ppm(f.read())


def save_ppm(img: np.ndarray, path: PathLike) -> None:
    """Write ``img`` as P6, clamping to [0, 255] and rounding to nearest.

    Single-channel images are written as gray RGB.
    """
    with open(path, "wb") as f:
        f.write(encode_ppm(img))
