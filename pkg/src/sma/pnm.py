"""Binary portable pixmap I/O (P5 grayscale, P6 color, maxval 255 only)."""

from __future__ import annotations

import os

import numpy as np

from .errors import ParseError

_WHITESPACE = b" \t\n\r\v\f"
_CHANNELS = {b"P5": 1, b"P6": 3}


def _header_fields(data: bytes, name: str) -> tuple[list[bytes], int]:
    """Magic, width, height and maxval, plus the offset of the pixel payload."""
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        if pos >= len(data):
            raise ParseError(f"{name}: header truncated at byte {pos}")
        c = data[pos:pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise ParseError(f"{name}: unterminated comment at byte {pos}")
            pos = end + 1
        else:
            start = pos
            while pos < len(data) and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
                pos += 1
            fields.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise ParseError(f"{name}: expected whitespace after maxval at byte {pos}")
    return fields, pos + 1


def decode_pnm(data: bytes, name: str = "<bytes>") -> np.ndarray:
    """Decode to an H x W x C float64 array with pixels ``b / 255``."""
    if data[:2] not in _CHANNELS:
        raise ParseError(f"{name}: unsupported magic {data[:2]!r} at byte 0 (need P5 or P6)")
    fields, offset = _header_fields(data, name)
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise ParseError(f"{name}: non-integer header field before byte {offset}") from None
    if width < 1 or height < 1:
        raise ParseError(f"{name}: bad dimensions {width}x{height} before byte {offset}")
    if maxval != 255:
        raise ParseError(f"{name}: unsupported maxval {maxval} before byte {offset} (only 255)")
    channels = _CHANNELS[fields[0]]
    need = width * height * channels
    if len(data) - offset < need:
        raise ParseError(
            f"{name}: payload truncated at byte {len(data)}; expected {need} bytes from offset {offset}"
        )
    raster = np.frombuffer(data, dtype=np.uint8, count=need, offset=offset)
    return raster.reshape(height, width, channels) / 255.0


def read_pnm(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_pnm(fh.read(), os.fspath(path))


def encode_pnm(img: np.ndarray) -> bytes:
    """Quantize to 8 bits (round half to even) and encode as P5 or P6."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"need an H x W x 1 or H x W x 3 image, got shape {img.shape}")
    magic = b"P5" if img.shape[2] == 1 else b"P6"
    raster = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = b"%s\n%d %d\n255\n" % (magic, img.shape[1], img.shape[0])
    return header + raster.tobytes()


def write_pnm(path: str | os.PathLike, img: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pnm(img))
