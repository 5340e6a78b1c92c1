"""
PPM/PGM reading and writing.

Reads binary (P6/P5) and ASCII (P3/P2) variants with any maxval up to 65535.
Writes binary files with maxval 255.
"""

from pathlib import Path
from typing import List, Tuple

import numpy as np

from salnet.shared.exceptions import UnreadableFileError


def _header_tokens(blob: bytes, count: int) -> Tuple[List[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping # comments."""
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(blob):
            raise ValueError("unexpected end of header")
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        tokens.append(blob[start:pos])
    # exactly one whitespace byte separates the header from binary samples
    return tokens, pos + 1


def _decode(path: Path, expected: Tuple[bytes, bytes], channels: int) -> np.ndarray:
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise UnreadableFileError("Cannot read image file", path=str(path), original_error=e) from e

    try:
        (magic, width_b, height_b, maxval_b), data_start = _header_tokens(blob, 4)
        if magic not in expected:
            raise ValueError(f"unsupported magic {magic!r}")
        width, height, maxval = int(width_b), int(height_b), int(maxval_b)
        if width <= 0 or height <= 0 or not 0 < maxval < 65536:
            raise ValueError("bad dimensions or maxval")
        count = width * height * channels
        if magic == expected[0]:
            dtype = ">u2" if maxval > 255 else "u1"
            samples = np.frombuffer(blob, dtype=dtype, count=count, offset=data_start)
        else:
            samples = np.array(blob[data_start:].split()[:count], dtype=np.int64)
            if samples.size != count:
                raise ValueError("not enough samples")
    except ValueError as e:
        raise UnreadableFileError("Malformed Netpbm file", path=str(path), original_error=e) from e

    values = samples.astype(np.float64) / float(maxval)
    return np.clip(values, 0.0, 1.0).reshape(height, width, channels)


def read_ppm(path: Path) -> np.ndarray:
    """Read a colour image as a (3, H, W) float array in [0, 1]."""
    return _decode(Path(path), (b"P6", b"P3"), 3).transpose(2, 0, 1).copy()


def read_pgm(path: Path) -> np.ndarray:
    """Read a greyscale image as an (H, W) float array in [0, 1]."""
    return _decode(Path(path), (b"P5", b"P2"), 1)[:, :, 0].copy()


def _quantize(values: np.ndarray) -> np.ndarray:
    return np.round(np.clip(values, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_ppm(path: Path, image: np.ndarray) -> Path:
    """Write a (3, H, W) image in [0, 1] as binary PPM."""
    path = Path(path)
    _, height, width = image.shape
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    path.write_bytes(header + _quantize(image).transpose(1, 2, 0).tobytes())
    return path


def write_pgm(path: Path, mask: np.ndarray) -> Path:
    """Write an (H, W) map in [0, 1] as binary PGM."""
    path = Path(path)
    height, width = mask.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    path.write_bytes(header + _quantize(mask).tobytes())
    return path
