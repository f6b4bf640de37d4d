"""Image loading and colour-space conversion.

Images are plain numpy arrays: an RGB image is a ``(height, width, 3)``
``uint8`` array, a gray image is a ``(height, width)`` ``float64`` array with
values in [0, 255], and a mask is a ``(height, width)`` boolean array.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

# sRGB -> XYZ (D65), applied to raw 0-255 values without gamma expansion.
XYZ_MATRIX = np.array(
    [
        [0.4124, 0.3576, 0.1805],
        [0.2126, 0.7152, 0.0722],
        [0.0193, 0.1192, 0.9505],
    ]
)


class ImageError(ValueError):
    """Base class for image decoding problems."""


class ImageNotFoundError(ImageError, FileNotFoundError):
    pass


class UnsupportedFormatError(ImageError):
    pass


class CorruptImageError(ImageError):
    pass


def as_rgb(pixels) -> np.ndarray:
    """Validate and normalise ``pixels`` into an ``(h, w, 3)`` uint8 array.

    A 2-D array is treated as gray and replicated into three channels.
    """
    arr = np.asarray(pixels)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if arr.dtype != np.uint8:
        if np.any(arr < 0) or np.any(arr > 255) or np.any(arr != np.round(arr)):
            raise ValueError("channel values must be integers in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_gray(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 255:
        raise ValueError("gray values must lie in [0, 255]")
    return arr


# -- decoding -----------------------------------------------------------------


def _read_netpbm(data: bytes, path) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormatError(f"{path}: only binary PGM (P5) and PPM (P6) are supported")
    # header: magic, width, height, maxval separated by whitespace, comments allowed
    fields = []
    pos = 2
    n = len(data)
    while len(fields) < 3:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and data[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise CorruptImageError(f"{path}: malformed header")
        fields.append(int(data[start:pos]))
    if pos >= n or not data[pos : pos + 1].isspace():
        raise CorruptImageError(f"{path}: malformed header")
    pos += 1
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise CorruptImageError(f"{path}: zero-sized image")
    if maxval != 255:
        raise UnsupportedFormatError(f"{path}: only 8-bit (maxval 255) images are supported")
    channels = 1 if magic == b"P5" else 3
    need = width * height * channels
    body = data[pos : pos + need]
    if len(body) < need:
        raise CorruptImageError(f"{path}: truncated pixel data ({len(body)} of {need} bytes)")
    arr = np.frombuffer(body, dtype=np.uint8).reshape(height, width, channels)
    return as_rgb(arr[:, :, 0] if channels == 1 else arr.copy())


def _read_csv_grid(text: str, path) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([int(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise CorruptImageError(f"{path}: non-integer entry") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise CorruptImageError(f"{path}: ragged or empty grid")
    arr = np.array(rows)
    if arr.min() < 0 or arr.max() > 255:
        raise CorruptImageError(f"{path}: values outside [0, 255]")
    return as_rgb(arr.astype(np.uint8))


def _read_png(path) -> np.ndarray:
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("I;16", "I", "F"):
                raise UnsupportedFormatError(f"{path}: 16-bit and float images are not supported")
            return as_rgb(np.asarray(im.convert("RGB")))
    except UnsupportedFormatError:
        raise
    except Exception as exc:
        raise CorruptImageError(f"{path}: {exc}") from exc


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Decode a PNG, binary PGM/PPM or CSV grid file into an RGB array."""
    path = Path(path)
    if not path.is_file():
        raise ImageNotFoundError(f"no such file: {path}")
    suffix = path.suffix.lower()
    data = path.read_bytes()
    if suffix == ".png":
        if not data.startswith(b"\x89PNG\r\n\x1a\n"):
            raise CorruptImageError(f"{path}: missing PNG signature")
        return _read_png(path)
    if suffix in (".pgm", ".ppm", ".pnm"):
        return _read_netpbm(data, path)
    if suffix == ".csv":
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise CorruptImageError(f"{path}: not an ASCII grid") from exc
        return _read_csv_grid(text, path)
    raise UnsupportedFormatError(f"{path}: unsupported extension {suffix!r}")


def write_pgm(path: str | os.PathLike, mask: np.ndarray) -> None:
    """Write a boolean mask as a binary PGM with values {0, 255}."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    body = np.where(mask, 255, 0).astype(np.uint8).tobytes()
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + body)


def write_ppm(path: str | os.PathLike, img: np.ndarray) -> None:
    img = as_rgb(img)
    h, w, _ = img.shape
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + img.tobytes())


def load_mask(path: str | os.PathLike) -> np.ndarray:
    """Read a mask image; any nonzero gray value counts as lesion."""
    return load_image(path)[:, :, 0] > 0


# -- conversions --------------------------------------------------------------


def rgb_to_gray(img: np.ndarray) -> np.ndarray:
    img = as_rgb(img)
    return img.astype(np.float64).sum(axis=2) / 3.0


def rgb_to_xyz(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xyz = xyz_unclamped(img)
    np.clip(xyz, 0.0, 255.0, out=xyz)
    return xyz[:, :, 0], xyz[:, :, 1], xyz[:, :, 2]


def xyz_unclamped(img: np.ndarray) -> np.ndarray:
    img = as_rgb(img)
    return img.astype(np.float64) @ XYZ_MATRIX.T


def rgb_channels(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    img = as_rgb(img).astype(np.float64)
    return img[:, :, 0], img[:, :, 1], img[:, :, 2]


def apply_mask(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Paint everything outside ``mask`` white so it enters the filtration last."""
    img = as_rgb(img)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape[:2]:
        raise ValueError(f"mask shape {mask.shape} does not match image shape {img.shape[:2]}")
    out = img.copy()
    out[~mask] = 255
    return out
