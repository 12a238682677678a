"""Grayscale image container and PGM/PNG file IO.

Images are stored as 8-bit intensities (0-255) in a read-only
``(height, width)`` array; :func:`normalize` lifts them to floats in [0, 1].
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


class ImageFormatError(ValueError):
    """Base class for unreadable or unsupported image files."""


class PgmHeaderError(ImageFormatError):
    """The PGM header is missing, malformed or uses an unknown magic."""


class PgmMaxvalError(ImageFormatError):
    """The PGM maxval is outside 1..255."""


class PgmTruncatedError(ImageFormatError):
    """The file ends before width*height samples were read."""


class ColorImageError(ImageFormatError):
    """A color image was given where grayscale is required."""


@dataclass(frozen=True, eq=False)
class Image:
    """Immutable 8-bit grayscale image.

    Parameters
    ----------
    pixels : array_like
        ``(height, width)`` grid of integers in 0..255. A copy is taken and
        frozen.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ColorImageError(
                f"expected a 2-D grayscale grid, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        if arr.dtype != np.uint8:
            if arr.dtype.kind == "f" and not np.all(arr == np.round(arr)):
                raise ValueError("pixel values must be integers")
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("pixel values must lie in [0, 255]")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    @classmethod
    def from_float(cls, values) -> "Image":
        """Quantize a [0, 1] float grid to 8 bits (round half to even)."""
        values = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
        return cls(np.rint(values * 255.0).astype(np.uint8))

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"Image(width={self.width}, height={self.height})"


def normalize(image: Image) -> np.ndarray:
    """Return the image as a float64 grid in [0, 1] (value / 255)."""
    return image.pixels.astype(np.float64) / 255.0


def _read_tokens(data: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    # PNM header: whitespace separated tokens, '#' comments to end of line.
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise PgmHeaderError("unexpected end of file in header")
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _parse_header_int(token: bytes, name: str) -> int:
    try:
        value = int(token.decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise PgmHeaderError(f"invalid {name} {token!r}") from None
    return value


def load_pgm(path) -> Image:
    """Read a P5 (binary) or P2 (ASCII) PGM file with maxval <= 255.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    ColorImageError
        For P3/P6 (color) files.
    PgmHeaderError, PgmMaxvalError, PgmTruncatedError
        For malformed headers, unsupported depth and short pixel data.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic in (b"P3", b"P6"):
        raise ColorImageError(f"{os.fspath(path)}: color PNM ({magic.decode()}) not supported")
    if magic not in (b"P2", b"P5"):
        raise PgmHeaderError(f"{os.fspath(path)}: not a PGM file (magic {magic!r})")
    (w_tok, h_tok, m_tok), pos = _read_tokens(data, 3, 2)
    width = _parse_header_int(w_tok, "width")
    height = _parse_header_int(h_tok, "height")
    maxval = _parse_header_int(m_tok, "maxval")
    if width <= 0 or height <= 0:
        raise PgmHeaderError(f"invalid size {width}x{height}")
    if not 0 < maxval <= 255:
        raise PgmMaxvalError(f"maxval {maxval} not in 1..255")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise PgmHeaderError("missing whitespace after maxval")
        body = data[pos + 1:pos + 1 + count]
        if len(body) < count:
            raise PgmTruncatedError(
                f"expected {count} pixel bytes, found {len(body)}")
        pixels = np.frombuffer(body, dtype=np.uint8).reshape(height, width)
    else:
        fields = data[pos:].split()
        if len(fields) < count:
            raise PgmTruncatedError(
                f"expected {count} pixel values, found {len(fields)}")
        try:
            pixels = np.array([int(f) for f in fields[:count]], dtype=np.int64)
        except ValueError:
            raise PgmHeaderError("non-integer pixel value in P2 body") from None
        pixels = pixels.reshape(height, width)
    if pixels.max(initial=0) > maxval:
        raise ImageFormatError("pixel value exceeds maxval")
    return Image(pixels)


def save_pgm(image: Image, path) -> None:
    """Write ``image`` as a binary (P5) PGM with maxval 255."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(image.pixels).tobytes())


def load_png(path) -> Image:
    """Read an 8-bit grayscale PNG. Requires Pillow.

    Color and palette PNGs are rejected rather than converted.
    """
    from PIL import Image as PILImage

    with PILImage.open(path) as im:
        if im.mode != "L":
            raise ColorImageError(f"{os.fspath(path)}: PNG mode {im.mode!r} is not 8-bit grayscale")
        return Image(np.asarray(im))


def load_image(path) -> Image:
    """Dispatch on file extension: ``.png`` via Pillow, anything else as PGM."""
    if os.fspath(path).lower().endswith(".png"):
        return load_png(path)
    return load_pgm(path)
