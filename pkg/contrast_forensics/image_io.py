#!/usr/bin/python
"""Grayscale image files: binary PGM (P5) at any depth up to 16 bits, PNG at 8/16 bits."""

import io
from dataclasses import dataclass
from typing import Any

import numpy as np
import png

from contrast_forensics.histogram_core import MAX_BITS
from contrast_forensics.util import ImageFormatError, InputError

PGM_MAGIC = b"P5"
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
PNG_DEPTHS = (8, 16)

MASK_ON = 255


@dataclass(frozen=True, eq=False)
class GrayImage:
    width: int
    height: int
    bits: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.bits <= MAX_BITS:
            raise InputError(f"bit depth must be in 1..{MAX_BITS}, not {self.bits}")
        pixels = np.asarray(self.pixels)
        if pixels.size != self.width * self.height:
            raise InputError(
                f"{self.width}x{self.height} image needs {self.width * self.height} "
                f"pixels, got {pixels.size}"
            )
        if pixels.size and (pixels.min() < 0 or pixels.max() > self.maxval):
            raise InputError(f"pixel values must lie in [0, {self.maxval}]")
        pixels = pixels.reshape(self.height, self.width).astype(np.uint16)
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def maxval(self) -> int:
        return 2**self.bits - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            (self.width, self.height, self.bits)
            == (other.width, other.height, other.bits)
            and np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None

    @classmethod
    def from_array(cls, pixels: Any, bits: int) -> "GrayImage":
        pixels = np.asarray(pixels)
        if pixels.ndim != 2:
            raise InputError(f"image array must be 2-D, got shape {pixels.shape}")
        return cls(pixels.shape[1], pixels.shape[0], bits, pixels)


def bits_for_maxval(maxval: int) -> int:
    """Bit depth whose top value is maxval; other maxvals are not supported."""
    bits = int(maxval).bit_length()
    if maxval < 1 or maxval != 2**bits - 1 or bits > MAX_BITS:
        raise ImageFormatError(f"unsupported maxval {maxval} (expected 2**bits - 1)")
    return bits


def _pgm_header(data: bytes, path: str) -> tuple[list[int], int]:
    """Width, height, maxval and the raster offset of a P5 file."""
    fields: list[int] = []
    pos = len(PGM_MAGIC)
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and data[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            if pos >= len(data):
                raise OSError(f"{path}: truncated PGM header")
            raise ImageFormatError(f"{path}: malformed PGM header")
        fields.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise OSError(f"{path}: truncated PGM header")
    # exactly one whitespace byte separates maxval from the raster
    return fields, pos + 1


def _read_pgm(data: bytes, path: str) -> GrayImage:
    (width, height, maxval), offset = _pgm_header(data, path)
    bits = bits_for_maxval(maxval)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    size = width * height * dtype.itemsize
    if len(data) - offset < size:
        raise OSError(f"{path}: truncated raster ({len(data) - offset} of {size} bytes)")
    pixels = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    if pixels.size and pixels.max() > maxval:
        raise ImageFormatError(f"{path}: pixel value {pixels.max()} exceeds maxval {maxval}")
    return GrayImage(width, height, bits, pixels.astype(np.uint16))


def _read_png(data: bytes, path: str) -> GrayImage:
    try:
        width, height, rows, info = png.Reader(bytes=data).read()
        pixels = np.vstack([np.asarray(row, dtype=np.uint16) for row in rows])
    except png.Error as err:
        raise ImageFormatError(f"{path}: png decoding error: {err}") from err
    if not info.get("greyscale") or info.get("alpha") or info.get("palette"):
        raise ImageFormatError(f"{path}: colour PNG input is not supported")
    if info["bitdepth"] not in PNG_DEPTHS:
        raise ImageFormatError(f"{path}: unsupported PNG bit depth {info['bitdepth']}")
    return GrayImage(width, height, info["bitdepth"], pixels)


def read_image(path: str) -> GrayImage:
    """Read a P5 PGM or grayscale PNG; the bit depth follows maxval or the PNG depth."""
    with open(path, "rb") as f:
        data = f.read()
    if data.startswith(PGM_MAGIC):
        return _read_pgm(data, path)
    if data.startswith(PNG_MAGIC):
        return _read_png(data, path)
    raise ImageFormatError(f"{path}: not a binary PGM (P5) or PNG file")


def encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n{img.maxval}\n".encode("ascii")
    dtype = ">u2" if img.maxval > 255 else "u1"
    return header + img.pixels.astype(dtype).tobytes()


def encode_png(img: GrayImage) -> bytes:
    if img.bits not in PNG_DEPTHS:
        raise ImageFormatError(f"PNG stores 8 or 16 bits; write {img.bits}-bit images as .pgm")
    buffer = io.BytesIO()
    writer = png.Writer(img.width, img.height, greyscale=True, bitdepth=img.bits)
    writer.write(buffer, img.pixels.tolist())
    return buffer.getvalue()


def write_image(img: GrayImage, path: str) -> None:
    """Write PNG for a .png suffix, otherwise PGM."""
    data = encode_png(img) if path.lower().endswith(".png") else encode_pgm(img)
    with open(path, "wb") as f:
        f.write(data)


def write_mask(mask: Any, path: str) -> None:
    """Write a binary mask as an 8-bit image with values 0 and 255."""
    mask = np.asarray(mask).astype(bool)
    write_image(GrayImage.from_array(np.where(mask, MASK_ON, 0), 8), path)


def read_mask(path: str) -> np.ndarray:
    return read_image(path).pixels > 0
