"""Raster codecs: PFM for exact float depth, PNG for images and 16-bit depth.

PFM layout: ``Pf\\n{w} {h}\\n{scale}\\n`` followed by ``w*h`` float32
samples in bottom-up row order; a negative scale marks little-endian
sample order. Only the single-channel "Pf" variant is supported.

16-bit depth PNGs map a depth value d to ``floor(d * 65535 + 0.5)``
(round half up), so the quantization error is at most 1/65535 per sample.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    DimensionOverflow,
    IoFailure,
    MalformedHeader,
    NonFiniteSample,
    UnsupportedBitDepth,
)
from .types import DepthMap, Mask, Raster

__all__ = [
    "read_pfm",
    "write_pfm",
    "read_pfm_bytes",
    "write_pfm_bytes",
    "read_image",
    "write_image",
    "read_depth_png16",
    "write_depth_png16",
    "read_mask",
    "write_mask",
    "image_to_png_bytes",
    "mask_to_png_bytes",
    "mask_from_png_bytes",
]

# Generous but finite: 32768 px per side, 2^26 samples (256 MiB of floats).
MAX_SIDE = 32768
MAX_SAMPLES = 1 << 26


def _read_header_line(stream: io.BufferedIOBase) -> bytes:
    line = bytearray()
    while True:
        ch = stream.read(1)
        if not ch:
            raise MalformedHeader("unexpected end of file inside PFM header")
        if ch == b"\n":
            return bytes(line)
        line += ch
        if len(line) > 128:
            raise MalformedHeader("PFM header line too long")


def read_pfm_bytes(payload: bytes) -> DepthMap:
    """Decode a single-channel PFM byte string into a DepthMap.

    Out-of-range samples are clamped to [0,1] and flagged on the result
    (``DepthMap.clamped``); non-finite samples are an error.
    """
    stream = io.BytesIO(payload)
    magic = _read_header_line(stream).strip()
    if magic == b"PF":
        raise MalformedHeader("3-channel 'PF' files are not supported, expected 'Pf'")
    if magic != b"Pf":
        raise MalformedHeader(f"bad PFM magic {magic!r}, expected b'Pf'")
    dims = _read_header_line(stream).split()
    if len(dims) != 2:
        raise MalformedHeader(f"expected 'width height', got {dims!r}")
    try:
        width, height = int(dims[0]), int(dims[1])
    except ValueError as exc:
        raise MalformedHeader(f"non-integer PFM dimensions {dims!r}") from exc
    if width < 1 or height < 1:
        raise MalformedHeader(f"PFM dimensions must be >= 1, got {width}x{height}")
    if width > MAX_SIDE or height > MAX_SIDE or width * height > MAX_SAMPLES:
        raise DimensionOverflow(f"PFM dimensions {width}x{height} exceed supported range")
    try:
        scale = float(_read_header_line(stream).strip())
    except ValueError as exc:
        raise MalformedHeader("PFM scale line is not a number") from exc
    if scale == 0.0:
        raise MalformedHeader("PFM scale must be nonzero")

    body = stream.read()
    expected = width * height * 4
    if len(body) != expected:
        raise MalformedHeader(
            f"PFM body has {len(body)} bytes, expected {expected} for {width}x{height}"
        )
    dtype = "<f4" if scale < 0 else ">f4"
    samples = np.frombuffer(body, dtype=dtype).astype(np.float32)
    if not np.all(np.isfinite(samples)):
        raise NonFiniteSample("PFM contains NaN/Inf samples")
    rows = samples.reshape(height, width)
    return DepthMap.from_array(rows[::-1])  # bottom-up storage order


def write_pfm_bytes(depth: DepthMap) -> bytes:
    header = f"Pf\n{depth.width} {depth.height}\n-1.0\n".encode("ascii")
    body = depth.data[::-1].astype("<f4").tobytes()
    return header + body


def read_pfm(path: str | Path) -> DepthMap:
    try:
        payload = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return read_pfm_bytes(payload)


def write_pfm(depth: DepthMap, path: str | Path) -> None:
    try:
        Path(path).write_bytes(write_pfm_bytes(depth))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# --- PNG ---------------------------------------------------------------------


def _raster_to_pil(raster: Raster) -> Image.Image:
    if raster.data.dtype != np.uint8:
        raise UnsupportedBitDepth(
            "PNG images must be 8-bit; use write_pfm/write_depth_png16 for float maps"
        )
    return Image.fromarray(raster.data)


def write_image(raster: Raster, path: str | Path) -> None:
    """Write an 8-bit raster (L/RGB/RGBA) as a lossless PNG."""
    img = _raster_to_pil(raster)
    try:
        img.save(Path(path), format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def image_to_png_bytes(raster: Raster) -> bytes:
    buf = io.BytesIO()
    _raster_to_pil(raster).save(buf, format="PNG")
    return buf.getvalue()


def read_image(source: str | Path | bytes) -> Raster:
    """Read an 8-bit PNG (or other PIL-decodable image) into a Raster."""
    try:
        if isinstance(source, bytes):
            img = Image.open(io.BytesIO(source))
        else:
            img = Image.open(Path(source))
        img.load()
    except OSError as exc:
        raise IoFailure(f"cannot read image: {exc}") from exc
    if img.mode in ("I", "I;16", "F"):
        raise UnsupportedBitDepth(
            f"{img.mode} images are not 8-bit; use read_depth_png16 for 16-bit depth"
        )
    if img.mode == "P":
        img = img.convert("RGBA" if "transparency" in img.info else "RGB")
    elif img.mode == "LA":
        img = img.convert("RGBA")
    elif img.mode not in ("L", "RGB", "RGBA"):
        img = img.convert("RGB")
    return Raster(np.asarray(img))


def write_depth_png16(depth: DepthMap, path: str | Path) -> None:
    """Quantize a depth map to 16-bit grayscale PNG (value = d * 65535)."""
    q = np.floor(depth.data.astype(np.float64) * 65535.0 + 0.5).astype(np.uint16)
    try:
        Image.fromarray(q).save(Path(path), format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_depth_png16(path: str | Path) -> DepthMap:
    try:
        img = Image.open(Path(path))
        img.load()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if img.mode not in ("I", "I;16"):
        raise UnsupportedBitDepth(f"expected 16-bit grayscale PNG, got mode {img.mode}")
    arr = np.asarray(img).astype(np.float64)
    if arr.max(initial=0) > 65535:
        raise UnsupportedBitDepth("samples exceed 16-bit range")
    return DepthMap.from_array((arr / 65535.0).astype(np.float32))


def _mask_to_raster(mask: Mask) -> Raster:
    if mask.binary:
        arr = (mask.data * 255).astype(np.uint8)
    else:
        arr = np.floor(mask.data.astype(np.float64) * 255.0 + 0.5).astype(np.uint8)
    return Raster(arr)


def _raster_to_mask(raster: Raster, kind: str) -> Mask:
    arr = raster.data
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    values = np.unique(arr)
    if np.all(np.isin(values, (0, 255))):
        return Mask((arr > 0).astype(np.uint8), kind=kind)  # type: ignore[arg-type]
    return Mask((arr / 255.0).astype(np.float32), kind=kind)  # type: ignore[arg-type]


def write_mask(mask: Mask, path: str | Path) -> None:
    """Binary masks as {0,255} 8-bit PNG; soft masks quantized to 8-bit."""
    write_image(_mask_to_raster(mask), path)


def read_mask(path: str | Path, kind: str = "segmentation") -> Mask:
    return _raster_to_mask(read_image(path), kind)


def mask_to_png_bytes(mask: Mask) -> bytes:
    return image_to_png_bytes(_mask_to_raster(mask))


def mask_from_png_bytes(data: bytes, kind: str = "segmentation") -> Mask:
    return _raster_to_mask(read_image(data), kind)
