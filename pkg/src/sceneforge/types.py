"""Core value types: rasters, depth maps, masks, boxes, 2.5D locations.

Conventions used throughout the package:
  * rasters are numpy arrays, row-major, origin top-left;
  * images are uint8 with shape (H, W) or (H, W, 3|4);
  * float maps are float32 with shape (H, W);
  * depth is inverse-style: larger value = nearer to the camera;
  * bounding boxes are normalized to [0, 1] everywhere internally, pixel
    coordinates appear only at I/O edges.

All containers are frozen dataclasses and their arrays are marked
read-only, so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .errors import DimensionMismatch, NonFiniteSample, OutOfRange

__all__ = [
    "Raster",
    "DepthMap",
    "Mask",
    "BBox",
    "Location25D",
    "center_pixel",
]

MaskKind = Literal["segmentation", "augmented", "box"]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Raster:
    """Pixel container: uint8 image (1/3/4 channels) or float32 map (1 channel).

    data: (H, W) for single channel, (H, W, C) with C in {3, 4} otherwise.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if arr.ndim not in (2, 3):
            raise DimensionMismatch(f"raster must be 2D or 3D, got ndim={arr.ndim}")
        if arr.ndim == 3 and arr.shape[2] not in (3, 4):
            raise DimensionMismatch(f"channels must be 1, 3 or 4, got {arr.shape[2]}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"raster must be at least 1x1, got {arr.shape}")
        if arr.dtype == np.uint8:
            pass
        elif arr.dtype in (np.float32, np.float64):
            if arr.ndim != 2:
                raise DimensionMismatch("float rasters are single-channel")
            if not np.all(np.isfinite(arr)):
                raise NonFiniteSample("float raster contains NaN/Inf")
            arr = arr.astype(np.float32)
        else:
            raise DimensionMismatch(f"unsupported raster dtype {arr.dtype}")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    @property
    def size(self) -> tuple[int, int]:
        """(width, height) in pixels."""
        return self.width, self.height


@dataclass(frozen=True)
class DepthMap:
    """Single-channel float32 raster with every value in [0, 1].

    Larger value = nearer to the camera. `clamped` records whether any
    out-of-range source sample was clamped during construction (the clamp
    is never silent).
    """

    data: np.ndarray
    clamped: bool = False

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise DimensionMismatch(f"depth map must be 2D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"depth map must be at least 1x1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteSample("depth map contains NaN/Inf")
        arr = arr.astype(np.float32)
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise OutOfRange(
                "depth values outside [0,1]; use DepthMap.from_array to clamp"
            )
        object.__setattr__(self, "data", _freeze(arr))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "DepthMap":
        """Build a DepthMap, clamping out-of-range values and flagging the clamp."""
        arr = np.asarray(arr, dtype=np.float32)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteSample("depth map contains NaN/Inf")
        clamped = bool(arr.min() < 0.0 or arr.max() > 1.0)
        if clamped:
            arr = np.clip(arr, 0.0, 1.0)
        return cls(arr, clamped=clamped)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        return self.width, self.height


@dataclass(frozen=True)
class Mask:
    """Single-channel mask: binary uint8 {0,1} or soft float32 [0,1]."""

    data: np.ndarray
    kind: MaskKind = "segmentation"

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise DimensionMismatch(f"mask must be 2D, got shape {arr.shape}")
        if arr.dtype == np.bool_:
            arr = arr.astype(np.uint8)
        if arr.dtype == np.uint8:
            if arr.max(initial=0) > 1:
                raise OutOfRange("binary mask must contain only {0,1}")
        elif arr.dtype in (np.float32, np.float64):
            if not np.all(np.isfinite(arr)):
                raise NonFiniteSample("soft mask contains NaN/Inf")
            if arr.min() < 0.0 or arr.max() > 1.0:
                raise OutOfRange("soft mask values must lie in [0,1]")
            arr = arr.astype(np.float32)
        else:
            raise DimensionMismatch(f"unsupported mask dtype {arr.dtype}")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def binary(self) -> bool:
        return self.data.dtype == np.uint8

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        return self.width, self.height

    def is_empty(self) -> bool:
        return not bool(np.any(self.data))

    def as_bool(self) -> np.ndarray:
        return self.data > (0 if self.binary else 0.5)

    def with_kind(self, kind: MaskKind) -> "Mask":
        return replace(self, kind=kind)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in normalized coordinates, origin top-left."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0.0 or v > 1.0:
                raise OutOfRange(f"bbox coordinate {name}={v} outside [0,1]")
            object.__setattr__(self, name, v)
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise OutOfRange(
                f"bbox must satisfy x1<x2 and y1<y2, got "
                f"({self.x1},{self.y1},{self.x2},{self.y2})"
            )

    @property
    def w(self) -> float:
        return self.x2 - self.x1

    @property
    def h(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    def to_pixels(self, width: int, height: int) -> tuple[int, int, int, int]:
        """Edge coordinates in pixel units (x1, y1, x2, y2), rounded."""
        return (
            int(round(self.x1 * width)),
            int(round(self.y1 * height)),
            int(round(self.x2 * width)),
            int(round(self.y2 * height)),
        )

    @classmethod
    def from_pixels(
        cls, x1: float, y1: float, x2: float, y2: float, width: int, height: int
    ) -> "BBox":
        return cls(x1 / width, y1 / height, x2 / width, y2 / height)

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]

    @classmethod
    def from_list(cls, coords) -> "BBox":
        if len(coords) != 4:
            raise OutOfRange(f"bbox needs 4 coordinates, got {len(coords)}")
        return cls(*(float(c) for c in coords))


@dataclass(frozen=True)
class Location25D:
    """2D bounding box plus a scalar depth in [0, 1] (larger = nearer)."""

    bbox: BBox
    depth: float

    def __post_init__(self):
        d = float(self.depth)
        if not np.isfinite(d) or d < 0.0 or d > 1.0:
            raise OutOfRange(f"depth={d} outside [0,1]")
        object.__setattr__(self, "depth", d)

    def to_json(self) -> dict:
        return {"bbox": self.bbox.as_list(), "depth": self.depth}

    @classmethod
    def from_json(cls, obj: dict) -> "Location25D":
        return cls(bbox=BBox.from_list(obj["bbox"]), depth=float(obj["depth"]))


def center_pixel(point: tuple[float, float], width: int, height: int) -> tuple[int, int]:
    """Index (col, row) of the pixel containing a normalized point.

    Points on the right/bottom frame edge clamp to the last pixel.
    """
    cx, cy = point
    col = min(width - 1, max(0, int(cx * width)))
    row = min(height - 1, max(0, int(cy * height)))
    return col, row
