"""High-frequency detail maps, mask-shape augmentation, and collage stitching.

The detail map is the color-free Sobel edge response of the object image,
masked by a shape-augmented mask so contour-adjacent texture leaks no
information about the exact silhouette. Mask augmentation is a 5-level
coarsening ladder from the exact segmentation up to its bounding box,
mimicking a casual user brush:

    L1 = segmentation
    L2 = dilate(L1, r)
    L3 = convex_hull(L2)
    L4 = dilate(L3, r)
    L5 = bounding box of L4

with r = round(dilate_frac * max(W, H)). Each level contains the previous
one by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .errors import BBoxOutOfFrame, DimensionMismatch, EmptyMask, OutOfRange
from .resample import resize_float
from .types import BBox, Mask, Raster

__all__ = ["HFMap", "MASK_LEVELS", "hf_extract", "augment_mask", "stitch_collage"]

MASK_LEVELS = (1, 2, 3, 4, 5)

# Max response of the pair of 3x3 Sobel kernels on an 8-bit image:
# each kernel's positive taps sum to 4, so |Gh| + |Gv| <= 8 * 255.
_SOBEL_MAX = 8.0 * 255.0

_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float32)  # ITU-R 601


@dataclass(frozen=True)
class HFMap:
    """Single-channel high-frequency response in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise DimensionMismatch(f"HF map must be 2D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise OutOfRange("HF map contains NaN/Inf")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise OutOfRange("HF map values must lie in [0,1]")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def _to_luma(image: Raster) -> np.ndarray:
    arr = image.data
    if arr.ndim == 2:
        return arr.astype(np.float32)
    rgb = arr[:, :, :3].astype(np.float32)
    return rgb @ _LUMA


def hf_extract(obj_image: Raster, aug_mask: Mask) -> HFMap:
    """Masked Sobel edge response of the object image, normalized to [0, 1].

    The image is reduced to luma first (color is deliberately discarded),
    filtered with the 3x3 horizontal/vertical Sobel kernels under
    replicate padding, and the |Gh| + |Gv| magnitude is divided by the
    kernels' maximum response before the mask is applied.
    """
    if (obj_image.width, obj_image.height) != (aug_mask.width, aug_mask.height):
        raise DimensionMismatch(
            f"image {obj_image.size} and mask {aug_mask.size} dimensions differ"
        )
    gray = _to_luma(obj_image)
    gx = cv2.Sobel(gray, cv2.CV_32F, 1, 0, ksize=3, borderType=cv2.BORDER_REPLICATE)
    gy = cv2.Sobel(gray, cv2.CV_32F, 0, 1, ksize=3, borderType=cv2.BORDER_REPLICATE)
    response = (np.abs(gx) + np.abs(gy)) / _SOBEL_MAX
    mask = aug_mask.data.astype(np.float32)
    return HFMap(np.clip(response, 0.0, 1.0) * mask)


def _disk(radius: int) -> np.ndarray:
    yy, xx = np.ogrid[-radius : radius + 1, -radius : radius + 1]
    return ((xx * xx + yy * yy) <= radius * radius).astype(np.uint8)


def _dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if radius < 1:
        return mask
    return cv2.dilate(mask, _disk(radius))


def _convex_fill(mask: np.ndarray) -> np.ndarray:
    pts = cv2.findNonZero(mask)
    hull = cv2.convexHull(pts)
    canvas = np.zeros_like(mask)
    cv2.fillConvexPoly(canvas, hull, 1)
    # Rasterization must never lose source pixels.
    return canvas | mask


def augment_mask(seg: Mask, level: int, dilate_frac: float = 0.02) -> Mask:
    """Coarsen a segmentation mask to the requested level (1..5)."""
    if level not in MASK_LEVELS:
        raise OutOfRange(f"mask level must be in {MASK_LEVELS}, got {level}")
    if not seg.binary:
        raise OutOfRange("mask augmentation requires a binary mask")
    src = seg.data
    if not src.any():
        raise EmptyMask("cannot augment an empty mask")
    if level == 1:
        return seg

    radius = int(round(dilate_frac * max(seg.width, seg.height)))
    out = _dilate(src, radius)
    if level >= 3:
        out = _convex_fill(out)
    if level >= 4:
        out = _dilate(out, radius)
    if level == 5:
        cols = np.any(out, axis=0).nonzero()[0]
        rows = np.any(out, axis=1).nonzero()[0]
        box = np.zeros_like(out)
        box[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1] = 1
        return Mask(box, kind="box")
    return Mask(out, kind="augmented")


def stitch_collage(scene: Raster, hf: HFMap, box: BBox) -> Raster:
    """Render the HF map as grayscale into the scene's location box.

    The HF map is resized bilinearly to the box extent; every scene pixel
    inside the box is replaced by round(value * 255) on all channels,
    pixels outside the box are untouched.
    """
    width, height = scene.size
    px1, py1, px2, py2 = box.to_pixels(width, height)
    if px2 - px1 < 1 or py2 - py1 < 1:
        raise BBoxOutOfFrame(
            f"collage box {box.as_list()} collapses to zero pixels in {width}x{height}"
        )
    patch = resize_float(hf.data, (px2 - px1, py2 - py1))
    gray = np.floor(np.clip(patch, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    out = scene.data.copy()
    if out.ndim == 2:
        out[py1:py2, px1:px2] = gray
    else:
        out[py1:py2, px1:px2] = gray[:, :, None]
    return Raster(out)
