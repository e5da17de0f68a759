"""Zoom-in cropping and box/depth accuracy metrics.

The zoom-in strategy expands a location box into a square (amplification
ratio 2.0 by default), shifts it back into frame if it pokes out, clamps
its side to the short image dimension, and records the resize factor to
the working resolution (512 by default).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BBoxOutOfFrame, DegenerateBox, OutOfRange
from .resample import resize_float, resize_image, resize_mask
from .types import BBox, DepthMap, Mask, Raster

__all__ = [
    "CropSpec",
    "zoom_in",
    "crop_raster",
    "crop_depth",
    "crop_mask",
    "paste_crop_back",
    "bbox_to_crop",
    "iou",
    "bbox_mse",
    "depth_mse",
    "build_eval_report",
]


@dataclass(frozen=True)
class CropSpec:
    """Square pixel crop plus the resize factor to the target resolution."""

    square: tuple[int, int, int, int]  # x1, y1, x2, y2 in pixels
    scale: float
    target_resolution: int = 512

    @property
    def side(self) -> int:
        return self.square[2] - self.square[0]

    def to_json(self) -> dict:
        return {"square": list(self.square), "scale": self.scale,
                "target_resolution": self.target_resolution}

    @classmethod
    def from_json(cls, obj: dict) -> "CropSpec":
        return cls(square=tuple(int(v) for v in obj["square"]),
                   scale=float(obj["scale"]),
                   target_resolution=int(obj["target_resolution"]))


def zoom_in(
    image_size: tuple[int, int],
    box: BBox,
    ratio: float = 2.0,
    target: int = 512,
) -> CropSpec:
    """Expand `box` into a square crop of side ratio*max(box_w, box_h) pixels.

    The square is centered on the box center, shifted (not truncated) to
    stay inside the frame, and its side is clamped to min(W, H). The
    resulting crop is resized to `target` x `target` downstream.
    """
    if ratio < 1.0:
        raise OutOfRange(f"zoom ratio must be >= 1, got {ratio}")
    width, height = image_size
    px1, py1, px2, py2 = box.to_pixels(width, height)
    bw, bh = px2 - px1, py2 - py1
    if bw <= 0 or bh <= 0:
        raise DegenerateBox(f"box {box.as_list()} has zero pixel area in {width}x{height}")

    side = int(round(ratio * max(bw, bh)))
    side = min(side, min(width, height))
    side = max(side, 1)
    cx, cy = (px1 + px2) / 2.0, (py1 + py2) / 2.0
    x1 = int(np.floor(cx - side / 2.0 + 0.5))
    y1 = int(np.floor(cy - side / 2.0 + 0.5))
    x1 = min(max(x1, 0), width - side)
    y1 = min(max(y1, 0), height - side)
    return CropSpec(square=(x1, y1, x1 + side, y1 + side), scale=target / side,
                    target_resolution=target)


def crop_raster(raster: Raster, spec: CropSpec) -> Raster:
    x1, y1, x2, y2 = spec.square
    patch = raster.data[y1:y2, x1:x2]
    t = spec.target_resolution
    if raster.data.dtype == np.uint8:
        return Raster(resize_image(patch, (t, t)))
    return Raster(resize_float(patch, (t, t)))


def crop_depth(depth: DepthMap, spec: CropSpec) -> DepthMap:
    x1, y1, x2, y2 = spec.square
    t = spec.target_resolution
    return DepthMap.from_array(resize_float(depth.data[y1:y2, x1:x2], (t, t)))


def crop_mask(mask: Mask, spec: CropSpec) -> Mask:
    x1, y1, x2, y2 = spec.square
    t = spec.target_resolution
    return Mask(resize_mask(mask.data[y1:y2, x1:x2], (t, t)), kind=mask.kind)


def paste_crop_back(scene: Raster, spec: CropSpec, crop: Raster) -> Raster:
    """Resize the crop back to the square side and paste it into the scene."""
    x1, y1, x2, y2 = spec.square
    side = spec.side
    if crop.data.dtype == np.uint8:
        patch = resize_image(crop.data, (side, side))
    else:
        patch = resize_float(crop.data, (side, side))
    out = scene.data.copy()
    out[y1:y2, x1:x2] = patch
    return Raster(out)


def bbox_to_crop(box: BBox, image_size: tuple[int, int], spec: CropSpec) -> BBox:
    """Re-express a frame-normalized box in the crop's normalized coordinates."""
    width, height = image_size
    x1, y1, x2, y2 = spec.square
    side = spec.side
    nx1 = (box.x1 * width - x1) / side
    ny1 = (box.y1 * height - y1) / side
    nx2 = (box.x2 * width - x1) / side
    ny2 = (box.y2 * height - y1) / side
    if nx1 < -1e-9 or ny1 < -1e-9 or nx2 > 1 + 1e-9 or ny2 > 1 + 1e-9:
        raise BBoxOutOfFrame(f"box {box.as_list()} escapes crop square {spec.square}")
    clip = lambda v: min(1.0, max(0.0, v))
    return BBox(clip(nx1), clip(ny1), clip(nx2), clip(ny2))


# --- metrics -----------------------------------------------------------------


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two normalized boxes, in [0, 1]."""
    ix1, iy1 = max(a.x1, b.x1), max(a.y1, b.y1)
    ix2, iy2 = min(a.x2, b.x2), min(a.y2, b.y2)
    iw, ih = max(0.0, ix2 - ix1), max(0.0, iy2 - iy1)
    inter = iw * ih
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def bbox_mse(pred: BBox, gt: BBox) -> float:
    """Mean squared difference over the four normalized corner coordinates."""
    diffs = np.array(pred.as_list()) - np.array(gt.as_list())
    return float(np.mean(diffs * diffs))


def depth_mse(pred: float, gt: float) -> float:
    for name, v in (("pred", pred), ("gt", gt)):
        if not (0.0 <= v <= 1.0):
            raise OutOfRange(f"depth {name}={v} outside [0,1]")
    return (pred - gt) ** 2


def build_eval_report(
    pairs: Sequence[tuple[BBox, BBox]],
    depth_pairs: Sequence[tuple[float, float]],
    extra: dict | None = None,
) -> dict:
    """Aggregate per-record metrics into the evaluation report payload."""
    if len(pairs) != len(depth_pairs) or not pairs:
        raise OutOfRange("need equal, nonzero numbers of box and depth pairs")
    report = {
        "n": len(pairs),
        "bbox_mse": float(np.mean([bbox_mse(p, g) for p, g in pairs])),
        "iou_mean": float(np.mean([iou(p, g) for p, g in pairs])),
        "depth_mse": float(np.mean([depth_mse(p, g) for p, g in depth_pairs])),
    }
    if extra:
        report.update(extra)
    return report
