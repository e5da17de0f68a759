"""Depth rescaling and fusion of an object depth patch into a background map.

The object's depth patch is shifted so its anchor pixel (center of the
mask's bounding box) lands on the target depth, optionally scaling its
internal relief by `alpha`, then written into the location box of the
background map. Under the default `nearest_wins` rule the fused map keeps
whichever surface is nearer (pointwise max), so background occluders stay
in front of the inserted object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import BBoxOutOfFrame, DimensionMismatch, EmptyMask, OutOfRange
from .resample import resize_float, resize_mask
from .types import BBox, DepthMap, Location25D, Mask, center_pixel

__all__ = [
    "FusionRequest",
    "FusionResult",
    "anchor_depth",
    "rescale_object_depth",
    "fuse",
]

FusionMode = Literal["place", "replace", "id_transfer", "inpaint"]
OcclusionRule = Literal["nearest_wins", "overwrite"]

FUSION_MODES = ("place", "replace", "id_transfer", "inpaint")


@dataclass(frozen=True)
class FusionRequest:
    bg_depth: DepthMap
    obj_depth: DepthMap
    obj_mask: Mask
    location: Location25D
    mode: FusionMode = "place"
    alpha: float = 1.0
    occlusion_rule: OcclusionRule = "nearest_wins"

    def __post_init__(self):
        if self.obj_depth.size != self.obj_mask.size:
            raise DimensionMismatch(
                f"object depth {self.obj_depth.size} and mask {self.obj_mask.size} differ"
            )
        if self.mode not in FUSION_MODES:
            raise OutOfRange(f"unknown fusion mode {self.mode!r}")
        if self.occlusion_rule not in ("nearest_wins", "overwrite"):
            raise OutOfRange(f"unknown occlusion rule {self.occlusion_rule!r}")


@dataclass(frozen=True)
class FusionResult:
    fused_depth: DepthMap
    scene_mask: Mask        # region the compositor must synthesize
    placed_obj_mask: Mask   # object footprint in the background frame


def anchor_depth(depth: DepthMap, box: BBox) -> float:
    """Depth value at the pixel containing the box center."""
    col, row = center_pixel(box.center, depth.width, depth.height)
    return float(depth.data[row, col])


def _mask_bbox(mask_bool: np.ndarray) -> tuple[int, int, int, int]:
    rows = np.any(mask_bool, axis=1)
    cols = np.any(mask_bool, axis=0)
    r0, r1 = np.nonzero(rows)[0][[0, -1]]
    c0, c1 = np.nonzero(cols)[0][[0, -1]]
    return int(c0), int(r0), int(c1), int(r1)  # inclusive pixel indices


def _shift_to_target(
    depth_arr: np.ndarray, mask_bool: np.ndarray, target_d: float, alpha: float
) -> np.ndarray:
    """Shift masked depth so the anchor pixel equals target_d; zero elsewhere."""
    c0, r0, c1, r1 = _mask_bbox(mask_bool)
    # Center pixel of the mask's bounding box; masked median if the mask
    # does not cover it (donut-shaped objects).
    ac, ar = (c0 + c1 + 1) // 2, (r0 + r1 + 1) // 2
    if mask_bool[ar, ac]:
        anchor = float(depth_arr[ar, ac])
    else:
        anchor = float(np.median(depth_arr[mask_bool]))
    out = np.zeros_like(depth_arr, dtype=np.float32)
    shifted = np.clip(target_d + alpha * (depth_arr - anchor), 0.0, 1.0)
    out[mask_bool] = shifted[mask_bool]
    return out


def rescale_object_depth(
    obj_depth: DepthMap, obj_mask: Mask, target_d: float, alpha: float = 1.0
) -> DepthMap:
    """Move the object's anchor depth to `target_d`, keeping alpha-scaled relief.

    The anchor is the depth at the center pixel of the mask's bounding box
    (masked median when that pixel lies outside the mask). Unmasked pixels
    are set to 0; results clamp to [0, 1].
    """
    if not (0.0 <= target_d <= 1.0):
        raise OutOfRange(f"target depth {target_d} outside [0,1]")
    if obj_depth.size != obj_mask.size:
        raise DimensionMismatch("object depth and mask dimensions differ")
    mask_bool = obj_mask.as_bool()
    if not mask_bool.any():
        raise EmptyMask("cannot rescale with an empty mask")
    return DepthMap(_shift_to_target(obj_depth.data, mask_bool, target_d, alpha))


def _box_region(box: BBox, width: int, height: int) -> tuple[int, int, int, int]:
    px1, py1, px2, py2 = box.to_pixels(width, height)
    if px2 - px1 < 1 or py2 - py1 < 1:
        raise BBoxOutOfFrame(
            f"location box {box.as_list()} collapses to zero pixels in {width}x{height}"
        )
    return px1, py1, px2, py2


def fuse(req: FusionRequest) -> FusionResult:
    """Fuse the object's rescaled depth into the background at the location.

    place:    inside the placed mask, nearest_wins keeps max(bg, obj);
              overwrite stamps the object unconditionally.
    replace:  the whole box is rewritten: object pixels get the rescaled
              depth, the rest of the box gets 0.
    id_transfer / inpaint: depth passes through unchanged; only the
              generation mask is produced from the provided object mask.

    Pixels outside the location box are bit-identical to the background
    in every mode.
    """
    bg = req.bg_depth
    width, height = bg.size
    px1, py1, px2, py2 = _box_region(req.location.bbox, width, height)
    bw, bh = px2 - px1, py2 - py1

    mask_bool = req.obj_mask.as_bool()
    if not mask_bool.any():
        raise EmptyMask("object mask is empty")

    if req.mode in ("id_transfer", "inpaint"):
        # Depth is untouched; the caller's mask defines the synthesis region.
        if req.obj_mask.size == bg.size:
            scene = req.obj_mask.data if req.obj_mask.binary else req.obj_mask.as_bool().astype(np.uint8)
        else:
            scene = np.zeros((height, width), dtype=np.uint8)
            scene[py1:py2, px1:px2] = resize_mask(
                mask_bool.astype(np.uint8), (bw, bh)
            )
        scene_mask = Mask(scene, kind=req.obj_mask.kind)
        if scene_mask.is_empty():
            raise EmptyMask("resized object mask is empty")
        return FusionResult(fused_depth=bg, scene_mask=scene_mask,
                            placed_obj_mask=scene_mask)

    # place / replace: resize the object patch into the box, then rescale
    # so the anchor pixel of the placed patch equals the target depth.
    patch_mask = resize_mask(mask_bool.astype(np.uint8), (bw, bh)).astype(bool)
    if not patch_mask.any():
        raise EmptyMask("object mask vanished when resized into the location box")
    patch_depth = resize_float(req.obj_depth.data, (bw, bh))
    obj_prime = _shift_to_target(patch_depth, patch_mask, req.location.depth, req.alpha)

    fused = bg.data.copy()
    region = fused[py1:py2, px1:px2]
    if req.mode == "place":
        if req.occlusion_rule == "nearest_wins":
            region[patch_mask] = np.maximum(region[patch_mask], obj_prime[patch_mask])
        else:
            region[patch_mask] = obj_prime[patch_mask]
    else:  # replace: zero outside the object within the box
        region[:] = 0.0
        region[patch_mask] = obj_prime[patch_mask]

    scene = np.zeros((height, width), dtype=np.uint8)
    scene[py1:py2, px1:px2] = 1
    placed = np.zeros((height, width), dtype=np.uint8)
    placed[py1:py2, px1:px2] = patch_mask.astype(np.uint8)

    return FusionResult(
        fused_depth=DepthMap(fused),
        scene_mask=Mask(scene, kind="box"),
        placed_obj_mask=Mask(placed, kind=req.obj_mask.kind),
    )
