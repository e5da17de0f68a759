"""Conditioning bundle for the compositor backend.

The bundle is everything the generative backend needs for one job: the
masked background, the detail collage, the fused depth, and the reference
object crop, all cropped to the working square and resized to the target
resolution (reference crop excepted, it is already square). It also
implements the control-map combination c = detail + lambda * depth, the
training-time condition-dropping schedule, and the classifier-free
guidance combiner eps_uc + s * (eps_c - eps_uc).

On disk a bundle is a directory:

    bundle/
      masked_scene.png
      collage.png
      fused_depth.pfm
      reference.png
      meta.json

meta.json carries lambda, guidance scale, fusion mode, dropped flags, the
source location, and the crop geometry needed to paste results back.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .detail import HFMap
from .errors import (
    DimensionMismatch,
    InvalidBundle,
    NonFiniteSample,
    SceneForgeError,
    ShapeMismatch,
)
from .fusion import FUSION_MODES, FusionResult
from .geometry import CropSpec, crop_depth, crop_raster, zoom_in
from .imageio import (
    image_to_png_bytes,
    read_image,
    read_pfm_bytes,
    write_image,
    write_pfm,
    write_pfm_bytes,
)
from .seeding import rng_for
from .types import DepthMap, Location25D, Raster

__all__ = [
    "DroppedFlags",
    "ConditioningBundle",
    "GuidanceArrays",
    "assemble_bundle",
    "combine_control_maps",
    "drop_conditions",
    "cfg_combine",
    "save_bundle",
    "load_bundle",
    "bundle_to_wire",
    "bundle_from_wire",
]


@dataclass(frozen=True)
class DroppedFlags:
    id: bool = False
    detail: bool = False
    depth: bool = False

    def to_json(self) -> dict:
        return {"id": self.id, "detail": self.detail, "depth": self.depth}

    @classmethod
    def from_json(cls, obj: dict) -> "DroppedFlags":
        return cls(bool(obj["id"]), bool(obj["detail"]), bool(obj["depth"]))


@dataclass(frozen=True)
class ConditioningBundle:
    masked_scene: Raster
    collage: Raster
    fused_depth: DepthMap
    reference_crop: Raster
    lam: float
    guidance_scale: float
    mode: str
    dropped: DroppedFlags
    location: Location25D
    crop: CropSpec
    frame_size: tuple[int, int]
    alpha: float = 1.0
    occlusion_rule: str = "nearest_wins"
    bundle_id: str = ""

    def __post_init__(self):
        w, h = self.masked_scene.width, self.masked_scene.height
        if (self.collage.width, self.collage.height) != (w, h):
            raise DimensionMismatch("collage size differs from masked scene")
        if self.fused_depth.data.shape != (h, w):
            raise DimensionMismatch("fused depth size differs from masked scene")
        if self.reference_crop.width != self.reference_crop.height:
            raise DimensionMismatch("reference crop must be square")
        if self.lam < 0:
            raise NonFiniteSample("lambda must be >= 0")
        if self.guidance_scale < 0:
            raise NonFiniteSample("guidance scale must be >= 0")
        if self.mode not in FUSION_MODES:
            raise InvalidBundle(f"unknown fusion mode {self.mode!r}")


def assemble_bundle(
    scene: Raster,
    fusion: FusionResult,
    hf_collage: Raster,
    ref_crop: Raster,
    lam: float,
    s: float,
    location: Location25D,
    mode: str,
    target_resolution: int = 512,
    ratio: float = 2.0,
    alpha: float = 1.0,
    occlusion_rule: str = "nearest_wins",
    bundle_id: str = "",
) -> ConditioningBundle:
    """Crop everything to the working square around the placement box.

    The masked scene is the input scene with the fusion scene-mask region
    zeroed; pixels outside that mask are bit-identical to the input.
    """
    w, h = scene.width, scene.height
    if fusion.fused_depth.data.shape != (h, w):
        raise DimensionMismatch("fusion result does not match scene frame")
    if (hf_collage.width, hf_collage.height) != (w, h):
        raise DimensionMismatch("collage does not match scene frame")

    data = scene.data.copy()
    m = fusion.scene_mask.as_bool()
    if m.shape != (h, w):
        raise DimensionMismatch("scene mask does not match scene frame")
    data[m] = 0
    masked = Raster(data)

    crop = zoom_in((w, h), location.bbox, ratio=ratio, target=target_resolution)
    return ConditioningBundle(
        masked_scene=crop_raster(masked, crop),
        collage=crop_raster(hf_collage, crop),
        fused_depth=crop_depth(fusion.fused_depth, crop),
        reference_crop=ref_crop,
        lam=float(lam),
        guidance_scale=float(s),
        mode=mode,
        dropped=DroppedFlags(),
        location=location,
        crop=crop,
        frame_size=(w, h),
        alpha=float(alpha),
        occlusion_rule=occlusion_rule,
        bundle_id=bundle_id,
    )


def combine_control_maps(detail: HFMap, depth: DepthMap, lam: float) -> np.ndarray:
    """Pointwise detail + lam * depth. Unclamped; consumers normalize."""
    if detail.data.shape != depth.data.shape:
        raise DimensionMismatch(
            f"detail {detail.data.shape} vs depth {depth.data.shape}")
    return detail.data + np.float32(lam) * depth.data


def drop_conditions(
    bundle: ConditioningBundle,
    p_id: float = 0.5,
    p_ctrl: float = 0.3,
    seed: int = 0,
) -> ConditioningBundle:
    """Training-time condition dropping.

    Three independent draws: the object-id condition (reference crop) is
    dropped with probability p_id, the detail collage and the depth map
    each with probability p_ctrl. Dropped payloads become all-zero
    rasters and the matching flag is set. Pure in (bundle, probs, seed).
    """
    for name, p in (("p_id", p_id), ("p_ctrl", p_ctrl)):
        if not 0.0 <= p <= 1.0:
            raise NonFiniteSample(f"{name} must lie in [0,1], got {p}")
    rng = rng_for(seed, "drop", bundle.bundle_id)
    draws = rng.random(3)
    drop_id = bool(draws[0] < p_id)
    drop_detail = bool(draws[1] < p_ctrl)
    drop_depth = bool(draws[2] < p_ctrl)
    if not (drop_id or drop_detail or drop_depth):
        return bundle

    ref = bundle.reference_crop
    if drop_id:
        ref = Raster(np.zeros_like(bundle.reference_crop.data))
    collage = bundle.collage
    if drop_detail:
        collage = Raster(np.zeros_like(bundle.collage.data))
    depth = bundle.fused_depth
    if drop_depth:
        depth = DepthMap(np.zeros_like(bundle.fused_depth.data))
    return replace(
        bundle,
        reference_crop=ref,
        collage=collage,
        fused_depth=depth,
        dropped=DroppedFlags(id=drop_id, detail=drop_detail, depth=drop_depth),
    )


@dataclass(frozen=True)
class GuidanceArrays:
    eps_uncond: np.ndarray
    eps_cond: np.ndarray
    s: float

    def __post_init__(self):
        if self.eps_uncond.shape != self.eps_cond.shape:
            raise ShapeMismatch(
                f"{self.eps_uncond.shape} vs {self.eps_cond.shape}")
        if not (np.isfinite(self.eps_uncond).all()
                and np.isfinite(self.eps_cond).all()):
            raise NonFiniteSample("guidance arrays must be finite")


def cfg_combine(g: GuidanceArrays) -> np.ndarray:
    # float64 so s=1 reproduces eps_cond (and s=0 eps_uncond) to <1e-12
    # even when callers pass float32 predictions.
    uc = np.asarray(g.eps_uncond, dtype=np.float64)
    c = np.asarray(g.eps_cond, dtype=np.float64)
    return uc + np.float64(g.s) * (c - uc)


# --- persistence ----------------------------------------------------------------

def _meta_json(bundle: ConditioningBundle) -> dict:
    return {
        "lambda": bundle.lam,
        "guidance_scale": bundle.guidance_scale,
        "mode": bundle.mode,
        "dropped": bundle.dropped.to_json(),
        "location": bundle.location.to_json(),
        "crop": bundle.crop.to_json(),
        "frame_size": list(bundle.frame_size),
        "alpha": bundle.alpha,
        "occlusion_rule": bundle.occlusion_rule,
        "bundle_id": bundle.bundle_id,
    }


def _bundle_from_parts(masked: Raster, collage: Raster, depth: DepthMap,
                       ref: Raster, meta: dict) -> ConditioningBundle:
    try:
        return ConditioningBundle(
            masked_scene=masked,
            collage=collage,
            fused_depth=depth,
            reference_crop=ref,
            lam=float(meta["lambda"]),
            guidance_scale=float(meta["guidance_scale"]),
            mode=meta["mode"],
            dropped=DroppedFlags.from_json(meta["dropped"]),
            location=Location25D.from_json(meta["location"]),
            crop=CropSpec.from_json(meta["crop"]),
            frame_size=(int(meta["frame_size"][0]), int(meta["frame_size"][1])),
            alpha=float(meta.get("alpha", 1.0)),
            occlusion_rule=meta.get("occlusion_rule", "nearest_wins"),
            bundle_id=meta.get("bundle_id", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidBundle(f"bad bundle metadata: {exc}") from exc


def save_bundle(bundle: ConditioningBundle, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_image(bundle.masked_scene, out / "masked_scene.png")
    write_image(bundle.collage, out / "collage.png")
    write_pfm(bundle.fused_depth, out / "fused_depth.pfm")
    write_image(bundle.reference_crop, out / "reference.png")
    text = json.dumps(_meta_json(bundle), indent=2, sort_keys=True)
    (out / "meta.json").write_text(text + "\n", encoding="utf-8")
    return out


def load_bundle(in_dir: str | Path) -> ConditioningBundle:
    src = Path(in_dir)
    required = ["masked_scene.png", "collage.png", "fused_depth.pfm",
                "reference.png", "meta.json"]
    missing = [n for n in required if not (src / n).exists()]
    if missing:
        raise InvalidBundle(f"bundle at {src} missing {missing}")
    meta = json.loads((src / "meta.json").read_text(encoding="utf-8"))
    depth = read_pfm_bytes((src / "fused_depth.pfm").read_bytes())
    return _bundle_from_parts(
        read_image(src / "masked_scene.png"),
        read_image(src / "collage.png"),
        depth,
        read_image(src / "reference.png"),
        meta,
    )


def bundle_to_wire(bundle: ConditioningBundle) -> dict:
    """JSON-safe form used by the composite wire protocol."""

    def png(r: Raster) -> dict:
        return {"encoding": "png_b64",
                "data": base64.b64encode(image_to_png_bytes(r)).decode("ascii")}

    depth_bytes = write_pfm_bytes(bundle.fused_depth)
    return {
        "masked_scene": png(bundle.masked_scene),
        "collage": png(bundle.collage),
        "fused_depth": {"encoding": "pfm_b64",
                        "data": base64.b64encode(depth_bytes).decode("ascii")},
        "reference": png(bundle.reference_crop),
        "meta": _meta_json(bundle),
    }


def bundle_from_wire(obj: dict) -> ConditioningBundle:
    try:
        masked = read_image(base64.b64decode(obj["masked_scene"]["data"]))
        collage = read_image(base64.b64decode(obj["collage"]["data"]))
        depth = read_pfm_bytes(base64.b64decode(obj["fused_depth"]["data"]))
        ref = read_image(base64.b64decode(obj["reference"]["data"]))
        meta = obj["meta"]
    except InvalidBundle:
        raise
    except (KeyError, TypeError, ValueError, SceneForgeError) as exc:
        raise InvalidBundle(f"bad wire bundle: {exc}") from exc
    return _bundle_from_parts(masked, collage, depth, ref, meta)
