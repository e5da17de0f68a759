"""Counterfactual placement-dataset construction.

Each record is built by picking a target object in an annotated scene,
describing where it sits relative to a few anchor objects, removing it
from the image by inpainting, and keeping the original box and depth as
the answer. A model trained on such records learns to put the object
back where the instruction says.

Records are stored one-per-line in records.jsonl and validated against
the bundled record schema on both write and read. All randomness derives
from one seed; per-record streams are keyed by record index so parallel
builds give identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .detail import augment_mask
from .errors import (
    DimensionMismatch,
    EmptyMask,
    InpaintFailure,
    InstanceMissing,
    OutOfRange,
    TooFewInstances,
)
from .fusion import anchor_depth
from .geometry import crop_mask, crop_raster, zoom_in
from .imageio import read_image, read_mask, read_pfm, write_image
from .manifest import write_manifest
from .relations import Instance, Relation, derive_relations, render_instruction
from .seeding import derive_seed, rng_for
from .schemas import validate_record
from .types import BBox, DepthMap, Location25D, Mask, Raster

__all__ = [
    "SceneAnnotation",
    "AnchorContext",
    "DatasetRecord",
    "VideoPair",
    "load_scenes",
    "build_record",
    "build_dataset",
    "write_jsonl",
    "read_jsonl",
    "sample_video_pair",
]


@dataclass(frozen=True)
class SceneAnnotation:
    scene_id: str
    image_path: str
    width: int
    height: int
    instances: tuple[Instance, ...]
    depth_path: str


@dataclass(frozen=True)
class AnchorContext:
    """Everything the locator needs to know about one anchor object."""

    id: str
    name: str
    bbox: BBox
    depth: float

    def to_json(self) -> dict:
        return {"id": self.id, "name": self.name,
                "bbox": self.bbox.as_list(), "depth": self.depth}

    @classmethod
    def from_json(cls, obj: dict) -> "AnchorContext":
        return cls(id=obj["id"], name=obj["name"],
                   bbox=BBox.from_list(obj["bbox"]), depth=float(obj["depth"]))


@dataclass(frozen=True)
class DatasetRecord:
    record_id: str
    counterfactual_image: str
    source_image: str
    depth_ref: str
    instruction: str
    answer: Location25D
    relations: tuple[Relation, ...]
    target_instance: str
    target_name: str
    anchors: tuple[AnchorContext, ...]
    seed: int
    k: int

    @property
    def instances(self) -> tuple[AnchorContext, ...]:
        # Lets a record act as locator annotations directly.
        return self.anchors

    def to_json(self) -> dict:
        return {
            "record_id": self.record_id,
            "counterfactual_image": self.counterfactual_image,
            "source_image": self.source_image,
            "depth_ref": self.depth_ref,
            "instruction": self.instruction,
            "answer": self.answer.to_json(),
            "relations": [r.to_json() for r in self.relations],
            "target_instance": self.target_instance,
            "target_name": self.target_name,
            "anchors": [a.to_json() for a in self.anchors],
            "seed": self.seed,
            "k": self.k,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DatasetRecord":
        return cls(
            record_id=obj["record_id"],
            counterfactual_image=obj["counterfactual_image"],
            source_image=obj["source_image"],
            depth_ref=obj["depth_ref"],
            instruction=obj["instruction"],
            answer=Location25D.from_json(obj["answer"]),
            relations=tuple(Relation.from_json(r) for r in obj["relations"]),
            target_instance=obj["target_instance"],
            target_name=obj["target_name"],
            anchors=tuple(AnchorContext.from_json(a) for a in obj["anchors"]),
            seed=int(obj["seed"]),
            k=int(obj["k"]),
        )


def load_scenes(
    coco_path: str | Path,
    depth_dir: str | Path,
    images_root: Optional[str | Path] = None,
    masks_root: Optional[str | Path] = None,
) -> list[SceneAnnotation]:
    """Read COCO-style annotations into scene records.

    Boxes are pixel [x, y, w, h] as in COCO. Each annotation must carry a
    "mask_file" (PNG, relative to masks_root or the annotation file's
    directory). Depth lives at {depth_dir}/{image_stem}.pfm unless the
    image entry names a "depth_file".
    """
    coco_path = Path(coco_path)
    base = coco_path.parent
    images_root = Path(images_root) if images_root else base
    masks_root = Path(masks_root) if masks_root else base
    depth_dir = Path(depth_dir)

    doc = json.loads(coco_path.read_text(encoding="utf-8"))
    categories = {c["id"]: c["name"] for c in doc.get("categories", [])}
    by_image: dict = {img["id"]: img for img in doc.get("images", [])}
    instances: dict = {img_id: [] for img_id in by_image}

    for ann in doc.get("annotations", []):
        img = by_image[ann["image_id"]]
        w, h = int(img["width"]), int(img["height"])
        x, y, bw, bh = ann["bbox"]
        box = BBox(
            max(0.0, x / w), max(0.0, y / h),
            min(1.0, (x + bw) / w), min(1.0, (y + bh) / h),
        )
        mask_file = ann.get("mask_file")
        if mask_file is None:
            raise OutOfRange(
                f"annotation {ann['id']} has no mask_file; polygon masks are "
                "not supported, rasterize them to PNG first")
        instances[ann["image_id"]].append(Instance(
            id=str(ann["id"]),
            name=categories.get(ann["category_id"], str(ann["category_id"])),
            bbox=box,
            seg_path=str(masks_root / mask_file),
        ))

    scenes = []
    for img_id, img in by_image.items():
        stem = Path(img["file_name"]).stem
        depth_file = img.get("depth_file")
        depth_path = (depth_dir / depth_file) if depth_file else (depth_dir / f"{stem}.pfm")
        scenes.append(SceneAnnotation(
            scene_id=str(img_id),
            image_path=str(images_root / img["file_name"]),
            width=int(img["width"]),
            height=int(img["height"]),
            instances=tuple(instances[img_id]),
            depth_path=str(depth_path),
        ))
    scenes.sort(key=lambda s: s.scene_id)
    return scenes


def build_record(
    scene: SceneAnnotation,
    target: str,
    k: int,
    seed: int,
    inpaint,
    out_dir: str | Path,
    tau_d: float = 0.15,
    tau_xy: float = 0.05,
    dilate_frac: float = 0.02,
    record_id: Optional[str] = None,
) -> DatasetRecord:
    """Build one record: relations, instruction, answer, counterfactual image.

    The target is removed with the inpainting client under its level-2
    augmented mask; the answer is the target's annotated box plus the
    depth at that box's center pixel.
    """
    if not 2 <= k <= 4:
        raise OutOfRange(f"k must be in [2,4], got {k}")
    if len(scene.instances) < k:
        raise TooFewInstances(
            f"scene {scene.scene_id} has {len(scene.instances)} instances, need {k}")
    by_id = {inst.id: inst for inst in scene.instances}
    if target not in by_id:
        raise InstanceMissing(f"instance {target!r} not in scene {scene.scene_id}")
    target_inst = by_id[target]
    others = [inst for inst in scene.instances if inst.id != target]

    rng = rng_for(seed, "anchors", scene.scene_id, target)
    picked = rng.choice(len(others), size=k - 1, replace=False)
    anchors = [others[int(i)] for i in picked]

    depth = read_pfm(scene.depth_path)
    if depth.size != (scene.width, scene.height):
        raise DimensionMismatch(
            f"depth {depth.size} does not cover scene {scene.width}x{scene.height}")
    relations = derive_relations(target_inst, anchors, depth, tau_d, tau_xy)
    names = {inst.id: inst.name for inst in anchors}
    instruction = render_instruction(
        target_inst.name, relations, names,
        seed=derive_seed(seed, "verb", scene.scene_id, target))
    answer = Location25D(bbox=target_inst.bbox,
                         depth=anchor_depth(depth, target_inst.bbox))

    image = read_image(scene.image_path)
    if image.size != (scene.width, scene.height):
        raise DimensionMismatch(
            f"image {image.size} does not match annotation "
            f"{scene.width}x{scene.height}")
    seg = read_mask(target_inst.seg_path)
    if seg.size != image.size:
        raise DimensionMismatch("segmentation mask does not match image size")
    removal_mask = augment_mask(seg, level=2, dilate_frac=dilate_frac)
    try:
        counterfactual = inpaint.remove(image, removal_mask)
    except EmptyMask:
        raise
    except Exception as exc:
        raise InpaintFailure(f"inpainting backend failed: {exc}") from exc

    rid = record_id or f"{scene.scene_id}-{target}"
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    rel_path = f"images/{rid}.png"
    write_image(counterfactual, out / rel_path)

    record = DatasetRecord(
        record_id=rid,
        counterfactual_image=rel_path,
        source_image=scene.image_path,
        depth_ref=scene.depth_path,
        instruction=instruction,
        answer=answer,
        relations=tuple(relations),
        target_instance=target,
        target_name=target_inst.name,
        anchors=tuple(
            AnchorContext(id=a.id, name=a.name, bbox=a.bbox,
                          depth=anchor_depth(depth, a.bbox))
            for a in anchors
        ),
        seed=seed,
        k=k,
    )
    validate_record(record.to_json())
    return record


def build_dataset(
    scenes: Sequence[SceneAnnotation],
    out_dir: str | Path,
    n: int,
    seed: int,
    inpaint,
    tau_d: float = 0.15,
    tau_xy: float = 0.05,
    dilate_frac: float = 0.02,
    jobs: int = 1,
    endpoints: Optional[dict] = None,
) -> list[DatasetRecord]:
    """n records, cycling over scenes; writes records.jsonl and a manifest.

    Each record's randomness is keyed by its index, so output is identical
    whatever `jobs` is. `endpoints` is an optional JSON-able description of
    the backends in play, recorded in the manifest.
    """
    eligible = [s for s in scenes if len(s.instances) >= 2]
    if not eligible:
        raise TooFewInstances("no scene has the 2+ instances needed")
    if n < 1:
        raise OutOfRange("need n >= 1")

    def one(i: int) -> DatasetRecord:
        scene = eligible[i % len(eligible)]
        rng = rng_for(seed, "pick", i)
        k = int(rng.integers(2, min(4, len(scene.instances)) + 1))
        target = scene.instances[int(rng.integers(0, len(scene.instances)))].id
        return build_record(
            scene, target, k, seed=derive_seed(seed, "record", i),
            inpaint=inpaint, out_dir=out_dir, tau_d=tau_d, tau_xy=tau_xy,
            dilate_frac=dilate_frac,
            record_id=f"r{i:05d}-{scene.scene_id}-{target}",
        )

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, range(n)))
    else:
        records = [one(i) for i in range(n)]

    out = Path(out_dir)
    write_jsonl(records, out / "records.jsonl")
    config = {
        "n": n, "seed": seed, "tau_d": tau_d, "tau_xy": tau_xy,
        "dilate_frac": dilate_frac, "scenes": len(eligible),
    }
    if endpoints is not None:
        config["endpoints"] = endpoints
    write_manifest(out, config)
    return records


def write_jsonl(records: Sequence[DatasetRecord], path: str | Path) -> None:
    lines = []
    for rec in records:
        obj = rec.to_json()
        validate_record(obj)
        lines.append(json.dumps(obj, sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_jsonl(path: str | Path) -> list[DatasetRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        validate_record(obj)
        records.append(DatasetRecord.from_json(obj))
    return records


# --- video training pairs ---------------------------------------------------------


@dataclass(frozen=True)
class VideoPair:
    reference_crop: Raster          # RGBA object view from the earlier frame
    scene_input: tuple[Raster, Mask]  # later frame + augmented mask
    ground_truth: Raster            # later frame, untouched
    frame_indices: tuple[int, int]
    mask_level: int


def sample_video_pair(
    frames: Sequence[tuple[Raster, Mask]],
    seed: int,
    target_resolution: int = 512,
    ratio: float = 2.0,
    dilate_frac: float = 0.02,
) -> VideoPair:
    """Make one self-supervised pair from frames tracking a single instance.

    The earlier frame contributes the object view (background stripped via
    the mask, cropped around the object); the later frame, with its mask
    augmented to a seeded level in 2..5, is the scene to fill; the same
    frame unmodified is the target.
    """
    if len(frames) < 2:
        raise InstanceMissing("need at least 2 frames of the instance")
    for image, mask in frames:
        if mask.size != image.size:
            raise DimensionMismatch("frame mask does not match its image")
        if mask.is_empty():
            raise InstanceMissing("instance mask is empty in one of the frames")

    rng = rng_for(seed, "video")
    i = int(rng.integers(0, len(frames) - 1))
    j = int(rng.integers(i + 1, len(frames)))
    level = int(rng.integers(2, 6))

    image_a, mask_a = frames[i]
    mb = mask_a.as_bool()
    rows = np.any(mb, axis=1).nonzero()[0]
    cols = np.any(mb, axis=0).nonzero()[0]
    box = BBox.from_pixels(int(cols[0]), int(rows[0]), int(cols[-1]) + 1,
                           int(rows[-1]) + 1, image_a.width, image_a.height)
    spec = zoom_in(image_a.size, box, ratio=ratio, target=target_resolution)
    rgb = image_a.data
    if rgb.ndim == 2:
        rgb = np.repeat(rgb[:, :, None], 3, axis=2)
    rgb_crop = crop_raster(Raster(rgb[:, :, :3]), spec)
    alpha_crop = crop_mask(Mask(mb.astype(np.uint8)), spec)
    reference = Raster(np.dstack([
        rgb_crop.data, (alpha_crop.data * 255).astype(np.uint8)]))

    image_b, mask_b = frames[j]
    augmented = augment_mask(mask_b, level=level, dilate_frac=dilate_frac)
    return VideoPair(
        reference_crop=reference,
        scene_input=(image_b, augmented),
        ground_truth=image_b,
        frame_indices=(i, j),
        mask_level=level,
    )
