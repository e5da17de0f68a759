"""Deterministic synthetic fixtures: no binary assets live in the repo.

Everything is drawn with numpy from a seed, so two calls with the same
seed produce byte-identical files. The dataset corpus is a COCO-style
tree of striped rectangles on gradient backgrounds; object rows map to
distinct depths under the gradient depth mock, and layouts are chosen so
the corpus exercises depth, vertical, and horizontal relations.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .seeding import rng_for
from .imageio import write_image, write_mask, write_pfm
from .types import DepthMap, Mask, Raster

__all__ = [
    "CATEGORY_NAMES",
    "make_dataset_fixture",
    "make_compose_fixture",
    "make_video_fixture",
]

CATEGORY_NAMES = (
    "ball", "box", "cup", "dog", "car", "lamp", "book", "hat", "mug", "vase",
    "chair", "plant", "shoe", "clock", "kite", "drum", "fork", "bell", "cone",
    "fish",
)

_PALETTE = (
    (230, 80, 80), (80, 200, 90), (90, 120, 235), (235, 200, 70),
    (200, 90, 210), (80, 210, 200), (240, 140, 60), (160, 230, 90),
)


def _gradient_depth(width: int, height: int) -> DepthMap:
    if height == 1:
        return DepthMap(np.ones((1, width), dtype=np.float32))
    col = np.arange(height, dtype=np.float32) / np.float32(height - 1)
    return DepthMap(np.repeat(col[:, None], width, axis=1))


def _background(width: int, height: int, tint: tuple[int, int, int]) -> np.ndarray:
    rows = np.linspace(30.0, 90.0, height, dtype=np.float32)[:, None, None]
    base = np.repeat(np.repeat(rows, width, axis=1), 3, axis=2)
    return np.clip(base + np.array(tint, dtype=np.float32) * 0.2, 0, 255
                   ).astype(np.uint8)


def _draw_object(img: np.ndarray, x1: int, y1: int, x2: int, y2: int,
                 color: tuple[int, int, int]) -> None:
    img[y1:y2, x1:x2] = color
    # Horizontal stripes give the patch internal edges for detail maps.
    for r in range(y1, y2, 4):
        img[r:r + 1, x1:x2] = tuple(max(0, c - 60) for c in color)


def _scene_layout(rng: np.random.Generator, width: int, height: int
                  ) -> list[tuple[int, int, int, int]]:
    """Three non-overlapping boxes whose rows produce varied relations."""
    if rng.random() < 0.5:
        # Coarse 3x3 lattice: big row gaps -> depth relations, same-row
        # pairs -> left/right.
        cells = rng.choice(9, size=3, replace=False)
        centers = []
        for cell in cells:
            cy = (1 + 2 * (int(cell) // 3)) / 6 + rng.uniform(-0.015, 0.015)
            cx = (1 + 2 * (int(cell) % 3)) / 6 + rng.uniform(-0.015, 0.015)
            centers.append((cx, cy))
    else:
        # Near-row layout: vertical gaps ~0.1 stay under the depth
        # threshold and yield above/below.
        cols = rng.choice(3, size=3, replace=False)
        base = rng.uniform(0.35, 0.5)
        centers = []
        for idx, col in enumerate(cols):
            cy = base + 0.10 * idx + rng.uniform(-0.01, 0.01)
            cx = (1 + 2 * int(col)) / 6 + rng.uniform(-0.015, 0.015)
            centers.append((cx, cy))

    boxes = []
    for cx, cy in centers:
        bw = rng.uniform(0.10, 0.16)
        bh = rng.uniform(0.10, 0.16)
        x1 = int(np.clip(cx - bw / 2, 0.01, 0.99 - bw) * width)
        y1 = int(np.clip(cy - bh / 2, 0.01, 0.99 - bh) * height)
        boxes.append((x1, y1, x1 + max(2, int(bw * width)),
                      y1 + max(2, int(bh * height))))
    return boxes


def make_dataset_fixture(root: str | Path, n_scenes: int = 20,
                         size: tuple[int, int] = (256, 256),
                         seed: int = 0) -> Path:
    """COCO-style corpus under `root`; returns the annotation file path."""
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(exist_ok=True)
    (root / "depth").mkdir(exist_ok=True)
    width, height = size

    images, annotations, ann_id = [], [], 1000
    for i in range(n_scenes):
        rng = rng_for(seed, "scene", i)
        img_id = 100 + i
        file_name = f"images/scene_{img_id}.png"
        tint = _PALETTE[i % len(_PALETTE)]
        img = _background(width, height, tint)

        name_idx = rng.choice(len(CATEGORY_NAMES), size=3, replace=False)
        boxes = _scene_layout(rng, width, height)
        for j, (x1, y1, x2, y2) in enumerate(boxes):
            color = _PALETTE[int(rng.integers(0, len(_PALETTE)))]
            _draw_object(img, x1, y1, x2, y2, color)
            mask = np.zeros((height, width), dtype=np.uint8)
            mask[y1:y2, x1:x2] = 1
            mask_file = f"masks/a{ann_id}.png"
            write_mask(Mask(mask), root / mask_file)
            annotations.append({
                "id": ann_id,
                "image_id": img_id,
                "category_id": int(name_idx[j]) + 1,
                "bbox": [x1, y1, x2 - x1, y2 - y1],
                "mask_file": mask_file,
            })
            ann_id += 1

        write_image(Raster(img), root / file_name)
        write_pfm(_gradient_depth(width, height),
                  root / "depth" / f"scene_{img_id}.pfm")
        images.append({"id": img_id, "file_name": file_name,
                       "width": width, "height": height})

    doc = {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": c + 1, "name": name}
                       for c, name in enumerate(CATEGORY_NAMES)],
    }
    ann_path = root / "annotations.json"
    ann_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    return ann_path


def make_compose_fixture(root: str | Path, seed: int = 0) -> dict[str, Path]:
    """A 512x512 street scene, an RGBA dog cut-out, and scene annotations."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = rng_for(seed, "compose-fixture")

    # Street: sky-to-ground gradient plus two annotated landmarks.
    w = h = 512
    img = _background(w, h, (60, 80, 120))
    car = (0.55, 0.62, 0.85, 0.82)
    tree = (0.06, 0.25, 0.22, 0.75)
    _draw_object(img, int(car[0] * w), int(car[1] * h),
                 int(car[2] * w), int(car[3] * h), (200, 60, 50))
    _draw_object(img, int(tree[0] * w), int(tree[1] * h),
                 int(tree[2] * w), int(tree[3] * h), (70, 160, 80))
    noise = rng.integers(0, 6, size=img.shape, dtype=np.uint8)
    img = np.clip(img.astype(np.int16) + noise, 0, 255).astype(np.uint8)
    street = root / "street.png"
    write_image(Raster(img), street)

    # Dog: bright striped body + head on a transparent field.
    dw, dh = 200, 160
    dog = np.zeros((dh, dw, 4), dtype=np.uint8)
    body = np.zeros((dh, dw, 3), dtype=np.uint8)
    _draw_object(body, 30, 60, 170, 150, (235, 190, 120))
    _draw_object(body, 120, 20, 180, 80, (225, 170, 100))
    alpha = (body.sum(axis=2) > 0).astype(np.uint8) * 255
    dog[:, :, :3] = body
    dog[:, :, 3] = alpha
    dog_path = root / "dog.png"
    write_image(Raster(dog), dog_path)

    ann_path = root / "annotations.json"
    ann_path.write_text(json.dumps({
        "instances": [
            {"id": "car", "name": "car", "bbox": list(car)},
            {"id": "tree", "name": "tree", "bbox": list(tree)},
        ]
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return {"background": street, "reference": dog_path, "annotations": ann_path}


def make_video_fixture(root: str | Path, n_frames: int = 3,
                       size: tuple[int, int] = (192, 128),
                       seed: int = 0) -> list[tuple[Path, Path]]:
    """Frames of one bright square sliding right; returns (image, mask) paths."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    width, height = size
    rng = rng_for(seed, "video-fixture")
    y1 = int(rng.uniform(0.2, 0.5) * height)
    side = max(8, int(0.25 * height))
    paths = []
    for t in range(n_frames):
        img = _background(width, height, (90, 90, 40))
        x1 = int((0.1 + 0.18 * t) * width)
        _draw_object(img, x1, y1, x1 + side, y1 + side, (240, 220, 90))
        mask = np.zeros((height, width), dtype=np.uint8)
        mask[y1:y1 + side, x1:x1 + side] = 1
        ip = root / f"frame_{t}.png"
        mp = root / f"frame_{t}_mask.png"
        write_image(Raster(img), ip)
        write_mask(Mask(mask), mp)
        paths.append((ip, mp))
    return paths
