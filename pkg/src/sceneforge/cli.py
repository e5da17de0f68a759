"""Command-line entry point.

Every command is seeded, writes its artifacts plus a manifest of content
hashes, and produces byte-identical output when re-run with the same
arguments. Backends default to the bundled mocks; a TOML config file
and/or FORGE_BACKEND_{KIND}_URL environment variables switch individual
backends to HTTP or subprocess transports:

    [backends.depth]
    url = "http://127.0.0.1:9000"

    [backends.locate]
    cmd = ["my-locator", "--stdin-json"]
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .clients import ClientSet, endpoint_description, endpoints_from_config
from .compose import ComposeJob, compose, run_eval
from .dataset import build_dataset, load_scenes, sample_video_pair
from .detail import HFMap, augment_mask, hf_extract, stitch_collage
from .errors import PortInUse, SceneForgeError
from .fusion import FusionRequest, fuse
from .imageio import (
    read_image,
    read_mask,
    read_pfm,
    write_image,
    write_mask,
    write_pfm,
)
from .manifest import write_manifest
from .types import BBox, DepthMap, Location25D, Raster

__all__ = ["main"]


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _clients(args) -> ClientSet:
    cfg = _load_config(getattr(args, "config", None))
    return ClientSet.from_endpoints(endpoints_from_config(cfg))


def _parse_box(text: str) -> BBox:
    return BBox.from_list([float(v) for v in text.split(",")])


def _hf_to_u8(data: np.ndarray) -> Raster:
    return Raster(np.floor(data.astype(np.float64) * 255.0 + 0.5).astype(np.uint8))


# --- command implementations -------------------------------------------------


def _cmd_build_dataset(args) -> int:
    scenes = load_scenes(args.coco, args.depth_dir,
                         images_root=args.images_root,
                         masks_root=args.masks_root)
    clients = _clients(args)
    records = build_dataset(
        scenes, args.out, n=args.n, seed=args.seed, inpaint=clients.inpaint,
        tau_d=args.tau_d, tau_xy=args.tau_xy, dilate_frac=args.dilate_frac,
        jobs=args.jobs, endpoints=endpoint_description(clients.endpoints),
    )
    print(f"wrote {len(records)} records to {args.out}/records.jsonl")
    return 0


def _cmd_fuse_depth(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = fuse(FusionRequest(
        bg_depth=read_pfm(args.bg_depth),
        obj_depth=read_pfm(args.obj_depth),
        obj_mask=read_mask(args.obj_mask),
        location=Location25D(bbox=_parse_box(args.box), depth=args.depth),
        mode=args.mode,
        alpha=args.alpha,
        occlusion_rule=args.occlusion_rule,
    ))
    write_pfm(result.fused_depth, out / "fused_depth.pfm")
    write_mask(result.scene_mask, out / "scene_mask.png")
    write_mask(result.placed_obj_mask, out / "placed_mask.png")
    write_manifest(out, {
        "command": "fuse-depth", "box": args.box, "depth": args.depth,
        "mode": args.mode, "alpha": args.alpha,
        "occlusion_rule": args.occlusion_rule,
    })
    print(f"fused depth written to {out}")
    return 0


def _cmd_detail_map(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    aug = augment_mask(read_mask(args.mask), args.level, args.dilate_frac)
    hf = hf_extract(read_image(args.object), aug)
    write_mask(aug, out / "augmented_mask.png")
    write_image(_hf_to_u8(hf.data), out / "detail_map.png")
    write_pfm(DepthMap(hf.data), out / "detail_map.pfm")
    write_manifest(out, {
        "command": "detail-map", "level": args.level,
        "dilate_frac": args.dilate_frac,
    })
    print(f"detail map written to {out}")
    return 0


def _cmd_collage(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.hf is not None:
        if args.object or args.mask:
            raise SceneForgeError("--hf replaces --object/--mask")
        hf = HFMap(read_pfm(args.hf).data)
    else:
        if not (args.object and args.mask):
            raise SceneForgeError("need either --hf or --object with --mask")
        aug = augment_mask(read_mask(args.mask), args.level, args.dilate_frac)
        hf = hf_extract(read_image(args.object), aug)
    collage = stitch_collage(read_image(args.scene), hf, _parse_box(args.box))
    write_image(collage, out / "collage.png")
    write_image(_hf_to_u8(hf.data), out / "detail_map.png")
    write_manifest(out, {
        "command": "collage", "level": args.level, "box": args.box,
        "dilate_frac": args.dilate_frac,
    })
    print(f"collage written to {out}")
    return 0


def _cmd_augment_mask(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    aug = augment_mask(read_mask(args.mask), args.level, args.dilate_frac)
    write_mask(aug, out / "augmented_mask.png")
    write_manifest(out, {
        "command": "augment-mask", "level": args.level,
        "dilate_frac": args.dilate_frac,
    })
    print(f"augmented mask written to {out}")
    return 0


def _cmd_compose(args) -> int:
    location = None
    if args.box is not None:
        if args.depth is None:
            raise SceneForgeError("--box requires --depth")
        location = Location25D(bbox=_parse_box(args.box), depth=args.depth)
    job = ComposeJob(
        background=args.background,
        reference=args.reference,
        out_dir=args.out_dir,
        instruction=args.instruction,
        location=location,
        mode=args.mode,
        mask_level=args.mask_level,
        lam=args.lam,
        s=args.guidance_scale,
        seed=args.seed,
        alpha=args.alpha,
        annotations=args.annotations,
        ratio=args.ratio,
        target_resolution=args.resolution,
    )
    result = compose(job, _clients(args))
    print(f"composite written to {result.out_dir / 'output.png'}")
    print(f"location: {json.dumps(result.location.to_json())}")
    return 0


def _cmd_eval_mllm(args) -> int:
    clients = _clients(args)
    report = run_eval(args.dataset, clients.locate, out_path=args.out,
                      tau_d=args.tau_d, tau_xy=args.tau_xy)
    for key in ("n", "bbox_mse", "iou_mean", "depth_mse",
                "satisfied_relation_rate"):
        print(f"{key}: {report[key]}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        raise PortInUse(f"cannot bind {args.host}:{args.port}: {exc}") from exc
    finally:
        probe.close()

    cfg = _load_config(args.config)
    app = create_app(endpoints=endpoints_from_config(cfg),
                     studio_dir=args.studio_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_sample_video_pair(args) -> int:
    if len(args.frames) != len(args.masks):
        raise SceneForgeError("--frames and --masks must pair up")
    frames = [(read_image(f), read_mask(m))
              for f, m in zip(args.frames, args.masks)]
    pair = sample_video_pair(frames, seed=args.seed,
                             target_resolution=args.resolution,
                             ratio=args.ratio)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_image(pair.reference_crop, out / "reference.png")
    write_image(pair.scene_input[0], out / "scene.png")
    write_mask(pair.scene_input[1], out / "scene_mask.png")
    write_image(pair.ground_truth, out / "ground_truth.png")
    (out / "pair.json").write_text(json.dumps({
        "frame_indices": list(pair.frame_indices),
        "mask_level": pair.mask_level,
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_manifest(out, {
        "command": "sample-video-pair", "seed": args.seed,
        "n_frames": len(args.frames),
    })
    print(f"pair written to {out} (frames {pair.frame_indices}, "
          f"mask level {pair.mask_level})")
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Depth-aware generative object placement toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="TOML config with [backends.*] sections")

    p = sub.add_parser("build-dataset",
                       help="build a counterfactual placement dataset")
    p.add_argument("--coco", required=True, help="COCO-style annotation JSON")
    p.add_argument("--depth-dir", required=True, help="directory of PFM depth maps")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, required=True, help="number of records")
    p.add_argument("--tau-d", type=float, default=0.15)
    p.add_argument("--tau-xy", type=float, default=0.05)
    p.add_argument("--dilate-frac", type=float, default=0.02)
    p.add_argument("--images-root", default=None)
    p.add_argument("--masks-root", default=None)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel record builds; output is order-independent")
    add_config(p)
    p.set_defaults(func=_cmd_build_dataset)

    p = sub.add_parser("fuse-depth", help="fuse an object depth patch into a scene")
    p.add_argument("--bg-depth", required=True, help="background depth PFM")
    p.add_argument("--obj-depth", required=True, help="object depth PFM")
    p.add_argument("--obj-mask", required=True, help="object mask PNG")
    p.add_argument("--box", required=True, help="x1,y1,x2,y2 normalized")
    p.add_argument("--depth", type=float, required=True,
                   help="target depth in [0,1], larger = nearer")
    p.add_argument("--mode", default="place",
                   choices=["place", "replace", "id_transfer", "inpaint"])
    p.add_argument("--alpha", type=float, default=1.0,
                   help="object relief scale")
    p.add_argument("--occlusion-rule", default="nearest_wins",
                   choices=["nearest_wins", "overwrite"])
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_fuse_depth)

    p = sub.add_parser("detail-map",
                       help="high-frequency detail map of an object image")
    p.add_argument("--object", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--level", type=int, default=2, choices=[1, 2, 3, 4, 5])
    p.add_argument("--dilate-frac", type=float, default=0.02)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_detail_map)

    p = sub.add_parser("collage",
                       help="stitch an object's detail map into a scene box")
    p.add_argument("--scene", required=True)
    p.add_argument("--object", default=None)
    p.add_argument("--mask", default=None)
    p.add_argument("--hf", default=None,
                   help="precomputed detail map PFM (skips --object/--mask)")
    p.add_argument("--level", type=int, default=2, choices=[1, 2, 3, 4, 5])
    p.add_argument("--box", required=True, help="x1,y1,x2,y2 normalized")
    p.add_argument("--dilate-frac", type=float, default=0.02)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_collage)

    p = sub.add_parser("augment-mask", help="coarsen a mask to a level in 1..5")
    p.add_argument("--mask", required=True)
    p.add_argument("--level", type=int, required=True, choices=[1, 2, 3, 4, 5])
    p.add_argument("--dilate-frac", type=float, default=0.02)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_augment_mask)

    p = sub.add_parser("compose", help="run the full placement pipeline")
    p.add_argument("--background", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--instruction", default=None)
    p.add_argument("--box", default=None, help="explicit x1,y1,x2,y2 (skips locate)")
    p.add_argument("--depth", type=float, default=None,
                   help="explicit target depth, required with --box")
    p.add_argument("--mode", default="place",
                   choices=["place", "replace", "id_transfer", "inpaint"])
    p.add_argument("--mask-level", type=int, default=2, choices=[1, 2, 3, 4, 5])
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="depth weight in the control-map combination")
    p.add_argument("--guidance-scale", "-s", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--annotations", default=None,
                   help="instances JSON for the locator")
    p.add_argument("--ratio", type=float, default=2.0)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--out-dir", required=True)
    add_config(p)
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("eval-mllm",
                       help="score the locator backend on a dataset")
    p.add_argument("--dataset", required=True, help="records.jsonl or its directory")
    p.add_argument("--out", default=None, help="report JSON path")
    p.add_argument("--tau-d", type=float, default=0.15)
    p.add_argument("--tau-xy", type=float, default=0.05)
    add_config(p)
    p.set_defaults(func=_cmd_eval_mllm)

    p = sub.add_parser("serve", help="run the local HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8423)
    p.add_argument("--studio-dir", default=None,
                   help="built placement-studio assets to serve at /studio")
    add_config(p)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("sample-video-pair",
                       help="make one self-supervised training pair from frames")
    p.add_argument("--frames", nargs="+", required=True)
    p.add_argument("--masks", nargs="+", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=2.0)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_sample_video_pair)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SceneForgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
