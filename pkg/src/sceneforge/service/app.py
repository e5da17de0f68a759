"""FastAPI application: /api pipeline endpoints, /v1 mock backends, /studio.

The /api routes map one-to-one onto package operations and must produce
byte-identical artifacts to the CLI for identical parameters. The /v1
routes implement the backend wire protocol with the bundled mocks, so an
HTTP client pointed at this app behaves exactly like the local mocks.
Domain errors become HTTP 400 with a typed body; backend-reachability
errors become 503.
"""

from __future__ import annotations

import base64
import io
import json
import tempfile
import zipfile
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
import jsonschema

from ..bundle import bundle_from_wire
from ..clients import (
    ClientSet,
    LocateResponse,
    decode_payload,
    resolve_file_refs,
)
from ..compose import ComposeJob, SimpleAnnotations, compose
from ..detail import augment_mask, hf_extract, stitch_collage
from ..errors import BackendUnavailable, SceneForgeError
from ..fusion import FusionRequest, fuse
from ..imageio import (
    image_to_png_bytes,
    mask_from_png_bytes,
    mask_to_png_bytes,
    read_image,
    read_pfm_bytes,
    write_image,
    write_pfm_bytes,
)
from ..relations import Instance
from ..schemas import wire_validator
from ..types import BBox, DepthMap, Location25D, Mask, Raster
from . import schemas as api

__all__ = ["create_app"]


def _png_payload(data: bytes) -> dict:
    return {"encoding": "png_b64",
            "data": base64.b64encode(data).decode("ascii")}


def _pfm_bytes_payload(data: bytes) -> dict:
    return {"encoding": "pfm_b64",
            "data": base64.b64encode(data).decode("ascii")}


def _pfm_payload(depth: DepthMap) -> dict:
    return _pfm_bytes_payload(write_pfm_bytes(depth))


def _payload_bytes(p: api.Payload) -> bytes:
    return decode_payload(p.model_dump())


def _payload_depth(p: api.Payload) -> DepthMap:
    return read_pfm_bytes(_payload_bytes(p))


def _payload_image(p: api.Payload) -> Raster:
    return read_image(_payload_bytes(p))


def _payload_mask(p: api.Payload) -> Mask:
    return mask_from_png_bytes(_payload_bytes(p))


def _location(model: api.LocationModel) -> Location25D:
    return Location25D(bbox=BBox.from_list(model.bbox), depth=model.depth)


def _annotations(model: Optional[api.AnnotationsModel]) -> Optional[SimpleAnnotations]:
    if model is None:
        return None
    return SimpleAnnotations(instances=tuple(
        Instance(id=e.id, name=e.name, bbox=BBox.from_list(e.bbox))
        for e in model.instances
    ))


async def _wire_request(request: Request, kind: str) -> dict:
    """Parse a /v1 body: plain JSON or multipart with file-ref payloads."""
    ctype = request.headers.get("content-type", "")
    if ctype.startswith("multipart/"):
        form = await request.form()
        if "request" not in form:
            raise BackendUnavailable("multipart body lacks the request part")
        body = json.loads(form["request"])
        files = {}
        for key in form:
            if key == "request":
                continue
            files[key] = await form[key].read()
        body = resolve_file_refs(body, files)
    else:
        body = await request.json()
    try:
        wire_validator(kind, "request").validate(body)
    except jsonschema.ValidationError as exc:
        raise SceneForgeError(f"request fails wire schema: {exc.message}") from exc
    return body


def create_app(endpoints=None, studio_dir: Optional[str] = None) -> FastAPI:
    """App factory. `endpoints` selects the backends used by /api routes
    (bundled mocks by default); /v1 routes always serve the mocks."""
    app = FastAPI(title="sceneforge", docs_url=None, redoc_url=None)
    clients = ClientSet.from_endpoints(endpoints) if endpoints else ClientSet.mocks()
    mocks = ClientSet.mocks()

    @app.exception_handler(SceneForgeError)
    async def _domain_error(_request: Request, exc: SceneForgeError):
        status = 503 if isinstance(exc, BackendUnavailable) else 400
        return JSONResponse(status_code=status, content={
            "error": type(exc).__name__, "detail": str(exc)})

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    @app.post("/api/fuse", response_model=api.FuseResponse)
    async def api_fuse(req: api.FuseRequest):
        result = fuse(FusionRequest(
            bg_depth=_payload_depth(req.bg_depth),
            obj_depth=_payload_depth(req.obj_depth),
            obj_mask=_payload_mask(req.obj_mask),
            location=_location(req.location),
            mode=req.mode,
            alpha=req.alpha,
            occlusion_rule=req.occlusion_rule,
        ))
        return {
            "fused_depth": _pfm_payload(result.fused_depth),
            "scene_mask": _png_payload(mask_to_png_bytes(result.scene_mask)),
            "placed_mask": _png_payload(mask_to_png_bytes(result.placed_obj_mask)),
        }

    @app.post("/api/augment-mask", response_model=api.AugmentMaskResponse)
    async def api_augment(req: api.AugmentMaskRequest):
        out = augment_mask(_payload_mask(req.mask), req.level, req.dilate_frac)
        return {"mask": _png_payload(mask_to_png_bytes(out))}

    @app.post("/api/collage", response_model=api.CollageResponse)
    async def api_collage(req: api.CollageRequest):
        scene = _payload_image(req.scene)
        obj = _payload_image(req.object_image)
        mask = _payload_mask(req.mask)
        aug = augment_mask(mask, req.level, req.dilate_frac)
        hf = hf_extract(obj, aug)
        collage = stitch_collage(scene, hf, BBox.from_list(req.bbox))
        hf_img = np.floor(hf.data.astype(np.float64) * 255.0 + 0.5).astype(np.uint8)
        return {
            "collage": _png_payload(image_to_png_bytes(collage)),
            "detail_map": _png_payload(image_to_png_bytes(Raster(hf_img))),
        }

    @app.post("/api/depth", response_model=api.DepthResponse)
    async def api_depth(req: api.DepthRequest):
        return {"depth": _pfm_payload(clients.depth.predict(_payload_image(req.image)))}

    @app.post("/api/locate", response_model=api.LocateApiResponse)
    async def api_locate(req: api.LocateApiRequest):
        background = _payload_image(req.background)
        depth = (_payload_depth(req.depth) if req.depth is not None
                 else clients.depth.predict(background))
        resp = clients.locate.locate(background, depth, req.instruction,
                                     _annotations(req.annotations))
        return {"location": resp.location.to_json(), "raw_text": resp.raw_text}

    def _run_compose(req: api.ComposeApiRequest, tmp: Path):
        bg_path = tmp / "background.png"
        ref_path = tmp / "reference.png"
        write_image(_payload_image(req.background), bg_path)
        write_image(_payload_image(req.reference), ref_path)
        ann_path = None
        if req.annotations is not None:
            ann_path = tmp / "annotations.json"
            ann_path.write_text(json.dumps(
                req.annotations.model_dump(), sort_keys=True), encoding="utf-8")
        job = ComposeJob(
            background=str(bg_path),
            reference=str(ref_path),
            out_dir=str(tmp / "out"),
            instruction=req.instruction,
            location=_location(req.location) if req.location else None,
            mode=req.mode,
            mask_level=req.mask_level,
            lam=req.lam,
            s=req.s,
            seed=req.seed,
            alpha=req.alpha,
            annotations=str(ann_path) if ann_path else None,
        )
        return compose(job, clients)

    @app.post("/api/compose", response_model=api.ComposeApiResponse)
    async def api_compose(req: api.ComposeApiRequest):
        with tempfile.TemporaryDirectory() as tmpdir:
            tmp = Path(tmpdir)
            result = _run_compose(req, tmp)
            out = result.out_dir
            return {
                "output": _png_payload((out / "output.png").read_bytes()),
                "location": result.location.to_json(),
                "fused_depth": _pfm_bytes_payload(
                    (out / "fused_depth.pfm").read_bytes()),
                "collage": _png_payload((out / "collage.png").read_bytes()),
                "detail_map": _png_payload((out / "detail_map.png").read_bytes()),
            }

    @app.post("/api/export-bundle")
    async def api_export_bundle(req: api.ComposeApiRequest):
        with tempfile.TemporaryDirectory() as tmpdir:
            tmp = Path(tmpdir)
            result = _run_compose(req, tmp)
            bundle_dir = result.out_dir / "bundle"
            buf = io.BytesIO()
            # Fixed timestamps keep the archive byte-stable across runs.
            with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
                for p in sorted(bundle_dir.iterdir()):
                    info = zipfile.ZipInfo(f"bundle/{p.name}",
                                           date_time=(1980, 1, 1, 0, 0, 0))
                    zf.writestr(info, p.read_bytes())
            return Response(content=buf.getvalue(),
                            media_type="application/zip",
                            headers={"Content-Disposition":
                                     'attachment; filename="bundle.zip"'})

    # ---- mock backend wire endpoints -------------------------------------

    @app.post("/v1/depth")
    async def v1_depth(request: Request):
        body = await _wire_request(request, "depth")
        image = read_image(decode_payload(body["image"]))
        depth = mocks.depth.predict(image)
        resp = {"depth": _pfm_payload(depth)}
        wire_validator("depth", "response").validate(resp)
        return resp

    @app.post("/v1/segment")
    async def v1_segment(request: Request):
        body = await _wire_request(request, "segment")
        image = read_image(decode_payload(body["image"]))
        hint = BBox.from_list(body["hint"]) if body.get("hint") else None
        mask = mocks.segment.segment(image, hint)
        resp = {"mask": _png_payload(mask_to_png_bytes(mask))}
        wire_validator("segment", "response").validate(resp)
        return resp

    @app.post("/v1/inpaint")
    async def v1_inpaint(request: Request):
        body = await _wire_request(request, "inpaint")
        image = read_image(decode_payload(body["image"]))
        mask = mask_from_png_bytes(decode_payload(body["mask"]))
        out = mocks.inpaint.remove(image, mask)
        resp = {"image": _png_payload(image_to_png_bytes(out))}
        wire_validator("inpaint", "response").validate(resp)
        return resp

    @app.post("/v1/locate")
    async def v1_locate(request: Request):
        body = await _wire_request(request, "locate")
        background = read_image(decode_payload(body["background"]))
        depth = read_pfm_bytes(decode_payload(body["depth"]))
        ann = None
        if body.get("annotations"):
            ann = SimpleAnnotations(instances=tuple(
                Instance(id=e["id"], name=e["name"],
                         bbox=BBox.from_list(e["bbox"]))
                for e in body["annotations"]["instances"]
            ))
        resp_obj: LocateResponse = mocks.locate.locate(
            background, depth, body["instruction"], ann)
        resp = {"location": resp_obj.location.to_json(),
                "raw_text": resp_obj.raw_text}
        wire_validator("locate", "response").validate(resp)
        return resp

    @app.post("/v1/composite")
    async def v1_composite(request: Request):
        body = await _wire_request(request, "composite")
        bundle = bundle_from_wire(body["bundle"])
        out = mocks.composite.compose(bundle)
        resp = {"image": _png_payload(image_to_png_bytes(out))}
        wire_validator("composite", "response").validate(resp)
        return resp

    if studio_dir and Path(studio_dir).is_dir():
        app.mount("/studio", StaticFiles(directory=studio_dir, html=True),
                  name="studio")

    return app
