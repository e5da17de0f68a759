"""Client protocol for the five neural backends, plus deterministic mocks.

Backends: depth predictor, segmenter, inpainter, locator (the model that
turns an instruction into a 2.5D location), and the generative compositor.
Each is reachable through one of three transports:

  local-mock   pure-function stand-ins bundled here; no state, no clock
  http         POST {base_url}/v1/{kind} with JSON bodies (rasters as
               base64 payloads; payloads over 1 MiB travel as multipart
               file parts referenced from the JSON)
  subprocess   one-shot process, request JSON on stdin, response on stdout

Requests and responses are validated against the bundled wire schemas;
anything malformed surfaces as BackendUnavailable, never a stack trace.
The env var FORGE_BACKEND_{KIND}_URL switches a kind to its HTTP backend.
"""

from __future__ import annotations

import base64
import json
import os
import subprocess
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Protocol, Sequence

import cv2
import jsonschema
import numpy as np

from .bundle import ConditioningBundle, bundle_to_wire
from .errors import (
    BackendTimeout,
    BackendUnavailable,
    DimensionMismatch,
    EmptyMask,
    InvalidBundle,
    NoForeground,
    UnparsableInstruction,
)
from .fusion import anchor_depth, rescale_object_depth
from .geometry import bbox_to_crop
from .imageio import (
    image_to_png_bytes,
    mask_from_png_bytes,
    mask_to_png_bytes,
    read_image,
    read_pfm_bytes,
    write_pfm_bytes,
)
from .relations import PRED_CODE, classify_codes, parse_instruction
from .resample import resize_float, resize_image, resize_mask
from .schemas import wire_validator
from .types import BBox, DepthMap, Location25D, Mask, Raster

__all__ = [
    "KINDS",
    "LocateResponse",
    "ClientEndpoint",
    "ClientSet",
    "DepthClient",
    "SegmentClient",
    "InpaintClient",
    "LocateClient",
    "CompositeClient",
    "MockDepthClient",
    "MockSegmentClient",
    "MockInpaintClient",
    "MockLocateClient",
    "MockCompositeClient",
    "mock_visibility",
    "encode_payload",
    "decode_payload",
    "resolve_file_refs",
    "annotations_to_wire",
    "make_client",
    "default_endpoints",
    "endpoints_from_config",
    "PAYLOAD_INLINE_LIMIT",
]

KINDS = ("depth", "segment", "inpaint", "locate", "composite")

PAYLOAD_INLINE_LIMIT = 1 << 20  # over this, payloads become multipart file parts


@dataclass(frozen=True)
class LocateResponse:
    location: Location25D
    raw_text: str


class AnnotationsLike(Protocol):
    """Anything carrying named instances with boxes (scene annotations)."""

    @property
    def instances(self) -> Sequence[Any]: ...


class DepthClient(Protocol):
    def predict(self, image: Raster) -> DepthMap: ...


class SegmentClient(Protocol):
    def segment(self, image: Raster, hint: Optional[BBox] = None) -> Mask: ...


class InpaintClient(Protocol):
    def remove(self, image: Raster, mask: Mask) -> Raster: ...


class LocateClient(Protocol):
    def locate(
        self,
        background: Raster,
        depth: DepthMap,
        instruction: str,
        annotations: Optional[AnnotationsLike] = None,
    ) -> LocateResponse: ...


class CompositeClient(Protocol):
    def compose(self, bundle: ConditioningBundle) -> Raster: ...


# --- mocks ----------------------------------------------------------------------

def _vertical_gradient(height: int, width: int) -> np.ndarray:
    # "Ground is near": bottom row depth 1, top row 0. A single row has no
    # gradient and is treated as all-near.
    if height == 1:
        return np.ones((1, width), dtype=np.float32)
    col = np.arange(height, dtype=np.float32) / np.float32(height - 1)
    return np.repeat(col[:, None], width, axis=1)


class MockDepthClient:
    """Vertical-gradient depth: d = row / (H - 1)."""

    def predict(self, image: Raster) -> DepthMap:
        return DepthMap(_vertical_gradient(image.height, image.width))


def _luma_u8(data: np.ndarray) -> np.ndarray:
    if data.ndim == 2:
        return data
    rgb = data[:, :, :3].astype(np.float64)
    y = rgb[:, :, 0] * 0.299 + rgb[:, :, 1] * 0.587 + rgb[:, :, 2] * 0.114
    return np.floor(y + 0.5).astype(np.uint8)


class MockSegmentClient:
    """Alpha channel when present, else Otsu on luma inside the hint box.

    The bright side of the Otsu split is taken as foreground, so this mock
    expects objects lighter than their surroundings.
    """

    def segment(self, image: Raster, hint: Optional[BBox] = None) -> Mask:
        if image.channels == 4:
            m = (image.data[:, :, 3] > 0).astype(np.uint8)
            if not m.any():
                raise NoForeground("image is fully transparent")
            return Mask(m)

        luma = _luma_u8(image.data)
        h, w = luma.shape
        if hint is not None:
            px1, py1, px2, py2 = hint.to_pixels(w, h)
            px2, py2 = max(px2, px1 + 1), max(py2, py1 + 1)
        else:
            px1, py1, px2, py2 = 0, 0, w, h
        region = luma[py1:py2, px1:px2]
        _, binarized = cv2.threshold(region, 0, 255,
                                     cv2.THRESH_BINARY + cv2.THRESH_OTSU)
        out = np.zeros((h, w), dtype=np.uint8)
        out[py1:py2, px1:px2] = (binarized > 0).astype(np.uint8)
        if not out.any():
            raise NoForeground("no foreground found inside the hint box")
        return Mask(out)


class MockInpaintClient:
    """Fill the hole with the per-channel median of its 2 px boundary ring.

    An all-covering mask has no ring; the global per-channel median is used
    instead. Unmasked pixels pass through bit-identical.
    """

    def remove(self, image: Raster, mask: Mask) -> Raster:
        if mask.size != image.size:
            raise DimensionMismatch(
                f"mask {mask.size} does not match image {image.size}")
        hole = mask.as_bool()
        if not hole.any():
            raise EmptyMask("inpainting mask is empty")
        grown = cv2.dilate(hole.astype(np.uint8), np.ones((3, 3), np.uint8),
                           iterations=2).astype(bool)
        ring = grown & ~hole
        source = image.data[ring] if ring.any() else image.data.reshape(
            -1, image.data.shape[-1] if image.data.ndim == 3 else 1)
        fill = np.floor(np.median(source.astype(np.float64), axis=0) + 0.5)
        out = image.data.copy()
        out[hole] = fill.astype(image.data.dtype)
        return Raster(out)


# Placement search grid: 32x32 box centers, 8 box sizes, 16 depth values.
_GRID_N = 32
_GRID_CENTERS = (np.arange(_GRID_N) + 0.5) / _GRID_N
_GRID_SIZES = np.linspace(0.05, 0.40, 8)
_GRID_DEPTHS = np.linspace(0.0, 1.0, 16)


class MockLocateClient:
    """Grid search maximizing the number of satisfied parsed relations.

    Needs annotations to resolve anchor names; anchor depths are read from
    the provided depth map at each anchor's box center. Ties break toward
    the lowest grid index in (center_y, center_x, size, depth) order.
    """

    def __init__(self, tau_d: float = 0.15, tau_xy: float = 0.05):
        self.tau_d = tau_d
        self.tau_xy = tau_xy

    def locate(
        self,
        background: Raster,
        depth: DepthMap,
        instruction: str,
        annotations: Optional[AnnotationsLike] = None,
    ) -> LocateResponse:
        if not instruction.strip():
            raise UnparsableInstruction("empty instruction")
        _, parsed = parse_instruction(instruction)

        by_name: dict[str, Any] = {}
        if annotations is not None:
            for inst in annotations.instances:
                by_name.setdefault(inst.name.lower(), inst)
        resolved = [(pred, by_name[name.lower()])
                    for pred, name in parsed if name.lower() in by_name]
        if not resolved:
            raise UnparsableInstruction(
                "no instruction anchors resolve against the provided annotations")

        # Candidate boxes: size s centered on each grid center, shifted to
        # stay inside the frame (shrinking never happens, s <= 1).
        s = _GRID_SIZES[None, None, :]
        cx = _GRID_CENTERS[None, :, None]
        cy = _GRID_CENTERS[:, None, None]
        x1 = np.clip(cx - s / 2.0, 0.0, 1.0 - s)
        y1 = np.clip(cy - s / 2.0, 0.0, 1.0 - s)
        acx = (x1 + s / 2.0)[..., None]  # actual centers after the shift
        acy = (y1 + s / 2.0)[..., None]
        d = _GRID_DEPTHS[None, None, None, :]

        score = np.zeros((_GRID_N, _GRID_N, len(_GRID_SIZES),
                          len(_GRID_DEPTHS)), dtype=np.int32)
        for pred, inst in resolved:
            a_cx, a_cy = inst.bbox.center
            a_d = anchor_depth(depth, inst.bbox)
            codes = classify_codes(acx, acy, d, a_cx, a_cy, a_d,
                                   self.tau_d, self.tau_xy)
            score += codes == PRED_CODE[pred]

        best = int(np.argmax(score))  # C order -> lowest index wins ties
        iy, ix, isz, idp = np.unravel_index(best, score.shape)
        size = float(_GRID_SIZES[isz])
        bx1 = float(x1[0, ix, isz])  # x1 broadcasts over cy, y1 over cx
        by1 = float(y1[iy, 0, isz])
        location = Location25D(
            bbox=BBox(bx1, by1, bx1 + size, by1 + size),
            depth=float(_GRID_DEPTHS[idp]),
        )
        raw = (f"bbox=[{bx1:.4f}, {by1:.4f}, {bx1 + size:.4f}, {by1 + size:.4f}] "
               f"depth={location.depth:.4f} "
               f"satisfied={int(score[iy, ix, isz, idp])}/{len(resolved)}")
        return LocateResponse(location=location, raw_text=raw)


def _reference_object(ref: Raster) -> tuple[np.ndarray, np.ndarray]:
    """RGB and boolean mask of the reference crop's tight object content."""
    if ref.channels == 4:
        alpha = ref.data[:, :, 3] > 0
        rgb = ref.data[:, :, :3]
    else:
        rgb = ref.data if ref.channels == 3 else np.repeat(
            ref.data[:, :, None], 3, axis=2)
        alpha = np.ones(rgb.shape[:2], dtype=bool)
    if not alpha.any():
        raise InvalidBundle("reference crop has no object pixels")
    rows = np.any(alpha, axis=1).nonzero()[0]
    cols = np.any(alpha, axis=0).nonzero()[0]
    r0, r1 = int(rows[0]), int(rows[-1]) + 1
    c0, c1 = int(cols[0]), int(cols[-1]) + 1
    return rgb[r0:r1, c0:c1], alpha[r0:r1, c0:c1]


def _canvas_rgb(raster: Raster) -> np.ndarray:
    if raster.channels == 3:
        return raster.data.copy()
    if raster.channels == 4:
        return raster.data[:, :, :3].copy()
    return np.repeat(raster.data[:, :, None], 3, axis=2)


def mock_visibility(
    bundle: ConditioningBundle,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, tuple[int, int, int, int]]:
    """Object depth, mask, visibility, and paste region of the mock compositor.

    Returns (obj_depth_prime, obj_mask, visible, (x1, y1, x2, y2)), all in
    the bundle's working-crop pixel space. Visibility is exactly
    obj_mask & (obj_depth_prime >= fused_depth), nearest-wins with ties
    visible.
    """
    tw, th = bundle.masked_scene.size
    box = bbox_to_crop(bundle.location.bbox, bundle.frame_size, bundle.crop)
    px1, py1, px2, py2 = box.to_pixels(tw, th)
    px2, py2 = max(px2, px1 + 1), max(py2, py1 + 1)
    bw, bh = px2 - px1, py2 - py1

    rgb_t, alpha_t = _reference_object(bundle.reference_crop)
    mask_r = resize_mask(alpha_t.astype(np.uint8), (bw, bh)).astype(bool)
    if not mask_r.any():
        empty = np.zeros((bh, bw), dtype=bool)
        return np.zeros((bh, bw), np.float32), empty, empty, (px1, py1, px2, py2)
    grad = _vertical_gradient(alpha_t.shape[0], alpha_t.shape[1])
    depth_r = DepthMap.from_array(resize_float(grad, (bw, bh)))
    obj_prime = rescale_object_depth(depth_r, Mask(mask_r.astype(np.uint8)),
                                     bundle.location.depth, bundle.alpha)
    fused_region = bundle.fused_depth.data[py1:py2, px1:px2]
    visible = mask_r & (obj_prime.data >= fused_region)
    return obj_prime.data, mask_r, visible, (px1, py1, px2, py2)


class MockCompositeClient:
    """Depth-aware paste of the reference object onto the collage canvas.

    The object's tight content is scaled into the location box; a pixel is
    painted only where its rescaled depth is >= the fused depth (nearest
    wins, ties visible). A dropped-id bundle renders a flat gray rectangle
    over the box as a placeholder silhouette.
    """

    def compose(self, bundle: ConditioningBundle) -> Raster:
        canvas = _canvas_rgb(bundle.collage)
        tw, th = bundle.masked_scene.size
        if bundle.dropped.id:
            box = bbox_to_crop(bundle.location.bbox, bundle.frame_size,
                               bundle.crop)
            px1, py1, px2, py2 = box.to_pixels(tw, th)
            canvas[py1:max(py2, py1 + 1), px1:max(px2, px1 + 1)] = 128
            return Raster(canvas)

        _, mask_r, visible, (px1, py1, px2, py2) = mock_visibility(bundle)
        if not visible.any():
            return Raster(canvas)
        rgb_t, _ = _reference_object(bundle.reference_crop)
        rgb_r = resize_image(rgb_t, (px2 - px1, py2 - py1))
        region = canvas[py1:py2, px1:px2]
        region[visible] = rgb_r[visible]
        return Raster(canvas)


# --- wire payloads ----------------------------------------------------------------

def encode_payload(
    data: bytes, encoding: str, files: Optional[dict[str, bytes]],
    field: str,
) -> dict:
    """Inline as base64, or stash in `files` when large and files are allowed."""
    if files is not None and len(data) > PAYLOAD_INLINE_LIMIT:
        files[field] = data
        return {"encoding": "file_ref", "ref": field}
    return {"encoding": encoding, "data": base64.b64encode(data).decode("ascii")}


def encode_request_payloads(
    parts: Sequence[tuple[str, bytes, str]],
    files: Optional[dict[str, bytes]],
) -> dict[str, dict]:
    """Encode all binary payloads of one request as (field, bytes, encoding).

    Once any payload overflows the inline limit, every payload of the
    request ships as a multipart file part: servers cap the size of the
    JSON form field, so mixing one file part with near-limit inline base64
    would be rejected.
    """
    if files is not None and any(
            len(data) > PAYLOAD_INLINE_LIMIT for _, data, _ in parts):
        out = {}
        for field, data, _ in parts:
            files[field] = data
            out[field] = {"encoding": "file_ref", "ref": field}
        return out
    return {
        field: {"encoding": enc,
                "data": base64.b64encode(data).decode("ascii")}
        for field, data, enc in parts
    }


def decode_payload(obj: dict, files: Optional[Mapping[str, bytes]] = None) -> bytes:
    enc = obj.get("encoding")
    if enc == "file_ref":
        ref = obj.get("ref", "")
        if files is None or ref not in files:
            raise BackendUnavailable(f"payload references missing file part {ref!r}")
        return files[ref]
    if enc not in ("png_b64", "pfm_b64"):
        raise BackendUnavailable(f"unknown payload encoding {enc!r}")
    try:
        return base64.b64decode(obj["data"], validate=True)
    except (KeyError, ValueError) as exc:
        raise BackendUnavailable(f"corrupt payload: {exc}") from exc


def resolve_file_refs(obj: Any, files: Mapping[str, bytes]) -> Any:
    """Replace file_ref payloads with inline base64, sniffing PFM vs PNG."""
    if isinstance(obj, dict):
        if obj.get("encoding") == "file_ref":
            data = decode_payload(obj, files)
            encoding = "pfm_b64" if data[:2] == b"Pf" else "png_b64"
            return {"encoding": encoding,
                    "data": base64.b64encode(data).decode("ascii")}
        return {k: resolve_file_refs(v, files) for k, v in obj.items()}
    if isinstance(obj, list):
        return [resolve_file_refs(v, files) for v in obj]
    return obj


def annotations_to_wire(annotations: Optional[AnnotationsLike]) -> Optional[dict]:
    if annotations is None:
        return None
    return {
        "instances": [
            {"id": str(inst.id), "name": str(inst.name),
             "bbox": inst.bbox.as_list()}
            for inst in annotations.instances
        ]
    }


def _depth_from_payload(obj: dict, files: Optional[Mapping[str, bytes]] = None) -> DepthMap:
    if obj.get("encoding") == "png_b64":
        raise BackendUnavailable("depth payloads must be pfm_b64")
    try:
        return read_pfm_bytes(decode_payload(obj, files))
    except Exception as exc:  # malformed bytes are a backend fault
        if isinstance(exc, BackendUnavailable):
            raise
        raise BackendUnavailable(f"backend returned a bad depth map: {exc}") from exc


def _image_from_payload(obj: dict, files: Optional[Mapping[str, bytes]] = None) -> Raster:
    try:
        return read_image(decode_payload(obj, files))
    except Exception as exc:
        if isinstance(exc, BackendUnavailable):
            raise
        raise BackendUnavailable(f"backend returned a bad image: {exc}") from exc


# --- transports -------------------------------------------------------------------

class _HttpTransport:
    supports_files = True

    def __init__(self, base_url: str, timeout: float):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def post(self, kind: str, request: dict, files: dict[str, bytes]) -> dict:
        import httpx

        url = f"{self.base_url}/v1/{kind}"
        try:
            if files:
                parts = {name: (name, data, "application/octet-stream")
                         for name, data in files.items()}
                resp = httpx.post(url, data={"request": json.dumps(request)},
                                  files=parts, timeout=self.timeout)
            else:
                resp = httpx.post(url, json=request, timeout=self.timeout)
        except httpx.TimeoutException as exc:
            raise BackendTimeout(f"{kind} backend timed out: {exc}") from exc
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"{kind} backend unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise BackendUnavailable(
                f"{kind} backend returned {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as exc:
            raise BackendUnavailable(f"{kind} backend sent non-JSON") from exc


class _SubprocessTransport:
    supports_files = False

    def __init__(self, cmd: Sequence[str], timeout: float):
        self.cmd = tuple(cmd)
        self.timeout = timeout

    def post(self, kind: str, request: dict, files: dict[str, bytes]) -> dict:
        if files:
            raise BackendUnavailable("subprocess transport cannot carry file parts")
        payload = json.dumps({"kind": kind, "request": request})
        try:
            proc = subprocess.run(
                self.cmd, input=payload.encode("utf-8"),
                capture_output=True, timeout=self.timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise BackendTimeout(f"{kind} backend timed out: {exc}") from exc
        except OSError as exc:
            raise BackendUnavailable(f"cannot spawn {self.cmd}: {exc}") from exc
        if proc.returncode != 0:
            raise BackendUnavailable(
                f"{kind} backend exited {proc.returncode}: "
                f"{proc.stderr.decode('utf-8', 'replace')[:200]}")
        try:
            return json.loads(proc.stdout.decode("utf-8"))
        except ValueError as exc:
            raise BackendUnavailable(f"{kind} backend sent non-JSON") from exc


def _validated(kind: str, side: str, body: dict) -> dict:
    try:
        wire_validator(kind, side).validate(body)
    except jsonschema.ValidationError as exc:
        raise BackendUnavailable(
            f"{kind} {side} fails wire schema: {exc.message}") from exc
    return body


class _RemoteClient:
    def __init__(self, transport):
        self._t = transport

    def _files(self) -> Optional[dict[str, bytes]]:
        return {} if self._t.supports_files else None

    def _call(self, kind: str, request: dict,
              files: Optional[dict[str, bytes]]) -> dict:
        _validated(kind, "request", request)
        response = self._t.post(kind, request, files or {})
        return _validated(kind, "response", response)


class RemoteDepthClient(_RemoteClient):
    def predict(self, image: Raster) -> DepthMap:
        files = self._files()
        req = encode_request_payloads(
            [("image", image_to_png_bytes(image), "png_b64")], files)
        resp = self._call("depth", req, files)
        return _depth_from_payload(resp["depth"])


class RemoteSegmentClient(_RemoteClient):
    def segment(self, image: Raster, hint: Optional[BBox] = None) -> Mask:
        files = self._files()
        req: dict[str, Any] = dict(encode_request_payloads(
            [("image", image_to_png_bytes(image), "png_b64")], files))
        req["hint"] = hint.as_list() if hint is not None else None
        resp = self._call("segment", req, files)
        try:
            return mask_from_png_bytes(decode_payload(resp["mask"]))
        except BackendUnavailable:
            raise
        except Exception as exc:
            raise BackendUnavailable(f"backend returned a bad mask: {exc}") from exc


class RemoteInpaintClient(_RemoteClient):
    def remove(self, image: Raster, mask: Mask) -> Raster:
        files = self._files()
        req = encode_request_payloads([
            ("image", image_to_png_bytes(image), "png_b64"),
            ("mask", mask_to_png_bytes(mask), "png_b64"),
        ], files)
        resp = self._call("inpaint", req, files)
        return _image_from_payload(resp["image"])


class RemoteLocateClient(_RemoteClient):
    def locate(
        self,
        background: Raster,
        depth: DepthMap,
        instruction: str,
        annotations: Optional[AnnotationsLike] = None,
    ) -> LocateResponse:
        files = self._files()
        req: dict[str, Any] = dict(encode_request_payloads([
            ("background", image_to_png_bytes(background), "png_b64"),
            ("depth", write_pfm_bytes(depth), "pfm_b64"),
        ], files))
        req["instruction"] = instruction
        req["annotations"] = annotations_to_wire(annotations)
        resp = self._call("locate", req, files)
        try:
            location = Location25D.from_json(resp["location"])
        except Exception as exc:
            raise BackendUnavailable(f"backend returned a bad location: {exc}") from exc
        return LocateResponse(location=location, raw_text=resp["raw_text"])


class RemoteCompositeClient(_RemoteClient):
    def compose(self, bundle: ConditioningBundle) -> Raster:
        files = self._files()
        wire = bundle_to_wire(bundle)
        parts = [(key, base64.b64decode(wire[key]["data"]), wire[key]["encoding"])
                 for key in ("masked_scene", "collage", "fused_depth", "reference")]
        wire.update(encode_request_payloads(parts, files))
        resp = self._call("composite", {"bundle": wire}, files)
        return _image_from_payload(resp["image"])


# --- endpoint configuration --------------------------------------------------------

_TRANSPORTS = ("local-mock", "http", "subprocess")


@dataclass(frozen=True)
class ClientEndpoint:
    kind: str
    transport: str = "local-mock"
    base_url: str = ""
    cmd: tuple[str, ...] = ()
    timeout: float = 30.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BackendUnavailable(f"unknown backend kind {self.kind!r}")
        if self.transport not in _TRANSPORTS:
            raise BackendUnavailable(f"unknown transport {self.transport!r}")
        if self.transport == "http" and (not self.base_url or self.cmd):
            raise BackendUnavailable("http transport needs base_url and no cmd")
        if self.transport == "subprocess" and (not self.cmd or self.base_url):
            raise BackendUnavailable("subprocess transport needs cmd and no base_url")
        if self.transport == "local-mock" and (self.base_url or self.cmd):
            raise BackendUnavailable("local-mock takes neither base_url nor cmd")


_MOCKS: dict[str, Callable[[], Any]] = {
    "depth": MockDepthClient,
    "segment": MockSegmentClient,
    "inpaint": MockInpaintClient,
    "locate": MockLocateClient,
    "composite": MockCompositeClient,
}

_REMOTE: dict[str, type] = {
    "depth": RemoteDepthClient,
    "segment": RemoteSegmentClient,
    "inpaint": RemoteInpaintClient,
    "locate": RemoteLocateClient,
    "composite": RemoteCompositeClient,
}


def make_client(endpoint: ClientEndpoint) -> Any:
    if endpoint.transport == "local-mock":
        return _MOCKS[endpoint.kind]()
    if endpoint.transport == "http":
        return _REMOTE[endpoint.kind](
            _HttpTransport(endpoint.base_url, endpoint.timeout))
    return _REMOTE[endpoint.kind](
        _SubprocessTransport(endpoint.cmd, endpoint.timeout))


@dataclass(frozen=True)
class ClientSet:
    depth: DepthClient
    segment: SegmentClient
    inpaint: InpaintClient
    locate: LocateClient
    composite: CompositeClient
    endpoints: Optional[Mapping[str, ClientEndpoint]] = None

    @classmethod
    def from_endpoints(cls, endpoints: Mapping[str, ClientEndpoint]) -> "ClientSet":
        return cls(**{kind: make_client(endpoints[kind]) for kind in KINDS},
                   endpoints=dict(endpoints))

    @classmethod
    def mocks(cls) -> "ClientSet":
        return cls.from_endpoints(default_endpoints())


def default_endpoints() -> dict[str, ClientEndpoint]:
    return {kind: ClientEndpoint(kind=kind) for kind in KINDS}


def endpoint_description(
    endpoints: Optional[Mapping[str, ClientEndpoint]] = None,
) -> dict[str, dict]:
    """JSON-able summary of the configured backends, for run manifests."""
    eps = default_endpoints() if endpoints is None else endpoints
    out: dict[str, dict] = {}
    for kind in KINDS:
        ep = eps[kind]
        entry: dict[str, Any] = {"transport": ep.transport,
                                 "timeout": ep.timeout}
        if ep.base_url:
            entry["base_url"] = ep.base_url
        if ep.cmd:
            entry["cmd"] = list(ep.cmd)
        out[kind] = entry
    return out


def endpoints_from_config(
    config: Optional[Mapping[str, Any]] = None,
    env: Optional[Mapping[str, str]] = None,
) -> dict[str, ClientEndpoint]:
    """Defaults, overlaid with [backends] config, overlaid with env URLs."""
    env = os.environ if env is None else env
    endpoints = default_endpoints()
    backends = (config or {}).get("backends", {})
    for kind, entry in backends.items():
        if kind not in KINDS:
            raise BackendUnavailable(f"unknown backend kind {kind!r} in config")
        timeout = float(entry.get("timeout", 30.0))
        if "url" in entry:
            endpoints[kind] = ClientEndpoint(kind=kind, transport="http",
                                             base_url=entry["url"],
                                             timeout=timeout)
        elif "cmd" in entry:
            endpoints[kind] = ClientEndpoint(kind=kind, transport="subprocess",
                                             cmd=tuple(entry["cmd"]),
                                             timeout=timeout)
        else:
            endpoints[kind] = ClientEndpoint(kind=kind, timeout=timeout)
    for kind in KINDS:
        url = env.get(f"FORGE_BACKEND_{kind.upper()}_URL")
        if url:
            endpoints[kind] = ClientEndpoint(kind=kind, transport="http",
                                             base_url=url,
                                             timeout=endpoints[kind].timeout)
    return endpoints
