"""Pydantic request/response models for the /api endpoints."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class Payload(BaseModel):
    """Inline raster payload. PNG for images and masks, PFM for depth."""

    encoding: Literal["png_b64", "pfm_b64"]
    data: str


class LocationModel(BaseModel):
    bbox: list[float] = Field(min_length=4, max_length=4)
    depth: float


class InstanceModel(BaseModel):
    id: str
    name: str
    bbox: list[float] = Field(min_length=4, max_length=4)


class AnnotationsModel(BaseModel):
    instances: list[InstanceModel]


class FuseRequest(BaseModel):
    bg_depth: Payload
    obj_depth: Payload
    obj_mask: Payload
    location: LocationModel
    mode: str = "place"
    alpha: float = 1.0
    occlusion_rule: str = "nearest_wins"


class FuseResponse(BaseModel):
    fused_depth: Payload
    scene_mask: Payload
    placed_mask: Payload


class AugmentMaskRequest(BaseModel):
    mask: Payload
    level: int
    dilate_frac: float = 0.02


class AugmentMaskResponse(BaseModel):
    mask: Payload


class CollageRequest(BaseModel):
    scene: Payload
    object_image: Payload
    mask: Payload
    level: int = 2
    bbox: list[float] = Field(min_length=4, max_length=4)
    dilate_frac: float = 0.02


class CollageResponse(BaseModel):
    collage: Payload
    detail_map: Payload


class DepthRequest(BaseModel):
    image: Payload


class DepthResponse(BaseModel):
    depth: Payload


class LocateApiRequest(BaseModel):
    background: Payload
    depth: Optional[Payload] = None
    instruction: str
    annotations: Optional[AnnotationsModel] = None


class LocateApiResponse(BaseModel):
    location: LocationModel
    raw_text: str


class ComposeApiRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    background: Payload
    reference: Payload
    instruction: Optional[str] = None
    location: Optional[LocationModel] = None
    mode: str = "place"
    mask_level: int = 2
    lam: float = Field(default=1.0, alias="lambda")
    s: float = 1.0
    seed: int = 0
    alpha: float = 1.0
    annotations: Optional[AnnotationsModel] = None


class ComposeApiResponse(BaseModel):
    output: Payload
    location: LocationModel
    fused_depth: Payload
    collage: Payload
    detail_map: Payload


class ErrorBody(BaseModel):
    error: str
    detail: str
