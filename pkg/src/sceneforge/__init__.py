"""Depth-aware generative object placement toolkit.

The package composes a reference object into a background scene at a
2.5D location (a normalized bounding box plus a scalar depth where
larger means nearer). It covers the full loop: depth fusion, detail
collages, instruction-driven placement, counterfactual dataset
construction, locator evaluation, and a local HTTP service.
"""

from __future__ import annotations

from .bundle import (
    ConditioningBundle,
    DroppedFlags,
    GuidanceArrays,
    assemble_bundle,
    cfg_combine,
    combine_control_maps,
    drop_conditions,
    load_bundle,
    save_bundle,
)
from .clients import (
    ClientEndpoint,
    ClientSet,
    MockCompositeClient,
    MockDepthClient,
    MockInpaintClient,
    MockLocateClient,
    MockSegmentClient,
    default_endpoints,
    endpoints_from_config,
    make_client,
)
from .compose import (
    PAPER_REFERENCE_METRICS,
    ComposeJob,
    ComposeResult,
    compose,
    load_annotations,
    run_eval,
)
from .dataset import (
    AnchorContext,
    DatasetRecord,
    SceneAnnotation,
    VideoPair,
    build_dataset,
    build_record,
    load_scenes,
    read_jsonl,
    sample_video_pair,
    write_jsonl,
)
from .detail import HFMap, augment_mask, hf_extract, stitch_collage
from .errors import (
    BackendTimeout,
    BackendUnavailable,
    BBoxOutOfFrame,
    DegenerateBox,
    DimensionMismatch,
    DimensionOverflow,
    EmptyMask,
    InpaintFailure,
    InstanceMissing,
    InvalidBundle,
    IoFailure,
    MalformedHeader,
    NoForeground,
    NonFiniteSample,
    OutOfRange,
    PortInUse,
    SceneForgeError,
    ShapeMismatch,
    TooFewInstances,
    UnparsableInstruction,
    UnsupportedBitDepth,
)
from .fusion import (
    FUSION_MODES,
    FusionRequest,
    FusionResult,
    fuse,
    rescale_object_depth,
)
from .geometry import (
    CropSpec,
    bbox_mse,
    bbox_to_crop,
    build_eval_report,
    crop_depth,
    crop_mask,
    crop_raster,
    depth_mse,
    iou,
    paste_crop_back,
    zoom_in,
)
from .imageio import (
    read_image,
    read_mask,
    read_pfm,
    read_pfm_bytes,
    write_image,
    write_mask,
    write_pfm,
    write_pfm_bytes,
)
from .manifest import MANIFEST_NAME, verify_manifest, write_manifest
from .relations import (
    Instance,
    Relation,
    classify_codes,
    classify_pair,
    derive_relations,
    parse_instruction,
    relation_satisfied,
    render_instruction,
)
from .seeding import derive_seed, rng_for
from .types import BBox, DepthMap, Location25D, Mask, Raster

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # types
    "BBox", "DepthMap", "Location25D", "Mask", "Raster",
    # errors
    "SceneForgeError", "DimensionMismatch", "OutOfRange", "EmptyMask",
    "NoForeground", "ShapeMismatch", "NonFiniteSample", "InvalidBundle",
    "UnparsableInstruction", "TooFewInstances", "InstanceMissing",
    "InpaintFailure", "BackendUnavailable", "BackendTimeout", "PortInUse",
    "MalformedHeader", "DimensionOverflow", "UnsupportedBitDepth",
    "IoFailure", "DegenerateBox", "BBoxOutOfFrame",
    # io
    "read_image", "write_image", "read_mask", "write_mask",
    "read_pfm", "write_pfm", "read_pfm_bytes", "write_pfm_bytes",
    # geometry
    "CropSpec", "zoom_in", "bbox_to_crop", "crop_raster", "crop_depth",
    "crop_mask", "paste_crop_back", "iou", "bbox_mse", "depth_mse",
    "build_eval_report",
    # fusion
    "FUSION_MODES", "FusionRequest", "FusionResult", "fuse",
    "rescale_object_depth",
    # detail
    "HFMap", "augment_mask", "hf_extract", "stitch_collage",
    # relations
    "Instance", "Relation", "classify_pair", "classify_codes",
    "relation_satisfied", "derive_relations", "render_instruction",
    "parse_instruction",
    # conditioning
    "ConditioningBundle", "DroppedFlags", "GuidanceArrays",
    "assemble_bundle", "combine_control_maps", "drop_conditions",
    "cfg_combine", "save_bundle", "load_bundle",
    # dataset
    "SceneAnnotation", "AnchorContext", "DatasetRecord", "VideoPair",
    "load_scenes", "build_record", "build_dataset", "sample_video_pair",
    "read_jsonl", "write_jsonl",
    # clients
    "ClientEndpoint", "ClientSet", "make_client", "default_endpoints",
    "endpoints_from_config", "MockDepthClient", "MockSegmentClient",
    "MockInpaintClient", "MockLocateClient", "MockCompositeClient",
    # pipeline
    "ComposeJob", "ComposeResult", "compose", "run_eval",
    "load_annotations", "PAPER_REFERENCE_METRICS",
    # seeding / manifests
    "derive_seed", "rng_for", "MANIFEST_NAME", "write_manifest",
    "verify_manifest",
]
