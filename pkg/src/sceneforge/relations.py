"""Spatial-relation predicates and instruction templating/parsing.

A pair of objects gets exactly one predicate, with depth taking priority
over the image plane: if the depth gap reaches `tau_d` the pair is
in_front_of/behind; otherwise the dominant image-plane offset decides
above/below or left_of/right_of (threshold `tau_xy`); anything closer
than both thresholds is "near".

Instructions are rendered from fixed templates (a seeded verb choice) so
dataset generation needs no language model; `parse_instruction` inverts
the same grammar for the mock locator. An optional text-LLM client can
paraphrase rendered instructions, off by default.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal, Mapping, Optional, Protocol, Sequence

import numpy as np

from .errors import OutOfRange, UnparsableInstruction
from .fusion import anchor_depth
from .types import BBox, DepthMap

__all__ = [
    "Predicate",
    "PREDICATES",
    "PRED_CODE",
    "Instance",
    "Relation",
    "classify_pair",
    "classify_codes",
    "relation_satisfied",
    "derive_relations",
    "render_instruction",
    "parse_instruction",
    "TextParaphraseClient",
]

Predicate = Literal[
    "left_of", "right_of", "above", "below", "in_front_of", "behind", "near"
]

PREDICATES: tuple[str, ...] = (
    "left_of", "right_of", "above", "below", "in_front_of", "behind", "near"
)

PRED_CODE: dict[str, int] = {name: i for i, name in enumerate(PREDICATES)}

DEFAULT_TAU_D = 0.15
DEFAULT_TAU_XY = 0.05


@dataclass(frozen=True)
class Instance:
    """One annotated object in a scene."""

    id: str
    name: str
    bbox: BBox
    seg_path: Optional[str] = None


@dataclass(frozen=True)
class Relation:
    subject: str
    predicate: Predicate
    anchor: str

    def __post_init__(self):
        if self.predicate not in PREDICATES:
            raise OutOfRange(f"unknown predicate {self.predicate!r}")
        if self.subject == self.anchor:
            raise OutOfRange("relation subject and anchor must differ")

    def to_json(self) -> dict:
        return {"subject": self.subject, "predicate": self.predicate,
                "anchor": self.anchor}

    @classmethod
    def from_json(cls, obj: dict) -> "Relation":
        return cls(obj["subject"], obj["predicate"], obj["anchor"])


def classify_pair(
    target_center: tuple[float, float],
    target_depth: float,
    anchor_center: tuple[float, float],
    anchor_d: float,
    tau_d: float = DEFAULT_TAU_D,
    tau_xy: float = DEFAULT_TAU_XY,
) -> Predicate:
    """The single predicate describing target relative to anchor."""
    if abs(target_depth - anchor_d) >= tau_d:
        return "in_front_of" if target_depth > anchor_d else "behind"
    dx = target_center[0] - anchor_center[0]
    dy = target_center[1] - anchor_center[1]
    if abs(dy) >= abs(dx) and abs(dy) >= tau_xy:
        return "above" if dy < 0 else "below"  # origin top-left, y grows down
    if abs(dx) >= tau_xy:
        return "left_of" if dx < 0 else "right_of"
    return "near"


def relation_satisfied(
    predicate: str,
    target_center: tuple[float, float],
    target_depth: float,
    anchor_center: tuple[float, float],
    anchor_d: float,
    tau_d: float = DEFAULT_TAU_D,
    tau_xy: float = DEFAULT_TAU_XY,
) -> bool:
    return classify_pair(target_center, target_depth, anchor_center, anchor_d,
                         tau_d, tau_xy) == predicate


def classify_codes(
    cx: np.ndarray,
    cy: np.ndarray,
    d: np.ndarray,
    anchor_cx: float,
    anchor_cy: float,
    anchor_d: float,
    tau_d: float = DEFAULT_TAU_D,
    tau_xy: float = DEFAULT_TAU_XY,
) -> np.ndarray:
    """Vectorized classify_pair over broadcastable candidate arrays.

    Returns int codes indexing PREDICATES; must agree elementwise with
    classify_pair for scalar inputs.
    """
    dd = np.asarray(d, dtype=np.float64) - anchor_d
    dx = np.asarray(cx, dtype=np.float64) - anchor_cx
    dy = np.asarray(cy, dtype=np.float64) - anchor_cy
    dd, dx, dy = np.broadcast_arrays(dd, dx, dy)
    codes = np.full(dd.shape, PRED_CODE["near"], dtype=np.int8)
    depth_m = np.abs(dd) >= tau_d
    vert_m = ~depth_m & (np.abs(dy) >= np.abs(dx)) & (np.abs(dy) >= tau_xy)
    horiz_m = ~depth_m & ~vert_m & (np.abs(dx) >= tau_xy)
    codes[depth_m & (dd > 0)] = PRED_CODE["in_front_of"]
    codes[depth_m & (dd <= 0)] = PRED_CODE["behind"]
    codes[vert_m & (dy < 0)] = PRED_CODE["above"]
    codes[vert_m & (dy >= 0)] = PRED_CODE["below"]
    codes[horiz_m & (dx < 0)] = PRED_CODE["left_of"]
    codes[horiz_m & (dx >= 0)] = PRED_CODE["right_of"]
    return codes


def derive_relations(
    target: Instance,
    anchors: Sequence[Instance],
    depth: DepthMap,
    tau_d: float = DEFAULT_TAU_D,
    tau_xy: float = DEFAULT_TAU_XY,
    target_depth: Optional[float] = None,
) -> list[Relation]:
    """One relation per anchor; object depths read at their box centers."""
    d_t = anchor_depth(depth, target.bbox) if target_depth is None else target_depth
    out = []
    for anchor in anchors:
        d_a = anchor_depth(depth, anchor.bbox)
        pred = classify_pair(target.bbox.center, d_t, anchor.bbox.center, d_a,
                             tau_d, tau_xy)
        out.append(Relation(subject=target.id, predicate=pred, anchor=anchor.id))
    return out


# --- templating ---------------------------------------------------------------

_VERBS = ("Place", "Put", "Position", "Insert")

_PHRASES: dict[str, str] = {
    "left_of": "to the left of",
    "right_of": "to the right of",
    "above": "above",
    "below": "below",
    "in_front_of": "in front of",
    "behind": "behind",
    "near": "near",
}

# Accepted on the parsing side (generation always uses _PHRASES).
_PHRASE_SYNONYMS: dict[str, str] = {
    "to the left of": "left_of",
    "to the right of": "right_of",
    "left of": "left_of",
    "right of": "right_of",
    "above": "above",
    "over": "above",
    "below": "below",
    "underneath": "below",
    "under": "below",
    "in front of": "in_front_of",
    "behind": "behind",
    "near": "near",
    "next to": "near",
}


class TextParaphraseClient(Protocol):
    """Optional hook for an external text LLM; no implementation is bundled."""

    def paraphrase(self, text: str, seed: int) -> str: ...


def render_instruction(
    target_name: str,
    relations: Sequence[Relation],
    anchor_names: Mapping[str, str],
    seed: int,
    paraphraser: Optional[TextParaphraseClient] = None,
) -> str:
    """Deterministic templated instruction mentioning the target and all anchors."""
    if not relations:
        raise OutOfRange("need at least one relation to render an instruction")
    rng = np.random.default_rng(seed)
    verb = _VERBS[int(rng.integers(0, len(_VERBS)))]
    phrases = [
        f"{_PHRASES[rel.predicate]} the {anchor_names[rel.anchor]}"
        for rel in relations
    ]
    text = f"{verb} the {target_name} " + ", and ".join(phrases) + "."
    if paraphraser is not None:
        text = paraphraser.paraphrase(text, seed)
    return text


_PHRASE_ALTERNATION = "|".join(
    sorted((re.escape(k) for k in _PHRASE_SYNONYMS), key=len, reverse=True)
)
_HEAD_RE = re.compile(
    rf"^\s*(?:place|put|position|insert)\s+(?:the|a|an)\s+(?P<target>.+?)\s+"
    rf"(?P<rest>(?:{_PHRASE_ALTERNATION})\s+(?:the|a|an)\s+.+?)\s*\.?\s*$",
    re.IGNORECASE,
)
_PHRASE_RE = re.compile(
    rf"^(?P<phrase>{_PHRASE_ALTERNATION})\s+(?:the|a|an)\s+(?P<anchor>.+?)\s*$",
    re.IGNORECASE,
)


def parse_instruction(text: str) -> tuple[str, list[tuple[str, str]]]:
    """Invert the template grammar: (target_name, [(predicate, anchor_name), ...]).

    Raises UnparsableInstruction when the text does not match.
    """
    m = _HEAD_RE.match(text)
    if not m:
        raise UnparsableInstruction(f"cannot parse instruction: {text!r}")
    target = m.group("target").strip()
    rest = m.group("rest")
    chunks = re.split(r",?\s+and\s+|,\s+", rest)
    relations: list[tuple[str, str]] = []
    for chunk in chunks:
        chunk = chunk.strip().rstrip(".")
        if not chunk:
            continue
        pm = _PHRASE_RE.match(chunk)
        if not pm:
            raise UnparsableInstruction(f"cannot parse relation phrase: {chunk!r}")
        predicate = _PHRASE_SYNONYMS[pm.group("phrase").lower()]
        relations.append((predicate, pm.group("anchor").strip()))
    if not relations:
        raise UnparsableInstruction(f"no relation phrases found in: {text!r}")
    return target, relations
