"""Independent reference implementations used to check the library.

Everything here is written from the definitions alone, in the most direct
way available (pixel counting, explicit convolution loops, if/else
chains), deliberately avoiding the library's own code paths and its
image-processing dependencies.
"""

from __future__ import annotations

import numpy as np

# --- rasterized IoU -----------------------------------------------------------


def rasterized_iou(a, b, res: int = 1000) -> float:
    """IoU by counting pixels on a res x res grid (pixel-center sampling)."""
    centers = (np.arange(res) + 0.5) / res
    xs = centers[None, :]
    ys = centers[:, None]

    def occupancy(box):
        return ((xs >= box.x1) & (xs < box.x2)
                & (ys >= box.y1) & (ys < box.y2))

    occ_a, occ_b = occupancy(a), occupancy(b)
    union = np.count_nonzero(occ_a | occ_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(occ_a & occ_b) / union


# --- Sobel edge response ------------------------------------------------------

SOBEL_H = np.array([[-1, 0, 1],
                    [-2, 0, 2],
                    [-1, 0, 1]], dtype=np.float64)
SOBEL_V = SOBEL_H.T


def luma_reference(image: np.ndarray) -> np.ndarray:
    """ITU-R 601 luma of an (H, W, 3+) uint8 array, float64."""
    if image.ndim == 2:
        return image.astype(np.float64)
    r = image[:, :, 0].astype(np.float64)
    g = image[:, :, 1].astype(np.float64)
    b = image[:, :, 2].astype(np.float64)
    return 0.299 * r + 0.587 * g + 0.114 * b


def sobel_response_reference(gray: np.ndarray) -> np.ndarray:
    """(|Gh| + |Gv|) / (8*255) with replicate padding, by explicit loops."""
    h, w = gray.shape
    padded = np.empty((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = gray
    padded[0, 1:-1] = gray[0]
    padded[-1, 1:-1] = gray[-1]
    padded[:, 0] = padded[:, 1]
    padded[:, -1] = padded[:, -2]

    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            win = padded[y:y + 3, x:x + 3]
            gh = float((win * SOBEL_H).sum())
            gv = float((win * SOBEL_V).sum())
            out[y, x] = abs(gh) + abs(gv)
    return out / (8.0 * 255.0)


# --- spatial relation classification -------------------------------------------


def classify_reference(t_center, t_depth, a_center, a_depth,
                       tau_d: float, tau_xy: float) -> str:
    """Predicate for (target, anchor) straight from the priority rules."""
    dd = t_depth - a_depth
    if abs(dd) >= tau_d:
        return "in_front_of" if dd > 0 else "behind"
    dx = t_center[0] - a_center[0]
    dy = t_center[1] - a_center[1]
    if abs(dy) >= abs(dx) and abs(dy) >= tau_xy:
        return "below" if dy > 0 else "above"
    if abs(dx) >= tau_xy:
        return "right_of" if dx > 0 else "left_of"
    return "near"


# --- boundary-ring inpainting fill ---------------------------------------------


def chebyshev_dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation with a (2r+1)^2 square element, via shifted ORs."""
    out = np.zeros_like(mask, dtype=bool)
    src = mask.astype(bool)
    h, w = src.shape
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            ys = slice(max(0, dy), min(h, h + dy))
            xs = slice(max(0, dx), min(w, w + dx))
            ys_src = slice(max(0, -dy), min(h, h - dy))
            xs_src = slice(max(0, -dx), min(w, w - dx))
            out[ys, xs] |= src[ys_src, xs_src]
    return out


def ring_fill_reference(image: np.ndarray, hole: np.ndarray) -> np.ndarray:
    """Per-channel median of the 2-px ring around the hole (round half up)."""
    ring = chebyshev_dilate(hole, 2) & ~hole.astype(bool)
    chans = image if image.ndim == 3 else image[:, :, None]
    source = chans[ring] if ring.any() else chans.reshape(-1, chans.shape[-1])
    fill = np.floor(np.median(source.astype(np.float64), axis=0) + 0.5)
    out = chans.copy()
    out[hole.astype(bool)] = fill.astype(out.dtype)
    return out if image.ndim == 3 else out[:, :, 0]


# --- classifier-free guidance ---------------------------------------------------


def cfg_reference(eps_uc: np.ndarray, eps_c: np.ndarray, s: float) -> np.ndarray:
    return eps_uc + s * (eps_c - eps_uc)


# --- depth rescale ---------------------------------------------------------------


def rescale_reference(obj_depth: np.ndarray, mask: np.ndarray,
                      target: float, alpha: float) -> np.ndarray:
    """Anchor at the mask-bbox center pixel; clamp to [0,1]; zero off-mask."""
    mb = mask.astype(bool)
    rows = np.nonzero(mb.any(axis=1))[0]
    cols = np.nonzero(mb.any(axis=0))[0]
    ar = (rows[0] + rows[-1] + 1) // 2
    ac = (cols[0] + cols[-1] + 1) // 2
    if mb[ar, ac]:
        anchor = float(obj_depth[ar, ac])
    else:
        anchor = float(np.median(obj_depth[mb]))
    out = np.zeros_like(obj_depth, dtype=np.float64)
    shifted = np.clip(target + alpha * (obj_depth.astype(np.float64) - anchor),
                      0.0, 1.0)
    out[mb] = shifted[mb]
    return out


# --- random geometry helpers -----------------------------------------------------


def random_box(rng: np.random.Generator, min_side: float = 0.02,
               snap: float | None = None):
    """Return (x1, y1, x2, y2) uniformly, with both sides >= min_side.

    With `snap`, coordinates are rounded to that grid so box edges align
    with rasterization cell boundaries and pixel counting is exact.
    """
    while True:
        x = np.sort(rng.uniform(0.0, 1.0, size=2))
        y = np.sort(rng.uniform(0.0, 1.0, size=2))
        if snap is not None:
            x = np.round(x / snap) * snap
            y = np.round(y / snap) * snap
        if x[1] - x[0] >= min_side and y[1] - y[0] >= min_side:
            return float(x[0]), float(y[0]), float(x[1]), float(y[1])


def random_blob(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    """Union of a few random filled ellipses; guaranteed non-empty."""
    mask = np.zeros((height, width), dtype=np.uint8)
    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(int(rng.integers(1, 4))):
        cy = rng.uniform(0.2, 0.8) * height
        cx = rng.uniform(0.2, 0.8) * width
        ry = rng.uniform(0.05, 0.25) * height + 1
        rx = rng.uniform(0.05, 0.25) * width + 1
        mask |= (((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0)
    if not mask.any():
        mask[height // 2, width // 2] = 1
    return mask.astype(np.uint8)
