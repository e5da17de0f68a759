"""Resampling helpers with fixed interpolation policy per payload type.

Depth and float maps resize bilinearly, masks always nearest-neighbor
(so binary masks stay binary), images bilinearly. Same-size calls return
the input unchanged so no-op resizes are bit-exact.
"""

from __future__ import annotations

import cv2
import numpy as np

__all__ = ["resize_float", "resize_mask", "resize_image"]


def resize_float(arr: np.ndarray, size: tuple[int, int], method: str = "bilinear") -> np.ndarray:
    """Resize a (H, W) float32 array to (width, height) = size."""
    w, h = size
    if (arr.shape[1], arr.shape[0]) == (w, h):
        return arr.astype(np.float32, copy=False)
    interp = cv2.INTER_LINEAR if method == "bilinear" else cv2.INTER_NEAREST
    return cv2.resize(arr.astype(np.float32), (w, h), interpolation=interp)


def resize_mask(arr: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbor resize for (H, W) binary uint8 masks."""
    w, h = size
    if (arr.shape[1], arr.shape[0]) == (w, h):
        return arr
    return cv2.resize(arr, (w, h), interpolation=cv2.INTER_NEAREST)


def resize_image(arr: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Bilinear resize for uint8 images, any channel count."""
    w, h = size
    if (arr.shape[1], arr.shape[0]) == (w, h):
        return arr
    return cv2.resize(arr, (w, h), interpolation=cv2.INTER_LINEAR)
