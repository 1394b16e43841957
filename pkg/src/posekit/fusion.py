"""Keypoint likelihood fusion: response-map geometry, the viewpoint-
conditioned mixture-of-Gaussians prior, and fused argmax decoding.

Response maps are per-keypoint spatial score grids over a normalized object
crop (fine 12x12 or coarse 6x6). Keypoint coordinates are normalized by
warping the instance bounding box to the fixed 12x12 grid; the prior and
the fused decode both live on that grid, with cell (row i, col j) centered
at (x, y) = (j + 0.5, i + 0.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .so3 import geodesic_distances

GRID_SIZE = 12
RESPONSE_SIZES = (6, 12)

NEIGHBOR_THRESHOLD = math.pi / 6
PRIOR_SIGMA = 2.0
PRIOR_FLOOR = 1e-12

Box = tuple[float, float, float, float]


class NoPriorSupportError(Exception):
    """Raised when a keypoint is present in no neighbor of the prior bank."""


@dataclass(frozen=True)
class ResponseMap:
    """One keypoint's spatial score grid, tagged with its identity."""

    grid: np.ndarray
    keypoint_id: int
    class_name: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "grid", validate_response_grid(self.grid))


def validate_response_grid(grid: np.ndarray) -> np.ndarray:
    """Check that a grid is square 6x6 or 12x12 with finite entries."""
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] not in RESPONSE_SIZES:
        raise ValueError(f"response grid must be 6x6 or 12x12, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("response grid has non-finite entries")
    return g


@dataclass
class PriorBank:
    """Training corpus for the viewpoint-conditioned prior of one class.

    rotations: (n, 3, 3) rotation matrices, one per training instance.
    keypoints: (n, k, 2) normalized grid coordinates in [0, 12) x [0, 12).
    present:   (n, k) flags; absent keypoints contribute nothing.
    """

    class_name: str
    rotations: np.ndarray
    keypoints: np.ndarray
    present: np.ndarray | None = None

    def __post_init__(self) -> None:
        rot = np.asarray(self.rotations, dtype=np.float64)
        kps = np.asarray(self.keypoints, dtype=np.float64)
        if rot.ndim != 3 or rot.shape[1:] != (3, 3):
            raise ValueError(f"rotations must have shape (n, 3, 3), got {rot.shape}")
        if kps.ndim != 3 or kps.shape[2] != 2 or kps.shape[0] != rot.shape[0]:
            raise ValueError(f"keypoints must have shape (n, k, 2), got {kps.shape}")
        present = self.present
        if present is None:
            present = np.ones(kps.shape[:2], dtype=bool)
        present = np.asarray(present, dtype=bool)
        if present.shape != kps.shape[:2]:
            raise ValueError("present flags must have shape (n, k)")
        used = kps[present]
        if used.size and (
            not np.all(np.isfinite(used))
            or used.min() < 0.0
            or used.max() >= GRID_SIZE
        ):
            raise ValueError("present keypoint coordinates must lie in [0, 12)")
        self.rotations = rot
        self.keypoints = kps
        self.present = present

    def __len__(self) -> int:
        return self.rotations.shape[0]

    @property
    def num_keypoints(self) -> int:
        return self.keypoints.shape[1]


def receptive_center(i: int, j: int, stride: float) -> tuple[float, float]:
    """Input-image pixel (x, y) at the center of output cell (row i, col j)."""
    return (stride * j, stride * i)


def target_response_map(
    keypoints: Sequence[tuple[float, float] | None],
    shape: tuple[int, int],
    stride: float,
) -> np.ndarray:
    """Ideal one-hot response stack for annotated keypoint locations.

    For each present keypoint the single cell whose receptive-field center
    is nearest (Euclidean) to it is set to 1; all other cells are 0, and
    absent keypoints (None) yield all-zero channels. Returns (k, h, w).
    """
    h, w = shape
    maps = np.zeros((len(keypoints), h, w))
    cx = stride * np.arange(w)
    cy = stride * np.arange(h)
    for k, kp in enumerate(keypoints):
        if kp is None:
            continue
        x, y = kp
        d2 = (cy[:, None] - y) ** 2 + (cx[None, :] - x) ** 2
        i, j = np.unravel_index(int(np.argmin(d2)), (h, w))
        maps[k, i, j] = 1.0
    return maps


def upsample_coarse(coarse: np.ndarray, mode: str = "nearest") -> np.ndarray:
    """Upsample a 6x6 map to 12x12.

    The default replicates each coarse cell into its 2x2 block of fine
    cells, which is exact and order-independent. mode="bilinear" instead
    interpolates between coarse cell centers with edge clamping.
    """
    c = np.asarray(coarse, dtype=np.float64)
    if c.shape != (6, 6):
        raise ValueError(f"coarse map must be 6x6, got shape {c.shape}")
    if mode == "nearest":
        return np.repeat(np.repeat(c, 2, axis=0), 2, axis=1)
    if mode == "bilinear":
        # fine cell center (i + 0.5) / 2 - 0.5 in coarse index space
        pos = (np.arange(12) + 0.5) / 2.0 - 0.5
        lo = np.clip(np.floor(pos).astype(int), 0, 5)
        hi = np.clip(lo + 1, 0, 5)
        t = np.clip(pos - lo, 0.0, 1.0)
        rows = c[lo] * (1 - t)[:, None] + c[hi] * t[:, None]
        return rows[:, lo] * (1 - t)[None, :] + rows[:, hi] * t[None, :]
    raise ValueError(f"unknown upsampling mode {mode!r}")


def combine_scales(
    fine: np.ndarray,
    coarse: np.ndarray,
    w_fine: float = 0.5,
    w_coarse: float = 0.5,
    mode: str = "nearest",
) -> np.ndarray:
    """Linear combination of the fine map and the upsampled coarse map."""
    f = np.asarray(fine, dtype=np.float64)
    if f.shape != (12, 12):
        raise ValueError(f"fine map must be 12x12, got shape {f.shape}")
    if not (math.isfinite(w_fine) and math.isfinite(w_coarse)):
        raise ValueError("scale weights must be finite")
    return w_fine * f + w_coarse * upsample_coarse(coarse, mode=mode)


def normalize_keypoint(box: Box, p: tuple[float, float]) -> tuple[float, float]:
    """Map a pixel location into the fixed 12x12 grid of a bounding box.

    Coordinates are clamped to [0, 12 - 1e-9] so the result always indexes
    a valid grid cell.
    """
    x, y, w, h = box
    if w <= 0 or h <= 0:
        raise ValueError(f"degenerate box {box}")
    gx = (p[0] - x) / w * GRID_SIZE
    gy = (p[1] - y) / h * GRID_SIZE
    hi = GRID_SIZE - 1e-9
    return (min(max(gx, 0.0), hi), min(max(gy, 0.0), hi))


def denormalize_keypoint(box: Box, g: tuple[float, float]) -> tuple[float, float]:
    """Map 12x12 grid coordinates back to pixels (inverse of normalize)."""
    x, y, w, h = box
    if w <= 0 or h <= 0:
        raise ValueError(f"degenerate box {box}")
    return (x + g[0] / GRID_SIZE * w, y + g[1] / GRID_SIZE * h)


def neighbor_set(
    r: np.ndarray, bank: PriorBank, threshold: float = NEIGHBOR_THRESHOLD
) -> np.ndarray:
    """Indices of bank entries whose rotation is geodesically near r.

    Returns all entries with distance strictly below the threshold; when
    none qualify, falls back to the single nearest entry so the prior is
    always defined.
    """
    if len(bank) == 0:
        raise ValueError("prior bank is empty")
    d = geodesic_distances(r, bank.rotations)
    idx = np.flatnonzero(d < threshold)
    if idx.size == 0:
        idx = np.array([int(np.argmin(d))])
    return idx


def pose_prior(
    r: np.ndarray,
    bank: PriorBank,
    keypoint_id: int,
    sigma: float = PRIOR_SIGMA,
    threshold: float = NEIGHBOR_THRESHOLD,
) -> np.ndarray:
    """Viewpoint-conditioned keypoint prior on the 12x12 grid.

    An equal-weight mixture of isotropic Gaussians centered on the
    keypoint's location in each geodesic neighbor of r where the keypoint
    is present, evaluated at cell centers and clamped below at 1e-12.
    Raises NoPriorSupportError when no neighbor carries the keypoint, in
    which case callers fall back to a uniform prior.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not 0 <= keypoint_id < bank.num_keypoints:
        raise ValueError(f"keypoint id {keypoint_id} out of range")
    neighbors = neighbor_set(r, bank, threshold)
    keep = neighbors[bank.present[neighbors, keypoint_id]]
    if keep.size == 0:
        raise NoPriorSupportError(
            f"keypoint {keypoint_id} absent from all {neighbors.size} neighbors"
        )
    means = bank.keypoints[keep, keypoint_id, :]  # (m, 2)
    cx = np.arange(GRID_SIZE) + 0.5
    cy = np.arange(GRID_SIZE) + 0.5
    dx2 = (cx[None, None, :] - means[:, 0][:, None, None]) ** 2
    dy2 = (cy[None, :, None] - means[:, 1][:, None, None]) ** 2
    norm = 1.0 / (2.0 * math.pi * sigma * sigma)
    grid = norm * np.exp(-(dx2 + dy2) / (2.0 * sigma * sigma))
    return np.maximum(grid.mean(axis=0), PRIOR_FLOOR)


def uniform_prior() -> np.ndarray:
    """Flat fallback prior over the 12x12 grid (sums to 1)."""
    return np.full((GRID_SIZE, GRID_SIZE), 1.0 / (GRID_SIZE * GRID_SIZE))


def fuse_and_decode(prior: np.ndarray, loglik: np.ndarray) -> tuple[float, float]:
    """Grid coordinates of the argmax of log(prior) + loglik.

    Returns the center (x, y) = (col + 0.5, row + 0.5) of the winning cell;
    ties resolve to the first cell in row-major scan order.
    """
    p = np.asarray(prior, dtype=np.float64)
    l = np.asarray(loglik, dtype=np.float64)
    if p.shape != (GRID_SIZE, GRID_SIZE) or l.shape != (GRID_SIZE, GRID_SIZE):
        raise ValueError(
            f"prior and log-likelihood must be 12x12, got {p.shape} and {l.shape}"
        )
    fused = np.log(p) + l
    i, j = np.unravel_index(int(np.argmax(fused)), fused.shape)
    return (j + 0.5, i + 0.5)
