"""Homographies, their sl(3) parametrization, and plane-induced mappings.

All homographies are plain (3, 3) float64 numpy arrays. Stored matrices are
kept in one canonical form project-wide: scaled so m[2, 2] == 1 when that
entry is safely away from zero, otherwise unit Frobenius norm with the
largest-magnitude entry positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateGeometryError, PlaneBehindCameraError, PointAtInfinityError

DET_EPS = 1e-12
W_EPS = 1e-12
CANONICAL_EPS = 1e-6


def normalize_homography(m: np.ndarray) -> np.ndarray:
    """Return the canonical representative of a homography.

    Scale so m[2][2] = 1 when |m[2][2]| > 1e-6, else to unit Frobenius norm
    with a fixed sign convention. Raises on non-invertible input.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"homography must be 3x3, got {m.shape}")
    if abs(m[2, 2]) > CANONICAL_EPS:
        out = m / m[2, 2]
    else:
        out = m / np.linalg.norm(m)
        flat = out.ravel()
        if flat[np.argmax(np.abs(flat))] < 0:
            out = -out
    if abs(np.linalg.det(out)) <= DET_EPS:
        raise DegenerateGeometryError("homography is not invertible")
    return out


def homography_apply(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Apply a homography to one point (2,) or many points (N, 2)."""
    h = np.asarray(h, dtype=float)
    p = np.asarray(pts, dtype=float)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    x, y = p[:, 0], p[:, 1]
    w = h[2, 0] * x + h[2, 1] * y + h[2, 2]
    if np.any(np.abs(w) <= W_EPS):
        raise PointAtInfinityError("point maps to infinity (|w| <= 1e-12)")
    u = (h[0, 0] * x + h[0, 1] * y + h[0, 2]) / w
    v = (h[1, 0] * x + h[1, 1] * y + h[1, 2]) / w
    out = np.stack([u, v], axis=1)
    return out[0] if single else out


def _triangle_areas(pts: np.ndarray) -> np.ndarray:
    idx = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    areas = []
    for i, j, k in idx:
        a, b, c = pts[i], pts[j], pts[k]
        areas.append(0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])))
    return np.array(areas)


def homography_from_correspondences(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Exact homography from 4 point pairs via an 8x8 linear solve.

    No three source or destination points may be collinear.
    """
    src = np.asarray(src, dtype=float).reshape(4, 2)
    dst = np.asarray(dst, dtype=float).reshape(4, 2)
    if np.min(_triangle_areas(src)) <= 1e-9 or np.min(_triangle_areas(dst)) <= 1e-9:
        raise DegenerateGeometryError("three of the four points are collinear")

    # Unknowns h11..h32 with h33 fixed to 1: two equations per correspondence.
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i in range(4):
        x, y = src[i]
        u, v = dst[i]
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeometryError("correspondence system is singular") from exc
    m = np.array([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]])
    return normalize_homography(m)


# Fixed basis of sl(3), in this generator order: x-translation, y-translation,
# rotation, isotropic scale, aspect, shear, and the two projective terms.
_SL3_BASIS = np.array(
    [
        [[0, 0, 1], [0, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
        [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
        [[1, 0, 0], [0, 1, 0], [0, 0, -2]],
        [[1, 0, 0], [0, -1, 0], [0, 0, 0]],
        [[0, 1, 0], [1, 0, 0], [0, 0, 0]],
        [[0, 0, 0], [0, 0, 0], [1, 0, 0]],
        [[0, 0, 0], [0, 0, 0], [0, 1, 0]],
    ],
    dtype=float,
)


def sl3_generators() -> np.ndarray:
    """The fixed (8, 3, 3) basis of sl(3) used throughout the package."""
    return _SL3_BASIS.copy()


def sl3_exp(v: np.ndarray) -> np.ndarray:
    """Matrix exponential of an 8-vector of sl(3) coefficients.

    The result has determinant 1 (not the canonical stored form, which
    rescales; callers normalize after composing).
    """
    v = np.asarray(v, dtype=float).reshape(8)
    return expm(np.tensordot(v, _SL3_BASIS, axes=1))


@dataclass
class PlanePose:
    """Pose of a device relative to the tracked plane's reference frame.

    rotation/translation map plane-frame points into the device camera frame
    (x_dev = R x_plane + t). normal/distance give the plane in device
    coordinates as {x : normal . x = distance} with distance > 0, and are
    derived from (rotation, translation) unless supplied.
    """

    rotation: np.ndarray
    translation: np.ndarray
    intrinsics: np.ndarray
    normal: np.ndarray = field(default=None)  # type: ignore[assignment]
    distance: float = 0.0

    def __post_init__(self) -> None:
        self.rotation = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=float).reshape(3)
        self.intrinsics = np.asarray(self.intrinsics, dtype=float).reshape(3, 3)
        if np.max(np.abs(self.rotation @ self.rotation.T - np.eye(3))) > 1e-9:
            raise ValueError("rotation is not orthonormal")
        if self.normal is None:
            n = self.rotation @ np.array([0.0, 0.0, 1.0])
            d = float(n @ self.translation)
            if d < 0:
                n, d = -n, -d
            self.normal = n
            self.distance = d
        else:
            self.normal = np.asarray(self.normal, dtype=float).reshape(3)
        if self.distance <= 0:
            raise PlaneBehindCameraError("plane passes through or behind the device center")

    def plane_to_image(self) -> np.ndarray:
        """Homography sending plane-frame (x, y, 0) points to device pixels."""
        r = self.rotation
        cols = np.column_stack([r[:, 0], r[:, 1], self.translation])
        return normalize_homography(self.intrinsics @ cols)

    def project(self, pts_plane: np.ndarray) -> np.ndarray:
        """Project in-plane 2D points (plane frame) to device pixels."""
        return homography_apply(self.plane_to_image(), pts_plane)


def homography_from_plane_pose(a: PlanePose, b: PlanePose) -> np.ndarray:
    """Induced homography from device-a pixels to device-b pixels.

    Uses the plane as seen by device a: H = K_b (R_ab + t_ab n^T / d) K_a^-1
    for the plane {n . x = d} in a's frame.
    """
    if a.distance <= 1e-9:
        raise PlaneBehindCameraError("plane passes through device-a center")
    r_ab = b.rotation @ a.rotation.T
    t_ab = b.translation - r_ab @ a.translation
    core = r_ab + np.outer(t_ab, a.normal) / a.distance
    h = b.intrinsics @ core @ np.linalg.inv(a.intrinsics)
    return normalize_homography(h)


def rect_corners(x0: float, y0: float, w: float, h: float) -> np.ndarray:
    """Corners of an axis-aligned rect, ordered TL, TR, BR, BL."""
    return np.array(
        [[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]], dtype=float
    )


def template_corners(size: int) -> np.ndarray:
    """Corners of a size x size template raster (pixel-center convention)."""
    s = float(size - 1)
    return np.array([[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]])


def homography_rect_to_quad(rect: np.ndarray, quad: np.ndarray) -> np.ndarray:
    """Homography mapping 4 rect corners onto 4 quad corners."""
    return homography_from_correspondences(rect, quad)


def max_corner_displacement(h: np.ndarray, corners: np.ndarray) -> float:
    """Largest movement a corner set undergoes when h is applied to it."""
    moved = homography_apply(h, corners)
    return float(np.max(np.linalg.norm(moved - corners, axis=1)))
