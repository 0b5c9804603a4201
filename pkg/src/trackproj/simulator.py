"""Deterministic projector-camera-surface renderer and motion models.

The world frame is the surface frame at rest: the textured rectangle is
centered on the origin of the z = 0 plane, x right, y down (device poses map
surface-frame points into device coordinates). Photometrics are Lambertian:
pixel value = reflectance * (ambient + proj_gain * illumination), blurred by
a small Gaussian standing in for the lens PSF, plus seeded Gaussian noise,
quantized to 8 bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.ndimage import gaussian_filter

from .geometry import (
    PlanePose,
    homography_apply,
    homography_from_correspondences,
    normalize_homography,
    rect_corners,
)
from .imaging import sample_bilinear_many, to_u8

PATTERN_ALL_ON = "on"
PATTERN_ALL_OFF = "off"


@dataclass
class Scene:
    """Static description of the rig: surface texture, photometry, poses."""

    reflectance: np.ndarray
    camera: PlanePose
    projector: PlanePose
    surface_extent: tuple[float, float] = (0.30, 0.30)  # meters on the plane
    camera_size: tuple[int, int] = (640, 480)
    projector_size: tuple[int, int] = (1024, 768)
    content_rect: tuple[float, float, float, float] = (312.0, 184.0, 400.0, 400.0)
    ambient: float = 60.0
    proj_gain: float = 90.0
    noise_sigma: float = 1.0
    blur_sigma: float = 0.75
    seed: int = 0

    def __post_init__(self) -> None:
        self.reflectance = np.asarray(self.reflectance, dtype=float)
        if self.reflectance.min() < 0 or self.reflectance.max() > 1:
            raise ValueError("reflectance must lie in [0, 1]")
        if self.ambient < 0 or self.proj_gain < 0:
            raise ValueError("ambient and proj_gain must be >= 0")


@dataclass
class MotionModel:
    """Rigid surface motion in the rest frame of the surface."""

    kind: str = "static"  # static | circular | shake | spin
    radius: float = 0.0  # circular, meters
    amplitude: float = 0.0  # shake, meters
    max_angle: float = 0.0  # spin, radians
    freq: float = 0.0  # Hz
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("static", "circular", "shake", "spin"):
            raise ValueError(f"unknown motion kind {self.kind!r}")
        if self.kind != "static" and self.freq <= 0:
            raise ValueError("dynamic motion needs freq > 0")


def _motion_transform(m: MotionModel, t: float):
    """Rigid transform (R_m, p_m) the surface undergoes at time t."""
    if m.kind == "static":
        return np.eye(3), np.zeros(3)
    th = 2.0 * np.pi * m.freq * (t - m.t0)
    if m.kind == "circular":
        p = np.array([m.radius * (np.cos(th) - 1.0), m.radius * np.sin(th), 0.0])
        return np.eye(3), p
    if m.kind == "shake":
        return np.eye(3), np.array([0.0, m.amplitude * np.sin(th), 0.0])
    ang = m.max_angle * np.sin(th)
    c, s = np.cos(ang), np.sin(ang)
    # rotation about the plane's vertical (y) axis through the surface center
    r = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return r, np.zeros(3)


def pose_at(m: MotionModel, base: PlanePose, t: float) -> PlanePose:
    """Device pose relative to the moved surface frame at time t."""
    r_m, p_m = _motion_transform(m, t)
    rot = base.rotation @ r_m
    trans = base.rotation @ p_m + base.translation
    return PlanePose(rotation=rot, translation=trans, intrinsics=base.intrinsics)


def scene_at(scene: Scene, m: MotionModel, t: float) -> Scene:
    """Scene with both device poses advanced to time t."""
    return replace(
        scene,
        camera=pose_at(m, scene.camera, t),
        projector=pose_at(m, scene.projector, t),
    )


def camera_to_projector(scene: Scene) -> np.ndarray:
    """True camera-pixel to projector-pixel homography for the current poses."""
    h_cam = scene.camera.plane_to_image()
    h_proj = scene.projector.plane_to_image()
    return normalize_homography(h_proj @ np.linalg.inv(h_cam))


def _pattern_lit(scene: Scene, pattern, corners_proj, proj_px: np.ndarray) -> np.ndarray:
    pw, ph = scene.projector_size
    xs, ys = proj_px[:, 0], proj_px[:, 1]
    inside_proj = (xs >= 0) & (xs < pw) & (ys >= 0) & (ys < ph)
    if isinstance(pattern, str):
        if pattern == PATTERN_ALL_ON:
            return inside_proj.astype(float)
        if pattern == PATTERN_ALL_OFF:
            return np.zeros(len(xs))
        raise ValueError(f"unknown pattern {pattern!r}")
    bits = np.asarray(pattern, dtype=bool)
    bh, bw = bits.shape
    place = homography_from_correspondences(
        rect_corners(0, 0, bw, bh), np.asarray(corners_proj, dtype=float)
    )
    local = homography_apply(np.linalg.inv(place), proj_px)
    lx, ly = local[:, 0], local[:, 1]
    ok = inside_proj & (lx >= 0) & (lx < bw) & (ly >= 0) & (ly < bh)
    lit = np.zeros(len(xs))
    ix = np.clip(lx[ok].astype(np.intp), 0, bw - 1)
    iy = np.clip(ly[ok].astype(np.intp), 0, bh - 1)
    lit[ok] = bits[iy, ix].astype(float)
    return lit


def render_frame(
    scene: Scene,
    pattern,
    fid_corners_proj=None,
    t: float = 0.0,
    noise_key: int | None = None,
    quantize: bool = True,
) -> np.ndarray:
    """Render one camera frame of the surface under the given projection.

    pattern is "on", "off", or a bool raster placed so its bounding box maps
    onto fid_corners_proj (projector px). The noise stream is derived from
    (scene.seed, noise_key); noise_key defaults to the 2,400 fps slot index
    of t so distinct frames get independent noise deterministically.
    """
    cw, ch = scene.camera_size
    h_cam = scene.camera.plane_to_image()
    h_cam_inv = np.linalg.inv(h_cam)
    gx, gy = np.meshgrid(np.arange(cw, dtype=float), np.arange(ch, dtype=float))
    cam_px = np.column_stack([gx.ravel(), gy.ravel()])
    surf = homography_apply(h_cam_inv, cam_px)

    # reflectance lookup over the textured rectangle (0 outside)
    sw, sh = scene.surface_extent
    th_, tw_ = scene.reflectance.shape
    tx = (surf[:, 0] / sw + 0.5) * (tw_ - 1)
    ty = (surf[:, 1] / sh + 0.5) * (th_ - 1)
    refl = np.zeros(cam_px.shape[0])
    ok = (tx >= 0) & (tx <= tw_ - 1) & (ty >= 0) & (ty <= th_ - 1)
    if ok.any():
        refl[ok] = sample_bilinear_many(scene.reflectance, tx[ok], ty[ok])

    h_proj = scene.projector.plane_to_image()
    proj_px = homography_apply(h_proj, surf)
    lit = _pattern_lit(scene, pattern, fid_corners_proj, proj_px)

    img = (refl * (scene.ambient + scene.proj_gain * lit)).reshape(ch, cw)
    if scene.blur_sigma > 0:
        img = gaussian_filter(img, scene.blur_sigma)
    if scene.noise_sigma > 0:
        if noise_key is None:
            noise_key = int(round(t * 2400.0))
        rng = np.random.default_rng((scene.seed, noise_key))
        img = img + scene.noise_sigma * rng.standard_normal(img.shape)
    if quantize:
        return to_u8(img)
    return img


def make_scene(
    texture_name: str = "text",
    seed: int = 0,
    noise_sigma: float = 1.0,
    ambient: float = 60.0,
    proj_gain: float = 90.0,
) -> Scene:
    """Desk-scale default rig: camera on axis at 0.6 m, projector offset."""
    from .textures import texture

    cam_k = np.array([[600.0, 0, 319.5], [0, 600.0, 239.5], [0, 0, 1]])
    proj_k = np.array([[1100.0, 0, 511.5], [0, 1100.0, 383.5], [0, 0, 1]])
    camera = PlanePose(rotation=np.eye(3), translation=[0.0, 0.0, 0.6], intrinsics=cam_k)
    ang = 0.12  # projector yawed ~7 degrees toward the surface center
    c, s = np.cos(ang), np.sin(ang)
    proj_r = np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    projector = PlanePose(rotation=proj_r, translation=[0.06, 0.03, 0.55], intrinsics=proj_k)
    return Scene(
        reflectance=texture(texture_name),
        camera=camera,
        projector=projector,
        ambient=ambient,
        proj_gain=proj_gain,
        noise_sigma=noise_sigma,
        seed=seed,
    )


def surface_anchor_points(scene: Scene) -> np.ndarray:
    """Surface-frame points the content-rect corners land on at time 0."""
    h_proj = scene.projector.plane_to_image()
    corners = rect_corners(*scene.content_rect)
    return homography_apply(np.linalg.inv(h_proj), corners)


def true_corners_camera(scene: Scene, anchors: np.ndarray) -> np.ndarray:
    """Project surface-frame anchor points through the camera."""
    return homography_apply(scene.camera.plane_to_image(), anchors)
