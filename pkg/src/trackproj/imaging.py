"""Raster containers and low-level image operations.

Gray images are 2D float64 arrays in digital numbers (DN); binary masks are
2D bool arrays of the same shape. 8-bit rasters appear only at the camera
boundary and in P5/P6 files.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import binary_erosion

from .errors import EmptyMaskError, ImageTooSmallError, OutOfBoundsError
from .geometry import homography_apply


def sample_bilinear(img: np.ndarray, p) -> float:
    """Bilinearly interpolated value at a single in-bounds point (x, y)."""
    x, y = float(p[0]), float(p[1])
    h, w = img.shape
    if not (0.0 <= x <= w - 1 and 0.0 <= y <= h - 1):
        raise OutOfBoundsError(f"sample point ({x}, {y}) outside [0,{w-1}]x[0,{h-1}]")
    vals = sample_bilinear_many(img, np.array([x]), np.array([y]))
    return float(vals[0])


def sample_bilinear_many(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling; caller guarantees points are in bounds."""
    h, w = img.shape
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    np.clip(x0, 0, w - 2, out=x0)
    np.clip(y0, 0, h - 2, out=y0)
    fx = xs - x0
    fy = ys - y0
    v00 = img[y0, x0]
    v01 = img[y0, x0 + 1]
    v10 = img[y0 + 1, x0]
    v11 = img[y0 + 1, x0 + 1]
    # the two-product form is exact at fx, fy in {0, 1}
    top = v00 * (1.0 - fx) + v01 * fx
    bot = v10 * (1.0 - fx) + v11 * fx
    return top * (1.0 - fy) + bot * fy


def warp_sample(img: np.ndarray, h: np.ndarray, out_size: tuple[int, int]):
    """Resample img through a homography onto an out_size raster.

    h maps output (template) coordinates into img coordinates. Returns
    (out, valid) where valid marks output pixels whose source point landed
    inside the image; invalid pixels are 0.
    """
    out_w, out_h = out_size
    gx, gy = np.meshgrid(np.arange(out_w, dtype=float), np.arange(out_h, dtype=float))
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    src = homography_apply(h, pts)
    return _sample_at(img, src[:, 0], src[:, 1], (out_h, out_w))


def warp_sample_points(img: np.ndarray, h: np.ndarray, pts: np.ndarray):
    """Warp-sample only at the given output-space points; returns (vals, valid)."""
    src = homography_apply(h, pts)
    ih, iw = img.shape
    xs, ys = src[:, 0], src[:, 1]
    valid = (xs >= 0) & (xs <= iw - 1) & (ys >= 0) & (ys <= ih - 1)
    vals = np.zeros(len(pts))
    if np.any(valid):
        vals[valid] = sample_bilinear_many(img, xs[valid], ys[valid])
    return vals, valid


def _sample_at(img: np.ndarray, xs, ys, out_shape):
    ih, iw = img.shape
    valid = (xs >= 0) & (xs <= iw - 1) & (ys >= 0) & (ys <= ih - 1)
    vals = np.zeros(xs.shape[0])
    if np.any(valid):
        vals[valid] = sample_bilinear_many(img, xs[valid], ys[valid])
    return vals.reshape(out_shape), valid.reshape(out_shape)


def gradient(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(d/dx, d/dy) by central differences, one-sided at the borders."""
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ImageTooSmallError("gradient needs at least a 3x3 image")
    gy, gx = np.gradient(img.astype(float))
    return gx, gy


def erode(mask: np.ndarray, radius: int) -> np.ndarray:
    """Square-window erosion; out-of-bounds neighbors count as unset."""
    if radius < 0:
        raise ValueError("erosion radius must be >= 0")
    if radius == 0:
        return mask.copy()
    k = 2 * radius + 1
    return binary_erosion(mask, structure=np.ones((k, k), dtype=bool), border_value=0)


def masked_mean(img: np.ndarray, mask: np.ndarray) -> float:
    """Arithmetic mean of img over the set bits of mask."""
    if not np.any(mask):
        raise EmptyMaskError("mask selects no pixels")
    return float(img[mask].mean())


def to_u8(img: np.ndarray) -> np.ndarray:
    """Clamp and round a float DN image to 8 bits."""
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def write_pgm(path, img: np.ndarray) -> None:
    """Write an 8-bit binary portable graymap (P5)."""
    u8 = img if img.dtype == np.uint8 else to_u8(np.asarray(img))
    h, w = u8.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(u8.tobytes())


def write_ppm(path, img: np.ndarray) -> None:
    """Write an 8-bit binary portable pixmap (P6) from an (h, w, 3) array."""
    u8 = img if img.dtype == np.uint8 else to_u8(np.asarray(img))
    h, w, c = u8.shape
    if c != 3:
        raise ValueError("P6 needs an (h, w, 3) array")
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(u8.tobytes())


def _read_pnm_header(f):
    def token():
        t = b""
        ch = f.read(1)
        while ch.isspace():
            ch = f.read(1)
        while ch == b"#":
            while ch not in (b"\n", b""):
                ch = f.read(1)
            while ch.isspace():
                ch = f.read(1)
        while ch and not ch.isspace():
            t += ch
            ch = f.read(1)
        return t

    magic = token()
    w = int(token())
    h = int(token())
    maxval = int(token())
    if maxval != 255:
        raise ValueError(f"only maxval 255 supported, got {maxval}")
    return magic, w, h


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 graymap into a uint8 array."""
    with open(path, "rb") as f:
        magic, w, h = _read_pnm_header(f)
        if magic != b"P5":
            raise ValueError(f"not a P5 file: {magic!r}")
        data = f.read(w * h)
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w).copy()


def read_ppm(path) -> np.ndarray:
    """Read a binary P6 pixmap into a uint8 (h, w, 3) array."""
    with open(path, "rb") as f:
        magic, w, h = _read_pnm_header(f)
        if magic != b"P6":
            raise ValueError(f"not a P6 file: {magic!r}")
        data = f.read(w * h * 3)
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w, 3).copy()
