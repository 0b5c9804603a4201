"""Procedurally generated reflectance textures for the simulator.

Four license-free stand-ins for the usual evaluation surfaces: a dense text
page, a line-art map, a smooth portrait-like photo, and a high-contrast
graffiti-like wall. All are deterministic given the texture name.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

TEXTURE_NAMES = ("text", "map", "portrait", "graffiti")

_SIZE = 256


def _finish(img: np.ndarray, blur: float = 1.0) -> np.ndarray:
    out = gaussian_filter(img, blur)
    return np.clip(out, 0.02, 1.0)


def _text_texture() -> np.ndarray:
    """Rows of glyph-like dark blobs on bright paper."""
    rng = np.random.default_rng(101)
    img = np.full((_SIZE, _SIZE), 0.88)
    glyph_h, glyph_w, gap = 9, 6, 3
    y = 6
    while y + glyph_h < _SIZE - 6:
        x = 6
        while x + glyph_w < _SIZE - 6:
            if rng.random() > 0.15:  # word gaps
                bits = rng.random((3, 2)) > 0.35
                block = np.kron(bits, np.ones((3, 3)))
                patch = img[y : y + glyph_h, x : x + glyph_w]
                patch[block.astype(bool)] = 0.15
            x += glyph_w + gap
        y += glyph_h + gap
    return _finish(img, 0.8)


def _map_texture() -> np.ndarray:
    """Light background with dark polylines and a few filled regions."""
    rng = np.random.default_rng(202)
    img = np.full((_SIZE, _SIZE), 0.82)
    yy, xx = np.mgrid[0:_SIZE, 0:_SIZE]
    # filled regions (parks / water)
    for _ in range(5):
        cx, cy = rng.uniform(20, _SIZE - 20, size=2)
        rx, ry = rng.uniform(15, 45, size=2)
        ang = rng.uniform(0, np.pi)
        xr = (xx - cx) * np.cos(ang) + (yy - cy) * np.sin(ang)
        yr = -(xx - cx) * np.sin(ang) + (yy - cy) * np.cos(ang)
        img[(xr / rx) ** 2 + (yr / ry) ** 2 < 1] = rng.uniform(0.55, 0.7)
    # roads as random walks
    for _ in range(24):
        x, y = rng.uniform(0, _SIZE, size=2)
        ang = rng.uniform(0, 2 * np.pi)
        width = rng.integers(1, 3)
        for _ in range(180):
            ang += rng.normal(0, 0.18)
            x += np.cos(ang) * 2
            y += np.sin(ang) * 2
            ix, iy = int(x), int(y)
            if 0 <= ix < _SIZE and 0 <= iy < _SIZE:
                img[max(iy - width, 0) : iy + width, max(ix - width, 0) : ix + width] = 0.2
    return _finish(img, 0.8)


def _portrait_texture() -> np.ndarray:
    """Smooth gradients with a few soft blobs, photo-like mid tones."""
    rng = np.random.default_rng(303)
    yy, xx = np.mgrid[0:_SIZE, 0:_SIZE].astype(float)
    img = 0.45 + 0.18 * np.sin(2 * np.pi * yy / 400.0) + 0.1 * np.cos(2 * np.pi * xx / 330.0)
    for _ in range(12):
        cx, cy = rng.uniform(0, _SIZE, size=2)
        s = rng.uniform(18, 60)
        a = rng.uniform(-0.22, 0.25)
        img += a * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * s * s))
    return _finish(img, 2.0)


def _graffiti_texture() -> np.ndarray:
    """Bold high-contrast shapes: thresholded smooth noise in a few tones."""
    rng = np.random.default_rng(404)
    base = gaussian_filter(rng.standard_normal((_SIZE, _SIZE)), 9)
    detail = gaussian_filter(rng.standard_normal((_SIZE, _SIZE)), 3.5)
    img = np.full((_SIZE, _SIZE), 0.5)
    img[base > 0.25] = 0.78
    img[base < -0.25] = 0.3
    img[detail > 1.1] = 0.12
    img[detail < -1.1] = 0.9
    return _finish(img, 1.2)


_BUILDERS = {
    "text": _text_texture,
    "map": _map_texture,
    "portrait": _portrait_texture,
    "graffiti": _graffiti_texture,
}

_cache: dict[str, np.ndarray] = {}


def texture(name: str) -> np.ndarray:
    """Reflectance map in [0, 1] for one of the bundled texture names."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown texture {name!r}; choose from {TEXTURE_NAMES}")
    if name not in _cache:
        _cache[name] = _BUILDERS[name]()
    return _cache[name].copy()
