"""Chessboard-like fiducial patterns and their alignment templates.

A pattern and its complement are displayed with equal frequency so their
time average is spatially flat; geometry information lives entirely in the
cell borders, which sit near the content periphery (the outer cells of the
grid are extended by a margin out to the content rectangle).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CellTooSmallError, EmptySelectionError
from .geometry import homography_apply, rect_corners, template_corners
from .imaging import erode, write_pgm
from .alignment import AlignTemplate, make_template

PATTERN_F = "F"
PATTERN_NF = "NF"


@dataclass
class FiducialPattern:
    """A rasterized chessboard pattern inside a projector-space rectangle."""

    bitmap: np.ndarray  # bool, shape (rect_h, rect_w); True = lit cell
    complement: np.ndarray
    corners: np.ndarray  # (4, 2) projector px, TL TR BR BL
    cell_grid: tuple[int, int]  # rows, cols
    margin: float  # px beyond the inner grid, absorbed by the outer cells
    rect: tuple[float, float, float, float]  # x0, y0, w, h in projector px

    def bits(self, which: str) -> np.ndarray:
        if which == PATTERN_F:
            return self.bitmap
        if which == PATTERN_NF:
            return self.complement
        raise ValueError(f"unknown pattern selector {which!r}")


def _cell_boundaries(extent: float, cells: int, margin: float) -> np.ndarray:
    inner = extent - 2.0 * margin
    step = inner / cells
    bounds = [0.0]
    for i in range(1, cells):
        bounds.append(margin + i * step)
    bounds.append(extent)
    return np.array(bounds)


def _white_lookup(pattern: "FiducialPattern"):
    x0, y0, w, h = pattern.rect
    rows, cols = pattern.cell_grid
    xb = _cell_boundaries(w, cols, pattern.margin)
    yb = _cell_boundaries(h, rows, pattern.margin)

    def white_at(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        # xs, ys are rect-local continuous coordinates
        ci = np.clip(np.searchsorted(xb, xs, side="right") - 1, 0, cols - 1)
        ri = np.clip(np.searchsorted(yb, ys, side="right") - 1, 0, rows - 1)
        inside = (xs >= 0) & (xs <= w) & (ys >= 0) & (ys <= h)
        return ((ri + ci) % 2 == 0) & inside

    return white_at


def make_fiducial(
    content_rect: tuple[float, float, float, float],
    grid: tuple[int, int] = (3, 3),
    margin: float = 0.0,
) -> FiducialPattern:
    """Rasterize an alternating-cell pattern filling content_rect.

    The top-left cell is lit. With margin > 0 the outer cells extend through
    the margin band so cell borders stay close to the rect periphery. The
    pattern is 180-degree rotation symmetric exactly when rows + cols is
    even (orientation tests rely on the default odd x odd grid being
    symmetric).
    """
    x0, y0, w, h = content_rect
    rows, cols = grid
    if rows < 2 or cols < 2:
        raise ValueError("grid needs at least 2x2 cells")
    if margin < 0:
        raise ValueError("margin must be >= 0")
    wi, hi = int(round(w)), int(round(h))
    cell_w = (w - 2 * margin) / cols
    cell_h = (h - 2 * margin) / rows
    if min(cell_w, cell_h) < 8:
        raise CellTooSmallError(f"cells {cell_w:.1f}x{cell_h:.1f} px are below the 8 px minimum")

    pattern = FiducialPattern(
        bitmap=np.zeros((hi, wi), dtype=bool),
        complement=np.zeros((hi, wi), dtype=bool),
        corners=rect_corners(x0, y0, w, h),
        cell_grid=(rows, cols),
        margin=float(margin),
        rect=(float(x0), float(y0), float(w), float(h)),
    )
    white_at = _white_lookup(pattern)
    xs, ys = np.meshgrid(np.arange(wi) + 0.5, np.arange(hi) + 0.5)
    bits = white_at(xs.ravel(), ys.ravel()).reshape(hi, wi)
    pattern.bitmap = bits
    pattern.complement = ~bits
    return pattern


def make_default_fiducial(
    content_rect: tuple[float, float, float, float],
    grid: tuple[int, int] = (3, 3),
    extension: float = 0.25,
) -> FiducialPattern:
    """Pattern whose outer cells are extended by extension * cell size."""
    _, _, w, h = content_rect
    rows, cols = grid
    cell = min(w / (cols + 2 * extension), h / (rows + 2 * extension))
    return make_fiducial(content_rect, grid, margin=extension * cell)


def _template_to_rect_local(pattern: FiducialPattern, template_size: tuple[int, int]):
    tw, th = template_size
    _, _, w, h = pattern.rect
    sx = w / (tw - 1)
    sy = h / (th - 1)

    def mapper(xs: np.ndarray, ys: np.ndarray):
        return xs * sx, ys * sy

    return mapper


def selection_mask(
    pattern: FiducialPattern,
    which: str,
    template_size: tuple[int, int],
    erosion_radius: int,
    content_from_template: np.ndarray | None = None,
) -> np.ndarray:
    """Template-space mask of the chosen pattern's lit cells, eroded.

    content_from_template optionally maps template coordinates into the
    pattern's rect-local frame (used when the pattern is known to sit offset
    from the template); identity scaling otherwise.
    """
    tw, th = template_size
    xs, ys = np.meshgrid(np.arange(tw, dtype=float), np.arange(th, dtype=float))
    if content_from_template is None:
        mapper = _template_to_rect_local(pattern, template_size)
        cx, cy = mapper(xs.ravel(), ys.ravel())
    else:
        pts = homography_apply(content_from_template, np.column_stack([xs.ravel(), ys.ravel()]))
        cx, cy = pts[:, 0], pts[:, 1]
    white_at = _white_lookup(pattern)
    lit = white_at(cx, cy).reshape(th, tw)
    if which == PATTERN_NF:
        x0, y0, w, h = pattern.rect
        inside = ((cx >= 0) & (cx <= w) & (cy >= 0) & (cy <= h)).reshape(th, tw)
        lit = inside & ~lit
    elif which != PATTERN_F:
        raise ValueError(f"unknown pattern selector {which!r}")
    out = erode(lit, erosion_radius)
    if not out.any():
        raise EmptySelectionError("erosion removed every selected pixel")
    return out


def expected_fiducial_template(
    pattern: FiducialPattern, ratio: float, size: tuple[int, int]
) -> AlignTemplate:
    """Two-level template {ratio on lit cells, 1.0 elsewhere} for alignment.

    A 1 px band at cell borders is excluded from the active mask to soften
    rasterization aliasing.
    """
    if ratio <= 1.0:
        raise ValueError("intensity ratio must exceed 1 for cells to be distinguishable")
    tw, th = size
    lit = selection_mask(pattern, PATTERN_F, size, erosion_radius=0)
    tpl = np.where(lit, float(ratio), 1.0)
    active = erode(lit, 1) | erode(~lit, 1)
    return make_template(tpl, active)


def dump_pattern(pattern: FiducialPattern, path, which: str = PATTERN_F) -> None:
    """Write the chosen pattern raster as an 8-bit P5 graymap."""
    write_pgm(path, pattern.bits(which).astype(np.uint8) * 255)
