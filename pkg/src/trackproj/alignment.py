"""Direct image alignment of a template under a homography.

The solver refines template->image homographies by minimizing the masked sum
of squared intensity differences, using a second-order update built from the
mean of template and warped-image gradients. Updates live on sl(3): each
iteration solves an 8-parameter normal system and composes H with the matrix
exponential of the increment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DarkInputError
from .geometry import (
    homography_apply,
    max_corner_displacement,
    normalize_homography,
    sl3_exp,
    sl3_generators,
    template_corners,
)
from .imaging import gradient, sample_bilinear_many

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters"
STATUS_DIVERGED = "diverged"
STATUS_DEGENERATE = "degenerate"

MIN_ACTIVE_PIXELS = 64
CONDITION_LIMIT = 1e12
MAX_STEP_HALVINGS = 4

GAIN_MIN = 0.1
GAIN_MAX = 10.0


@dataclass
class AlignTemplate:
    """A template raster with its participating-pixel mask and gradients."""

    tpl: np.ndarray
    active: np.ndarray
    gx: np.ndarray
    gy: np.ndarray

    @property
    def size(self) -> tuple[int, int]:
        h, w = self.tpl.shape
        return (w, h)

    def corners(self) -> np.ndarray:
        h, w = self.tpl.shape
        return np.array([[0.0, 0.0], [w - 1.0, 0.0], [w - 1.0, h - 1.0], [0.0, h - 1.0]])


def make_template(tpl: np.ndarray, active: np.ndarray | None = None) -> AlignTemplate:
    """Build an AlignTemplate, precomputing gradients (borders excluded)."""
    tpl = np.asarray(tpl, dtype=float)
    if active is None:
        active = np.ones(tpl.shape, dtype=bool)
    active = active.copy()
    # Border pixels never participate: their gradients are one-sided.
    active[0, :] = active[-1, :] = False
    active[:, 0] = active[:, -1] = False
    if int(active.sum()) < MIN_ACTIVE_PIXELS:
        raise ValueError(f"template needs >= {MIN_ACTIVE_PIXELS} active pixels")
    gx, gy = gradient(tpl)
    return AlignTemplate(tpl=tpl, active=active, gx=gx, gy=gy)


@dataclass
class AlignResult:
    """Outcome of one alignment run, with the per-iteration trail."""

    h: np.ndarray
    residual_rms: float
    iterations_used: int
    per_iteration_h: list[np.ndarray]
    per_iteration_rms: list[float]
    status: str


# Per-size cache of the flattened pixel lattice and the sl(3) action on it.
_lattice_cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _lattice(shape: tuple[int, int]):
    key = shape
    cached = _lattice_cache.get(key)
    if cached is not None:
        return cached
    h, w = shape
    gx, gy = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    x = gx.ravel()
    y = gy.ravel()
    pts = np.column_stack([x, y])
    gens = sl3_generators()
    lx = np.empty((x.size, 8))
    ly = np.empty((x.size, 8))
    for j, a in enumerate(gens):
        wdot = a[2, 0] * x + a[2, 1] * y + a[2, 2]
        lx[:, j] = a[0, 0] * x + a[0, 1] * y + a[0, 2] - x * wdot
        ly[:, j] = a[1, 0] * x + a[1, 1] * y + a[1, 2] - y * wdot
    _lattice_cache[key] = (pts, lx, ly)
    return pts, lx, ly


def _warp_flat(img: np.ndarray, h: np.ndarray, pts: np.ndarray):
    src = homography_apply(h, pts)
    ih, iw = img.shape
    xs, ys = src[:, 0], src[:, 1]
    valid = (xs >= 0) & (xs <= iw - 1) & (ys >= 0) & (ys <= ih - 1)
    vals = np.zeros(xs.size)
    if valid.any():
        vals[valid] = sample_bilinear_many(img, xs[valid], ys[valid])
    return vals, valid


def _interior(valid2d: np.ndarray) -> np.ndarray:
    # valid pixels whose 4-neighborhood is valid, so central diffs are sound
    out = valid2d.copy()
    out[1:-1, 1:-1] = (
        valid2d[1:-1, 1:-1]
        & valid2d[:-2, 1:-1]
        & valid2d[2:, 1:-1]
        & valid2d[1:-1, :-2]
        & valid2d[1:-1, 2:]
    )
    out[0, :] = out[-1, :] = False
    out[:, 0] = out[:, -1] = False
    return out


def esm_system(img: np.ndarray, t: AlignTemplate, h: np.ndarray):
    """The linearized system at h: (jacobian, residual, flat pixel mask).

    Rows follow the row-major order of the template pixels selected by the
    returned mask. Exposed for gradient checking and diagnostics.
    """
    img = np.asarray(img, dtype=float)
    pts, latt_x, latt_y = _lattice(t.tpl.shape)
    warped_flat, valid_flat = _warp_flat(img, h, pts)
    return _system_from_warp(t, warped_flat, valid_flat, latt_x, latt_y)


def _system_from_warp(t: AlignTemplate, warped_flat, valid_flat, latt_x, latt_y):
    shape = t.tpl.shape
    eff = _interior(valid_flat.reshape(shape)).ravel() & t.active.ravel()
    warped2d = warped_flat.reshape(shape)
    wgy, wgx = np.gradient(warped2d)
    gx = 0.5 * (t.gx.ravel()[eff] + wgx.ravel()[eff])
    gy = 0.5 * (t.gy.ravel()[eff] + wgy.ravel()[eff])
    jac = gx[:, None] * latt_x[eff] + gy[:, None] * latt_y[eff]
    resid = warped_flat[eff] - t.tpl.ravel()[eff]
    return jac, resid, eff


def esm_align(
    img: np.ndarray,
    t: AlignTemplate,
    h_init: np.ndarray,
    max_iters: int = 15,
    tol: float = 0.01,
) -> AlignResult:
    """Align template t to img starting from h_init (template->image).

    Stops when the incremental update moves the template corners less than
    tol pixels, when max_iters is reached, when the normal system becomes
    rank-deficient (degenerate), or when step halving cannot reduce the
    residual (diverged).
    """
    img = np.asarray(img, dtype=float)
    shape = t.tpl.shape
    pts, latt_x, latt_y = _lattice(shape)
    corners = t.corners()

    h = normalize_homography(h_init)
    warped_flat, valid_flat = _warp_flat(img, h, pts)

    tpl_flat = t.tpl.ravel()
    active_flat = t.active.ravel()

    per_h = [h.copy()]
    per_rms = []
    status = STATUS_MAX_ITERS
    iters = 0

    def masked_rms(wflat, vflat, sel):
        m = sel & vflat & active_flat
        n = int(m.sum())
        if n == 0:
            return np.inf, m
        r = wflat[m] - tpl_flat[m]
        return float(np.sqrt(np.mean(r * r))), m

    full = np.ones(pts.shape[0], dtype=bool)
    rms, _ = masked_rms(warped_flat, valid_flat, full)
    per_rms.append(rms)

    for it in range(max_iters):
        jac, resid, eff = _system_from_warp(t, warped_flat, valid_flat, latt_x, latt_y)
        if int(eff.sum()) < MIN_ACTIVE_PIXELS:
            status = STATUS_DEGENERATE
            break

        jtj = jac.T @ jac
        jtr = jac.T @ resid
        cond = np.linalg.cond(jtj)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            status = STATUS_DEGENERATE
            break
        try:
            factor = cho_factor(jtj)
        except np.linalg.LinAlgError:
            status = STATUS_DEGENERATE
            break
        v = cho_solve(factor, -jtr)

        # Residual-guarded step halving: accept the first scale that does not
        # increase the masked residual.
        accepted = False
        cur_rms, cur_mask = masked_rms(warped_flat, valid_flat, full)
        for half in range(MAX_STEP_HALVINGS + 1):
            v_try = v / (2.0**half)
            update = sl3_exp(v_try)
            h_try = normalize_homography(h @ update)
            w_try, v_try_valid = _warp_flat(img, h_try, pts)
            m = cur_mask & v_try_valid
            if not m.any():
                continue
            r = w_try[m] - tpl_flat[m]
            rms_try = float(np.sqrt(np.mean(r * r)))
            if rms_try <= cur_rms + 1e-12:
                h = h_try
                warped_flat, valid_flat = w_try, v_try_valid
                accepted = True
                step_motion = max_corner_displacement(update, corners)
                break
        iters = it + 1
        if not accepted:
            status = STATUS_DIVERGED
            iters = it
            break

        per_h.append(h.copy())
        rms_now, _ = masked_rms(warped_flat, valid_flat, full)
        per_rms.append(rms_now)
        if step_motion < tol:
            status = STATUS_CONVERGED
            break

    final_rms, _ = masked_rms(warped_flat, valid_flat, full)
    return AlignResult(
        h=h,
        residual_rms=final_rms,
        iterations_used=len(per_h) - 1,
        per_iteration_h=per_h,
        per_iteration_rms=per_rms,
        status=status,
    )


def photometric_gain(
    img: np.ndarray, h: np.ndarray, t: AlignTemplate, target_mean: float
) -> float:
    """Uniform gain that brings the warped masked mean to target_mean.

    The result is clamped to [0.1, 10].
    """
    img = np.asarray(img, dtype=float)
    pts, _, _ = _lattice(t.tpl.shape)
    sel = t.active.ravel()
    vals, valid = _warp_flat(img, h, pts)
    m = sel & valid
    if int(m.sum()) < MIN_ACTIVE_PIXELS:
        raise ValueError("fewer than 64 active in-bounds pixels for gain estimation")
    mean = float(vals[m].mean())
    if mean <= 1e-3:
        raise DarkInputError(f"masked mean {mean} too dark for gain estimation")
    return float(np.clip(target_mean / mean, GAIN_MIN, GAIN_MAX))
