import numpy as np
import pytest

from trackproj.errors import CellTooSmallError, EmptySelectionError
from trackproj.fiducial import (
    PATTERN_F,
    PATTERN_NF,
    expected_fiducial_template,
    make_default_fiducial,
    make_fiducial,
    selection_mask,
)
from trackproj.imaging import masked_mean

from tests.test_imaging import brute_force_erode


def test_2x2_no_margin():
    f = make_fiducial((0, 0, 100, 100), grid=(2, 2), margin=0)
    assert f.bitmap.shape == (100, 100)
    # four 50x50 cells, white at top-left
    assert f.bitmap[:50, :50].all()
    assert not f.bitmap[:50, 50:].any()
    assert not f.bitmap[50:, :50].any()
    assert f.bitmap[50:, 50:].all()


def test_complement_covers_rect():
    f = make_default_fiducial((10, 20, 280, 280))
    assert (f.bitmap ^ f.complement).all()


def test_cell_too_small():
    with pytest.raises(CellTooSmallError):
        make_fiducial((0, 0, 20, 20), grid=(3, 3), margin=0)


def test_corners_are_rect_corners():
    f = make_default_fiducial((10, 20, 300, 280))
    expected = np.array([[10, 20], [310, 20], [310, 300], [10, 300]], dtype=float)
    assert np.allclose(f.corners, expected)


def test_white_fraction_matches_pixel_count_oracle():
    w = h = 280
    grid = (3, 3)
    cell = w / (3 + 2 * 0.125)
    margin = cell / 8
    f = make_fiducial((0, 0, w, h), grid=grid, margin=margin)

    # independent per-pixel recount with plain floor arithmetic
    count = 0
    inner = w - 2 * margin
    step = inner / 3
    for y in range(h):
        for x in range(w):
            cx = min(max(int((x + 0.5 - margin) // step) + 1, 0) if (x + 0.5) >= margin else 0, 2)
            cy = min(max(int((y + 0.5 - margin) // step) + 1, 0) if (y + 0.5) >= margin else 0, 2)
            # recompute via boundary list to keep the logic independent
            xb = [0, margin + step, margin + 2 * step, w]
            yb = [0, margin + step, margin + 2 * step, h]
            ci = sum(1 for b in xb[1:-1] if (x + 0.5) >= b)
            ri = sum(1 for b in yb[1:-1] if (y + 0.5) >= b)
            if (ci + ri) % 2 == 0:
                count += 1
    assert int(f.bitmap.sum()) == count


def test_imperceptibility_mean_is_half():
    f = make_default_fiducial((0, 0, 280, 280))
    mean = (f.bitmap.astype(float) + f.complement.astype(float)) / 2
    assert np.all(mean == 0.5)


def test_selection_mask_radius_zero_is_white_cells():
    f = make_default_fiducial((0, 0, 280, 280))
    m = selection_mask(f, PATTERN_F, (112, 112), erosion_radius=0)
    assert m.shape == (112, 112)
    assert m[0, 0]  # top-left cell is lit
    n = selection_mask(f, PATTERN_NF, (112, 112), erosion_radius=0)
    assert not n[0, 0]
    assert not (m & n).any()
    assert (m | n).all()


def test_selection_masks_disjoint_after_erosion():
    f = make_default_fiducial((0, 0, 280, 280))
    m = selection_mask(f, PATTERN_F, (112, 112), erosion_radius=2)
    n = selection_mask(f, PATTERN_NF, (112, 112), erosion_radius=2)
    assert not (m & n).any()


def test_selection_mask_empty_on_large_radius():
    # uniform cells: radius >= half the cell size (template scale) empties all
    f = make_fiducial((0, 0, 280, 280), grid=(3, 3), margin=0)
    cell_tpl = (280.0 / 3) * (111.0 / 279.0)
    radius = int(cell_tpl // 2) + 1
    with pytest.raises(EmptySelectionError):
        selection_mask(f, PATTERN_F, (112, 112), erosion_radius=radius)
    # the default pattern's extended corner cells survive a bit longer
    g = make_default_fiducial((0, 0, 280, 280))
    assert selection_mask(g, PATTERN_F, (112, 112), erosion_radius=radius - 3).any()
    with pytest.raises(EmptySelectionError):
        selection_mask(g, PATTERN_F, (112, 112), erosion_radius=20)


def test_selection_mask_matches_brute_force_erosion():
    f = make_default_fiducial((0, 0, 280, 280))
    raw = selection_mask(f, PATTERN_F, (112, 112), erosion_radius=0)
    m = selection_mask(f, PATTERN_F, (112, 112), erosion_radius=2)
    assert int(m.sum()) == int(brute_force_erode(raw, 2).sum())
    assert np.array_equal(m, brute_force_erode(raw, 2))


def test_expected_template_two_level():
    f = make_default_fiducial((0, 0, 280, 280))
    t = expected_fiducial_template(f, ratio=150.0 / 60.0, size=(48, 48))
    vals = np.unique(t.tpl)
    assert np.allclose(sorted(vals), [1.0, 2.5])
    with pytest.raises(ValueError):
        expected_fiducial_template(f, ratio=1.0, size=(48, 48))


def test_expected_template_masked_mean_is_area_blend():
    f = make_default_fiducial((0, 0, 280, 280))
    ratio = 2.5
    t = expected_fiducial_template(f, ratio=ratio, size=(48, 48))
    lit = selection_mask(f, PATTERN_F, (48, 48), erosion_radius=0)
    n_lit = int((lit & t.active).sum())
    n_dark = int((~lit & t.active).sum())
    expected = (ratio * n_lit + 1.0 * n_dark) / (n_lit + n_dark)
    assert masked_mean(t.tpl, t.active) == pytest.approx(expected)


def test_rotation_symmetry():
    # 180-degree symmetric iff rows + cols is even
    f = make_fiducial((0, 0, 280, 280), grid=(3, 3), margin=20)
    assert np.array_equal(f.bitmap, np.rot90(f.bitmap, 2))
    g = make_fiducial((0, 0, 280, 210), grid=(3, 4), margin=20)
    assert np.array_equal(g.complement, np.rot90(g.bitmap, 2))
