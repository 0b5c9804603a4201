import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from trackproj.errors import DegenerateGeometryError, PointAtInfinityError
from trackproj.geometry import (
    PlanePose,
    homography_apply,
    homography_from_correspondences,
    homography_from_plane_pose,
    max_corner_displacement,
    normalize_homography,
    rect_corners,
    sl3_exp,
    sl3_generators,
)


def random_homography(rng, scale=0.1, projective=0.001):
    m = np.eye(3) + scale * rng.standard_normal((3, 3))
    m[2, :2] = projective * rng.standard_normal(2)
    m[2, 2] = 1.0 + scale * rng.standard_normal() * 0.1
    m /= np.cbrt(np.linalg.det(m))
    return m


def test_apply_identity():
    assert np.allclose(homography_apply(np.eye(3), [3.0, 4.0]), [3.0, 4.0])


def test_apply_translation():
    h = np.array([[1, 0, 5], [0, 1, -2], [0, 0, 1]], dtype=float)
    assert np.allclose(homography_apply(h, [0.0, 0.0]), [5.0, -2.0])


def test_apply_matches_homogeneous_oracle():
    rng = np.random.default_rng(7)
    for _ in range(50):
        h = random_homography(rng)
        p = rng.uniform(-10, 10, size=2)
        # independent homogeneous-coordinate evaluation
        v = h @ np.array([p[0], p[1], 1.0])
        expected = v[:2] / v[2]
        got = homography_apply(h, p)
        assert np.max(np.abs(got - expected)) < 1e-12


def test_apply_point_at_infinity():
    h = np.array([[1, 0, 0], [0, 1, 0], [1, 0, 0]], dtype=float)
    with pytest.raises(PointAtInfinityError):
        homography_apply(h, [0.0, 5.0])


def test_dlt_identity():
    sq = rect_corners(0, 0, 1, 1)
    h = homography_from_correspondences(sq, sq)
    assert np.allclose(h, np.eye(3), atol=1e-12)


def test_dlt_translation():
    sq = rect_corners(0, 0, 1, 1)
    h = homography_from_correspondences(sq, sq + np.array([7.0, 3.0]))
    expected = np.array([[1, 0, 7], [0, 1, 3], [0, 0, 1]], dtype=float)
    assert np.allclose(h, expected, atol=1e-10)


def test_dlt_roundtrip_random():
    rng = np.random.default_rng(11)
    for _ in range(100):
        h_true = normalize_homography(random_homography(rng))
        src = rect_corners(0, 0, 100, 80) + rng.uniform(-5, 5, size=(4, 2))
        dst = homography_apply(h_true, src)
        h_est = homography_from_correspondences(src, dst)
        assert np.max(np.abs(h_est - h_true)) < 1e-9


def test_dlt_exact_on_corners():
    rng = np.random.default_rng(3)
    src = rect_corners(0, 0, 10, 10)
    dst = src + rng.uniform(-2, 2, size=(4, 2))
    h = homography_from_correspondences(src, dst)
    assert np.max(np.abs(homography_apply(h, src) - dst)) < 1e-7


def test_dlt_collinear_raises():
    src = np.array([[0, 0], [1, 1], [2, 2], [0, 1]], dtype=float)
    dst = rect_corners(0, 0, 1, 1)
    with pytest.raises(DegenerateGeometryError):
        homography_from_correspondences(src, dst)


def truncated_series_exp(m, terms=10):
    out = np.eye(3)
    acc = np.eye(3)
    for k in range(1, terms):
        acc = acc @ m / k
        out = out + acc
    return out


def test_sl3_exp_zero():
    assert np.allclose(sl3_exp(np.zeros(8)), np.eye(3), atol=1e-15)


def test_sl3_exp_translation_generator():
    v = np.zeros(8)
    v[0] = 1e-3
    h = sl3_exp(v)
    oracle = truncated_series_exp(np.tensordot(v, sl3_generators(), axes=1))
    assert np.max(np.abs(h - oracle)) < 1e-9
    assert abs(h[0, 2] - 1e-3) < 1e-12
    assert np.allclose(h - np.eye(3), np.array([[0, 0, 1e-3], [0, 0, 0], [0, 0, 0]]), atol=1e-12)


def test_sl3_exp_series_oracle_random():
    rng = np.random.default_rng(5)
    for _ in range(50):
        v = 0.05 * rng.standard_normal(8)
        h = sl3_exp(v)
        oracle = truncated_series_exp(np.tensordot(v, sl3_generators(), axes=1), terms=20)
        assert np.max(np.abs(h - oracle)) < 1e-9


def test_sl3_exp_unit_determinant():
    rng = np.random.default_rng(13)
    for _ in range(50):
        v = rng.standard_normal(8) * 0.3
        assert abs(np.linalg.det(sl3_exp(v)) - 1.0) < 1e-9


def test_sl3_exp_inverse_symmetry():
    rng = np.random.default_rng(17)
    v = 0.1 * rng.standard_normal(8)
    assert np.max(np.abs(sl3_exp(v) @ sl3_exp(-v) - np.eye(3))) < 1e-9


def test_generators_traceless_and_independent():
    gens = sl3_generators()
    assert gens.shape == (8, 3, 3)
    for a in gens:
        assert abs(np.trace(a)) < 1e-15
    flat = gens.reshape(8, 9)
    assert np.linalg.matrix_rank(flat) == 8


def test_composition_consistency():
    rng = np.random.default_rng(23)
    for _ in range(50):
        h1 = random_homography(rng)
        h2 = random_homography(rng)
        p = rng.uniform(-5, 5, size=2)
        a = homography_apply(h2, homography_apply(h1, p))
        b = homography_apply(h2 @ h1, p)
        assert np.max(np.abs(a - b)) < 1e-9


def test_normalization_idempotent():
    rng = np.random.default_rng(29)
    for _ in range(20):
        h = random_homography(rng) * rng.uniform(0.1, 10)
        n1 = normalize_homography(h)
        n2 = normalize_homography(n1)
        assert np.max(np.abs(n1 - n2)) < 1e-14


def simple_k(f=500.0, cx=320.0, cy=240.0):
    return np.array([[f, 0, cx], [0, f, cy], [0, 0, 1.0]])


def random_pose(rng, depth=2.0):
    rot = Rotation.from_rotvec(rng.uniform(-0.25, 0.25, size=3)).as_matrix()
    t = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), depth + rng.uniform(-0.3, 0.3)])
    k = simple_k(500 + rng.uniform(-50, 50))
    return PlanePose(rotation=rot, translation=t, intrinsics=k)


def project_through_pose_3d(pose, pts_plane):
    """Ray-free 3D oracle: embed plane points at z=0 and project."""
    out = []
    for x, y in np.atleast_2d(pts_plane):
        xc = pose.rotation @ np.array([x, y, 0.0]) + pose.translation
        px = pose.intrinsics @ xc
        out.append(px[:2] / px[2])
    return np.array(out)


def test_plane_pose_identical_gives_identity():
    rng = np.random.default_rng(31)
    pose = random_pose(rng)
    h = homography_from_plane_pose(pose, pose)
    assert np.max(np.abs(h - np.eye(3))) < 1e-9


def test_plane_pose_inplane_translation_is_translation():
    k = simple_k()
    a = PlanePose(rotation=np.eye(3), translation=[0, 0, 2.0], intrinsics=k)
    b = PlanePose(rotation=np.eye(3), translation=[0.1, -0.05, 2.0], intrinsics=k)
    h = homography_from_plane_pose(a, b)
    # fronto-parallel, pure in-plane camera shift: translation-only homography
    assert np.max(np.abs(h[:2, :2] - np.eye(2))) < 1e-9
    assert np.max(np.abs(h[2, :2])) < 1e-12


def test_plane_pose_matches_projection_oracle():
    rng = np.random.default_rng(37)
    for _ in range(100):
        a = random_pose(rng)
        b = random_pose(rng)
        h = homography_from_plane_pose(a, b)
        pts = rng.uniform(-0.5, 0.5, size=(100, 2))
        px_a = project_through_pose_3d(a, pts)
        px_b = project_through_pose_3d(b, pts)
        mapped = homography_apply(h, px_a)
        assert np.max(np.abs(mapped - px_b)) < 1e-6


def test_plane_to_image_matches_3d_projection():
    rng = np.random.default_rng(41)
    pose = random_pose(rng)
    pts = rng.uniform(-0.4, 0.4, size=(20, 2))
    assert np.max(np.abs(pose.project(pts) - project_through_pose_3d(pose, pts))) < 1e-8


def test_max_corner_displacement():
    h = np.array([[1, 0, 3], [0, 1, 4], [0, 0, 1]], dtype=float)
    corners = rect_corners(0, 0, 10, 10)
    assert abs(max_corner_displacement(h, corners) - 5.0) < 1e-12
