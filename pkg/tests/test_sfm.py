"""Measurement map, jets, finite-difference Jacobians, and rank analysis."""

import numpy as np
import pytest

from sfmlab.cameras import Camera, catalog_lookup, project
from sfmlab.errors import SingularConfigurationError
from sfmlab.sfm import (
    JetScene,
    Scene,
    evaluate,
    evaluate_jet,
    generic_rank,
    jacobian,
    jet_position,
    kernel_check,
    numerical_rank,
    predicted_rank,
    random_jet_scene,
    random_scene,
)
from sfmlab.symmetry import act_scene, generators, random_element


def test_evaluate_reduces_to_project():
    cls = catalog_lookup("perspective-known-3d")
    scene = random_scene(cls, 1, 1, seed=3)
    meas = evaluate(scene)
    direct = project(scene.cams[0], scene.globals_vec, scene.points[0])
    assert np.allclose(meas.data[0, 0], direct)


def test_evaluate_shapes():
    rng = np.random.default_rng(5)
    for name in ("omni-2d", "affine-ortho-3d", "line-3d"):
        cls = catalog_lookup(name)
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        scene = random_scene(cls, n, m, seed=(9, n, m))
        assert evaluate(scene).flat().shape == (cls.s * n * m,)


def test_evaluate_reports_singular_pair():
    cls = catalog_lookup("omni-oriented-2d")
    cams = (Camera(cls, np.array([0.0, 0.0])), Camera(cls, np.array([3.0, 3.0])))
    scene = Scene(cls, np.array([[1.0, 1.0], [3.0, 3.0]]), cams, np.zeros(0))
    with pytest.raises(SingularConfigurationError) as err:
        evaluate(scene)
    assert err.value.point_index == 1 and err.value.camera_index == 1


def test_evaluate_invariant_under_group_action():
    for name in ("omni-oriented-2d", "omni-3d", "perspective-3d", "line-3d"):
        cls = catalog_lookup(name)
        worst = 0.0
        for k in range(50):
            scene = random_scene(cls, 3, 3, seed=(21, k))
            gamma = random_element(cls.group, cls.d, (22, k))
            moved = act_scene(gamma, scene)
            diff = evaluate(moved).flat() - evaluate(scene).flat()
            worst = max(worst, float(np.max(np.abs(diff))))
        assert worst < 1e-9


def test_jet_position_circle_and_taylor():
    coeffs = np.array([1.0, 2.0, 0.5, 0.0])  # center (1,2), radius (0.5, 0)
    assert np.allclose(jet_position(coeffs, 0.0, "circle", omega=0.7), [1.5, 2.0])
    t_half = np.pi / 0.7
    assert np.allclose(jet_position(coeffs, t_half, "circle", omega=0.7), [0.5, 2.0])
    taylor = np.array([[1.0, 0.0], [0.5, -1.0]])  # P0 + P1 t
    assert np.allclose(jet_position(taylor, 2.0, "taylor"), [2.0, -2.0])


def test_evaluate_jet_taylor_order_zero_is_static():
    cls = catalog_lookup("omni-oriented-2d")
    scene = random_scene(cls, 3, 4, seed=33)
    js = JetScene(cls, "taylor", scene.points[:, None, :], np.arange(4.0),
                  scene.cams, scene.globals_vec)
    assert np.allclose(evaluate_jet(js).data, evaluate(scene).data)


def test_evaluate_jet_quadratic_taylor_matches_displaced_static():
    cls = catalog_lookup("omni-oriented-2d")
    scene = random_scene(cls, 3, 4, seed=34)
    rng = np.random.default_rng(35)
    motion = np.stack([scene.points,
                       rng.uniform(-0.5, 0.5, size=(3, 2)),
                       rng.uniform(-0.2, 0.2, size=(3, 2))], axis=1)
    times = np.array([0.0, 0.5, 1.0, 1.5])
    js = JetScene(cls, "taylor", motion, times, scene.cams, scene.globals_vec)
    got = evaluate_jet(js).data
    for j, t in enumerate(times):
        displaced = Scene(cls, motion[:, 0] + t * motion[:, 1] + t * t * motion[:, 2],
                          scene.cams, scene.globals_vec)
        assert np.allclose(got[:, j, :], evaluate(displaced).data[:, j, :])


def test_evaluate_jet_frozen_circle_matches_static():
    cls = catalog_lookup("omni-2d")
    js0 = random_jet_scene(cls, 4, 3, seed=44)
    frozen = JetScene(cls, "circle", js0.motion, js0.times, js0.cams,
                      js0.globals_vec, omega=0.0)
    start_points = frozen.motion[:, :2] + frozen.motion[:, 2:]
    static = Scene(cls, start_points, frozen.cams, frozen.globals_vec)
    assert np.allclose(evaluate_jet(frozen).data, evaluate(static).data)


def test_jet_scene_shape_and_validation():
    cls = catalog_lookup("omni-2d")
    js = random_jet_scene(cls, 7, 6, seed=2)
    assert evaluate_jet(js).flat().size == 42
    with pytest.raises(ValueError):
        JetScene(cls, "circle", js.motion, js.times[::-1], js.cams, js.globals_vec, 0.7)
    bad = js.motion.copy()
    bad[0, 2:] = 0.0
    with pytest.raises(ValueError):
        JetScene(cls, "circle", bad, js.times, js.cams, js.globals_vec, 0.7)


def test_jacobian_of_affine_point_block_is_rotation_rows():
    cls = catalog_lookup("affine-ortho-3d")
    scene = Scene(cls, np.array([[0.4, -0.2, 0.9]]),
                  (Camera(cls, np.zeros(5)),), np.zeros(0))
    J = jacobian(scene)
    assert np.allclose(J[:, :3], np.array([[1.0, 0, 0], [0, 1.0, 0]]), atol=1e-9)


def test_jacobian_step_consistency():
    for name in ("omni-2d", "perspective-3d"):
        cls = catalog_lookup(name)
        scene = random_scene(cls, 3, 2, seed=61)
        J5 = jacobian(scene, step=1e-5)
        J6 = jacobian(scene, step=1e-6)
        assert np.allclose(J5, J6, rtol=1e-4, atol=1e-7)


def test_numerical_rank_basics():
    assert numerical_rank(np.zeros((4, 6))).rank == 0
    assert numerical_rank(np.eye(5)).rank == 5
    rng = np.random.default_rng(0)
    A = np.outer(rng.normal(size=20), rng.normal(size=15))
    A += np.outer(rng.normal(size=20), rng.normal(size=15))
    rep = numerical_rank(A)
    assert rep.rank == 2
    assert rep.gap > 1e6
    with pytest.raises(ValueError):
        numerical_rank(np.zeros((0, 3)))


def test_generic_rank_borderline_examples():
    cases = [("affine-ortho-3d", 3, 3, 18), ("omni-oriented-3d", 2, 2, 8)]
    for name, n, m, expected in cases:
        cls = catalog_lookup(name)
        rep = generic_rank(cls, n, m, trials=3, seed=0)
        assert rep.rank == expected == predicted_rank(cls, n, m)


def test_generic_rank_two_view_ortho_deficit():
    cls = catalog_lookup("affine-ortho-3d")
    rep = generic_rank(cls, 6, 2, trials=3, seed=0)
    assert rep.rank <= 3 * 6 + 10 - 6 - 1


def test_rank_invariant_under_gauge_rerandomization():
    for name in ("omni-oriented-2d", "affine-ortho-3d"):
        cls = catalog_lookup(name)
        scene = random_scene(cls, 3, 3, seed=70)
        gamma = random_element(cls.group, cls.d, 71)
        r1 = numerical_rank(jacobian(scene)).rank
        r2 = numerical_rank(jacobian(act_scene(gamma, scene))).rank
        assert r1 == r2


def test_coplanar_ortho_scene_drops_rank():
    cls = catalog_lookup("affine-ortho-3d")
    rng = np.random.default_rng(9)
    pts = np.column_stack([rng.uniform(-2, 2, size=(3, 2)), np.zeros(3)])
    cams = tuple(
        Camera(cls, np.concatenate([[0.0, 0.0, rng.uniform(-np.pi, np.pi)],
                                    rng.uniform(-2, 2, size=2)]))
        for _ in range(3)
    )
    scene = Scene(cls, pts, cams, np.zeros(0))
    assert numerical_rank(jacobian(scene)).rank < 18


def test_kernel_check_passes_and_detects_bad_directions():
    cls = catalog_lookup("omni-oriented-2d")
    scene = random_scene(cls, 3, 3, seed=81)
    rep = kernel_check(scene, tol=1e-5)
    assert rep.passed and rep.ratios.shape == (cls.g,)

    J = jacobian(scene)
    G = generators(cls, scene)
    rng = np.random.default_rng(82)
    v = G[:, 0] + 0.1 * rng.normal(size=G.shape[0])
    ratio = np.linalg.norm(J @ v) / (np.linalg.norm(J, 2) * np.linalg.norm(v))
    assert ratio > 1e-5  # perturbed generator leaves the kernel


def test_scaling_is_not_a_symmetry_of_fixed_focal_perspective():
    cls = catalog_lookup("perspective-known-3d")
    scene = random_scene(cls, 4, 2, seed=83)
    J = jacobian(scene)
    v = np.zeros(scene.dim)
    v[: 3 * 4] = scene.points.ravel()  # scale points about the origin
    for j, camera in enumerate(scene.cams):
        base = 3 * 4 + j * cls.f
        v[base : base + 3] = camera.params[:3]  # and camera positions
    ratio = np.linalg.norm(J @ v) / (np.linalg.norm(J, 2) * np.linalg.norm(v))
    assert ratio > 1e-3


def test_jet_kernel_check_accepts_declared_generators():
    cls = catalog_lookup("omni-2d")
    js = random_jet_scene(cls, 5, 5, seed=91)
    rep = kernel_check(js, tol=1e-5)
    assert rep.passed and rep.ratios.shape == (cls.g,)


def test_generic_rank_threaded_matches_sequential(monkeypatch):
    cls = catalog_lookup("omni-oriented-2d")
    seq = generic_rank(cls, 3, 3, trials=4, seed=5)
    monkeypatch.setenv("SFMLAB_THREADS", "4")
    par = generic_rank(cls, 3, 3, trials=4, seed=5)
    assert seq.trial_ranks == par.trial_ranks and seq.rank == par.rank
