"""Point-camera symmetry groups and their action on scenes.

Each camera class declares the group that moves points and cameras together
without changing any picture: Euclidean motions (affine, perspective, line
cameras), dilations = translations plus scalings (oriented omni cameras), or
the full similarity group (non-oriented omni and zoom cameras). Elements are
stored as scale-then-rotate-then-translate composites acting on points as
``p -> scale * R p + v``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cameras as cam
from . import geometry
from .cameras import Camera, CameraClass
from .errors import DegenerateConfigurationError, GroupMismatchError
from .sfm import JetScene, Scene

_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class GroupElement:
    """One similarity transformation: scale, proper rotation, translation."""

    scale: float
    rotation: np.ndarray  # (d, d)
    translation: np.ndarray  # (d,)

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        v = np.asarray(self.translation, dtype=float).reshape(-1)
        if R.shape != (v.size, v.size):
            raise ValueError("rotation and translation dimensions disagree")
        if np.max(np.abs(R.T @ R - np.eye(v.size))) > _ORTHO_TOL or np.linalg.det(R) < 0:
            raise ValueError("rotation must be orthogonal with determinant +1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        Rc = R.copy()
        Rc.flags.writeable = False
        vc = v.copy()
        vc.flags.writeable = False
        object.__setattr__(self, "rotation", Rc)
        object.__setattr__(self, "translation", vc)

    @property
    def d(self) -> int:
        return self.translation.size


def identity(d: int) -> GroupElement:
    return GroupElement(1.0, np.eye(d), np.zeros(d))


def act_point(gamma: GroupElement, point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    return gamma.scale * (gamma.rotation @ p) + gamma.translation


def act_points(gamma: GroupElement, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return gamma.scale * (pts @ gamma.rotation.T) + gamma.translation


def _check_group(gamma: GroupElement, cls: CameraClass):
    if cls.group == "euclidean" and abs(gamma.scale - 1.0) > 1e-12:
        raise GroupMismatchError(f"{cls.name} admits no scaling (scale={gamma.scale})")
    if cls.group == "dilation" and np.max(np.abs(gamma.rotation - np.eye(cls.d))) > 1e-12:
        raise GroupMismatchError(f"{cls.name} admits no rotations")


def act_camera(gamma: GroupElement, camera: Camera) -> Camera:
    """Transform a camera so the moved camera photographs moved points
    identically to the original photographing the original points."""
    cls = camera.cls
    _check_group(gamma, cls)
    R, lam, v = gamma.rotation, gamma.scale, gamma.translation
    p = camera.params

    if cls.kind == "affine":
        Rc = geometry.rotation_matrix(cls.d, p[cls.rotation_slice])
        Rc_new = Rc @ R.T
        offset_new = p[cls.rot_dim:] - (Rc_new @ v)[: cls.s]
        return Camera(cls, np.concatenate([geometry.rotation_log(cls.d, Rc_new), offset_new]))

    if cls.kind == "omni":
        center_new = act_point(gamma, p[: cls.d])
        if cls.oriented:
            return Camera(cls, center_new)
        if cls.d == 2:
            beta = geometry.rot2_angle(R)
            return Camera(cls, np.append(center_new, geometry.wrap_angle(p[2] + beta)))
        Rc = geometry.rotation_matrix(3, p[3:6])
        return Camera(cls, np.concatenate([center_new, geometry.rot3_log(Rc @ R.T)]))

    if cls.kind == "perspective":
        pos_new = act_point(gamma, p[: cls.d])
        Rc = geometry.rotation_matrix(cls.d, p[cls.rotation_slice])
        rot_new = geometry.rotation_log(cls.d, Rc @ R.T)
        parts = [pos_new, rot_new]
        if cls.focal_mode == "zoom":
            parts.append(np.array([lam * p[cls.focal_index]]))
        return Camera(cls, np.concatenate(parts))

    if cls.kind == "line":
        u_new = R @ cam.line_direction(camera)
        theta, phi = geometry.angles_from_unit(u_new)
        c_new = p[2] + u_new @ v
        return Camera(cls, np.array([theta, phi, c_new]))

    raise AssertionError(f"unhandled camera kind {cls.kind}")


def act_scene(gamma: GroupElement, scene: Scene) -> Scene:
    return Scene(
        scene.cls,
        act_points(gamma, scene.points),
        tuple(act_camera(gamma, c) for c in scene.cams),
        scene.globals_vec,
    )


def act_jet_scene(gamma: GroupElement, js: JetScene) -> JetScene:
    """Transform a moving-point scene; difference vectors rotate and scale
    but do not translate."""
    if js.model == "circle":
        centers = act_points(gamma, js.motion[:, :2])
        radii = js.motion[:, 2:] @ (gamma.scale * gamma.rotation).T
        motion = np.column_stack([centers, radii])
    else:
        motion = js.motion.copy()
        motion[:, 0, :] = act_points(gamma, js.motion[:, 0, :])
        for l in range(1, js.motion.shape[1]):
            motion[:, l, :] = js.motion[:, l, :] @ (gamma.scale * gamma.rotation).T
    return JetScene(js.cls, js.model, motion, js.times,
                    tuple(act_camera(gamma, c) for c in js.cams),
                    js.globals_vec, js.omega)


def random_element(group: str, d: int, seed) -> GroupElement:
    """Deterministic random group element: rotation uniform, translation in
    [-5, 5]^d, scale in [0.5, 2] where the group allows each generator."""
    rng = np.random.default_rng(seed)
    lam = float(rng.uniform(0.5, 2.0)) if group in ("dilation", "similarity") else 1.0
    if group in ("euclidean", "similarity"):
        R = geometry.rotation_matrix(d, geometry.random_rotation_coords(d, rng))
    else:
        R = np.eye(d)
    v = rng.uniform(-5.0, 5.0, size=d)
    if group not in ("euclidean", "dilation", "similarity"):
        raise ValueError(f"unknown group {group!r}")
    return GroupElement(lam, R, v)


def _one_parameter_elements(group: str, d: int, t: float) -> list[GroupElement]:
    """Values at parameter t of each one-parameter subgroup, fixed order:
    d translations, then rotations, then one scaling."""
    out = [GroupElement(1.0, np.eye(d), t * e) for e in np.eye(d)]
    if group in ("euclidean", "similarity"):
        if d == 2:
            out.append(GroupElement(1.0, geometry.rot2(t), np.zeros(2)))
        else:
            for axis in np.eye(3):
                out.append(GroupElement(1.0, geometry.rot3(t * axis), np.zeros(3)))
    if group in ("dilation", "similarity"):
        out.append(GroupElement(float(np.exp(t)), np.eye(d), np.zeros(d)))
    return out


def _param_wrap_mask(scene) -> np.ndarray:
    """Mask over the scene coordinate vector marking angle-valued entries."""
    cls = scene.cls
    if isinstance(scene, JetScene):
        point_block = scene.point_dim * scene.n
    else:
        point_block = cls.d * scene.n
    mask = np.zeros(point_block + cls.f * scene.m + cls.h, dtype=bool)
    for j in range(scene.m):
        for idx in cls.angular_param_indices:
            mask[point_block + j * cls.f + idx] = True
    return mask


def _generators_fd(scene, act, group: str, g_expected: int, eps: float = 1e-6) -> np.ndarray:
    base_dim = scene.to_vector().size
    wrap = _param_wrap_mask(scene)
    plus = _one_parameter_elements(group, scene.cls.d, eps)
    minus = _one_parameter_elements(group, scene.cls.d, -eps)
    cols = []
    for gp, gm in zip(plus, minus):
        diff = act(gp, scene).to_vector() - act(gm, scene).to_vector()
        diff[wrap] = geometry.wrap_angle(diff[wrap])
        cols.append(diff / (2.0 * eps))
    G = np.column_stack(cols)
    if G.shape != (base_dim, g_expected):
        raise AssertionError("generator count does not match the group dimension")
    return G


def generators(cls: CameraClass, scene: Scene, eps: float = 1e-6) -> np.ndarray:
    """Tangent vectors of the symmetry orbits at ``scene``, one column per
    group generator (translations, rotations, scaling), shape (dim, g)."""
    if scene.cls.name != cls.name:
        raise ValueError("scene class does not match")
    G = _generators_fd(scene, act_scene, cls.group, cls.g, eps)
    if not np.all(np.isfinite(G)):
        raise DegenerateConfigurationError("generators undefined at a singular scene")
    return G


def jet_generators(js: JetScene, eps: float = 1e-6) -> np.ndarray:
    """Symmetry orbit tangents for a moving-point scene, shape (dim, g)."""
    return _generators_fd(js, act_jet_scene, js.cls.group, js.cls.g, eps)


def _matched_positions(scene: Scene) -> np.ndarray:
    """Positions used for alignment: points plus camera positions where the
    class exposes one. Parameter charts are not equivariant; positions are."""
    rows = [scene.points]
    if scene.cls.position_slice is not None:
        rows.append(np.stack([c.position for c in scene.cams]))
    return np.concatenate(rows, axis=0)


def _procrustes(A: np.ndarray, B: np.ndarray, group: str) -> GroupElement:
    """Closed-form group element minimizing sum |gamma(A_k) - B_k|^2."""
    d = A.shape[1]
    a_bar = A.mean(axis=0)
    b_bar = B.mean(axis=0)
    A0 = A - a_bar
    B0 = B - b_bar
    denom = float(np.sum(A0 * A0))
    if denom < 1e-20:
        raise DegenerateConfigurationError("alignment positions are coincident")

    if group == "dilation":
        R = np.eye(d)
        lam = float(np.sum(A0 * B0)) / denom
        if lam <= 0:
            raise DegenerateConfigurationError("alignment would require a non-positive scale")
    else:
        H = B0.T @ A0
        U, sig, Vt = np.linalg.svd(H)
        if sig[d - 2] <= 1e-12 * max(1.0, sig[0]):
            raise DegenerateConfigurationError(
                "positions are affinely degenerate; rotation not identifiable"
            )
        D = np.eye(d)
        D[-1, -1] = np.sign(np.linalg.det(U @ Vt)) or 1.0
        R = U @ D @ Vt
        if group == "similarity":
            lam = float(np.trace(np.diag(sig) @ D)) / denom
            if lam <= 0:
                raise DegenerateConfigurationError("alignment would require a non-positive scale")
        else:
            lam = 1.0
    v = b_bar - lam * (R @ a_bar)
    return GroupElement(lam, R, v)


def align(a: Scene, b: Scene) -> tuple[GroupElement, float]:
    """Best group element of the class's group mapping scene ``a`` onto
    ``b``, and the residual RMSE over points and camera positions."""
    if a.cls.name != b.cls.name or a.n != b.n or a.m != b.m:
        raise ValueError("scenes must share class, point count, and camera count")
    A = _matched_positions(a)
    B = _matched_positions(b)
    gamma = _procrustes(A, B, a.cls.group)
    resid = act_points(gamma, A) - B
    rmse = float(np.sqrt(np.mean(np.sum(resid * resid, axis=1))))
    return gamma, rmse


def align_jet(a: JetScene, b: JetScene) -> tuple[GroupElement, float]:
    """Align moving-point scenes via circle centers (or constant terms) and
    camera positions; the RMSE also covers the aligned difference vectors."""
    if a.cls.name != b.cls.name or a.n != b.n or a.m != b.m or a.model != b.model:
        raise ValueError("jet scenes must share class, model, and counts")
    if a.model == "circle":
        A_anchor, B_anchor = a.motion[:, :2], b.motion[:, :2]
        A_free, B_free = a.motion[:, 2:], b.motion[:, 2:]
    else:
        A_anchor, B_anchor = a.motion[:, 0, :], b.motion[:, 0, :]
        A_free = a.motion[:, 1:, :].reshape(-1, a.cls.d)
        B_free = b.motion[:, 1:, :].reshape(-1, b.cls.d)
    rows_a = [A_anchor]
    rows_b = [B_anchor]
    if a.cls.position_slice is not None:
        rows_a.append(np.stack([c.position for c in a.cams]))
        rows_b.append(np.stack([c.position for c in b.cams]))
    gamma = _procrustes(np.concatenate(rows_a), np.concatenate(rows_b), a.cls.group)
    anchored = act_points(gamma, np.concatenate(rows_a)) - np.concatenate(rows_b)
    free = A_free @ (gamma.scale * gamma.rotation).T - B_free
    resid = np.concatenate([anchored, free], axis=0)
    rmse = float(np.sqrt(np.mean(np.sum(resid * resid, axis=1))))
    return gamma, rmse
