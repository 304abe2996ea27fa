"""Batched forward kinematics and Jacobians of floating-base trees.

Configurations are ``q = (p_B, phi_B, s)`` with a scalar-first base quaternion.
Velocities use the mixed representation ``nu = (dp_B/dt, omega_B, ds/dt)`` with
``omega_B`` in world coordinates. Every function accepts leading batch
dimensions on ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .geometry import axis_angle_rotation, cross, quaternion_rate_map, quaternion_to_rotation, skew, rotation_to_quaternion
from .model import HardwareParams, KinematicModel, RigidBodyTree, resolve

__all__ = [
    "Kinematics",
    "forward",
    "frame_poses",
    "point_jacobians",
    "angular_jacobians",
    "frame_jacobians",
    "forward_kinematics",
    "frame_jacobian",
    "configuration_tangent_map",
    "perturb_configuration",
    "make_configuration",
]


@dataclass(frozen=True, eq=False)
class Kinematics:
    """World poses of every link plus world joint origins and axes."""

    tree: RigidBodyTree
    link_p: np.ndarray
    link_R: np.ndarray
    joint_o: np.ndarray
    joint_a: np.ndarray

    @property
    def base_p(self) -> np.ndarray:
        return self.link_p[..., self.tree.base, :]


def _check_q(tree: RigidBodyTree, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q)
    if q.shape[-1] != 7 + tree.n:
        raise ContractError(f"configuration has length {q.shape[-1]}, expected {7 + tree.n}")
    return q


def make_configuration(position, quaternion, joints) -> np.ndarray:
    """Concatenate base position, base quaternion and joint positions."""
    return np.concatenate([np.asarray(position, float), np.asarray(quaternion, float), np.asarray(joints, float)])


def forward(tree: RigidBodyTree, q: np.ndarray) -> Kinematics:
    """Poses of all links for configuration(s) ``q``."""
    q = _check_q(tree, q)
    batch = q.shape[:-1]
    dtype = np.result_type(q.dtype, float)
    nl, n = tree.n_links, tree.n
    P = [None] * nl
    R = [None] * nl
    O = [None] * n
    A = [None] * n
    P[tree.base] = q[..., 0:3]
    R[tree.base] = quaternion_to_rotation(q[..., 3:7])
    s = q[..., 7:]
    for j in tree.order:
        par, ch = tree.joint_parent[j], tree.joint_child[j]
        Rp, pp = R[par], P[par]
        Rj = Rp @ tree.joint_R[j]
        o = pp + Rp @ tree.joint_p[j]
        a = Rj @ tree.joint_axis[j]
        O[j], A[j] = o, a
        if tree.revolute[j]:
            P[ch] = o
            R[ch] = Rj @ axis_angle_rotation(tree.joint_axis[j], s[..., j])
        else:
            P[ch] = o + a * s[..., j, None]
            R[ch] = Rj
    empty3 = np.zeros(batch + (0, 3), dtype=dtype)
    return Kinematics(
        tree=tree,
        link_p=np.stack(P, axis=-2),
        link_R=np.stack(R, axis=-3),
        joint_o=np.stack(O, axis=-2) if n else empty3,
        joint_a=np.stack(A, axis=-2) if n else empty3,
    )


def frame_poses(kin: Kinematics, frames) -> tuple[np.ndarray, np.ndarray]:
    """World positions (..., F, 3) and rotations (..., F, 3, 3) of frame indices ``frames``."""
    tree = kin.tree
    frames = np.asarray(frames, dtype=int)
    links = tree.frame_link[frames]
    Rl = kin.link_R[..., links, :, :]
    p = kin.link_p[..., links, :] + (Rl @ tree.frame_p[frames][..., None])[..., 0]
    return p, Rl @ tree.frame_R[frames]


def point_jacobians(kin: Kinematics, links, points: np.ndarray) -> np.ndarray:
    """Linear-velocity Jacobians (..., P, 3, 6+n) of world points rigidly attached to ``links``."""
    tree = kin.tree
    links = np.asarray(links, dtype=int)
    mask = tree.support[links]  # (P, n)
    batch = points.shape[:-2]
    Pn = len(links)
    dtype = np.result_type(points.dtype, kin.link_p.dtype)
    J = np.zeros(batch + (Pn, 3, tree.nv), dtype=dtype)
    J[..., 0, 0] = 1.0
    J[..., 1, 1] = 1.0
    J[..., 2, 2] = 1.0
    J[..., 3:6] = -skew(points - kin.base_p[..., None, :])
    if tree.n:
        a = kin.joint_a[..., None, :, :]
        lever = points[..., :, None, :] - kin.joint_o[..., None, :, :]
        cols = np.where(tree.revolute[:, None], cross(a, lever), a)
        cols = cols * mask[..., None]
        J[..., 6:] = np.swapaxes(cols, -1, -2)
    return J


def angular_jacobians(kin: Kinematics, links) -> np.ndarray:
    """Angular-velocity Jacobians (..., P, 3, 6+n) of ``links``."""
    tree = kin.tree
    links = np.asarray(links, dtype=int)
    mask = tree.support[links] & tree.revolute[None, :]
    batch = kin.link_p.shape[:-2]
    J = np.zeros(batch + (len(links), 3, tree.nv), dtype=kin.link_p.dtype)
    J[..., 0, 3] = 1.0
    J[..., 1, 4] = 1.0
    J[..., 2, 5] = 1.0
    if tree.n:
        cols = kin.joint_a[..., None, :, :] * mask[..., None]
        J[..., 6:] = np.swapaxes(cols, -1, -2)
    return J


def frame_jacobians(kin: Kinematics, frames) -> np.ndarray:
    """Stacked (linear; angular) Jacobians (..., F, 6, 6+n) of frame indices ``frames``."""
    frames = np.asarray(frames, dtype=int)
    links = kin.tree.frame_link[frames]
    p, _ = frame_poses(kin, frames)
    return np.concatenate([point_jacobians(kin, links, p), angular_jacobians(kin, links)], axis=-2)


def _tree(model, params) -> RigidBodyTree:
    if isinstance(model, RigidBodyTree):
        return model
    if not isinstance(model, KinematicModel):
        raise ContractError("expected a KinematicModel or RigidBodyTree")
    return resolve(model, params)


def forward_kinematics(model: KinematicModel, params: HardwareParams | None, q: np.ndarray, frame: str):
    """World pose ``(p, R)`` of a named frame (or link) for configuration ``q``.

    Args:
        model: Model description (or an already resolved tree).
        params: Design; None means nominal.
        q: Configuration(s) ``(p_B, phi_B, s)``, shape (..., 7+n).
        frame: Frame or link name.

    Raises:
        FrameLookupError: If ``frame`` is unknown.
    """
    tree = _tree(model, params)
    idx = tree.frame(frame)
    kin = forward(tree, q)
    p, R = frame_poses(kin, [idx])
    return p[..., 0, :], R[..., 0, :, :]


def frame_jacobian(model: KinematicModel, params: HardwareParams | None, q: np.ndarray, frame: str) -> np.ndarray:
    """Mixed-representation Jacobian (..., 6, 6+n) of a named frame."""
    tree = _tree(model, params)
    idx = tree.frame(frame)
    return frame_jacobians(forward(tree, q), [idx])[..., 0, :, :]


def configuration_tangent_map(q: np.ndarray) -> np.ndarray:
    """Matrix T (..., 6+n, 7+n) mapping a change in q to ``(dp, d theta_world, ds)``."""
    q = np.asarray(q)
    n = q.shape[-1] - 7
    T = np.zeros(q.shape[:-1] + (6 + n, 7 + n), dtype=np.result_type(q.dtype, float))
    T[..., 0, 0] = T[..., 1, 1] = T[..., 2, 2] = 1.0
    T[..., 3:6, 3:7] = quaternion_rate_map(q[..., 3:7])
    if n:
        idx = np.arange(n)
        T[..., 6 + idx, 7 + idx] = 1.0
    return T


def perturb_configuration(q: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Move a single configuration by a tangent step ``(dp, d theta_world, ds)``."""
    q = np.asarray(q, dtype=float)
    delta = np.asarray(delta, dtype=float)
    out = q.copy()
    out[:3] += delta[:3]
    th = delta[3:6]
    ang = np.linalg.norm(th)
    Rd = axis_angle_rotation(th / ang, ang) if ang > 0 else np.eye(3)
    out[3:7] = rotation_to_quaternion(Rd @ quaternion_to_rotation(q[3:7]))
    out[7:] += delta[6:]
    return out
