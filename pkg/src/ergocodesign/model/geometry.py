"""Rotation and small-vector utilities.

All functions accept leading batch dimensions and stay complex-analytic
(no ``abs``/``norm``/``conj``) so that complex-step differentiation works
through them.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInputError

__all__ = [
    "skew",
    "vee",
    "cross",
    "quaternion_to_rotation",
    "normalize_quaternion",
    "quaternion_rate_map",
    "rotation_to_quaternion",
    "rpy_to_rotation",
    "axis_angle_rotation",
    "rotation_residual",
    "rotation_residual_jacobian",
]


def skew(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix S(v) such that S(v) @ u == cross(v, u)."""
    v = np.asarray(v)
    z = np.zeros_like(v[..., 0])
    x, y, w = v[..., 0], v[..., 1], v[..., 2]
    return np.stack(
        [
            np.stack([z, -w, y], axis=-1),
            np.stack([w, z, -x], axis=-1),
            np.stack([-y, x, z], axis=-1),
        ],
        axis=-2,
    )


def vee(S: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew` applied to the skew part of ``S``."""
    return 0.5 * np.stack(
        [S[..., 2, 1] - S[..., 1, 2], S[..., 0, 2] - S[..., 2, 0], S[..., 1, 0] - S[..., 0, 1]],
        axis=-1,
    )


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Broadcasting cross product over the last axis (faster than np.cross for small batches)."""
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def normalize_quaternion(phi: np.ndarray) -> np.ndarray:
    """Return ``phi / |phi|``; raises on an exactly zero real quaternion."""
    phi = np.asarray(phi)
    n2 = np.sum(phi * phi, axis=-1, keepdims=True)
    if not np.iscomplexobj(phi) and np.any(n2 == 0.0):
        raise DegenerateInputError("zero quaternion cannot be normalized")
    return phi / np.sqrt(n2)


def quaternion_to_rotation(phi: np.ndarray) -> np.ndarray:
    """Rotation matrix of a scalar-first quaternion (w, x, y, z).

    The input is normalized first, so any nonzero multiple of a unit
    quaternion gives the same rotation.

    Args:
        phi: Quaternion(s), shape (..., 4).

    Returns:
        Rotation matrices, shape (..., 3, 3).

    Raises:
        DegenerateInputError: If a quaternion is exactly zero.
    """
    u = normalize_quaternion(phi)
    w, x, y, z = u[..., 0], u[..., 1], u[..., 2], u[..., 3]
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1),
        ],
        axis=-2,
    )


def quaternion_rate_map(phi: np.ndarray) -> np.ndarray:
    """Map E(phi), shape (..., 3, 4), from a quaternion change to the world-frame rotation change.

    Accounts for normalization: ``d theta = E(phi) @ d phi`` where the rotation is
    that of ``phi / |phi|``.
    """
    phi = np.asarray(phi)
    n = np.sqrt(np.sum(phi * phi, axis=-1))
    u = phi / n[..., None]
    w, v = u[..., 0], u[..., 1:]
    eye = np.eye(3)
    right = w[..., None, None] * eye + skew(v)
    E = np.concatenate([-v[..., :, None], right], axis=-1)
    return 2.0 * E / n[..., None, None]


def rotation_to_quaternion(R: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0 for a single rotation matrix."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = np.array([0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = 2.0 * np.sqrt(1.0 + R[i, i] - R[j, j] - R[k, k])
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def rpy_to_rotation(rpy) -> np.ndarray:
    """Fixed-axis roll-pitch-yaw rotation ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``."""
    r, p, y = (float(a) for a in rpy)
    cr, sr, cp, sp, cy, sy = np.cos(r), np.sin(r), np.cos(p), np.sin(p), np.cos(y), np.sin(y)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def axis_angle_rotation(axis: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Rodrigues rotation about unit ``axis`` (..., 3) by ``angle`` (...)."""
    angle = np.asarray(angle)
    K = skew(axis)
    s = np.sin(angle)[..., None, None]
    c = np.cos(angle)[..., None, None]
    return np.eye(3) + s * K + (1.0 - c) * (K @ K)


def rotation_residual(R: np.ndarray, R_ref: np.ndarray) -> np.ndarray:
    """Orientation error ``vee(E - E^T) / 2`` with ``E = R_ref^T R``; zero when R equals R_ref."""
    E = np.swapaxes(R_ref, -1, -2) @ R
    return vee(E)


def rotation_residual_jacobian(R: np.ndarray, R_ref: np.ndarray) -> np.ndarray:
    """Derivative of :func:`rotation_residual` w.r.t. a world-frame rotation perturbation.

    With ``dR = S(d theta) R`` the residual changes by ``J @ d theta``.
    """
    E = np.swapaxes(R_ref, -1, -2) @ R
    tr = E[..., 0, 0] + E[..., 1, 1] + E[..., 2, 2]
    G = 0.5 * (tr[..., None, None] * np.eye(3) - np.swapaxes(E, -1, -2))
    return G @ np.swapaxes(R, -1, -2)
