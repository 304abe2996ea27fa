"""Floating-base dynamics terms: mass matrix, bias forces, motor reflection.

The equations of motion in the mixed representation read
``Mbar(q) nudot + h(q, nu) = Bbar tau + J_c^T f - Kbar_v nu``.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, ModelError
from .geometry import cross, skew
from .kinematics import Kinematics, _tree, angular_jacobians, forward, frame_jacobians, point_jacobians
from .model import HardwareParams, KinematicModel, RigidBodyTree

__all__ = [
    "GRAVITY",
    "com_positions",
    "mass_matrix",
    "bias_forces",
    "gravity_forces",
    "generalized_force",
    "generalized_force_jacobian",
    "motor_reflected_terms",
    "actuation_matrix",
    "full_dynamics_residual",
]

GRAVITY = np.array([0.0, 0.0, -9.81])


def com_positions(kin: Kinematics) -> np.ndarray:
    """World CoM of every link, shape (..., L, 3)."""
    tree = kin.tree
    return kin.link_p + (kin.link_R @ tree.link_com[..., None])[..., 0]


def _all_links(tree: RigidBodyTree) -> np.ndarray:
    return np.arange(tree.n_links)


def mass_matrix(model, params: HardwareParams | None, q: np.ndarray) -> np.ndarray:
    """Mass matrix M(q), shape (..., 6+n, 6+n), without motor reflection.

    Args:
        model: KinematicModel or resolved RigidBodyTree.
        params: Design (None for nominal; ignored for a tree).
        q: Configuration(s), shape (..., 7+n).
    """
    tree = _tree(model, params)
    kin = forward(tree, q)
    links = _all_links(tree)
    Jv = point_jacobians(kin, links, com_positions(kin))
    Jw = angular_jacobians(kin, links)
    Iw = kin.link_R @ tree.link_inertia @ np.swapaxes(kin.link_R, -1, -2)
    Mv = np.einsum("l,...lin,...lim->...nm", tree.link_mass, Jv, Jv)
    Mw = np.einsum("...lin,...lij,...ljm->...nm", Jw, Iw, Jw)
    M = Mv + Mw
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def bias_forces(model, params: HardwareParams | None, q: np.ndarray, nu: np.ndarray, gravity=GRAVITY) -> np.ndarray:
    """Coriolis, centrifugal and gravity terms h(q, nu), shape (..., 6+n).

    ``h(q, 0)`` is the gravity term, i.e. the gradient of the potential energy.
    """
    tree = _tree(model, params)
    nu = np.asarray(nu)
    if nu.shape[-1] != tree.nv:
        raise ContractError(f"velocity has length {nu.shape[-1]}, expected {tree.nv}")
    kin = forward(tree, q)
    g = np.asarray(gravity, dtype=float)
    nl = tree.n_links
    w = [None] * nl  # angular velocity
    v = [None] * nl  # link-origin velocity
    al = [None] * nl  # bias angular acceleration
    ac = [None] * nl  # bias link-origin acceleration
    b = tree.base
    zero = np.zeros_like(nu[..., 0:3] * kin.link_p[..., b, :])
    w[b], v[b], al[b], ac[b] = nu[..., 3:6] + zero, nu[..., 0:3] + zero, zero, zero
    sd = nu[..., 6:]
    for j in tree.order:
        par, ch = tree.joint_parent[j], tree.joint_child[j]
        r = kin.joint_o[..., j, :] - kin.link_p[..., par, :]
        wp = w[par]
        vo = v[par] + cross(wp, r)
        ao = ac[par] + cross(al[par], r) + cross(wp, cross(wp, r))
        a = kin.joint_a[..., j, :]
        qd = sd[..., j, None]
        if tree.revolute[j]:
            w[ch] = wp + a * qd
            al[ch] = al[par] + cross(wp, a * qd)
            v[ch], ac[ch] = vo, ao
        else:
            d = kin.link_p[..., ch, :] - kin.joint_o[..., j, :]
            w[ch], al[ch] = wp, al[par]
            v[ch] = vo + cross(wp, d) + a * qd
            ac[ch] = ao + cross(al[par], d) + cross(wp, cross(wp, d)) + 2.0 * cross(wp, a * qd)
    W = np.stack(w, axis=-2)
    AL = np.stack(al, axis=-2)
    AC = np.stack(ac, axis=-2)
    rc = (kin.link_R @ tree.link_com[..., None])[..., 0]
    acc_c = AC + cross(AL, rc) + cross(W, cross(W, rc))
    force = tree.link_mass[:, None] * (acc_c - g)
    Iw = kin.link_R @ tree.link_inertia @ np.swapaxes(kin.link_R, -1, -2)
    Iw_w = (Iw @ W[..., None])[..., 0]
    moment = (Iw @ AL[..., None])[..., 0] + cross(W, Iw_w)
    links = _all_links(tree)
    Jv = point_jacobians(kin, links, kin.link_p + rc)
    Jw = angular_jacobians(kin, links)
    return np.einsum("...lin,...li->...n", Jv, force) + np.einsum("...lin,...li->...n", Jw, moment)


def gravity_forces(model, params: HardwareParams | None, q: np.ndarray, gravity=GRAVITY) -> np.ndarray:
    """h(q, 0): generalized gravity force."""
    tree = _tree(model, params)
    q = np.asarray(q)
    return bias_forces(tree, None, q, np.zeros(q.shape[:-1] + (tree.nv,)), gravity)


def generalized_force(kin: Kinematics, links, points, forces, moments=None) -> np.ndarray:
    """``sum_A J_A^T W_A`` for world wrenches ``(force, moment)`` applied at ``points`` on ``links``."""
    J = point_jacobians(kin, links, points)
    out = np.einsum("...pin,...pi->...n", J, forces)
    if moments is not None:
        out = out + np.einsum("...pin,...pi->...n", angular_jacobians(kin, links), moments)
    return out


def generalized_force_jacobian(kin: Kinematics, links, points, forces, moments=None, J_points=None) -> np.ndarray:
    """Derivative of :func:`generalized_force` for constant world wrenches.

    Differentiation is w.r.t. the tangent configuration ``(dp, d theta_world, ds)``.

    Args:
        kin: Kinematics at the evaluation configuration.
        links: Link index of each application point, shape (P,).
        points: World application points (..., P, 3).
        forces: World forces (..., P, 3).
        moments: World moments (..., P, 3) or None.
        J_points: Optional precomputed point Jacobians of ``points``.

    Returns:
        Array (..., 6+n, 6+n).
    """
    tree = kin.tree
    links = np.asarray(links, dtype=int)
    Jp = point_jacobians(kin, links, points) if J_points is None else J_points
    nv = tree.nv
    batch = points.shape[:-2]
    dtype = np.result_type(points.dtype, forces.dtype, kin.link_p.dtype)
    D = np.zeros(batch + (nv, nv), dtype=dtype)
    Fsum = forces.sum(axis=-2)
    D[..., 3:6, :] = -np.einsum("...pij,...pjn->...in", skew(forces), Jp)
    D[..., 3:6, 0:3] += skew(Fsum)
    if tree.n == 0:
        return D
    sub = tree.support[links]  # (P, n): joint j moves point A
    Fm = forces[..., :, None, :] * sub[..., None]  # (..., P, n, 3)
    Fsub = Fm.sum(axis=-3)  # (..., n, 3)
    a = kin.joint_a
    o = kin.joint_o
    X = np.einsum("...pj,...pc->...jc", sub.astype(float), cross(points, forces)) - cross(o, Fsub)
    if moments is not None:
        X = X + np.einsum("pj,...pc->...jc", sub.astype(float), moments)
    Jang_par = angular_jacobians(kin, tree.joint_parent)
    rev = tree.revolute
    lever = np.where(rev[:, None], cross(a, X), cross(a, Fsub))
    rows = np.einsum("...jc,...jcn->...jn", lever, Jang_par)
    Fxa = cross(Fm, a[..., None, :, :])  # (..., P, n, 3)
    Jo = point_jacobians(kin, tree.joint_parent, o)
    lin = np.einsum("...pjc,...pcn->...jn", Fxa, Jp) - np.einsum("...jc,...jcn->...jn", cross(Fsub, a), Jo)
    rows = rows + lin * rev[:, None]
    D[..., 6:, :] = rows
    return D


def motor_reflected_terms(model, params: HardwareParams | None = None):
    """Motor-side terms reflected to the joints.

    Returns:
        Tuple ``(M_add, Kv_bar, G)``, each diagonal n x n: reflected rotor inertia
        ``I_m / Gamma^2``, reflected viscous friction, and the torque map ``Gamma^{-T}``
        (entries ``inv_gear_ratio``).

    Raises:
        ModelError: If any joint has no motor.
    """
    tree = _tree(model, params)
    missing = [tree.model.joints[i].name for i, m in enumerate(tree.motors) if m is None]
    if missing:
        raise ModelError(f"joints without motor binding: {missing}")
    inv = np.array([m.inv_gear_ratio for m in tree.motors], dtype=float)
    Im = np.array([m.rotor_inertia for m in tree.motors], dtype=float)
    Kv = np.array([m.viscous_friction for m in tree.motors], dtype=float)
    return np.diag(inv * inv * Im), np.diag(inv * inv * Kv), np.diag(inv)


def actuation_matrix(model, params: HardwareParams | None = None) -> np.ndarray:
    """Map Bbar (6+n, n) from actuator torques to generalized forces.

    Motorized models (robots) use motor-side torques scaled by the inverse gear
    ratio; models without motors (humans) take joint torques directly.
    """
    tree = _tree(model, params)
    B = np.zeros((tree.nv, tree.n))
    if tree.model.agent == "robot":
        B[6:] = motor_reflected_terms(tree)[2]
    else:
        B[6:] = np.eye(tree.n)
    return B


def _augmented_terms(tree: RigidBodyTree):
    nv = tree.nv
    Madd = np.zeros((nv, nv))
    Kv = np.zeros((nv, nv))
    if tree.model.agent == "robot" and tree.n:
        Ma, Kb, _ = motor_reflected_terms(tree)
        Madd[6:, 6:] = Ma
        Kv[6:, 6:] = Kb
    return Madd, Kv


def full_dynamics_residual(
    model,
    params: HardwareParams | None,
    q,
    nu,
    nudot,
    tau,
    wrenches=None,
    frames=(),
    gravity=GRAVITY,
) -> np.ndarray:
    """Residual ``Mbar nudot + h - Bbar tau - J_c^T f + Kbar_v nu`` of a single agent.

    Args:
        model: KinematicModel or resolved tree.
        params: Design (None for nominal).
        q: Configuration (7+n,).
        nu: Velocity (6+n,).
        nudot: Acceleration (6+n,).
        tau: Motor torques for robots, joint torques otherwise (n,).
        wrenches: World wrenches (force, moment), shape (n_c, 6), at the contact frames.
        frames: Contact frame names, one per wrench.
        gravity: Gravity vector.

    Raises:
        ContractError: On dimension mismatch.
    """
    tree = _tree(model, params)
    q, nu, nudot, tau = (np.asarray(x, dtype=float) for x in (q, nu, nudot, tau))
    if q.shape != (7 + tree.n,) or nu.shape != (tree.nv,) or nudot.shape != (tree.nv,) or tau.shape != (tree.n,):
        raise ContractError("state or torque dimensions do not match the model")
    frames = list(frames)
    f = np.zeros((0, 6)) if wrenches is None else np.asarray(wrenches, dtype=float).reshape(-1, 6)
    if len(frames) != len(f):
        raise ContractError(f"{len(f)} wrenches given for {len(frames)} contact frames")
    Madd, Kv = _augmented_terms(tree)
    M = mass_matrix(tree, None, q) + Madd
    h = bias_forces(tree, None, q, nu, gravity)
    r = M @ nudot + h - actuation_matrix(tree) @ tau + Kv @ nu
    if frames:
        J = frame_jacobians(forward(tree, q), [tree.frame(name) for name in frames])
        r = r - np.einsum("cin,ci->n", J, f)
    return r
