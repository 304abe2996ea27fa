"""Per-agent nonlinear quantities of the static posture problem and their derivatives.

For one agent at one height the quantity vector is::

    Y = [ D (6+n) | frame positions (3 each) | frame orientation errors (3 each) | |phi|^2 ]

with ``D = h(q, 0) - sum_c sign_c J_c^T f_c`` the static dynamics residual before
actuation. All constraints of the problem are affine in ``Y``, the torques and
the wrenches. Evaluation is batched and complex-step safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model.dynamics import com_positions, generalized_force, generalized_force_jacobian
from ..model.geometry import rotation_residual, rotation_residual_jacobian
from ..model.kinematics import angular_jacobians, configuration_tangent_map, forward, frame_poses, point_jacobians
from ..model.model import RigidBodyTree

__all__ = ["AgentQuantities", "ContactTerm"]


@dataclass(frozen=True)
class ContactTerm:
    """A wrench acting on the agent: ``frame`` index into the tree, ``sign`` +1 (owner) or -1 (load)."""

    frame: int
    sign: float
    dim: int


@dataclass(frozen=True, eq=False)
class AgentQuantities:
    """Quantity map of one agent.

    Attributes:
        tree: Resolved model.
        contacts: Wrench terms in the order of the agent's wrench sub-vector.
        positions: Frame indices whose world positions are tracked.
        rotations: ``(frame index, reference rotation)`` pairs whose orientation error is tracked.
        gravity: Gravity vector.
    """

    tree: RigidBodyTree
    contacts: tuple[ContactTerm, ...]
    positions: tuple[int, ...]
    rotations: tuple[tuple[int, np.ndarray], ...]
    gravity: np.ndarray

    @property
    def nq(self) -> int:
        return 7 + self.tree.n

    @property
    def nf(self) -> int:
        return sum(c.dim for c in self.contacts)

    @property
    def size(self) -> int:
        return self.tree.nv + 3 * len(self.positions) + 3 * len(self.rotations) + 1

    # offsets inside Y
    def position_offset(self, i: int) -> int:
        return self.tree.nv + 3 * i

    def rotation_offset(self, i: int) -> int:
        return self.tree.nv + 3 * len(self.positions) + 3 * i

    @property
    def quaternion_offset(self) -> int:
        return self.size - 1

    def evaluate(self, q: np.ndarray, f: np.ndarray, derivatives: bool = True):
        """Quantities and derivatives.

        Args:
            q: Configurations (..., 7+n).
            f: Wrench sub-vectors (..., nf), world frame, force before moment.
            derivatives: Also return Jacobians.

        Returns:
            ``Y`` (..., m) and, if requested, ``dY/dq`` (..., m, 7+n) and ``dY/df`` (..., m, nf).
        """
        tree = self.tree
        kin = forward(tree, q)
        batch = np.broadcast_shapes(q.shape[:-1], f.shape[:-1])
        dtype = np.result_type(q.dtype, f.dtype, float)
        nv, L = tree.nv, tree.n_links

        cframes = np.array([c.frame for c in self.contacts], dtype=int)
        cpos, _ = frame_poses(kin, cframes) if len(cframes) else (np.zeros(q.shape[:-1] + (0, 3)), None)
        com = com_positions(kin)
        links = np.concatenate([np.arange(L), tree.frame_link[cframes]]).astype(int)
        points = np.concatenate([com, cpos], axis=-2)
        points = np.broadcast_to(points, batch + points.shape[-2:])
        wg = -tree.link_mass[:, None] * np.asarray(self.gravity)[None, :]
        F = [np.broadcast_to(wg, batch + wg.shape)]
        Mo = [np.zeros(batch + (L, 3), dtype=dtype)]
        k = 0
        for c in self.contacts:
            fc = f[..., k : k + c.dim]
            F.append(-c.sign * fc[..., None, 0:3])
            if c.dim == 6:
                Mo.append(-c.sign * fc[..., None, 3:6])
            else:
                Mo.append(np.zeros(batch + (1, 3), dtype=dtype))
            k += c.dim
        F = np.concatenate([np.broadcast_to(x, batch + x.shape[-2:]) for x in F], axis=-2)
        Mo = np.concatenate([np.broadcast_to(x, batch + x.shape[-2:]) for x in Mo], axis=-2)

        Jp = point_jacobians(kin, links, points) if derivatives else None
        D = generalized_force(kin, links, points, F, Mo)

        ppos, _ = frame_poses(kin, np.array(self.positions, dtype=int)) if self.positions else (np.zeros(batch + (0, 3)), None)
        rot_frames = np.array([r[0] for r in self.rotations], dtype=int)
        Rref = np.array([r[1] for r in self.rotations]).reshape(-1, 3, 3)
        if len(rot_frames):
            _, Rr = frame_poses(kin, rot_frames)
            rres = rotation_residual(Rr, Rref)
        else:
            rres = np.zeros(batch + (0, 3))
        phi = q[..., 3:7]
        Y = np.concatenate(
            [
                np.broadcast_to(D, batch + (nv,)),
                np.broadcast_to(ppos, batch + ppos.shape[-2:]).reshape(batch + (-1,)),
                np.broadcast_to(rres, batch + rres.shape[-2:]).reshape(batch + (-1,)),
                np.broadcast_to(np.sum(phi * phi, axis=-1)[..., None], batch + (1,)),
            ],
            axis=-1,
        )
        if not derivatives:
            return Y

        m = self.size
        dYd = np.zeros(batch + (m, nv), dtype=dtype)
        dYd[..., :nv, :] = generalized_force_jacobian(kin, links, points, F, Mo, J_points=Jp)
        if self.positions:
            pl = tree.frame_link[np.array(self.positions, dtype=int)]
            Jpos = point_jacobians(kin, pl, ppos)
            dYd[..., nv : nv + 3 * len(self.positions), :] = Jpos.reshape(batch + (-1, nv))
        if len(rot_frames):
            Jw = angular_jacobians(kin, tree.frame_link[rot_frames])
            Jr = rotation_residual_jacobian(Rr, Rref) @ Jw
            o = self.rotation_offset(0)
            dYd[..., o : o + 3 * len(rot_frames), :] = Jr.reshape(batch + (-1, nv))
        dYq = dYd @ configuration_tangent_map(q)
        dYq[..., -1, :] = 0.0
        dYq[..., -1, 3:7] = 2.0 * phi

        dYf = np.zeros(batch + (m, self.nf), dtype=dtype)
        k = 0
        for i, c in enumerate(self.contacts):
            Jc = np.concatenate([Jp[..., L + i, :, :], angular_jacobians(kin, [tree.frame_link[c.frame]])[..., 0, :, :]], axis=-2)
            dYf[..., :nv, k : k + c.dim] = -c.sign * np.swapaxes(Jc[..., : c.dim, :], -1, -2)
            k += c.dim
        return Y, dYq, dYf

    def hessian(self, q: np.ndarray, f: np.ndarray, weights: np.ndarray, step: float = 1e-30) -> np.ndarray:
        """Hessian of ``weights . Y`` w.r.t. ``(q, f)`` by complex step on the analytic Jacobian.

        Args:
            q: Configurations (B, 7+n).
            f: Wrenches (B, nf).
            weights: Multipliers on ``Y`` (B, m).

        Returns:
            Array (B, 7+n+nf, 7+n+nf).
        """
        B, nq = q.shape
        nf = self.nf
        qc = q[:, None, :] + 1j * step * np.eye(nq)[None, :, :]
        fc = np.broadcast_to(f[:, None, :], (B, nq, nf)).astype(complex)
        _, dYq, dYf = self.evaluate(qc, fc)
        gq = np.einsum("bm,bjmk->bjk", weights, dYq.imag) / step  # row j: d/dq_j of grad_q
        gf = np.einsum("bm,bjmk->bjk", weights, dYf.imag) / step
        H = np.zeros((B, nq + nf, nq + nf))
        Hqq = 0.5 * (gq + np.swapaxes(gq, -1, -2))
        H[:, :nq, :nq] = Hqq
        H[:, :nq, nq:] = gf
        H[:, nq:, :nq] = np.swapaxes(gf, -1, -2)
        return H
