"""Composite human-robot-load system: coupling matrix and stacked static residual.

Agents are always stacked in the order human, robot, load. A contact wrench is
the wrench applied *on its owner* at the owner's contact frame origin; for a
grasp the load receives the opposite wrench at its paired frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, FrameLookupError, ModelError
from .model.dynamics import GRAVITY, actuation_matrix, gravity_forces
from .model.kinematics import forward, frame_jacobians
from .model.model import HardwareParams, KinematicModel, RigidBodyTree, resolve

__all__ = ["AgentRole", "ContactSpec", "CompositeSystem", "coupling_matrix", "composite_static_residual"]


class AgentRole(enum.IntEnum):
    HUMAN = 1
    ROBOT = 2
    LOAD = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value) -> "AgentRole":
        if isinstance(value, AgentRole):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ContractError(f"unknown agent role {value!r}") from None


@dataclass(frozen=True)
class ContactSpec:
    """One contact of a human or robot.

    Attributes:
        owner: Agent that owns the contact frame (human or robot).
        frame: Contact frame name on the owner.
        kind: ``environment`` (foot on the ground) or ``grasp`` (hand on the load).
        load_frame: Paired frame on the load (grasp only).
        mu: Friction coefficient (environment contacts; None for a fixed mount).
        cop: CoP rectangle ``(x_min, x_max, y_min, y_max)`` in the contact frame, meters.
        wrench: ``6d`` for full force and moment, ``force`` for force only.
        torsion: Torsional friction coefficient in meters (None: derived from ``cop``).
    """

    owner: AgentRole
    frame: str
    kind: str = "environment"
    load_frame: str | None = None
    mu: float | None = None
    cop: tuple[float, float, float, float] | None = None
    wrench: str = "6d"
    torsion: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "owner", AgentRole.parse(self.owner))
        if self.owner == AgentRole.LOAD:
            raise ContractError("contacts are owned by the human or the robot")
        if self.kind not in ("environment", "grasp"):
            raise ContractError(f"unknown contact kind {self.kind!r}")
        if self.wrench not in ("6d", "force"):
            raise ContractError(f"unknown wrench model {self.wrench!r}")
        if self.kind == "grasp" and not self.load_frame:
            raise ContractError(f"grasp contact {self.frame} must name a load frame")
        if self.kind == "environment" and self.mu is not None and not self.mu > 0:
            raise ContractError("environment friction coefficient must be positive")
        if self.cop is not None:
            x0, x1, y0, y1 = self.cop
            if not (x0 < 0 < x1 and y0 < 0 < y1):
                raise ContractError("CoP rectangle must contain the contact frame origin")

    @property
    def dim(self) -> int:
        return 6 if self.wrench == "6d" else 3


@dataclass(frozen=True, eq=False)
class CompositeSystem:
    """Human, robot and single-body load coupled by contacts."""

    human: KinematicModel
    robot: KinematicModel
    load: KinematicModel
    contacts: tuple[ContactSpec, ...]
    gravity: tuple[float, float, float] = tuple(GRAVITY)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "contacts", tuple(self.contacts))
        if self.load.n_joints != 0:
            raise ModelError("the load must be a single rigid body")
        for c in self.contacts:
            model = self.model(c.owner)
            if c.frame not in model.frame_names:
                raise FrameLookupError(f"contact frame {c.frame!r} not in {model.name}")
            if c.kind == "grasp" and c.load_frame not in self.load.frame_names:
                raise FrameLookupError(f"grasp frame {c.load_frame!r} not in load {self.load.name}")

    def model(self, role) -> KinematicModel:
        return {AgentRole.HUMAN: self.human, AgentRole.ROBOT: self.robot, AgentRole.LOAD: self.load}[AgentRole.parse(role)]

    def trees(self, params: HardwareParams | None) -> tuple[RigidBodyTree, RigidBodyTree, RigidBodyTree]:
        """Resolved trees (human nominal, robot with ``params``, load nominal)."""
        return resolve(self.human), resolve(self.robot, params), resolve(self.load)

    @property
    def nv(self) -> tuple[int, int, int]:
        return 6 + self.human.n_joints, 6 + self.robot.n_joints, 6

    @property
    def n_torques(self) -> int:
        return self.human.n_joints + self.robot.n_joints

    @property
    def wrench_dims(self) -> list[int]:
        return [c.dim for c in self.contacts]

    @property
    def n_wrench(self) -> int:
        return sum(self.wrench_dims)

    def wrench_slices(self) -> list[slice]:
        out, k = [], 0
        for d in self.wrench_dims:
            out.append(slice(k, k + d))
            k += d
        return out

    def velocity_slices(self) -> tuple[slice, slice, slice]:
        a, b, c = self.nv
        return slice(0, a), slice(a, a + b), slice(a + b, a + b + c)


def _split_q(system: CompositeSystem, q_stack):
    if isinstance(q_stack, (tuple, list)) and len(q_stack) == 3:
        qs = [np.asarray(q, dtype=float) for q in q_stack]
    else:
        q_stack = np.asarray(q_stack, dtype=float)
        n1, n2 = system.human.n_joints, system.robot.n_joints
        sizes = [7 + n1, 7 + n2, 7]
        if q_stack.shape != (sum(sizes),):
            raise ContractError(f"stacked configuration must have length {sum(sizes)}")
        qs = np.split(q_stack, np.cumsum(sizes)[:-1])
    for q, model in zip(qs, (system.human, system.robot, system.load)):
        if q.shape != (7 + model.n_joints,):
            raise ContractError(f"configuration of {model.name} must have length {7 + model.n_joints}")
    return qs


def coupling_matrix(system: CompositeSystem, q1, q2, q3, params: HardwareParams | None = None) -> np.ndarray:
    """Stacked contact-constraint matrix Q with ``Q @ nu_stack = 0`` for all contacts.

    Rows: one block of 6 (or 3 for force-only contacts) per contact, in contact order.
    Columns: ``(nu_human, nu_robot, nu_load)``.
    """
    trees = system.trees(params)
    qs = _split_q(system, (q1, q2, q3))
    kins = [forward(t, q) for t, q in zip(trees, qs)]
    cols = system.velocity_slices()
    Q = np.zeros((system.n_wrench, sum(system.nv)))
    for c, rows in zip(system.contacts, system.wrench_slices()):
        k = int(c.owner) - 1
        J = frame_jacobians(kins[k], [trees[k].frame(c.frame)])[0]
        Q[rows, cols[k]] = J[: c.dim]
        if c.kind == "grasp":
            Jl = frame_jacobians(kins[2], [trees[2].frame(c.load_frame)])[0]
            Q[rows, cols[2]] = -Jl[: c.dim]
    return Q


def composite_static_residual(system: CompositeSystem, params: HardwareParams | None, q_stack, tau_bar, wrenches) -> np.ndarray:
    """Static residual ``h(q, 0) - Bbar tau_bar - Q^T f`` of the stacked system.

    Args:
        system: The composite system.
        params: Robot design (None for nominal).
        q_stack: ``(q_human, q_robot, q_load)`` or their concatenation.
        tau_bar: Human joint torques followed by robot motor torques.
        wrenches: Stacked contact wrenches (per contact: force then moment if 6-D).

    Returns:
        Residual of length ``6+n1 + 6+n2 + 6``.
    """
    trees = system.trees(params)
    qs = _split_q(system, q_stack)
    tau_bar = np.asarray(tau_bar, dtype=float)
    f = np.asarray(wrenches, dtype=float).ravel()
    n1 = system.human.n_joints
    if tau_bar.shape != (system.n_torques,):
        raise ContractError(f"torque vector must have length {system.n_torques}")
    if f.shape != (system.n_wrench,):
        raise ContractError(f"wrench vector must have length {system.n_wrench}")
    g = np.asarray(system.gravity, dtype=float)
    h = np.concatenate([gravity_forces(t, None, q, g) for t, q in zip(trees, qs)])
    B = np.zeros((sum(system.nv), system.n_torques))
    s = system.velocity_slices()
    B[s[0], :n1] = actuation_matrix(trees[0])
    B[s[1], n1:] = actuation_matrix(trees[1])
    Q = coupling_matrix(system, *qs, params=params)
    return h - B @ tau_bar - Q.T @ f
