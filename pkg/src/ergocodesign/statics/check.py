"""Independent feasibility check of a static posture solution.

Uses only the public model and coupled-system functions, never the NLP assembly,
so it catches transcription errors as well as solver inaccuracy.
"""

from __future__ import annotations

import numpy as np

from ..coupled import AgentRole, CompositeSystem, composite_static_residual
from ..model.kinematics import forward_kinematics
from ..model.model import HardwareParams, resolve
from .friction import FrictionModel

__all__ = ["constraint_violations"]


def constraint_violations(system: CompositeSystem, params: HardwareParams | None, task, solution) -> dict[str, float]:
    """Largest violation of every constraint family (0 when satisfied).

    Friction is measured against the untightened set ``C f <= 0`` and is
    therefore negative-margin safe: any positive value is a true violation.

    Args:
        system: Composite system.
        params: Robot design.
        task: The :class:`TaskSpec` that was solved.
        solution: A :class:`PostureSolution`.
    """
    models = (system.human, system.robot, system.load)
    trees = system.trees(params)
    qs = (solution.q_human, solution.q_robot, solution.q_load)
    nk = len(solution.heights)
    out = {k: 0.0 for k in (
        "dynamics", "grasp_position", "foot_orientation", "foot_height", "load_orientation",
        "load_height", "load_anchor", "stance_xy", "load_xy", "foot_xy", "quaternion_norm", "symmetry", "joint_limits",
        "torque_limits", "friction",
    )}

    def bump(key, value):
        out[key] = max(out[key], float(np.max(np.abs(value))) if np.size(value) else 0.0)

    def pose(a, frame, k):
        return forward_kinematics(trees[a], None, qs[a][k], frame)

    motors = resolve(system.robot, params).motors
    tmin = np.array([m.torque_min / m.inv_gear_ratio for m in motors])
    tmax = np.array([m.torque_max / m.inv_gear_ratio for m in motors])
    base = system.load.base_link
    slices = system.wrench_slices()
    for k in range(nk):
        tau_bar = np.concatenate([solution.tau_human[k], solution.tau_robot[k]])
        r = composite_static_residual(system, params, [q[k] for q in qs], tau_bar, solution.wrenches[k])
        bump("dynamics", r)
        pl, Rl = pose(2, base, k)
        bump("load_height", pl[2] - task.heights[k])
        bump("load_orientation", Rl - task.rotation(AgentRole.LOAD, base))
        for c, sl in zip(system.contacts, slices):
            a = int(c.owner) - 1
            p, R = pose(a, c.frame, k)
            if c.kind == "grasp":
                bump("grasp_position", p - pose(2, c.load_frame, k)[0])
                continue
            bump("foot_height", p[2] - task.ground_height)
            bump("foot_orientation", R - task.rotation(c.owner, c.frame))
            if c.mu is not None:
                fm = FrictionModel(c.mu, c.cop, c.torsion, margin=0.0)
                C, b = fm.world_rows(R, c.dim)
                out["friction"] = max(out["friction"], float(np.max(C @ solution.wrenches[k][sl] - b)), 0.0)
        for a in range(3):
            phi = qs[a][k, 3:7]
            bump("quaternion_norm", phi @ phi - 1.0)
        for a in range(2):
            s = qs[a][k, 7:]
            A = models[a].symmetry_matrix()
            if len(A):
                bump("symmetry", A @ s)
            lo, hi = models[a].lower_limits, models[a].upper_limits
            out["joint_limits"] = max(out["joint_limits"], float(np.max(np.maximum(lo - s, s - hi), initial=0.0)))
        t = solution.tau_robot[k]
        out["torque_limits"] = max(out["torque_limits"], float(np.max(np.maximum(tmin - t, t - tmax), initial=0.0)))
    pinned = False
    for a, role in enumerate((AgentRole.HUMAN, AgentRole.ROBOT)):
        feet = [c.frame for c in system.contacts if c.owner == role and c.kind == "environment"]
        xy = task.placement(role).xy
        if xy is not None and feet:
            centroid = np.mean([pose(a, f, 0)[0][:2] for f in feet], axis=0)
            bump("stance_xy", centroid - np.asarray(xy))
            pinned = True
    lp = task.placement(AgentRole.LOAD)
    if lp.xy is not None or not pinned:
        bump("load_anchor", pose(2, base, 0)[0][:2] - np.asarray(lp.xy if lp.xy is not None else (0.0, 0.0)))
    for k in range(nk - 1):
        bump("load_xy", pose(2, base, k)[0][:2] - pose(2, base, k + 1)[0][:2])
        for c in system.contacts:
            if c.kind == "environment":
                a = int(c.owner) - 1
                bump("foot_xy", pose(a, c.frame, k)[0][:2] - pose(a, c.frame, k + 1)[0][:2])
    return out
