"""Solving the static posture problem: initial guess, restarts, solution record and costs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from ..coupled import AgentRole
from ..errors import ContractError
from ..model.geometry import rotation_to_quaternion
from ..model.kinematics import forward, frame_poses
from ..model.model import RigidBodyTree
from .check import constraint_violations
from .ipm import IPMOptions, solve_nlp
from .problem import ROLES, CostWeights, StaticPostureProblem, yaw_rotation

__all__ = [
    "SolverOptions",
    "PostureSolution",
    "CostBreakdown",
    "solve",
    "evaluate_costs",
    "reach_margin",
    "initial_guess",
]

log = logging.getLogger(__name__)

SOLVED, INFEASIBLE, MAX_ITER = "solved", "infeasible", "max-iterations"


@dataclass(frozen=True)
class SolverOptions:
    """Inner solver settings.

    Attributes:
        tol: Optimality tolerance of the interior-point iterations.
        constr_viol_tol: Constraint tolerance of the interior-point iterations.
        feasibility_tol: Tolerance of the independent feasibility check.
        max_iter: Iteration cap per attempt.
        restarts: Randomized restarts after a failed attempt.
        seed: Seed of the restart perturbations.
        perturbation: Standard deviation (rad) of the restart perturbation of the reference postures.
    """

    tol: float = 1e-8
    constr_viol_tol: float = 1e-9
    feasibility_tol: float = 1e-6
    max_iter: int = 300
    restarts: int = 3
    seed: int = 0
    perturbation: float = 0.15

    def __post_init__(self):
        if not (self.tol > 0 and self.constr_viol_tol > 0 and self.feasibility_tol > 0):
            raise ContractError("solver tolerances must be positive")
        if self.max_iter < 1 or not 0 <= self.restarts <= 3:
            raise ContractError("max_iter must be positive and restarts within [0, 3]")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PostureSolution:
    """Result of one inner solve. Arrays are per height (leading axis ``n_k``).

    ``tau_robot`` holds motor-side torques. ``torque_scale`` and ``reference_postures``
    are stored so costs can be recomputed from the record alone.
    """

    status: str
    heights: tuple[float, ...]
    q_human: np.ndarray
    q_robot: np.ndarray
    q_load: np.ndarray
    tau_human: np.ndarray
    tau_robot: np.ndarray
    wrenches: np.ndarray
    objective: float
    max_violation: float
    violations: dict
    torque_scale: np.ndarray
    reference_postures: tuple[np.ndarray, np.ndarray]
    iterations: int = 0
    attempts: int = 0
    message: str = ""

    @property
    def solved(self) -> bool:
        return self.status == SOLVED

    @property
    def tau_bar(self) -> np.ndarray:
        return np.concatenate([self.tau_human, self.tau_robot], axis=1)

    @property
    def weighted_torques(self) -> np.ndarray:
        """``w1 * tau_bar`` per height."""
        return self.tau_bar * self.torque_scale

    def to_dict(self) -> dict:
        arr = lambda a: np.asarray(a).tolist()
        return {
            "status": self.status,
            "message": self.message,
            "objective": self.objective,
            "max_violation": self.max_violation,
            "violations": dict(self.violations),
            "iterations": self.iterations,
            "attempts": self.attempts,
            "torque_scale": arr(self.torque_scale),
            "reference_postures": {"human": arr(self.reference_postures[0]), "robot": arr(self.reference_postures[1])},
            "heights": [
                {
                    "height": h,
                    "q_human": arr(self.q_human[k]),
                    "q_robot": arr(self.q_robot[k]),
                    "q_load": arr(self.q_load[k]),
                    "tau_human": arr(self.tau_human[k]),
                    "tau_robot": arr(self.tau_robot[k]),
                    "wrenches": arr(self.wrenches[k]),
                }
                for k, h in enumerate(self.heights)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PostureSolution":
        hs = data["heights"]
        stack = lambda key: np.array([h[key] for h in hs], dtype=float).reshape(len(hs), -1)
        return cls(
            status=data["status"],
            heights=tuple(float(h["height"]) for h in hs),
            q_human=stack("q_human"),
            q_robot=stack("q_robot"),
            q_load=stack("q_load"),
            tau_human=stack("tau_human"),
            tau_robot=stack("tau_robot"),
            wrenches=stack("wrenches"),
            objective=float(data["objective"]),
            max_violation=float(data["max_violation"]),
            violations=dict(data.get("violations", {})),
            torque_scale=np.asarray(data["torque_scale"], dtype=float),
            reference_postures=(
                np.asarray(data["reference_postures"]["human"], dtype=float),
                np.asarray(data["reference_postures"]["robot"], dtype=float),
            ),
            iterations=int(data.get("iterations", 0)),
            attempts=int(data.get("attempts", 0)),
            message=data.get("message", ""),
        )


@dataclass(frozen=True)
class CostBreakdown:
    """Cost terms: torque and posture per height, smoothness per consecutive pair."""

    torque: np.ndarray
    posture: np.ndarray
    smoothness: np.ndarray
    objective: float


def evaluate_costs(solution: PostureSolution, weights: CostWeights | None = None) -> CostBreakdown:
    """Recompute the objective terms from a solved record.

    Raises:
        ContractError: If the solution is not solved.
    """
    if not solution.solved:
        raise ContractError(f"cannot evaluate costs of a solution with status {solution.status!r}")
    w = weights or CostWeights()
    t1 = np.sum(solution.weighted_torques**2, axis=1)
    sh, sr = solution.reference_postures
    t2 = np.sum((solution.q_human[:, 7:] - sh) ** 2, axis=1) + np.sum((solution.q_robot[:, 7:] - sr) ** 2, axis=1)
    q = np.concatenate([solution.q_human, solution.q_robot, solution.q_load], axis=1)
    t3 = np.sum(np.diff(q, axis=0) ** 2, axis=1)
    obj = w.torque * t1.sum() + w.posture * t2.sum() + w.smoothness * t3.sum()
    return CostBreakdown(t1, t2, t3, float(obj))


def _chain_length(tree: RigidBodyTree, frame: int) -> float:
    """Sum of offset lengths from the base origin to a frame (upper bound on their distance)."""
    total = float(np.linalg.norm(tree.frame_p[frame]))
    link = int(tree.frame_link[frame])
    while tree.link_joint[link] >= 0:
        j = int(tree.link_joint[link])
        total += float(np.linalg.norm(tree.joint_p[j]))
        link = int(tree.joint_parent[j])
    return total


def reach_margin(problem: StaticPostureProblem) -> float:
    """Smallest ``reach - required height`` over grasps and heights (negative: unreachable).

    Reach is bounded by the summed offsets from the lowest foot to the hand; it is
    a coarse necessary condition only.
    """
    sys_, task = problem.system, problem.task
    margin = np.inf
    trees = problem.trees
    for c in sys_.contacts:
        if c.kind != "grasp":
            continue
        a = int(c.owner) - 1
        feet = [e for e in sys_.contacts if e.kind == "environment" and e.owner == c.owner]
        base_h = max((_chain_length(trees[a], trees[a].frame(e.frame)) for e in feet), default=np.inf)
        reach = task.ground_height + base_h + _chain_length(trees[a], trees[a].frame(c.frame))
        offset = float(np.linalg.norm(trees[2].frame_p[trees[2].frame(c.load_frame)]))
        margin = min(margin, reach - (max(task.heights) - offset))
    return float(margin)


def initial_guess(problem: StaticPostureProblem, postures=None) -> np.ndarray:
    """Upright placement with hands pre-placed by an inverse-reach heuristic, refined by IK.

    Args:
        problem: The problem.
        postures: Optional joint targets per human/robot used to seed the IK.
    """
    sys_, task = problem.system, problem.task
    nk = problem.nk
    refs = postures or [task.posture(r, m) for r, m in zip(ROLES[:2], problem.models[:2])]
    lp = task.placement(AgentRole.LOAD)
    load_xy = np.array(lp.xy if lp.xy is not None else (0.0, 0.0), dtype=float)
    pins = [task.placement(r) for r in ROLES[:2] if task.placement(r).xy is not None]
    if lp.xy is None and len(pins) == 2:
        load_xy = np.mean([p.xy for p in pins], axis=0)
    elif lp.xy is None and pins:
        # assume the load is held at arm's length in front of the pinned agent
        load_xy = np.asarray(pins[0].xy) + 0.4 * np.array([np.cos(pins[0].yaw), np.sin(pins[0].yaw)])
    Rload = yaw_rotation(lp.yaw)
    h_mid = float(np.mean(task.heights))
    q = []
    for a, role in enumerate(ROLES[:2]):
        tree = problem.trees[a]
        pl = task.placement(role)
        R = yaw_rotation(pl.yaw)
        q0 = np.concatenate([np.zeros(3), rotation_to_quaternion(R), refs[a]])
        kin = forward(tree, q0)
        feet = [c for c in sys_.contacts if c.owner == role and c.kind == "environment"]
        grasps = [c for c in sys_.contacts if c.owner == role and c.kind == "grasp"]
        z = task.ground_height
        if feet:
            pf, _ = frame_poses(kin, [tree.frame(c.frame) for c in feet])
            z = task.ground_height - float(pf[:, 2].mean())
        if pl.xy is not None:
            xy = np.asarray(pl.xy, dtype=float)
            if feet:
                xy = xy - pf[:, :2].mean(axis=0)
        elif grasps:
            ph, _ = frame_poses(kin, [tree.frame(c.frame) for c in grasps])
            tl = problem.trees[2]
            targets = [np.r_[load_xy, h_mid] + Rload @ tl.frame_p[tl.frame(c.load_frame)] for c in grasps]
            xy = np.mean(targets, axis=0)[:2] - ph[:, :2].mean(axis=0)
        else:
            xy = np.zeros(2)
        q0[:3] = [xy[0], xy[1], z]
        q.append(np.tile(q0, (nk, 1)))
    ql = np.zeros((nk, 7))
    ql[:, :2] = load_xy
    ql[:, 2] = task.heights
    ql[:, 3:7] = rotation_to_quaternion(Rload)
    q.append(ql)
    x = problem.pack(q, np.zeros((nk, problem.ntau[0])), np.zeros((nk, problem.ntau[1])), np.zeros((nk, problem.nf)))
    x = _inverse_kinematics(problem, x, refs)
    return _static_forces(problem, x)


def _kinematic_rows(problem: StaticPostureProblem) -> np.ndarray:
    skip = {f"dynamics_{r.label}" for r in ROLES}
    return np.sort(np.concatenate([v for k, v in problem.families.items() if k not in skip]))


def _q_columns(problem: StaticPostureProblem) -> np.ndarray:
    return np.concatenate([problem.q_index(k, r) for k in range(problem.nk) for r in ROLES])


def _inverse_kinematics(problem: StaticPostureProblem, x0: np.ndarray, refs, reg: float = 0.05) -> np.ndarray:
    rows = _kinematic_rows(problem)
    cols = _q_columns(problem)
    sidx = [np.concatenate([problem.q_index(k, r)[7:] for k in range(problem.nk)]) for r in ROLES[:2]]
    starget = [np.tile(refs[a], problem.nk) for a in range(2)]
    pos = {int(c): i for i, c in enumerate(cols)}
    sloc = [np.array([pos[int(c)] for c in s], dtype=int) for s in sidx]
    lo = problem.x_lower[cols].copy()
    hi = problem.x_upper[cols].copy()
    span = np.where(np.isfinite(hi - lo), hi - lo, 1.0)
    lo = np.where(np.isfinite(lo), lo + 1e-3 * span, lo)
    hi = np.where(np.isfinite(hi), hi - 1e-3 * span, hi)

    def full(z):
        x = x0.copy()
        x[cols] = z
        return x

    def res(z):
        c = problem.constraints(full(z))[rows]
        return np.concatenate([c] + [reg * (z[sloc[a]] - starget[a]) for a in range(2)])

    def jac(z):
        A = problem.jacobian(full(z))[np.ix_(rows, cols)]
        extra = []
        for a in range(2):
            E = np.zeros((len(sloc[a]), len(cols)))
            E[np.arange(len(sloc[a])), sloc[a]] = reg
            extra.append(E)
        return np.vstack([A] + extra)

    z0 = np.clip(x0[cols], lo, hi)
    sol = least_squares(res, z0, jac=jac, bounds=(lo, hi), method="trf", xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=200)
    return full(sol.x)


def _static_forces(problem: StaticPostureProblem, x: np.ndarray) -> np.ndarray:
    """Minimum-norm torques and wrenches balancing the posture in ``x``."""
    dyn = np.sort(np.concatenate([problem.families[f"dynamics_{r.label}"] for r in ROLES]))
    cols = np.concatenate(
        [np.concatenate([problem.tau_index(k, r) for r in ROLES[:2]] + [problem.f_index(k)]) for k in range(problem.nk)]
    )
    x = x.copy()
    x[cols] = 0.0
    c = problem.constraints(x)[dyn]
    A = problem.jacobian(x)[np.ix_(dyn, cols)]
    # weight columns so the least-norm solution favours small objective torques
    nf = problem.nf
    col_scale = np.tile(np.concatenate([1.0 / problem.torque_scale, np.ones(nf)]), problem.nk)
    z = col_scale * np.linalg.lstsq(A * col_scale, -c, rcond=None)[0]
    x[cols] = np.clip(z, problem.x_lower[cols], problem.x_upper[cols])
    return x


def _record(problem, x, status, result, attempts, options) -> PostureSolution:
    q, th, tr, f = problem.unpack(x)
    sol = PostureSolution(
        status=status,
        heights=problem.task.heights,
        q_human=q[0],
        q_robot=q[1],
        q_load=q[2],
        tau_human=th,
        tau_robot=tr,
        wrenches=f,
        objective=problem.objective(x),
        max_violation=np.inf,
        violations={},
        torque_scale=problem.torque_scale.copy(),
        reference_postures=tuple(problem.task.posture(r, m) for r, m in zip(ROLES[:2], problem.models[:2])),
        iterations=0 if result is None else result.iterations,
        attempts=attempts,
        message="" if result is None else result.message,
    )
    v = constraint_violations(problem.system, problem.params, problem.task, sol)
    sol.violations = v
    sol.max_violation = max(v.values())
    return sol


def solve(problem: StaticPostureProblem, options: SolverOptions | None = None, x0: np.ndarray | None = None) -> PostureSolution:
    """Solve the posture problem with seeded restarts.

    Args:
        problem: Problem from :class:`StaticPostureProblem`.
        options: Solver options.
        x0: Optional initial point (quaternions are normalized).

    Returns:
        The first solved attempt, otherwise the attempt with the smallest violation.
    """
    opts = options or SolverOptions()
    rng = np.random.default_rng(opts.seed)
    ipm = IPMOptions(tol=opts.tol, constr_viol_tol=opts.constr_viol_tol, max_iter=opts.max_iter)
    margin = reach_margin(problem)
    if margin < 0:
        x = initial_guess(problem) if x0 is None else x0
        sol = _record(problem, x, INFEASIBLE, None, 0, opts)
        sol.message = f"task height exceeds the coarse reach bound by {-margin:.3f} m"
        return sol
    best = None
    refs = [problem.task.posture(r, m) for r, m in zip(ROLES[:2], problem.models[:2])]
    for attempt in range(opts.restarts + 1):
        if attempt == 0 and x0 is not None:
            start = _normalize(problem, np.asarray(x0, dtype=float))
        elif attempt == 0:
            start = initial_guess(problem)
        else:
            seeds = [
                np.clip(s + rng.normal(scale=opts.perturbation, size=s.shape), m.lower_limits, m.upper_limits)
                for s, m in zip(refs, problem.models[:2])
            ]
            start = initial_guess(problem, seeds)
        res = solve_nlp(problem, start, ipm)
        status = {"solved": SOLVED, "max_iterations": MAX_ITER}.get(res.status, INFEASIBLE)
        sol = _record(problem, res.x, status, res, attempt + 1, opts)
        if sol.status == SOLVED and sol.max_violation > opts.feasibility_tol:
            sol.status = INFEASIBLE
            sol.message = f"independent check failed: max violation {sol.max_violation:.2e}"
        log.debug("attempt %d: %s after %d iterations (violation %.2e)", attempt, sol.status, sol.iterations, sol.max_violation)
        if sol.status == SOLVED:
            return sol
        if best is None or sol.max_violation < best.max_violation:
            best = sol
    return best


def _normalize(problem: StaticPostureProblem, x: np.ndarray) -> np.ndarray:
    x = x.copy()
    for k in range(problem.nk):
        for r in ROLES:
            qi = problem.q_index(k, r)[3:7]
            x[qi] = x[qi] / np.linalg.norm(x[qi])
    return x
