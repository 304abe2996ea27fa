"""Multi-height static posture problem of the coupled human-robot-load system.

For every task height the decision block is::

    [ q_human | q_robot | q_load | tau_human | tau_robot (motor side) | f ]

Joint velocities vanish in statics and are not variables. Every equality is
affine in the per-agent quantities of :mod:`.quantities`, the torques and the
wrenches, so the constraint Jacobian is assembled from the quantity Jacobians
and the Hessian of the Lagrangian from their complex-step derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..coupled import AgentRole, CompositeSystem
from ..errors import ContractError, DegenerateInputError
from ..model.geometry import axis_angle_rotation
from ..model.model import HardwareParams, RigidBodyTree
from .friction import FrictionModel
from .quantities import AgentQuantities, ContactTerm

__all__ = ["Placement", "TaskSpec", "CostWeights", "StaticPostureProblem", "ROLES", "yaw_rotation"]

ROLES = (AgentRole.HUMAN, AgentRole.ROBOT, AgentRole.LOAD)


def yaw_rotation(yaw: float) -> np.ndarray:
    return axis_angle_rotation(np.array([0.0, 0.0, 1.0]), np.asarray(float(yaw)))


@dataclass(frozen=True)
class Placement:
    """Ground placement of an agent: heading and optional horizontal position.

    For the human and robot, ``xy`` pins the centroid of the foot contacts at the
    first height; when None the agent may stand anywhere. For the load, ``xy`` pins
    the box at the first height.
    """

    yaw: float = 0.0
    xy: tuple[float, float] | None = None


def _default_placements():
    return {"human": Placement(0.0), "robot": Placement(np.pi), "load": Placement(0.0)}


@dataclass(frozen=True)
class TaskSpec:
    """Lifting task.

    Attributes:
        heights: Load heights, one static posture per entry (meters).
        placements: Per role label (``human``, ``robot``, ``load``) placement.
        reference_postures: Per role label joint targets; defaults to each model's reference posture.
        reference_rotations: ``"role:frame"`` to 3x3 target rotation; feet default to the
            owner's yaw rotation and the load to its own yaw.
        ground_height: Height of the floor.
    """

    heights: tuple[float, ...]
    placements: dict = field(default_factory=_default_placements)
    reference_postures: dict = field(default_factory=dict)
    reference_rotations: dict = field(default_factory=dict)
    ground_height: float = 0.0

    def __post_init__(self):
        h = tuple(float(v) for v in self.heights)
        if not h:
            raise DegenerateInputError("at least one task height is required")
        if not all(np.isfinite(h)):
            raise DegenerateInputError("task heights must be finite")
        if any(b <= a for a, b in zip(h, h[1:])):
            raise DegenerateInputError("task heights must be strictly increasing")
        object.__setattr__(self, "heights", h)
        pl = _default_placements()
        for k, v in dict(self.placements).items():
            AgentRole.parse(k)
            pl[AgentRole.parse(k).label] = v if isinstance(v, Placement) else Placement(**v)
        object.__setattr__(self, "placements", pl)

    def placement(self, role: AgentRole) -> Placement:
        return self.placements[AgentRole.parse(role).label]

    def posture(self, role: AgentRole, model) -> np.ndarray:
        v = self.reference_postures.get(AgentRole.parse(role).label)
        s = model.default_posture() if v is None else np.asarray(v, dtype=float)
        if s.shape != (model.n_joints,):
            raise ContractError(f"reference posture for {model.name} must have {model.n_joints} entries")
        if np.any(s < model.lower_limits) or np.any(s > model.upper_limits):
            raise ContractError(f"reference posture for {model.name} violates joint limits")
        return s

    def rotation(self, role: AgentRole, frame: str) -> np.ndarray:
        key = f"{AgentRole.parse(role).label}:{frame}"
        if key in self.reference_rotations:
            return np.asarray(self.reference_rotations[key], dtype=float)
        return yaw_rotation(self.placement(role).yaw)


@dataclass(frozen=True)
class CostWeights:
    """Objective weights.

    Attributes:
        torque: Weight of the (scaled) squared torque term.
        posture: Weight of the squared deviation from the reference postures.
        smoothness: Weight of the squared change of configuration between consecutive heights.
        fitness_scale: Numerator of the fitness ``scale / torque cost``.
        robot_torque_scaling: ``gear`` weighs robot motor torques by the inverse gear
            ratio (joint-side torque); ``unit`` weighs them by 1.
    """

    torque: float = 1.0
    posture: float = 1e-2
    smoothness: float = 1e-2
    fitness_scale: float = 100.0
    robot_torque_scaling: str = "gear"

    def __post_init__(self):
        if min(self.torque, self.posture, self.smoothness) < 0 or not self.fitness_scale > 0:
            raise ContractError("cost weights must be nonnegative and the fitness scale positive")
        if self.robot_torque_scaling not in ("gear", "unit"):
            raise ContractError("robot_torque_scaling must be 'gear' or 'unit'")

    def torque_scaling(self, human_joints: int, robot_tree: RigidBodyTree) -> np.ndarray:
        """Per-entry multipliers applied to ``(tau_human, tau_robot_motor)`` before squaring."""
        if self.robot_torque_scaling == "gear":
            wr = np.array([m.inv_gear_ratio for m in robot_tree.motors], dtype=float)
        else:
            wr = np.ones(robot_tree.n)
        return np.concatenate([np.ones(human_joints), wr])


class _Rows:
    """Sparse builder of ``c = M_Y Y + L x - b0`` with named row families."""

    def __init__(self):
        self.m = 0
        self.my, self.lx = ([], [], []), ([], [], [])
        self.b0 = []
        self.families: dict[str, list[int]] = {}

    def new(self, family: str, count: int, rhs=0.0) -> np.ndarray:
        rows = np.arange(self.m, self.m + count)
        self.m += count
        self.families.setdefault(family, []).extend(rows.tolist())
        self.b0.extend(np.broadcast_to(np.asarray(rhs, dtype=float), (count,)).tolist())
        return rows

    @staticmethod
    def _add(store, rows, cols, vals):
        rows, cols = np.broadcast_arrays(np.asarray(rows), np.asarray(cols))
        store[0].extend(rows.ravel().tolist())
        store[1].extend(cols.ravel().tolist())
        store[2].extend(np.broadcast_to(np.asarray(vals, dtype=float), rows.shape).ravel().tolist())

    def y(self, rows, cols, vals=1.0):
        self._add(self.my, rows, cols, vals)

    def x(self, rows, cols, vals=1.0):
        self._add(self.lx, rows, cols, vals)


class StaticPostureProblem:
    """Nonlinear program of the static lifting task for one robot design.

    Attributes:
        system: The composite system.
        task: Task description.
        params: Robot design.
        weights: Objective weights.
        n, m_eq, m_ineq: Problem sizes.
        families: Equality-row indices by family name.
        ineq_families: Inequality-row indices by family name.
    """

    def __init__(self, system: CompositeSystem, task: TaskSpec, params: HardwareParams | None = None, weights: CostWeights | None = None):
        self.system = system
        self.task = task
        self.params = params
        self.weights = weights or CostWeights()
        self.trees = system.trees(params)
        self.models = (system.human, system.robot, system.load)
        self.nk = len(task.heights)
        self._layout()
        self._agents()
        self._constraints()
        self._inequalities()
        self._bounds()
        self._objective()

    # layout -----------------------------------------------------------------
    def _layout(self):
        th, tr, tl = self.trees
        self.nq = (7 + th.n, 7 + tr.n, 7)
        self.ntau = (th.n, tr.n)
        self.nf = self.system.n_wrench
        o = np.cumsum((0,) + self.nq + self.ntau + (self.nf,))
        self.q_off = tuple(int(v) for v in o[:3])
        self.tau_off = (int(o[3]), int(o[4]))
        self.f_off = int(o[5])
        self.block = int(o[6])
        self.n = self.block * self.nk

    def q_index(self, k: int, role: int) -> np.ndarray:
        a = int(role) - 1
        s = k * self.block + self.q_off[a]
        return np.arange(s, s + self.nq[a])

    def tau_index(self, k: int, role: int) -> np.ndarray:
        a = int(role) - 1
        s = k * self.block + self.tau_off[a]
        return np.arange(s, s + self.ntau[a])

    def f_index(self, k: int) -> np.ndarray:
        s = k * self.block + self.f_off
        return np.arange(s, s + self.nf)

    def _agents(self):
        sys_, task = self.system, self.task
        self.quant: list[AgentQuantities] = []
        self.agent_f: list[np.ndarray] = []  # local f indices per agent
        self.pos_slot: list[dict] = []  # frame name -> slot in positions
        self.rot_slot: list[dict] = []
        slices = sys_.wrench_slices()
        for a, role in enumerate(ROLES):
            tree = self.trees[a]
            terms, fidx, pos, rots = [], [], [], []
            for c, sl in zip(sys_.contacts, slices):
                if role != AgentRole.LOAD and c.owner == role:
                    fr = tree.frame(c.frame)
                    terms.append(ContactTerm(fr, 1.0, c.dim))
                    if c.frame not in pos:
                        pos.append(c.frame)
                    if c.kind == "environment" and c.frame not in [r for r, _ in rots]:
                        rots.append((c.frame, task.rotation(role, c.frame)))
                elif role == AgentRole.LOAD and c.kind == "grasp":
                    fr = tree.frame(c.load_frame)
                    terms.append(ContactTerm(fr, -1.0, c.dim))
                    if c.load_frame not in pos:
                        pos.append(c.load_frame)
                else:
                    continue
                fidx.extend(range(sl.start, sl.stop))
            if role == AgentRole.LOAD:
                base = sys_.load.base_link
                pos.insert(0, base)
                rots.append((base, task.rotation(role, base)))
            self.quant.append(
                AgentQuantities(
                    tree,
                    tuple(terms),
                    tuple(tree.frame(p) for p in pos),
                    tuple((tree.frame(r), R) for r, R in rots),
                    np.asarray(sys_.gravity, dtype=float),
                )
            )
            self.agent_f.append(np.array(fidx, dtype=int))
            self.pos_slot.append({p: i for i, p in enumerate(pos)})
            self.rot_slot.append({r: i for i, (r, _) in enumerate(rots)})
        sizes = [qa.size for qa in self.quant]
        self.y_agent = int(sum(sizes))
        self.y_off = np.cumsum([0] + sizes)[:3]
        self.mY = self.y_agent * self.nk

    def y_index(self, k: int, a: int, local) -> np.ndarray:
        return k * self.y_agent + self.y_off[a] + np.asarray(local)

    def _pos_y(self, k, a, frame):
        return self.y_index(k, a, self.quant[a].position_offset(self.pos_slot[a][frame]) + np.arange(3))

    def _rot_y(self, k, a, frame):
        return self.y_index(k, a, self.quant[a].rotation_offset(self.rot_slot[a][frame]) + np.arange(3))

    # equalities ---------------------------------------------------------------
    def _constraints(self):
        sys_, task = self.system, self.task
        R = _Rows()
        th, tr, tl = self.trees
        inv_gear = np.array([m.inv_gear_ratio for m in tr.motors], dtype=float)
        load_base = sys_.load.base_link
        env = [c for c in sys_.contacts if c.kind == "environment"]
        grasps = [c for c in sys_.contacts if c.kind == "grasp"]
        for k in range(self.nk):
            for a, role in enumerate(ROLES):
                nv = self.trees[a].nv
                rows = R.new(f"dynamics_{role.label}", nv)
                R.y(rows, self.y_index(k, a, np.arange(nv)))
                if role != AgentRole.LOAD:
                    B = inv_gear if role == AgentRole.ROBOT else np.ones(self.ntau[a])
                    R.x(rows[6:], self.tau_index(k, role), -B)
            for c in grasps:
                rows = R.new("grasp_position", 3)
                a = int(c.owner) - 1
                R.y(rows, self._pos_y(k, a, c.frame))
                R.y(rows, self._pos_y(k, 2, c.load_frame), -1.0)
            for c in env:
                a = int(c.owner) - 1
                rows = R.new("foot_orientation", 3)
                R.y(rows, self._rot_y(k, a, c.frame))
                rows = R.new("foot_height", 1, task.ground_height)
                R.y(rows, self._pos_y(k, a, c.frame)[2:])
            rows = R.new("load_orientation", 3)
            R.y(rows, self._rot_y(k, 2, load_base))
            rows = R.new("load_height", 1, task.heights[k])
            R.y(rows, self._pos_y(k, 2, load_base)[2:])
            for a in range(3):
                rows = R.new("quaternion_norm", 1, 1.0)
                R.y(rows, self.y_index(k, a, self.quant[a].quaternion_offset))
            for a, role in enumerate(ROLES[:2]):
                A = self.models[a].symmetry_matrix()
                if len(A):
                    rows = R.new("symmetry", len(A))
                    qi = self.q_index(k, role)[7:]
                    nz = np.nonzero(A)
                    R.x(rows[nz[0]], qi[nz[1]], A[nz])
        pinned = False
        for a, role in enumerate(ROLES[:2]):
            feet = [c for c in env if c.owner == role]
            xy = task.placement(role).xy
            if xy is not None and feet:
                rows = R.new("stance_xy", 2, xy)
                for c in feet:
                    R.y(rows, self._pos_y(0, a, c.frame)[:2], 1.0 / len(feet))
                pinned = True
        # without a pinned agent the scene is invariant to horizontal translation
        lp = task.placement(AgentRole.LOAD)
        if lp.xy is not None or not pinned:
            rows = R.new("load_anchor", 2, lp.xy if lp.xy is not None else (0.0, 0.0))
            R.y(rows, self._pos_y(0, 2, load_base)[:2])
        for k in range(self.nk - 1):
            rows = R.new("load_xy", 2)
            R.y(rows, self._pos_y(k, 2, load_base)[:2])
            R.y(rows, self._pos_y(k + 1, 2, load_base)[:2], -1.0)
            for c in env:
                a = int(c.owner) - 1
                rows = R.new("foot_xy", 2)
                R.y(rows, self._pos_y(k, a, c.frame)[:2])
                R.y(rows, self._pos_y(k + 1, a, c.frame)[:2], -1.0)
        self.m_eq = R.m
        self.M_Y = sp.csr_matrix((R.my[2], (R.my[0], R.my[1])), shape=(R.m, self.mY))
        self.L = sp.csr_matrix((R.lx[2], (R.lx[0], R.lx[1])), shape=(R.m, self.n))
        self.b0 = np.array(R.b0)
        self.families = {k: np.array(v, dtype=int) for k, v in R.families.items()}

    # inequalities -----------------------------------------------------------
    def _inequalities(self):
        rows_C, rows_b, fam = [], [], {}
        slices = self.system.wrench_slices()
        m = 0
        for k in range(self.nk):
            fi = self.f_index(k)
            for c, sl in zip(self.system.contacts, slices):
                if c.kind != "environment" or c.mu is None:
                    continue
                fm = FrictionModel(c.mu, c.cop, c.torsion)
                Cw, b = fm.world_rows(self.task.rotation(c.owner, c.frame), c.dim)
                C = np.zeros((len(b), self.n))
                C[:, fi[sl]] = Cw
                rows_C.append(C)
                rows_b.append(b)
                fam.setdefault("friction", []).extend(range(m, m + len(b)))
                m += len(b)
        self.m_ineq = m
        self.C = np.vstack(rows_C) if rows_C else np.zeros((0, self.n))
        self.d_upper = np.concatenate(rows_b) if rows_b else np.zeros(0)
        self.d_lower = np.full(m, -np.inf)
        self.ineq_families = {k: np.array(v, dtype=int) for k, v in fam.items()}

    def _bounds(self):
        lo = np.full(self.n, -np.inf)
        hi = np.full(self.n, np.inf)
        tr = self.trees[1]
        tmin = np.array([m.torque_min / m.inv_gear_ratio for m in tr.motors])
        tmax = np.array([m.torque_max / m.inv_gear_ratio for m in tr.motors])
        for k in range(self.nk):
            for a, role in enumerate(ROLES[:2]):
                qi = self.q_index(k, role)[7:]
                lo[qi] = self.models[a].lower_limits
                hi[qi] = self.models[a].upper_limits
            ti = self.tau_index(k, AgentRole.ROBOT)
            lo[ti], hi[ti] = tmin, tmax
        self.x_lower, self.x_upper = lo, hi
        self.motor_bounds = (tmin, tmax)

    # objective ----------------------------------------------------------------
    def _objective(self):
        w = self.weights
        n = self.n
        H = np.zeros((n, n))
        g = np.zeros(n)
        const = 0.0
        self.torque_scale = w.torque_scaling(self.ntau[0], self.trees[1])
        refs = [self.task.posture(r, m) for r, m in zip(ROLES[:2], self.models[:2])]
        for k in range(self.nk):
            ti = np.concatenate([self.tau_index(k, AgentRole.HUMAN), self.tau_index(k, AgentRole.ROBOT)])
            H[ti, ti] += 2.0 * w.torque * self.torque_scale**2
            for a, role in enumerate(ROLES[:2]):
                si = self.q_index(k, role)[7:]
                H[si, si] += 2.0 * w.posture
                g[si] += -2.0 * w.posture * refs[a]
                const += w.posture * float(refs[a] @ refs[a])
        for k in range(self.nk - 1):
            for role in ROLES:
                i, j = self.q_index(k, role), self.q_index(k + 1, role)
                H[i, i] += 2.0 * w.smoothness
                H[j, j] += 2.0 * w.smoothness
                H[i, j] -= 2.0 * w.smoothness
                H[j, i] -= 2.0 * w.smoothness
        self.H0, self.g0, self.c0 = H, g, const

    # NLP interface -----------------------------------------------------------
    def objective(self, x):
        return float(0.5 * x @ self.H0 @ x + self.g0 @ x + self.c0)

    def gradient(self, x):
        return self.H0 @ x + self.g0

    def _split(self, x):
        X = x.reshape(self.nk, self.block)
        qs = [X[:, self.q_off[a] : self.q_off[a] + self.nq[a]] for a in range(3)]
        fs = [X[:, self.f_off + self.agent_f[a]] for a in range(3)]
        return qs, fs

    def quantities(self, x, derivatives=False):
        qs, fs = self._split(np.asarray(x, dtype=float))
        out = [qa.evaluate(q, f, derivatives) for qa, q, f in zip(self.quant, qs, fs)]
        return out

    def constraints(self, x):
        Y = np.concatenate([o for o in self.quantities(x)], axis=-1).ravel()
        return self.M_Y @ Y + self.L @ x - self.b0

    def jacobian(self, x):
        out = self.quantities(x, derivatives=True)
        JY = np.zeros((self.mY, self.n))
        for a, (Y, dq, df) in enumerate(out):
            for k in range(self.nk):
                r = self.y_index(k, a, np.arange(self.quant[a].size))
                JY[np.ix_(r, self.q_index(k, ROLES[a]))] = dq[k]
                if len(self.agent_f[a]):
                    JY[np.ix_(r, self.f_index(k)[self.agent_f[a]])] = df[k]
        return np.asarray(self.M_Y @ JY) + self.L.toarray()

    def inequalities(self, x):
        return self.C @ x

    def inequality_jacobian(self, x):
        return self.C

    def hessian(self, x, obj_factor, lam_eq, lam_ineq):
        H = obj_factor * self.H0
        muY = (self.M_Y.T @ lam_eq).reshape(self.nk, self.y_agent)
        qs, fs = self._split(np.asarray(x, dtype=float))
        for a, qa in enumerate(self.quant):
            w = muY[:, self.y_off[a] : self.y_off[a] + qa.size]
            if not np.any(w):
                continue
            Ha = qa.hessian(qs[a], fs[a], w)
            for k in range(self.nk):
                idx = np.concatenate([self.q_index(k, ROLES[a]), self.f_index(k)[self.agent_f[a]]])
                H[np.ix_(idx, idx)] += Ha[k]
        return H

    # helpers -----------------------------------------------------------------
    def pack(self, q, tau_human, tau_robot, wrenches) -> np.ndarray:
        """Assemble ``x`` from per-height arrays (``q`` a triple of (nk, nq) arrays)."""
        X = np.zeros((self.nk, self.block))
        for a in range(3):
            X[:, self.q_off[a] : self.q_off[a] + self.nq[a]] = q[a]
        X[:, self.tau_off[0] : self.tau_off[0] + self.ntau[0]] = tau_human
        X[:, self.tau_off[1] : self.tau_off[1] + self.ntau[1]] = tau_robot
        X[:, self.f_off :] = wrenches
        return X.ravel()

    def unpack(self, x):
        X = np.asarray(x, dtype=float).reshape(self.nk, self.block)
        q = tuple(X[:, self.q_off[a] : self.q_off[a] + self.nq[a]].copy() for a in range(3))
        th = X[:, self.tau_off[0] : self.tau_off[0] + self.ntau[0]].copy()
        tr = X[:, self.tau_off[1] : self.tau_off[1] + self.ntau[1]].copy()
        return q, th, tr, X[:, self.f_off :].copy()
