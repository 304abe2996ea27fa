"""Kinematic model description and its numeric resolution for a given design."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, FrameLookupError, ModelError
from .geometry import rpy_to_rotation
from .shapes import ShapePrimitive, link_inertia, scale_along

__all__ = [
    "MotorSpec",
    "LinkSpec",
    "JointSpec",
    "FrameSpec",
    "ParameterGroup",
    "SymmetryPair",
    "KinematicModel",
    "HardwareParams",
    "RigidBodyTree",
    "resolve",
]

AGENT_KINDS = ("robot", "human", "load")
JOINT_KINDS = ("revolute", "prismatic")


@dataclass(frozen=True)
class MotorSpec:
    """Catalog motor with its gearbox.

    Torque limits are joint-side values; the motor-side limits used by the
    optimizer are obtained by dividing by ``inv_gear_ratio``.
    """

    id: str
    inv_gear_ratio: float
    rotor_inertia: float
    torque_min: float
    torque_max: float
    viscous_friction: float = 0.0

    def __post_init__(self):
        if not (self.torque_min < 0.0 < self.torque_max):
            raise ModelError(f"motor {self.id}: need torque_min < 0 < torque_max")
        if not self.rotor_inertia > 0.0:
            raise ModelError(f"motor {self.id}: rotor_inertia must be positive")
        if not self.inv_gear_ratio >= 1.0:
            raise ModelError(f"motor {self.id}: inv_gear_ratio must be >= 1")
        if not self.viscous_friction >= 0.0:
            raise ModelError(f"motor {self.id}: viscous_friction must be nonnegative")

    @property
    def reflected_inertia(self) -> float:
        return self.inv_gear_ratio**2 * self.rotor_inertia

    @property
    def motor_torque_bounds(self) -> tuple[float, float]:
        """Bounds on the motor-side torque that reproduce the joint-side limits."""
        return self.torque_min / self.inv_gear_ratio, self.torque_max / self.inv_gear_ratio


@dataclass(frozen=True)
class LinkSpec:
    name: str
    shape: ShapePrimitive
    density: float
    length_multiplier: float = 1.0

    def __post_init__(self):
        if not self.density > 0.0:
            raise ModelError(f"link {self.name}: density must be positive")
        if not self.length_multiplier > 0.0:
            raise ModelError(f"link {self.name}: length_multiplier must be positive")


@dataclass(frozen=True)
class JointSpec:
    """1-DoF joint. ``origin`` is the child frame pose in the parent link frame at s = 0."""

    name: str
    parent: str
    child: str
    kind: str = "revolute"
    origin_xyz: tuple[float, float, float] = (0.0, 0.0, 0.0)
    origin_rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    lower: float = -np.pi
    upper: float = np.pi
    motor: str | None = None

    def __post_init__(self):
        if self.kind not in JOINT_KINDS:
            raise ModelError(f"joint {self.name}: unknown kind {self.kind!r}")
        if not self.lower < self.upper:
            raise ModelError(f"joint {self.name}: lower limit must be below upper limit")
        a = np.asarray(self.axis, dtype=float)
        if a.shape != (3,) or not np.linalg.norm(a) > 0:
            raise ModelError(f"joint {self.name}: axis must be a nonzero 3-vector")
        object.__setattr__(self, "axis", tuple((a / np.linalg.norm(a)).tolist()))
        object.__setattr__(self, "origin_xyz", tuple(float(v) for v in self.origin_xyz))
        object.__setattr__(self, "origin_rpy", tuple(float(v) for v in self.origin_rpy))


@dataclass(frozen=True)
class FrameSpec:
    name: str
    link: str
    xyz: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ParameterGroup:
    """Named set of links (or joints) that share one design gene."""

    name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class SymmetryPair:
    """Constraint ``s[first] - sign * s[second] = 0``."""

    first: str
    second: str
    sign: float = 1.0


@dataclass(frozen=True, eq=False)
class KinematicModel:
    """Tree-structured multibody description with named frames and design groups."""

    name: str
    agent: str
    base_link: str
    links: tuple[LinkSpec, ...]
    joints: tuple[JointSpec, ...] = ()
    frames: tuple[FrameSpec, ...] = ()
    motors: tuple[MotorSpec, ...] = ()
    link_groups: tuple[ParameterGroup, ...] = ()
    motor_groups: tuple[ParameterGroup, ...] = ()
    symmetry: tuple[SymmetryPair, ...] = ()
    reference_posture: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.agent not in AGENT_KINDS:
            raise ModelError(f"unknown agent kind {self.agent!r}")

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    @functools.cached_property
    def link_index(self) -> dict[str, int]:
        return {l.name: i for i, l in enumerate(self.links)}

    @functools.cached_property
    def joint_index(self) -> dict[str, int]:
        return {j.name: i for i, j in enumerate(self.joints)}

    @functools.cached_property
    def motor_catalog(self) -> dict[str, MotorSpec]:
        return {m.id: m for m in self.motors}

    @property
    def joint_names(self) -> list[str]:
        return [j.name for j in self.joints]

    @property
    def frame_names(self) -> list[str]:
        return [f.name for f in self.frames] + [l.name for l in self.links]

    @property
    def lower_limits(self) -> np.ndarray:
        return np.array([j.lower for j in self.joints], dtype=float)

    @property
    def upper_limits(self) -> np.ndarray:
        return np.array([j.upper for j in self.joints], dtype=float)

    def symmetry_matrix(self) -> np.ndarray:
        """Matrix A (rows per symmetry pair) whose kernel holds symmetric joint vectors."""
        A = np.zeros((len(self.symmetry), self.n_joints))
        for r, pair in enumerate(self.symmetry):
            A[r, self.joint_index[pair.first]] += 1.0
            A[r, self.joint_index[pair.second]] -= pair.sign
        return A

    def default_posture(self) -> np.ndarray:
        if self.reference_posture is None:
            return np.clip(np.zeros(self.n_joints), self.lower_limits, self.upper_limits)
        return np.asarray(self.reference_posture, dtype=float)


@dataclass(frozen=True)
class HardwareParams:
    """Design vector: per link-group length multipliers and densities, per motor-group motor ids."""

    length_multipliers: tuple[float, ...] = ()
    densities: tuple[float, ...] = ()
    motor_ids: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "length_multipliers", tuple(float(v) for v in self.length_multipliers))
        object.__setattr__(self, "densities", tuple(float(v) for v in self.densities))
        object.__setattr__(self, "motor_ids", tuple(str(v) for v in self.motor_ids))

    @classmethod
    def nominal(cls, model: KinematicModel) -> "HardwareParams":
        """Design that reproduces the values written in the model file."""
        links = {l.name: l for l in model.links}
        joints = {j.name: j for j in model.joints}
        lm = tuple(links[g.members[0]].length_multiplier for g in model.link_groups)
        rho = tuple(links[g.members[0]].density for g in model.link_groups)
        mids = tuple(joints[g.members[0]].motor or "" for g in model.motor_groups)
        return cls(lm, rho, mids)

    def check(self, model: KinematicModel) -> None:
        """Raise ContractError if dimensions or values do not fit ``model``."""
        nl, nm = len(model.link_groups), len(model.motor_groups)
        if len(self.length_multipliers) != nl or len(self.densities) != nl:
            raise ContractError(
                f"design has {len(self.length_multipliers)}/{len(self.densities)} link genes, model expects {nl}"
            )
        if len(self.motor_ids) != nm:
            raise ContractError(f"design has {len(self.motor_ids)} motor genes, model expects {nm}")
        if any(not v > 0 for v in self.length_multipliers + self.densities):
            raise ContractError("length multipliers and densities must be positive")
        unknown = [m for m in self.motor_ids if m not in model.motor_catalog]
        if unknown:
            raise ContractError(f"unknown motor ids {unknown}")

    def to_dict(self, model: KinematicModel) -> dict:
        return {
            "links": {
                g.name: {"length_multiplier": lm, "density": rho}
                for g, lm, rho in zip(model.link_groups, self.length_multipliers, self.densities)
            },
            "motors": {g.name: mid for g, mid in zip(model.motor_groups, self.motor_ids)},
        }

    @classmethod
    def from_dict(cls, model: KinematicModel, data: dict) -> "HardwareParams":
        nominal = cls.nominal(model)
        links = data.get("links", {})
        motors = data.get("motors", {})
        unknown = (set(links) - {g.name for g in model.link_groups}) | (
            set(motors) - {g.name for g in model.motor_groups}
        )
        if unknown:
            raise ContractError(f"design names unknown parameter groups {sorted(unknown)}")
        lm, rho, mids = [], [], []
        for i, g in enumerate(model.link_groups):
            entry = links.get(g.name, {})
            lm.append(entry.get("length_multiplier", nominal.length_multipliers[i]))
            rho.append(entry.get("density", nominal.densities[i]))
        for i, g in enumerate(model.motor_groups):
            mids.append(motors.get(g.name, nominal.motor_ids[i]))
        params = cls(tuple(lm), tuple(rho), tuple(mids))
        params.check(model)
        return params


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RigidBodyTree:
    """Numeric arrays of a model resolved for one design.

    Links are indexed as in ``model.links``; joints as in ``model.joints``.
    ``order`` lists joints parents-first for recursive passes.
    """

    model: KinematicModel
    params: HardwareParams
    order: np.ndarray
    joint_parent: np.ndarray
    joint_child: np.ndarray
    revolute: np.ndarray
    joint_p: np.ndarray
    joint_R: np.ndarray
    joint_axis: np.ndarray
    link_mass: np.ndarray
    link_com: np.ndarray
    link_inertia: np.ndarray
    link_joint: np.ndarray
    support: np.ndarray
    frame_index: dict = field(repr=False)
    frame_link: np.ndarray = field(repr=False)
    frame_p: np.ndarray = field(repr=False)
    frame_R: np.ndarray = field(repr=False)
    motors: tuple = field(repr=False)
    base: int = 0

    @property
    def n(self) -> int:
        return len(self.joint_parent)

    @property
    def n_links(self) -> int:
        return len(self.link_mass)

    @property
    def nv(self) -> int:
        return 6 + self.n

    @property
    def total_mass(self) -> float:
        return float(self.link_mass.sum())

    def frame(self, name: str) -> int:
        try:
            return self.frame_index[name]
        except KeyError:
            raise FrameLookupError(f"unknown frame {name!r} in model {self.model.name!r}") from None


def _topological_joints(model: KinematicModel) -> list[int]:
    children: dict[str, list[int]] = {}
    for i, j in enumerate(model.joints):
        children.setdefault(j.parent, []).append(i)
    order, stack, seen = [], [model.base_link], {model.base_link}
    while stack:
        link = stack.pop(0)
        for ji in children.get(link, []):
            child = model.joints[ji].child
            if child in seen:
                raise ModelError(f"joint {model.joints[ji].name} closes a kinematic loop")
            seen.add(child)
            order.append(ji)
            stack.append(child)
    if len(order) != len(model.joints) or len(seen) != len(model.links):
        raise ModelError("joints do not form a single tree rooted at the base link")
    return order


@functools.lru_cache(maxsize=512)
def resolve(model: KinematicModel, params: HardwareParams | None = None) -> RigidBodyTree:
    """Resolve ``model`` for design ``params`` (nominal if None) into numeric arrays.

    Link geometry, joint offsets and frame offsets are scaled along each link's
    growth axis by the link's length multiplier.

    Raises:
        ModelError: On a broken tree, unknown links or missing motor bindings.
        ContractError: If ``params`` does not fit the model's parameter groups.
    """
    if params is None:
        params = HardwareParams.nominal(model)
    params.check(model)
    li = model.link_index
    for j in model.joints:
        if j.parent not in li or j.child not in li:
            raise ModelError(f"joint {j.name} references an unknown link")
    if model.base_link not in li:
        raise ModelError(f"unknown base link {model.base_link!r}")
    order = _topological_joints(model)

    nl, n = len(model.links), len(model.joints)
    lm = np.array([l.length_multiplier for l in model.links], dtype=float)
    rho = np.array([l.density for l in model.links], dtype=float)
    for g, m, r in zip(model.link_groups, params.length_multipliers, params.densities):
        for name in g.members:
            lm[li[name]] = m
            rho[li[name]] = r

    mass = np.zeros(nl)
    com = np.zeros((nl, 3))
    inertia = np.zeros((nl, 3, 3))
    axis_idx = np.zeros(nl, dtype=int)
    for i, link in enumerate(model.links):
        mass[i], com[i], inertia[i] = link_inertia(link.shape, rho[i], lm[i])
        axis_idx[i] = link.shape.axis_index

    jp = np.zeros(n, dtype=int)
    jc = np.zeros(n, dtype=int)
    rev = np.zeros(n, dtype=bool)
    joint_p = np.zeros((n, 3))
    joint_R = np.zeros((n, 3, 3))
    joint_axis = np.zeros((n, 3))
    link_joint = -np.ones(nl, dtype=int)
    for i, j in enumerate(model.joints):
        jp[i], jc[i] = li[j.parent], li[j.child]
        rev[i] = j.kind == "revolute"
        joint_p[i] = scale_along(j.origin_xyz, axis_idx[jp[i]], lm[jp[i]])
        joint_R[i] = rpy_to_rotation(j.origin_rpy)
        joint_axis[i] = j.axis
        link_joint[jc[i]] = i

    support = np.zeros((nl, n), dtype=bool)
    for i in order:
        support[jc[i]] = support[jp[i]]
        support[jc[i], i] = True

    catalog = model.motor_catalog
    bound = {j.name: j.motor for j in model.joints}
    for g, mid in zip(model.motor_groups, params.motor_ids):
        for name in g.members:
            bound[name] = mid
    motors = []
    for j in model.joints:
        mid = bound[j.name]
        if mid is None:
            motors.append(None)
        elif mid not in catalog:
            raise ModelError(f"joint {j.name} bound to unknown motor {mid!r}")
        else:
            motors.append(catalog[mid])

    names, flink, fp, fR = {}, [], [], []
    for f in model.frames:
        if f.link not in li:
            raise ModelError(f"frame {f.name} attached to unknown link {f.link!r}")
        k = li[f.link]
        names[f.name] = len(flink)
        flink.append(k)
        fp.append(scale_along(f.xyz, axis_idx[k], lm[k]))
        fR.append(rpy_to_rotation(f.rpy))
    for i, link in enumerate(model.links):
        if link.name not in names:
            names[link.name] = len(flink)
            flink.append(i)
            fp.append(np.zeros(3))
            fR.append(np.eye(3))

    return RigidBodyTree(
        model=model,
        params=params,
        order=_frozen(np.array(order, dtype=int)),
        joint_parent=_frozen(jp),
        joint_child=_frozen(jc),
        revolute=_frozen(rev),
        joint_p=_frozen(joint_p),
        joint_R=_frozen(joint_R),
        joint_axis=_frozen(joint_axis),
        link_mass=_frozen(mass),
        link_com=_frozen(com),
        link_inertia=_frozen(inertia),
        link_joint=_frozen(link_joint),
        support=_frozen(support),
        frame_index=names,
        frame_link=_frozen(np.array(flink, dtype=int)),
        frame_p=_frozen(np.array(fp).reshape(-1, 3)),
        frame_R=_frozen(np.array(fR).reshape(-1, 3, 3)),
        motors=tuple(motors),
        base=li[model.base_link],
    )
