"""Generators for the shipped model files: toy robot, parametric humans, 1-DoF arms, box loads
and a reference-scale humanoid with 8 link groups and 13 motor groups."""

from __future__ import annotations

import numpy as np

__all__ = [
    "MOTOR_CATALOG",
    "TOY_MATERIALS",
    "REFERENCE_MATERIALS",
    "toy_robot",
    "human",
    "arm_agent",
    "box_load",
    "reference_robot",
]

# joint-side torque limits; inverse gear ratio; rotor inertia
MOTOR_CATALOG = [
    {"id": "S", "inv_gear_ratio": 100.0, "rotor_inertia": 1e-4, "torque_min": -37.0, "torque_max": 37.0, "viscous_friction": 0.0},
    {"id": "M", "inv_gear_ratio": 160.0, "rotor_inertia": 1e-3, "torque_min": -92.0, "torque_max": 92.0, "viscous_friction": 0.0},
    {"id": "L", "inv_gear_ratio": 160.0, "rotor_inertia": 1e-3, "torque_min": -123.0, "torque_max": 123.0, "viscous_friction": 0.0},
]

# effective densities of hollow shells for the toy robot (kg/m^3)
TOY_MATERIALS = [200.0, 400.0, 600.0, 800.0, 1200.0]
# bulk materials: polymer, CFRP, aluminium, titanium, steel
REFERENCE_MATERIALS = [1250.0, 1600.0, 2700.0, 4430.0, 7850.0]

Z = [0.0, 0.0, 1.0]
Y = [0.0, 1.0, 0.0]
X = [1.0, 0.0, 0.0]


def _link(name, kind, dims, center, density, axis=Z):
    return {
        "name": name,
        "shape": {"kind": kind, "dimensions": list(dims), "growth_axis": list(axis), "center": list(center)},
        "density": density,
    }


def _joint(name, parent, child, xyz, axis, lower, upper, motor=None, rpy=(0.0, 0.0, 0.0)):
    out = {
        "name": name,
        "type": "revolute",
        "parent": parent,
        "child": child,
        "origin": {"xyz": list(xyz), "rpy": list(rpy)},
        "axis": list(axis),
        "limits": {"lower": lower, "upper": upper},
    }
    if motor is not None:
        out["motor"] = motor
    return out


def _frame(name, link, xyz=(0.0, 0.0, 0.0), rpy=(0.0, 0.0, 0.0)):
    return {"name": name, "link": link, "xyz": list(xyz), "rpy": list(rpy)}


def toy_robot() -> dict:
    """Six-joint planar-limbed humanoid: hip, shoulder and elbow pitch on both sides."""
    links = [
        _link("pelvis", "box", (0.2, 0.3, 0.5), (0.0, 0.0, 0.2), 600.0),
        _link("l_leg", "box", (0.1, 0.1, 0.8), (0.0, 0.0, -0.4), 400.0),
        _link("r_leg", "box", (0.1, 0.1, 0.8), (0.0, 0.0, -0.4), 400.0),
        _link("l_upper_arm", "cylinder", (0.04, 0.28), (0.0, 0.0, -0.14), 800.0),
        _link("r_upper_arm", "cylinder", (0.04, 0.28), (0.0, 0.0, -0.14), 800.0),
        _link("l_forearm", "cylinder", (0.035, 0.28), (0.0, 0.0, -0.14), 800.0),
        _link("r_forearm", "cylinder", (0.035, 0.28), (0.0, 0.0, -0.14), 800.0),
    ]
    joints = [
        _joint("l_hip_pitch", "pelvis", "l_leg", (0.0, 0.1, 0.0), Y, -1.6, 1.6, "M"),
        _joint("r_hip_pitch", "pelvis", "r_leg", (0.0, -0.1, 0.0), Y, -1.6, 1.6, "M"),
        _joint("l_shoulder_pitch", "pelvis", "l_upper_arm", (0.0, 0.2, 0.45), Y, -3.0, 1.0, "S"),
        _joint("r_shoulder_pitch", "pelvis", "r_upper_arm", (0.0, -0.2, 0.45), Y, -3.0, 1.0, "S"),
        _joint("l_elbow", "l_upper_arm", "l_forearm", (0.0, 0.0, -0.28), Y, -2.4, 0.05, "S"),
        _joint("r_elbow", "r_upper_arm", "r_forearm", (0.0, 0.0, -0.28), Y, -2.4, 0.05, "S"),
    ]
    frames = [
        _frame("l_sole", "l_leg", (0.0, 0.0, -0.8)),
        _frame("r_sole", "r_leg", (0.0, 0.0, -0.8)),
        _frame("l_hand", "l_forearm", (0.0, 0.0, -0.28)),
        _frame("r_hand", "r_forearm", (0.0, 0.0, -0.28)),
        _frame("root", "pelvis", (0.0, 0.0, 0.0)),
    ]
    return {
        "schema_version": 1,
        "name": "toy_robot",
        "agent": "robot",
        "base_link": "pelvis",
        "links": links,
        "joints": joints,
        "frames": frames,
        "motors": MOTOR_CATALOG,
        "parameter_groups": {
            "links": [
                {"name": "torso", "links": ["pelvis"]},
                {"name": "leg", "links": ["l_leg", "r_leg"]},
                {"name": "upper_arm", "links": ["l_upper_arm", "r_upper_arm"]},
                {"name": "forearm", "links": ["l_forearm", "r_forearm"]},
            ],
            "motors": [
                {"name": "hip", "joints": ["l_hip_pitch", "r_hip_pitch"]},
                {"name": "shoulder", "joints": ["l_shoulder_pitch", "r_shoulder_pitch"]},
                {"name": "elbow", "joints": ["l_elbow", "r_elbow"]},
            ],
        },
        "symmetry": [
            {"first": "l_hip_pitch", "second": "r_hip_pitch", "sign": 1},
            {"first": "l_shoulder_pitch", "second": "r_shoulder_pitch", "sign": 1},
            {"first": "l_elbow", "second": "r_elbow", "sign": 1},
        ],
        "reference_posture": {"l_shoulder_pitch": -0.6, "r_shoulder_pitch": -0.6, "l_elbow": -0.6, "r_elbow": -0.6},
    }


# segment mass fractions of total body mass
_HUMAN_MASS = {"legs": 0.46, "lower_torso": 0.14, "upper_torso": 0.28, "upper_arm": 0.028, "forearm": 0.022}


def human(height: float, name: str | None = None, full_spine: bool = False, shoulder_roll: bool = True) -> dict:
    """Reduced human chain scaled from stature.

    Legs and pelvis form one rigid base link; the back bends at L5S1 and T9T8
    (plus L4L3 and L1T12 with ``full_spine``) and each arm has shoulder and
    elbow flexion, optionally with shoulder abduction so the hands can change their
    lateral spacing. Body mass follows a body-mass index of 22.5.

    Args:
        height: Stature in meters.
        name: Model name (defaults to ``human_<cm>``).
        full_spine: Add the two intermediate lumbar joints.
        shoulder_roll: Add a shoulder abduction joint per arm.
    """
    k = height / 1.78
    mass = 22.5 * height**2
    total = sum(_HUMAN_MASS.values()) + _HUMAN_MASS["upper_arm"] + _HUMAN_MASS["forearm"]

    def dens(frac, vol):
        return round(mass * frac / total / vol, 6)

    def box(name, dims, center, frac):
        d = [v * k for v in dims]
        return _link(name, "box", d, [v * k for v in center], dens(frac, float(np.prod(d))))

    def cyl(name, r, length, frac):
        r, length = r * k, length * k
        return _link(name, "cylinder", (r, length), (0.0, 0.0, -length / 2), dens(frac, np.pi * r * r * length))

    links = [box("pelvis", (0.2, 0.35, 1.0), (0.0, 0.0, -0.4), _HUMAN_MASS["legs"])]
    joints = []
    if full_spine:
        seg = [("L5S1", "lumbar_low", 0.12), ("L4L3", "lumbar_high", 0.13), ("L1T12", "thorax_low", 0.1), ("T9T8", "chest", 0.25)]
        fracs = [0.07, 0.07, 0.06, 0.22]
    else:
        seg = [("L5S1", "lower_torso", 0.25), ("T9T8", "chest", 0.25)]
        fracs = [0.14, 0.28]
    limits = {"L5S1": (-0.5, 1.2), "L4L3": (-0.4, 0.6), "L1T12": (-0.4, 0.6), "T9T8": (-0.4, 0.6)}
    parent, offset = "pelvis", 0.1
    for (jn, ln, length), frac in zip(seg, fracs):
        width = 0.36 if ln == "chest" else 0.3
        links.append(box(ln, (0.2, width, length), (0.0, 0.0, length / 2), frac))
        joints.append(_joint(jn, parent, ln, (0.0, 0.0, offset * k), Y, *limits[jn]))
        parent, offset = ln, length
    for side, sy in (("l", 1.0), ("r", -1.0)):
        links.append(cyl(f"{side}_upper_arm", 0.045, 0.3, _HUMAN_MASS["upper_arm"]))
        links.append(cyl(f"{side}_forearm", 0.04, 0.3, _HUMAN_MASS["forearm"]))
        if shoulder_roll:
            links.append(_link(f"{side}_shoulder", "sphere", (0.03 * k,), (0.0, 0.0, 0.0), 1000.0))
            lo, hi = (-0.5, 1.5) if sy > 0 else (-1.5, 0.5)
            joints.append(_joint(f"{side}_shoulder", "chest", f"{side}_shoulder", (0.0, sy * 0.2 * k, 0.22 * k), Y, -3.0, 0.8))
            joints.append(_joint(f"{side}_shoulder_roll", f"{side}_shoulder", f"{side}_upper_arm", (0.0, 0.0, 0.0), X, lo, hi))
        else:
            joints.append(_joint(f"{side}_shoulder", "chest", f"{side}_upper_arm", (0.0, sy * 0.2 * k, 0.22 * k), Y, -3.0, 0.8))
        joints.append(_joint(f"{side}_elbow", f"{side}_upper_arm", f"{side}_forearm", (0.0, 0.0, -0.3 * k), Y, -2.5, 0.05))
    frames = [
        _frame("l_sole", "pelvis", (0.0, 0.1 * k, -0.9 * k)),
        _frame("r_sole", "pelvis", (0.0, -0.1 * k, -0.9 * k)),
        _frame("l_hand", "l_forearm", (0.0, 0.0, -0.3 * k)),
        _frame("r_hand", "r_forearm", (0.0, 0.0, -0.3 * k)),
    ]
    posture = {"l_shoulder": -0.5, "r_shoulder": -0.5, "l_elbow": -0.5, "r_elbow": -0.5}
    symmetry = [
        {"first": "l_shoulder", "second": "r_shoulder", "sign": 1},
        {"first": "l_elbow", "second": "r_elbow", "sign": 1},
    ]
    if shoulder_roll:
        symmetry.append({"first": "l_shoulder_roll", "second": "r_shoulder_roll", "sign": -1})
    return {
        "schema_version": 1,
        "name": name or f"human_{round(height * 100)}",
        "agent": "human",
        "base_link": "pelvis",
        "links": links,
        "joints": joints,
        "frames": frames,
        "symmetry": symmetry,
        "reference_posture": posture,
    }


def arm_agent(agent: str, name: str, length: float = 0.5, mount_height: float = 1.0, arm_density: float = 100.0, motor: dict | None = None) -> dict:
    """Pedestal with one horizontal-capable arm (1 revolute joint about y).

    The pedestal foot frame sits at the ground; the shoulder is ``mount_height`` above it.
    At s = 0 the arm points along +x.
    """
    links = [
        _link("pedestal", "box", (0.2, 0.2, mount_height), (0.0, 0.0, mount_height / 2), 500.0),
        _link("arm", "cylinder", (0.02, length), (length / 2, 0.0, 0.0), arm_density, axis=X),
    ]
    data = {
        "schema_version": 1,
        "name": name,
        "agent": agent,
        "base_link": "pedestal",
        "links": links,
        "joints": [_joint("shoulder", "pedestal", "arm", (0.0, 0.0, mount_height), Y, -2.5, 2.5, "unit" if agent == "robot" else None)],
        "frames": [_frame("foot", "pedestal"), _frame("hand", "arm", (length, 0.0, 0.0))],
    }
    if agent == "robot":
        data["motors"] = [motor or {"id": "unit", "inv_gear_ratio": 1.0, "rotor_inertia": 1e-4, "torque_min": -500.0, "torque_max": 500.0}]
        data["parameter_groups"] = {
            "links": [{"name": "arm", "links": ["arm"]}],
            "motors": [{"name": "shoulder", "joints": ["shoulder"]}],
        }
    return data


def box_load(name: str, mass: float, dims=(0.5, 0.5, 0.025), grasp_frames: dict | None = None) -> dict:
    """Single-body box load with named grasp frames (positions in the box frame)."""
    vol = float(np.prod(dims))
    frames = [_frame(n, "box", xyz) for n, xyz in (grasp_frames or {}).items()]
    return {
        "schema_version": 1,
        "name": name,
        "agent": "load",
        "base_link": "box",
        "links": [_link("box", "box", dims, (0.0, 0.0, 0.0), mass / vol)],
        "joints": [],
        "frames": frames,
    }


def reference_robot() -> dict:
    """Humanoid with the reference design layout: 8 link groups (4 torso, 2 arm, 2 leg)
    and 13 motor groups (3 torso, 6 leg, 4 arm), 23 joints in total."""
    links = [
        _link("root_link", "box", (0.12, 0.2, 0.1), (0.0, 0.0, 0.0), 1600.0),
        _link("torso_1", "sphere", (0.04,), (0.0, 0.0, 0.0), 1600.0),
        _link("torso_2", "cylinder", (0.05, 0.1), (0.0, 0.0, 0.05), 1600.0),
        _link("chest", "box", (0.15, 0.25, 0.3), (0.0, 0.0, 0.15), 1600.0),
    ]
    joints = [
        _joint("torso_pitch", "root_link", "torso_1", (0.0, 0.0, 0.05), Y, -0.4, 1.2, "L"),
        _joint("torso_roll", "torso_1", "torso_2", (0.0, 0.0, 0.0), X, -0.4, 0.4, "M"),
        _joint("torso_yaw", "torso_2", "chest", (0.0, 0.0, 0.1), Z, -0.8, 0.8, "M"),
    ]
    frames = []
    for side, sy in (("l", 1.0), ("r", -1.0)):
        p = side + "_"
        links += [
            _link(p + "shoulder_1", "sphere", (0.03,), (0.0, 0.0, 0.0), 1600.0),
            _link(p + "shoulder_2", "sphere", (0.03,), (0.0, 0.0, 0.0), 1600.0),
            _link(p + "upper_arm", "cylinder", (0.035, 0.25), (0.0, 0.0, -0.125), 1600.0),
            _link(p + "forearm", "cylinder", (0.03, 0.25), (0.0, 0.0, -0.125), 1600.0),
            _link(p + "hip_1", "sphere", (0.04,), (0.0, 0.0, 0.0), 1600.0),
            _link(p + "hip_2", "sphere", (0.04,), (0.0, 0.0, 0.0), 1600.0),
            _link(p + "thigh", "cylinder", (0.05, 0.35), (0.0, 0.0, -0.175), 1600.0),
            _link(p + "shank", "cylinder", (0.045, 0.35), (0.0, 0.0, -0.175), 1600.0),
            _link(p + "ankle_1", "sphere", (0.03,), (0.0, 0.0, 0.0), 1600.0),
            _link(p + "foot", "box", (0.2, 0.08, 0.03), (0.03, 0.0, -0.03), 1600.0),
        ]
        joints += [
            _joint(p + "shoulder_pitch", "chest", p + "shoulder_1", (0.0, sy * 0.16, 0.27), Y, -3.0, 1.0, "M"),
            _joint(p + "shoulder_roll", p + "shoulder_1", p + "shoulder_2", (0.0, 0.0, 0.0), X, -0.3 if sy > 0 else -1.6, 1.6 if sy > 0 else 0.3, "M"),
            _joint(p + "shoulder_yaw", p + "shoulder_2", p + "upper_arm", (0.0, 0.0, 0.0), Z, -1.0, 1.0, "S"),
            _joint(p + "elbow", p + "upper_arm", p + "forearm", (0.0, 0.0, -0.25), Y, -2.4, 0.05, "S"),
            _joint(p + "hip_pitch", "root_link", p + "hip_1", (0.0, sy * 0.07, -0.05), Y, -1.6, 1.6, "L"),
            _joint(p + "hip_roll", p + "hip_1", p + "hip_2", (0.0, 0.0, 0.0), X, -0.5, 0.5, "M"),
            _joint(p + "hip_yaw", p + "hip_2", p + "thigh", (0.0, 0.0, 0.0), Z, -0.8, 0.8, "M"),
            _joint(p + "knee", p + "thigh", p + "shank", (0.0, 0.0, -0.35), Y, -0.05, 2.2, "L"),
            _joint(p + "ankle_pitch", p + "shank", p + "ankle_1", (0.0, 0.0, -0.35), Y, -0.8, 0.8, "M"),
            _joint(p + "ankle_roll", p + "ankle_1", p + "foot", (0.0, 0.0, 0.0), X, -0.4, 0.4, "S"),
        ]
        frames += [_frame(p + "sole", p + "foot", (0.0, 0.0, -0.045)), _frame(p + "hand", p + "forearm", (0.0, 0.0, -0.25))]
    names = [j["name"] for j in joints]
    sym = [{"first": n, "second": "r_" + n[2:], "sign": 1 if n.endswith(("pitch", "elbow", "knee")) else -1} for n in names if n.startswith("l_")]
    motor_groups = [{"name": n, "joints": [n]} for n in ("torso_pitch", "torso_roll", "torso_yaw")]
    for j in ("hip_pitch", "hip_roll", "hip_yaw", "knee", "ankle_pitch", "ankle_roll", "shoulder_pitch", "shoulder_roll", "shoulder_yaw", "elbow"):
        motor_groups.append({"name": j, "joints": ["l_" + j, "r_" + j]})
    return {
        "schema_version": 1,
        "name": "reference_robot",
        "agent": "robot",
        "base_link": "root_link",
        "links": links,
        "joints": joints,
        "frames": frames,
        "motors": MOTOR_CATALOG,
        "parameter_groups": {
            "links": [
                {"name": "root", "links": ["root_link"]},
                {"name": "torso_1", "links": ["torso_1"]},
                {"name": "torso_2", "links": ["torso_2"]},
                {"name": "chest", "links": ["chest"]},
                {"name": "upper_arm", "links": ["l_upper_arm", "r_upper_arm"]},
                {"name": "forearm", "links": ["l_forearm", "r_forearm"]},
                {"name": "thigh", "links": ["l_thigh", "r_thigh"]},
                {"name": "shank", "links": ["l_shank", "r_shank"]},
            ],
            "motors": motor_groups,
        },
        "symmetry": sym,
        "reference_posture": {"l_shoulder_pitch": -0.5, "r_shoulder_pitch": -0.5, "l_elbow": -0.6, "r_elbow": -0.6, "l_knee": 0.3, "r_knee": 0.3, "l_hip_pitch": -0.15, "r_hip_pitch": -0.15, "l_ankle_pitch": -0.15, "r_ankle_pitch": -0.15},
    }
