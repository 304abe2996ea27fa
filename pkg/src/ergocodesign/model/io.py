"""Model file (schema version 1) parsing, serialization and validation."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from ..errors import ErgoCodesignError, ModelError
from ..jsonio import Diagnostic, read_json, schema_diagnostics, write_json
from .model import (
    FrameSpec,
    HardwareParams,
    JointSpec,
    KinematicModel,
    LinkSpec,
    MotorSpec,
    ParameterGroup,
    SymmetryPair,
)
from .shapes import ShapePrimitive

__all__ = ["model_from_dict", "model_to_dict", "diagnose_model", "load_model", "save_model", "design_model"]

SCHEMA_VERSION = 1


def model_from_dict(data: dict) -> KinematicModel:
    """Build a KinematicModel from parsed model-file data.

    Raises:
        ModelError: If a value violates a type invariant.
    """
    try:
        links = tuple(
            LinkSpec(
                name=l["name"],
                shape=ShapePrimitive(
                    kind=l["shape"]["kind"],
                    dimensions=tuple(l["shape"]["dimensions"]),
                    growth_axis=tuple(l["shape"].get("growth_axis", (0.0, 0.0, 1.0))),
                    center=tuple(l["shape"].get("center", (0.0, 0.0, 0.0))),
                ),
                density=float(l["density"]),
                length_multiplier=float(l.get("length_multiplier", 1.0)),
            )
            for l in data["links"]
        )
        joints = tuple(
            JointSpec(
                name=j["name"],
                parent=j["parent"],
                child=j["child"],
                kind=j.get("type", "revolute"),
                origin_xyz=tuple(j.get("origin", {}).get("xyz", (0.0, 0.0, 0.0))),
                origin_rpy=tuple(j.get("origin", {}).get("rpy", (0.0, 0.0, 0.0))),
                axis=tuple(j.get("axis", (0.0, 0.0, 1.0))),
                lower=float(j.get("limits", {}).get("lower", -np.pi)),
                upper=float(j.get("limits", {}).get("upper", np.pi)),
                motor=j.get("motor"),
            )
            for j in data.get("joints", [])
        )
        frames = tuple(
            FrameSpec(f["name"], f["link"], tuple(f.get("xyz", (0.0, 0.0, 0.0))), tuple(f.get("rpy", (0.0, 0.0, 0.0))))
            for f in data.get("frames", [])
        )
        motors = tuple(
            MotorSpec(
                id=m["id"],
                inv_gear_ratio=float(m["inv_gear_ratio"]),
                rotor_inertia=float(m["rotor_inertia"]),
                torque_min=float(m["torque_min"]),
                torque_max=float(m["torque_max"]),
                viscous_friction=float(m.get("viscous_friction", 0.0)),
            )
            for m in data.get("motors", [])
        )
        groups = data.get("parameter_groups", {})
        link_groups = tuple(ParameterGroup(g["name"], tuple(g["links"])) for g in groups.get("links", []))
        motor_groups = tuple(ParameterGroup(g["name"], tuple(g["joints"])) for g in groups.get("motors", []))
        symmetry = tuple(SymmetryPair(s["first"], s["second"], float(s.get("sign", 1))) for s in data.get("symmetry", []))
        ref = data.get("reference_posture")
        posture = None
        if ref is not None:
            unknown = set(ref) - {j.name for j in joints}
            if unknown:
                raise ModelError(f"reference_posture names unknown joints {sorted(unknown)}")
            posture = tuple(float(ref.get(j.name, 0.0)) for j in joints)
        return KinematicModel(
            name=data["name"],
            agent=data["agent"],
            base_link=data["base_link"],
            links=links,
            joints=joints,
            frames=frames,
            motors=motors,
            link_groups=link_groups,
            motor_groups=motor_groups,
            symmetry=symmetry,
            reference_posture=posture,
        )
    except ModelError:
        raise
    except (ErgoCodesignError, KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"invalid model data: {exc}") from None


def model_to_dict(model: KinematicModel) -> dict:
    """Inverse of :func:`model_from_dict`."""
    out = {
        "schema_version": SCHEMA_VERSION,
        "name": model.name,
        "agent": model.agent,
        "base_link": model.base_link,
        "links": [
            {
                "name": l.name,
                "shape": {
                    "kind": l.shape.kind,
                    "dimensions": list(l.shape.dimensions),
                    "growth_axis": list(l.shape.growth_axis),
                    "center": list(l.shape.center),
                },
                "density": l.density,
                "length_multiplier": l.length_multiplier,
            }
            for l in model.links
        ],
        "joints": [
            {
                "name": j.name,
                "type": j.kind,
                "parent": j.parent,
                "child": j.child,
                "origin": {"xyz": list(j.origin_xyz), "rpy": list(j.origin_rpy)},
                "axis": list(j.axis),
                "limits": {"lower": j.lower, "upper": j.upper},
                "motor": j.motor,
            }
            for j in model.joints
        ],
        "frames": [{"name": f.name, "link": f.link, "xyz": list(f.xyz), "rpy": list(f.rpy)} for f in model.frames],
        "motors": [
            {
                "id": m.id,
                "inv_gear_ratio": m.inv_gear_ratio,
                "rotor_inertia": m.rotor_inertia,
                "torque_min": m.torque_min,
                "torque_max": m.torque_max,
                "viscous_friction": m.viscous_friction,
            }
            for m in model.motors
        ],
        "parameter_groups": {
            "links": [{"name": g.name, "links": list(g.members)} for g in model.link_groups],
            "motors": [{"name": g.name, "joints": list(g.members)} for g in model.motor_groups],
        },
        "symmetry": [{"first": s.first, "second": s.second, "sign": int(s.sign)} for s in model.symmetry],
    }
    if model.reference_posture is not None:
        out["reference_posture"] = dict(zip(model.joint_names, model.reference_posture))
    return out


def design_model(model: KinematicModel, params: HardwareParams) -> dict:
    """Model-file data with the design baked into link values and motor bindings."""
    params.check(model)
    data = model_to_dict(model)
    links = {l["name"]: l for l in data["links"]}
    joints = {j["name"]: j for j in data["joints"]}
    for g, lm, rho in zip(model.link_groups, params.length_multipliers, params.densities):
        for name in g.members:
            links[name]["length_multiplier"] = lm
            links[name]["density"] = rho
    for g, mid in zip(model.motor_groups, params.motor_ids):
        for name in g.members:
            joints[name]["motor"] = mid
    return data


def _structure_diagnostics(data: dict) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    link_names = [l["name"] for l in data["links"]]
    joints = data.get("joints", [])
    joint_names = [j["name"] for j in joints]
    frame_names = [f["name"] for f in data.get("frames", [])]
    for kind, names in (("link", link_names), ("joint", joint_names), ("frame", frame_names)):
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            out.append(Diagnostic("names.duplicate", f"duplicate {kind} names {dup}", f"{kind}s"))
    known = set(link_names)
    if data["base_link"] not in known:
        out.append(Diagnostic("topology.unknown_link", f"base link {data['base_link']!r} is not a link", "base_link"))
    parent_of: dict[str, str] = {}
    for i, j in enumerate(joints):
        for key in ("parent", "child"):
            if j[key] not in known:
                out.append(Diagnostic("topology.unknown_link", f"joint {j['name']} {key} {j[key]!r} is not a link", f"joints/{i}/{key}"))
        if j["child"] == data["base_link"]:
            out.append(Diagnostic("topology.base_has_parent", f"joint {j['name']} has the base link as child", f"joints/{i}"))
        if j["child"] in parent_of:
            out.append(Diagnostic("topology.multiple_parents", f"link {j['child']!r} has more than one parent joint", f"joints/{i}"))
        parent_of.setdefault(j["child"], j["parent"])
    # cycle detection by walking parents
    cyclic = set()
    for start in parent_of:
        seen, link = [], start
        while link in parent_of and link not in seen:
            seen.append(link)
            link = parent_of[link]
        if link in seen:
            cyclic.add(tuple(sorted(seen[seen.index(link):])))
    for cyc in sorted(cyclic):
        out.append(Diagnostic("topology.cycle", f"joints form a cycle through links {list(cyc)}", "joints"))
    if not cyclic and data["base_link"] in known:
        reach = {data["base_link"]}
        for link in link_names:
            chain, cur = [], link
            while cur in parent_of and cur not in reach and cur not in chain:
                chain.append(cur)
                cur = parent_of[cur]
            if cur in reach:
                reach.update(chain)
        orphans = [l for l in link_names if l not in reach]
        if orphans:
            out.append(Diagnostic("topology.disconnected", f"links not connected to the base: {orphans}", "links"))
    if len(joints) != len(link_names) - 1 and not any(d.code.startswith("topology") for d in out):
        out.append(Diagnostic("topology.disconnected", "a tree needs exactly one joint per non-base link", "joints"))

    motor_ids = [m["id"] for m in data.get("motors", [])]
    groups = data.get("parameter_groups", {})
    grouped_joints: set[str] = set()
    for gi, g in enumerate(groups.get("motors", [])):
        for name in g["joints"]:
            if name not in joint_names:
                out.append(Diagnostic("groups.unknown_member", f"motor group {g['name']} names unknown joint {name!r}", f"parameter_groups/motors/{gi}"))
            grouped_joints.add(name)
    for gi, g in enumerate(groups.get("links", [])):
        for name in g["links"]:
            if name not in known:
                out.append(Diagnostic("groups.unknown_member", f"link group {g['name']} names unknown link {name!r}", f"parameter_groups/links/{gi}"))
    seen_links: dict[str, str] = {}
    for g in groups.get("links", []):
        for name in g["links"]:
            if name in seen_links:
                out.append(Diagnostic("groups.overlap", f"link {name!r} is in groups {seen_links[name]} and {g['name']}", "parameter_groups/links"))
            seen_links[name] = g["name"]
    for i, j in enumerate(joints):
        m = j.get("motor")
        if m is not None and m not in motor_ids:
            out.append(Diagnostic("motor.unknown_id", f"joint {j['name']} uses unknown motor {m!r}", f"joints/{i}/motor"))
        if data["agent"] == "robot" and m is None:
            out.append(Diagnostic("motor.missing_binding", f"actuated joint {j['name']} has no motor", f"joints/{i}"))

    sym = data.get("symmetry", [])
    sym_ok = True
    for si, s in enumerate(sym):
        for key in ("first", "second"):
            if s[key] not in joint_names:
                sym_ok = False
                out.append(Diagnostic("symmetry.unknown_joint", f"symmetry names unknown joint {s[key]!r}", f"symmetry/{si}/{key}"))
    if sym and sym_ok:
        idx = {n: i for i, n in enumerate(joint_names)}
        A = np.zeros((len(sym), len(joints)))
        for r, s in enumerate(sym):
            A[r, idx[s["first"]]] += 1.0
            A[r, idx[s["second"]]] -= float(s.get("sign", 1))
        lo = [j.get("limits", {}).get("lower", -np.pi) for j in joints]
        hi = [j.get("limits", {}).get("upper", np.pi) for j in joints]
        if all(l < h for l, h in zip(lo, hi)):
            res = linprog(np.zeros(len(joints)), A_eq=A, b_eq=np.zeros(len(sym)), bounds=list(zip(lo, hi)), method="highs")
            if res.status != 0:
                out.append(Diagnostic("symmetry.unsatisfiable", "no joint vector within limits satisfies the symmetry map", "symmetry"))
    return out


def diagnose_model(data) -> list[Diagnostic]:
    """All findings for parsed model-file data; an empty list means the model is valid."""
    out = schema_diagnostics(data, "model")
    if out:
        return out
    out = _structure_diagnostics(data)
    if out:
        return out
    try:
        model = model_from_dict(data)
    except ModelError as exc:
        return [Diagnostic("value.invalid", str(exc))]
    try:
        from .model import resolve

        resolve(model, HardwareParams.nominal(model))
    except ErgoCodesignError as exc:
        return [Diagnostic("value.invalid", str(exc))]
    return []


def load_model(path) -> KinematicModel:
    """Read and validate a model file.

    Raises:
        ParseError: On malformed JSON.
        ModelError: If validation finds problems (all diagnostics in the message).
    """
    data = read_json(path)
    diags = diagnose_model(data)
    if diags:
        raise ModelError(f"{path}: " + "; ".join(str(d) for d in diags))
    return model_from_dict(data)


def save_model(model: KinematicModel, path, params: HardwareParams | None = None) -> None:
    data = model_to_dict(model) if params is None else design_model(model, params)
    write_json(Path(path), data)
