"""Scenario files: robot, humans, loads, task and run settings."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import presets
from .coupled import CompositeSystem, ContactSpec
from .errors import ContractError, ErgoCodesignError, ParseError
from .evo.evolve import EvolutionConfig
from .evo.fitness import Evaluator, ScenarioCase
from .evo.genes import GeneSpace
from .jsonio import dumps, read_json, schema_diagnostics
from .model.dynamics import GRAVITY
from .model.io import load_model, model_from_dict
from .model.model import HardwareParams, KinematicModel
from .statics.problem import CostWeights, Placement, TaskSpec
from .statics.solve import SolverOptions

__all__ = ["LoadSpec", "Scenario", "load_scenario", "parse_scenario", "same_skeleton"]

DEFAULT_FRICTION = {"mu": 0.7, "cop": [-0.08, 0.12, -0.05, 0.05]}


@dataclass(frozen=True)
class LoadSpec:
    """Box load: mass in kg, dimensions in m, grasp frames in the box frame (m)."""

    name: str
    mass: float
    dimensions: tuple[float, float, float]
    grasp_frames: dict

    def __post_init__(self):
        if not self.mass > 0:
            raise ContractError(f"load {self.name} must have positive mass")
        if any(not d > 0 for d in self.dimensions):
            raise ContractError(f"load {self.name} must have positive dimensions")

    def model(self) -> KinematicModel:
        return model_from_dict(presets.box_load(self.name, self.mass, self.dimensions, self.grasp_frames))

    def to_dict(self) -> dict:
        return {"name": self.name, "mass": self.mass, "dimensions": list(self.dimensions), "grasp_frames": {k: list(v) for k, v in self.grasp_frames.items()}}


def same_skeleton(a: KinematicModel, b: KinematicModel) -> bool:
    """True when two robot models share joints, links, frames and parameter groups."""
    return (
        a.joint_names == b.joint_names
        and [l.name for l in a.links] == [l.name for l in b.links]
        and a.frame_names == b.frame_names
        and [g.name for g in a.link_groups] == [g.name for g in b.link_groups]
        and [g.name for g in a.motor_groups] == [g.name for g in b.motor_groups]
    )


@dataclass(frozen=True, eq=False)
class Scenario:
    """Parsed scenario.

    Attributes:
        name: Scenario name.
        robot: Robot model (its file values define the nominal design).
        humans: ``(name, model)`` pairs.
        loads: Load definitions.
        task: Heights, placements and references (postures are filled per human).
        contacts: Contact templates shared by all cases.
        weights: Objective weights.
        solver: Inner solver options.
        evolution: Genetic search settings.
        gene_space: Gene domains.
        warm_start: Warm-start designs.
        gravity: Gravity vector.
        output_dir: Default output directory.
        source: Raw scenario data (after path resolution) used for manifests.
    """

    name: str
    robot: KinematicModel
    humans: tuple[tuple[str, KinematicModel], ...]
    loads: tuple[LoadSpec, ...]
    task: TaskSpec
    contacts: tuple[ContactSpec, ...]
    weights: CostWeights = field(default_factory=CostWeights)
    solver: SolverOptions = field(default_factory=SolverOptions)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    gene_space: GeneSpace | None = None
    warm_start: tuple[HardwareParams, ...] = ()
    gravity: tuple[float, float, float] = tuple(GRAVITY)
    output_dir: str = "runs"
    posture_overrides: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict, repr=False)

    def _posture(self, model: KinematicModel, role: str) -> np.ndarray:
        s = model.default_posture().copy()
        for joint, value in self.posture_overrides.get(role, {}).items():
            if joint not in model.joint_index:
                raise ContractError(f"reference posture names unknown joint {joint!r} of {model.name}")
            s[model.joint_index[joint]] = value
        return s

    def cases(self, robot: KinematicModel | None = None) -> list[ScenarioCase]:
        """All (human, load) cases, optionally with another robot model of the same skeleton."""
        robot = robot or self.robot
        if not same_skeleton(robot, self.robot):
            raise ContractError(f"robot {robot.name} does not match the scenario skeleton {self.robot.name}")
        out = []
        for hname, hmodel in self.humans:
            task = replace(
                self.task,
                reference_postures={"human": self._posture(hmodel, "human"), "robot": self._posture(robot, "robot")},
            )
            for load in self.loads:
                system = CompositeSystem(hmodel, robot, load.model(), self.contacts, self.gravity)
                out.append(ScenarioCase(hname, load.name, system, task))
        return out

    def evaluator(self, robot: KinematicModel | None = None, keep_solutions: bool = False, fail_fast: bool = False) -> Evaluator:
        return Evaluator(self.cases(robot), self.weights, self.solver, keep_solutions, fail_fast)

    def with_solver(self, **changes) -> "Scenario":
        return replace(self, solver=replace(self.solver, **changes))

    def with_evolution(self, **changes) -> "Scenario":
        return replace(self, evolution=replace(self.evolution, **changes))

    def with_humans(self, humans) -> "Scenario":
        return replace(self, humans=tuple(humans))

    def with_loads(self, loads) -> "Scenario":
        return replace(self, loads=tuple(loads))

    def digest(self) -> str:
        """Hash of the resolved scenario content."""
        return hashlib.sha256(dumps(self.source).encode()).hexdigest()


def _locate(text: str, path: list) -> int | None:
    """Best-effort line of the last key in ``path`` within the JSON text."""
    for key in reversed(path):
        if isinstance(key, str):
            idx = text.find(f'"{key}"')
            if idx >= 0:
                return text.count("\n", 0, idx) + 1
    return None


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file; model paths are relative to it.

    Raises:
        ParseError: Malformed JSON, schema violations or unresolvable references.
    """
    path = Path(path)
    data = read_json(path)
    return parse_scenario(data, base=path.parent, source=str(path), text=path.read_text())


def _model_ref(ref: str, base: Path, source: str, field_name: str) -> tuple[KinematicModel, dict]:
    p = (base / ref).resolve()
    try:
        model = load_model(p)
    except ErgoCodesignError as exc:
        raise ParseError(f"model {ref!r} is invalid: {exc}", source=source, field=field_name) from None
    return model, read_json(p)


def parse_scenario(data: dict, base: Path | str = ".", source: str = "<scenario>", text: str | None = None) -> Scenario:
    """Build a :class:`Scenario` from parsed JSON data.

    Model references may also be given inline as model dictionaries under the
    ``embedded_models`` key of ``data`` (as written in run manifests).
    """
    base = Path(base)
    embedded = data.get("embedded_models")
    body = {k: v for k, v in data.items() if k != "embedded_models"}
    diags = schema_diagnostics(body, "scenario")
    if diags:
        d = diags[0]
        line = _locate(text, d.path.split("/")) if text and d.path else None
        raise ParseError(d.message, source=source, line=line, field=d.path or None)

    def model(ref, fld):
        if embedded is not None:
            if ref not in embedded:
                raise ParseError(f"embedded model {ref!r} missing", source=source, field=fld)
            return model_from_dict(embedded[ref]), embedded[ref]
        return _model_ref(ref, base, source, fld)

    try:
        robot, robot_data = model(body["robot"], "robot")
        humans, models = [], {body["robot"]: robot_data}
        for i, ref in enumerate(body["humans"]):
            m, d = model(ref, f"humans/{i}")
            if m.agent != "human":
                raise ParseError(f"model {ref!r} is not a human", source=source, field=f"humans/{i}")
            humans.append((m.name, m))
            models[ref] = d
        if robot.agent != "robot":
            raise ParseError("robot model must have agent 'robot'", source=source, field="robot")
        names = [h[0] for h in humans]
        if len(set(names)) != len(names):
            raise ParseError("human model names must be unique", source=source, field="humans")
        loads = tuple(LoadSpec(l["name"], float(l["mass"]), tuple(l["dimensions"]), dict(l["grasp_frames"])) for l in body["loads"])
        if len({l.name for l in loads}) != len(loads):
            raise ParseError("load names must be unique", source=source, field="loads")
        friction = {**DEFAULT_FRICTION, **body.get("friction", {})}
        contacts = []
        for c in body["contacts"]:
            kw = dict(owner=c["owner"], frame=c["frame"], kind=c["kind"], load_frame=c.get("load_frame"), wrench=c.get("wrench", "6d"))
            if c["kind"] == "environment" and not c.get("fixed", False):
                kw.update(mu=c.get("mu", friction["mu"]), cop=tuple(c.get("cop", friction.get("cop"))) if c.get("cop", friction.get("cop")) else None, torsion=c.get("torsion", friction.get("torsion")))
            contacts.append(ContactSpec(**kw))
        placements = {k: Placement(v.get("yaw", 0.0), tuple(v["xy"]) if "xy" in v else None) for k, v in body.get("placements", {}).items()}
        task = TaskSpec(tuple(body["heights"]), placements, ground_height=float(body.get("ground_height", 0.0)))
        weights = CostWeights(**body.get("weights", {}))
        solver = SolverOptions(**body.get("solver", {}))
        evo = dict(body.get("evolution", {}))
        space_kw = {k: evo.pop(k) for k in ("length_bounds", "materials", "motors") if k in evo}
        evolution = EvolutionConfig(**evo)
        space = GeneSpace.for_model(
            robot,
            space_kw.get("materials") or sorted({l.density for l in robot.links}),
            space_kw.get("motors"),
            tuple(space_kw.get("length_bounds", (0.5, 2.0))),
        )
        warm = []
        for i, ref in enumerate(body.get("warm_start", [])):
            if ref == "nominal":
                warm.append(HardwareParams.nominal(robot))
                continue
            dm, dd = model(ref, f"warm_start/{i}")
            models[ref] = dd
            if not same_skeleton(dm, robot):
                raise ParseError(f"warm-start design {ref!r} does not match the robot skeleton", source=source, field=f"warm_start/{i}")
            warm.append(HardwareParams.nominal(dm))
        for i, p in enumerate(warm):
            if not space.contains(p):
                raise ParseError("warm-start design lies outside the gene domains", source=source, field=f"warm_start/{i}")
        sc = Scenario(
            name=body["name"],
            robot=robot,
            humans=tuple(humans),
            loads=loads,
            task=task,
            contacts=tuple(contacts),
            weights=weights,
            solver=solver,
            evolution=evolution,
            gene_space=space,
            warm_start=tuple(warm),
            gravity=tuple(float(v) for v in body.get("gravity", GRAVITY)),
            output_dir=body.get("output_dir", "runs"),
            posture_overrides=dict(body.get("reference_postures", {})),
            source={"scenario": body, "models": models},
        )
        sc.cases()  # resolves frames and postures early
    except ParseError:
        raise
    except (ErgoCodesignError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(str(exc), source=source) from None
    return sc


def embedded_scenario(scenario: Scenario) -> dict:
    """Self-contained scenario data with all referenced models inlined."""
    return {**scenario.source["scenario"], "embedded_models": scenario.source["models"]}
