"""Regenerate the shipped model and scenario files under src/ergocodesign/data."""

from __future__ import annotations

import argparse
import math
from pathlib import Path

from ergocodesign import presets
from ergocodesign.jsonio import write_json

DATA = Path(__file__).resolve().parents[1] / "src" / "ergocodesign" / "data"

FOOT_COP = [-0.08, 0.12, -0.05, 0.05]


def _grasps(human_y: float, robot_y: float, half_length: float = 0.25) -> dict:
    # the robot faces the human, so its left hand sits at negative box y
    return {
        "h_l": [-half_length, human_y, 0.0],
        "h_r": [-half_length, -human_y, 0.0],
        "r_l": [half_length, -robot_y, 0.0],
        "r_r": [half_length, robot_y, 0.0],
    }


def _biped_contacts() -> list:
    out = []
    for owner in ("human", "robot"):
        out += [{"owner": owner, "frame": f"{s}_sole", "kind": "environment"} for s in ("l", "r")]
    for owner, pre in (("human", "h"), ("robot", "r")):
        out += [
            {"owner": owner, "frame": f"{s}_hand", "kind": "grasp", "load_frame": f"{pre}_{s}", "wrench": "force"}
            for s in ("l", "r")
        ]
    return out


def models() -> dict:
    toy = presets.toy_robot()
    # shipped design is a deliberately plain starting point for the search
    for link in toy["links"]:
        if link["name"] in ("l_upper_arm", "r_upper_arm", "l_forearm", "r_forearm"):
            link["density"] = 1200.0
    return {
        "toy_robot": toy,
        "human_178": presets.human(1.78, shoulder_roll=False),
        "human_170": presets.human(1.70),
        "human_185": presets.human(1.85),
        "human_175": presets.human(1.75),
        "human_168_spine": presets.human(1.68, full_spine=True),
        "human_178_spine": presets.human(1.78, full_spine=True),
        "human_182_spine": presets.human(1.82, full_spine=True),
        "reference_robot": presets.reference_robot(),
        "arm_human": presets.arm_agent("human", "arm_human"),
        "arm_robot": presets.arm_agent("robot", "arm_robot"),
    }


def scenarios() -> dict:
    common = {"schema_version": 1, "friction": {"mu": 0.7, "cop": FOOT_COP}}
    toy_loads = [{"name": "box_10kg", "mass": 10.0, "dimensions": [0.5, 0.5, 0.025], "grasp_frames": _grasps(0.2, 0.2)}]
    desk_loads = [
        {"name": f"box_{m}kg", "mass": float(m), "dimensions": [0.5, 0.5, 0.025], "grasp_frames": _grasps(0.2, 0.2)}
        for m in (5, 10)
    ]
    out = {
        "toy_scene": {
            **common,
            "name": "toy_scene",
            "description": "Toy robot and a six-joint human lifting one box to three heights.",
            "robot": "../models/toy_robot.json",
            "humans": ["../models/human_178.json"],
            "loads": toy_loads,
            "heights": [0.6, 0.9, 1.2],
            "contacts": _biped_contacts(),
        },
        "desk": {
            **common,
            "name": "desk",
            "description": "Desk-scale search: two humans, two loads, two heights.",
            "robot": "../models/toy_robot.json",
            "humans": ["../models/human_170.json", "../models/human_185.json"],
            "loads": desk_loads,
            "heights": [1.0, 1.3],
            "contacts": _biped_contacts(),
            "placements": {"human": {"yaw": 0.0, "xy": [0.0, 0.0]}, "robot": {"yaw": math.pi, "xy": [1.1, 0.0]}},
            "solver": {"restarts": 1},
            "evolution": {
                "population_size": 8,
                "tournament_size": 3,
                "mutation_fraction": 0.1,
                "elitism": 1,
                "stop_improvement": 0.05,
                "max_generations": 50,
                "seed": 0,
                "length_bounds": [0.7, 1.4],
                "materials": presets.TOY_MATERIALS,
            },
            "warm_start": ["nominal"],
            "output_dir": "runs/desk",
        },
        "arm_pair": {
            "schema_version": 1,
            "name": "arm_pair",
            "description": "Two 1-DoF arms holding a box horizontally.",
            "robot": "../models/arm_robot.json",
            "humans": ["../models/arm_human.json"],
            "loads": [
                {"name": f"bar_{m}kg", "mass": float(m), "dimensions": [0.5, 0.1, 0.02], "grasp_frames": {"gh": [-0.25, 0.0, 0.0], "gr": [0.25, 0.0, 0.0]}}
                for m in (5, 10)
            ],
            "heights": [1.0],
            "contacts": [
                {"owner": "human", "frame": "foot", "kind": "environment", "fixed": True},
                {"owner": "robot", "frame": "foot", "kind": "environment", "fixed": True},
                {"owner": "human", "frame": "hand", "kind": "grasp", "load_frame": "gh", "wrench": "force"},
                {"owner": "robot", "frame": "hand", "kind": "grasp", "load_frame": "gr", "wrench": "force"},
            ],
            "evolution": {"population_size": 4, "max_generations": 3, "materials": [100.0, 200.0]},
        },
        "unreachable": {
            **common,
            "name": "unreachable",
            "description": "Load height above the reach of both agents.",
            "robot": "../models/toy_robot.json",
            "humans": ["../models/human_178.json"],
            "loads": toy_loads,
            "heights": [3.5],
            "contacts": _biped_contacts(),
        },
        "reference": {
            **common,
            "name": "reference",
            "description": "Reference-scale search: three humans, three loads, three heights.",
            "robot": "../models/reference_robot.json",
            "humans": ["../models/human_168_spine.json", "../models/human_178_spine.json", "../models/human_182_spine.json"],
            "loads": [
                {"name": f"box_{m}kg", "mass": float(m), "dimensions": [0.5, 0.5, 0.025], "grasp_frames": _grasps(0.2, 0.16)}
                for m in (5, 10, 15)
            ],
            "heights": [0.8, 1.0, 1.2],
            "contacts": _biped_contacts(),
            "evolution": {"population_size": 20, "max_generations": 150, "stop_improvement": None, "materials": presets.REFERENCE_MATERIALS},
            "warm_start": ["nominal"],
            "output_dir": "runs/reference",
        },
    }
    return out


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=DATA)
    args = parser.parse_args(argv)
    for name, data in models().items():
        write_json(args.out / "models" / f"{name}.json", data)
    for name, data in scenarios().items():
        write_json(args.out / "scenarios" / f"{name}.json", data)


if __name__ == "__main__":
    main()
