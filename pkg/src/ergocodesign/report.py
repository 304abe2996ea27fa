"""Design comparison: per-height robot motor torques, human joint torques and the
back-torque table (rows per back joint, columns per load height)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .evo.fitness import FitnessReport
from .model.model import KinematicModel

__all__ = [
    "CSV_SCHEMA_VERSION",
    "ROBOT_COLUMNS",
    "HUMAN_COLUMNS",
    "back_joints",
    "back_table_columns",
    "ComparisonReport",
    "compare_reports",
    "relative_change",
]

CSV_SCHEMA_VERSION = 1
ROBOT_COLUMNS = (
    "design",
    "height_m",
    "mean_abs_motor_torque_Nm",
    "var_abs_motor_torque_N2m2",
    "max_abs_motor_torque_Nm",
    "norm_motor_torque_Nm",
    "cases",
)
HUMAN_COLUMNS = ("design", "human", "load", "height_m", "joint", "torque_Nm")


def back_table_columns(heights) -> tuple[str, ...]:
    return ("human", "load", "joint", "row") + tuple(f"torque_Nm_at_{h:g}m" for h in heights)


def back_joints(model: KinematicModel) -> list[str]:
    """Spine joints ordered top to bottom.

    These are the joints between the base link and the last link shared by the
    kinematic chains of all hand frames (frames named ``*hand``).
    """
    parent_joint = {j.child: j for j in model.joints}
    frame_link = {f.name: f.link for f in model.frames}
    hands = [frame_link[f] for f in frame_link if f.endswith("hand")]
    if not hands:
        raise ContractError(f"model {model.name} has no hand frames")

    def chain(link):
        out = []
        while link in parent_joint:
            j = parent_joint[link]
            out.append(j.name)
            link = j.parent
        return out[::-1]  # base first

    chains = [chain(l) for l in hands]
    shared = []
    for names in zip(*chains):
        if len(set(names)) > 1:
            break
        shared.append(names[0])
    return shared[::-1]


def relative_change(a: float, b: float) -> float:
    """``100 (a - b) / b`` in percent (0 when both are 0)."""
    if b == 0.0:
        return 0.0 if a == 0.0 else float("inf")
    return 100.0 * (a - b) / b


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


@dataclass
class ComparisonReport:
    """Comparison of two designs on the same cases.

    Attributes:
        labels: Design labels, ``("A", "B")``.
        heights: Load heights (m).
        cases: ``(human, load)`` pairs solved for both designs.
        excluded: Cases left out because a design did not solve them, with statuses.
        robot_rows: Rows matching :data:`ROBOT_COLUMNS`.
        human_rows: Rows matching :data:`HUMAN_COLUMNS`.
        back_rows: Back-torque table rows matching :func:`back_table_columns`.
        robot_norms: Per label, per-height norm of all motor torques (N m).
        robot_change_percent: Relative change of the summed robot norms, A against B.
        back_change_percent: Per back joint, relative change of the summed per-height norms.
        human_change_percent: Same over all human joints.
        fitness: Per label fitness.
    """

    labels: tuple[str, str]
    heights: tuple[float, ...]
    cases: list[tuple[str, str]]
    excluded: list[dict]
    robot_rows: list[tuple]
    human_rows: list[tuple]
    back_rows: list[tuple]
    robot_norms: dict
    robot_change_percent: float
    back_change_percent: dict
    human_change_percent: float
    fitness: dict
    designs: dict = field(default_factory=dict)

    def robot_csv(self) -> str:
        return _csv(ROBOT_COLUMNS, self.robot_rows)

    def human_csv(self) -> str:
        return _csv(HUMAN_COLUMNS, self.human_rows)

    def back_csv(self) -> str:
        return _csv(back_table_columns(self.heights), self.back_rows)

    def to_dict(self) -> dict:
        return {
            "schema_version": CSV_SCHEMA_VERSION,
            "labels": list(self.labels),
            "designs": self.designs,
            "heights_m": list(self.heights),
            "cases": [{"human": h, "load": l} for h, l in self.cases],
            "excluded": self.excluded,
            "fitness": self.fitness,
            "robot_norm_per_height_Nm": {k: list(v) for k, v in self.robot_norms.items()},
            "robot_change_percent": self.robot_change_percent,
            "human_change_percent": self.human_change_percent,
            "back_change_percent": self.back_change_percent,
        }

    def gnuplot_script(self) -> str:
        a, b = self.labels
        return "\n".join(
            [
                "# robot motor torques per height: mean with variance as error bars",
                "set datafile separator ','",
                "set key autotitle columnhead",
                "set xlabel 'Height [m]'",
                "set ylabel '|tau_m| [N m]'",
                f"plot 'robot_torques.csv' using (stringcolumn(1) eq '{a}' ? $2 : 1/0):3:4 with yerrorlines title '{a}', \\",
                f"     'robot_torques.csv' using (stringcolumn(1) eq '{b}' ? $2 : 1/0):3:4 with yerrorlines title '{b}'",
                "",
            ]
        )


def _by_case(report: FitnessReport) -> dict:
    return {(c.human, c.load): c for c in report.cases}


def compare_reports(
    a: FitnessReport,
    b: FitnessReport,
    humans: dict[str, KinematicModel],
    n_robot_motors: int,
    labels=("A", "B"),
) -> ComparisonReport:
    """Build the comparison from two evaluations of the same cases.

    Args:
        a: Report of design A.
        b: Report of design B.
        humans: Human models by name (for joint names and back joints).
        n_robot_motors: Number of robot torques at the end of each stacked vector.
        labels: Display labels of the two designs.
    """
    ca, cb = _by_case(a), _by_case(b)
    if set(ca) != set(cb):
        raise ContractError("the two reports cover different cases")
    keys = sorted(ca)
    heights = ca[keys[0]].heights if keys else ()
    cases, excluded = [], []
    for key in keys:
        if ca[key].solved and cb[key].solved:
            cases.append(key)
        else:
            excluded.append({"human": key[0], "load": key[1], labels[0]: ca[key].status, labels[1]: cb[key].status})

    robot_rows, robot_norms = [], {}
    for lab, cmap in zip(labels, (ca, cb)):
        norms = []
        for k, h in enumerate(heights):
            tm = [np.asarray(cmap[key].torques[k][-n_robot_motors:]) for key in cases] if n_robot_motors else []
            v = np.abs(np.concatenate(tm)) if tm else np.zeros(0)
            nrm = float(np.linalg.norm(v))
            norms.append(nrm)
            if v.size:
                robot_rows.append((lab, float(h), float(v.mean()), float(v.var()), float(v.max()), nrm, len(cases)))
            else:
                robot_rows.append((lab, float(h), float("nan"), float("nan"), float("nan"), nrm, len(cases)))
        robot_norms[lab] = norms
    robot_change = relative_change(sum(robot_norms[labels[0]]), sum(robot_norms[labels[1]]))

    human_rows, back_rows = [], []
    joint_sums = {lab: {} for lab in labels}
    total = {lab: [0.0] * len(heights) for lab in labels}
    for key in cases:
        model = humans[key[0]]
        names = model.joint_names
        nh = len(names)
        for lab, cmap in zip(labels, (ca, cb)):
            for k, h in enumerate(heights):
                th = np.asarray(cmap[key].torques[k][:nh])
                total[lab][k] += float(th @ th)
                for j, name in enumerate(names):
                    human_rows.append((lab, key[0], key[1], float(h), name, float(th[j])))
        for joint in back_joints(model):
            j = model.joint_index[joint]
            ta = [float(ca[key].torques[k][j]) for k in range(len(heights))]
            tb = [float(cb[key].torques[k][j]) for k in range(len(heights))]
            back_rows.append((key[0], key[1], joint, labels[0], *ta))
            back_rows.append((key[0], key[1], joint, labels[1], *tb))
            back_rows.append((key[0], key[1], joint, f"|{labels[0]}|-|{labels[1]}|", *[abs(x) - abs(y) for x, y in zip(ta, tb)]))
            for lab, vals in zip(labels, (ta, tb)):
                acc = joint_sums[lab].setdefault(joint, [0.0] * len(heights))
                for k, v in enumerate(vals):
                    acc[k] += v * v

    def summed(per_height):
        return sum(float(np.sqrt(v)) for v in per_height)

    back_change = {
        joint: relative_change(summed(joint_sums[labels[0]][joint]), summed(joint_sums[labels[1]][joint]))
        for joint in joint_sums[labels[0]]
    }
    human_change = relative_change(summed(total[labels[0]]), summed(total[labels[1]]))
    return ComparisonReport(
        labels=tuple(labels),
        heights=tuple(heights),
        cases=cases,
        excluded=excluded,
        robot_rows=robot_rows,
        human_rows=human_rows,
        back_rows=back_rows,
        robot_norms=robot_norms,
        robot_change_percent=robot_change,
        back_change_percent=back_change,
        human_change_percent=human_change,
        fitness={labels[0]: a.fitness, labels[1]: b.fitness},
    )
