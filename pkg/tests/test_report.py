import csv
import io
import os

import numpy as np
import pytest

from ergocodesign.errors import ContractError
from ergocodesign.evo.fitness import CaseResult, build_report
from ergocodesign.model.io import load_model
from ergocodesign.model.model import HardwareParams
from ergocodesign.report import (
    CSV_SCHEMA_VERSION,
    HUMAN_COLUMNS,
    ROBOT_COLUMNS,
    back_joints,
    back_table_columns,
    compare_reports,
    relative_change,
)
from ergocodesign.scenario import load_scenario

from conftest import DATA

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")
HEIGHTS = (0.8, 1.0, 1.2)

# back torques (N m) of two designs, per joint and height
REFERENCE_TABLE = {
    "T9T8": ((-47.76, -33.81, -24.86), (-49.00, -32.46, -25.24), (-1.24, 1.35, -0.38)),
    "L1T12": ((-51.336, -31.90, -19.06), (-52.22, -30.61, -20.35), (-0.884, 0.99, 1.29)),
    "L4L3": ((-49.55, -28.36, -12.19), (-50.22, -27.42, -14.17), (-0.67, 0.94, -1.98)),
    "L5S1": ((-45.84, -22.93, -5.42), (-46.41, -22.46, -7.82), (-0.51, 0.5, -2.4)),
}
# printed differences that disagree with their own rows beyond rounding
INCONSISTENT_CELLS = {("L1T12", 1), ("L1T12", 2), ("L5S1", 0)}


@pytest.fixture(scope="module")
def spine_human():
    return load_model(DATA / "models" / "human_178_spine.json")


def table_reports(human):
    """Two synthetic reports carrying the reference back torques and fixed robot torques."""
    nh = human.n_joints
    reports = []
    for which in (0, 1):
        tau = np.zeros((3, nh + 6))
        for joint, rows in REFERENCE_TABLE.items():
            tau[:, human.joint_index[joint]] = rows[which]
        tau[:, nh:] = np.arange(1, 7) * (0.25 if which == 0 else 0.5) * np.array([[1.0], [-2.0], [3.0]])
        reports.append(build_report([CaseResult(human.name, "box_10kg", "solved", HEIGHTS, tau)], 100.0))
    return reports


def table_comparison(human):
    a, b = table_reports(human)
    return compare_reports(a, b, {human.name: human}, 6, labels=("GA", "NL"))


def write_golden(human):  # pragma: no cover - maintenance helper
    cmp = table_comparison(human)
    for name, text in (("back_torques.csv", cmp.back_csv()), ("robot_torques.csv", cmp.robot_csv()), ("human_torques.csv", cmp.human_csv())):
        with open(os.path.join(GOLDEN, name), "w") as fh:
            fh.write(text)


def read_golden(name):
    with open(os.path.join(GOLDEN, name)) as fh:
        return fh.read()


def test_back_joints_run_top_to_bottom(spine_human):
    assert back_joints(spine_human) == ["T9T8", "L1T12", "L4L3", "L5S1"]
    assert back_joints(load_model(DATA / "models" / "human_178.json")) == ["T9T8", "L5S1"]


def test_table_layout_golden(spine_human):
    cmp = table_comparison(spine_human)
    assert cmp.back_csv() == read_golden("back_torques.csv")
    assert cmp.robot_csv() == read_golden("robot_torques.csv")
    assert cmp.human_csv() == read_golden("human_torques.csv")
    assert back_table_columns(HEIGHTS) == ("human", "load", "joint", "row", "torque_Nm_at_0.8m", "torque_Nm_at_1m", "torque_Nm_at_1.2m")
    assert CSV_SCHEMA_VERSION == 1


def test_table_schema(spine_human):
    rows = list(csv.reader(io.StringIO(table_comparison(spine_human).back_csv())))
    assert tuple(rows[0]) == back_table_columns(HEIGHTS)
    body = rows[1:]
    assert len(body) == 3 * 4
    assert [r[2] for r in body[::3]] == ["T9T8", "L1T12", "L4L3", "L5S1"]
    assert [r[3] for r in body[:3]] == ["GA", "NL", "|GA|-|NL|"]
    for r in body:
        assert len(r) == 7 and all(np.isfinite(float(v)) for v in r[4:])
    robot = list(csv.reader(io.StringIO(table_comparison(spine_human).robot_csv())))
    assert tuple(robot[0]) == ROBOT_COLUMNS and len(robot) == 1 + 2 * 3
    human = list(csv.reader(io.StringIO(table_comparison(spine_human).human_csv())))
    assert tuple(human[0]) == HUMAN_COLUMNS and len(human) == 1 + 2 * 3 * spine_human.n_joints


def test_difference_rows_match_reference(spine_human):
    cmp = table_comparison(spine_human)
    diffs = {r[2]: r[4:] for r in cmp.back_rows if r[3] == "|GA|-|NL|"}
    for joint, (ga, nl, printed) in REFERENCE_TABLE.items():
        for k in range(3):
            assert diffs[joint][k] == abs(ga[k]) - abs(nl[k])
            if (joint, k) not in INCONSISTENT_CELLS:
                assert diffs[joint][k] == pytest.approx(printed[k], abs=0.035)


def test_robot_rows_are_mean_variance_of_absolute_torques(spine_human):
    cmp = table_comparison(spine_human)
    first = cmp.robot_rows[0]
    v = np.abs(np.arange(1, 7) * 0.25)
    assert first[:2] == ("GA", 0.8)
    assert first[2] == pytest.approx(v.mean()) and first[3] == pytest.approx(v.var()) and first[4] == pytest.approx(v.max())
    # robot torques of NL are twice those of GA
    assert cmp.robot_change_percent == pytest.approx(-50.0)


def test_self_comparison_is_all_zero(spine_human):
    a, _ = table_reports(spine_human)
    cmp = compare_reports(a, a, {spine_human.name: spine_human}, 6)
    assert cmp.robot_change_percent == 0.0 and cmp.human_change_percent == 0.0
    assert all(v == 0.0 for v in cmp.back_change_percent.values())
    assert all(all(x == 0.0 for x in r[4:]) for r in cmp.back_rows if r[3] == "|A|-|B|")
    assert cmp.robot_norms["A"] == cmp.robot_norms["B"]


def test_relative_change():
    assert relative_change(50.0, 100.0) == -50.0
    assert relative_change(0.0, 0.0) == 0.0
    assert relative_change(1.0, 0.0) == float("inf")


def test_unsolved_cases_are_excluded(spine_human):
    a, b = table_reports(spine_human)
    bad = build_report([CaseResult(spine_human.name, "box_10kg", "infeasible", HEIGHTS, np.zeros((3, 16)))], 100.0)
    cmp = compare_reports(a, bad, {spine_human.name: spine_human}, 6)
    assert cmp.cases == [] and cmp.excluded == [{"human": spine_human.name, "load": "box_10kg", "A": "solved", "B": "infeasible"}]
    other = build_report([CaseResult("x", "y", "solved", HEIGHTS, np.zeros((3, 16)))], 100.0)
    with pytest.raises(ContractError):
        compare_reports(a, other, {}, 6)


def test_weaker_motors_leave_interior_statics_unchanged():
    # M and L share gear ratio and rotor inertia; only the torque limits differ
    sc = load_scenario(DATA / "scenarios" / "toy_scene.json")
    nominal = HardwareParams.nominal(sc.robot)
    ev = sc.evaluator()
    weak = ev(HardwareParams(nominal.length_multipliers, nominal.densities, ("M",) * len(nominal.motor_ids)))
    strong = ev(HardwareParams(nominal.length_multipliers, nominal.densities, ("L",) * len(nominal.motor_ids)))
    assert weak.feasible and strong.feasible
    limit = 92.0 / 160.0
    assert np.max(np.abs(weak.cases[0].torques[:, -6:])) < limit
    cmp = compare_reports(weak, strong, dict(sc.humans), 6)
    assert np.allclose(cmp.robot_norms["A"], cmp.robot_norms["B"], rtol=1e-6)
    assert abs(cmp.robot_change_percent) < 1e-4
    assert weak.fitness == pytest.approx(strong.fitness, rel=1e-6)
