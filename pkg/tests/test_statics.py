import time

import numpy as np
import pytest

from ergocodesign import presets
from ergocodesign.coupled import CompositeSystem, ContactSpec, composite_static_residual
from ergocodesign.errors import ContractError, DegenerateInputError, FrameLookupError
from ergocodesign.model.io import model_from_dict
from ergocodesign.model.kinematics import forward_kinematics
from ergocodesign.model.model import HardwareParams, resolve
from ergocodesign.scenario import load_scenario
from ergocodesign.statics.problem import CostWeights, Placement, StaticPostureProblem, TaskSpec
from ergocodesign.statics.solve import PostureSolution, SolverOptions, evaluate_costs, initial_guess, solve

from conftest import DATA

G = 9.81


def four_joint_agent(agent, name):
    """Pedestal with a 4-joint pitch chain ending in a hand frame."""
    d = presets.arm_agent(agent, name, length=0.2)
    links = [d["links"][0]]
    joints = []
    parent = "pedestal"
    for i in range(4):
        links.append(presets._link(f"l{i}", "cylinder", (0.02, 0.2), (0.1, 0.0, 0.0), 100.0, axis=presets.X))
        xyz = (0.0, 0.0, 1.0) if i == 0 else (0.2, 0.0, 0.0)
        joints.append(presets._joint(f"j{i}", parent, f"l{i}", xyz, presets.Y, -2.5, 2.5, "unit" if agent == "robot" else None))
        parent = f"l{i}"
    d["links"], d["joints"] = links, joints
    d.pop("parameter_groups", None)  # preset groups name the replaced arm link
    d["frames"] = [presets._frame("foot", "pedestal"), presets._frame("hand", "l3", (0.2, 0.0, 0.0))]
    return model_from_dict(d)


def arm_case(mass=5.0, motor=None, heights=(1.0,)):
    sc = load_scenario(DATA / "scenarios" / "arm_pair.json")
    if motor is not None:
        robot = model_from_dict(presets.arm_agent("robot", "arm_robot", motor=motor))
    else:
        robot = sc.robot
    load = model_from_dict(presets.box_load("bar", mass, (0.5, 0.1, 0.02), {"gh": (-0.25, 0, 0), "gr": (0.25, 0, 0)}))
    system = CompositeSystem(sc.humans[0][1], robot, load, sc.contacts)
    return StaticPostureProblem(system, TaskSpec(heights), None, sc.weights), sc


@pytest.fixture(scope="module")
def toy():
    sc = load_scenario(DATA / "scenarios" / "toy_scene.json")
    case = sc.cases()[0]
    problem = StaticPostureProblem(case.system, case.task, None, sc.weights)
    t0 = time.perf_counter()
    sol = solve(problem, sc.solver)
    return problem, sol, time.perf_counter() - t0, sc


# layout and counts ---------------------------------------------------------------


def test_counts_match_hand_computed_layout():
    human, robot = four_joint_agent("human", "h4"), four_joint_agent("robot", "r4")
    load = model_from_dict(presets.box_load("box", 5.0, (0.5, 0.1, 0.02), {"gh": (-0.25, 0, 0), "gr": (0.25, 0, 0)}))
    contacts = [
        ContactSpec("human", "foot"),
        ContactSpec("robot", "foot", mu=0.7, cop=(-0.1, 0.1, -0.1, 0.1)),
        ContactSpec("human", "hand", "grasp", "gh", wrench="force"),
        ContactSpec("robot", "hand", "grasp", "gr"),
    ]
    p = StaticPostureProblem(CompositeSystem(human, robot, load, contacts), TaskSpec((0.8, 1.0, 1.2)))
    nk = 3
    per_height = (7 + 4) + (7 + 4) + 7 + 4 + 4 + (6 + 6 + 3 + 6)
    assert p.block == per_height
    assert p.n == nk * per_height
    eq = {
        "dynamics_human": 10,
        "dynamics_robot": 10,
        "dynamics_load": 6,
        "grasp_position": 2 * 3,
        "foot_orientation": 2 * 3,
        "foot_height": 2,
        "load_orientation": 3,
        "load_height": 1,
        "quaternion_norm": 3,
    }
    for fam, count in eq.items():
        assert len(p.families[fam]) == nk * count, fam
    assert len(p.families["load_anchor"]) == 2
    assert len(p.families["load_xy"]) == (nk - 1) * 2
    assert len(p.families["foot_xy"]) == (nk - 1) * 2 * 2
    assert "stance_xy" not in p.families and "symmetry" not in p.families
    assert p.m_eq == nk * sum(eq.values()) + 2 + (nk - 1) * 6
    # one 6-D contact with friction: 5 cone rows + 4 CoP + 2 torsion per height
    assert p.m_ineq == nk * 11
    assert p.M_Y.shape[0] == p.L.shape[0] == len(p.b0) == p.m_eq


def test_stance_pin_replaces_load_anchor():
    sc = load_scenario(DATA / "scenarios" / "desk.json")
    case = sc.cases()[0]
    p = StaticPostureProblem(case.system, case.task)
    assert len(p.families["stance_xy"]) == 4
    assert "load_anchor" not in p.families
    task = TaskSpec(case.task.heights, placements={"human": Placement(0.0, (0.0, 0.0)), "load": Placement(0.0, (0.5, 0.0))})
    p = StaticPostureProblem(case.system, task)
    assert len(p.families["stance_xy"]) == 2 and len(p.families["load_anchor"]) == 2


def test_task_contracts():
    with pytest.raises(DegenerateInputError):
        TaskSpec(())
    with pytest.raises(DegenerateInputError):
        TaskSpec((1.0, 0.9))
    with pytest.raises(ContractError):
        CostWeights(torque=-1.0)
    problem, _ = arm_case()
    with pytest.raises(ContractError):
        StaticPostureProblem(
            problem.system,
            TaskSpec((1.0,), reference_postures={"human": np.array([9.0])}),
        )
    with pytest.raises(FrameLookupError):
        CompositeSystem(problem.system.human, problem.system.robot, problem.system.load, [ContactSpec("human", "nope")])


# analytic arm pair ------------------------------------------------------------------


def _arm_torque(problem, m):
    arm = resolve(problem.system.human).link_mass[1]
    return -(arm * G * 0.25 + m * G / 2 * 0.5)


@pytest.mark.parametrize("mass", [5.0, 10.0])
def test_arm_pair_analytic_share(mass):
    problem, sc = arm_case(mass)
    sol = solve(problem, sc.solver)
    assert sol.status == "solved"
    tau = _arm_torque(problem, mass)
    assert abs(sol.tau_human[0, 0] - tau) <= 1e-6
    assert abs(sol.tau_robot[0, 0] - tau) <= 1e-6
    f = sol.wrenches[0]
    vertical = f[12 + 2] + f[15 + 2]  # the two 3-D grasp forces after the two 6-D mounts
    assert abs(-vertical - mass * G) <= 1e-6
    if mass == 5.0:
        assert abs(-vertical - 49.05) <= 1e-6


def test_doubling_load_doubles_grasp_force():
    p5, sc = arm_case(5.0)
    p10, _ = arm_case(10.0)
    a, b = solve(p5, sc.solver), solve(p10, sc.solver)
    za, zb = a.wrenches[0, [14, 17]], b.wrenches[0, [14, 17]]
    assert np.allclose(zb, 2 * za, atol=1e-8)
    assert abs(b.tau_human[0, 0] - _arm_torque(p10, 10.0)) <= 1e-8


def test_weak_robot_motor_cannot_hold_the_load():
    motor = {"id": "unit", "inv_gear_ratio": 1.0, "rotor_inertia": 1e-4, "torque_min": -5.0, "torque_max": 5.0}
    problem, _ = arm_case(5.0, motor=motor)
    sol = solve(problem, SolverOptions(restarts=0, max_iter=100))
    assert sol.status != "solved"
    assert sol.max_violation > 1e-6


def test_gear_ratio_scales_motor_torque():
    motor = {"id": "unit", "inv_gear_ratio": 10.0, "rotor_inertia": 1e-4, "torque_min": -50.0, "torque_max": 50.0}
    problem, sc = arm_case(5.0, motor=motor)
    sol = solve(problem, sc.solver)
    assert sol.solved
    # joint torque = inv_gear_ratio * motor torque
    assert abs(10.0 * sol.tau_robot[0, 0] - _arm_torque(problem, 5.0)) <= 1e-6
    assert np.allclose(problem.motor_bounds, ([-5.0], [5.0]))


# toy scene round trip --------------------------------------------------------------


def test_toy_scene_solves_within_budget(toy):
    problem, sol, elapsed, _ = toy
    assert sol.status == "solved"
    assert elapsed <= 60.0
    assert sol.max_violation <= 1e-6
    assert problem.system.human.n_joints <= 6 and problem.system.robot.n_joints <= 6
    assert len(sol.heights) == 3


def test_toy_scene_residual_round_trip(toy):
    problem, sol, _, _ = toy
    for k in range(3):
        tau = np.concatenate([sol.tau_human[k], sol.tau_robot[k]])
        r = composite_static_residual(problem.system, None, [sol.q_human[k], sol.q_robot[k], sol.q_load[k]], tau, sol.wrenches[k])
        assert np.max(np.abs(r)) <= 1e-6


def test_toy_scene_every_family_reverified(toy):
    problem, sol, _, _ = toy
    assert set(sol.violations) >= {"dynamics", "grasp_position", "friction", "torque_limits", "symmetry", "foot_xy", "load_xy"}
    assert all(v <= 1e-6 for v in sol.violations.values())
    assert sol.violations["friction"] == 0.0
    assert sol.violations["torque_limits"] == 0.0
    assert sol.violations["joint_limits"] == 0.0


def test_toy_scene_symmetry_and_stationarity(toy):
    problem, sol, _, _ = toy
    for a, q in enumerate((sol.q_human, sol.q_robot)):
        A = problem.models[a].symmetry_matrix()
        if len(A):
            assert np.max(np.abs(q[:, 7:] @ A.T)) <= 1e-8
    trees = problem.trees
    load_xy = [forward_kinematics(trees[2], None, sol.q_load[k], "box")[0][:2] for k in range(3)]
    assert np.max(np.ptp(load_xy, axis=0)) <= 1e-8
    for c in problem.system.contacts:
        if c.kind == "environment":
            a = int(c.owner) - 1
            q = (sol.q_human, sol.q_robot)[a]
            feet = [forward_kinematics(trees[a], None, q[k], c.frame)[0] for k in range(3)]
            assert np.max(np.ptp(feet, axis=0)) <= 1e-8
            assert max(abs(p[2]) for p in feet) <= 1e-8


def test_toy_scene_torque_bounds_and_normal_forces(toy):
    problem, sol, _, _ = toy
    tmin, tmax = problem.motor_bounds
    assert np.all(sol.tau_robot >= tmin) and np.all(sol.tau_robot <= tmax)
    for c, sl in zip(problem.system.contacts, problem.system.wrench_slices()):
        if c.kind == "environment":
            assert np.all(sol.wrenches[:, sl][:, 2] >= 0.0)


def test_costs_recomputed_from_record(toy):
    problem, sol, _, sc = toy
    cb = evaluate_costs(sol, sc.weights)
    assert abs(cb.objective - sol.objective) <= 1e-8 * max(1.0, abs(sol.objective))
    assert cb.torque.shape == (3,) and cb.posture.shape == (3,) and cb.smoothness.shape == (2,)
    back = PostureSolution.from_dict(sol.to_dict())
    assert evaluate_costs(back, sc.weights).objective == cb.objective
    for name in ("q_human", "q_robot", "q_load", "tau_human", "tau_robot", "wrenches"):
        assert np.array_equal(getattr(back, name), getattr(sol, name))


def test_cost_terms_trivial_cases(toy):
    _, sol, _, _ = toy
    s = PostureSolution.from_dict(sol.to_dict())
    s.tau_human[:] = 0.0
    s.tau_robot[:] = 0.0
    s.q_human[:, 7:] = s.reference_postures[0]
    s.q_robot[:, 7:] = s.reference_postures[1]
    for q in (s.q_human, s.q_robot, s.q_load):
        q[:] = q[0]
    cb = evaluate_costs(s)
    assert not np.any(cb.torque) and not np.any(cb.posture) and not np.any(cb.smoothness)
    pure = evaluate_costs(sol, CostWeights(1.0, 0.0, 0.0))
    assert pure.objective == pytest.approx(np.sum(sol.weighted_torques**2), rel=1e-12)


def test_single_height_has_no_smoothness_term():
    problem, sc = arm_case()
    sol = solve(problem, sc.solver)
    cb = evaluate_costs(sol, sc.weights)
    assert cb.smoothness.shape == (0,)
    assert cb.objective == pytest.approx(sc.weights.torque * cb.torque.sum() + sc.weights.posture * cb.posture.sum(), rel=1e-12)


def test_unsolved_costs_raise():
    sc = load_scenario(DATA / "scenarios" / "unreachable.json")
    case = sc.cases()[0]
    sol = solve(StaticPostureProblem(case.system, case.task), sc.solver)
    assert sol.status == "infeasible"
    assert "reach" in sol.message and sol.max_violation > 1e-6
    with pytest.raises(ContractError):
        evaluate_costs(sol)


def test_solve_is_deterministic_and_normalizes_start():
    problem, sc = arm_case()
    a, b = solve(problem, sc.solver), solve(problem, sc.solver)
    assert np.array_equal(a.tau_bar, b.tau_bar) and np.array_equal(a.wrenches, b.wrenches)
    x0 = initial_guess(problem)
    for r in (1, 2, 3):
        x0[problem.q_index(0, r)[3:7]] *= 3.0
    c = solve(problem, sc.solver, x0=x0)
    assert c.solved
    assert abs(np.linalg.norm(c.q_load[0, 3:7]) - 1.0) <= 1e-9


def test_iteration_cap_reports_max_iterations():
    problem, sc = arm_case(10.0)
    sol = solve(problem, SolverOptions(max_iter=2, restarts=0))
    assert sol.status == "max-iterations"
    assert sol.attempts == 1


def test_pinned_stance_holds_in_solution():
    sc = load_scenario(DATA / "scenarios" / "desk.json")
    case = sc.cases()[0]
    problem = StaticPostureProblem(case.system, case.task, HardwareParams.nominal(sc.robot), sc.weights)
    sol = solve(problem, sc.solver)
    assert sol.solved
    for a, role in enumerate(("human", "robot")):
        q = (sol.q_human, sol.q_robot)[a]
        feet = [c.frame for c in case.system.contacts if c.kind == "environment" and c.owner.label == role]
        centroid = np.mean([forward_kinematics(problem.trees[a], None, q[0], f)[0][:2] for f in feet], axis=0)
        assert np.allclose(centroid, case.task.placement(role).xy, atol=1e-8)
