import numpy as np
import pytest

from ergocodesign.statics.ipm import IPMOptions, solve_nlp

from nlp_cases import HS071_OBJECTIVE, HS071_SOLUTION, bounded_qp, hs071, infeasible, redundant_equalities, rosenbrock


def test_hs071_reference_optimum():
    nlp, x0 = hs071()
    res = solve_nlp(nlp, x0)
    assert res.status == "solved"
    assert res.objective == pytest.approx(HS071_OBJECTIVE, abs=1e-6)
    assert np.allclose(res.x, HS071_SOLUTION, atol=1e-6)


def test_rosenbrock_unconstrained():
    nlp, x0 = rosenbrock()
    res = solve_nlp(nlp, x0)
    assert res.status == "solved"
    assert np.allclose(res.x, [1.0, 1.0], atol=1e-6)


def test_redundant_equalities_are_tolerated():
    # KKT by hand: x = (a, 1 - a, a) minimizes 2a^2 + (1 - a)^2 at a = 1/3
    nlp, x0 = redundant_equalities()
    res = solve_nlp(nlp, x0)
    assert res.status == "solved"
    assert np.allclose(res.x, [1 / 3, 2 / 3, 1 / 3], atol=1e-7)


def test_bounded_qp_active_set():
    # optimum (1.5, 0): x1 >= 0 and x0 + x1 <= 1.5 active, multipliers 5 and 3
    nlp, x0 = bounded_qp()
    res = solve_nlp(nlp, x0)
    assert res.status == "solved"
    assert np.allclose(res.x, [1.5, 0.0], atol=1e-7)
    assert res.objective == pytest.approx(3.25, abs=1e-7)
    assert res.lam_ineq[0] == pytest.approx(3.0, abs=1e-5)


def test_infeasible_problem_is_reported():
    nlp, x0 = infeasible()
    res = solve_nlp(nlp, x0)
    assert res.status == "infeasible"
    assert res.constraint_violation > 1e-3


def test_iteration_cap():
    nlp, x0 = rosenbrock()
    res = solve_nlp(nlp, x0, IPMOptions(max_iter=2))
    assert res.status == "max_iterations"
    assert res.iterations == 2


def test_start_outside_bounds_is_projected():
    nlp, _ = bounded_qp()
    res = solve_nlp(nlp, np.array([10.0, -5.0]))
    assert res.status == "solved"
    assert np.allclose(res.x, [1.5, 0.0], atol=1e-7)
