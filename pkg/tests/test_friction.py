import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergocodesign.errors import ContractError
from ergocodesign.model.geometry import axis_angle_rotation
from ergocodesign.statics.friction import FrictionModel

COP = (-0.08, 0.12, -0.05, 0.05)
vals = st.floats(-200, 200, allow_nan=False)


def test_pure_normal_force_is_admissible():
    fm = FrictionModel(0.7, COP)
    assert fm.admissible(np.array([0, 0, 100.0, 0, 0, 0]))


def test_pulling_contact_is_rejected():
    fm = FrictionModel(0.7, COP, margin=0.0)
    assert not fm.admissible(np.array([0, 0, -1.0, 0, 0, 0]))


def test_pyramid_edge():
    # |fx| <= mu / sqrt(2) fz is tight at the facet
    fm = FrictionModel(0.7, None, margin=0.0)
    a = 0.7 / np.sqrt(2.0)
    assert fm.admissible(np.array([a * 10.0, 0, 10.0]))
    assert not fm.admissible(np.array([a * 10.0 + 1e-9, 0, 10.0]))


def test_cop_at_rectangle_corner():
    fm = FrictionModel(0.7, COP, torsion=0.0, margin=0.0)
    fz = 50.0
    # CoP (x, y) = (-my / fz, mx / fz) at the front-left corner
    w = np.array([0, 0, fz, 0.05 * fz, -0.12 * fz, 0.0])
    assert fm.admissible(w)
    w[4] -= 1e-6
    assert not fm.admissible(w)


def test_default_torsion_coefficient():
    assert FrictionModel(0.5, COP).torsion_coefficient == pytest.approx(0.5 * 0.05)


@settings(max_examples=200, deadline=None)
@given(fx=vals, fy=vals, fz=st.floats(0, 400), mx=vals, my=vals, mz=vals)
def test_admissible_set_is_inner_approximation(fx, fy, fz, mx, my, mz):
    fm = FrictionModel(0.7, COP, margin=0.0)
    w = np.array([fx, fy, fz, mx / 10, my / 10, mz / 10])
    if fm.admissible(w):
        assert np.hypot(fx, fy) <= 0.7 * fz + 1e-9
        if fz > 0:
            x, y = -w[4] / fz, w[3] / fz
            assert COP[0] - 1e-9 <= x <= COP[1] + 1e-9 and COP[2] - 1e-9 <= y <= COP[3] + 1e-9


@settings(max_examples=50, deadline=None)
@given(angle=st.floats(-np.pi, np.pi), fz=st.floats(1, 100), fx=st.floats(-30, 30))
def test_world_rows_are_rotation_equivariant(angle, fz, fx):
    fm = FrictionModel(0.7, COP)
    R = axis_angle_rotation(np.array([0.0, 0.0, 1.0]), np.asarray(angle))
    local = np.array([fx, 0.0, fz, 0.0, 0.0, 0.0])
    world = np.concatenate([R @ local[:3], R @ local[3:]])
    C, b = fm.world_rows(R)
    Cl, bl = fm.local_rows()
    assert np.allclose(C @ world, Cl @ local, atol=1e-9)


@pytest.mark.parametrize("kwargs", [dict(mu=0.0), dict(mu=0.5, cop=(0.1, 0.2, -0.1, 0.1)), dict(mu=0.5, facets=8)])
def test_invalid_friction_models(kwargs):
    with pytest.raises(ContractError):
        FrictionModel(**kwargs)
