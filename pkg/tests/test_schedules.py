import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from lowrank_aqc.instances import gus_instance
from lowrank_aqc.reduction import build
from lowrank_aqc.schedules import (DiabaticJump, Linear, PiecewiseConstant, ScheduleError, SmoothTable,
                                   diabatic_jump, kappa_floor_check, linear, schedule_from_dict)


def test_linear():
    f = linear()
    assert f.value(0.5) == 0.5
    assert f.kappa == 1
    assert kappa_floor_check(f, 1.0)
    assert float(f.h(1.0)) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("E_F,alpha", [(-1.0, 0.5), (-0.5, 2 / 3)])
def test_diabatic_jump_alpha(E_F, alpha):
    assert diabatic_jump(E_F).alpha == pytest.approx(alpha, abs=1e-15)


def test_diabatic_jump_rejects_nonnegative_energy():
    for E_F in (0.0, 0.3):
        with pytest.raises(ScheduleError):
            diabatic_jump(E_F)


def test_jump_boundary_values_and_slope():
    f = diabatic_jump(-1.0)
    assert f.value(0.0) == 0.0 and f.value(1.0) == 1.0
    assert f.value(0.3) == 0.5
    assert not kappa_floor_check(f, 0.01)


def test_square_fails_kappa():
    f = SmoothTable.from_function(lambda s: s ** 2)
    assert not kappa_floor_check(f, 0.5)


def test_nonmonotone_rejected():
    with pytest.raises(ScheduleError):
        SmoothTable([0, 0.5, 1], [0, 0.7, 0.4])
    with pytest.raises(ScheduleError):
        SmoothTable([0, 0.5, 1], [0.1, 0.5, 1.0])
    with pytest.raises(ScheduleError):
        PiecewiseConstant([0, 0.5, 1], [0.6, 0.2])


def test_kappa_check_rejects_bad_kappa():
    with pytest.raises(ScheduleError):
        kappa_floor_check(linear(), 0.0)


def test_jump_operator_identity():
    # with H_I = -P_I, (1 - alpha) A_I + alpha A_F = alpha (E_F P_I + A_F)
    rs = build(*gus_instance(10**6, 3)[:3])
    a = diabatic_jump(rs.E_F).alpha
    lhs = rs.hamiltonian(a)
    rhs = a * (rs.E_F * rs.P_I + rs.A_F)
    assert np.abs(lhs - rhs).max() <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_tables_are_valid_schedules(seed):
    f = SmoothTable.random(np.random.default_rng(seed))
    s = np.linspace(0, 1, 2001)
    v = f.value(s)
    assert v[0] == 0.0 and v[-1] == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.diff(v) >= -1e-14)
    assert np.all(f.derivative(s) >= -1e-12)
    # h is the antiderivative of 1 - f
    x = float(np.random.default_rng(seed).uniform())
    knots = [b for b in f.breaks if 0 < b < x]
    ref = quad(lambda r: 1 - float(f.value(r)), 0, x, points=knots or None, epsabs=1e-14, epsrel=1e-14)[0]
    assert float(f.h(x)) == pytest.approx(ref, abs=1e-12)


def test_piecewise_h():
    f = PiecewiseConstant([0, 0.25, 1], [0.2, 0.6])
    assert float(f.h(1.0)) == pytest.approx(0.25 * 0.8 + 0.75 * 0.4)


def test_table_roundtrip(tmp_path):
    p = tmp_path / "f.txt"
    np.savetxt(p, np.column_stack([np.linspace(0, 1, 5), np.linspace(0, 1, 5) ** 2]))
    f = SmoothTable.load(p)
    g = schedule_from_dict(f.to_dict())
    s = np.linspace(0, 1, 101)
    assert np.array_equal(f.value(s), g.value(s))
    for d in (Linear().to_dict(), DiabaticJump(0.3).to_dict(), PiecewiseConstant([0, 0.5, 1], [0.1, 0.9]).to_dict()):
        assert schedule_from_dict(d).to_dict() == d
