import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ltasim.errors import DimensionMismatch, DomainError, ValidationError
from ltasim.platforms import beavis, gt_mab
from ltasim.propulsion import (
    AllocationMatrix,
    Mixer,
    Rotor,
    ThrustCurve,
    allocate,
    gt_mab_allocation,
    max_vertical_force,
    pwm_to_thrust,
    thrust_to_pwm,
)


def test_pwm_to_thrust_hand_values():
    assert pwm_to_thrust(0.0) == 0.0
    assert pwm_to_thrust(1.0) == pytest.approx(0.1592)
    assert pwm_to_thrust(0.5) == pytest.approx(0.056725)


def test_thrust_to_pwm_hand_values():
    assert thrust_to_pwm(0.0) == 0.0
    assert thrust_to_pwm(0.1592) == pytest.approx(1.0)


def test_domain_errors():
    with pytest.raises(DomainError):
        pwm_to_thrust(1.2)
    with pytest.raises(DomainError):
        thrust_to_pwm(-0.01)
    with pytest.raises(ValidationError):
        ThrustCurve(-1.0, 0.1)
    with pytest.raises(ValidationError):
        Rotor((0, 0, 0), (1.0, 1.0, 0.0))


def test_round_trip_on_random_thrusts():
    rng = np.random.default_rng(0)
    for f in rng.uniform(0, 0.1592, 100):
        assert pwm_to_thrust(thrust_to_pwm(f)) == pytest.approx(f, abs=1e-12)


@given(st.floats(0, 1), st.floats(0, 1))
def test_pwm_curve_monotone(a, b):
    if a < b:
        assert pwm_to_thrust(a) < pwm_to_thrust(b)


def test_allocate_cases():
    B = gt_mab_allocation()
    assert np.allclose(allocate(np.zeros(4), B).as_vector(), 0.0)
    for j in range(4):
        t = np.zeros(4)
        t[j] = 1.0
        assert np.allclose(allocate(t, B).as_vector(), B.B[:, j])
    full = np.array([0, 0, 1, 1]) * ThrustCurve().max_thrust
    assert allocate(full, B).force[2] == pytest.approx(0.62)
    with pytest.raises(DimensionMismatch):
        allocate(np.zeros(3), B)
    with pytest.raises(DomainError):
        allocate(-np.ones(4), B)


@given(st.lists(st.floats(0, 1), min_size=8, max_size=8), st.floats(0, 3), st.floats(0, 3))
def test_allocate_linear(vals, a, b):
    B = gt_mab_allocation()
    t1, t2 = np.array(vals[:4]), np.array(vals[4:])
    lhs = allocate(a * t1 + b * t2, B).as_vector()
    rhs = a * allocate(t1, B).as_vector() + b * allocate(t2, B).as_vector()
    assert np.allclose(lhs, rhs)


def test_platform_vertical_caps():
    assert max_vertical_force(gt_mab().allocation) == pytest.approx(0.62)
    assert max_vertical_force(beavis().allocation) == pytest.approx(0.05)
    # vertical rotors dominate force-z on GT-MAB
    B = gt_mab().allocation.B
    assert np.all(np.abs(B[2, 2:]) > np.abs(B[0, 2:]))


def test_allocation_matrix_validation():
    with pytest.raises(ValidationError):
        AllocationMatrix(np.zeros((5, 4)))
    with pytest.raises(ValidationError):
        AllocationMatrix(np.full((6, 2), np.nan))


def test_mixer_exact_when_feasible_and_bounded_otherwise():
    p = gt_mab()
    mix = Mixer(p.allocation, p.thrust_curve.max_thrust)
    t, sat = mix.thrusts([0.05, 0.1, 0.0])
    assert not sat
    w = p.allocation.B @ t
    assert np.allclose(w[[0, 2, 5]], [0.05, 0.1, 0.0])
    t, sat = mix.thrusts([5.0, 5.0, 1.0])
    assert sat
    assert np.all(t >= 0) and np.all(t <= p.thrust_curve.max_thrust)
