import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltasim import optics
from ltasim.errors import DegenerateGeometry, DegenerateVector, NoSignal, ValidationError
from ltasim.guidance import (
    DesState,
    DgaGuidance,
    DgaState,
    DitherConfig,
    GradientHistory,
    bag_bearing,
    dead_reckon,
    des_step,
    dga_step,
    fit_plane,
    fit_plane_legs,
)
from ltasim.optics import SpectralReading


def readings(mags, threshold=3.0):
    return [SpectralReading(m, 32, 10.0 if m > 0 else 0.0, m > 0) for m in mags]


RING8 = optics.ring_array(8)


# --- BAG ----------------------------------------------------------------------

def test_bag_single_sensor():
    m = np.zeros(8)
    m[2] = 100.0
    assert bag_bearing(readings(m), RING8) == pytest.approx(math.pi / 2)


def test_bag_between_two_sensors():
    m = np.zeros(8)
    m[0] = m[1] = 50.0
    assert math.degrees(bag_bearing(readings(m), RING8)) == pytest.approx(22.5)


def test_bag_degenerate_and_no_signal():
    with pytest.raises(DegenerateVector):
        bag_bearing(readings(np.full(8, 10.0)), RING8)
    with pytest.raises(NoSignal):
        bag_bearing(readings(np.zeros(8)), RING8)


def test_bag_adds_current_yaw():
    m = np.zeros(8)
    m[1] = 1.0
    assert bag_bearing(readings(m), RING8, current_yaw=math.pi) == pytest.approx(-3 * math.pi / 4)


@given(st.lists(st.floats(0.1, 1000), min_size=8, max_size=8), st.floats(1e-3, 1e3))
def test_bag_scale_invariant(mags, k):
    try:
        a = bag_bearing(readings(mags), RING8)
    except DegenerateVector:
        return
    b = bag_bearing(readings(np.asarray(mags) * k), RING8)
    assert a == pytest.approx(b, abs=1e-9)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_bag_quantisation_bound(n):
    arr = optics.ring_array(n, noise_std=0.0, response_exponent=1.0, radius=0.0)
    b = optics.BeaconConfig(position=np.array([3.0, 0, 0]), boresight=np.array([-1.0, 0, 0]))
    from ltasim.dynamics import quat_from_euler

    for deg in np.arange(0, 360, 7.5):
        yaw = math.radians(deg)
        buf = optics.sample_frame([b], 0.0, arr, np.zeros(3), quat_from_euler(0, 0, yaw))
        est = bag_bearing(optics.demodulate(buf, arr, 150.0), arr, yaw)
        assert abs(math.degrees(math.remainder(est, 2 * math.pi))) <= 180.0 / n + 1e-9


# --- DES ----------------------------------------------------------------------

def run_des(field, cfg, seconds, dt=0.1):
    s = DesState.initial(cfg)
    psis, thetas = [], []
    for k in range(int(seconds / dt)):
        t = k * dt
        psi, s = des_step(field(s, t), t, cfg, s, dt)
        psis.append(psi)
        thetas.append(s.theta_hat)
    return np.array(psis), np.array(thetas)


def test_des_constant_field_is_stationary():
    cfg = DitherConfig(amplitude=0.5, frequency=0.4, gain=3.0, initial_heading=0.2)
    psis, thetas = run_des(lambda s, t: 123.0, cfg, 60.0)
    assert np.max(np.abs(thetas - 0.2)) < 1e-6
    assert np.max(psis) - 0.2 == pytest.approx(0.5, abs=1e-3)


def test_des_amplitude_scales():
    a1 = run_des(lambda s, t: 1.0, DitherConfig(amplitude=0.3, gain=0.0), 40.0)[0]
    a2 = run_des(lambda s, t: 1.0, DitherConfig(amplitude=0.6, gain=0.0), 40.0)[0]
    assert np.ptp(a2) == pytest.approx(2 * np.ptp(a1), rel=1e-3)


def test_des_climbs_quadratic_field():
    target = 1.0
    cfg = DitherConfig(amplitude=0.3, frequency=1.0, gain=2.0, initial_heading=0.0)
    state = {"psi": 0.0}

    def field(s, t):
        # J depends on the heading actually flown (previous command)
        return 10.0 - 3.0 * (state["psi"] - target) ** 2

    s = DesState.initial(cfg)
    thetas = []
    dt = 0.05
    for k in range(int(120 / dt)):
        t = k * dt
        psi, s = des_step(field(s, t), t, cfg, s, dt)
        state["psi"] = psi
        thetas.append(s.theta_hat)
    thetas = np.array(thetas)
    # one dither period per window
    w = int(round(2 * math.pi / cfg.frequency / dt))
    means = [abs(np.mean(thetas[i:i + w]) - target) for i in range(0, len(thetas) - w, w)]
    assert means[0] < abs(cfg.initial_heading - target)
    assert means[-1] < 0.05
    assert np.all(np.diff(means[:5]) < 0)


def test_dither_validation():
    with pytest.raises(ValidationError):
        DitherConfig(frequency=0.0)
    assert DitherConfig(frequency=1.0).highpass_cutoff == pytest.approx(1.0 / (2 * math.pi * 5))


# --- dead reckoning -----------------------------------------------------------

def test_dead_reckon_examples():
    assert np.array_equal(dead_reckon((1.0, 2.0), 0.0, 0.3, 1.0), [1.0, 2.0])
    assert np.allclose(dead_reckon((0, 0), 0.5, 0.0, 1.0), [0.5, 0.0])
    p = np.zeros(2)
    for h in (0, math.pi / 2, math.pi, 3 * math.pi / 2):
        p = dead_reckon(p, 1.0, h, 2.0)
    assert np.allclose(p, 0.0, atol=1e-12)


# --- plane fits ---------------------------------------------------------------

def history(points):
    h = GradientHistory()
    for x, y, j in points:
        h = h.append((x, y), j)
    return h


def test_fit_plane_exact():
    assert fit_plane(history([(0, 0, 0), (1, 0, 2), (0, 1, 0)])) == pytest.approx((2.0, 0.0))


@given(st.floats(-1e3, 1e3))
def test_fit_plane_offset_invariant(c):
    pts = [(0, 0, 1.0), (1, 0, 3.0), (0, 1, -0.5), (1, 1, 1.7)]
    a = fit_plane(history(pts))
    b = fit_plane(history([(x, y, j + c) for x, y, j in pts]))
    assert np.allclose(a, b, atol=1e-9)


def test_fit_plane_noisy_direction():
    rng = np.random.default_rng(0)
    xy = rng.uniform(-1, 1, (20, 2))
    j = 3.0 * xy[:, 0] - 2.0 * xy[:, 1]
    j = j + rng.normal(0, 0.01 * np.ptp(j), 20)
    a, b = fit_plane(history([(x, y, v) for (x, y), v in zip(xy, j)]))
    err = math.degrees(abs(math.remainder(math.atan2(b, a) - math.atan2(-2.0, 3.0), 2 * math.pi)))
    assert err < 5.0


def test_fit_plane_degenerate():
    with pytest.raises(DegenerateGeometry):
        fit_plane(history([(0, 0, 1), (1, 0, 2)]))
    with pytest.raises(DegenerateGeometry):
        fit_plane(history([(0, 0, 1), (1, 0, 2), (2, 0, 3)]))
    with pytest.raises(DegenerateGeometry):
        fit_plane(history([(0, 0, 1)] * 4))


def test_history_keeps_capacity():
    h = GradientHistory(capacity=5)
    for k in range(12):
        h = h.append((k, 0), k)
    assert len(h) == 5 and h.arrays()[1][0] == 7


def test_fit_plane_legs_ignores_leg_offsets():
    rng = np.random.default_rng(1)
    xy, j, ids = [], [], []
    for leg, ang in enumerate((0.3, -0.3, 0.3)):
        start = rng.uniform(-1, 1, 2)
        for s in np.linspace(0, 1, 6):
            p = start + s * np.array([math.cos(ang), math.sin(ang)])
            xy.append(p)
            j.append(2.0 * p[0] + 0.5 * p[1] + 10.0 * leg)  # per-leg jump
            ids.append(leg)
    a, b = fit_plane_legs(np.array(xy), np.array(j), np.array(ids))
    assert (a, b) == pytest.approx((2.0, 0.5))


def test_fit_plane_legs_parallel_is_degenerate():
    xy = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    with pytest.raises(DegenerateGeometry):
        fit_plane_legs(xy, np.arange(4.0), np.array([0, 0, 1, 1]))
    with pytest.raises(DegenerateGeometry):
        fit_plane_legs(xy, np.arange(4.0), np.zeros(4, dtype=int))


# --- dga_step -----------------------------------------------------------------

def drive(js, offset=0.0):
    s = DgaState(GradientHistory(), 0.0)
    psi = None
    for j in js:
        psi, s = dga_step(j + offset, 0.0, 0.5, s, 0.1)
    return psi, s


def test_dga_follows_increasing_intensity():
    psi, s = drive(np.linspace(1, 2, 10))
    assert psi == pytest.approx(0.0)
    assert s.fallbacks > 0


def test_dga_turns_around_on_decreasing_intensity():
    psi, _ = drive(np.linspace(2, 1, 10))
    assert abs(psi) == pytest.approx(math.pi)


@given(st.floats(-1e4, 1e4))
def test_dga_offset_invariant(c):
    js = [1.0, 1.3, 1.2, 1.8, 2.0]
    assert drive(js)[0] == pytest.approx(drive(js, c)[0], abs=1e-9)


def test_dga_holds_heading_without_history():
    s = DgaState(GradientHistory(), 0.7)
    psi, s = dga_step(1.0, 0.0, 0.5, s, 0.1)
    assert psi == 0.7


def test_dga_wrapper_validation():
    with pytest.raises(ValidationError):
        DgaGuidance(0.5, 0.5, leg=1)


@settings(max_examples=10, deadline=None)
@given(st.floats(-math.pi, math.pi))
def test_dga_wrapper_finds_gradient_in_plane_field(bearing):
    """Perfect heading tracking in a linear field: the fitted estimate matches the gradient."""
    g = DgaGuidance(0.5, 0.5, initial_heading=0.0, leg=5, n_legs=3, probe_angle=0.6, linearize=False)
    grad = np.array([math.cos(bearing), math.sin(bearing)])
    pos = np.zeros(2)
    yaw = 0.0
    for _ in range(200):
        cmd = g.update(0.0, 0.1, yaw, readings([100.0 + 5.0 * grad @ pos]), speed=0.5)
        pos = pos + 0.05 * np.array([math.cos(yaw), math.sin(yaw)])
        yaw = cmd.desired_yaw
    assert g.fits > 0
    assert abs(math.remainder(g.diag.get("estimate", g.heading) - bearing, 2 * math.pi)) < 0.5
