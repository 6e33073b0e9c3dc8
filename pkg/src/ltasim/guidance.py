"""
Single-beacon navigation: heading setpoints from light measurements.

BAG
    Bearing from the intensity-weighted mean of the photodiode ring
    directions.
DES
    Dither extremum seeking on one sensor: a sinusoidal heading dither,
    high-pass filtered intensity, demodulation and integration.
DGA
    Dither-free gradient ascent: a plane fitted to dead-reckoned
    (position, intensity) history, steering along its gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import wrap_angle
from .errors import DegenerateGeometry, DegenerateVector, NoSignal, ValidationError


@dataclass(frozen=True)
class GuidanceCommand:
    desired_yaw: float
    forward_speed: float
    altitude: float
    halt: bool = False

    def __post_init__(self):
        object.__setattr__(self, "desired_yaw", wrap_angle(self.desired_yaw))


# ---------------------------------------------------------------------------
# BAG
# ---------------------------------------------------------------------------

def bag_vector(readings, array):
    """Weighted mean direction over detected sensors (body frame, 2-vector)."""
    mags = np.array([r.peak_magnitude if r.detected else 0.0 for r in readings])
    if not np.any([r.detected for r in readings]):
        raise NoSignal("no photodiode above the detection threshold")
    total = mags.sum()
    if total <= 0:
        raise NoSignal("detected sensors carry no magnitude")
    a = array.angles
    return np.array([np.dot(mags, np.cos(a)), np.dot(mags, np.sin(a))]) / total


def bag_bearing(readings, array, current_yaw=0.0, eps=1e-9):
    """World-frame yaw setpoint towards the light.

    The body-relative bearing ``atan2(v_y, v_x)`` is added to the current
    yaw. With ``current_yaw = 0`` the result is the body-relative bearing.

    Raises
    ------
    NoSignal
        No sensor cleared the detection threshold.
    DegenerateVector
        The weighted vector is shorter than ``eps`` (balanced illumination).
    """
    v = bag_vector(readings, array)
    if math.hypot(v[0], v[1]) < eps:
        raise DegenerateVector("bearing vector cancels out")
    return wrap_angle(current_yaw + math.atan2(v[1], v[0]))


# ---------------------------------------------------------------------------
# DES
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DitherConfig:
    amplitude: float = 1.4          # rad
    frequency: float = 0.4          # rad/s
    highpass_cutoff: float = None   # Hz, default frequency / (2 pi * 5)
    gain: float = 3.0               # 1/s
    initial_heading: float = 0.0    # rad
    demod_phase: float = 0.0        # rad, lag between dither and intensity response
    normalize: bool = False         # divide the high-passed signal by a running mean of J
    normalize_cutoff: float = 0.05  # Hz

    def __post_init__(self):
        if self.amplitude < 0 or self.frequency <= 0 or self.gain < 0:
            raise ValidationError("dither needs amplitude >= 0, frequency > 0, gain >= 0", "dither")
        if self.highpass_cutoff is None:
            object.__setattr__(self, "highpass_cutoff", self.frequency / (2 * math.pi * 5))
        if self.highpass_cutoff <= 0:
            raise ValidationError("highpass cutoff must be positive", "dither.highpass_cutoff")


@dataclass(frozen=True)
class DesState:
    theta_hat: float
    prev_j: float = math.nan
    hp_out: float = 0.0
    j_mean: float = math.nan

    @classmethod
    def initial(cls, config):
        return cls(theta_hat=config.initial_heading)


def _alpha_highpass(cutoff, dt):
    tau = 1.0 / (2 * math.pi * cutoff)
    return tau / (tau + dt)


def des_step(J, t, config, state, dt):
    """One extremum-seeking update.

    Returns ``(psi_d, new_state)`` with ``psi_d = theta_hat + a cos(w t)``.
    The estimate moves by ``k * xi * cos(w t - phase) * dt`` where ``xi``
    is the high-passed intensity. On the first call the filter is primed
    with ``J`` so a constant field produces no drift.
    """
    if math.isnan(state.prev_j):
        prev_j, hp = J, 0.0
        j_mean = J
    else:
        prev_j, hp = state.prev_j, state.hp_out
        beta = dt / (1.0 / (2 * math.pi * config.normalize_cutoff) + dt)
        j_mean = state.j_mean + beta * (J - state.j_mean)
    alpha = _alpha_highpass(config.highpass_cutoff, dt)
    xi = alpha * (hp + J - prev_j)
    signal = xi / abs(j_mean) if (config.normalize and j_mean != 0) else xi
    wt = config.frequency * t
    theta = state.theta_hat + config.gain * signal * math.cos(wt - config.demod_phase) * dt
    psi = theta + config.amplitude * math.cos(wt)
    return wrap_angle(psi), DesState(theta, J, xi, j_mean)


# ---------------------------------------------------------------------------
# DGA
# ---------------------------------------------------------------------------

def dead_reckon(prev, speed, heading, dt):
    """Advance a 2-D position estimate along ``heading`` at ``speed``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return np.asarray(prev, dtype=float) + speed * dt * np.array([math.cos(heading), math.sin(heading)])


@dataclass(frozen=True)
class GradientHistory:
    """Last ``capacity`` (position, intensity) pairs plus the current estimate."""

    capacity: int = 20
    points: tuple = ()
    position: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        if self.capacity < 3:
            raise ValidationError("history capacity must be at least 3", "dga.window")
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))

    def append(self, position, J):
        pts = self.points + ((tuple(np.asarray(position, dtype=float)), float(J)),)
        return replace(self, points=pts[-self.capacity:], position=np.asarray(position, dtype=float))

    def arrays(self):
        xy = np.array([p for p, _ in self.points], dtype=float).reshape(-1, 2)
        j = np.array([v for _, v in self.points], dtype=float)
        return xy, j

    def __len__(self):
        return len(self.points)


COLLINEAR_TOL = 0.02
COINCIDENT_TOL = 1e-6


def _spread(xy):
    centered = xy - xy.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    return centered, s, vt


def fit_plane(history, collinear_tol=COLLINEAR_TOL):
    """Gradient (a, b) of the least-squares plane J = a x + b y + c.

    Raises
    ------
    DegenerateGeometry
        Fewer than three points, or the points are coincident or collinear
        (smaller singular value of the centred positions below
        ``collinear_tol`` times the larger one).
    """
    xy, j = history.arrays()
    if len(j) < 3:
        raise DegenerateGeometry(f"plane fit needs 3 points, have {len(j)}")
    _, s, _ = _spread(xy)
    if s[0] < COINCIDENT_TOL:
        raise DegenerateGeometry("history points coincide")
    if s[1] < collinear_tol * s[0]:
        raise DegenerateGeometry("history points are collinear")
    A = np.column_stack([xy, np.ones(len(j))])
    coef, *_ = np.linalg.lstsq(A, j, rcond=None)
    return float(coef[0]), float(coef[1])


def along_track_gradient(history):
    """Gradient restricted to the principal direction of a collinear history.

    Returns the minimum-norm 2-D gradient consistent with the data, which
    points along the track (forwards or backwards). Raises
    DegenerateGeometry when the points coincide.
    """
    xy, j = history.arrays()
    if len(j) < 2:
        raise DegenerateGeometry("need at least two points")
    centered, s, vt = _spread(xy)
    if s[0] < COINCIDENT_TOL:
        raise DegenerateGeometry("history points coincide")
    direction = vt[0]
    s_along = centered @ direction
    jc = j - j.mean()
    slope = float(np.dot(s_along, jc) / np.dot(s_along, s_along))
    return slope * direction[0], slope * direction[1]


def fit_plane_legs(xy, J, leg_ids, min_separation=0.2):
    """Plane gradient over straight legs, one intercept per leg.

    Only the variation of ``J`` along each leg informs the gradient, so a
    position or intensity jump between legs (dead-reckoning slip during a
    turn, field curvature across the turn) does not bias it. Needs at least
    two legs whose directions differ by ``min_separation`` radians.

    Parameters
    ----------
    xy : (n, 2) array
    J : (n,) array
    leg_ids : (n,) array of int

    Returns
    -------
    (a, b)
    """
    xy = np.asarray(xy, dtype=float)
    J = np.asarray(J, dtype=float)
    leg_ids = np.asarray(leg_ids)
    legs = np.unique(leg_ids)
    if len(legs) < 2:
        raise DegenerateGeometry("need two legs")
    dirs = []
    for leg in legs:
        p = xy[leg_ids == leg]
        if len(p) < 2:
            raise DegenerateGeometry(f"leg {leg} has fewer than two points")
        d = p[-1] - p[0]
        n = math.hypot(*d)
        if n < COINCIDENT_TOL:
            raise DegenerateGeometry(f"leg {leg} has no extent")
        dirs.append(d / n)
    dirs = np.array(dirs)
    sep = np.abs(dirs[:, 0, None] * dirs[None, :, 1] - dirs[:, 1, None] * dirs[None, :, 0]).max()
    if sep < math.sin(min_separation):
        raise DegenerateGeometry("legs are parallel")
    onehot = (leg_ids[:, None] == legs[None, :]).astype(float)
    A = np.column_stack([xy - xy.mean(axis=0), onehot])
    coef, *_ = np.linalg.lstsq(A, J, rcond=None)
    return float(coef[0]), float(coef[1])


@dataclass(frozen=True)
class DgaState:
    history: GradientHistory
    heading: float
    fits: int = 0
    fallbacks: int = 0


def dga_step(J, heading_estimate, speed, state, dt, collinear_tol=COLLINEAR_TOL):
    """Append the dead-reckoned sample and steer up the fitted gradient.

    ``heading_estimate`` is the measured yaw over the last interval and
    ``speed`` the commanded forward speed. When the history is collinear
    the along-track gradient is used; when it is coincident (or has fewer
    than two points) the previous heading is held.

    Returns ``(psi_d, new_state)``.
    """
    hist = state.history
    if len(hist):
        pos = dead_reckon(hist.position, speed, heading_estimate, dt)
    else:
        pos = hist.position
    hist = hist.append(pos, J)
    try:
        a, b = fit_plane(hist, collinear_tol)
        fits, fallbacks = state.fits + 1, state.fallbacks
    except DegenerateGeometry:
        try:
            a, b = along_track_gradient(hist)
        except DegenerateGeometry:
            return state.heading, replace(state, history=hist)
        fits, fallbacks = state.fits, state.fallbacks + 1
    if a == 0 and b == 0:
        return state.heading, replace(state, history=hist, fits=fits, fallbacks=fallbacks)
    psi = wrap_angle(math.atan2(b, a))
    return psi, DgaState(hist, psi, fits, fallbacks)


# ---------------------------------------------------------------------------
# algorithm wrappers used by the scenario runner
# ---------------------------------------------------------------------------

class BagGuidance:
    name = "BAG"
    sensors = "ring"

    def __init__(self, array, forward_speed, altitude, initial_heading=0.0):
        self.array = array
        self.forward_speed = forward_speed
        self.altitude = altitude
        self.heading = initial_heading
        self.diag = {}

    def update(self, t, dt, yaw, readings, speed=None):
        try:
            self.heading = bag_bearing(readings, self.array, yaw)
        except NoSignal:
            self.diag = {"status": "no_signal"}
            return GuidanceCommand(self.heading, 0.0, self.altitude, halt=True)
        except DegenerateVector:
            self.diag = {"status": "degenerate"}
        else:
            self.diag = {"status": "ok"}
        return GuidanceCommand(self.heading, self.forward_speed, self.altitude)

    @staticmethod
    def intensity(readings):
        return max(r.peak_magnitude for r in readings)


class DesGuidance:
    """DES on one sensor; ``linearize`` runs it on ``-J**-0.5`` (see DgaGuidance)."""

    name = "DES"
    sensors = "single"

    def __init__(self, config, forward_speed, altitude, linearize=False):
        self.config = config
        self.linearize = linearize
        self.forward_speed = forward_speed
        self.altitude = altitude
        self.state = DesState.initial(config)
        self.diag = {}

    def update(self, t, dt, yaw, readings, speed=None):
        J = readings[0].peak_magnitude
        if self.linearize:
            J = -1.0 / math.sqrt(max(J, 1e-9))
        psi, self.state = des_step(J, t, self.config, self.state, dt)
        self.diag = {"theta_hat": self.state.theta_hat}
        return GuidanceCommand(psi, self.forward_speed, self.altitude)

    @staticmethod
    def intensity(readings):
        return readings[0].peak_magnitude


class DgaGuidance:
    """DGA flown as straight legs joined by corrective turns.

    Samples are dead-reckoned every guidance step, but a sample only joins
    the current leg once the yaw has settled within ``settle_tol`` of the
    committed heading. After ``leg`` settled samples the gradient is fitted
    over the last ``n_legs`` legs (:func:`fit_plane_legs`) and the next
    heading is committed ``probe_angle / 2`` to alternating sides of the
    estimate, so consecutive legs always cross at a usable angle. Until
    two legs exist the vehicle only zig-zags about its start heading.

    With ``linearize`` the fit runs on ``-J**-0.5`` rather than ``J``. For
    an inverse-square source this grows linearly with approach distance,
    so the planar model holds over a whole leg; its gradient points the
    same way as that of ``J``. Heading changes per commit are capped at
    ``max_turn``. With ``measured_speed`` dead reckoning integrates the
    measured forward speed passed to :meth:`update` instead of the
    commanded one; speed changes between legs otherwise rescale the leg
    slopes unevenly and rotate the estimate. While turning the commanded
    speed drops to ``turn_speed`` times the cruise speed.
    """

    name = "DGA"
    sensors = "single"

    def __init__(self, forward_speed, altitude, initial_heading=0.0, leg=10, n_legs=3, probe_angle=0.6,
                 settle_tol=0.1, max_turn=1.5, linearize=True, min_separation=0.2, measured_speed=True,
                 turn_speed=1.0):
        if leg < 2 or n_legs < 2:
            raise ValidationError("DGA needs leg >= 2 and n_legs >= 2", "dga")
        self.forward_speed = forward_speed
        self.altitude = altitude
        self.leg = leg
        self.n_legs = n_legs
        self.probe_angle = probe_angle
        self.settle_tol = settle_tol
        self.max_turn = max_turn
        self.linearize = linearize
        self.min_separation = min_separation
        self.measured_speed = measured_speed
        self.turn_speed = turn_speed
        self.heading = wrap_angle(initial_heading)
        self.position = np.zeros(2)
        self._last_yaw = None
        self._legs = []          # completed legs: list of (xy, J)
        self._current = []
        self._side = 1.0
        self.fits = 0
        self.diag = {}

    def _commit(self):
        self._legs = (self._legs + [self._current])[-self.n_legs:]
        self._current = []
        estimate = self.heading
        status = "probe"
        if len(self._legs) >= 2:
            xy = np.array([p for leg in self._legs for p, _ in leg])
            J = np.array([v for leg in self._legs for _, v in leg])
            ids = np.concatenate([[i] * len(leg) for i, leg in enumerate(self._legs)])
            try:
                a, b = fit_plane_legs(xy, J, ids, self.min_separation)
            except DegenerateGeometry:
                pass
            else:
                if a or b:
                    estimate = math.atan2(b, a)
                    status = "fit"
                    self.fits += 1
        self._side = -self._side
        target = estimate + self._side * self.probe_angle / 2
        turn = min(max(wrap_angle(target - self.heading), -self.max_turn), self.max_turn)
        self.heading = wrap_angle(self.heading + turn)
        return status, estimate

    def update(self, t, dt, yaw, readings, speed=None):
        J = self.intensity(readings)
        if self.linearize:
            J = -1.0 / math.sqrt(max(J, 1e-9))
        if self._last_yaw is not None:
            if self.measured_speed and speed is not None and np.ndim(speed):
                # body-frame (surge, sway) velocity: integrate with sideslip
                u, w = speed[0], speed[1]
                self.position = dead_reckon(self.position, math.hypot(u, w), self._last_yaw + math.atan2(w, u), dt)
            else:
                v = speed if self.measured_speed and speed is not None else self.forward_speed
                self.position = dead_reckon(self.position, v, self._last_yaw, dt)
        self._last_yaw = yaw
        status = "leg"
        if abs(wrap_angle(yaw - self.heading)) < self.settle_tol:
            self._current.append((self.position.copy(), J))
            if len(self._current) >= self.leg:
                status, estimate = self._commit()
                self.diag = {"status": status, "estimate": estimate, "fits": self.fits}
                return GuidanceCommand(self.heading, self.forward_speed, self.altitude)
        else:
            status = "turning"
        self.diag = {"status": status, "fits": self.fits}
        speed_cmd = self.forward_speed * (self.turn_speed if status == "turning" else 1.0)
        return GuidanceCommand(self.heading, speed_cmd, self.altitude)

    @staticmethod
    def intensity(readings):
        return readings[0].peak_magnitude
