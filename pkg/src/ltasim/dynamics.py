"""
Rigid-body dynamics for a buoyant hull.

Newton-Euler equations about the envelope centre (the geometric reference
point O), written in the body frame::

    M nu_dot = F_restoring + F_propulsion + F_damping + F_coriolis

with nu = [v, w] the body-frame linear and angular velocity. M is the 6x6
rigid-body mass matrix about O, including the coupling introduced by a
centre of gravity that does not coincide with O, plus an optional diagonal
added-mass term.

Frames
------
World: x, y horizontal, z up. Body: x forward, y left, z up.
Attitude is a unit quaternion [w, x, y, z] rotating body vectors into the
world frame. Euler angles (roll, pitch, yaw; ZYX order) only appear at the
I/O boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from .errors import NonFiniteState, ValidationError

GRAVITY = 9.81


# ---------------------------------------------------------------------------
# quaternion helpers
# ---------------------------------------------------------------------------

def quat_multiply(p, q):
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.array([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ])


def quat_to_matrix(q):
    """Rotation matrix taking body vectors to the world frame."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_euler(roll, pitch, yaw):
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    return np.array([
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ])


def euler_from_quat(q):
    """Return (roll, pitch, yaw) in radians, ZYX convention."""
    w, x, y, z = q
    roll = math.atan2(2 * (w * x + y * z), 1 - 2 * (x * x + y * y))
    s = max(-1.0, min(1.0, 2 * (w * y - z * x)))
    pitch = math.asin(s)
    yaw = math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))
    return roll, pitch, yaw


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    a = math.fmod(angle + math.pi, 2 * math.pi)
    if a <= 0:
        a += 2 * math.pi
    return a - math.pi


def cross3(a, b):
    """3-vector cross product; np.cross carries heavy per-call overhead."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def skew(r):
    return np.array([[0.0, -r[2], r[1]], [r[2], 0.0, -r[0]], [-r[1], r[0], 0.0]])


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BodyState:
    """Full 6-DoF kinematic state.

    position is world-frame, velocities are body-frame, attitude rotates
    body to world.
    """

    position: np.ndarray
    attitude: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray
    time: float = 0.0

    @classmethod
    def at_rest(cls, position=(0.0, 0.0, 0.0), yaw=0.0, pitch=0.0, roll=0.0, time=0.0):
        return cls(
            position=np.asarray(position, dtype=float),
            attitude=quat_from_euler(roll, pitch, yaw),
            linear_velocity=np.zeros(3),
            angular_velocity=np.zeros(3),
            time=float(time),
        )

    @classmethod
    def from_vector(cls, x, time):
        return cls(x[0:3].copy(), x[3:7].copy(), x[7:10].copy(), x[10:13].copy(), time)

    def as_vector(self):
        return np.concatenate(
            [self.position, self.attitude, self.linear_velocity, self.angular_velocity]
        )

    @property
    def velocity6(self):
        return np.concatenate([self.linear_velocity, self.angular_velocity])

    @property
    def rotation(self):
        return quat_to_matrix(self.attitude)

    @property
    def euler(self):
        return euler_from_quat(self.attitude)

    @property
    def yaw(self):
        return self.euler[2]

    @property
    def world_velocity(self):
        return self.rotation @ self.linear_velocity


@dataclass(frozen=True)
class InertiaModel:
    """Mass properties about the envelope centre.

    inertia_tensor is taken about the reference point, not the centre of
    gravity.
    """

    mass: float
    inertia_tensor: np.ndarray
    added_mass_diagonal: np.ndarray = field(default_factory=lambda: np.zeros(6))
    cg_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    cb_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "inertia_tensor", np.asarray(self.inertia_tensor, dtype=float))
        object.__setattr__(self, "added_mass_diagonal", np.asarray(self.added_mass_diagonal, dtype=float))
        object.__setattr__(self, "cg_offset", np.asarray(self.cg_offset, dtype=float))
        object.__setattr__(self, "cb_offset", np.asarray(self.cb_offset, dtype=float))
        if not self.mass > 0:
            raise ValidationError("mass must be positive", "inertia.mass")
        inertia = self.inertia_tensor
        if inertia.shape != (3, 3) or not np.allclose(inertia, inertia.T):
            raise ValidationError("inertia tensor must be a symmetric 3x3 matrix", "inertia.inertia_tensor")
        if np.any(np.linalg.eigvalsh(inertia) <= 0):
            raise ValidationError("inertia tensor must be positive definite", "inertia.inertia_tensor")
        if self.added_mass_diagonal.shape != (6,) or np.any(self.added_mass_diagonal < 0):
            raise ValidationError("added mass must be 6 non-negative values", "inertia.added_mass_diagonal")

    @cached_property
    def mass_matrix(self):
        m = self.mass
        s = skew(self.cg_offset)
        mm = np.zeros((6, 6))
        mm[:3, :3] = m * np.eye(3)
        mm[:3, 3:] = -m * s
        mm[3:, :3] = m * s
        mm[3:, 3:] = self.inertia_tensor
        mm += np.diag(self.added_mass_diagonal)
        return mm

    @cached_property
    def mass_matrix_inv(self):
        return np.linalg.inv(self.mass_matrix)

    def with_point_mass(self, mass, position):
        """Rigidly attach a point mass; returns the combined model."""
        r = np.asarray(position, dtype=float)
        total = self.mass + mass
        cg = (self.mass * self.cg_offset + mass * r) / total
        inertia = self.inertia_tensor + mass * (np.dot(r, r) * np.eye(3) - np.outer(r, r))
        return InertiaModel(total, inertia, self.added_mass_diagonal, cg, self.cb_offset)


@dataclass(frozen=True)
class BuoyancyModel:
    buoyant_force: float
    gravity: float = GRAVITY

    def __post_init__(self):
        if self.buoyant_force < 0:
            raise ValidationError("buoyant force must be non-negative", "buoyancy.buoyant_force")

    @classmethod
    def with_deficit(cls, mass, deficit_kg=0.0, gravity=GRAVITY):
        """Lift that leaves the vehicle ``deficit_kg`` heavy (negative buoyancy)."""
        return cls((mass - deficit_kg) * gravity, gravity)


@dataclass(frozen=True)
class DragCoefficients:
    """Per-axis linear and quadratic damping, axes ordered (vx, vy, vz, wx, wy, wz)."""

    linear: np.ndarray
    quadratic: np.ndarray

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float)
        quad = np.asarray(self.quadratic, dtype=float)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)
        if lin.shape != (6,) or quad.shape != (6,):
            raise ValidationError("drag coefficients need 6 linear and 6 quadratic values", "drag")
        if np.any(lin < 0) or np.any(quad < 0):
            raise ValidationError("drag coefficients must be non-negative", "drag")

    def terminal_speed(self, axis, force):
        """Positive root of force = D*v + D2*v**2."""
        d, d2 = self.linear[axis], self.quadratic[axis]
        if d2 == 0:
            return force / d
        return 2 * force / (d + math.sqrt(d * d + 4 * d2 * force))


@dataclass(frozen=True)
class ForceTorque:
    """Body-frame wrench."""

    force: np.ndarray
    torque: np.ndarray

    @classmethod
    def zero(cls):
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_vector(cls, w):
        w = np.asarray(w, dtype=float)
        return cls(w[:3].copy(), w[3:].copy())

    def as_vector(self):
        return np.concatenate([self.force, self.torque])

    def __add__(self, other):
        return ForceTorque(self.force + other.force, self.torque + other.torque)

    def __neg__(self):
        return ForceTorque(-self.force, -self.torque)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.torque)))


class OrnsteinUhlenbeckGust:
    """Stationary OU gust process sampled on a fixed time grid.

    The realisation is generated in fixed-size chunks from a generator seeded
    with ``seed``, so ``velocity(t)`` is a pure function of (seed, t) no
    matter which times were queried before. Only horizontal components are
    perturbed.
    """

    _CHUNK = 1024

    def __init__(self, sigma, correlation_time, seed, sample_period=0.05):
        if sigma < 0 or correlation_time <= 0 or sample_period <= 0:
            raise ValidationError("gust sigma >= 0, correlation_time > 0 required", "wind.gust")
        self.sigma = float(sigma)
        self.correlation_time = float(correlation_time)
        # an int or a sequence of ints (spawned streams, e.g. [run_seed, 2])
        self.seed = [int(v) for v in seed] if np.ndim(seed) else int(seed)
        self.sample_period = float(sample_period)
        self._rng = np.random.default_rng(self.seed)
        self._samples = np.zeros((0, 2))
        self._phi = math.exp(-self.sample_period / self.correlation_time)

    def _extend(self, n_needed):
        while len(self._samples) < n_needed:
            noise = self._rng.standard_normal((self._CHUNK, 2))
            out = np.empty((self._CHUNK, 2))
            if len(self._samples) == 0:
                prev = self.sigma * noise[0]
                out[0] = prev
                start = 1
            else:
                prev = self._samples[-1]
                start = 0
            scale = self.sigma * math.sqrt(1 - self._phi ** 2)
            for i in range(start, self._CHUNK):
                prev = self._phi * prev + scale * noise[i]
                out[i] = prev
            self._samples = np.vstack([self._samples, out])

    def velocity(self, t):
        k = int(math.floor(t / self.sample_period + 1e-9))
        k = max(k, 0)
        self._extend(k + 1)
        g = self._samples[k]
        return np.array([g[0], g[1], 0.0])

    def describe(self):
        return {
            "type": "ou_process",
            "sigma": self.sigma,
            "correlation_time": self.correlation_time,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class WindField:
    mean_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gust: Optional[OrnsteinUhlenbeckGust] = None

    def __post_init__(self):
        object.__setattr__(self, "mean_velocity", np.asarray(self.mean_velocity, dtype=float))

    def velocity(self, t):
        if self.gust is None:
            return self.mean_velocity
        return self.mean_velocity + self.gust.velocity(t)

    @property
    def calm(self):
        return self.gust is None and not np.any(self.mean_velocity)


# ---------------------------------------------------------------------------
# force terms
# ---------------------------------------------------------------------------

def restoring_wrench(state, inertia, buoyancy):
    """Gravity at the CG plus buoyancy at the CB, expressed in the body frame."""
    up_body = state.rotation[2, :]
    f_buoy = buoyancy.buoyant_force * up_body
    f_grav = -inertia.mass * buoyancy.gravity * up_body
    torque = cross3(inertia.cb_offset, f_buoy) + cross3(inertia.cg_offset, f_grav)
    return ForceTorque(f_buoy + f_grav, torque)


def damping_wrench(relative_velocity, coeffs):
    u = np.asarray(relative_velocity, dtype=float)
    w = -(coeffs.linear + coeffs.quadratic * np.abs(u)) * u
    return ForceTorque(w[:3], w[3:])


def coriolis_wrench(state, inertia):
    """Rigid-body Coriolis/centripetal wrench, -C(nu) nu.

    Reduces to -w x (m v) and -w x (I w) when the CG sits at the reference
    point; added mass augments the translational mass and rotational
    inertia diagonals.
    """
    v = state.linear_velocity
    w = state.angular_velocity
    if not np.any(w):
        return ForceTorque.zero()
    m = inertia.mass
    added = inertia.added_mass_diagonal
    m_lin = m + added[:3]
    i_rot = inertia.inertia_tensor + np.diag(added[3:])
    rg = inertia.cg_offset
    force = -cross3(w, m_lin * v) + m * cross3(w, cross3(rg, w))
    torque = -cross3(w, i_rot @ w) - m * cross3(rg, cross3(w, v))
    return ForceTorque(force, torque)


def wind_relative_velocity(state, wind, t=None):
    """Air-relative body velocity (6-vector) for the damping model."""
    t = state.time if t is None else t
    if wind is None or wind.calm:
        return state.velocity6
    wind_body = state.rotation.T @ wind.velocity(t)
    return np.concatenate([state.linear_velocity - wind_body, state.angular_velocity])


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

WrenchLike = Union[ForceTorque, Callable[[BodyState], ForceTorque]]

MAX_DT = 0.05


def _derivative(x, t, wrench, minv):
    q = x[3:7]
    v = x[7:10]
    w = x[10:13]
    if callable(wrench):
        ft = wrench(BodyState(x[0:3], q, v, w, t))
        tau = np.concatenate([ft.force, ft.torque])
    else:
        tau = wrench
    dx = np.empty(13)
    dx[0:3] = quat_to_matrix(q) @ v
    dx[3:7] = 0.5 * quat_multiply(q, (0.0, w[0], w[1], w[2]))
    dx[7:13] = minv @ tau
    return dx


def step(state, total, inertia, dt=0.01):
    """Advance ``state`` by one RK4 step of length ``dt``.

    ``total`` is either a constant body wrench or a callable evaluated at
    each RK4 stage, which lets state-dependent terms (drag, restoring,
    Coriolis) be integrated to full order.
    """
    if not 0 < dt <= MAX_DT:
        raise ValueError(f"dt must be in (0, {MAX_DT}], got {dt}")
    wrench = total if callable(total) else total.as_vector()
    minv = inertia.mass_matrix_inv
    x = state.as_vector()
    t = state.time
    k1 = _derivative(x, t, wrench, minv)
    k2 = _derivative(x + 0.5 * dt * k1, t + 0.5 * dt, wrench, minv)
    k3 = _derivative(x + 0.5 * dt * k2, t + 0.5 * dt, wrench, minv)
    k4 = _derivative(x + dt * k3, t + dt, wrench, minv)
    x_new = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(x_new)):
        raise NonFiniteState(f"non-finite state at t={t + dt:.4f}s", time=t + dt)
    x_new[3:7] /= np.linalg.norm(x_new[3:7])
    return BodyState.from_vector(x_new, t + dt)


def kinetic_energy(state, inertia):
    nu = state.velocity6
    return 0.5 * nu @ inertia.mass_matrix @ nu


# ---------------------------------------------------------------------------
# closed-loop plant
# ---------------------------------------------------------------------------

class RigidBodyPlant:
    """All four force terms bundled for fast fixed-step integration.

    Computes the same model as ``step`` with a callable summing
    restoring, damping and Coriolis terms plus a constant propulsion
    wrench, but on plain floats, which is several times faster for the
    13-element state. Wind is held at its value at the start of the step.

    Parameters
    ----------
    floor : float or None
        World height of a ground plane. Below it a stiff spring-damper
        pushes the hull back up; ``None`` disables contact.
    """

    def __init__(self, inertia, buoyancy, drag, floor=0.0,
                 ground_stiffness=50.0, ground_damping=2.0):
        self.inertia = inertia
        self.buoyancy = buoyancy
        self.drag = drag
        self.floor = floor
        self.ground_stiffness = ground_stiffness
        self.ground_damping = ground_damping
        self._minv = [list(map(float, row)) for row in inertia.mass_matrix_inv]
        add = inertia.added_mass_diagonal
        self._mlin = [inertia.mass + float(a) for a in add[:3]]
        self._irot = [list(map(float, row)) for row in inertia.inertia_tensor + np.diag(add[3:])]
        self._m = float(inertia.mass)
        self._rg = [float(c) for c in inertia.cg_offset]
        self._rb = [float(c) for c in inertia.cb_offset]
        self._lift = float(buoyancy.buoyant_force)
        self._weight = self._m * float(buoyancy.gravity)
        self._dl = [float(c) for c in drag.linear]
        self._dq = [float(c) for c in drag.quadratic]

    def derivative(self, x, tau, wind):
        px, py, pz, qw, qx, qy, qz, u, v, w, p, q, r = x
        # rotation body -> world
        r00 = 1 - 2 * (qy * qy + qz * qz)
        r01 = 2 * (qx * qy - qw * qz)
        r02 = 2 * (qx * qz + qw * qy)
        r10 = 2 * (qx * qy + qw * qz)
        r11 = 1 - 2 * (qx * qx + qz * qz)
        r12 = 2 * (qy * qz - qw * qx)
        r20 = 2 * (qx * qz - qw * qy)
        r21 = 2 * (qy * qz + qw * qx)
        r22 = 1 - 2 * (qx * qx + qy * qy)
        f = list(tau)

        # restoring: world up expressed in body = third row of R
        fb = self._lift
        fg = -self._weight
        rb, rg = self._rb, self._rg
        f[0] += (fb + fg) * r20
        f[1] += (fb + fg) * r21
        f[2] += (fb + fg) * r22
        for (c0, c1, c2), mag in ((rb, fb), (rg, fg)):
            f[3] += c1 * mag * r22 - c2 * mag * r21
            f[4] += c2 * mag * r20 - c0 * mag * r22
            f[5] += c0 * mag * r21 - c1 * mag * r20

        # damping on air-relative velocity
        wx, wy, wz = wind
        rel = (
            u - (r00 * wx + r10 * wy + r20 * wz),
            v - (r01 * wx + r11 * wy + r21 * wz),
            w - (r02 * wx + r12 * wy + r22 * wz),
            p, q, r,
        )
        dl, dq = self._dl, self._dq
        for i in range(6):
            ui = rel[i]
            f[i] -= (dl[i] + dq[i] * abs(ui)) * ui

        # coriolis / centripetal
        if p or q or r:
            ml = self._mlin
            mu, mv, mw = ml[0] * u, ml[1] * v, ml[2] * w
            f[0] -= q * mw - r * mv
            f[1] -= r * mu - p * mw
            f[2] -= p * mv - q * mu
            I = self._irot
            ip = I[0][0] * p + I[0][1] * q + I[0][2] * r
            iq = I[1][0] * p + I[1][1] * q + I[1][2] * r
            ir = I[2][0] * p + I[2][1] * q + I[2][2] * r
            f[3] -= q * ir - r * iq
            f[4] -= r * ip - p * ir
            f[5] -= p * iq - q * ip
            g0, g1, g2 = rg
            if g0 or g1 or g2:
                m = self._m
                # m * w x (rg x w)
                a0, a1, a2 = g1 * r - g2 * q, g2 * p - g0 * r, g0 * q - g1 * p
                f[0] += m * (q * a2 - r * a1)
                f[1] += m * (r * a0 - p * a2)
                f[2] += m * (p * a1 - q * a0)
                # -m * rg x (w x v)
                b0, b1, b2 = q * w - r * v, r * u - p * w, p * v - q * u
                f[3] -= m * (g1 * b2 - g2 * b1)
                f[4] -= m * (g2 * b0 - g0 * b2)
                f[5] -= m * (g0 * b1 - g1 * b0)

        vx = r00 * u + r01 * v + r02 * w
        vy = r10 * u + r11 * v + r12 * w
        vz = r20 * u + r21 * v + r22 * w

        if self.floor is not None and pz < self.floor:
            fz_world = self.ground_stiffness * (self.floor - pz) - self.ground_damping * vz
            f[0] += r20 * fz_world
            f[1] += r21 * fz_world
            f[2] += r22 * fz_world

        minv = self._minv
        acc = [
            minv[i][0] * f[0] + minv[i][1] * f[1] + minv[i][2] * f[2]
            + minv[i][3] * f[3] + minv[i][4] * f[4] + minv[i][5] * f[5]
            for i in range(6)
        ]
        return [
            vx, vy, vz,
            0.5 * (-qx * p - qy * q - qz * r),
            0.5 * (qw * p + qy * r - qz * q),
            0.5 * (qw * q - qx * r + qz * p),
            0.5 * (qw * r + qx * q - qy * p),
            *acc,
        ]

    def step(self, state, propulsion, wind_world=(0.0, 0.0, 0.0), dt=0.01):
        """RK4 step under a propulsion wrench held constant over ``dt``."""
        if not 0 < dt <= MAX_DT:
            raise ValueError(f"dt must be in (0, {MAX_DT}], got {dt}")
        tau = [float(c) for c in (propulsion.as_vector() if isinstance(propulsion, ForceTorque) else propulsion)]
        wind = [float(c) for c in wind_world]
        x = [float(c) for c in state.as_vector()]
        h = dt
        k1 = self.derivative(x, tau, wind)
        k2 = self.derivative([a + 0.5 * h * b for a, b in zip(x, k1)], tau, wind)
        k3 = self.derivative([a + 0.5 * h * b for a, b in zip(x, k2)], tau, wind)
        k4 = self.derivative([a + h * b for a, b in zip(x, k3)], tau, wind)
        xn = np.array([
            a + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(x, k1, k2, k3, k4)
        ])
        t_new = state.time + dt
        if not np.all(np.isfinite(xn)):
            raise NonFiniteState(f"non-finite state at t={t_new:.4f}s", time=t_new)
        xn[3:7] /= math.sqrt(xn[3] ** 2 + xn[4] ** 2 + xn[5] ** 2 + xn[6] ** 2)
        return BodyState.from_vector(xn, t_new)
