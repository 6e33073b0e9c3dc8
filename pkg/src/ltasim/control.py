"""
Cascaded PID flight controller.

Three axes are closed: altitude (position -> climb rate -> force-z), yaw
(angle -> rate -> moment-z) and forward speed (speed -> force-x). Roll and
pitch are left to the passive pendulum stability of the hull. The wrench
demand is mapped to rotor thrusts by the platform mixer and then to PWM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import wrap_angle
from .errors import ValidationError
from .propulsion import thrust_to_pwm


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    output_limit: float = math.inf
    integrator_limit: float = math.inf

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValidationError("PID gains must be non-negative", "pid")
        if not (self.output_limit > 0 and self.integrator_limit > 0):
            raise ValidationError("PID limits must be positive", "pid")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0          # already multiplied by ki
    prev_measurement: float = math.nan


def _clamp(x, lim):
    return max(-lim, min(lim, x))


def pid_step(error, state, gains, dt, measurement=None):
    """One PID update.

    Parameters
    ----------
    error : float
        Setpoint minus measurement, in loop units.
    state : PidState
    gains : PidGains
    dt : float
        Step in seconds.
    measurement : float, optional
        When given, the derivative acts on ``-d(measurement)/dt`` so that
        setpoint jumps do not kick the output. Without it the derivative
        term is taken on the error.

    Returns
    -------
    (float, PidState)
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    integral = _clamp(state.integral + gains.ki * error * dt, gains.integrator_limit)
    signal = -measurement if measurement is not None else error
    prev = state.prev_measurement
    deriv = 0.0 if math.isnan(prev) else (signal - prev) / dt
    out = gains.kp * error + integral + gains.kd * deriv
    return _clamp(out, gains.output_limit), PidState(integral, signal)


@dataclass(frozen=True)
class ControllerConfig:
    altitude_outer: PidGains
    altitude_inner: PidGains
    yaw_outer: PidGains
    yaw_inner: PidGains
    forward_speed: PidGains
    loop_rate: float = 100.0
    buoyancy_feedforward: bool = True

    def __post_init__(self):
        if not 50 <= self.loop_rate <= 500:
            raise ValidationError(f"loop_rate must lie in [50, 500] Hz, got {self.loop_rate}", "controller.loop_rate")

    @property
    def dt(self):
        return 1.0 / self.loop_rate


@dataclass(frozen=True)
class Setpoint:
    altitude: float
    yaw: float = 0.0
    forward_speed: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.altitude, self.yaw, self.forward_speed)):
            raise ValidationError("setpoint must be finite", "setpoint")
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))


@dataclass(frozen=True)
class MotorCommand:
    pwm: np.ndarray
    saturated: bool = False
    thrusts: np.ndarray = None
    demand: np.ndarray = None  # (Fx, Fz, Mz) requested


@dataclass(frozen=True)
class ControllerMemory:
    altitude_outer: PidState = field(default_factory=PidState)
    altitude_inner: PidState = field(default_factory=PidState)
    yaw_outer: PidState = field(default_factory=PidState)
    yaw_inner: PidState = field(default_factory=PidState)
    forward_speed: PidState = field(default_factory=PidState)


def wrench_demand(state, setpoint, config, platform, dt, memory):
    """Cascade outputs (Fx, Fz, Mz) and the updated PID memory."""
    z = state.position[2]
    vz = state.world_velocity[2]
    yaw = state.yaw
    r = state.angular_velocity[2]
    u = state.linear_velocity[0]

    vz_sp, alt_o = pid_step(setpoint.altitude - z, memory.altitude_outer, config.altitude_outer, dt, z)
    fz, alt_i = pid_step(vz_sp - vz, memory.altitude_inner, config.altitude_inner, dt, vz)
    if config.buoyancy_feedforward:
        fz += platform.weight_excess

    yaw_err = wrap_angle(setpoint.yaw - yaw)
    # derivative on the wrapped error; the raw yaw measurement jumps at +-pi
    r_sp, yaw_o = pid_step(yaw_err, memory.yaw_outer, config.yaw_outer, dt, None)
    mz, yaw_i = pid_step(r_sp - r, memory.yaw_inner, config.yaw_inner, dt, r)

    fx, fwd = pid_step(setpoint.forward_speed - u, memory.forward_speed, config.forward_speed, dt, u)

    mem = ControllerMemory(alt_o, alt_i, yaw_o, yaw_i, fwd)
    return np.array([fx, fz, mz]), mem


def control_step(state, setpoint, config, platform, dt=None, memory=None):
    """Motor command for the current state.

    Returns ``(MotorCommand, ControllerMemory)``. The command is a pure
    function of the inputs; ``memory`` carries the PID integrators and
    derivative history between calls.
    """
    dt = config.dt if dt is None else dt
    if abs(dt - config.dt) > 1e-9:
        raise ValidationError(f"dt {dt} does not match loop rate {config.loop_rate} Hz", "controller.dt")
    memory = ControllerMemory() if memory is None else memory
    demand, memory = wrench_demand(state, setpoint, config, platform, dt, memory)
    thrusts, saturated = platform.mixer.thrusts(demand)
    curve = platform.thrust_curve
    pwm = np.array([thrust_to_pwm(min(t, curve.max_thrust), curve) for t in thrusts])
    clipped = np.clip(pwm, 0.0, 1.0)
    saturated = saturated or bool(np.any(clipped != pwm)) or bool(np.any(clipped >= 1.0))
    return MotorCommand(clipped, saturated, thrusts, demand), memory


def motor_thrusts(command, curve):
    """Per-rotor thrust produced by a motor command."""
    return command.pwm * (curve.a * command.pwm + curve.b)
