"""
Rotor thrust model and thrust allocation.

Thrust per rotor follows a quadratic curve in normalised PWM,
``F = a*pwm**2 + b*pwm`` with pwm in [0, 1] and F in newtons. The net
body wrench is linear in the rotor thrusts through a 6xN allocation
matrix ``B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear

from .dynamics import ForceTorque
from .errors import DimensionMismatch, DomainError, ValidationError

# Default coefficients for a small coreless motor with a 45 mm propeller.
DEFAULT_A = 0.0915
DEFAULT_B = 0.0677

GT_MAB_VERTICAL_CAP = 0.62
BEAVIS_VERTICAL_CAP = 0.05


@dataclass(frozen=True)
class ThrustCurve:
    a: float = DEFAULT_A
    b: float = DEFAULT_B

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
            raise ValidationError("thrust curve needs a >= 0, b >= 0, a + b > 0", "thrust_curve")

    @property
    def max_thrust(self):
        return self.a + self.b


def pwm_to_thrust(pwm, curve=ThrustCurve()):
    """Thrust in newtons for a normalised PWM duty.

    >>> round(pwm_to_thrust(0.5), 6)
    0.056725
    """
    if not 0.0 <= pwm <= 1.0:
        raise DomainError(f"pwm must lie in [0, 1], got {pwm}")
    return curve.a * pwm * pwm + curve.b * pwm


def thrust_to_pwm(force, curve=ThrustCurve()):
    """Inverse of :func:`pwm_to_thrust` on [0, max_thrust]."""
    fmax = curve.max_thrust
    if force < 0 or force > fmax * (1 + 1e-12):
        raise DomainError(f"thrust must lie in [0, {fmax}], got {force}")
    if force == 0:
        return 0.0
    if curve.a == 0:
        return min(force / curve.b, 1.0)
    # 2F / (b + sqrt(b^2 + 4aF)) is the same root without cancellation
    pwm = 2 * force / (curve.b + math.sqrt(curve.b ** 2 + 4 * curve.a * force))
    return min(pwm, 1.0)


@dataclass(frozen=True)
class Rotor:
    position: np.ndarray
    axis: np.ndarray
    label: str = ""
    torque_coefficient: float = 0.0  # reaction torque per newton, signed by spin

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        axis = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(axis) - 1) > 1e-9:
            raise ValidationError(f"rotor {self.label!r} thrust axis must be unit length", "rotor.axis")
        object.__setattr__(self, "axis", axis)


@dataclass(frozen=True)
class RotorLayout:
    rotors: tuple

    def __post_init__(self):
        object.__setattr__(self, "rotors", tuple(self.rotors))
        if not self.rotors:
            raise ValidationError("layout needs at least one rotor", "rotors")

    def __len__(self):
        return len(self.rotors)

    @property
    def labels(self):
        return [r.label for r in self.rotors]

    def geometric_matrix(self):
        """Unscaled 6xN allocation from mount geometry alone."""
        cols = []
        for r in self.rotors:
            torque = np.cross(r.position, r.axis) + r.torque_coefficient * r.axis
            cols.append(np.concatenate([r.axis, torque]))
        return np.column_stack(cols)


@dataclass(frozen=True)
class AllocationMatrix:
    B: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.ndim != 2 or B.shape[0] != 6:
            raise ValidationError(f"allocation matrix must be 6xN, got {B.shape}", "allocation")
        if not np.all(np.isfinite(B)):
            raise ValidationError("allocation matrix has non-finite entries", "allocation")
        object.__setattr__(self, "B", B)

    @property
    def n_rotors(self):
        return self.B.shape[1]


def allocate(thrusts, B):
    """Net body wrench ``B @ thrusts``."""
    t = np.asarray(thrusts, dtype=float)
    mat = B.B if isinstance(B, AllocationMatrix) else np.asarray(B, dtype=float)
    if t.ndim != 1 or t.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"expected {mat.shape[1]} thrusts, got shape {t.shape}")
    if np.any(t < 0):
        raise DomainError("rotor thrusts must be non-negative")
    return ForceTorque.from_vector(mat @ t)


def max_vertical_force(B, curve=ThrustCurve()):
    """Largest achievable body force-z with every rotor in [0, max_thrust]."""
    fz = B.B[2]
    return float(np.sum(np.clip(fz, 0, None)) * curve.max_thrust)


# ---------------------------------------------------------------------------
# wrench -> thrust mixing
# ---------------------------------------------------------------------------

CONTROLLED_ROWS = (0, 2, 5)  # Fx, Fz, Mz


@dataclass(frozen=True)
class Mixer:
    """Maps a demand on {Fx, Fz, Mz} to bounded rotor thrusts.

    The unconstrained pseudo-inverse solution is used when it is feasible.
    Otherwise a weighted bounded least-squares problem is solved; the row
    weights decide which axis gives way first under saturation.
    """

    allocation: AllocationMatrix
    max_thrust: float
    weights: tuple = (1.0, 2.0, 20.0)
    _pinv: np.ndarray = field(init=False, repr=False)
    _weighted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sub = self.allocation.B[list(CONTROLLED_ROWS)]
        object.__setattr__(self, "_pinv", np.linalg.pinv(sub))
        object.__setattr__(self, "_weighted", np.diag(self.weights) @ sub)

    def thrusts(self, demand):
        """Return (thrusts, saturated) for ``demand = (Fx, Fz, Mz)``."""
        d = np.asarray(demand, dtype=float)
        t = self._pinv @ d
        if np.all(t >= -1e-12) and np.all(t <= self.max_thrust + 1e-12):
            return np.clip(t, 0.0, self.max_thrust), False
        res = lsq_linear(
            self._weighted,
            np.asarray(self.weights) * d,
            bounds=(0.0, self.max_thrust),
            method="bvls",
        )
        return np.clip(res.x, 0.0, self.max_thrust), True


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def gt_mab_layout(arm=0.2):
    """Two lateral rotors (forward thrust, differential yaw) and two vertical rotors."""
    return RotorLayout((
        Rotor((0.0, arm, 0.0), (1.0, 0.0, 0.0), "lateral_left"),
        Rotor((0.0, -arm, 0.0), (1.0, 0.0, 0.0), "lateral_right"),
        Rotor((arm, 0.0, 0.0), (0.0, 0.0, 1.0), "vertical_front"),
        Rotor((-arm, 0.0, 0.0), (0.0, 0.0, 1.0), "vertical_rear"),
    ))


def gt_mab_allocation(curve=ThrustCurve(), cap=GT_MAB_VERTICAL_CAP, arm=0.2):
    B = gt_mab_layout(arm).geometric_matrix()
    # vertical rotors: scale the whole column so pitch entries stay consistent
    lifting = B[2] > 0
    current = np.sum(B[2, lifting]) * curve.max_thrust
    B[:, lifting] *= cap / current
    return AllocationMatrix(B)


def beavis_layout(arm=0.1):
    """Four rotors in the horizontal plane, each thrusting radially outward."""
    return RotorLayout((
        Rotor((arm, 0.0, 0.0), (1.0, 0.0, 0.0), "front"),
        Rotor((-arm, 0.0, 0.0), (-1.0, 0.0, 0.0), "rear"),
        Rotor((0.0, arm, 0.0), (0.0, 1.0, 0.0), "left"),
        Rotor((0.0, -arm, 0.0), (0.0, -1.0, 0.0), "right"),
    ))


def beavis_allocation(curve=ThrustCurve(), cap=BEAVIS_VERTICAL_CAP, arm=0.1):
    B = beavis_layout(arm).geometric_matrix()
    # lateral rotors give a small induced lift along the hull; share the cap evenly
    B[2, :] = cap / (B.shape[1] * curve.max_thrust)
    return AllocationMatrix(B)
