"""
Vehicle presets.

GT-MAB carries two lateral rotors for forward thrust and differential yaw
plus two vertical rotors for altitude. BEAVIS carries four rotors in the
hull plane thrusting radially outward, so its only vertical authority is a
small induced lift and it has no yaw moment.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .control import ControllerConfig, PidGains
from .dynamics import GRAVITY, BuoyancyModel, DragCoefficients, InertiaModel
from .propulsion import (
    AllocationMatrix,
    Mixer,
    ThrustCurve,
    beavis_allocation,
    gt_mab_allocation,
    max_vertical_force,
)

# all-up mass of the reference build, kg
GT_MAB_MASS = 0.2825
BEAVIS_MASS = 0.2825
NEGATIVE_BUOYANCY_KG = 0.002


@dataclass(frozen=True)
class PlatformConfig:
    name: str
    inertia: InertiaModel
    buoyancy: BuoyancyModel
    drag: DragCoefficients
    allocation: AllocationMatrix
    thrust_curve: ThrustCurve
    controller: ControllerConfig
    mixer_weights: tuple = (1.0, 2.0, 20.0)
    rotor_labels: tuple = ()

    @cached_property
    def mixer(self):
        return Mixer(self.allocation, self.thrust_curve.max_thrust, self.mixer_weights)

    @property
    def weight_excess(self):
        """Weight minus lift in newtons (positive when heavy)."""
        return self.inertia.mass * self.buoyancy.gravity - self.buoyancy.buoyant_force

    @property
    def max_vertical_force(self):
        return max_vertical_force(self.allocation, self.thrust_curve)

    @property
    def n_rotors(self):
        return self.allocation.n_rotors

    def with_deficit(self, deficit_kg):
        return replace(self, buoyancy=BuoyancyModel.with_deficit(self.inertia.mass, deficit_kg, self.buoyancy.gravity))

    def with_inertia(self, inertia, deficit_kg=None):
        """Swap mass properties, re-ballasting to the same weight excess unless told otherwise."""
        if deficit_kg is None:
            deficit_kg = self.weight_excess / self.buoyancy.gravity
        return replace(
            self,
            inertia=inertia,
            buoyancy=BuoyancyModel.with_deficit(inertia.mass, deficit_kg, self.buoyancy.gravity),
        )

    def with_controller(self, controller):
        return replace(self, controller=controller)


def hull_drag():
    # Low surge drag with a stiff sway/heave response (fin and gondola keel).
    return DragCoefficients(
        linear=[0.03, 0.05, 0.03, 0.01, 0.01, 0.005],
        quadratic=[0.0005, 0.25, 0.1, 0.02, 0.02, 0.005],
    )


def hull_inertia(mass, cg_drop=0.15):
    return InertiaModel(
        mass=mass,
        inertia_tensor=np.diag([0.05, 0.05, 0.03]),
        cg_offset=np.array([0.0, 0.0, -cg_drop]),
        cb_offset=np.zeros(3),
    )


def gt_mab_controller():
    return ControllerConfig(
        altitude_outer=PidGains(kp=0.6, output_limit=0.15),
        altitude_inner=PidGains(kp=0.8, ki=0.2, output_limit=0.62, integrator_limit=0.05),
        yaw_outer=PidGains(kp=1.2, output_limit=0.6),
        yaw_inner=PidGains(kp=0.05, ki=0.01, output_limit=0.016, integrator_limit=0.005),
        forward_speed=PidGains(kp=0.4, ki=0.1, output_limit=0.32, integrator_limit=0.1),
        loop_rate=100.0,
        buoyancy_feedforward=True,
    )


def beavis_controller():
    # Designed for a neutrally buoyant hull: no buoyancy trim and a small
    # altitude authority that only corrects drift.
    base = gt_mab_controller()
    return replace(
        base,
        altitude_inner=PidGains(kp=0.8, ki=0.02, output_limit=0.01, integrator_limit=0.005),
        buoyancy_feedforward=False,
    )


def gt_mab(deficit_kg=NEGATIVE_BUOYANCY_KG, curve=ThrustCurve()):
    inertia = hull_inertia(GT_MAB_MASS)
    return PlatformConfig(
        name="gt-mab",
        inertia=inertia,
        buoyancy=BuoyancyModel.with_deficit(inertia.mass, deficit_kg, GRAVITY),
        drag=hull_drag(),
        allocation=gt_mab_allocation(curve),
        thrust_curve=curve,
        controller=gt_mab_controller(),
        rotor_labels=("lateral_left", "lateral_right", "vertical_front", "vertical_rear"),
    )


def beavis(deficit_kg=NEGATIVE_BUOYANCY_KG, curve=ThrustCurve()):
    inertia = hull_inertia(BEAVIS_MASS)
    return PlatformConfig(
        name="beavis",
        inertia=inertia,
        buoyancy=BuoyancyModel.with_deficit(inertia.mass, deficit_kg, GRAVITY),
        drag=hull_drag(),
        allocation=beavis_allocation(curve),
        thrust_curve=curve,
        controller=beavis_controller(),
        rotor_labels=("front", "rear", "left", "right"),
    )


PRESETS = {"gt-mab": gt_mab, "beavis": beavis}


def preset(name, **kwargs):
    key = name.lower().replace("_", "-")
    if key not in PRESETS:
        raise KeyError(f"unknown platform {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[key](**kwargs)
