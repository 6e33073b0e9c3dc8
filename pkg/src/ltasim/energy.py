"""
Power budget, solar harvesting and battery accounting.

Power figures are in milliwatts, energy in milliwatt-hours. The harvest
model is a linear map from illuminance to electrical power, saturating
above ``saturation_lux``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from importlib import resources

from .errors import NoSurplus, ParseError, ValidationError

NOMINAL_VOLTAGE = 3.7
MODES = ("idle", "idle_tx", "hover", "navigate", "fly")
ALGORITHMS = ("BAG", "DES", "DGA")


@dataclass(frozen=True)
class PowerBudget:
    idle: float = 97.0
    idle_tx: float = 120.0
    hover_stabilize: float = 1333.0
    navigation: dict = field(default_factory=lambda: {"BAG": 1523.0, "DES": 1534.0, "DGA": 1544.0})
    flying: float = 1776.0

    def __post_init__(self):
        nav = dict(self.navigation)
        object.__setattr__(self, "navigation", nav)
        if not self.idle <= self.idle_tx <= self.hover_stabilize:
            raise ValidationError("need idle <= idle_tx <= hover", "power_budget")
        if any(v < self.hover_stabilize for v in nav.values()):
            raise ValidationError("navigation draw must be at least the hover draw", "power_budget.navigation")


def power_draw(mode, budget=PowerBudget(), algorithm=None):
    """Electrical draw in mW.

    ``mode`` is one of idle, idle_tx, hover, navigate or fly. For navigate
    pass ``algorithm`` (or ``mode="navigate:BAG"``).
    """
    if ":" in mode:
        mode, algorithm = mode.split(":", 1)
    if mode == "idle":
        return budget.idle
    if mode == "idle_tx":
        return budget.idle_tx
    if mode == "hover":
        return budget.hover_stabilize
    if mode == "fly":
        return budget.flying
    if mode == "navigate":
        key = (algorithm or "").upper()
        if key not in budget.navigation:
            raise ValidationError(f"unknown navigation algorithm {algorithm!r}", "mode")
        return budget.navigation[key]
    raise ValidationError(f"unknown mode {mode!r}; choose from {MODES}", "mode")


# Calibrated so that hover (1333 mW) needs exactly three minutes of
# charging per minute once the idle draw is covered.
CALIBRATED_HARVEST_MW = 1333.0 / 3.0 + 97.0


@dataclass(frozen=True)
class HarvestModel:
    power_at_reference: float = CALIBRATED_HARVEST_MW
    reference_lux: float = 80000.0
    saturation_lux: float = 100000.0

    def __post_init__(self):
        if self.power_at_reference < 0 or self.reference_lux <= 0 or self.saturation_lux <= 0:
            raise ValidationError("harvest model parameters must be positive", "harvest")


def harvest_power(lux, model=HarvestModel()):
    if lux < 0:
        raise ValidationError("illuminance must be non-negative", "lux")
    return min(lux, model.saturation_lux) / model.reference_lux * model.power_at_reference


def charging_ratio(mode, lux, budget=PowerBudget(), model=HarvestModel(), algorithm=None):
    """Minutes of charging per minute of ``mode``; idle draw continues while charging."""
    surplus = harvest_power(lux, model) - budget.idle
    if surplus <= 0:
        raise NoSurplus(f"harvest at {lux} lux does not cover the {budget.idle} mW idle draw")
    return power_draw(mode, budget, algorithm) / surplus


@dataclass(frozen=True)
class BatteryState:
    capacity: float = 250.0      # mAh at the nominal voltage
    state_of_charge: float = 1.0

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValidationError("capacity must be positive", "battery.capacity")
        object.__setattr__(self, "state_of_charge", min(1.0, max(0.0, self.state_of_charge)))

    @property
    def energy_capacity_mwh(self):
        return self.capacity * NOMINAL_VOLTAGE

    @property
    def energy_mwh(self):
        return self.state_of_charge * self.energy_capacity_mwh

    @property
    def voltage(self):
        # linear between 3.3 V empty and 4.2 V full
        return 3.3 + 0.9 * self.state_of_charge


def integrate_battery(state, net_power, dt):
    """Advance the charge by ``net_power`` mW over ``dt`` seconds."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    delta = net_power * dt / (state.capacity * NOMINAL_VOLTAGE * 3600.0)
    return replace(state, state_of_charge=min(1.0, max(0.0, state.state_of_charge + delta)))


# ---------------------------------------------------------------------------
# duty cycle and endurance
# ---------------------------------------------------------------------------

def duty_cycle_minutes(charge_minutes=60.0, lux=80000.0, mix=None, budget=PowerBudget(), model=HarvestModel(), dt=1.0):
    """Minutes of operation funded by ``charge_minutes`` of harvesting.

    The battery starts empty, charges at the harvest surplus, then runs
    the operation ``mix`` (fractions of time per mode, default half hover
    and half fly) until empty. Integrated step by step with
    :func:`integrate_battery`.
    """
    mix = {"hover": 0.5, "fly": 0.5} if mix is None else mix
    total = sum(mix.values())
    draw = sum(power_draw(m, budget) * w for m, w in mix.items()) / total
    surplus = harvest_power(lux, model) - budget.idle
    if surplus <= 0:
        raise NoSurplus("no charging surplus")
    cap = 1e9  # large virtual battery so charging never clips
    bat = BatteryState(capacity=cap, state_of_charge=0.0)
    for _ in range(int(round(charge_minutes * 60 / dt))):
        bat = integrate_battery(bat, surplus, dt)
    stored = bat.energy_mwh
    return stored / draw * 60.0


def soc_trace(power_mw, duration, battery=BatteryState(), dt=1.0):
    """SoC samples at ``dt`` intervals under a constant draw."""
    out = [(0.0, battery.state_of_charge)]
    t = 0.0
    for _ in range(int(round(duration / dt))):
        battery = integrate_battery(battery, -power_mw, dt)
        t += dt
        out.append((t, battery.state_of_charge))
    return out


QUADROTOR_HOVER_MW = 7.4 * 1000.0  # typical 250 g class quadrotor hover draw


def endurance_comparison(duration=450.0, budget=PowerBudget(), quadrotor_mw=QUADROTOR_HOVER_MW, battery=BatteryState()):
    """Final SoC after ``duration`` s of LTA hover versus quadrotor hover."""
    lta = soc_trace(budget.hover_stabilize, duration, battery)[-1][1]
    quad = soc_trace(quadrotor_mw, duration, battery)[-1][1]
    return {"lta_soc": lta, "quadrotor_soc": quad, "duration_s": duration}


# ---------------------------------------------------------------------------
# solar cells
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolarArraySpec:
    manufacturer: str
    model: str
    area: float                  # cm^2
    weight: float                # g
    charge_time: float           # s
    normalized_weight: float     # g/cm^2
    normalized_charge_time: float  # s/cm^2

    @property
    def name(self):
        return f"{self.manufacturer} {self.model}"

    def check_normalization(self, rel_tol=0.05):
        """True when the normalised columns match raw / area."""
        return (math.isclose(self.weight / self.area, self.normalized_weight, rel_tol=rel_tol, abs_tol=1e-3)
                and math.isclose(self.charge_time / self.area, self.normalized_charge_time, rel_tol=rel_tol, abs_tol=1e-3))


def dominates(a, b):
    """a is no worse on both objectives and strictly better on one."""
    no_worse = a.normalized_weight <= b.normalized_weight and a.normalized_charge_time <= b.normalized_charge_time
    better = a.normalized_weight < b.normalized_weight or a.normalized_charge_time < b.normalized_charge_time
    return no_worse and better


def pareto_frontier(cells):
    """Cells not dominated in (normalized_weight, normalized_charge_time).

    Exact duplicates keep one representative, the first by name.
    """
    ordered = sorted(cells, key=lambda c: c.name)
    front = []
    seen = set()
    for c in ordered:
        key = (c.normalized_weight, c.normalized_charge_time)
        if key in seen:
            continue
        if not any(dominates(o, c) for o in ordered):
            front.append(c)
            seen.add(key)
    return front


CELL_COLUMNS = ("manufacturer", "model", "area_cm2", "weight_g", "charge_time_s",
                "normalized_weight", "normalized_charge_time")


def read_cells(path=None):
    """Load solar cell specs; defaults to the bundled dataset."""
    if path is None:
        fh = resources.files("ltasim").joinpath("data/solar_cells.csv").open("r", newline="")
    else:
        fh = open(path, newline="")
    with fh:
        reader = csv.DictReader(fh)
        missing = set(CELL_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"missing columns {sorted(missing)}", 1)
        out = []
        for line, row in enumerate(reader, start=2):
            try:
                out.append(SolarArraySpec(
                    row["manufacturer"], row["model"], float(row["area_cm2"]), float(row["weight_g"]),
                    float(row["charge_time_s"]), float(row["normalized_weight"]),
                    float(row["normalized_charge_time"]),
                ))
            except ValueError as exc:
                raise ParseError(str(exc), line) from None
    return out


def energy_report(lux=80000.0, budget=PowerBudget(), model=HarvestModel()):
    rows = []
    for mode in ("idle", "idle_tx", "hover", "navigate:BAG", "navigate:DES", "navigate:DGA", "fly"):
        draw = power_draw(mode, budget)
        ratio = charging_ratio(mode, lux, budget, model) if harvest_power(lux, model) > budget.idle else math.nan
        rows.append({"mode": mode, "draw_mw": draw, "charging_ratio": ratio})
    return {
        "lux": lux,
        "harvest_mw": harvest_power(lux, model),
        "modes": rows,
        "duty_cycle_min_per_hour": duty_cycle_minutes(60.0, lux, budget=budget, model=model),
        "pareto": [c.name for c in pareto_frontier(read_cells())],
    }
