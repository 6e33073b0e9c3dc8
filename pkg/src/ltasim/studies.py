"""
Experiment suites built on the runner: solar-panel mounting, bearing
accuracy of the photodiode ring, step responses and the wind pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import optics
from .dynamics import BodyState, quat_from_euler
from .errors import ValidationError
from .guidance import bag_bearing
from .scenario import from_dict, run

# ANYSOLAR SM811K08L, the array carried in every mounting variant
PANEL_MASS_KG = 0.0236
# outrigger frame that keeps a bottom-mounted array out of the hull shadow
BOTTOM_FRAME_MASS_KG = 0.0455


@dataclass(frozen=True)
class MountingVariant:
    """Where the solar array sits and what it does to the mass properties.

    ``panel_position`` is the array's centre of mass relative to the
    envelope centre (body frame, m). ``added_mass`` counts structure beyond
    the array itself, in grams. ``cg_override`` replaces the combined CG
    outright, which models idealised or deliberately unstable builds.
    """

    name: str
    panel_position: tuple = (0.0, 0.0, 0.0)
    panel_mass: float = PANEL_MASS_KG
    added_mass: float = 0.0          # g
    cg_override: tuple = None

    def inertia(self, base):
        """Combined InertiaModel with the array (and any frame) attached."""
        kg = self.panel_mass + self.added_mass / 1000.0
        out = base.with_point_mass(kg, self.panel_position) if kg > 0 else base
        if self.cg_override is not None:
            from dataclasses import replace

            out = replace(out, cg_offset=np.asarray(self.cg_override, dtype=float))
        return out

    @property
    def induced_cg_offset(self):
        from .platforms import GT_MAB_MASS, hull_inertia

        return self.inertia(hull_inertia(GT_MAB_MASS)).cg_offset


MOUNTING_VARIANTS = {
    # array hung on one flank, a few cm ahead of the hull's vertical axis
    "side": MountingVariant("side", panel_position=(0.075, 0.0, 0.0)),
    "bottom": MountingVariant("bottom", panel_position=(0.0, 0.0, -0.25), added_mass=BOTTOM_FRAME_MASS_KG * 1000),
    "top": MountingVariant("top", panel_position=(0.0, 0.0, 0.30)),
    # no pendulum: CG at the CB
    "zero": MountingVariant("zero", panel_mass=0.0, cg_override=(0.0, 0.0, 0.0)),
    # CG above the CB
    "cg-above-cb": MountingVariant("cg-above-cb", panel_mass=0.0, cg_override=(0.0, 0.0, 0.05)),
}


def mounting_variant(name):
    try:
        return MOUNTING_VARIANTS[name]
    except KeyError:
        raise ValidationError(f"unknown mounting variant {name!r}; choose from {sorted(MOUNTING_VARIANTS)}",
                              "variant") from None


MOUNTING_BASE = {
    "name": "mounting",
    "seed": 0,
    "algorithm": "none",
    "forward_speed": 0.1,
    "max_duration": 30.0,
    "beacons": [],
    "start": {"position": [0.0, 0.0, 0.5], "yaw": 0.0},
}


@dataclass
class MountingResult:
    variant: MountingVariant
    metrics: object
    pitch: np.ndarray = field(repr=False)
    time: np.ndarray = field(repr=False)
    tilt: np.ndarray = field(repr=False, default=None)

    @property
    def amplitude(self):
        return self.metrics.pitch_oscillation_amplitude

    def diverges(self, window=2.0):
        """Tilt from vertical grows monotonically over the first ``window`` seconds."""
        sel = self.time <= window + 1e-9
        p = self.tilt[sel]
        return bool(p.size > 2 and np.all(np.diff(p) >= 0) and p[-1] > p[0])


def mounting_stability_study(variant, base=None, duration=None, initial_pitch=0.0):
    """Straight-line flight at the base forward speed with a mounting variant.

    Parameters
    ----------
    variant : MountingVariant or str
    base : ScenarioConfig, optional
        Defaults to a 30 s, 0.1 m/s straight line with no beacon.
    duration : float, optional
        Overrides ``max_duration``.
    initial_pitch : float
        Starting pitch in radians.

    Returns
    -------
    MountingResult
        ``metrics.pitch_oscillation_amplitude`` is half the peak-to-peak
        pitch swing in degrees.
    """
    if isinstance(variant, str):
        variant = mounting_variant(variant)
    cfg = base if base is not None else from_dict(dict(MOUNTING_BASE))
    if duration is not None:
        cfg = cfg.with_overrides(max_duration=float(duration))
    plat = cfg.build_platform()
    plat = plat.with_inertia(variant.inertia(plat.inertia))
    s = cfg.data["start"]
    state = BodyState.at_rest(s["position"], yaw=s["yaw"], pitch=initial_pitch)
    cfg = cfg.with_overrides(log_every=1)
    result = run(cfg, platform=plat, initial_state=state)
    log = result.trajectory
    roll, pitch = log.column("roll"), log.column("pitch")
    tilt = np.degrees(np.arccos(np.clip(np.cos(roll) * np.cos(pitch), -1.0, 1.0)))
    return MountingResult(variant, result.metrics, np.degrees(pitch), log.column("t"), tilt)


# ---------------------------------------------------------------------------
# bearing accuracy
# ---------------------------------------------------------------------------

SWEEP_ANGLES = np.arange(16) * 22.5


def reflective_wall(beacon, wall_y=1.0, attenuation=0.3):
    """Virtual image of ``beacon`` in a wall at ``y = wall_y``."""
    return beacon.mirrored((0.0, wall_y, 0.0), (0.0, 1.0, 0.0), attenuation)


def bearing_error_sweep(sizes=(4, 8, 16), environment="clean", distance=3.0, frames=50, seed=0,
                        angles=SWEEP_ANGLES, ambient=300.0, array_kwargs=None, wall_y=1.0):
    """Median absolute BAG bearing error per array size and rotation.

    The vehicle sits at the origin; the beacon sits ``distance`` metres
    away on +x facing it. For each rotation the body yaw is set so the true
    relative bearing is ``-angle``, and the median of ``frames`` seeded
    frames is reported.

    Returns
    -------
    dict
        ``{n: np.ndarray of 16 median errors in degrees}``.
    """
    if environment not in ("clean", "reflective"):
        raise ValidationError("environment must be clean or reflective", "environment")
    beacon = optics.BeaconConfig(position=np.array([distance, 0.0, 0.0]), boresight=np.array([-1.0, 0.0, 0.0]))
    emitters = [beacon]
    if environment == "reflective":
        emitters.append(reflective_wall(beacon, wall_y))
    out = {}
    for n in sizes:
        arr = optics.ring_array(n, **(array_kwargs or {}))
        rng = np.random.default_rng([seed, n])
        errs = []
        for ang in angles:
            yaw = math.radians(ang)
            q = quat_from_euler(0.0, 0.0, yaw)
            true = math.atan2(0.0, distance)  # world bearing to the beacon
            e = []
            for f in range(frames):
                buf = optics.sample_frame(emitters, ambient, arr, np.zeros(3), q, f * arr.frame_duration, rng)
                readings = optics.demodulate(buf, arr, beacon.f_mod)
                est = bag_bearing(readings, arr, current_yaw=yaw)
                diff = (est - true + math.pi) % (2 * math.pi) - math.pi
                e.append(abs(math.degrees(diff)))
            errs.append(float(np.median(e)))
        out[n] = np.array(errs)
    return out


def bearing_table(errors, angles=SWEEP_ANGLES):
    """Rows ``(angle_deg, n, median_error_deg)`` for polar plots."""
    return [(float(a), n, float(errors[n][i])) for n in sorted(errors) for i, a in enumerate(angles)]


# ---------------------------------------------------------------------------
# step responses
# ---------------------------------------------------------------------------

@dataclass
class StepResponse:
    time: np.ndarray = field(repr=False)
    value: np.ndarray = field(repr=False)
    target: float
    start: float
    settle_band: float = 0.05

    @property
    def overshoot(self):
        """Peak excursion past the target as a fraction of the step."""
        step = self.target - self.start
        if step == 0:
            return 0.0
        return max(0.0, float(np.max((self.value - self.target) / step)))

    @property
    def reached(self):
        step = self.target - self.start
        return bool(np.any((self.value - self.start) / step >= 1.0 - self.settle_band))

    @property
    def settling_time(self):
        """First time after which the response stays in the band; nan if never."""
        band = self.settle_band * abs(self.target - self.start)
        outside = np.abs(self.value - self.target) > band
        if outside[-1]:
            return math.nan
        idx = np.nonzero(outside)[0]
        return float(self.time[0] if idx.size == 0 else self.time[idx[-1] + 1])

    def holds(self, after):
        band = self.settle_band * abs(self.target - self.start)
        sel = self.time >= after
        return bool(np.all(np.abs(self.value[sel] - self.target) <= band))

    def summary(self):
        return {"target": self.target, "overshoot": self.overshoot, "settling_time": self.settling_time,
                "reached": self.reached}


def altitude_step(platform="gt-mab", target=0.5, duration=30.0, start_height=0.0, negative_buoyancy_g=2.0,
                  seed=0, controller=None):
    """Altitude response from rest on the floor to ``target``."""
    cfg = from_dict({
        "name": f"altitude-{platform}", "seed": seed, "algorithm": "none", "forward_speed": 0.0,
        "altitude": target, "max_duration": duration, "beacons": [], "log_every": 1,
        "start": {"position": [0.0, 0.0, start_height], "yaw": 0.0},
        "platform": {"preset": platform, "negative_buoyancy_g": negative_buoyancy_g,
                     "controller": controller or {}},
    })
    return response_of(cfg, "z", target, start_height)


def yaw_step(step_deg=30.0, duration=30.0, seed=0, controller=None):
    cfg = from_dict({
        "name": "yaw-step", "seed": seed, "algorithm": "none", "forward_speed": 0.0,
        "yaw_setpoint": math.radians(step_deg), "max_duration": duration, "beacons": [], "log_every": 1,
        "platform": {"controller": controller or {}},
    })
    return response_of(cfg, "yaw", math.radians(step_deg), 0.0)


def response_of(cfg, column, target, start):
    result = run(cfg)
    log = result.trajectory
    return StepResponse(log.column("t"), log.column(column), target, start)


def tune(cfg, duration=30.0):
    """Altitude and yaw step responses for the scenario's platform and gains."""
    p = cfg.data["platform"]
    alt = altitude_step(p["preset"], cfg.data["altitude"], duration, 0.0, p["negative_buoyancy_g"], cfg.seed,
                        p["controller"])
    out = {"altitude": alt.summary()}
    if p["preset"] == "gt-mab":
        out["yaw"] = yaw_step(30.0, duration, cfg.seed, p["controller"]).summary()
    return out


# ---------------------------------------------------------------------------
# wind robustness
# ---------------------------------------------------------------------------

def wind_suite(base, speeds=(8.0, 14.0), seeds=range(1, 11), algorithms=("BAG", "DES", "DGA")):
    """Success flags for every (speed, algorithm, seed) under a steady headwind.

    ``base`` is a ScenarioConfig whose beacon lies along +x; the wind blows
    along -x. Returns ``{(speed, algorithm): [bool, ...]}`` in seed order.
    """
    out = {}
    for speed in speeds:
        for alg in algorithms:
            flags = []
            for seed in seeds:
                cfg = base.with_overrides(algorithm=alg, seed=int(seed), **{"wind.mean": [-float(speed), 0.0, 0.0]})
                flags.append(run(cfg).metrics.success)
            out[(float(speed), alg)] = flags
    return out


def wind_pattern_holds(results, seed_index):
    """BAG alone succeeds at 8 m/s and nothing succeeds at 14 m/s for one seed."""
    r = {k: v[seed_index] for k, v in results.items()}
    return (r[(8.0, "BAG")] and not r[(8.0, "DES")] and not r[(8.0, "DGA")]
            and not any(r[(14.0, a)] for a in ("BAG", "DES", "DGA")))
