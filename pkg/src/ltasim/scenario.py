"""
Scenario configuration and the closed-loop runner.

A scenario file (TOML or JSON) names a platform preset, the beacon(s),
wind, the navigation algorithm and the task parameters. ``run`` wires
optics, guidance, control, dynamics and energy into one fixed-step loop::

    sense (guidance rate) -> guide -> control -> forces -> integrate -> energy
"""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import energy, optics
from .control import Setpoint, control_step, motor_thrusts
from .dynamics import (
    BodyState,
    OrnsteinUhlenbeckGust,
    RigidBodyPlant,
    WindField,
    euler_from_quat,
)
from .errors import LtaSimError, NonFiniteState, ParseError, ValidationError
from .guidance import BagGuidance, DesGuidance, DgaGuidance, DitherConfig
from .platforms import preset

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ALGORITHMS = ("BAG", "DES", "DGA", "none")

# Every accepted key with its default; ``None`` marks a required value.
DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "name": "scenario",
    "seed": None,
    "dt": 0.01,
    "max_duration": 120.0,
    "algorithm": "BAG",
    "success_radius": 1.0,
    "forward_speed": 0.8,
    "altitude": 0.5,
    "yaw_setpoint": 0.0,
    "guidance_rate": 10.0,
    "arena_radius": None,
    "terminate_on_success": True,
    "log_every": 10,
    "platform": {
        "preset": "gt-mab",
        "negative_buoyancy_g": 2.0,
        "controller": {},
    },
    "start": {"position": [0.0, 0.0, 0.5], "yaw": 0.0},
    "beacons": [{
        "position": [7.0, 0.0, 0.5],
        "boresight": [-1.0, 0.0, 0.0],
        "intensity_at_1m": 2450.0,
        "f_mod": 150.0,
        "duty": 0.5,
        "half_power_angle": 60.0,
        "fov_half_angle": 60.0,
    }],
    "reflections": [],
    "ambient_lux": 300.0,
    "sensors": {
        "n": 8,
        "response_exponent": 2.0,
        "fov_half_angle": 90.0,
        "responsivity": 1.0,
        "noise_std": 5.0,
        "f_sample": 4800.0,
        "n_fft": 1024,
        "search_window": 2,
        "detection_threshold": 3.0,
    },
    "wind": {"mean": [0.0, 0.0, 0.0], "gust_sigma": 0.0, "gust_correlation_time": 2.0, "gust_seed": None},
    "dither": {
        "amplitude": 1.4,
        "frequency": 0.4,
        "highpass_cutoff": None,
        "gain": 3.0,
        "demod_phase": 0.0,
        "normalize": True,
        "linearize": True,
    },
    "dga": {"leg": 5, "n_legs": 4, "probe_angle": 0.6, "settle_tol": 0.1, "max_turn": 1.5, "linearize": True,
            "min_separation": 0.1, "measured_speed": True, "turn_speed": 0.5},
    "energy": {"lux": 0.0, "capacity_mah": 250.0, "initial_soc": 1.0},
}

BEACON_DEFAULTS = DEFAULTS["beacons"][0]
REFLECTION_DEFAULTS = {"plane_point": [0.0, 1.0, 0.0], "plane_normal": [0.0, 1.0, 0.0], "attenuation": 0.3, "beacon": 0}
PID_KEYS = {"kp", "ki", "kd", "output_limit", "integrator_limit"}
CONTROLLER_LOOPS = ("altitude_outer", "altitude_inner", "yaw_outer", "yaw_inner", "forward_speed")


# ---------------------------------------------------------------------------
# parsing and validation
# ---------------------------------------------------------------------------

def _merge(defaults, given, path):
    """Recursively fill ``given`` from ``defaults``; reject unknown keys."""
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ValidationError("unknown field", where)
        dflt = defaults[key]
        if isinstance(dflt, dict) and key != "controller":
            if not isinstance(value, dict):
                raise ValidationError("expected a table", where)
            out[key] = _merge(dflt, value, where)
        elif key == "beacons":
            out[key] = [_merge(BEACON_DEFAULTS, _table(b, f"{where}[{i}]"), f"{where}[{i}]") for i, b in enumerate(value)]
        elif key == "reflections":
            out[key] = [_merge(REFLECTION_DEFAULTS, _table(r, f"{where}[{i}]"), f"{where}[{i}]") for i, r in enumerate(value)]
        else:
            out[key] = copy.deepcopy(value)
    return out


def _table(value, where):
    if not isinstance(value, dict):
        raise ValidationError("expected a table", where)
    return value


def _vec(value, n, where):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"expected {n} numbers", where) from None
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        raise ValidationError(f"expected {n} finite numbers", where)
    return arr


def _num(value, where, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError("expected a finite number", where)
    if positive and value <= 0:
        raise ValidationError("must be positive", where)
    if nonneg and value < 0:
        raise ValidationError("must be non-negative", where)
    return float(value)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario. ``data`` is the fully resolved, serialisable form."""

    data: dict

    # convenient typed views
    @property
    def name(self):
        return self.data["name"]

    @property
    def seed(self):
        return self.data["seed"]

    @property
    def dt(self):
        return self.data["dt"]

    @property
    def algorithm(self):
        return self.data["algorithm"]

    @property
    def success_radius(self):
        return self.data["success_radius"]

    @property
    def max_duration(self):
        return self.data["max_duration"]

    def with_overrides(self, **changes):
        """New validated config with top-level or dotted keys replaced.

        ``cfg.with_overrides(seed=3, **{"wind.mean": [8, 0, 0]})``
        """
        data = copy.deepcopy(self.data)
        for key, value in changes.items():
            node = data
            parts = key.split(".")
            for p in parts[:-1]:
                node = node[p]
            node[parts[-1]] = value
        return from_dict(data)

    def to_json(self):
        return json.dumps(self.data, indent=2, sort_keys=True)

    # runtime objects --------------------------------------------------
    def build_platform(self):
        p = self.data["platform"]
        plat = preset(p["preset"], deficit_kg=p["negative_buoyancy_g"] / 1000.0)
        ctrl = plat.controller
        overrides = {}
        for loop, gains in p["controller"].items():
            if loop in CONTROLLER_LOOPS:
                overrides[loop] = replace(getattr(ctrl, loop), **gains)
            else:
                overrides[loop] = gains
        if overrides:
            plat = plat.with_controller(replace(ctrl, **overrides))
        return plat

    def build_beacons(self):
        real = [optics.BeaconConfig(**b) for b in self.data["beacons"]]
        virtual = [
            real[r["beacon"]].mirrored(r["plane_point"], r["plane_normal"], r["attenuation"])
            for r in self.data["reflections"]
        ]
        return real, virtual

    def build_array(self):
        s = dict(self.data["sensors"])
        if self.algorithm in ("DES", "DGA"):
            s.pop("n")
            s.pop("response_exponent")
            s.pop("fov_half_angle")
            return optics.single_diode(**s)
        return optics.PhotodiodeArray(**s)

    def build_wind(self):
        w = self.data["wind"]
        gust = None
        if w["gust_sigma"] > 0:
            gseed = w["gust_seed"] if w["gust_seed"] is not None else [self.seed, 2]
            gust = OrnsteinUhlenbeckGust(w["gust_sigma"], w["gust_correlation_time"], gseed)
        return WindField(np.asarray(w["mean"], dtype=float), gust)

    def build_dither(self):
        d = self.data["dither"]
        return DitherConfig(
            amplitude=d["amplitude"], frequency=d["frequency"], highpass_cutoff=d["highpass_cutoff"],
            gain=d["gain"], initial_heading=self.data["start"]["yaw"], demod_phase=d["demod_phase"],
            normalize=d["normalize"],
        )


def from_dict(raw):
    """Validate a parsed config mapping and fill defaults."""
    if not isinstance(raw, dict):
        raise ValidationError("top level must be a table")
    data = _merge(DEFAULTS, raw, "")
    if data["schema_version"] != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version {data['schema_version']}", "schema_version")
    if data["seed"] is None:
        raise ValidationError("a seed is required for reproducible runs", "seed")
    if isinstance(data["seed"], bool) or not isinstance(data["seed"], int) or data["seed"] < 0:
        raise ValidationError("seed must be a non-negative integer", "seed")
    for key in ("dt", "max_duration", "success_radius", "guidance_rate"):
        data[key] = _num(data[key], key, positive=True)
    data["forward_speed"] = _num(data["forward_speed"], "forward_speed")
    data["altitude"] = _num(data["altitude"], "altitude")
    data["yaw_setpoint"] = _num(data["yaw_setpoint"], "yaw_setpoint")
    if data["dt"] > 0.05:
        raise ValidationError("must not exceed 0.05 s", "dt")
    if data["arena_radius"] is not None:
        data["arena_radius"] = _num(data["arena_radius"], "arena_radius", positive=True)
    if not isinstance(data["log_every"], int) or data["log_every"] < 1:
        raise ValidationError("must be a positive integer", "log_every")
    alg = data["algorithm"]
    match = [a for a in ALGORITHMS if a.lower() == str(alg).lower()]
    if not match:
        raise ValidationError(f"must be one of {ALGORITHMS}", "algorithm")
    data["algorithm"] = match[0]
    if not abs(data["forward_speed"]) <= 1.0:
        raise ValidationError("outside the platform envelope of 1 m/s", "forward_speed")
    data["start"]["position"] = _vec(data["start"]["position"], 3, "start.position").tolist()
    data["start"]["yaw"] = _num(data["start"]["yaw"], "start.yaw")
    data["wind"]["mean"] = _vec(data["wind"]["mean"], 3, "wind.mean").tolist()
    _num(data["wind"]["gust_sigma"], "wind.gust_sigma", nonneg=True)
    _num(data["wind"]["gust_correlation_time"], "wind.gust_correlation_time", positive=True)
    if not data["beacons"] and data["algorithm"] != "none":
        raise ValidationError("at least one beacon is needed for navigation", "beacons")
    for i, b in enumerate(data["beacons"]):
        b["position"] = _vec(b["position"], 3, f"beacons[{i}].position").tolist()
        b["boresight"] = _vec(b["boresight"], 3, f"beacons[{i}].boresight").tolist()
    for i, r in enumerate(data["reflections"]):
        if not 0 <= r["beacon"] < len(data["beacons"]):
            raise ValidationError("refers to a missing beacon", f"reflections[{i}].beacon")
    for loop, gains in data["platform"]["controller"].items():
        where = f"platform.controller.{loop}"
        if loop in CONTROLLER_LOOPS:
            bad = set(_table(gains, where)) - PID_KEYS
            if bad:
                raise ValidationError(f"unknown gain keys {sorted(bad)}", where)
        elif loop not in ("loop_rate", "buoyancy_feedforward"):
            raise ValidationError("unknown field", where)
    cfg = ScenarioConfig(data)
    # eager construction checks every module invariant now rather than mid-run
    try:
        plat = cfg.build_platform()
        real, virtual = cfg.build_beacons()
        arr = cfg.build_array()
        for b in real + virtual:
            arr.check_nyquist(b.f_mod)
        cfg.build_wind()
        if cfg.algorithm == "DES":
            cfg.build_dither()
    except KeyError as exc:
        raise ValidationError(str(exc.args[0]), "platform.preset") from None
    except TypeError as exc:
        raise ValidationError(str(exc)) from None
    if abs(plat.controller.dt - data["dt"]) > 1e-12:
        raise ValidationError(f"dt must match the controller loop period {plat.controller.dt}", "dt")
    return cfg


_TOML_LINE = re.compile(r"line (\d+)")


def parse_text(text, fmt):
    if fmt == "json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _TOML_LINE.search(str(exc))
        raise ParseError(str(exc), int(m.group(1)) if m else None) from None


def detect_format(path, text):
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix == ".toml":
        return "toml"
    return "json" if text.lstrip().startswith("{") else "toml"


def load_scenario(path):
    """Read, parse and validate a scenario file (JSON or TOML)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return from_dict(parse_text(text, detect_format(path, text)))


def bundled_scenarios():
    """Paths of the scenario files shipped with the package."""
    from importlib import resources

    root = resources.files("ltasim").joinpath("scenarios")
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith((".toml", ".json", ".scenario")))


def bundled(name):
    for p in bundled_scenarios():
        if p.stem == name or p.name == name:
            return load_scenario(p)
    raise FileNotFoundError(f"no bundled scenario named {name!r}")


# ---------------------------------------------------------------------------
# logs and metrics
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryLog:
    columns: list
    rows: list = field(default_factory=list)

    def append(self, row):
        self.rows.append(row)

    def array(self):
        return np.array(self.rows, dtype=float).reshape(-1, len(self.columns))

    def column(self, name):
        return self.array()[:, self.columns.index(name)]

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(v)
    if not math.isfinite(v):
        return "nan"
    return f"{v:.6f}"


@dataclass
class RunMetrics:
    success: bool
    path_length: float
    travel_time: float
    min_distance: float
    energy_consumed: float          # mWh
    pitch_oscillation_amplitude: float = math.nan   # deg
    final_time: float = 0.0
    termination: str = ""
    initial_distance: float = math.nan
    net_approach: float = math.nan
    final_soc: float = math.nan

    def to_dict(self):
        d = dict(self.__dict__)
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
            elif isinstance(v, float):
                d[k] = round(v, 9)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


TRAJECTORY_COLUMNS = [
    "t", "x", "y", "z", "qw", "qx", "qy", "qz", "roll", "pitch", "yaw",
    "pwm0", "pwm1", "pwm2", "pwm3", "J", "psi_d", "soc",
]
GUIDANCE_COLUMNS = ["t", "psi_d", "J", "halt", "status"]
ENERGY_COLUMNS = ["t", "mode", "draw_mw", "harvest_mw", "soc"]


@dataclass
class RunResult:
    trajectory: TrajectoryLog
    metrics: RunMetrics
    guidance: TrajectoryLog
    energy: TrajectoryLog
    config: ScenarioConfig

    def __iter__(self):
        # allows ``log, metrics = run(cfg)``
        return iter((self.trajectory, self.metrics))

    def write(self, out_dir, fmt="csv"):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(self.config.to_json() + "\n")
        (out / "metrics.json").write_text(self.metrics.to_json() + "\n")
        if fmt == "json":
            for name, lg in (("trajectory", self.trajectory), ("guidance", self.guidance), ("energy", self.energy)):
                payload = {"columns": lg.columns, "rows": [[_fmt(v) for v in r] for r in lg.rows]}
                (out / f"{name}.json").write_text(json.dumps(payload) + "\n")
        else:
            self.trajectory.to_csv(out / "trajectory.csv")
            self.guidance.to_csv(out / "guidance.csv")
            self.energy.to_csv(out / "energy.csv")
        return out


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

def _make_guidance(cfg, array):
    d = cfg.data
    if cfg.algorithm == "BAG":
        return BagGuidance(array, d["forward_speed"], d["altitude"], d["start"]["yaw"])
    if cfg.algorithm == "DES":
        return DesGuidance(cfg.build_dither(), d["forward_speed"], d["altitude"], d["dither"]["linearize"])
    if cfg.algorithm == "DGA":
        g = d["dga"]
        return DgaGuidance(d["forward_speed"], d["altitude"], d["start"]["yaw"], g["leg"], g["n_legs"],
                           g["probe_angle"], g["settle_tol"], g["max_turn"], g["linearize"], g["min_separation"],
                           g["measured_speed"], g["turn_speed"])
    return None


def run(config, platform=None, initial_state=None, record_pitch_after=0.0):
    """Run one closed-loop scenario.

    Parameters
    ----------
    config : ScenarioConfig
    platform : PlatformConfig, optional
        Overrides the preset named in the config (used by the mounting study).
    initial_state : BodyState, optional
        Overrides the configured start pose.
    record_pitch_after : float
        Pitch amplitude (half the peak-to-peak swing, degrees) is measured
        over ``t >= record_pitch_after``.

    Returns
    -------
    RunResult
        Unpacks as ``(trajectory, metrics)``.
    """
    d = config.data
    dt = d["dt"]
    plat = platform if platform is not None else config.build_platform()
    ctrl = plat.controller
    plant = RigidBodyPlant(plat.inertia, plat.buoyancy, plat.drag, floor=0.0)
    wind = config.build_wind()
    real, virtual = config.build_beacons()
    emitters = real + virtual
    array = config.build_array()
    guidance = _make_guidance(config, array)
    noise_rng = np.random.default_rng([d["seed"], 1])
    ambient = d["ambient_lux"]
    budget = energy.PowerBudget()
    harvest = energy.harvest_power(d["energy"]["lux"])
    battery = energy.BatteryState(d["energy"]["capacity_mah"], d["energy"]["initial_soc"])
    mode = f"navigate:{config.algorithm}" if guidance else "hover"
    draw = energy.power_draw(mode, budget)

    if initial_state is None:
        s = d["start"]
        state = BodyState.at_rest(s["position"], yaw=s["yaw"])
    else:
        state = initial_state
    target = real[0].position if real else None

    guidance_every = max(1, int(round(1.0 / (d["guidance_rate"] * dt))))
    guidance_dt = guidance_every * dt
    n_steps = int(round(d["max_duration"] / dt))
    log_every = d["log_every"]

    traj = TrajectoryLog(list(TRAJECTORY_COLUMNS))
    glog = TrajectoryLog(list(GUIDANCE_COLUMNS))
    elog = TrajectoryLog(list(ENERGY_COLUMNS))

    setpoint = Setpoint(d["altitude"], d["yaw_setpoint"], 0.0 if guidance else d["forward_speed"])
    memory = None
    J = math.nan
    psi_d = setpoint.yaw
    path = 0.0
    prev_pos = state.position.copy()
    d0 = float(np.linalg.norm(state.position - target)) if target is not None else math.nan
    min_dist = d0
    success = False
    travel_time = math.nan
    termination = "max_duration"
    pitch_min, pitch_max = math.inf, -math.inf
    energy_mwh = 0.0
    pwm = np.zeros(plat.n_rotors)

    def log_row(st):
        roll, pitch, yaw = euler_from_quat(st.attitude)
        p = list(pwm) + [0.0] * (4 - len(pwm))
        traj.append([st.time, *st.position, *st.attitude, roll, pitch, yaw, *p[:4], J, psi_d,
                     battery.state_of_charge])

    for k in range(n_steps):
        t = state.time
        if guidance is not None and k % guidance_every == 0:
            buffers = optics.sample_frame(emitters, ambient, array, state.position, state.attitude, t, noise_rng)
            readings = optics.demodulate(buffers, array, emitters[0].f_mod)
            J = guidance.intensity(readings)
            cmd = guidance.update(t, guidance_dt, state.yaw, readings, state.linear_velocity[:2].copy())
            psi_d = cmd.desired_yaw
            setpoint = Setpoint(cmd.altitude, cmd.desired_yaw, 0.0 if cmd.halt else cmd.forward_speed)
            glog.append([t, psi_d, J, cmd.halt, guidance.diag.get("status", "ok")])
        if k % log_every == 0:
            log_row(state)
            elog.append([t, mode, draw, harvest, battery.state_of_charge])

        command, memory = control_step(state, setpoint, ctrl, plat, dt, memory)
        pwm = command.pwm
        wrench = plat.allocation.B @ motor_thrusts(command, plat.thrust_curve)
        try:
            state = plant.step(state, wrench, wind.velocity(t), dt)
        except NonFiniteState as exc:
            log.error("simulation blew up at t=%.2f s (step %d)", exc.time, k + 1)
            raise

        battery = energy.integrate_battery(battery, harvest - draw, dt)
        energy_mwh += draw * dt / 3600.0
        pos = state.position
        path += float(np.linalg.norm(pos - prev_pos))
        prev_pos = pos
        if state.time >= record_pitch_after - 1e-9:
            pitch = math.degrees(euler_from_quat(state.attitude)[1])
            pitch_min = min(pitch_min, pitch)
            pitch_max = max(pitch_max, pitch)
        if target is not None:
            dist = float(np.linalg.norm(pos - target))
            min_dist = min(min_dist, dist)
            if guidance is not None and not success and dist <= d["success_radius"]:
                success = True
                travel_time = state.time
                if d["terminate_on_success"]:
                    termination = "success"
                    break
            if d["arena_radius"] is not None and dist > d["arena_radius"]:
                termination = "left_arena"
                break

    log_row(state)
    elog.append([state.time, mode, draw, harvest, battery.state_of_charge])
    # half the peak-to-peak swing, i.e. the "+-" amplitude
    amplitude = 0.5 * (pitch_max - pitch_min) if math.isfinite(pitch_min) else math.nan
    metrics = RunMetrics(
        success=success,
        path_length=path,
        travel_time=travel_time,
        min_distance=min_dist,
        energy_consumed=energy_mwh,
        pitch_oscillation_amplitude=amplitude,
        final_time=state.time,
        termination=termination if not (success and termination == "max_duration") else "success",
        initial_distance=d0,
        net_approach=d0 - d["success_radius"],
        final_soc=battery.state_of_charge,
    )
    return RunResult(traj, metrics, glog, elog, config)


# ---------------------------------------------------------------------------
# batch
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = ["scenario", "algorithm", "seed", "success", "path_length", "travel_time",
                   "min_distance", "energy_consumed", "termination", "error"]


def _row_for(name, cfg, result=None, error=None):
    row = {"scenario": name, "algorithm": cfg.algorithm if cfg else "", "seed": cfg.seed if cfg else "",
           "success": "", "path_length": "", "travel_time": "", "min_distance": "",
           "energy_consumed": "", "termination": "", "error": error or ""}
    if result is not None:
        m = result.metrics.to_dict()
        for key in ("success", "path_length", "travel_time", "min_distance", "energy_consumed", "termination"):
            row[key] = m[key]
    return row


def batch(scenarios, workers=1):
    """Run scenarios independently and return one summary row per input.

    ``scenarios`` holds paths or ScenarioConfig objects. Errors are caught
    per scenario and recorded in the ``error`` column. Rows keep the input
    order whatever the execution order.
    """
    items = list(scenarios)

    def one(item):
        name = str(item) if not isinstance(item, ScenarioConfig) else item.name
        cfg = None
        try:
            cfg = item if isinstance(item, ScenarioConfig) else load_scenario(item)
            name = cfg.name
            return _row_for(name, cfg, run(cfg))
        except LtaSimError as exc:
            return _row_for(name, cfg, error=f"{type(exc).__name__}: {exc}")

    if workers > 1 and len(items) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_batch_worker, items))
    return [one(i) for i in items]


def _batch_worker(item):
    return batch([item])[0]


def summary_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def summary_json(rows):
    return json.dumps(rows, indent=2, sort_keys=True)
