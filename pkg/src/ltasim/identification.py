"""
System identification: drag coefficients and thrust allocation.

Drag is fitted per axis from steady (speed, force) pairs against
``F = D*v + D2*v**2``. The allocation matrix is solved by least squares
from trials pairing a rotor-thrust vector with the measured body wrench.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .dynamics import DragCoefficients, ForceTorque
from .errors import InsufficientSamples, ParseError, RankDeficient
from .propulsion import AllocationMatrix

log = logging.getLogger(__name__)

AXES = ("vx", "vy", "vz", "wx", "wy", "wz")

# low-speed points pin the linear term, high-speed points the quadratic one
LOW_SPEEDS = (0.2, 0.5, 0.7)
HIGH_SPEEDS = (1.0, 1.5, 2.0)
DEFAULT_SPEEDS = LOW_SPEEDS + HIGH_SPEEDS
GROUP_SPLIT = 0.85


@dataclass(frozen=True)
class DragSample:
    axis: int
    speed: float
    force: float
    group: str = ""

    def resolved_group(self):
        if self.group:
            return self.group
        return "low" if self.speed < GROUP_SPLIT else "high"


@dataclass(frozen=True)
class DragSampleSet:
    samples: tuple

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        for s in self.samples:
            if not 0 <= s.axis < 6:
                raise ValueError(f"axis index must be 0..5, got {s.axis}")
            if not s.speed > 0:
                raise ValueError(f"sample speeds must be positive, got {s.speed}")

    def axis(self, i):
        pts = [s for s in self.samples if s.axis == i]
        return np.array([s.speed for s in pts]), np.array([s.force for s in pts])

    def groups(self, i):
        return {s.resolved_group() for s in self.samples if s.axis == i}

    def axes_present(self):
        return sorted({s.axis for s in self.samples})

    def scaled(self, k):
        return DragSampleSet(DragSample(s.axis, s.speed, k * s.force, s.group) for s in self.samples)

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class DragFit:
    coefficients: DragCoefficients
    residual_rms: np.ndarray
    clamped: tuple = ()


def _fit_axis(v, f, quadratic):
    if quadratic:
        A = np.column_stack([v, v * v])
    else:
        A = v[:, None]
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise RankDeficient("drag samples do not separate the linear and quadratic terms")
    coef, *_ = np.linalg.lstsq(A, f, rcond=None)
    return (coef[0], coef[1]) if quadratic else (coef[0], 0.0)


def fit_drag(samples, quadratic=True, axes=None):
    """Least-squares drag fit over all samples, one axis at a time.

    Parameters
    ----------
    samples : DragSampleSet
    quadratic : bool
        Fit the quadratic term as well as the linear one.
    axes : iterable of int, optional
        Axes to fit. Defaults to all six; axes not listed get zero
        coefficients and NaN residuals.

    Returns
    -------
    DragFit
        Coefficients plus the per-axis RMS of (model - sample).

    Negative unconstrained estimates are clamped to zero with a warning and
    the remaining term is refitted on its own.
    """
    axes = range(6) if axes is None else list(axes)
    lin = np.zeros(6)
    quad = np.zeros(6)
    rms = np.full(6, np.nan)
    clamped = []
    for i in axes:
        v, f = samples.axis(i)
        if len(v) < 2:
            raise InsufficientSamples(f"axis {AXES[i]} needs at least 2 samples, has {len(v)}")
        if quadratic and len(samples.groups(i)) < 2:
            raise InsufficientSamples(f"axis {AXES[i]} needs both low- and high-speed samples")
        d, d2 = _fit_axis(v, f, quadratic)
        if d2 < 0:
            log.warning("axis %s: negative quadratic drag %.3g clamped to 0", AXES[i], d2)
            clamped.append((i, "quadratic"))
            d, d2 = max(np.dot(v, f) / np.dot(v, v), 0.0), 0.0
        if d < 0:
            log.warning("axis %s: negative linear drag %.3g clamped to 0", AXES[i], d)
            clamped.append((i, "linear"))
            d = 0.0
            d2 = max(np.dot(v * v, f) / np.dot(v * v, v * v), 0.0) if quadratic else 0.0
        lin[i], quad[i] = d, d2
        rms[i] = float(np.sqrt(np.mean((d * v + d2 * v * v - f) ** 2)))
    return DragFit(DragCoefficients(lin, quad), rms, tuple(clamped))


def synthetic_wind_tunnel(true_coeffs, speeds=DEFAULT_SPEEDS, noise=0.0, seed=0, axes=range(6)):
    """Samples of the drag model with multiplicative gaussian noise.

    Each axis draws from the same seeded generator in axis order, so the
    set is a deterministic function of the arguments.
    """
    speeds = np.asarray(list(speeds), dtype=float)
    if speeds.size == 0:
        raise ValueError("speeds must be non-empty")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    out = []
    for i in axes:
        f = true_coeffs.linear[i] * speeds + true_coeffs.quadratic[i] * speeds ** 2
        if noise > 0:
            f = f * (1 + noise * rng.standard_normal(speeds.size))
        out.extend(DragSample(i, float(v), float(fi)) for v, fi in zip(speeds, f))
    return DragSampleSet(out)


# ---------------------------------------------------------------------------
# allocation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AllocationTrial:
    thrusts: np.ndarray
    wrench: ForceTorque


@dataclass(frozen=True)
class AllocationTrialSet:
    trials: tuple

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))

    def matrices(self):
        T = np.array([np.asarray(t.thrusts, dtype=float) for t in self.trials])
        W = np.array([t.wrench.as_vector() for t in self.trials])
        return T, W


def solve_allocation(trials):
    """Least-squares B minimising sum_k ||B t_k - w_k||^2."""
    if not trials.trials:
        raise RankDeficient("no allocation trials")
    T, W = trials.matrices()
    n = T.shape[1]
    if np.linalg.matrix_rank(T) < n:
        raise RankDeficient(f"trial thrust vectors span rank {np.linalg.matrix_rank(T)} < {n} rotors")
    Bt, *_ = np.linalg.lstsq(T, W, rcond=None)
    return AllocationMatrix(Bt.T)


def single_rotor_trials(B, thrust=0.1):
    """One trial per rotor with only that rotor running."""
    n = B.n_rotors
    out = []
    for j in range(n):
        t = np.zeros(n)
        t[j] = thrust
        out.append(AllocationTrial(t, ForceTorque.from_vector(B.B @ t)))
    return AllocationTrialSet(out)


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

def _axis_index(token, line):
    token = token.strip()
    if token in AXES:
        return AXES.index(token)
    try:
        idx = int(token)
    except ValueError:
        raise ParseError(f"unknown axis {token!r}", line, "axis") from None
    if not 0 <= idx < 6:
        raise ParseError(f"axis index {idx} out of range", line, "axis")
    return idx


def _float(row, key, line):
    try:
        return float(row[key])
    except (KeyError, TypeError):
        raise ParseError("missing value", line, key) from None
    except ValueError:
        raise ParseError(f"not a number: {row[key]!r}", line, key) from None


def read_drag_csv(path):
    """Read ``axis,speed,force[,group]`` rows."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"axis", "speed", "force"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"missing columns {sorted(missing)}", 1)
        samples = []
        for line, row in enumerate(reader, start=2):
            speed = _float(row, "speed", line)
            if speed <= 0:
                raise ParseError("speed must be positive", line, "speed")
            samples.append(DragSample(
                _axis_index(row["axis"], line), speed, _float(row, "force", line),
                (row.get("group") or "").strip(),
            ))
    return DragSampleSet(samples)


def write_drag_csv(samples, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["axis", "speed", "force", "group"])
        for s in samples.samples:
            w.writerow([AXES[s.axis], f"{s.speed:.9g}", f"{s.force:.12g}", s.resolved_group()])


WRENCH_COLUMNS = ("fx", "fy", "fz", "mx", "my", "mz")


def read_allocation_csv(path):
    """Read trials with columns ``t0..t{N-1}`` followed by the six wrench columns."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        tcols = [c for c in names if c.startswith("t") and c[1:].isdigit()]
        tcols.sort(key=lambda c: int(c[1:]))
        missing = set(WRENCH_COLUMNS) - set(names)
        if not tcols or missing:
            raise ParseError(f"need t0..tN and {', '.join(WRENCH_COLUMNS)} columns", 1)
        trials = []
        for line, row in enumerate(reader, start=2):
            t = np.array([_float(row, c, line) for c in tcols])
            w = np.array([_float(row, c, line) for c in WRENCH_COLUMNS])
            trials.append(AllocationTrial(t, ForceTorque.from_vector(w)))
    return AllocationTrialSet(trials)


def write_allocation_csv(trials, path):
    T, W = trials.matrices()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"t{j}" for j in range(T.shape[1])] + list(WRENCH_COLUMNS))
        for t, wr in zip(T, W):
            w.writerow([f"{x:.12g}" for x in t] + [f"{x:.12g}" for x in wr])
