"""
Modulated light beacon, photodiode sampling and FFT demodulation.

The beacon radiates a Lambertian pattern switched by a square wave at
``f_mod``. Each photodiode is sampled at ``f_sample`` into a buffer of
``n_fft`` samples; the magnitude spectrum around the modulation bin gives
the received signal strength and an SNR against the off-harmonic floor.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import quat_to_matrix
from .errors import DegenerateSpectrum, DomainError, ValidationError


def lambertian_order(half_power_angle_deg):
    """Order m with cos(half_power_angle)**m = 1/2."""
    c = math.cos(math.radians(half_power_angle_deg))
    if not 0 < c < 1:
        raise ValidationError("half-power angle must lie in (0, 90) degrees", "beacon.half_power_angle")
    return -math.log(2) / math.log(c)


@dataclass(frozen=True)
class BeaconConfig:
    position: np.ndarray
    boresight: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    intensity_at_1m: float = 2450.0   # lux at 1 m on axis
    f_mod: float = 150.0
    duty: float = 0.5
    half_power_angle: float = 60.0
    fov_half_angle: float = 60.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        b = np.asarray(self.boresight, dtype=float)
        n = np.linalg.norm(b)
        if n == 0:
            raise ValidationError("boresight must be non-zero", "beacon.boresight")
        object.__setattr__(self, "boresight", b / n)
        if self.intensity_at_1m < 0:
            raise ValidationError("intensity must be non-negative", "beacon.intensity_at_1m")
        if not 0 < self.duty < 1:
            raise ValidationError("duty must lie in (0, 1)", "beacon.duty")
        if self.f_mod <= 0:
            raise ValidationError("f_mod must be positive", "beacon.f_mod")
        lambertian_order(self.half_power_angle)

    @property
    def m(self):
        return lambertian_order(self.half_power_angle)

    def mirrored(self, plane_point, plane_normal, attenuation=0.3):
        """Virtual image of this beacon in a reflecting plane."""
        n = np.asarray(plane_normal, dtype=float)
        n = n / np.linalg.norm(n)
        d = np.dot(self.position - np.asarray(plane_point, dtype=float), n)
        pos = self.position - 2 * d * n
        bore = self.boresight - 2 * np.dot(self.boresight, n) * n
        return replace(self, position=pos, boresight=bore, intensity_at_1m=self.intensity_at_1m * attenuation)


def received_illuminance(beacon, sensor_position, sensor_normal, fov_half_angle=90.0, response_exponent=1.0):
    """Illuminance (lux) seen by one photodiode.

    ``E = I1 * cos(phi_tx)**m * cos(phi_rx)**p / d**2``, zero outside
    either field of view. ``p = 1`` is an ideal cosine receiver.
    """
    d_vec = np.asarray(sensor_position, dtype=float) - beacon.position
    d2 = float(np.dot(d_vec, d_vec))
    if d2 == 0:
        raise DomainError("sensor coincides with the beacon")
    d = math.sqrt(d2)
    cos_tx = float(np.dot(beacon.boresight, d_vec)) / d
    cos_rx = -float(np.dot(sensor_normal, d_vec)) / d
    if cos_tx < math.cos(math.radians(beacon.fov_half_angle)) - 1e-12 or cos_tx <= 0:
        return 0.0
    if response_exponent > 0:
        if cos_rx < math.cos(math.radians(fov_half_angle)) - 1e-12 or cos_rx <= 0:
            return 0.0
        rx = cos_rx ** response_exponent
    else:
        rx = 1.0
    return beacon.intensity_at_1m * cos_tx ** beacon.m * rx / d2


@dataclass(frozen=True)
class PhotodiodeArray:
    """Ring of photodiodes in the body horizontal plane.

    Sensor ``i`` faces ``theta_i = i * 2 pi / N`` measured from body x
    towards body y. ``response_exponent`` shapes the angular response
    (``cos**p``); 0 gives an omnidirectional sensor.
    """

    n: int = 8
    fov_half_angle: float = 90.0
    response_exponent: float = 2.0
    responsivity: float = 1.0        # counts per lux
    noise_std: float = 5.0           # counts
    f_sample: float = 4800.0
    n_fft: int = 1024
    search_window: int = 2
    detection_threshold: float = 3.0
    radius: float = 0.03             # ring radius, m
    height: float = 0.0              # ring height above the reference point, m

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("array needs at least one sensor", "array.n")
        if self.n_fft < 8 or self.n_fft & (self.n_fft - 1):
            raise ValidationError("n_fft must be a power of two", "array.n_fft")
        if self.noise_std < 0 or self.responsivity <= 0:
            raise ValidationError("noise_std >= 0 and responsivity > 0 required", "array")

    @property
    def angles(self):
        return np.arange(self.n) * 2 * math.pi / self.n

    @property
    def directions(self):
        a = self.angles
        return np.column_stack([np.cos(a), np.sin(a), np.zeros(self.n)])

    @property
    def frame_duration(self):
        return self.n_fft / self.f_sample

    def check_nyquist(self, f_mod):
        if not f_mod < self.f_sample / 2:
            raise ValidationError(f"f_mod {f_mod} Hz violates Nyquist for f_sample {self.f_sample} Hz", "beacon.f_mod")


def ring_array(n, **kwargs):
    return PhotodiodeArray(n=n, **kwargs)


def single_diode(**kwargs):
    """Omnidirectional single sensor used by the gradient methods."""
    kwargs.setdefault("response_exponent", 0.0)
    kwargs.setdefault("fov_half_angle", 180.0)
    kwargs.setdefault("radius", 0.0)
    return PhotodiodeArray(n=1, **kwargs)


def sensor_geometry(array, position, attitude):
    """World positions and normals of each sensor for a body pose."""
    R = quat_to_matrix(attitude)
    dirs = array.directions
    normals = dirs @ R.T
    offsets = (array.radius * dirs + np.array([0.0, 0.0, array.height])) @ R.T
    return np.asarray(position, dtype=float) + offsets, normals


def square_wave(times, f_mod, duty=0.5):
    """1 during the first ``duty`` fraction of each period, else 0."""
    phase = np.mod(np.round(np.asarray(times) * f_mod, 9), 1.0)
    return (phase < duty).astype(float)


def sample_frame(beacons, ambient, array, position, attitude, t0=0.0, rng=None):
    """Raw sample buffers, shape ``(array.n, array.n_fft)``.

    Parameters
    ----------
    beacons : sequence of BeaconConfig
    ambient : float or callable
        Unmodulated background in lux, or a function of the sample times.
    array : PhotodiodeArray
    position, attitude : array_like
        Body pose (world position, body-to-world quaternion).
    t0 : float
        Time of the first sample.
    rng : numpy.random.Generator or int, optional
        Noise source; an int is used as a seed.
    """
    times = t0 + np.arange(array.n_fft) / array.f_sample
    pos, normals = sensor_geometry(array, position, attitude)
    lux = np.zeros((array.n, array.n_fft))
    for b in beacons:
        array.check_nyquist(b.f_mod)
        wave = square_wave(times, b.f_mod, b.duty)
        for i in range(array.n):
            e = received_illuminance(b, pos[i], normals[i], array.fov_half_angle, array.response_exponent)
            if e:
                lux[i] += e * wave
    amb = ambient(times) if callable(ambient) else ambient
    counts = array.responsivity * (lux + amb)
    if array.noise_std > 0:
        if rng is None or isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(rng)
        counts = counts + rng.normal(0.0, array.noise_std, counts.shape)
    return counts


def target_bin(f_mod, f_sample, n_fft):
    return int(round(f_mod * n_fft / f_sample))


def magnitude_spectrum(buffer, taper=None):
    x = np.asarray(buffer, dtype=float)
    if taper is not None:
        x = x * taper(x.shape[-1])
    return np.abs(np.fft.rfft(x, axis=-1))


def fft_peak(buffer, f_mod, f_sample, n_fft, window=2, spectrum=None):
    """Largest spectral magnitude within ``window`` bins of the target bin.

    Returns ``(M_peak, k_peak)``.
    """
    k_t = target_bin(f_mod, f_sample, n_fft)
    if k_t - window <= 0 or k_t + window >= n_fft // 2:
        raise DomainError(f"search window {k_t}+-{window} leaves (0, {n_fft // 2})")
    if spectrum is None:
        if len(buffer) != n_fft:
            raise DomainError(f"buffer length {len(buffer)} != n_fft {n_fft}")
        spectrum = magnitude_spectrum(buffer)
    lo = k_t - window
    seg = spectrum[lo:k_t + window + 1]
    j = int(np.argmax(seg))
    return float(seg[j]), lo + j


def noise_bins(n_fft, k_peak, f_mod, f_sample, window=2, exclude_harmonics=True):
    """Bins used for the SNR floor."""
    n_bins = n_fft // 2 + 1
    keep = np.ones(n_bins, dtype=bool)
    keep[0] = False
    keep[max(0, k_peak - window):k_peak + window + 1] = False
    if exclude_harmonics:
        k_t = f_mod * n_fft / f_sample
        h = 2
        while h * k_t - window < n_bins:
            c = int(round(h * k_t))
            keep[max(0, c - window):c + window + 1] = False
            h += 1
    return np.nonzero(keep)[0]


def compute_snr(spectrum, k_peak, f_mod, f_sample, n_fft, window=2, exclude_harmonics=True):
    """Peak magnitude over the mean magnitude of the noise bins."""
    idx = noise_bins(n_fft, k_peak, f_mod, f_sample, window, exclude_harmonics)
    if idx.size == 0:
        raise DegenerateSpectrum("no bins left for the noise floor")
    floor = float(np.mean(spectrum[idx]))
    peak = float(spectrum[k_peak])
    if floor == 0:
        return math.inf if peak > 0 else 0.0
    return peak / floor


@dataclass(frozen=True)
class SpectralReading:
    peak_magnitude: float
    peak_bin: int
    snr: float
    detected: bool


def demodulate(buffers, array, f_mod):
    """One SpectralReading per sensor buffer."""
    spectra = magnitude_spectrum(buffers)
    out = []
    for s in np.atleast_2d(spectra):
        m, k = fft_peak(None, f_mod, array.f_sample, array.n_fft, array.search_window, spectrum=s)
        snr = compute_snr(s, k, f_mod, array.f_sample, array.n_fft, array.search_window)
        out.append(SpectralReading(m, k, snr, snr >= array.detection_threshold))
    return out


def write_spectral_log(rows, path):
    """Write ``(t, sensor, M_peak, snr)`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "sensor", "M_peak", "snr"])
        for t, i, m, snr in rows:
            w.writerow([f"{t:.4f}", i, f"{m:.6f}", f"{snr:.6f}"])
