import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ltasim import optics
from ltasim.errors import DomainError, ValidationError

LEVEL = np.array([1.0, 0.0, 0.0, 0.0])


def beacon(x=1.0, **kw):
    return optics.BeaconConfig(position=np.array([x, 0.0, 0.0]), boresight=np.array([-1.0, 0.0, 0.0]), **kw)


def facing():
    return np.array([1.0, 0.0, 0.0])


def test_lambertian_order_of_sixty_degrees_is_one():
    assert optics.lambertian_order(60.0) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        optics.lambertian_order(0.0)


def test_illuminance_hand_values():
    b = beacon(1.0)
    assert optics.received_illuminance(b, np.zeros(3), facing()) == pytest.approx(2450.0)
    b2 = beacon(2.0)
    assert optics.received_illuminance(b2, np.zeros(3), facing()) == pytest.approx(2450.0 / 4)
    # receiver 60 deg off the emitter axis at the same range, omnidirectional receiver
    pos = np.array([1.0 - math.cos(math.radians(60)), math.sin(math.radians(60)), 0.0])
    off = optics.received_illuminance(b, pos, -np.array([-math.cos(math.radians(60)), math.sin(math.radians(60)), 0]),
                                      response_exponent=0.0)
    assert off == pytest.approx(0.5 * 2450.0)


def test_illuminance_outside_cone_or_behind_is_zero():
    b = beacon(1.0)
    assert optics.received_illuminance(b, np.array([2.0, 0, 0]), facing()) == 0.0
    assert optics.received_illuminance(b, np.zeros(3), -facing()) == 0.0


def test_sample_frame_structure():
    arr = optics.single_diode(noise_std=0.0)
    assert np.all(optics.sample_frame([], 0.0, arr, np.zeros(3), LEVEL) == 0)
    buf = optics.sample_frame([beacon(1.0)], 0.0, arr, np.zeros(3), LEVEL)[0]
    assert set(np.unique(buf)) == {0.0, 2450.0}
    # 150 Hz square wave at 4800 Hz: 16 samples on, 16 off
    assert np.array_equal(buf[:32], np.r_[np.full(16, 2450.0), np.zeros(16)])


def test_sample_frame_deterministic_under_seed():
    arr = optics.ring_array(8)
    a = optics.sample_frame([beacon(3.0)], 300.0, arr, np.zeros(3), LEVEL, rng=5)
    b = optics.sample_frame([beacon(3.0)], 300.0, arr, np.zeros(3), LEVEL, rng=5)
    assert np.array_equal(a, b)


def test_nyquist_and_array_validation():
    with pytest.raises(ValidationError):
        optics.PhotodiodeArray(n_fft=1000)
    with pytest.raises(ValidationError):
        optics.single_diode().check_nyquist(2400.0)


def test_target_bin_and_pure_tone():
    assert optics.target_bin(150.0, 4800.0, 1024) == 32
    n = np.arange(1024)
    tone = 3.0 * np.cos(2 * np.pi * 32 * n / 1024)
    m, k = optics.fft_peak(tone, 150.0, 4800.0, 1024)
    assert k == 32 and m == pytest.approx(3.0 * 1024 / 2)
    assert optics.fft_peak(np.zeros(1024), 150.0, 4800.0, 1024)[0] == 0.0


@given(st.integers(2, 510))
def test_pure_tone_found_at_every_bin(k):
    n = np.arange(1024)
    tone = np.sin(2 * np.pi * k * n / 1024 + 0.3)
    f = k * 4800.0 / 1024
    _, kp = optics.fft_peak(tone, f, 4800.0, 1024, window=1)
    assert kp == k


def test_snr_definitions():
    flat = np.ones(513)
    assert optics.compute_snr(flat, 32, 150.0, 4800.0, 1024) == pytest.approx(1.0)
    spec = np.full(513, 1e-3)
    spec[32] = 512.0
    assert optics.compute_snr(spec, 32, 150.0, 4800.0, 1024) == pytest.approx(512.0 / 1e-3)


def test_harmonic_exclusion_raises_snr():
    arr = optics.single_diode(noise_std=1.0)
    buf = optics.sample_frame([beacon(2.0)], 0.0, arr, np.zeros(3), LEVEL, rng=0)[0]
    spec = optics.magnitude_spectrum(buf)
    honest = optics.compute_snr(spec, 32, 150.0, 4800.0, 1024, exclude_harmonics=True)
    naive = optics.compute_snr(spec, 32, 150.0, 4800.0, 1024, exclude_harmonics=False)
    assert naive < honest


def test_peak_decays_with_range():
    arr = optics.single_diode(noise_std=0.0)
    peaks = []
    for d in np.linspace(0.5, 10, 20):
        buf = optics.sample_frame([beacon(d)], 0.0, arr, np.zeros(3), LEVEL)
        peaks.append(optics.demodulate(buf, arr, 150.0)[0].peak_magnitude)
    assert np.all(np.diff(peaks) <= 0)


def test_ambient_rejected():
    arr = optics.single_diode(noise_std=0.0)
    dark = optics.demodulate(optics.sample_frame([beacon(3.0)], 0.0, arr, np.zeros(3), LEVEL), arr, 150.0)[0]
    lit = optics.demodulate(optics.sample_frame([beacon(3.0)], 5000.0, arr, np.zeros(3), LEVEL), arr, 150.0)[0]
    assert abs(lit.peak_magnitude - dark.peak_magnitude) / dark.peak_magnitude < 0.01


def test_window_outside_spectrum_is_domain_error():
    with pytest.raises(DomainError):
        optics.fft_peak(np.zeros(1024), 4.6875, 4800.0, 1024, window=2)


def test_reflection_is_mirrored_and_attenuated():
    b = optics.BeaconConfig(position=np.array([3.0, 0.0, 0.5]), boresight=np.array([-1.0, 1.0, 0.0]))
    v = b.mirrored((0, 1.0, 0), (0, 1.0, 0), 0.3)
    assert np.allclose(v.position, [3.0, 2.0, 0.5])
    assert np.allclose(v.boresight, np.array([-1.0, -1.0, 0.0]) / math.sqrt(2))
    assert v.intensity_at_1m == pytest.approx(0.3 * b.intensity_at_1m)


def test_detection_flag_follows_threshold():
    arr = optics.single_diode()
    r = optics.demodulate(optics.sample_frame([beacon(3.0)], 300.0, arr, np.zeros(3), LEVEL, rng=1), arr, 150.0)[0]
    assert r.detected == (r.snr >= 3.0)
    r = optics.demodulate(optics.sample_frame([], 300.0, arr, np.zeros(3), LEVEL, rng=1), arr, 150.0)[0]
    assert not r.detected
