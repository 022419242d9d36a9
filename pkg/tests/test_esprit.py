from math import pi

import numpy as np
import pytest

from pysbfd.exceptions import EstimationError, WrongArguments
from pysbfd.sensing import (
    CovarianceMatrix, esprit_phases, periodogram_peaks, smoothed_covariance, wrap_phase,
)

BIN = 2 * pi / 4096


def cisoids(phases, n_rows, n_cols=1, amplitudes=None, rng=None, noise_power=0.0):
    rows = np.arange(n_rows)[:, None]
    data = np.zeros((n_rows, n_cols), dtype=complex)
    amplitudes = amplitudes if amplitudes is not None else [1.0] * len(phases)

    for phase, amplitude in zip(phases, amplitudes):
        column_phases = np.ones(n_cols) if rng is None else np.exp(2j * pi * rng.random(n_cols))
        data += amplitude * np.exp(1j * phase * rows) * column_phases[None, :]

    if noise_power:
        data += np.sqrt(noise_power / 2) * (
            rng.standard_normal(data.shape) + 1j * rng.standard_normal(data.shape))

    return data


def test_wrap_phase():
    assert wrap_phase(pi) == pytest.approx(pi)
    assert wrap_phase(-pi) == pytest.approx(pi)
    assert wrap_phase(3 * pi / 2) == pytest.approx(-pi / 2)
    assert np.allclose(wrap_phase(np.array([0.1, 2 * pi + 0.1])), [0.1, 0.1])


def test_smoothed_covariance():
    cov = smoothed_covariance(np.ones(4), 2)

    assert isinstance(cov, CovarianceMatrix)
    assert cov.size == 2
    assert cov.n_snapshots == 3
    assert np.allclose(cov.r, np.ones((2, 2)))

    cov = smoothed_covariance(np.ones((10, 3)), 4)
    assert cov.n_snapshots == 21

    for bad in (0, 11):
        with pytest.raises(WrongArguments):
            smoothed_covariance(np.ones((10, 3)), bad)

    with pytest.raises(WrongArguments):
        smoothed_covariance(np.ones((0, 3)), 1)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_smoothed_covariance_invariants(seed):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((40, 5)) + 1j * rng.standard_normal((40, 5))

    r = smoothed_covariance(data, 12).r
    exchange = np.eye(12)[::-1]

    assert np.allclose(r, r.conj().T, atol=1e-12)
    assert np.allclose(r, exchange @ r.conj() @ exchange, atol=1e-12)

    values = np.linalg.eigvalsh(r)
    assert values.min() >= -1e-10 * np.trace(r).real


def test_esprit_single_cisoid():
    phases = esprit_phases(smoothed_covariance(cisoids([0.7], 32, 4), 16), 1).phases
    assert phases == pytest.approx(np.array([0.7]), abs=1e-9)

    phases = esprit_phases(smoothed_covariance(np.ones((20, 3)), 8), 1).phases
    assert phases == pytest.approx(np.array([0.0]), abs=1e-9)

    phases = esprit_phases(smoothed_covariance(cisoids([-3.0], 32), 16), 1).phases
    assert phases == pytest.approx(np.array([-3.0]), abs=1e-9)


def test_esprit_two_lines():
    data = cisoids([-0.3, 0.3], 64)
    phases = esprit_phases(smoothed_covariance(data, 16), 2).phases

    assert np.all(np.diff(phases) > 0)
    assert phases == pytest.approx(np.array([-0.3, 0.3]), abs=1e-8)


def test_esprit_scale_invariance():
    rng = np.random.default_rng(11)
    data = cisoids([-1.1, 0.5], 48, 6, amplitudes=[1.0, 0.7], rng=rng, noise_power=0.1)

    cov = smoothed_covariance(data, 16)
    phases = esprit_phases(cov, 2).phases

    for scale in (1e-3, 7.0, 1e4):
        scaled = esprit_phases(CovarianceMatrix(r=cov.r * scale, n_snapshots=cov.n_snapshots), 2).phases
        assert scaled == pytest.approx(phases, abs=1e-10)


def test_esprit_conjugation_symmetry():
    rng = np.random.default_rng(12)
    data = cisoids([-1.1, 0.5], 48, 6, amplitudes=[1.0, 0.7], rng=rng, noise_power=0.1)

    phases = esprit_phases(smoothed_covariance(data, 16), 2).phases
    mirrored = esprit_phases(smoothed_covariance(data.conj(), 16), 2).phases

    assert mirrored == pytest.approx(np.sort(-phases), abs=1e-9)


def test_esprit_errors():
    cov = smoothed_covariance(cisoids([0.2], 16), 4)

    for order in (0, 4, 5):
        with pytest.raises(WrongArguments):
            esprit_phases(cov, order)

    with pytest.raises(EstimationError):
        esprit_phases(smoothed_covariance(np.zeros((16, 2)), 4), 1)

    # Rank one data can not support two lines.
    with pytest.raises(EstimationError):
        esprit_phases(smoothed_covariance(np.ones((16, 2)), 4), 2)


def test_periodogram_peaks():
    assert periodogram_peaks(cisoids([0.5], 64), 1).phases == pytest.approx(np.array([0.5]), abs=BIN)

    phases = periodogram_peaks(cisoids([-0.3, 0.3], 64), 2).phases
    assert phases == pytest.approx(np.array([-0.3, 0.3]), abs=BIN)

    # Lines close to the spectrum edge wrap around.
    assert periodogram_peaks(cisoids([pi - 0.001], 64), 1).phases == pytest.approx(np.array([pi - 0.001]), abs=BIN)

    with pytest.raises(EstimationError) as e:
        periodogram_peaks(np.zeros((16, 3)), 1)

    assert 'no peaks' in e.value.message

    # Flat spectrum of an impulse has no peaks at all.
    with pytest.raises(EstimationError) as e:
        periodogram_peaks(np.eye(16)[:, :1], 1)

    assert 'Found 0' in e.value.message

    with pytest.raises(WrongArguments):
        periodogram_peaks(cisoids([0.5], 64), 1, n_fft=255)


def test_esprit_matches_periodogram():
    rng = np.random.default_rng(2024)
    agreed = 0
    n_trials = 200

    for _ in range(n_trials):
        phase = rng.uniform(-0.5, 0.5)
        data = cisoids([phase], 600, 14, amplitudes=[np.sqrt(10)], rng=rng, noise_power=1.0)

        estimated = esprit_phases(smoothed_covariance(data, 64), 1).phases[0]
        oracle = periodogram_peaks(data, 1).phases[0]

        agreed += abs(estimated - oracle) <= BIN

    assert agreed >= 0.99 * n_trials
