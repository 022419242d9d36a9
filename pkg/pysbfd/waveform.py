from typing import NamedTuple, Sequence, Union

import numpy as np

from .exceptions import BeamformingError, WrongArguments

QPSK_SCALE = 1 / np.sqrt(2)

NORM_FLOOR = 1e-12


class ResourceGrid(NamedTuple):
    """Complex resource elements of one contiguous subcarrier range."""

    data: np.ndarray
    """Matrix indexed (local subcarrier, symbol)."""

    base_sc: int = 0
    """Global subcarrier index of row 0."""

    @property
    def shape(self):
        return self.data.shape


class BeamWeights(NamedTuple):
    """Unit norm array weights."""

    w: np.ndarray
    """Complex vector, one entry per antenna."""

    @property
    def n_antennas(self) -> int:
        return len(self.w)


def steering_vector(n_antennas: int, theta_rad: float) -> np.ndarray:
    """Returns half-wavelength ULA response exp(i*pi*k*sin(theta)), k = 0..n-1.

    :param n_antennas: Array elements.
    :param theta_rad: Angle relative to boresight.

    """
    if n_antennas < 1:
        raise WrongArguments(f'Array needs at least one antenna, not {n_antennas}.')

    return np.exp(1j * np.pi * np.arange(n_antennas) * np.sin(theta_rad))


def conjugate_beamformer(angles: Sequence[float], n_antennas: int) -> BeamWeights:
    """Forms one beam toward all given angles: normalized sum of conjugate steering vectors.

    :param angles: Target angles relative to boresight.
    :param n_antennas: Array elements.

    """
    if not len(angles):
        raise WrongArguments('At least one beam angle is required.')

    combined = sum(np.conj(steering_vector(n_antennas, theta)) for theta in angles)
    norm = np.linalg.norm(combined)

    if norm < NORM_FLOOR:
        raise BeamformingError(f'Conjugate steering vectors toward {list(angles)} cancel out.')

    return BeamWeights(w=combined / norm)


def beam_gain(weights: BeamWeights, theta_rad: float) -> complex:
    """Returns complex array gain sum_k w[k] * a_k(theta).

    Conjugate weights are applied as is, so a beam formed toward a single angle
    has |gain|^2 equal to the number of antennas in that direction.

    """
    return complex(weights.w @ steering_vector(weights.n_antennas, theta_rad))


def generate_qpsk_grid(rows: int, cols: int, rng: np.random.Generator, base_sc: int = 0) -> ResourceGrid:
    """Draws a grid of unit modulus QPSK symbols (+-1 +-i)/sqrt(2).

    :param rows: Subcarriers.
    :param cols: Symbols.
    :param rng: Random generator.
    :param base_sc: Global subcarrier index of the first row.

    """
    if rows < 1 or cols < 1:
        raise WrongArguments(f'Grid dimensions must be positive, not {rows}x{cols}.')

    if base_sc < 0:
        raise WrongArguments(f'Base subcarrier must not be negative, not {base_sc}.')

    bits = rng.integers(0, 2, size=(2, rows, cols))
    data = QPSK_SCALE * ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1]))

    return ResourceGrid(data=data, base_sc=base_sc)


def qpsk_detect(z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
    """Returns the nearest QPSK point. Ties go toward positive real and imaginary parts.

    Works elementwise on arrays.

    """
    z = np.asarray(z)
    detected = QPSK_SCALE * (np.where(z.real >= 0, 1, -1) + 1j * np.where(z.imag >= 0, 1, -1))

    if detected.ndim == 0:
        return complex(detected)

    return detected
