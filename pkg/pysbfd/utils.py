from typing import Sequence, Tuple, Union

import numpy as np

SPEED_OF_LIGHT: float = 299_792_458.0
"""Speed of light in vacuum, m/s."""

TypePoint = Tuple[float, float]
TypeNumber = Union[int, float]


def db_to_power(value_db: float) -> float:
    """Converts decibels into a linear power ratio. -inf gives 0."""
    return float(10 ** (value_db / 10))


def db_to_amplitude(value_db: float) -> float:
    """Converts decibels into a linear amplitude ratio. -inf gives 0."""
    return float(10 ** (value_db / 20))


def complex_gaussian(rng: np.random.Generator, shape: Sequence[int], power: float = 1.0) -> np.ndarray:
    """Draws circularly-symmetric complex Gaussian samples of the given per-element power.

    Both quadratures are always drawn, even for zero power,
    so that generator state advances identically whatever the power is.

    """
    samples = rng.standard_normal((2, *shape))
    return np.sqrt(power / 2) * (samples[0] + 1j * samples[1])


class Stream:
    """Purpose tags of random streams."""

    WAVEFORM = 1
    ECHO_PHASE = 2
    NOISE = 3
    INTERFERENCE = 4
    BEAM_JITTER = 5
    UL_CHANNEL = 6
    UL_SYMBOLS = 7
    UL_NOISE = 8


class RandomStreams:
    """Counter-based factory of independent random generators.

    Every generator is keyed by (master seed, trial index, unit, purpose tag),
    so draws never depend on execution order or worker count.

    Units: 0 is the central processing unit, ``i + 1`` is the i-th access point
    (or the i-th user equipment for user symbol streams).

    .. code-block::

        streams = RandomStreams(seed=7).trial(3)
        rng = streams.get(Stream.NOISE, unit=1)  # noise at the first AP, trial 3

    """

    CPU = 0

    def __init__(self, seed: int, trial: int = 0):
        self.seed = seed
        self.trial_index = trial

    def trial(self, trial: int) -> 'RandomStreams':
        """Returns streams of another trial under the same master seed."""
        return RandomStreams(self.seed, trial)

    def get(self, purpose: int, unit: int = CPU) -> np.random.Generator:
        """Returns a fresh generator for the purpose and unit.

        :param purpose: Stream tag, see `Stream`.
        :param unit: 0 for CPU, index + 1 for access points and user equipment.

        """
        sequence = np.random.SeedSequence([self.seed, self.trial_index, unit, purpose])
        return np.random.default_rng(sequence)

    def __str__(self):
        return f'RandomStreams seed {self.seed}, trial {self.trial_index}'


class FormatMixin:
    """Mixin for various value formatting"""

    @staticmethod
    def _format_float(value: float) -> str:
        """Formats a float with 9 significant digits."""
        return f'{value:.9g}'