from logging import getLogger
from math import isfinite, isnan
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import WrongArguments
from .grid import KIND_UL
from .scenario import (
    CLI_GAUSSIAN, CLI_MODES, CLI_STRUCTURED, AccessPoint, ScenarioConfig, Target, UserEquipment,
    distance, target_geometry,
)
from .utils import SPEED_OF_LIGHT, complex_gaussian, db_to_amplitude, db_to_power
from .waveform import BeamWeights, ResourceGrid, beam_gain

LOG = getLogger(__name__)

UL_PATHLOSS_EXPONENT = 3.67
"""Log-distance exponent of uplink large-scale fading."""


class EchoParams(NamedTuple):
    """Monostatic echo of one target at one access point."""

    delay_s: float
    """Round-trip delay."""

    doppler_hz: float
    """Doppler shift, negative for receding targets."""

    amp: complex
    """Noise-normalized complex amplitude after transmit and receive beamforming."""


class InterferenceSpec(NamedTuple):
    """Residual interference on DL sub-bands after cancellation."""

    si_inr_db: float = float('-inf')
    """Residual self-interference power over noise. -inf disables."""

    cli_mode: str = 'off'
    """off, gaussian or structured."""

    cli_suppression_db: float = 0.0
    """Cross-link interference cancellation."""

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> 'InterferenceSpec':
        return cls(
            si_inr_db=cfg.residual_si_inr_db,
            cli_mode=cfg.cli_mode,
            cli_suppression_db=cfg.cli_suppression_db,
        )

    def check(self) -> 'InterferenceSpec':
        """Validates values, returns self."""
        if isnan(self.si_inr_db) or self.si_inr_db == float('inf'):
            raise WrongArguments(f'Residual SI INR must be finite or -inf, not {self.si_inr_db}.')

        if self.cli_mode not in CLI_MODES:
            raise WrongArguments(f'Unknown CLI mode "{self.cli_mode}".')

        if not isfinite(self.cli_suppression_db) or self.cli_suppression_db < 0:
            raise WrongArguments(f'CLI suppression must be finite and not negative, not {self.cli_suppression_db}.')

        return self


def echo_params(
    ap: AccessPoint,
    tgt: Target,
    cfg: ScenarioConfig,
    rng: Optional[np.random.Generator] = None,
    weights: Optional[BeamWeights] = None,
) -> EchoParams:
    """Returns delay, Doppler and amplitude of the target echo at the access point.

    The amplitude follows the two-way 1/d^2 law calibrated so that a unit gain echo
    at ``ref_distance_m`` has per resource element SNR of ``snr_db`` over unit noise.

    :param ap: Access point.
    :param tgt: Target.
    :param cfg: Scenario.
    :param rng: Generator of the echo phase. If not set the phase is zero.
    :param weights: Beam weights used both to transmit and to combine.
        If not set, beamforming gains are unity.

    """
    geometry = target_geometry(ap, tgt)

    delay = 2 * geometry.range_m / SPEED_OF_LIGHT
    doppler = -2 * geometry.range_rate_mps * cfg.carrier_hz / SPEED_OF_LIGHT

    gain = 1.0 if weights is None else beam_gain(weights, geometry.bearing_rad) ** 2
    phase = 0.0 if rng is None else rng.uniform(0, 2 * np.pi)

    amp = (
        db_to_amplitude(cfg.snr_db)
        * tgt.rcs_scale
        * (cfg.ref_distance_m / geometry.range_m) ** 2
        * gain
        * np.exp(1j * phase)
    )

    return EchoParams(delay_s=delay, doppler_hz=doppler, amp=complex(amp))


def delay_phasor(grid: ResourceGrid, scs_hz: float, delay_s: float) -> np.ndarray:
    """Returns exp(-i*2*pi*n*scs*delay) over global subcarrier indices of the grid rows."""
    sc = grid.base_sc + np.arange(grid.shape[0])
    return np.exp(-2j * np.pi * sc * scs_hz * delay_s)


def doppler_phasor(n_symbols: int, symbol_duration_s: float, doppler_hz: float) -> np.ndarray:
    """Returns exp(+i*2*pi*m*T_o*f_D) over symbol indices."""
    return np.exp(2j * np.pi * np.arange(n_symbols) * symbol_duration_s * doppler_hz)


def cli_power(cfg: ScenarioConfig, dist: float, suppression_db: float) -> float:
    """Returns noise-relative power of one AP to AP interference link.

    One-way 1/d^2 path loss referenced to the echo calibration point, reduced by suppression.

    """
    return db_to_power(cfg.snr_db) * (cfg.ref_distance_m / dist) ** 2 * db_to_power(-suppression_db)


def interference_grid(
    ap: AccessPoint,
    cfg: ScenarioConfig,
    grid: ResourceGrid,
    interf: InterferenceSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Returns residual SI plus CLI seen by the access point on one DL sub-band.

    SI is additive Gaussian of power 10^(si_inr_db/10).
    CLI depends on mode:
        * off - nothing;
        * gaussian - additive Gaussian of the aggregate power over other APs;
        * structured - coherent copies of the shared waveform delayed by d/c, zero Doppler.

    :param ap: Victim access point.
    :param cfg: Scenario, provides other access points.
    :param grid: Shared transmitted waveform of the sub-band.
    :param interf: Interference spec.
    :param rng: Generator of Gaussian components.

    """
    interf.check()

    shape = grid.shape
    result = complex_gaussian(rng, shape, db_to_power(interf.si_inr_db))

    others = [other for other in cfg.aps if other.id != ap.id]

    if interf.cli_mode == CLI_GAUSSIAN:
        power = sum(
            cli_power(cfg, distance(ap.position, other.position), interf.cli_suppression_db)
            for other in others)
        result = result + complex_gaussian(rng, shape, power)

    elif interf.cli_mode == CLI_STRUCTURED:
        for other in others:
            dist = distance(ap.position, other.position)
            amp = np.sqrt(cli_power(cfg, dist, interf.cli_suppression_db))
            result = result + amp * delay_phasor(grid, cfg.scs_hz, dist / SPEED_OF_LIGHT)[:, None] * grid.data

    return result


def synthesize_dl_rx(
    ap: AccessPoint,
    cfg: ScenarioConfig,
    grids: Sequence[ResourceGrid],
    echoes: Sequence[EchoParams],
    interf: InterferenceSpec,
    rng: np.random.Generator,
    interference_rng: Optional[np.random.Generator] = None,
) -> List[ResourceGrid]:
    """Returns combined receive grids of the access point, one per DL sub-band.

    Y = sum_t amp_t * delay phasor * Doppler phasor * X + interference + unit noise.

    :param ap: Access point.
    :param cfg: Scenario.
    :param grids: Shared transmitted waveform, one grid per DL segment.
    :param echoes: Echo parameters of targets at this access point.
    :param interf: Interference spec.
    :param rng: Thermal noise generator.
    :param interference_rng: Generator of interference. Defaults to ``rng``.

    """
    segments = cfg.subband_map.dl_segments

    if len(grids) != len(segments):
        raise WrongArguments(f'Expected {len(segments)} DL grids, got {len(grids)}.')

    interference_rng = interference_rng or rng
    symbol_duration = cfg.symbol_duration_s
    received = []

    for grid, segment in zip(grids, segments):
        rows, cols = grid.shape

        if (grid.base_sc, rows, cols) != (segment.start, segment.size, cfg.n_symbols):
            raise WrongArguments(
                f'Grid {rows}x{cols} at {grid.base_sc} does not match '
                f'DL segment {segment} x {cfg.n_symbols} symbols.')

        channel = np.zeros((rows, cols), dtype=complex)

        for echo in echoes:
            channel += echo.amp * np.outer(
                delay_phasor(grid, cfg.scs_hz, echo.delay_s),
                doppler_phasor(cols, symbol_duration, echo.doppler_hz),
            )

        data = channel * grid.data + interference_grid(ap, cfg, grid, interf, interference_rng)

        if not cfg.noiseless:
            data = data + complex_gaussian(rng, (rows, cols))

        received.append(ResourceGrid(data=data, base_sc=grid.base_sc))

    LOG.debug(f'Synthesized {len(received)} DL grids at {ap.id} with {len(echoes)} echoes')

    return received


def ul_channel(
    ap: AccessPoint,
    ue: UserEquipment,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Returns Rayleigh channel vector of the user at the access point antennas.

    h = sqrt(beta) * g, beta = (ref_distance / d) ^ 3.67, g ~ CN(0, I).

    """
    dist = distance(ap.position, ue.position)
    beta = (cfg.ref_distance_m / dist) ** UL_PATHLOSS_EXPONENT

    return np.sqrt(beta) * complex_gaussian(rng, (ap.n_antennas,))


def synthesize_ul_rx(
    ap: AccessPoint,
    cfg: ScenarioConfig,
    ue_symbols: Sequence[ResourceGrid],
    channels: Sequence[np.ndarray],
    rng: np.random.Generator,
) -> np.ndarray:
    """Returns per antenna UL sub-band grids, shaped (antenna, subcarrier, symbol).

    y_p = sum_u h_u[p] * s_u * sqrt(tx_power_u) + unit noise. No radar leakage.

    :param ap: Access point.
    :param cfg: Scenario, provides user powers in ``cfg.ues`` order.
    :param ue_symbols: Symbol grid of every user.
    :param channels: Channel vector of every user at this access point.
    :param rng: Thermal noise generator.

    """
    if not len(ue_symbols) == len(channels) == len(cfg.ues):
        raise WrongArguments(
            f'Got {len(ue_symbols)} symbol grids and {len(channels)} channels for {len(cfg.ues)} users.')

    shape = (cfg.subband_map.count(KIND_UL), cfg.n_symbols)
    received = np.zeros((ap.n_antennas, *shape), dtype=complex)

    for ue, symbols, channel in zip(cfg.ues, ue_symbols, channels):
        channel = np.asarray(channel)

        if symbols.shape != shape:
            raise WrongArguments(f'Symbol grid of {ue.id} is {symbols.shape}, expected {shape}.')

        if channel.shape != (ap.n_antennas,):
            raise WrongArguments(f'Channel of {ue.id} has shape {channel.shape}, expected ({ap.n_antennas},).')

        received += np.sqrt(ue.tx_power) * channel[:, None, None] * symbols.data[None, :, :]

    if not cfg.noiseless:
        received += complex_gaussian(rng, received.shape)

    return received
