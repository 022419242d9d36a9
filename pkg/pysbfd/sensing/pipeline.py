from functools import reduce
from itertools import permutations
from logging import getLogger
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.linalg import lstsq

from .constants import EXHAUSTIVE_LIMIT, FUSION_GATE, RANGE_SCALE_M, RATE_SCALE_MPS, UNIT_MODULUS_FLOOR
from .esprit import esprit_phases, smoothed_covariance, wrap_phase
from ..channel import InterferenceSpec, echo_params, synthesize_dl_rx
from ..exceptions import EstimationError, WrongArguments
from ..scenario import AccessPoint, ScenarioConfig, target_geometry
from ..utils import SPEED_OF_LIGHT, RandomStreams, Stream
from ..waveform import ResourceGrid, conjugate_beamformer, generate_qpsk_grid

LOG = getLogger(__name__)


class QuotientGrid(NamedTuple):
    """Element-wise received over transmitted DL sub-band."""

    f: np.ndarray
    """Matrix indexed (local subcarrier, symbol)."""

    scs_hz: float
    sym_duration_s: float

    base_sc: int = 0
    """Global subcarrier index of row 0."""


class TargetEstimate(NamedTuple):
    """Estimated target as seen from one access point."""

    range_m: float
    range_rate_mps: float

    amplitude: complex = 0j
    """Least-squares complex amplitude of the matched component."""


class Pairing(NamedTuple):
    """Result of matching range phases to Doppler phases."""

    doppler_phases: np.ndarray
    """Doppler phases reordered to follow range phases."""

    amplitudes: np.ndarray
    """Least-squares amplitudes of paired components."""

    residual: float
    """Fit residual norm of the chosen pairing."""

    residuals: Tuple[float, ...] = ()
    """Residual norms of every tried pairing. Empty for greedy pairing."""


class EstimateError(NamedTuple):
    """Signed error of an estimate matched to a true target."""

    truth_index: int
    estimate_index: int
    range_error_m: float
    rate_error_mps: float


def range_to_phase(range_m: float, scs_hz: float) -> float:
    """Returns per subcarrier phase step -2*pi*scs*tau of a target range."""
    return wrap_phase(-2 * np.pi * scs_hz * 2 * range_m / SPEED_OF_LIGHT)


def phase_to_range(phase: float, scs_hz: float) -> float:
    """Returns range within [0, c/(2*scs)) of a per subcarrier phase step."""
    delay = np.mod(-phase, 2 * np.pi) / (2 * np.pi * scs_hz)
    return float(SPEED_OF_LIGHT * delay / 2)


def rate_to_phase(rate_mps: float, carrier_hz: float, sym_duration_s: float) -> float:
    """Returns per symbol phase step 2*pi*T_o*f_D of a range rate."""
    doppler = -2 * rate_mps * carrier_hz / SPEED_OF_LIGHT
    return wrap_phase(2 * np.pi * sym_duration_s * doppler)


def phase_to_rate(phase: float, carrier_hz: float, sym_duration_s: float) -> float:
    """Returns range rate of a per symbol phase step."""
    doppler = phase / (2 * np.pi * sym_duration_s)
    return float(-doppler * SPEED_OF_LIGHT / (2 * carrier_hz))


def quotient_grid(
    received: ResourceGrid,
    transmitted: ResourceGrid,
    scs_hz: float,
    sym_duration_s: float,
) -> QuotientGrid:
    """Removes data modulation: F = Y / X element-wise.

    :param received: Receive grid Y.
    :param transmitted: Unit modulus transmitted grid X of the same sub-band.
    :param scs_hz: Subcarrier spacing.
    :param sym_duration_s: OFDM symbol duration including cyclic prefix.

    """
    if received.shape != transmitted.shape or received.base_sc != transmitted.base_sc:
        raise WrongArguments(
            f'Receive grid {received.shape} at {received.base_sc} does not match '
            f'transmitted grid {transmitted.shape} at {transmitted.base_sc}.')

    if np.any(np.abs(transmitted.data) < UNIT_MODULUS_FLOOR):
        raise WrongArguments('Transmitted grid has elements of less than unit modulus.')

    return QuotientGrid(
        f=received.data / transmitted.data,
        scs_hz=scs_hz,
        sym_duration_s=sym_duration_s,
        base_sc=received.base_sc,
    )


def _model(range_phases, doppler_phases, shape) -> np.ndarray:
    rows = np.arange(shape[0])
    cols = np.arange(shape[1])

    return np.stack([
        np.outer(np.exp(1j * range_phase * rows), np.exp(1j * doppler_phase * cols)).ravel()
        for range_phase, doppler_phase in zip(range_phases, doppler_phases)
    ], axis=1)


def _fit(f: np.ndarray, range_phases, doppler_phases) -> Tuple[np.ndarray, float]:
    model = _model(range_phases, doppler_phases, f.shape)
    amplitudes, *_ = lstsq(model, f.ravel())
    return amplitudes, float(np.linalg.norm(f.ravel() - model @ amplitudes))


def _line_powers(data: np.ndarray, phases: np.ndarray) -> np.ndarray:
    # Least-squares line amplitudes along axis 0, powers averaged over columns.
    model = np.exp(1j * np.outer(np.arange(data.shape[0]), phases))
    coefficients, *_ = lstsq(model, data)
    return np.mean(np.abs(coefficients) ** 2, axis=1)


def pair_estimates(f: np.ndarray, range_phases: np.ndarray, doppler_phases: np.ndarray) -> Pairing:
    """Matches range phases to Doppler phases.

    Up to `EXHAUSTIVE_LIMIT` components every permutation is fitted jointly
    and the one of least residual is chosen. Beyond that both lists are
    ranked by line power and paired rank to rank.

    """
    order = len(range_phases)

    if order != len(doppler_phases):
        raise WrongArguments(f'Got {order} range phases and {len(doppler_phases)} Doppler phases.')

    if order <= EXHAUSTIVE_LIMIT:
        candidates = []

        for permutation in permutations(range(order)):
            reordered = doppler_phases[list(permutation)]
            amplitudes, residual = _fit(f, range_phases, reordered)
            candidates.append((residual, reordered, amplitudes))

        best = min(candidates, key=lambda candidate: candidate[0])

        return Pairing(
            doppler_phases=best[1],
            amplitudes=best[2],
            residual=best[0],
            residuals=tuple(candidate[0] for candidate in candidates),
        )

    range_rank = np.argsort(_line_powers(f, range_phases))[::-1]
    doppler_rank = np.argsort(_line_powers(f.T, doppler_phases))[::-1]

    reordered = np.empty_like(doppler_phases)
    reordered[range_rank] = doppler_phases[doppler_rank]
    amplitudes, residual = _fit(f, range_phases, reordered)

    return Pairing(doppler_phases=reordered, amplitudes=amplitudes, residual=residual)


def project_doppler(f: np.ndarray, range_phases: np.ndarray, subarray: int) -> Pairing:
    """Estimates one Doppler phase per range line.

    F is projected onto the range steering vectors by least squares, so that
    every range line leaves a single tone over symbols. Lines closer in
    Doppler than the symbol axis resolves are kept apart by their ranges.

    :param f: Quotient grid matrix.
    :param range_phases: Resolved range phases.
    :param subarray: Subarray length along symbols.

    """
    model = np.exp(1j * np.outer(np.arange(f.shape[0]), range_phases))
    series, *_ = lstsq(model, f)

    doppler_phases = np.array([
        esprit_phases(smoothed_covariance(line, subarray), 1).phases[0] for line in series])

    amplitudes, residual = _fit(f, range_phases, doppler_phases)

    return Pairing(doppler_phases=doppler_phases, amplitudes=amplitudes, residual=residual)


def estimate_subband(quotient: QuotientGrid, order: int, cfg: ScenarioConfig) -> List[TargetEstimate]:
    """Estimates ranges and range rates within one DL sub-band.

    Range phases come from ESPRIT over subcarriers with symbols as snapshots,
    Doppler phases from ESPRIT over symbols with subcarriers as snapshots,
    paired to range phases by least squares. One Doppler phase per range
    line, see `project_doppler`, replaces the pairing when it fits F better.

    :param quotient: Quotient grid of the sub-band.
    :param order: Number of components to extract.
    :param cfg: Scenario, provides carrier and subarray lengths.

    """
    n_subcarriers, n_symbols = quotient.f.shape
    subarray_freq = min(cfg.esprit_subarray_freq, n_subcarriers)
    subarray_time = min(cfg.esprit_subarray_time, n_symbols)
    limit = min(subarray_freq, subarray_time) // 2

    if order < 1:
        raise WrongArguments(f'Model order must be positive, not {order}.')

    if order > limit:
        raise EstimationError(
            f'Model order {order} exceeds {limit} allowed by subarrays {subarray_freq}x{subarray_time}.')

    range_phases = esprit_phases(smoothed_covariance(quotient.f, subarray_freq), order).phases
    doppler_phases = esprit_phases(smoothed_covariance(quotient.f.T, subarray_time), order).phases

    # Model phases are relative to row 0, global offset only rotates amplitudes.
    pairing = pair_estimates(quotient.f, range_phases, doppler_phases)

    try:
        projected = project_doppler(quotient.f, range_phases, subarray_time)

    except EstimationError as e:
        LOG.debug(f'Per range line Doppler skipped: {e.message}')

    else:
        if projected.residual < pairing.residual:
            LOG.debug(f'Per range line Doppler fits better: {projected.residual} < {pairing.residual}')
            pairing = projected

    return [
        TargetEstimate(
            range_m=phase_to_range(range_phase, quotient.scs_hz),
            range_rate_mps=phase_to_rate(doppler_phase, cfg.carrier_hz, quotient.sym_duration_s),
            amplitude=complex(amplitude),
        )
        for range_phase, doppler_phase, amplitude in zip(
            range_phases, pairing.doppler_phases, pairing.amplitudes)
    ]


def _distance(first: TargetEstimate, second: Tuple[float, float]) -> float:
    return float(np.hypot(
        (first.range_m - second[0]) / RANGE_SCALE_M,
        (first.range_rate_mps - second[1]) / RATE_SCALE_MPS,
    ))


def _assign(costs: np.ndarray) -> List[Tuple[int, int]]:
    """Returns (row, column) pairs of least total cost over a square matrix."""
    size = len(costs)

    if size <= EXHAUSTIVE_LIMIT:
        best = min(
            permutations(range(size)),
            key=lambda permutation: sum(costs[row, col] for row, col in enumerate(permutation)))
        return list(enumerate(best))

    pairs = []
    free_rows, free_cols = set(range(size)), set(range(size))

    for flat in np.argsort(costs, axis=None):
        row, col = divmod(int(flat), size)

        if row in free_rows and col in free_cols:
            pairs.append((row, col))
            free_rows.discard(row)
            free_cols.discard(col)

    return sorted(pairs)


def fuse_subbands(lower: Sequence[TargetEstimate], upper: Sequence[TargetEstimate]) -> List[TargetEstimate]:
    """Merges estimates of two DL sub-bands.

    Matched pairs closer than `FUSION_GATE` normalized units are averaged,
    otherwise the first sub-band estimate is kept.
    Amplitudes come from the first sub-band.
    Output is ordered by range, then range rate.

    """
    if len(lower) != len(upper):
        raise WrongArguments(f'Cannot fuse {len(lower)} estimates with {len(upper)}.')

    costs = np.array([
        [_distance(first, (second.range_m, second.range_rate_mps)) for second in upper]
        for first in lower
    ]).reshape(len(lower), len(upper))

    fused = []

    for row, col in _assign(costs):
        first, second = lower[row], upper[col]

        if costs[row, col] <= FUSION_GATE:
            fused.append(TargetEstimate(
                range_m=(first.range_m + second.range_m) / 2,
                range_rate_mps=(first.range_rate_mps + second.range_rate_mps) / 2,
                amplitude=first.amplitude,
            ))

        else:
            LOG.debug(f'Sub-band estimates too far apart to fuse: {first} and {second}')
            fused.append(first)

    return sorted(fused, key=lambda estimate: (estimate.range_m, estimate.range_rate_mps))


def associate_and_error(
    estimates: Sequence[TargetEstimate],
    truth: Sequence[Tuple[float, float]],
) -> List[EstimateError]:
    """Matches estimates to true (range, range rate) pairs minimizing total normalized squared distance.

    Returns signed errors (estimate - truth) ordered by truth index.

    """
    size = len(truth)

    if len(estimates) != size:
        raise WrongArguments(f'Got {len(estimates)} estimates for {size} targets.')

    if size > EXHAUSTIVE_LIMIT:
        raise WrongArguments(f'Association supports up to {EXHAUSTIVE_LIMIT} targets, not {size}.')

    if not size:
        return []

    costs = np.array([[_distance(estimate, point) ** 2 for estimate in estimates] for point in truth])

    return [
        EstimateError(
            truth_index=row,
            estimate_index=col,
            range_error_m=estimates[col].range_m - truth[row][0],
            rate_error_mps=estimates[col].range_rate_mps - truth[row][1],
        )
        for row, col in _assign(costs)
    ]


def draw_waveform(cfg: ScenarioConfig, streams: RandomStreams) -> List[ResourceGrid]:
    """Draws the shared QPSK waveform of every DL sub-band from the CPU stream."""
    rng = streams.get(Stream.WAVEFORM)

    return [
        generate_qpsk_grid(segment.size, cfg.n_symbols, rng, base_sc=segment.start)
        for segment in cfg.subband_map.dl_segments
    ]


def run_ap(
    ap: AccessPoint,
    cfg: ScenarioConfig,
    waveform: Sequence[ResourceGrid],
    streams: RandomStreams,
) -> List[TargetEstimate]:
    """Senses all targets at one access point within one trial.

    Forms one beam toward all targets, synthesizes echoes over every DL sub-band,
    estimates each sub-band and fuses the results. When the model order exceeds
    the number of targets, the strongest estimates are kept.

    :param ap: Access point.
    :param cfg: Scenario.
    :param waveform: Shared transmitted grids, see `draw_waveform`.
    :param streams: Random streams of the trial.

    """
    if not cfg.targets:
        raise WrongArguments('No targets to sense.')

    unit = cfg.aps.index(ap) + 1

    angles = np.array([target_geometry(ap, tgt).bearing_rad for tgt in cfg.targets])

    if cfg.beam_angle_jitter_rad > 0:
        angles = angles + streams.get(Stream.BEAM_JITTER, unit).normal(0, cfg.beam_angle_jitter_rad, len(angles))

    weights = conjugate_beamformer(angles, ap.n_antennas)

    echo_rng = streams.get(Stream.ECHO_PHASE, unit)
    echoes = [echo_params(ap, tgt, cfg, echo_rng, weights) for tgt in cfg.targets]

    received = synthesize_dl_rx(
        ap, cfg, waveform, echoes,
        InterferenceSpec.from_config(cfg),
        streams.get(Stream.NOISE, unit),
        streams.get(Stream.INTERFERENCE, unit),
    )

    order = cfg.effective_model_order

    per_subband = [
        estimate_subband(quotient_grid(rx, tx, cfg.scs_hz, cfg.symbol_duration_s), order, cfg)
        for rx, tx in zip(received, waveform)
    ]

    fused = reduce(fuse_subbands, per_subband)

    if order > len(cfg.targets):
        fused = sorted(fused, key=lambda estimate: abs(estimate.amplitude), reverse=True)[:len(cfg.targets)]

    fused = sorted(fused, key=lambda estimate: (estimate.range_m, estimate.range_rate_mps))

    LOG.debug(f'{ap.id} estimates: {fused}')

    return fused
