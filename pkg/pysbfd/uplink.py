from logging import getLogger
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence

import numpy as np

from .channel import synthesize_ul_rx, ul_channel
from .exceptions import DegenerateChannel, ReportRowNotFound, WrongArguments
from .grid import KIND_UL
from .scenario import ScenarioConfig
from .utils import FormatMixin, RandomStreams, Stream
from .waveform import generate_qpsk_grid, qpsk_detect

LOG = getLogger(__name__)

SYMBOL_MATCH_TOLERANCE = 1e-9


class UeLink(NamedTuple):
    """Uplink figures of one user equipment."""

    ue_id: str

    sinr_linear: float
    """Closed-form post-combining SINR."""

    sinr_measured: float
    """Simulated post-combining SINR, signal over distortion."""

    spectral_efficiency_bps_hz: float
    """log2(1 + sinr_linear)."""

    ser: float
    """QPSK symbol error rate."""


class UlResult(FormatMixin):
    """Uplink evaluation result. Rows are indexed by user equipment id.

    .. code-block::

        result = evaluate_ul(cfg)
        result['UE1'].ser

    """

    def __init__(self, links: Sequence[UeLink], n_resource_elements: int = 0):
        self.links: List[UeLink] = list(links)
        self.n_resource_elements = n_resource_elements
        self._index: Dict[str, UeLink] = {link.ue_id: link for link in self.links}

    def __getitem__(self, ue_id: str) -> UeLink:
        link = self._index.get(ue_id)

        if link is None:
            raise ReportRowNotFound(f'No uplink result for "{ue_id}".')

        return link

    def __iter__(self) -> Iterator[UeLink]:
        return iter(self.links)

    def __len__(self):
        return len(self.links)

    def __str__(self):
        lines = []

        for link in self.links:
            lines.append(
                f'{link.ue_id}: SINR {self._format_float(link.sinr_linear)} '
                f'(measured {self._format_float(link.sinr_measured)}), '
                f'SE {self._format_float(link.spectral_efficiency_bps_hz)} bit/s/Hz, '
                f'SER {self._format_float(link.ser)}')

        return '\n'.join(lines)


def mrc_combine(received: np.ndarray, channel: np.ndarray) -> np.ndarray:
    """Maximum ratio combining at one access point: z = sum_p conj(h[p]) * y_p.

    :param received: Per antenna grids shaped (antenna, subcarrier, symbol).
    :param channel: Channel vector of the user, one entry per antenna.

    """
    received = np.asarray(received)
    channel = np.asarray(channel)

    if channel.ndim != 1 or received.ndim < 1 or received.shape[0] != len(channel):
        raise WrongArguments(
            f'Channel of shape {channel.shape} does not match received grids of shape {received.shape}.')

    return np.tensordot(channel.conj(), received, axes=1)


def cpu_combine(soft_symbols: Sequence[np.ndarray]) -> np.ndarray:
    """Sums local combiner outputs of all access points with equal weights."""
    if not len(soft_symbols):
        raise WrongArguments('Nothing to combine.')

    shapes = {np.shape(item) for item in soft_symbols}

    if len(shapes) != 1:
        raise WrongArguments(f'Soft symbol grids differ in shape: {sorted(shapes)}.')

    return np.sum(np.stack(soft_symbols), axis=0)


def sinr_closed_form(channels: Sequence[np.ndarray], powers: Sequence[float]) -> np.ndarray:
    """Returns post-combining SINR of every user under unit noise.

    sinr_u = p_u * G_u^2 / (sum_{u' != u} p_u' * |C_uu'|^2 + G_u),
    C = sum_j H_j^H H_j, G_u = C_uu.

    :param channels: One matrix per access point shaped (antenna, user).
    :param powers: Transmit power of every user.

    """
    powers = np.asarray(powers, dtype=float)

    if not len(powers):
        raise WrongArguments('At least one user is required.')

    if not len(channels):
        raise WrongArguments('At least one access point is required.')

    gram = np.zeros((len(powers), len(powers)), dtype=complex)

    for matrix in channels:
        matrix = np.asarray(matrix)

        if matrix.ndim != 2 or matrix.shape[1] != len(powers):
            raise WrongArguments(f'Channel matrix of shape {matrix.shape} does not fit {len(powers)} users.')

        gram += matrix.conj().T @ matrix

    gains = gram.diagonal().real

    if np.any(gains <= 0):
        raise DegenerateChannel(f'All-zero channel for users {np.flatnonzero(gains <= 0).tolist()}.')

    cross = np.abs(gram) ** 2 * powers[None, :]
    np.fill_diagonal(cross, 0)

    return powers * gains ** 2 / (cross.sum(axis=1) + gains)


def evaluate_ul(cfg: ScenarioConfig, streams: Optional[RandomStreams] = None, n_slots: int = 1) -> UlResult:
    """Simulates uplink reception of all users over the UL sub-band.

    Channels are drawn once, symbols and noise anew for every slot.

    :param cfg: Scenario.
    :param streams: Random streams. Defaults to the first trial of the config seed.
    :param n_slots: Slots to simulate.

    """
    if not cfg.ues:
        raise WrongArguments('No user equipment to evaluate.')

    if n_slots < 1:
        raise WrongArguments(f'Number of slots must be positive, not {n_slots}.')

    streams = streams or RandomStreams(cfg.seed)

    smap = cfg.subband_map
    rows, cols = smap.count(KIND_UL), cfg.n_symbols
    base_sc = smap.ul_segments[0].start

    channels = []

    for unit, ap in enumerate(cfg.aps, 1):
        rng = streams.get(Stream.UL_CHANNEL, unit)
        channels.append([ul_channel(ap, ue, cfg, rng) for ue in cfg.ues])

    powers = np.array([ue.tx_power for ue in cfg.ues], dtype=float)
    sinr = sinr_closed_form([np.stack(per_ap, axis=1) for per_ap in channels], powers)

    gains = np.array([
        sum(float(np.vdot(per_ap[idx], per_ap[idx]).real) for per_ap in channels)
        for idx in range(len(cfg.ues))
    ])

    symbol_rngs = [streams.get(Stream.UL_SYMBOLS, unit) for unit in range(1, len(cfg.ues) + 1)]
    noise_rngs = [streams.get(Stream.UL_NOISE, unit) for unit in range(1, len(cfg.aps) + 1)]

    errors = np.zeros(len(cfg.ues))
    signal = np.zeros(len(cfg.ues))
    distortion = np.zeros(len(cfg.ues))

    for _ in range(n_slots):
        symbols = [generate_qpsk_grid(rows, cols, rng, base_sc=base_sc) for rng in symbol_rngs]

        received = [
            synthesize_ul_rx(ap, cfg, symbols, per_ap, rng)
            for ap, per_ap, rng in zip(cfg.aps, channels, noise_rngs)
        ]

        for idx, ue in enumerate(cfg.ues):
            combined = cpu_combine([
                mrc_combine(rx, per_ap[idx]) for rx, per_ap in zip(received, channels)])

            reference = gains[idx] * np.sqrt(ue.tx_power) * symbols[idx].data
            detected = qpsk_detect(combined)

            errors[idx] += np.count_nonzero(np.abs(detected - symbols[idx].data) > SYMBOL_MATCH_TOLERANCE)
            signal[idx] += np.sum(np.abs(reference) ** 2)
            distortion[idx] += np.sum(np.abs(combined - reference) ** 2)

    total = rows * cols * n_slots

    with np.errstate(divide='ignore'):
        measured = np.where(distortion > 0, signal / np.where(distortion > 0, distortion, 1), np.inf)

    links = [
        UeLink(
            ue_id=ue.id,
            sinr_linear=float(sinr[idx]),
            sinr_measured=float(measured[idx]),
            spectral_efficiency_bps_hz=float(np.log2(1 + sinr[idx])),
            ser=float(errors[idx] / total),
        )
        for idx, ue in enumerate(cfg.ues)
    ]

    LOG.debug(f'Uplink evaluated over {total} resource elements')

    return UlResult(links, n_resource_elements=total)
