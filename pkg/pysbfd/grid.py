from logging import getLogger
from typing import List, NamedTuple, Tuple

from .exceptions import NumerologyError, PatternError
from .utils import SPEED_OF_LIGHT

LOG = getLogger(__name__)

KIND_DL = 'DL'
KIND_UL = 'UL'
KIND_GB = 'GB'

KINDS = (KIND_DL, KIND_UL, KIND_GB)

RB_SIZE_SC = 12
"""Subcarriers per resource block."""


class Segment(NamedTuple):
    """A run of resource blocks of one kind."""

    kind: str
    """DL, UL or GB."""

    rb_count: int
    """Resource blocks in the run."""


class FrameConfig(NamedTuple):
    """Ordered SBFD frequency partition of a slot.

    .. code-block::

        FrameConfig(segments=(Segment('DL', 50), Segment('GB', 3), ...), rb_size_sc=12)

    """

    segments: Tuple[Segment, ...]
    """Segments from the lowest to the highest frequency."""

    rb_size_sc: int = RB_SIZE_SC
    """Subcarriers per resource block."""

    @property
    def total_rb(self) -> int:
        return sum(segment.rb_count for segment in self.segments)

    @property
    def total_sc(self) -> int:
        return self.total_rb * self.rb_size_sc

    def rb_count(self, kind: str) -> int:
        """Returns resource block total of the given kind."""
        return sum(segment.rb_count for segment in self.segments if segment.kind == kind)


class SubcarrierRange(NamedTuple):
    """Contiguous subcarrier indices [start, end)."""

    start: int
    end: int

    @property
    def size(self) -> int:
        return self.end - self.start

    def __str__(self):
        return f'[{self.start},{self.end})'


class SubbandMap(NamedTuple):
    """Subcarrier index ranges of DL, UL and guard segments of one slot."""

    total_sc: int
    """Occupied subcarriers."""

    dl_segments: Tuple[SubcarrierRange, ...]
    ul_segments: Tuple[SubcarrierRange, ...]
    gb_segments: Tuple[SubcarrierRange, ...]

    layout: Tuple[Tuple[str, SubcarrierRange], ...] = ()
    """All (kind, range) pairs in frequency order."""

    def count(self, kind: str) -> int:
        """Returns subcarrier total of the given kind."""
        return sum(rng.size for kind_, rng in self.layout if kind_ == kind)


class SubbandMetrics(NamedTuple):
    """Sensing figures of one DL sub-band."""

    subband: SubcarrierRange
    bandwidth_hz: float
    range_resolution_m: float
    unambiguous_range_m: float
    rate_resolution_mps: float
    unambiguous_rate_mps: float


def parse_pattern(text: str) -> FrameConfig:
    """Parses "KIND:count(,KIND:count)*" pattern into a frame config.

    .. code-block::

        parse_pattern('DL:50,GB:3,UL:27,GB:3,DL:50').total_rb  # 133

    :param text: Pattern string. KIND is one of DL, UL, GB.

    """
    text = (text or '').strip()

    if not text:
        raise PatternError('Pattern is empty.')

    segments = []

    for token in text.split(','):
        kind, sep, count = token.strip().partition(':')
        kind = kind.strip().upper()

        if not sep:
            raise PatternError(f'Segment "{token}" is not in KIND:count form.')

        if kind not in KINDS:
            raise PatternError(f'Unknown segment kind "{kind}". Expected one of {", ".join(KINDS)}.')

        try:
            rb_count = int(count)

        except ValueError:
            raise PatternError(f'Resource block count "{count}" of {kind} is not an integer.')

        if rb_count < 1:
            raise PatternError(f'Resource block count of {kind} must be positive, not {rb_count}.')

        segments.append(Segment(kind=kind, rb_count=rb_count))

    return FrameConfig(segments=tuple(segments))


def dump_pattern(fc: FrameConfig) -> str:
    """Serializes a frame config into pattern text."""
    return ','.join(f'{segment.kind}:{segment.rb_count}' for segment in fc.segments)


def build_map(fc: FrameConfig) -> SubbandMap:
    """Assigns subcarrier ranges to segments left to right.

    :param fc: Frame config with at least one DL and one UL segment.

    """
    kinds = {segment.kind for segment in fc.segments}

    for required in (KIND_DL, KIND_UL):
        if required not in kinds:
            raise PatternError(f'Frame needs at least one {required} segment.')

    if fc.rb_size_sc < 1:
        raise PatternError(f'Resource block size must be positive, not {fc.rb_size_sc}.')

    layout = []
    start = 0

    for segment in fc.segments:
        if segment.rb_count < 1:
            raise PatternError(f'Resource block count of {segment.kind} must be positive.')

        end = start + segment.rb_count * fc.rb_size_sc
        layout.append((segment.kind, SubcarrierRange(start, end)))
        start = end

    def pick(kind: str) -> Tuple[SubcarrierRange, ...]:
        return tuple(rng for kind_, rng in layout if kind_ == kind)

    built = SubbandMap(
        total_sc=start,
        dl_segments=pick(KIND_DL),
        ul_segments=pick(KIND_UL),
        gb_segments=pick(KIND_GB),
        layout=tuple(layout),
    )

    LOG.debug(f'Built subband map of {built.total_sc} subcarriers in {len(layout)} segments')

    return built


def validate_numerology(fc: FrameConfig, scs_hz: float, bandwidth_hz: float) -> float:
    """Checks that the occupied grid fits into the channel.

    Returns occupied bandwidth in Hz.

    :param fc: Frame config.
    :param scs_hz: Subcarrier spacing.
    :param bandwidth_hz: Channel bandwidth. The boundary is inclusive.

    """
    if scs_hz <= 0:
        raise PatternError(f'Subcarrier spacing must be positive, not {scs_hz}.')

    occupied = fc.total_sc * scs_hz

    if occupied > bandwidth_hz:
        raise NumerologyError(occupied, bandwidth_hz)

    return occupied


def sensing_metrics(
    smap: SubbandMap,
    *,
    scs_hz: float,
    carrier_hz: float,
    n_symbols: int,
    cp_fraction: float,
) -> List[SubbandMetrics]:
    """Returns resolution and ambiguity figures for every DL sub-band.

    :param smap: Built subband map.
    :param scs_hz: Subcarrier spacing.
    :param carrier_hz: Carrier frequency.
    :param n_symbols: OFDM symbols per slot.
    :param cp_fraction: Cyclic prefix duration over useful symbol duration.

    """
    symbol_duration = (1 + cp_fraction) / scs_hz
    unambiguous_range = SPEED_OF_LIGHT / (2 * scs_hz)
    rate_resolution = SPEED_OF_LIGHT / (2 * carrier_hz * n_symbols * symbol_duration)
    unambiguous_rate = SPEED_OF_LIGHT / (4 * carrier_hz * symbol_duration)

    metrics = []

    for subband in smap.dl_segments:
        bandwidth = subband.size * scs_hz
        metrics.append(SubbandMetrics(
            subband=subband,
            bandwidth_hz=bandwidth,
            range_resolution_m=SPEED_OF_LIGHT / (2 * bandwidth),
            unambiguous_range_m=unambiguous_range,
            rate_resolution_mps=rate_resolution,
            unambiguous_rate_mps=unambiguous_rate,
        ))

    return metrics
