from logging import getLogger
from math import isfinite, isnan
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import ConfigError, GeometryError, NumerologyError, PatternError
from .grid import FrameConfig, SubbandMap, build_map, parse_pattern, validate_numerology
from .utils import TypePoint

LOG = getLogger(__name__)

CLI_OFF = 'off'
CLI_GAUSSIAN = 'gaussian'
CLI_STRUCTURED = 'structured'

CLI_MODES = (CLI_OFF, CLI_GAUSSIAN, CLI_STRUCTURED)

SEED_LIMIT = 2 ** 64


class AccessPoint(NamedTuple):
    """Represents an access point with a half-wavelength ULA."""

    id: str
    """Access point identifier."""

    position: TypePoint
    """(x, y) meters."""

    n_antennas: int = 4
    """Array elements."""

    array_bearing_rad: float = 0.0
    """Boresight direction of the ULA, radians from the x axis."""


class Target(NamedTuple):
    """Represents a point target."""

    id: str
    """Target identifier."""

    position: TypePoint
    """(x, y) meters."""

    velocity: TypePoint = (0.0, 0.0)
    """(vx, vy) meters/second."""

    rcs_scale: float = 1.0
    """Linear amplitude multiplier."""


class UserEquipment(NamedTuple):
    """Represents a static single antenna uplink user."""

    id: str
    """User identifier."""

    position: TypePoint
    """(x, y) meters."""

    tx_power: float = 1.0
    """Linear transmit power, relative units."""


class Geometry(NamedTuple):
    """Derived quantities of an AP to target pair."""

    range_m: float
    """Euclidean distance."""

    bearing_rad: float
    """Angle of the target relative to the array boresight, in [-pi, pi)."""

    range_rate_mps: float
    """Radial velocity, positive when receding."""


class ScenarioConfig(NamedTuple):
    """Full experiment description. Immutable, safe to share between trials."""

    carrier_hz: float = 7e9
    """Carrier frequency."""

    scs_hz: float = 30e3
    """Subcarrier spacing."""

    n_symbols: int = 14
    """OFDM symbols per slot."""

    cp_fraction: float = 0.0703125
    """Cyclic prefix duration over useful symbol duration (144/2048)."""

    bandwidth_hz: float = 50e6
    """Channel bandwidth."""

    pattern: str = 'DL:50,GB:3,UL:27,GB:3,DL:50'
    """SBFD pattern text."""

    aps: Tuple[AccessPoint, ...] = ()
    targets: Tuple[Target, ...] = ()
    ues: Tuple[UserEquipment, ...] = ()

    area_m: TypePoint = (250.0, 250.0)
    """Width and height of the deployment rectangle anchored at the origin."""

    snr_db: float = 10.0
    """Per resource element echo SNR of a unit-gain target at ref_distance_m."""

    ref_distance_m: float = 100.0
    """Calibration distance."""

    residual_si_inr_db: float = -10.0
    """Residual self-interference power over noise. -inf disables."""

    cli_mode: str = CLI_STRUCTURED
    """Cross-link interference model: off, gaussian or structured."""

    cli_suppression_db: float = 30.0
    """Cross-link interference cancellation."""

    model_order: Optional[int] = None
    """Paths assumed by the estimator. None means the number of targets."""

    seed: int = 1
    """Master seed of all random streams."""

    n_trials: int = 200
    """Monte Carlo trials."""

    esprit_subarray_freq: int = 64
    """Smoothing length along subcarriers."""

    esprit_subarray_time: int = 7
    """Smoothing length along symbols."""

    beam_angle_jitter_rad: float = 0.0
    """Standard deviation of beam pointing error."""

    noiseless: bool = False
    """Flag. Disables thermal noise."""

    @property
    def symbol_duration_s(self) -> float:
        """Total OFDM symbol duration T_o including cyclic prefix."""
        return (1 + self.cp_fraction) / self.scs_hz

    @property
    def effective_model_order(self) -> int:
        return self.model_order or len(self.targets)

    @property
    def frame(self) -> FrameConfig:
        return parse_pattern(self.pattern)

    @property
    def subband_map(self) -> SubbandMap:
        return build_map(self.frame)

    def ap(self, ap_id: str) -> AccessPoint:
        """Returns access point by its identifier."""
        for ap in self.aps:
            if ap.id == ap_id:
                return ap

        raise ConfigError(f'There is no access point "{ap_id}".', key='aps')


def distance(first: TypePoint, second: TypePoint) -> float:
    """Returns Euclidean distance between two points, rejecting co-located ones."""
    dx, dy = np.subtract(second, first)
    dist = float(np.hypot(dx, dy))

    if dist == 0:
        raise GeometryError(f'Points {tuple(first)} and {tuple(second)} are co-located.')

    return dist


def target_geometry(ap: AccessPoint, tgt: Target) -> Geometry:
    """Returns range, bearing relative to the array boresight and range rate.

    .. code-block::

        target_geometry(AccessPoint('A', (0, 0)), Target('T', (30, 40), velocity=(3, 4)))
        # Geometry(range_m=50.0, bearing_rad=0.927..., range_rate_mps=5.0)

    :param ap: Access point.
    :param tgt: Target.

    """
    dist = distance(ap.position, tgt.position)
    dx, dy = np.subtract(tgt.position, ap.position)

    bearing = float(np.arctan2(dy, dx)) - ap.array_bearing_rad
    bearing = (bearing + np.pi) % (2 * np.pi) - np.pi

    range_rate = float(np.dot(tgt.velocity, (dx / dist, dy / dist)))

    return Geometry(range_m=dist, bearing_rad=float(bearing), range_rate_mps=range_rate)


def default_paper_scenario() -> ScenarioConfig:
    """Returns the 250 x 250 m, 6 AP, 3 target, 5 UE reference scenario.

    APs form a 2 x 3 lattice; target positions are fixed so that at every AP
    target ranges differ by at least 29 m and range rates by at least 7.7 m/s.

    """
    aps = tuple(
        AccessPoint(id=f'AP{idx + 1}', position=position, n_antennas=4, array_bearing_rad=0.0)
        for idx, position in enumerate([
            (30.0, 40.0), (125.0, 40.0), (220.0, 40.0),
            (30.0, 210.0), (125.0, 210.0), (220.0, 210.0),
        ]))

    targets = (
        Target(id='T1', position=(90.0, 50.0), velocity=(18.0, 28.0)),
        Target(id='T2', position=(80.0, 130.0), velocity=(10.0, -28.0)),
        Target(id='T3', position=(90.0, 210.0), velocity=(21.0, 26.0)),
    )

    ues = tuple(
        UserEquipment(id=f'UE{idx + 1}', position=position, tx_power=10.0)
        for idx, position in enumerate([
            (60.0, 170.0), (170.0, 100.0), (200.0, 150.0), (110.0, 90.0), (45.0, 100.0),
        ]))

    return validate_scenario(ScenarioConfig(aps=aps, targets=targets, ues=ues))


def validate_scenario(cfg: ScenarioConfig) -> ScenarioConfig:
    """Checks scenario invariants, returns the config untouched.

    :param cfg: Config to check.

    """
    def check(condition: bool, key: str, message: str):
        if not condition:
            raise ConfigError(f'{key}: {message}', key=key)

    check(cfg.carrier_hz > 0, 'carrier_hz', 'must be positive')
    check(cfg.scs_hz > 0, 'scs_hz', 'must be positive')
    check(cfg.n_symbols >= 2, 'n_symbols', 'must be at least 2')
    check(cfg.cp_fraction >= 0, 'cp_fraction', 'must not be negative')
    check(cfg.bandwidth_hz > 0, 'bandwidth_hz', 'must be positive')

    try:
        smap = cfg.subband_map
        validate_numerology(cfg.frame, cfg.scs_hz, cfg.bandwidth_hz)

    except (PatternError, NumerologyError) as e:
        raise ConfigError(f'pattern: {e.message}', key='pattern')

    width, height = cfg.area_m
    check(width > 0 and height > 0, 'area_m', 'must be positive')

    def check_entries(entries, key: str):
        ids = [entry.id for entry in entries]
        check(len(set(ids)) == len(ids), key, 'identifiers must be unique')

        for entry in entries:
            x, y = entry.position
            check(0 <= x <= width and 0 <= y <= height, key, f'{entry.id} lies outside the area')

    check(bool(cfg.aps), 'aps', 'at least one access point is required')
    check_entries(cfg.aps, 'aps')
    check_entries(cfg.targets, 'targets')
    check_entries(cfg.ues, 'ues')

    for ap in cfg.aps:
        check(ap.n_antennas >= 1, 'n_antennas', f'{ap.id} must have at least one antenna')

    positions = [tuple(ap.position) for ap in cfg.aps]
    check(len(set(positions)) == len(positions), 'aps', 'access points must not be co-located')

    for target in cfg.targets:
        check(target.rcs_scale > 0, 'rcs_scale', f'{target.id} must be positive')

    for ue in cfg.ues:
        check(ue.tx_power > 0, 'tx_power', f'{ue.id} must be positive')

    check(isfinite(cfg.snr_db), 'snr_db', 'must be finite')
    check(cfg.ref_distance_m > 0, 'ref_distance_m', 'must be positive')
    check(
        not isnan(cfg.residual_si_inr_db) and cfg.residual_si_inr_db != float('inf'),
        'residual_si_inr_db', 'must be finite or -inf')
    check(cfg.cli_mode in CLI_MODES, 'cli_mode', f'must be one of {", ".join(CLI_MODES)}')
    check(
        isfinite(cfg.cli_suppression_db) and cfg.cli_suppression_db >= 0,
        'cli_suppression_db', 'must be finite and not negative')

    if cfg.model_order is not None:
        check(cfg.model_order >= 1, 'model_order', 'must be at least 1')
        check(cfg.model_order >= len(cfg.targets), 'model_order', 'must not be less than the number of targets')

    check(0 <= cfg.seed < SEED_LIMIT, 'seed', 'must fit into 64 bits')
    check(cfg.n_trials >= 1, 'n_trials', 'must be at least 1')

    shortest = min(rng.size for rng in smap.dl_segments)
    check(
        2 <= cfg.esprit_subarray_freq <= shortest,
        'esprit_subarray_freq', f'must be within [2, {shortest}]')
    check(
        2 <= cfg.esprit_subarray_time <= cfg.n_symbols,
        'esprit_subarray_time', f'must be within [2, {cfg.n_symbols}]')
    check(cfg.beam_angle_jitter_rad >= 0, 'beam_angle_jitter_rad', 'must not be negative')

    return cfg


def _parse_float(value: str) -> float:
    if value.lower() == 'off':
        return float('-inf')
    return float(value)


def _parse_bool(value: str) -> bool:
    lowered = value.lower()

    if lowered in {'true', 'yes', '1', 'on'}:
        return True

    if lowered in {'false', 'no', '0', 'off'}:
        return False

    raise ValueError(f'"{value}" is not a boolean')


def _parse_point(value: str) -> TypePoint:
    parts = [chunk.strip() for chunk in value.split(',')]

    if len(parts) != 2:
        raise ValueError(f'"{value}" is not an "x, y" pair')

    return float(parts[0]), float(parts[1])


def _parse_model_order(value: str) -> Optional[int]:
    if value.lower() == 'auto':
        return None
    return int(value)


def _parse_mode(value: str) -> str:
    return value.lower()


def _dump_float(value: float) -> str:
    return repr(float(value))


def _dump_point(value: TypePoint) -> str:
    return f'{float(value[0])!r}, {float(value[1])!r}'


TypeField = Tuple[Callable[[str], object], Callable[[object], str]]

SCALAR_FIELDS: Dict[str, TypeField] = {
    'carrier_hz': (_parse_float, _dump_float),
    'scs_hz': (_parse_float, _dump_float),
    'n_symbols': (int, str),
    'cp_fraction': (_parse_float, _dump_float),
    'bandwidth_hz': (_parse_float, _dump_float),
    'pattern': (str, str),
    'area_m': (_parse_point, _dump_point),
    'snr_db': (_parse_float, _dump_float),
    'ref_distance_m': (_parse_float, _dump_float),
    'residual_si_inr_db': (_parse_float, _dump_float),
    'cli_mode': (_parse_mode, str),
    'cli_suppression_db': (_parse_float, _dump_float),
    'model_order': (_parse_model_order, lambda value: 'auto' if value is None else str(value)),
    'seed': (int, str),
    'n_trials': (int, str),
    'esprit_subarray_freq': (int, str),
    'esprit_subarray_time': (int, str),
    'beam_angle_jitter_rad': (_parse_float, _dump_float),
    'noiseless': (_parse_bool, lambda value: 'true' if value else 'false'),
}

SECTIONS = {
    'ap': (AccessPoint, 'aps', {
        'id': (str, str),
        'position': (_parse_point, _dump_point),
        'n_antennas': (int, str),
        'array_bearing_rad': (_parse_float, _dump_float),
    }),
    'target': (Target, 'targets', {
        'id': (str, str),
        'position': (_parse_point, _dump_point),
        'velocity': (_parse_point, _dump_point),
        'rcs_scale': (_parse_float, _dump_float),
    }),
    'ue': (UserEquipment, 'ues', {
        'id': (str, str),
        'position': (_parse_point, _dump_point),
        'tx_power': (_parse_float, _dump_float),
    }),
}
"""Section name -> (entry type, config field, entry fields)."""

REQUIRED_ENTRY_KEYS = ('id', 'position')


def load_scenario(config_text: str) -> ScenarioConfig:
    """Parses scenario config text and validates it.

    .. code-block::

        carrier_hz = 7e9
        pattern = DL:50,GB:3,UL:27,GB:3,DL:50

        [ap]
        id = AP1
        position = 30, 40

        [target]
        id = T1
        position = 90, 50
        velocity = 18, 28

    Scalar keys precede sections. Every [ap], [target] or [ue] header opens a new entry.

    :param config_text: Config file contents.

    """
    LOG.debug('Parsing scenario ...')

    scalars: Dict[str, Tuple[str, int]] = {}
    entries: Dict[str, List[Tuple[int, Dict[str, Tuple[str, int]]]]] = {name: [] for name in SECTIONS}
    current: Optional[Dict[str, Tuple[str, int]]] = None

    for lineno, raw in enumerate(config_text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()

        if not line:
            continue

        if line.startswith('['):
            if not line.endswith(']'):
                raise ConfigError(f'Malformed section header "{line}".', line=lineno)

            section = line[1:-1].strip().lower()

            if section not in SECTIONS:
                raise ConfigError(f'Unknown section "{section}".', key=section, line=lineno)

            current = {}
            entries[section].append((lineno, current))
            continue

        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()

        if not sep or not key:
            raise ConfigError(f'Expected "key = value", got "{line}".', line=lineno)

        target = scalars if current is None else current

        if key in target:
            raise ConfigError(f'Duplicate key "{key}".', key=key, line=lineno)

        target[key] = (value, lineno)

    fields = {}

    for key, (value, lineno) in scalars.items():
        if key not in SCALAR_FIELDS:
            raise ConfigError(f'Unknown key "{key}".', key=key, line=lineno)

        fields[key] = _convert(key, value, lineno, SCALAR_FIELDS[key][0])

    for section, (entry_type, field_name, entry_fields) in SECTIONS.items():
        parsed = []

        for lineno, entry in entries[section]:
            kwargs = {}

            for key, (value, key_lineno) in entry.items():
                if key not in entry_fields:
                    raise ConfigError(f'Unknown key "{key}" in [{section}].', key=key, line=key_lineno)

                kwargs[key] = _convert(key, value, key_lineno, entry_fields[key][0])

            for key in REQUIRED_ENTRY_KEYS:
                if key not in kwargs:
                    raise ConfigError(f'[{section}] misses "{key}".', key=key, line=lineno)

            parsed.append(entry_type(**kwargs))

        fields[field_name] = tuple(parsed)

    if not fields['aps']:
        raise ConfigError('No access points defined: "aps" needs at least one [ap] section.', key='aps')

    cfg = validate_scenario(ScenarioConfig(**fields))

    LOG.debug(f'Parsed: {len(cfg.aps)} APs, {len(cfg.targets)} targets, {len(cfg.ues)} UEs')

    return cfg


def _convert(key: str, value: str, lineno: int, parser: Callable[[str], object]):
    try:
        return parser(value)

    except ValueError as e:
        raise ConfigError(f'Invalid value of "{key}": {e}', key=key, line=lineno)


def dump_scenario(cfg: ScenarioConfig) -> str:
    """Serializes a config into the text accepted by `load_scenario`."""
    lines = [f'{key} = {dump(getattr(cfg, key))}' for key, (_, dump) in SCALAR_FIELDS.items()]

    for section, (_, field_name, entry_fields) in SECTIONS.items():
        for entry in getattr(cfg, field_name):
            lines.extend(['', f'[{section}]'])
            lines.extend(f'{key} = {dump(getattr(entry, key))}' for key, (_, dump) in entry_fields.items())

    return '\n'.join(lines) + '\n'
