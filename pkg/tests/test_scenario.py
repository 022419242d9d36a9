from math import hypot, inf, pi

import pytest

from pysbfd.exceptions import ConfigError, GeometryError
from pysbfd.scenario import (
    AccessPoint, ScenarioConfig, Target, default_paper_scenario, dump_scenario, load_scenario,
    target_geometry, validate_scenario,
)


def test_default_paper_scenario():
    cfg = default_paper_scenario()

    assert cfg.n_symbols == 14
    assert cfg.carrier_hz == 7e9
    assert cfg.scs_hz == 3e4
    assert cfg.bandwidth_hz == 5e7
    assert cfg.snr_db == 10
    assert cfg.pattern == 'DL:50,GB:3,UL:27,GB:3,DL:50'
    assert cfg.frame.total_rb == 133

    assert len(cfg.aps) == 6
    assert len(cfg.targets) == 3
    assert len(cfg.ues) == 5
    assert all(ap.n_antennas == 4 for ap in cfg.aps)

    assert cfg.targets[0].velocity == (18, 28)
    assert cfg.targets[1].velocity == (10, -28)
    assert cfg.targets[2].velocity == (21, 26)

    assert cfg.effective_model_order == 3
    assert cfg.symbol_duration_s == pytest.approx(35.677e-6, rel=1e-4)
    assert cfg.ap('AP3').position == (220, 40)

    with pytest.raises(ConfigError):
        cfg.ap('AP9')


def test_target_geometry():
    ap = AccessPoint('A', (0, 0))

    geometry = target_geometry(ap, Target('T', (100, 0), velocity=(18, 28)))
    assert geometry.range_m == pytest.approx(100)
    assert geometry.range_rate_mps == pytest.approx(18)
    assert geometry.bearing_rad == pytest.approx(0)

    geometry = target_geometry(ap, Target('T', (0, 50), velocity=(18, 0)))
    assert geometry.range_rate_mps == pytest.approx(0)
    assert geometry.bearing_rad == pytest.approx(pi / 2)

    geometry = target_geometry(ap, Target('T', (30, 40), velocity=(3, 4)))
    assert geometry.range_m == pytest.approx(50)
    assert geometry.range_rate_mps == pytest.approx(5)

    # Closing.
    geometry = target_geometry(ap, Target('T', (30, 40), velocity=(-3, -4)))
    assert geometry.range_rate_mps == pytest.approx(-5)

    # Bearing is relative to boresight and wrapped.
    rotated = AccessPoint('B', (0, 0), array_bearing_rad=pi / 2)
    assert target_geometry(rotated, Target('T', (100, 0))).bearing_rad == pytest.approx(-pi / 2)

    with pytest.raises(GeometryError):
        target_geometry(ap, Target('T', (0, 0)))


def test_target_geometry_properties():
    cfg = default_paper_scenario()

    for ap in cfg.aps:
        for tgt in cfg.targets:
            geometry = target_geometry(ap, tgt)
            swapped = target_geometry(AccessPoint('X', tgt.position), Target('Y', ap.position))

            assert geometry.range_m == pytest.approx(swapped.range_m)
            assert abs(geometry.range_rate_mps) <= hypot(*tgt.velocity) + 1e-12


def test_default_scenario_range_migration():
    cfg = default_paper_scenario()

    max_speed = max(hypot(*tgt.velocity) for tgt in cfg.targets)
    resolution = 299_792_458 / (2 * cfg.subband_map.dl_segments[0].size * cfg.scs_hz)

    assert max_speed * cfg.n_symbols * cfg.symbol_duration_s < 0.01 * resolution


def test_load_scenario(datafix_read):
    cfg = load_scenario(datafix_read('default.cfg'))

    assert len(cfg.aps) == 6
    assert len(cfg.ues) == 5
    assert len(cfg.targets) == 3
    assert cfg.pattern == 'DL:50,GB:3,UL:27,GB:3,DL:50'
    assert cfg == default_paper_scenario()


def test_load_scenario_small(datafix_read):
    cfg = load_scenario(datafix_read('small.cfg'))

    assert cfg.residual_si_inr_db == -inf
    assert cfg.cli_mode == 'off'
    assert cfg.seed == 7
    assert cfg.esprit_subarray_freq == 32
    assert cfg.aps[0].n_antennas == 4
    assert cfg.targets[0].velocity == (12, -7)
    assert cfg.ues[0].tx_power == 10


def test_load_scenario_errors(datafix_read):
    with pytest.raises(ConfigError) as e:
        load_scenario(datafix_read('no_aps.cfg'))

    assert e.value.key == 'aps'
    assert 'aps' in e.value.message

    with pytest.raises(ConfigError) as e:
        load_scenario(datafix_read('zero_scs.cfg'))

    assert e.value.key == 'scs_hz'
    assert 'scs_hz' in e.value.message

    base = '[ap]\nid = AP1\nposition = 10, 10\n'

    with pytest.raises(ConfigError) as e:
        load_scenario('bogus = 1\n' + base)

    assert e.value.key == 'bogus'
    assert e.value.line == 1
    assert e.value.message.startswith('Line 1:')

    with pytest.raises(ConfigError) as e:
        load_scenario('snr_db = 1\nsnr_db = 2\n' + base)

    assert e.value.line == 2

    with pytest.raises(ConfigError) as e:
        load_scenario('n_symbols = many\n' + base)

    assert e.value.key == 'n_symbols'

    with pytest.raises(ConfigError) as e:
        load_scenario(base + '[ap]\nid = AP2\n')

    assert e.value.key == 'position'

    with pytest.raises(ConfigError) as e:
        load_scenario(base + '[ap]\nid = AP1\nposition = 20, 20\n')

    assert e.value.key == 'aps'

    with pytest.raises(ConfigError) as e:
        load_scenario(base + '[ap]\nid = AP2\nposition = 10, 10\n')

    assert e.value.key == 'aps'

    with pytest.raises(ConfigError) as e:
        load_scenario('pattern = DL:70,GB:3,UL:27,GB:3,DL:70\n' + base)

    assert e.value.key == 'pattern'

    with pytest.raises(ConfigError) as e:
        load_scenario('[satellite]\n' + base)

    assert e.value.line == 1


def test_validate_scenario():
    cfg = default_paper_scenario()

    assert validate_scenario(cfg) is cfg

    for replaced, key in (
        ({'n_symbols': 1}, 'n_symbols'),
        ({'cp_fraction': -0.1}, 'cp_fraction'),
        ({'carrier_hz': 0.0}, 'carrier_hz'),
        ({'model_order': 2}, 'model_order'),
        ({'cli_mode': 'loud'}, 'cli_mode'),
        ({'cli_suppression_db': -3.0}, 'cli_suppression_db'),
        ({'seed': 2 ** 64}, 'seed'),
        ({'esprit_subarray_freq': 601}, 'esprit_subarray_freq'),
        ({'esprit_subarray_time': 15}, 'esprit_subarray_time'),
        ({'aps': ()}, 'aps'),
        ({'targets': (Target('T1', (300.0, 10.0)),)}, 'targets'),
    ):
        with pytest.raises(ConfigError) as e:
            validate_scenario(cfg._replace(**replaced))

        assert e.value.key == key

    validate_scenario(cfg._replace(model_order=5, residual_si_inr_db=-inf))


@pytest.mark.parametrize('replaced', [
    {},
    {'residual_si_inr_db': -inf, 'noiseless': True, 'model_order': 4},
    {'seed': 2 ** 64 - 1, 'cli_mode': 'gaussian', 'beam_angle_jitter_rad': 0.01},
    {'targets': (), 'ues': ()},
])
def test_dump_scenario_roundtrip(replaced):
    cfg = default_paper_scenario()._replace(**replaced)
    assert load_scenario(dump_scenario(cfg)) == cfg


def test_config_defaults():
    cfg = ScenarioConfig()
    assert cfg.cp_fraction == 0.0703125
    assert cfg.model_order is None
    assert cfg.n_trials == 200
