from math import inf, pi, sqrt

import numpy as np
import pytest

from pysbfd.channel import (
    EchoParams, InterferenceSpec, echo_params, interference_grid, synthesize_dl_rx, synthesize_ul_rx, ul_channel,
)
from pysbfd.exceptions import GeometryError, WrongArguments
from pysbfd.grid import KIND_UL
from pysbfd.scenario import AccessPoint, ScenarioConfig, Target, UserEquipment, validate_scenario
from pysbfd.sensing import phase_to_range
from pysbfd.waveform import ResourceGrid, conjugate_beamformer, generate_qpsk_grid

QUIET = InterferenceSpec()


def make_config(**kwargs) -> ScenarioConfig:
    params = dict(
        pattern='DL:10,GB:1,UL:2,GB:1,DL:10',
        aps=(AccessPoint('AP1', (10.0, 100.0)), AccessPoint('AP2', (110.0, 100.0))),
        targets=(Target('T1', (160.0, 100.0), velocity=(-30.0, 0.0)),),
        ues=(UserEquipment('UE1', (60.0, 20.0), tx_power=1.0),),
        residual_si_inr_db=-inf,
        cli_mode='off',
        esprit_subarray_freq=32,
        noiseless=True,
    )
    params.update(kwargs)
    return validate_scenario(ScenarioConfig(**params))


def make_waveform(cfg: ScenarioConfig, seed: int = 0):
    rng = np.random.default_rng(seed)
    return [
        generate_qpsk_grid(segment.size, cfg.n_symbols, rng, base_sc=segment.start)
        for segment in cfg.subband_map.dl_segments]


def test_echo_params():
    cfg = make_config()
    ap = cfg.aps[0]
    echo = echo_params(ap, cfg.targets[0], cfg)

    assert isinstance(echo, EchoParams)
    assert echo.delay_s == pytest.approx(1.00069e-6, rel=1e-5)
    assert 2 * pi * cfg.scs_hz * echo.delay_s == pytest.approx(0.18863, abs=1e-5)

    assert echo.doppler_hz == pytest.approx(1400.97, abs=1e-2)
    assert 2 * pi * echo.doppler_hz * cfg.symbol_duration_s == pytest.approx(0.31405, abs=1e-5)

    assert echo.amp == pytest.approx(sqrt(10) * (100 / 150) ** 2)

    static = echo_params(ap, Target('S', (60.0, 60.0)), cfg)
    assert static.doppler_hz == 0

    weights = conjugate_beamformer([0.0], ap.n_antennas)
    beamformed = echo_params(ap, cfg.targets[0], cfg, np.random.default_rng(1), weights)
    assert abs(beamformed.amp) == pytest.approx(sqrt(10) * (100 / 150) ** 2 * 4)

    with pytest.raises(GeometryError):
        echo_params(ap, Target('X', ap.position), cfg)


def test_interference_spec():
    cfg = make_config(residual_si_inr_db=-5.0, cli_mode='gaussian', cli_suppression_db=20.0)
    spec = InterferenceSpec.from_config(cfg)

    assert spec == InterferenceSpec(si_inr_db=-5.0, cli_mode='gaussian', cli_suppression_db=20.0)
    assert spec.check() is spec

    for bad in (
        InterferenceSpec(si_inr_db=inf),
        InterferenceSpec(cli_mode='loud'),
        InterferenceSpec(cli_suppression_db=-1.0),
    ):
        with pytest.raises(WrongArguments):
            bad.check()


def test_synthesize_dl_rx_no_targets():
    cfg = make_config()
    waveform = make_waveform(cfg)

    received = synthesize_dl_rx(cfg.aps[0], cfg, waveform, [], QUIET, np.random.default_rng(1))

    assert len(received) == 2
    for grid, tx in zip(received, waveform):
        assert grid.base_sc == tx.base_sc
        assert np.array_equal(grid.data, np.zeros(tx.shape))


def test_synthesize_dl_rx_single_target():
    cfg = make_config()
    ap = cfg.aps[0]
    waveform = make_waveform(cfg)
    echo = echo_params(ap, cfg.targets[0], cfg, np.random.default_rng(4))

    received = synthesize_dl_rx(ap, cfg, waveform, [echo], QUIET, np.random.default_rng(1))

    for grid, tx in zip(received, waveform):
        assert np.allclose(np.abs(grid.data), abs(echo.amp))

        quotient = grid.data / tx.data
        step = np.angle(quotient[1, 0] / quotient[0, 0])
        assert step == pytest.approx(-0.18863, abs=1e-5)

        step = np.angle(quotient[0, 1] / quotient[0, 0])
        assert step == pytest.approx(0.31405, abs=1e-5)


def test_synthesize_dl_rx_linear():
    cfg = make_config()
    ap = cfg.aps[0]
    waveform = make_waveform(cfg)
    first = echo_params(ap, cfg.targets[0], cfg, np.random.default_rng(4))
    second = echo_params(ap, Target('T2', (80.0, 150.0), velocity=(5.0, 5.0)), cfg, np.random.default_rng(5))

    def synthesize(echoes):
        return synthesize_dl_rx(ap, cfg, waveform, echoes, QUIET, np.random.default_rng(1))

    both = synthesize([first, second])

    for joint, one, other in zip(both, synthesize([first]), synthesize([second])):
        assert np.allclose(joint.data, one.data + other.data, atol=1e-12)


def test_synthesize_dl_rx_noise():
    cfg = make_config(pattern='DL:50,GB:3,UL:27,GB:3,DL:50', esprit_subarray_freq=64, noiseless=False)
    waveform = make_waveform(cfg)

    samples = []

    for seed in range(6):
        received = synthesize_dl_rx(cfg.aps[0], cfg, waveform, [], QUIET, np.random.default_rng(seed))
        samples.extend(grid.data.ravel() for grid in received)

    samples = np.concatenate(samples)

    assert samples.size >= 1e5
    assert np.mean(np.abs(samples) ** 2) == pytest.approx(1, rel=0.03)


def test_synthesize_dl_rx_errors():
    cfg = make_config()
    waveform = make_waveform(cfg)

    with pytest.raises(WrongArguments):
        synthesize_dl_rx(cfg.aps[0], cfg, waveform[:1], [], QUIET, np.random.default_rng(1))

    shifted = [ResourceGrid(waveform[0].data, base_sc=1), waveform[1]]

    with pytest.raises(WrongArguments):
        synthesize_dl_rx(cfg.aps[0], cfg, shifted, [], QUIET, np.random.default_rng(1))


def test_interference_grid_off():
    cfg = make_config()
    grid = make_waveform(cfg)[0]

    interference = interference_grid(cfg.aps[0], cfg, grid, QUIET, np.random.default_rng(2))
    assert np.array_equal(interference, np.zeros(grid.shape))


def test_interference_grid_si_power():
    cfg = make_config()
    grid = ResourceGrid(np.ones((400, 250), dtype=complex))

    interference = interference_grid(
        cfg.aps[0], cfg, grid, InterferenceSpec(si_inr_db=0.0), np.random.default_rng(2))

    assert np.mean(np.abs(interference) ** 2) == pytest.approx(1, rel=0.05)


def test_interference_grid_gaussian_cli():
    cfg = make_config(cli_suppression_db=10.0)
    grid = ResourceGrid(np.ones((400, 250), dtype=complex))

    interference = interference_grid(
        cfg.aps[0], cfg, grid, InterferenceSpec(cli_mode='gaussian', cli_suppression_db=10.0),
        np.random.default_rng(2))

    # 10 dB echo calibration at 100 m, APs 100 m apart, 10 dB suppression.
    assert np.mean(np.abs(interference) ** 2) == pytest.approx(1, rel=0.05)


def test_interference_grid_structured_cli():
    cfg = make_config()
    grid = make_waveform(cfg)[1]

    interference = interference_grid(
        cfg.aps[0], cfg, grid, InterferenceSpec(cli_mode='structured'), np.random.default_rng(2))

    quotient = interference / grid.data
    assert np.allclose(np.abs(quotient), sqrt(10))

    range_step = np.angle(quotient[1:, :] / quotient[:-1, :])
    assert np.allclose(range_step, range_step[0, 0])
    assert phase_to_range(range_step[0, 0], cfg.scs_hz) == pytest.approx(50, abs=1e-6)

    assert np.allclose(quotient[:, 1:], quotient[:, :-1])

    suppressed = interference_grid(
        cfg.aps[0], cfg, grid, InterferenceSpec(cli_mode='structured', cli_suppression_db=20.0),
        np.random.default_rng(2))

    assert np.allclose(suppressed, interference / 10)


def test_ul_channel():
    cfg = make_config()
    ap = cfg.aps[0]

    near = UserEquipment('N', (110.0, 100.0))
    rng = np.random.default_rng(5)
    power = np.mean([np.linalg.norm(ul_channel(ap, near, cfg, rng)) ** 2 for _ in range(10000)])
    assert power == pytest.approx(ap.n_antennas, rel=0.05)

    far = UserEquipment('F', (1010.0, 100.0))
    rng = np.random.default_rng(6)
    power = np.mean([np.linalg.norm(ul_channel(ap, far, cfg, rng)) ** 2 for _ in range(10000)])
    assert power / ap.n_antennas == pytest.approx(10 ** -3.67, rel=0.05)

    assert np.array_equal(
        ul_channel(ap, near, cfg, np.random.default_rng(9)),
        ul_channel(ap, near, cfg, np.random.default_rng(9)))

    with pytest.raises(GeometryError):
        ul_channel(ap, UserEquipment('X', ap.position), cfg, rng)


def test_synthesize_ul_rx():
    cfg = make_config()
    ap = cfg.aps[0]
    rows = cfg.subband_map.count(KIND_UL)
    base_sc = cfg.subband_map.ul_segments[0].start
    symbols = generate_qpsk_grid(rows, cfg.n_symbols, np.random.default_rng(1), base_sc=base_sc)

    basis = np.eye(ap.n_antennas)[0]
    received = synthesize_ul_rx(ap, cfg, [symbols], [basis], np.random.default_rng(2))

    assert received.shape == (ap.n_antennas, rows, cfg.n_symbols)
    assert np.array_equal(received[0], symbols.data)
    assert not np.any(received[1:])

    empty = synthesize_ul_rx(ap, cfg._replace(ues=()), [], [], np.random.default_rng(2))
    assert not np.any(empty)

    two = cfg._replace(ues=(UserEquipment('A', (20.0, 20.0)), UserEquipment('B', (30.0, 30.0), tx_power=4.0)))
    other = generate_qpsk_grid(rows, cfg.n_symbols, np.random.default_rng(3), base_sc=base_sc)
    channels = [np.array([1, 1j, 0, 0]), np.array([0, 0, 1, -1])]
    received = synthesize_ul_rx(ap, two, [symbols, other], channels, np.random.default_rng(2))

    assert np.allclose(received[1], 1j * symbols.data)
    assert np.allclose(received[3], -2 * other.data)

    with pytest.raises(WrongArguments):
        synthesize_ul_rx(ap, cfg, [symbols], [np.ones(3)], np.random.default_rng(2))

    with pytest.raises(WrongArguments):
        synthesize_ul_rx(ap, cfg, [symbols, other], [basis], np.random.default_rng(2))
