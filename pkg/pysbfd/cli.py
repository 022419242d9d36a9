import logging
from pathlib import Path

import click

from . import VERSION_STR
from .exceptions import PysbfdException
from .grid import KINDS, build_map, parse_pattern, sensing_metrics, validate_numerology
from .harness import calibrate_doubling, emit_csv, emit_sweep_csv, emit_trials_csv, run_trials, sweep_inr
from .scenario import ScenarioConfig, default_paper_scenario, dump_scenario, load_scenario, validate_scenario
from .uplink import evaluate_ul

DEFAULTS = ScenarioConfig()


def read_config(path: str) -> ScenarioConfig:
    try:
        return load_scenario(Path(path).read_text(encoding='utf-8'))

    except PysbfdException as e:
        raise click.ClickException(f'{path}: {e.message}')


def fail(e: PysbfdException):
    raise click.ClickException(e.message)


def write(emit, report, path):
    if not path:
        return

    try:
        emit(report, path)

    except OSError as e:
        raise click.ClickException(str(e))


@click.group()
@click.version_option(version=VERSION_STR)
@click.option('-v', '--verbose', is_flag=True, help='Log debug messages.')
def entry_point(verbose):
    """SBFD cell-free JCAS link-level simulator."""
    if verbose:
        logging.basicConfig(level=logging.DEBUG)


@entry_point.command('grid-info')
@click.option('-p', '--pattern', required=True, help='SBFD pattern (e.g. DL:50,GB:3,UL:27,GB:3,DL:50)')
@click.option('--scs', type=float, required=True, help='Subcarrier spacing, Hz')
@click.option('--bandwidth', type=float, required=True, help='Channel bandwidth, Hz')
@click.option('--carrier', type=float, default=DEFAULTS.carrier_hz, show_default=True, help='Carrier, Hz')
@click.option('--symbols', type=int, default=DEFAULTS.n_symbols, show_default=True, help='OFDM symbols per slot')
@click.option('--cp-fraction', type=float, default=DEFAULTS.cp_fraction, show_default=True,
              help='Cyclic prefix over useful symbol duration')
def grid_info(pattern, scs, bandwidth, carrier, symbols, cp_fraction):
    """Prints out subband map and sensing figures."""
    try:
        frame = parse_pattern(pattern)
        smap = build_map(frame)
        occupied = validate_numerology(frame, scs, bandwidth)

    except PysbfdException as e:
        fail(e)

    click.secho(f'Total: {smap.total_sc} subcarriers, {occupied / 1e6:.6g} of {bandwidth / 1e6:.6g} MHz occupied')
    click.secho(' '.join(f'{kind}: {smap.count(kind)}' for kind in KINDS))
    click.secho('=' * 10)

    for kind, subband in smap.layout:
        click.secho(f'{kind} {subband} {subband.size} subcarriers')

    click.secho('=' * 10)

    for metrics in sensing_metrics(smap, scs_hz=scs, carrier_hz=carrier, n_symbols=symbols, cp_fraction=cp_fraction):
        click.secho(
            f'DL {metrics.subband}: bandwidth {metrics.bandwidth_hz / 1e6:.6g} MHz, '
            f'range resolution {metrics.range_resolution_m:.4g} m, '
            f'unambiguous range {metrics.unambiguous_range_m:.6g} m, '
            f'rate resolution {metrics.rate_resolution_mps:.4g} m/s, '
            f'unambiguous rate +-{metrics.unambiguous_rate_mps:.4g} m/s')


@entry_point.command()
@click.option('-c', '--config', 'config_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('-n', '--trials', type=int, help='Trials to run. Overrides config.')
@click.option('-s', '--seed', type=int, help='Master seed. Overrides config.')
@click.option('-o', '--out', type=click.Path(dir_okay=False), help='Summary CSV to write.')
@click.option('--trials-out', type=click.Path(dir_okay=False), help='Per trial CSV to write.')
@click.option('-w', '--workers', type=int, default=1, show_default=True, help='Worker threads.')
def simulate(config_path, trials, seed, out, trials_out, workers):
    """Runs Monte Carlo trials, prints out RMSE per access point and target."""
    cfg = read_config(config_path)

    if seed is not None:
        cfg = cfg._replace(seed=seed)

    try:
        report = run_trials(validate_scenario(cfg), trials, workers=workers)

    except PysbfdException as e:
        fail(e)

    click.secho(str(report))
    click.secho('=' * 10)
    click.secho(report.format_table())

    for ap_id, count in report.failures.items():
        count and click.secho(f'{ap_id}: {count} failed trials')

    write(emit_csv, report, out)
    write(emit_trials_csv, report, trials_out)


@entry_point.command()
@click.option('-c', '--config', 'config_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('-i', '--inr', required=True, help='Comma separated residual SI over noise values, dB')
@click.option('-n', '--trials', type=int, help='Trials per point. Overrides config.')
@click.option('-o', '--out', type=click.Path(dir_okay=False), help='Sweep CSV to write.')
@click.option('--doubling', is_flag=True, help='Also check RMSE growth at doubled interference.')
@click.option('-w', '--workers', type=int, default=1, show_default=True, help='Worker threads.')
def sweep(config_path, inr, trials, out, doubling, workers):
    """Sweeps residual self-interference, prints out median RMSE per point."""
    cfg = read_config(config_path)

    try:
        inr_values = [float(value) for value in inr.split(',') if value.strip()]

    except ValueError:
        raise click.BadParameter(f'"{inr}" is not a comma separated list of numbers.', param_hint='--inr')

    try:
        report = sweep_inr(cfg, inr_values, n_trials=trials, workers=workers)
        check = doubling and calibrate_doubling(cfg, inr_values, n_trials=trials, workers=workers, sweep=report)

    except PysbfdException as e:
        fail(e)

    for inr_db, median_range in zip(report.inr_values, report.median_rmse_range):
        click.secho(f'{inr_db:g} dB: median range RMSE {median_range:.6g} m')

    if doubling:
        click.secho('=' * 10)

        if check:
            click.secho(
                f'Baseline {check.baseline_rmse_m:.6g} m; '
                f'{check.operating_inr_db:g} dB -> {check.rmse_operating_m:.6g} m; '
                f'{check.doubled_inr_db:.4g} dB -> {check.rmse_doubled_m:.6g} m '
                f'({check.increase_percent:+.1f}%)')

        else:
            click.secho('No swept point exceeds twice the interference-free RMSE')

    write(emit_sweep_csv, report, out)


@entry_point.command('ul-eval')
@click.option('-c', '--config', 'config_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--slots', type=int, default=1, show_default=True, help='Slots to simulate.')
def ul_eval(config_path, slots):
    """Prints out uplink SINR and SER per user."""
    cfg = read_config(config_path)

    try:
        result = evaluate_ul(cfg, n_slots=slots)

    except PysbfdException as e:
        fail(e)

    click.secho(str(result))


@entry_point.command('default-config')
def default_config():
    """Prints out the default scenario in config file form."""
    click.secho(dump_scenario(default_paper_scenario()), nl=False)


def main():
    entry_point(obj={})


if __name__ == '__main__':
    main()
