from concurrent.futures import ThreadPoolExecutor
from functools import partial
from hashlib import sha256
from logging import getLogger
from math import log10
from pathlib import Path
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import PysbfdException, ReportRowNotFound, SimulationError, WrongArguments
from .scenario import CLI_OFF, ScenarioConfig, dump_scenario, target_geometry
from .sensing import associate_and_error, draw_waveform, run_ap
from .utils import FormatMixin, RandomStreams

LOG = getLogger(__name__)

FAILURE_LIMIT = 0.2
"""Largest admissible share of failed (trial, AP) evaluations."""

FLOAT_FORMAT = '%.9g'

DOUBLING_DB = 10 * log10(2)

TypePath = Union[str, Path]


class TrialRecord(NamedTuple):
    """Estimate of one target at one access point in one trial."""

    run_id: str
    trial: int
    ap_id: str
    target_id: str
    true_range_m: float
    est_range_m: float
    true_rate_mps: float
    est_rate_mps: float


class RmseRow(NamedTuple):
    """Error statistics of one (access point, target) pair."""

    ap_id: str
    target_id: str

    n_trials: int
    """Trials that contributed, failed ones excluded. Statistics are NaN when zero."""

    rmse_range_m: float
    rmse_rate_mps: float
    bias_range_m: float
    bias_rate_mps: float


TRIALS_COLUMNS = list(TrialRecord._fields)
SUMMARY_COLUMNS = list(RmseRow._fields)
SWEEP_COLUMNS = ['inr_db'] + SUMMARY_COLUMNS


class RmseReport(FormatMixin):
    """Monte Carlo estimation errors per access point and target.

    .. code-block::

        report = run_trials(default_paper_scenario(), n_trials=50)
        report['AP1', 'T2'].rmse_range_m

    """

    def __init__(
        self,
        rows: Sequence[RmseRow],
        trials: Sequence[TrialRecord] = (),
        *,
        config_hash: str = '',
        seed: int = 0,
        n_trials: int = 0,
        failures: Optional[Dict[str, int]] = None,
    ):
        self.rows: List[RmseRow] = list(rows)
        """Rows in (access point, target) config order."""

        self.trials: List[TrialRecord] = list(trials)
        """Per trial records in trial order."""

        self.config_hash = config_hash
        """Hash of the serialized scenario. Also used as run id."""

        self.seed = seed
        self.n_trials = n_trials

        self.failures: Dict[str, int] = dict(failures or {})
        """Failed trials per access point id."""

        self._index: Dict[Tuple[str, str], RmseRow] = {(row.ap_id, row.target_id): row for row in self.rows}

    def __getitem__(self, item: Tuple[str, str]) -> RmseRow:
        row = self._index.get(tuple(item))

        if row is None:
            raise ReportRowNotFound(f'No row for access point and target {item}.')

        return row

    def __iter__(self) -> Iterator[RmseRow]:
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    @property
    def n_failures(self) -> int:
        """Failed (trial, AP) evaluations."""
        return sum(self.failures.values())

    def __str__(self):
        return (
            f'RmseReport {self.config_hash} of {len(self.rows)} rows over {self.n_trials} trials, '
            f'{self.n_failures} failures')

    @property
    def median_rmse_range(self) -> float:
        return float(np.nanmedian([row.rmse_range_m for row in self.rows]))

    @property
    def median_rmse_rate(self) -> float:
        return float(np.nanmedian([row.rmse_rate_mps for row in self.rows]))

    def to_frame(self) -> pd.DataFrame:
        """Returns summary rows in the canonical column order."""
        return pd.DataFrame(self.rows, columns=SUMMARY_COLUMNS)

    def trials_frame(self) -> pd.DataFrame:
        """Returns per trial records in the canonical column order."""
        return pd.DataFrame(self.trials, columns=TRIALS_COLUMNS)

    def format_table(self) -> str:
        """Returns a human readable summary table."""
        lines = []

        for row in self.rows:
            lines.append(
                f'{row.ap_id} {row.target_id}: '
                f'range RMSE {self._format_float(row.rmse_range_m)} m '
                f'(bias {self._format_float(row.bias_range_m)}), '
                f'rate RMSE {self._format_float(row.rmse_rate_mps)} m/s '
                f'(bias {self._format_float(row.bias_rate_mps)}), '
                f'{row.n_trials} trials')

        return '\n'.join(lines)


class SweepReport:
    """Reports of a residual interference sweep keyed by INR in dB."""

    def __init__(self, points: Dict[float, RmseReport]):
        inr_values = list(points)

        if any(second <= first for first, second in zip(inr_values, inr_values[1:])):
            raise WrongArguments(f'Sweep points must be strictly increasing, got {inr_values}.')

        self.points = dict(points)

    def __getitem__(self, inr_db: float) -> RmseReport:
        try:
            return self.points[inr_db]

        except KeyError:
            raise ReportRowNotFound(f'No sweep point at {inr_db} dB.')

    def __len__(self):
        return len(self.points)

    def __str__(self):
        return f'SweepReport of {len(self.points)} points: {self.inr_values}'

    @property
    def inr_values(self) -> List[float]:
        return list(self.points)

    @property
    def median_rmse_range(self) -> List[float]:
        """Median range RMSE at every point, in INR order."""
        return [report.median_rmse_range for report in self.points.values()]

    def to_frame(self) -> pd.DataFrame:
        """Returns summary rows of all points with INR prepended."""
        frames = []

        for inr_db, report in self.points.items():
            frame = report.to_frame()
            frame.insert(0, 'inr_db', inr_db)
            frames.append(frame)

        if not frames:
            return pd.DataFrame(columns=SWEEP_COLUMNS)

        return pd.concat(frames, ignore_index=True)[SWEEP_COLUMNS]


class DoublingCheck(NamedTuple):
    """Range RMSE growth when residual interference power doubles at the operating point."""

    baseline_rmse_m: float
    """Median range RMSE without residual SI and CLI."""

    operating_inr_db: float
    """Lowest swept INR whose median range RMSE exceeds twice the baseline."""

    rmse_operating_m: float

    doubled_inr_db: float
    """Operating INR plus 10*log10(2) dB."""

    rmse_doubled_m: float

    @property
    def increase_ratio(self) -> float:
        return self.rmse_doubled_m / self.rmse_operating_m

    @property
    def increase_percent(self) -> float:
        return (self.increase_ratio - 1) * 100


def config_hash(cfg: ScenarioConfig) -> str:
    """Returns a short stable hash of the serialized scenario."""
    return sha256(dump_scenario(cfg).encode('utf-8')).hexdigest()[:12]


def run_trial(cfg: ScenarioConfig, run_id: str, trial: int) -> Tuple[List[TrialRecord], List[str]]:
    """Runs one Monte Carlo trial over all access points.

    Returns trial records and ids of access points that failed.

    """
    streams = RandomStreams(cfg.seed).trial(trial)
    waveform = draw_waveform(cfg, streams)

    records = []
    failed = []

    for ap in cfg.aps:
        truth = [target_geometry(ap, tgt) for tgt in cfg.targets]

        try:
            estimates = run_ap(ap, cfg, waveform, streams)
            errors = associate_and_error(estimates, [(item.range_m, item.range_rate_mps) for item in truth])

        except PysbfdException as e:
            LOG.debug(f'Trial {trial} failed at {ap.id}: {e.message}')
            failed.append(ap.id)
            continue

        for error in errors:
            geometry = truth[error.truth_index]
            estimate = estimates[error.estimate_index]

            records.append(TrialRecord(
                run_id=run_id,
                trial=trial,
                ap_id=ap.id,
                target_id=cfg.targets[error.truth_index].id,
                true_range_m=geometry.range_m,
                est_range_m=estimate.range_m,
                true_rate_mps=geometry.range_rate_mps,
                est_rate_mps=estimate.range_rate_mps,
            ))

    return records, failed


def aggregate(cfg: ScenarioConfig, records: Sequence[TrialRecord]) -> List[RmseRow]:
    """Reduces trial records into per (access point, target) RMSE rows in config order."""
    grouped: Dict[Tuple[str, str], List[TrialRecord]] = {
        (ap.id, tgt.id): [] for ap in cfg.aps for tgt in cfg.targets}

    for record in records:
        grouped[(record.ap_id, record.target_id)].append(record)

    rows = []

    for (ap_id, target_id), group in grouped.items():
        range_errors = np.array([record.est_range_m - record.true_range_m for record in group])
        rate_errors = np.array([record.est_rate_mps - record.true_rate_mps for record in group])

        if not len(group):
            LOG.warning(f'No successful trials for {ap_id} {target_id}, statistics are NaN')
            rows.append(RmseRow(ap_id, target_id, 0, *[float('nan')] * 4))
            continue

        rows.append(RmseRow(
            ap_id=ap_id,
            target_id=target_id,
            n_trials=len(group),
            rmse_range_m=float(np.sqrt(np.mean(range_errors ** 2))),
            rmse_rate_mps=float(np.sqrt(np.mean(rate_errors ** 2))),
            bias_range_m=float(np.mean(range_errors)),
            bias_rate_mps=float(np.mean(rate_errors)),
        ))

    return rows


def run_trials(cfg: ScenarioConfig, n_trials: Optional[int] = None, *, workers: int = 1) -> RmseReport:
    """Runs Monte Carlo trials and aggregates estimation errors.

    Results do not depend on the number of workers.

    :param cfg: Scenario.
    :param n_trials: Trials to run. Defaults to ``cfg.n_trials``.
    :param workers: Threads to run trials in.

    """
    if n_trials is not None:
        cfg = cfg._replace(n_trials=n_trials)

    if cfg.n_trials < 1:
        raise WrongArguments(f'Number of trials must be positive, not {cfg.n_trials}.')

    if not cfg.targets:
        raise WrongArguments('Scenario has no targets.')

    run_id = config_hash(cfg)
    run = partial(run_trial, cfg, run_id)

    LOG.debug(f'Running {cfg.n_trials} trials of {run_id} in {workers} workers ...')

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(run, range(cfg.n_trials)))

    else:
        outcomes = [run(trial) for trial in range(cfg.n_trials)]

    records = [record for trial_records, _ in outcomes for record in trial_records]
    failures = {ap.id: 0 for ap in cfg.aps}

    for _, failed in outcomes:
        for ap_id in failed:
            failures[ap_id] += 1

    n_failures = sum(failures.values())
    n_evaluations = cfg.n_trials * len(cfg.aps)

    if n_failures > FAILURE_LIMIT * n_evaluations:
        raise SimulationError(f'{n_failures} of {n_evaluations} access point evaluations failed.')

    report = RmseReport(
        aggregate(cfg, records),
        records,
        config_hash=run_id,
        seed=cfg.seed,
        n_trials=cfg.n_trials,
        failures=failures,
    )

    LOG.debug(f'Done: {report}')

    return report


def sweep_inr(
    cfg: ScenarioConfig,
    inr_list_db: Sequence[float],
    *,
    n_trials: Optional[int] = None,
    workers: int = 1,
) -> SweepReport:
    """Runs trials at every residual SI level, all other settings (seed included) kept.

    :param cfg: Scenario.
    :param inr_list_db: Strictly increasing residual SI over noise values, dB.
    :param n_trials: Trials per point. Defaults to ``cfg.n_trials``.
    :param workers: Threads to run trials in.

    """
    inr_values = [float(value) for value in inr_list_db]

    if not inr_values:
        raise WrongArguments('At least one INR value is required.')

    if any(second <= first for first, second in zip(inr_values, inr_values[1:])):
        raise WrongArguments(f'INR values must be strictly increasing, got {inr_values}.')

    points = {}

    for inr_db in inr_values:
        LOG.debug(f'Sweep point {inr_db} dB ...')
        points[inr_db] = run_trials(cfg._replace(residual_si_inr_db=inr_db), n_trials, workers=workers)

    return SweepReport(points)


def calibrate_doubling(
    cfg: ScenarioConfig,
    inr_list_db: Sequence[float],
    *,
    n_trials: Optional[int] = None,
    workers: int = 1,
    sweep: Optional[SweepReport] = None,
) -> Optional[DoublingCheck]:
    """Finds the operating point and measures the effect of doubling residual interference there.

    Returns None if no swept point exceeds twice the interference-free RMSE.

    :param cfg: Scenario.
    :param inr_list_db: Candidate operating points, dB.
    :param n_trials: Trials per run. Defaults to ``cfg.n_trials``.
    :param workers: Threads to run trials in.
    :param sweep: Already computed sweep over ``inr_list_db``.

    """
    sweep = sweep or sweep_inr(cfg, inr_list_db, n_trials=n_trials, workers=workers)

    quiet = cfg._replace(residual_si_inr_db=float('-inf'), cli_mode=CLI_OFF)
    baseline = run_trials(quiet, n_trials, workers=workers).median_rmse_range

    for inr_db in sweep.inr_values:
        operating = sweep[inr_db].median_rmse_range

        if operating > 2 * baseline:
            break

    else:
        LOG.debug(f'No operating point above twice the baseline {baseline}')
        return None

    doubled_inr = inr_db + DOUBLING_DB
    doubled = run_trials(cfg._replace(residual_si_inr_db=doubled_inr), n_trials, workers=workers)

    return DoublingCheck(
        baseline_rmse_m=baseline,
        operating_inr_db=inr_db,
        rmse_operating_m=operating,
        doubled_inr_db=doubled_inr,
        rmse_doubled_m=doubled.median_rmse_range,
    )


def _write(frame: pd.DataFrame, path: TypePath):
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')

    except OSError as e:
        raise OSError(f'Unable to write {path}: {e}') from e


def emit_csv(report: RmseReport, path: TypePath):
    """Writes summary rows: ap_id, target_id, n_trials, rmse_range_m, rmse_rate_mps, bias_range_m, bias_rate_mps."""
    _write(report.to_frame(), path)


def emit_trials_csv(report: RmseReport, path: TypePath):
    """Writes per trial records: run_id, trial, ap_id, target_id, true/est range and rate."""
    _write(report.trials_frame(), path)


def emit_sweep_csv(sweep: SweepReport, path: TypePath):
    """Writes summary rows of all sweep points with inr_db prepended."""
    _write(sweep.to_frame(), path)
