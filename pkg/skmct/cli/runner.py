# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Experiment execution: one tracking run per (strategy, seed), parameter sweeps,
and the files they write.
"""
from __future__ import annotations
from dataclasses import dataclass
import itertools
import json
import logging
import os
from typing import Any, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed, effective_n_jobs
import pandas as pd

from ..association import MappingTable
from ..exceptions import ConfigurationError
from ..metrics import REPORT_COLUMNS, Report, score_run, summarize
from ..pipeline import TrackingRun
from ..utils import resolve_output_dir
from .config import ScenarioConfig, parse_override

__all__ = ['RunOutcome',
           'execute',
           'run',
           'sweep',
           'parse_grid',
           'CAMERA_COUNT_KEY',
           'FLOAT_FORMAT',
           ]

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.6f'

CAMERA_COUNT_KEY = 'cameras.count'
"""Sweep key enumerating all camera subsets of a given size."""

_SWEEP_METRICS = ['mean_ids', 'max_ids', 'mean_latency_s', 'detect_latency_s', 'id_latency_s',
                  'motp', 'mota', 'crops_tx', 'bytes_tx']


@dataclass
class RunOutcome:
    report: Report
    run: TrackingRun
    mapping: Optional[MappingTable] = None


def execute(config: ScenarioConfig, strategy: str, seed: int, verbose: int = 0) -> RunOutcome:
    """ Build the scenario for `seed`, track with `strategy`, and score the result.

    The first ``training_fraction`` of the timeline trains the trackers that
    learn offline (CrossRoI masks, offline mapping tables); every strategy is
    evaluated on the remaining bundles.
    """
    bundles = config.build_bundles(seed)
    labels = config.labels(bundles)
    detector, identifier = config.build_oracles(seed)
    queries = config.build_queries(identifier, labels)
    training, evaluation = config.split(bundles)
    tracker = config.build_tracker(strategy, queries, config.build_profiles(), detector, identifier,
                                   seed=seed, verbose=verbose)
    tracker.fit(training)
    result = tracker.run(evaluation)
    scores = score_run(result, evaluation, [q.query_id for q in queries])
    report = summarize(result.ledger, scores, strategy=strategy, scenario=config.name, seed=seed)
    logger.info(f'{config.name} {strategy} seed={seed}: mean IDs {report.mean_ids:.2f}, '
                f'latency {report.mean_latency_s:.3f} s, MOTA {report.mota}')
    return RunOutcome(report=report, run=result, mapping=getattr(tracker, 'mapping_', None))


def _execute_all(tasks: Sequence[Tuple[ScenarioConfig, str, int]], n_jobs: int = 1,
                 verbose: int = 0) -> List[RunOutcome]:
    # Results keep the order of the tasks, whatever the completion order
    n_jobs = effective_n_jobs(n_jobs)
    if n_jobs == 1:
        return [execute(config, strategy, seed, verbose) for config, strategy, seed in tasks]
    return Parallel(n_jobs=n_jobs)(delayed(execute)(config, strategy, seed) for config, strategy, seed in tasks)


def _append_csv(frame: pd.DataFrame, path: str):
    frame.to_csv(path, mode='a', header=not os.path.exists(path), index=False, float_format=FLOAT_FORMAT)


def _write_config(config: ScenarioConfig, directory: str) -> str:
    path = os.path.join(directory, 'config.json')
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def run(config: ScenarioConfig, strategies: Sequence[str] = None, seeds: Sequence[int] = None,
        out: str = None, n_jobs: int = 1, snapshot: bool = False, verbose: int = 0) -> List[Report]:
    """ Run every (strategy, seed) pair of a scenario and write the result files.

    Parameters
    ----------
    config: ScenarioConfig

    strategies: sequence of str, optional
        Overrides the strategies of the configuration.

    seeds: sequence of int, optional
        Overrides the seeds of the configuration.

    out: str, optional
        Output directory. Defaults to the configured ``output_dir``, then to
        the ``SKMCT_OUTPUT_DIR`` environment variable, then to ``results``.

    n_jobs: int, default = 1
        Number of parallel runs.

    snapshot: bool, default = False
        Also write the final mapping table of Argus runs.

    Returns
    -------
    list of Report
        In (seed, strategy) order.

    Notes
    -----
    Written files: ``report.csv`` (appended), ``ledger_<strategy>_<seed>.csv``,
    ``tracklets_<strategy>_<seed>.csv``, ``mapping_<seed>.csv`` and ``config.json``,
    the fully resolved configuration.
    """
    overrides = {}
    if strategies is not None:
        overrides['strategies'] = list(strategies)
    if seeds is not None:
        overrides['seeds'] = [int(s) for s in seeds]
    config = config.with_overrides(overrides).validate()
    directory = resolve_output_dir(out or config.output_dir)
    tasks = [(config, strategy, seed) for seed in config.seeds for strategy in config.strategies]
    logger.info(f'Running {len(tasks)} tracking runs of {config.name} into {directory}')
    outcomes = _execute_all(tasks, n_jobs=n_jobs, verbose=verbose)

    for (_, strategy, seed), outcome in zip(tasks, outcomes):
        outcome.run.ledger.to_frame().to_csv(os.path.join(directory, f'ledger_{strategy}_{seed}.csv'),
                                             index=False, float_format=FLOAT_FORMAT)
        outcome.run.tracklets_frame().to_csv(os.path.join(directory, f'tracklets_{strategy}_{seed}.csv'),
                                             index=False, float_format=FLOAT_FORMAT)
        if snapshot and outcome.mapping is not None:
            outcome.mapping.save(os.path.join(directory, f'mapping_{seed}.csv'))
    reports = [outcome.report for outcome in outcomes]
    _append_csv(pd.DataFrame([r.row() for r in reports], columns=REPORT_COLUMNS),
                os.path.join(directory, 'report.csv'))
    _write_config(config, directory)
    logger.info(f'Wrote {len(reports)} report rows to {directory}')
    return reports


def parse_grid(text: str) -> List[Tuple[str, List[Any]]]:
    """ Parse ``key=v1,v2;other.key=v3`` into [(key, [values]), ...].

    Values are parsed as JSON where possible. An empty text gives an empty grid.
    """
    grid = []
    for part in (text or '').split(';'):
        part = part.strip()
        if not part:
            continue
        key, sep, raw = part.partition('=')
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(f'{part!r} is not of the form key=v1,v2', field='grid')
        values = [parse_override(f'{key}={v.strip()}')[1] for v in raw.split(',') if v.strip()]
        if not values:
            raise ConfigurationError(f'no values for {key}', field='grid')
        if key in dict(grid):
            raise ConfigurationError(f'{key} appears twice', field='grid')
        grid.append((key, values))
    return grid


def sweep(config: ScenarioConfig, grid: str, strategies: Sequence[str] = None, seeds: Sequence[int] = None,
          out: str = None, n_jobs: int = 1, verbose: int = 0) -> pd.DataFrame:
    """ Run the cross product of a parameter grid and average the reports.

    ``cameras.count=k`` runs every k-subset of the cameras; the rows of all
    subsets and seeds are averaged per grid point and strategy.

    Returns
    -------
    pd.DataFrame
        One row per grid point and strategy, also written to ``sweep.csv``.
        Empty (and nothing written) for an empty grid.
    """
    axes = parse_grid(grid)
    if not axes:
        logger.info('Empty sweep grid, nothing to run')
        return pd.DataFrame()
    overrides = {}
    if strategies is not None:
        overrides['strategies'] = list(strategies)
    if seeds is not None:
        overrides['seeds'] = [int(s) for s in seeds]
    config = config.with_overrides(overrides).validate()
    keys = [key for key, _ in axes]

    tasks, points = [], []
    for values in itertools.product(*(v for _, v in axes)):
        point = dict(zip(keys, values))
        point_config = config.with_overrides({k: v for k, v in point.items() if k != CAMERA_COUNT_KEY})
        if CAMERA_COUNT_KEY in point:
            k = point[CAMERA_COUNT_KEY]
            if not isinstance(k, int) or not 1 <= k <= len(config.camera_ids):
                raise ConfigurationError(f'must be in [1, {len(config.camera_ids)}], got {k!r}',
                                         field=CAMERA_COUNT_KEY)
            subsets = list(itertools.combinations(config.camera_ids, k))
        else:
            subsets = [tuple(config.camera_ids)]
        for subset in subsets:
            sub_config = point_config.select_cameras(subset).validate()
            for seed in sub_config.seeds:
                for strategy in sub_config.strategies:
                    tasks.append((sub_config, strategy, seed))
                    points.append(point)
    logger.info(f'Sweeping {len(tasks)} tracking runs of {config.name}')
    outcomes = _execute_all(tasks, n_jobs=n_jobs, verbose=verbose)

    records = []
    for point, outcome in zip(points, outcomes):
        record = outcome.report.to_dict()
        records.append({**{k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in point.items()},
                        'strategy': record['strategy'],
                        **{m: record[m] for m in _SWEEP_METRICS}})
    table = pd.DataFrame(records)
    for metric in _SWEEP_METRICS:
        table[metric] = pd.to_numeric(table[metric])
    grouped = table.groupby(keys + ['strategy'], sort=False, dropna=False)
    summary = grouped[_SWEEP_METRICS].mean()
    summary.insert(0, 'n_runs', grouped.size())
    summary = summary.reset_index()

    directory = resolve_output_dir(out or config.output_dir)
    summary.to_csv(os.path.join(directory, 'sweep.csv'), index=False, float_format=FLOAT_FORMAT)
    _write_config(config, directory)
    logger.info(f'Wrote {len(summary)} sweep rows to {directory}')
    return summary
