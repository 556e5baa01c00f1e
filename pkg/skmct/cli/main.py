# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Command line interface::

    skmct run <config> [--strategies argus,conv] [--seeds 1,2,3] [--out DIR] [--key.subkey=value ...]
    skmct sweep <config> --grid "queries.count=1,2,3;argus.alpha=0.3,0.7"
    skmct validate <config>
    skmct scenarios

`<config>` is a JSON file or the name of a built-in scenario.
Exit status 2 reports an invalid configuration or trace, 3 a broken
runtime invariant.
"""
from __future__ import annotations
import argparse
import logging
import sys
from typing import List, Sequence

from .. import __version__
from ..data import list_scenarios, load_scenario
from ..exceptions import ConfigurationError, InvariantViolation, TraceFormatError
from .config import ScenarioConfig, parse_override
from .runner import run, sweep

__all__ = ['main',
           'build_parser',
           'EXIT_OK',
           'EXIT_CONFIG',
           'EXIT_INVARIANT',
           ]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

_LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]


def _comma_list(text: str) -> List[str]:
    return [t.strip() for t in text.split(',') if t.strip()]


def _comma_ints(text: str) -> List[int]:
    try:
        return [int(t) for t in _comma_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma separated integers, got {text!r}') from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='skmct', allow_abbrev=False,
                                     description='Multi-camera multi-target tracking experiments')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    def add_common(sub):
        sub.add_argument('config', help='Scenario JSON file or built-in scenario name')
        sub.add_argument('--strategies', type=_comma_list, default=None,
                         help='Comma separated strategies, e.g. argus,conv')
        sub.add_argument('--seeds', type=_comma_ints, default=None, help='Comma separated seeds, e.g. 1,2,3')
        sub.add_argument('--out', default=None, help='Output directory (default: $SKMCT_OUTPUT_DIR or ./results)')
        sub.add_argument('--jobs', type=int, default=1, help='Parallel runs (joblib n_jobs)')
        sub.add_argument('-v', '--verbose', action='count', default=0, help='Log more (-vv for debug)')

    run_parser = commands.add_parser('run', allow_abbrev=False, help='Run every strategy and seed of a scenario')
    add_common(run_parser)
    run_parser.add_argument('--snapshot', action='store_true', help='Write the final Argus mapping table')

    sweep_parser = commands.add_parser('sweep', allow_abbrev=False, help='Run a parameter grid')
    add_common(sweep_parser)
    sweep_parser.add_argument('--grid', default='', help='Parameter grid "key=v1,v2;other.key=v3"')

    validate_parser = commands.add_parser('validate', allow_abbrev=False, help='Check a configuration')
    validate_parser.add_argument('config', help='Scenario JSON file or built-in scenario name')
    validate_parser.add_argument('-v', '--verbose', action='count', default=0)

    commands.add_parser('scenarios', help='List the built-in scenarios')
    return parser


def _load(args, overrides: Sequence[str]) -> ScenarioConfig:
    config = ScenarioConfig.from_file(args.config)
    return config.with_overrides(dict(parse_override(o) for o in overrides))


def main(argv: Sequence[str] = None) -> int:
    """ Entry point of the ``skmct`` command. Returns the exit status. """
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    overrides = [e for e in extra if e.startswith('--') and '=' in e]
    rest = [e for e in extra if e not in overrides]
    if rest:
        parser.error(f'unrecognized arguments: {" ".join(rest)}')
    if args.command == 'scenarios' and overrides:
        parser.error('scenarios takes no overrides')

    verbose = getattr(args, 'verbose', 0)
    logging.basicConfig(level=_LOG_LEVELS[min(verbose, len(_LOG_LEVELS) - 1)],
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    try:
        if args.command == 'scenarios':
            for name in list_scenarios():
                print(f'{name}\t{load_scenario(name).get("description", "")}')
            return EXIT_OK
        config = _load(args, overrides)
        if args.command == 'validate':
            config.validate()
            print(f'{config.name}: OK ({len(config.camera_ids)} cameras, strategies {config.strategies}, '
                  f'seeds {config.seeds})')
        elif args.command == 'run':
            reports = run(config, strategies=args.strategies, seeds=args.seeds, out=args.out, n_jobs=args.jobs,
                          snapshot=args.snapshot, verbose=max(verbose - 1, 0))
            for report in reports:
                print(f'{report.strategy}\tseed={report.seed}\tmean_ids={report.mean_ids:.3f}\t'
                      f'latency={report.mean_latency_s:.3f}s\tmota={report.mota}')
        elif args.command == 'sweep':
            table = sweep(config, args.grid, strategies=args.strategies, seeds=args.seeds, out=args.out,
                          n_jobs=args.jobs, verbose=max(verbose - 1, 0))
            if not table.empty:
                print(table.to_string(index=False))
    except (ConfigurationError, TraceFormatError) as e:
        print(f'skmct: error: {e}', file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as e:
        print(f'skmct: invariant violated: {e}', file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK
