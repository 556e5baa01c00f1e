# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause

"""
The :mod:`skmct.cli` package runs tracking experiments from scenario configurations.
"""
from .config import ScenarioConfig, merge_tree, parse_override, set_path
from .runner import RunOutcome, execute, run, sweep, parse_grid
from .main import main, build_parser


def validate(config) -> ScenarioConfig:
    """ Validate a configuration given as ScenarioConfig, dict, or path. """
    if isinstance(config, dict):
        config = ScenarioConfig.from_dict(config)
    elif not isinstance(config, ScenarioConfig):
        config = ScenarioConfig.from_file(config)
    return config.validate()


__all__ = ['ScenarioConfig',
           'merge_tree',
           'parse_override',
           'set_path',
           'RunOutcome',
           'execute',
           'run',
           'sweep',
           'parse_grid',
           'validate',
           'main',
           'build_parser',
           ]
