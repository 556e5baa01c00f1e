# SPDX-License-Identifier: BSD-3-Clause

import json
import os
from typing import List

from ..exceptions import ConfigurationError

__all__ = ['SCENARIO_PATH', 'list_scenarios', 'load_scenario']

SCENARIO_PATH = os.path.join(os.path.dirname(os.path.realpath(__file__)), 'scenarios')


def list_scenarios() -> List[str]:
    """ Names of the built-in scenarios. """
    return sorted(f[:-len('.json')] for f in os.listdir(SCENARIO_PATH) if f.endswith('.json'))


def load_scenario(name: str) -> dict:
    """Load a built-in scenario configuration.

    Parameters
    ----------
    name: str
        'garden-4cam' (slow people, always visible on every camera) or
        'intersection-5cam' (fast cars crossing a junction, partial coverage).

    Returns
    -------
    config: dict
        Configuration tree, see :class:`skmct.cli.ScenarioConfig`.
        A fresh copy on every call.
    """
    available = list_scenarios()
    if name not in available:
        raise ConfigurationError(f'unknown scenario {name!r}, available: {available}', field='scenario')
    with open(os.path.join(SCENARIO_PATH, f'{name}.json'), encoding='utf-8') as f:
        return json.load(f)
