# SPDX-License-Identifier: BSD-3-Clause
"""
The :mod:`skmct.data` package provides the built-in example scenarios.
"""
from .load_scenario import SCENARIO_PATH, list_scenarios, load_scenario

__all__ = ['SCENARIO_PATH', 'list_scenarios', 'load_scenario']
