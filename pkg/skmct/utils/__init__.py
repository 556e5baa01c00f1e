# SPDX-License-Identifier: BSD-3-Clause
"""
The :mod:`skmct.utils` package provides parameter validation, seeding and file helpers.
"""
from .check import (check_positive_int, check_non_negative_int, check_positive,
                    check_probability, check_open_interval, check_unit_vector)
from .io import resolve_output_dir, OUTPUT_DIR_ENV
from .seeding import derive_seed, derive_random_state

__all__ = ['check_positive_int',
           'check_non_negative_int',
           'check_positive',
           'check_probability',
           'check_open_interval',
           'check_unit_vector',
           'derive_seed',
           'derive_random_state',
           'resolve_output_dir',
           'OUTPUT_DIR_ENV',
           ]
