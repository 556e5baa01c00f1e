# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import math

import numpy as np

__all__ = ['check_positive_int',
           'check_non_negative_int',
           'check_positive',
           'check_probability',
           'check_open_interval',
           'check_unit_vector',
           ]


def check_positive_int(value, name: str = 'value'):
    # Check a count-like parameter
    if not np.issubdtype(type(value), np.integer):
        raise TypeError(f"{name} does not take {type(value)} value, enter integer value")
    if value <= 0:
        raise ValueError(f"Expected {name} > 0. Got {value:d}")
    return int(value)


def check_non_negative_int(value, name: str = 'value'):
    if not np.issubdtype(type(value), np.integer):
        raise TypeError(f"{name} does not take {type(value)} value, enter integer value")
    if value < 0:
        raise ValueError(f"Expected {name} >= 0. Got {value:d}")
    return int(value)


def check_positive(value, name: str = 'value'):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"Expected finite {name} > 0. Got {value}")
    return value


def check_probability(value, name: str = 'probability'):
    value = float(value)
    if not 0. <= value <= 1.:
        raise ValueError(f"Expected {name} in [0, 1]. Got {value}")
    return value


def check_open_interval(value, low: float, high: float, name: str = 'value'):
    value = float(value)
    if not low < value < high:
        raise ValueError(f"Expected {name} in ({low}, {high}). Got {value}")
    return value


def check_unit_vector(vector, name: str = 'feature', atol: float = 1e-6) -> np.ndarray:
    """ Return `vector` as a float array after checking it has unit L2 norm. """
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1:
        raise ValueError(f"Expected {name} to be a 1-d vector. Got shape {vector.shape}")
    norm = np.linalg.norm(vector)
    if not abs(norm - 1.) <= atol:
        raise ValueError(f"Expected unit-normalized {name}. Got L2 norm {norm:.8f}")
    return vector
