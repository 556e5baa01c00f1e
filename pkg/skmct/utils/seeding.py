# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import numpy as np
from sklearn.utils import murmurhash3_32

__all__ = ['derive_seed', 'derive_random_state']

_SEED_MODULUS = 2 ** 31


def derive_seed(seed: int, *keys) -> int:
    """ Derive a 32 bit seed from a global seed and a purpose key.

    Identical (seed, keys) always give the same value, independent of the
    order in which streams are requested.
    """
    key = '/'.join(str(k) for k in keys)
    return int(murmurhash3_32(key, seed=int(seed) % _SEED_MODULUS, positive=True))


def derive_random_state(seed: int, *keys) -> np.random.RandomState:
    """ Independent RandomState for one purpose, e.g. ``(seed, 'cam0', 17, 'detect')``. """
    return np.random.RandomState(derive_seed(seed, *keys))
