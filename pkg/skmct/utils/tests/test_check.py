# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import numpy as np
import pytest
from skmct.utils import (check_positive_int, check_probability, check_open_interval,
                         check_unit_vector, derive_seed, derive_random_state)


@pytest.mark.parametrize('value', [0, -3])
def test_positive_int_rejects_non_positive(value):
    with pytest.raises(ValueError):
        check_positive_int(value, 'n_batch')


@pytest.mark.parametrize('value', [1.5, '3', None])
def test_positive_int_rejects_non_integers(value):
    with pytest.raises(TypeError):
        check_positive_int(value, 'n_batch')


def test_positive_int_accepts_numpy_integers():
    assert check_positive_int(np.int64(4)) == 4


@pytest.mark.parametrize('value', [-0.1, 1.1])
def test_probability_bounds(value):
    with pytest.raises(ValueError):
        check_probability(value)


def test_open_interval_excludes_bounds():
    with pytest.raises(ValueError):
        check_open_interval(1., 0., 1.)
    assert check_open_interval(0.5, 0., 1.) == 0.5


def test_unit_vector():
    check_unit_vector([0., 1.])
    with pytest.raises(ValueError):
        check_unit_vector([1., 1.])


def test_derived_seeds_are_stable_and_distinct():
    assert derive_seed(7, 'cam0', 3, 'detect') == derive_seed(7, 'cam0', 3, 'detect')
    assert derive_seed(7, 'cam0', 3, 'detect') != derive_seed(7, 'cam1', 3, 'detect')
    assert derive_seed(7, 'cam0', 3, 'detect') != derive_seed(8, 'cam0', 3, 'detect')
    a = derive_random_state(1, 'x').normal(size=5)
    b = derive_random_state(1, 'x').normal(size=5)
    np.testing.assert_array_equal(a, b)
