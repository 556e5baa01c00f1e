# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import math

import numpy as np
import pytest

from skmct.geometry import (BBox, FrameGeometry, iou, iou_matrix, boxes_match,
                            min_dist, touches_edge)

GRID_STEP = 0.01


def _random_box(rng, extent=50.):
    # Corners on the 0.01 pixel grid, so the rasterization count is exact
    x = np.sort(rng.choice(int(extent / GRID_STEP), size=2, replace=False)) * GRID_STEP
    y = np.sort(rng.choice(int(extent / GRID_STEP), size=2, replace=False)) * GRID_STEP
    return BBox(x[0], y[0], x[1], y[1])


def _rasterized_iou(a: BBox, b: BBox, extent=50.):
    """ Count grid cells (by their centers) covered by a, b, and both. """
    centers = np.arange(0., extent, GRID_STEP) + GRID_STEP / 2

    def inside(lo, hi):
        return (centers > lo) & (centers < hi)

    ax, ay = inside(a.x_min, a.x_max), inside(a.y_min, a.y_max)
    bx, by = inside(b.x_min, b.x_max), inside(b.y_min, b.y_max)
    n_a = np.count_nonzero(ax) * np.count_nonzero(ay)
    n_b = np.count_nonzero(bx) * np.count_nonzero(by)
    n_inter = np.count_nonzero(ax & bx) * np.count_nonzero(ay & by)
    return n_inter / (n_a + n_b - n_inter)


@pytest.mark.parametrize('coords', [(0, 0, 0, 10), (0, 0, 10, 0), (5, 0, 1, 10), (0, 0, np.inf, 1)])
def test_invalid_box_is_rejected(coords):
    with pytest.raises(ValueError):
        BBox(*coords)


def test_iou_examples():
    a = BBox(0, 0, 10, 10)
    assert iou(a, BBox(0, 0, 10, 10)) == 1.
    assert iou(a, BBox(20, 20, 30, 30)) == 0.
    np.testing.assert_allclose(iou(a, BBox(5, 5, 15, 15)), 25 / 175)


def test_iou_agrees_with_rasterization():
    rng = np.random.RandomState(123)
    for _ in range(1_000):
        a, b = _random_box(rng), _random_box(rng)
        assert abs(iou(a, b) - _rasterized_iou(a, b)) < 1e-3


def test_iou_symmetry_and_bounds():
    rng = np.random.RandomState(7)
    for _ in range(200):
        a, b = _random_box(rng), _random_box(rng)
        assert iou(a, b) == iou(b, a)
        assert 0. <= iou(a, b) <= 1.
        if a != b:
            assert iou(a, b) < 1.


def test_iou_matrix_matches_scalar_iou():
    rng = np.random.RandomState(0)
    boxes_a = [_random_box(rng) for _ in range(6)]
    boxes_b = [_random_box(rng) for _ in range(4)]
    expected = np.array([[iou(a, b) for b in boxes_b] for a in boxes_a])
    np.testing.assert_allclose(iou_matrix(boxes_a, boxes_b), expected)


def test_iou_matrix_treats_nan_rows_as_absent():
    absent = np.full((1, 4), np.nan)
    result = iou_matrix(absent, [BBox(0, 0, 1, 1)])
    np.testing.assert_array_equal(result, [[0.]])


def test_iou_matrix_empty():
    assert iou_matrix([], [BBox(0, 0, 1, 1)]).shape == (0, 1)


def test_boxes_match():
    a = BBox(0, 0, 10, 10)
    assert boxes_match(a, BBox(0, 0, 10, 10), 0.5)
    assert not boxes_match(a, BBox(20, 20, 30, 30), 0.5)
    assert not boxes_match(a, BBox(5, 5, 15, 15), 0.5)


@pytest.mark.parametrize('threshold', [0., 1., 1.5])
def test_boxes_match_threshold_range(threshold):
    with pytest.raises(ValueError):
        boxes_match(BBox(0, 0, 1, 1), BBox(0, 0, 1, 1), threshold)


def test_min_dist_examples():
    b = BBox(0, 0, 10, 10)
    assert min_dist(b, [BBox(0, 0, 10, 10)]) == 0.
    assert min_dist(b, []) == math.inf
    far = [BBox(30, 5, 40, 15), BBox(100, 100, 110, 110)]
    np.testing.assert_allclose(min_dist(b, far), math.sqrt(900 + 25))


def test_min_dist_monotone_when_adding_boxes():
    rng = np.random.RandomState(3)
    b = _random_box(rng)
    boxes = []
    previous = math.inf
    for _ in range(20):
        boxes.append(_random_box(rng))
        current = min_dist(b, boxes)
        assert current <= previous
        assert (current == 0.) == any(iou(b, other) > 0 for other in boxes)
        previous = current


@pytest.mark.parametrize('coords, expected', [((0, 100, 50, 200), True),
                                              ((900, 500, 1000, 600), False),
                                              ((1890, 500, 1920, 600), True),
                                              ((900, 1050, 1000, 1080), True),
                                              ])
def test_touches_edge(coords, expected):
    g = FrameGeometry(1920, 1080, 0.03)
    assert touches_edge(BBox(*coords), g) is expected


def test_touches_edge_reflection_invariance():
    g = FrameGeometry(1920, 1080, 0.03)
    rng = np.random.RandomState(11)
    for _ in range(500):
        x = np.sort(rng.choice(1920, 2, replace=False))
        y = np.sort(rng.choice(1080, 2, replace=False))
        box = BBox(x[0], y[0], x[1], y[1])
        mirrored_x = BBox(1920 - x[1], y[0], 1920 - x[0], y[1])
        mirrored_y = BBox(x[0], 1080 - y[1], x[1], 1080 - y[0])
        assert touches_edge(box, g) == touches_edge(mirrored_x, g) == touches_edge(mirrored_y, g)


@pytest.mark.parametrize('kwargs', [dict(width=0, height=10),
                                    dict(width=10, height=10, edge_band_fraction=0.5),
                                    dict(width=10.5, height=10)])
def test_invalid_frame_geometry(kwargs):
    with pytest.raises(ValueError):
        FrameGeometry(**kwargs)


def test_box_clip():
    box = BBox(-10, -10, 20, 20)
    assert box.clip(15, 15) == BBox(0, 0, 15, 15)
    assert BBox(20, 20, 30, 30).clip(10, 10) is None
