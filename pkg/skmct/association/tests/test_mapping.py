# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import copy

import pytest

from skmct.association import ABSENT, SKIP_CAMERA, Expect, MappingTable, predict_slots
from skmct.exceptions import ConfigurationError
from skmct.geometry import BBox

CAMERAS = ('cam0', 'cam1', 'cam2')
B0 = BBox(100, 100, 150, 200)
B1 = BBox(300, 120, 340, 210)
B2 = BBox(600, 80, 640, 150)


def _shift(box: BBox, dx: float) -> BBox:
    return BBox(box.x_min + dx, box.y_min, box.x_max + dx, box.y_max)


def test_record_and_lookup():
    table = MappingTable(CAMERAS)
    entry_id = table.record_association('q', {'cam0': B0, 'cam1': B1, 'cam2': ABSENT}, t=0.)
    entry = table[entry_id]
    assert entry.slots == {'cam0': B0, 'cam1': B1, 'cam2': ABSENT}
    assert table.lookup_entry(dict(entry.slots)) is entry
    assert entry.hit_count == 1


def test_missing_cameras_are_absent():
    table = MappingTable(CAMERAS)
    entry_id = table.record_association('q', {'cam0': B0, 'cam2': B2})
    assert table[entry_id].slots['cam1'] is ABSENT
    assert table[entry_id].present_cameras == ('cam0', 'cam2')


def test_single_slot_is_rejected():
    table = MappingTable(CAMERAS)
    with pytest.warns(UserWarning, match='rejected'):
        assert table.record_association('q', {'cam0': B0}) is None
    assert len(table) == 0


def test_lookup_requires_overlap():
    table = MappingTable(CAMERAS)
    table.record_association('q', {'cam0': BBox(0, 0, 10, 10), 'cam1': B1})
    # IoU 0.3 with the stored slot
    observed = BBox(0, 0, 10, 3)
    assert table.lookup_entry({'cam0': observed}) is None
    assert table.lookup_entry({'cam0': BBox(0, 0, 10, 9)}) is not None


def test_absent_slots_must_agree():
    table = MappingTable(CAMERAS)
    table.record_association('q', {'cam1': B1, 'cam2': B2})
    assert table.lookup_entry({'cam0': B0}) is None
    assert table.lookup_entry({'cam0': ABSENT, 'cam1': B1}) is not None
    table.record_association('q', {'cam0': B0, 'cam1': B1})
    assert table.lookup_entry({'cam1': B1, 'cam2': ABSENT}).slots['cam0'] == B0


def test_uninspected_cameras_match_any_slot():
    table = MappingTable(CAMERAS)
    table.record_association('q', {'cam0': B0, 'cam1': B1, 'cam2': B2})
    assert table.match({'cam0': B0}) is not None
    assert table.match({'cam0': ABSENT}) is None


def test_lookup_tie_breaks():
    table = MappingTable(CAMERAS)
    exact = table.record_association('q', {'cam0': B0, 'cam1': B1}, t=0.)
    shifted = table.record_association('q', {'cam0': _shift(B0, 5), 'cam1': B2}, t=0.)
    assert table.match({'cam0': B0}).entry_id == exact
    assert table.match({'cam0': _shift(B0, 5)}).entry_id == shifted
    # Equal IoU: more hits first, then newer
    older = table.record_association('r', {'cam1': B1, 'cam2': B2}, t=0.)
    newer = table.record_association('r', {'cam1': B1, 'cam2': _shift(B2, 1)}, t=100.)
    assert table.match({'cam2': _shift(B2, 0.5)}).entry_id == newer
    table[older].hit_count = 3
    assert table.match({'cam2': _shift(B2, 0.5)}).entry_id == older


def test_match_does_not_count_hits():
    table = MappingTable(CAMERAS)
    entry_id = table.record_association('q', {'cam0': B0, 'cam1': B1})
    table.match({'cam0': B0})
    assert table[entry_id].hit_count == 0


def test_predict_slots():
    table = MappingTable(CAMERAS)
    entry = table[table.record_association('q', {'cam0': B0, 'cam1': B1, 'cam2': ABSENT})]
    assert predict_slots(entry, ['cam1', 'cam2']) == {'cam1': Expect(B1), 'cam2': SKIP_CAMERA}
    assert predict_slots(entry, []) == {}
    entry = table[table.record_association('q', {'cam0': B0, 'cam2': ABSENT, 'cam1': B2})]
    assert table.predict_slots(entry, ['cam2']) == {'cam2': SKIP_CAMERA}


def test_prune_prefers_higher_score():
    table = MappingTable(CAMERAS)
    low = table.record_association('q', {'cam0': B0, 'cam1': B1}, scores={'cam0': 0.7, 'cam1': 0.7})
    high = table.record_association('q', {'cam0': B0, 'cam1': B1}, scores={'cam0': 0.9, 'cam1': 0.9})
    assert table.prune_entries() == 1
    assert high in table and low not in table


def test_prune_prefers_more_slots():
    table = MappingTable(CAMERAS)
    two = table.record_association('q', {'cam0': B0, 'cam1': B1}, scores={'cam0': 1., 'cam1': 1.})
    three = table.record_association('q', {'cam0': B0, 'cam1': B1, 'cam2': B2},
                                     scores={'cam0': 0.1, 'cam1': 0.1, 'cam2': 0.1})
    table.prune_entries()
    assert three in table and two not in table


def test_prune_keeps_disjoint_entries():
    table = MappingTable(CAMERAS)
    table.record_association('q', {'cam0': B0, 'cam1': B1})
    table.record_association('q', {'cam0': _shift(B0, 500), 'cam1': _shift(B1, 500)})
    # Shares cam0 with the first entry at a distinct position
    table.record_association('q', {'cam2': B2, 'cam0': _shift(B0, 1000)})
    assert table.prune_entries() == 0
    assert len(table) == 3


def test_prune_needs_overlap_on_every_shared_camera():
    table = MappingTable(CAMERAS)
    table.record_association('q', {'cam0': B0, 'cam1': B1})
    table.record_association('q', {'cam0': B0, 'cam1': _shift(B1, 30)})
    assert table.prune_entries() == 0


def test_prune_is_idempotent():
    table = MappingTable(CAMERAS, capacity=5)
    for dx in range(8):
        table.record_association('q', {'cam0': _shift(B0, dx), 'cam1': _shift(B1, 3 * dx)},
                                 scores={'cam0': 0.5 + dx / 100, 'cam1': 0.8})
    table.prune_entries()
    snapshot = [e.entry_id for e in table]
    assert table.prune_entries() == 0
    assert [e.entry_id for e in table] == snapshot


def test_capacity_is_never_exceeded():
    table = MappingTable(CAMERAS, capacity=100)
    for k in range(101):
        table.record_association('q', {'cam0': BBox(20 * k, 0, 20 * k + 10, 10), 'cam1': B1 if k == 0 else
                                       BBox(20 * k, 500, 20 * k + 10, 510)}, t=float(k))
        assert len(table) <= 100
    assert len(table) == 100
    # The oldest unused entry is evicted first
    assert 0 not in table


def test_interpolate_occlusion():
    table = MappingTable(CAMERAS)
    table.record_association('q', {'cam0': B0, 'cam1': B1, 'cam2': B2})
    last = _shift(B0, 2)
    expected = table.interpolate_occlusion('cam0', 100., last, {'cam1': [B2, _shift(B1, 1)], 'cam2': [B2]})
    assert expected == {'cam1': B1, 'cam2': B2}
    assert table.interpolate_occlusion('cam0', 100., last, {'cam1': [B1], 'cam2': []}) is None
    assert table.interpolate_occlusion('cam0', 100., last, {'cam1': [B1]}) is None
    assert table.interpolate_occlusion('cam0', 100., _shift(B0, 300), {'cam1': [B1], 'cam2': [B2]}) is None


def test_snapshot_roundtrip(tmp_path):
    table = MappingTable(CAMERAS)
    table.record_association('q', {'cam0': B0, 'cam1': B1, 'cam2': ABSENT}, scores={'cam0': 0.9, 'cam1': 0.8},
                             t=100.)
    table.record_association('r', {'cam1': B2, 'cam2': B0}, t=200.)
    path = tmp_path / 'mapping.csv'
    assert table.save(path) == 2
    header = path.read_text(encoding='utf-8').splitlines()[0]
    assert header == 'entry_id,camera_id,x_min,y_min,x_max,y_max,score,created_ms'
    loaded = MappingTable.load(path)
    assert loaded.cameras == CAMERAS
    for original, copied in zip(table, loaded):
        assert original.entry_id == copied.entry_id
        assert original.slots == copied.slots
        assert original.scores == copied.scores
        assert original.created_ms == copied.created_ms


def test_snapshot_absent_rows(tmp_path):
    table = MappingTable(CAMERAS)
    table.record_association('q', {'cam0': B0, 'cam1': B1, 'cam2': ABSENT}, t=100.)
    path = tmp_path / 'mapping.csv'
    table.save(path)
    assert path.read_text(encoding='utf-8').splitlines()[3] == '0,cam2,ABSENT,,,,,100.0'

    path.write_text('entry_id,camera_id,x_min,y_min,x_max,y_max,score,created_ms\n'
                    '7,cam0,100,100,150,200,0.9,5\n'
                    '7,cam1,300,120,340,210,0.8,5\n'
                    '7,cam2,ABSENT,,,,,5\n', encoding='utf-8')
    entry, = MappingTable.load(path)
    assert entry.slots == {'cam0': B0, 'cam1': B1, 'cam2': ABSENT}
    assert entry.scores == {'cam0': 0.9, 'cam1': 0.8}

    path.write_text('entry_id,camera_id,x_min,y_min,x_max,y_max,score,created_ms\n'
                    '7,cam0,100,100,150,200,0.9,5\n'
                    '7,cam1,300,120,340,210,0.8,5\n'
                    '7,cam2,ABSENT,1,2,3,0.5,5\n', encoding='utf-8')
    with pytest.raises(ConfigurationError, match='ABSENT'):
        MappingTable.load(path)


def test_loading_respects_capacity(tmp_path):
    table = MappingTable(CAMERAS)
    for k in range(10):
        table.record_association('q', {'cam0': BBox(20 * k, 0, 20 * k + 10, 10), 'cam1': B1}, t=float(k))
    path = tmp_path / 'mapping.csv'
    table.save(path)
    assert len(MappingTable.load(path, cameras=CAMERAS, capacity=4)) == 4


def test_invalid_snapshot(tmp_path):
    path = tmp_path / 'mapping.csv'
    path.write_text('entry_id,camera_id\n0,cam0\n', encoding='utf-8')
    with pytest.raises(ConfigurationError):
        MappingTable.load(path)


def test_unknown_camera():
    table = MappingTable(CAMERAS)
    with pytest.raises(ValueError, match='Unknown'):
        table.record_association('q', {'cam0': B0, 'cam9': B1})
    with pytest.raises(ValueError, match='Unknown'):
        table.match({'cam9': B1})


def test_markers_survive_copies():
    assert copy.deepcopy(ABSENT) is ABSENT
    assert copy.copy(SKIP_CAMERA) is SKIP_CAMERA
