# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Trace files replay externally recorded ground truth.

One row per annotated object::

    timestamp_ms,camera_id,object_id,x_min,y_min,x_max,y_max,label,visibility

The header row is required. Files are UTF-8 with LF line endings.
"""
from __future__ import annotations
import logging
from typing import Dict, Iterable, Iterator, List, Mapping, Union

import numpy as np
import pandas as pd

from ..exceptions import TraceFormatError
from ..geometry import BBox, FrameGeometry
from .frames import CameraFrame, FrameBundle, GroundTruthAnnotation, align_frames, DEFAULT_ALIGNMENT_MS

__all__ = ['TRACE_COLUMNS', 'ingest_trace', 'write_trace']

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['timestamp_ms', 'camera_id', 'object_id',
                 'x_min', 'y_min', 'x_max', 'y_max', 'label', 'visibility']
_NUMERIC = ['timestamp_ms', 'x_min', 'y_min', 'x_max', 'y_max', 'visibility']
# Rows are numbered from 1 with the header on line 1
_FIRST_ROW_LINE = 2


def _read(path) -> pd.DataFrame:
    try:
        table = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        return pd.DataFrame({column: pd.Series([], dtype=float if column in _NUMERIC else object)
                             for column in TRACE_COLUMNS})
    except pd.errors.ParserError as e:
        raise TraceFormatError(f'cannot parse trace: {e}') from e
    missing = [c for c in TRACE_COLUMNS if c not in table.columns]
    if missing:
        raise TraceFormatError(f'missing columns {missing}', line=1)
    table = table[TRACE_COLUMNS].copy()
    for column in ['camera_id', 'object_id', 'label']:
        table[column] = table[column].str.strip()
        empty = table.index[table[column] == '']
        if len(empty):
            raise TraceFormatError(f'empty {column}', line=int(empty[0]) + _FIRST_ROW_LINE)
    for column in _NUMERIC:
        values = pd.to_numeric(table[column], errors='coerce').astype(float)
        bad = table.index[~np.isfinite(values.to_numpy())]
        if len(bad):
            row = int(bad[0])
            raise TraceFormatError(f'{column} is not a finite number: {table.at[row, column]!r}',
                                   line=row + _FIRST_ROW_LINE)
        table[column] = values
    return table


def _validate(table: pd.DataFrame):
    invalid = table.index[(table['x_min'] >= table['x_max']) | (table['y_min'] >= table['y_max'])]
    if len(invalid):
        raise TraceFormatError('box must have positive area', line=int(invalid[0]) + _FIRST_ROW_LINE)
    out_of_range = table.index[(table['visibility'] < 0) | (table['visibility'] > 1)]
    if len(out_of_range):
        raise TraceFormatError('visibility must be in [0, 1]', line=int(out_of_range[0]) + _FIRST_ROW_LINE)
    for camera_id, rows in table.groupby('camera_id', sort=False):
        decreasing = rows.index[rows['timestamp_ms'].diff() < 0]
        if len(decreasing):
            raise TraceFormatError(f'timestamps of camera {camera_id} are not monotone',
                                   line=int(decreasing[0]) + _FIRST_ROW_LINE)
    duplicated = table.index[table.duplicated(['timestamp_ms', 'camera_id', 'object_id'])]
    if len(duplicated):
        raise TraceFormatError('duplicate (timestamp, camera, object) row', line=int(duplicated[0]) + _FIRST_ROW_LINE)


def _frame_indices(timestamps: np.ndarray, frame_interval_ms: float = None) -> np.ndarray:
    """ Frame numbers of sorted distinct timestamps, counting the frames lost in gaps. """
    if len(timestamps) < 2:
        return np.zeros(len(timestamps), dtype=int)
    if frame_interval_ms is None:
        frame_interval_ms = float(np.diff(timestamps).min())
    indices = np.rint((timestamps - timestamps[0]) / frame_interval_ms).astype(int)
    # Jittered timestamps must not fall onto one frame number
    return np.maximum.accumulate(np.maximum(indices, np.arange(len(indices))))


def ingest_trace(path, alignment_ms: float = DEFAULT_ALIGNMENT_MS,
                 geometry: Union[FrameGeometry, Mapping[str, FrameGeometry]] = None,
                 frame_interval_ms: float = None) -> Iterator[FrameBundle]:
    """ Reconstruct FrameBundles from a trace CSV.

    Parameters
    ----------
    path: str or path-like

    alignment_ms: float, default = 3
        Frames of different cameras within this difference share a bundle.

    geometry: FrameGeometry or dict of camera id -> FrameGeometry, optional
        Frame size of the recording cameras. Defaults to 1920x1080.

    frame_interval_ms: float, optional
        Time between two frames of one camera. Defaults to the smallest
        difference of the camera's consecutive timestamps.

    Returns
    -------
    iterator of FrameBundle

    Raises
    ------
    TraceFormatError
        For malformed rows (with the offending line number) and
        non-monotone timestamps within a camera.

    Notes
    -----
    Frame numbers follow the timestamps: a stretch without annotations
    skips frame numbers rather than joining the frames around it.
    Rows with visibility 0 are dropped. Identification features need no
    input: ground embeddings derive from the object ids.
    """
    if frame_interval_ms is not None and not frame_interval_ms > 0:
        raise ValueError(f'frame_interval_ms must be positive. Got {frame_interval_ms}')
    table = _read(path)
    _validate(table)
    if geometry is None:
        geometry = FrameGeometry(1920, 1080)
    streams: Dict[str, List[CameraFrame]] = {}
    for camera_id, rows in table.groupby('camera_id', sort=True):
        frame_geometry = geometry[camera_id] if isinstance(geometry, Mapping) else geometry
        timestamps = np.unique(rows['timestamp_ms'].to_numpy(dtype=float))
        frame_indices = dict(zip(timestamps, _frame_indices(timestamps, frame_interval_ms)))
        rows = rows[rows['visibility'] > 0]
        if rows.empty:
            continue
        frames = []
        for timestamp, group in rows.groupby('timestamp_ms', sort=True):
            frame_index = int(frame_indices[timestamp])
            annotations = tuple(GroundTruthAnnotation(timestamp_ms=float(timestamp),
                                                      camera_id=camera_id,
                                                      object_id=row.object_id,
                                                      box=BBox(row.x_min, row.y_min, row.x_max, row.y_max),
                                                      visibility=float(row.visibility),
                                                      label=row.label)
                                for row in group.sort_values('object_id').itertuples(index=False))
            frames.append(CameraFrame(camera_id=camera_id, frame_index=frame_index,
                                      timestamp_ms=float(timestamp), geometry=frame_geometry,
                                      annotations=annotations))
        streams[camera_id] = frames
    n_visible = int((table['visibility'] > 0).sum())
    logger.info(f'Ingested {n_visible} annotations of {len(streams)} cameras from {path}')
    return align_frames(streams, alignment_ms)


def write_trace(bundles: Iterable[FrameBundle], path) -> int:
    """ Write the ground truth of `bundles` as trace CSV. Returns the number of rows. """
    rows = [(a.timestamp_ms, a.camera_id, a.object_id,
             a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max, a.label, a.visibility)
            for bundle in bundles for a in bundle.annotations()]
    table = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    table = table.sort_values(['camera_id', 'timestamp_ms', 'object_id'], kind='mergesort')
    table.to_csv(path, index=False, encoding='utf-8')
    return len(table)
