# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
Scenario configuration: a JSON tree naming the world (or a trace), the
cameras and their profiles, the oracles, the queries and the strategies to run.

A configuration may start from a built-in scenario with ``"scenario": "<name>"``
and override any key. Command line flags ``--key.subkey=value`` override
dotted paths of the resolved tree.
"""
from __future__ import annotations
import copy
import json
import logging
import os
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from ..data import list_scenarios, load_scenario
from ..exceptions import ConfigurationError
from ..geometry import FrameGeometry
from ..pipeline import ArgusTracker, STRATEGIES, TrackerBase, make_queries, make_tracker
from ..scheduler import CameraProfile, load_profile_preset, load_profiles
from ..utils import check_open_interval, check_positive, check_probability
from ..worldsim import (CameraModel, DetectionOracle, FrameBundle, IdentificationOracle, ObjectSpec,
                        SyntheticWorld, WorldConfig, align_frames, ingest_trace, DEFAULT_ALIGNMENT_MS)

__all__ = ['ScenarioConfig',
           'merge_tree',
           'parse_override',
           'set_path',
           ]

logger = logging.getLogger(__name__)

SETTINGS = ('name', 'description', 'world', 'trace', 'cameras', 'detector', 'identifier', 'queries',
            'profiles', 'argus', 'strategies', 'alignment_ms', 'training_fraction', 'seeds', 'output_dir')

# Tracker parameters filled in by the runner, not by the ``argus`` section
_INJECTED = ('queries', 'profiles', 'detector', 'identifier', 'seed', 'verbose')

_OBJECT_KEYS = {'id': 'object_id', 'label': 'label', 'footprint': 'footprint', 'trajectory': 'trajectory',
                'position': 'position', 'waypoints': 'waypoints', 'speed': 'speed', 'mode': 'mode',
                'start_offset': 'start_offset', 'region': 'region'}


def merge_tree(base: Mapping, override: Mapping) -> dict:
    """ Recursive merge, values of `override` win. Neither input is modified. """
    merged = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_tree(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def set_path(tree: dict, path: str, value):
    """ Set ``tree[a][b][c] = value`` for ``path='a.b.c'``, creating dicts on the way.

    Integer components index into lists, e.g. ``cameras.0.profile``.
    """
    keys = path.split('.')
    node = tree
    for i, key in enumerate(keys[:-1]):
        if isinstance(node, list):
            node = node[_list_index(node, key, keys[:i + 1])]
        else:
            node = node.setdefault(key, {})
        if not isinstance(node, (dict, list)):
            raise ConfigurationError(f'cannot set a key below a {type(node).__name__} value',
                                     field='.'.join(keys[:i + 1]))
    if isinstance(node, list):
        node[_list_index(node, keys[-1], keys)] = value
    else:
        node[keys[-1]] = value


def _list_index(node: list, key: str, keys: Sequence[str]) -> int:
    try:
        index = int(key)
        node[index]
    except (ValueError, IndexError):
        raise ConfigurationError(f'{key!r} is not a valid list index', field='.'.join(keys)) from None
    return index


def parse_override(text: str) -> Tuple[str, Any]:
    """ Split ``key.sub=value`` into path and value. Values are parsed as JSON, else kept as strings. """
    path, sep, raw = text.lstrip('-').partition('=')
    if not sep or not path:
        raise ConfigurationError(f'override {text!r} is not of the form --key.subkey=value', field='overrides')
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


class ScenarioConfig:
    """ Resolved scenario configuration and the builders for everything it describes.

    Parameters
    ----------
    values: dict
        Configuration tree. A ``"scenario"`` key names a built-in base that
        the remaining keys override.

    Examples
    --------
    >>> config = ScenarioConfig.from_dict({'scenario': 'garden-4cam', 'seeds': [1, 2]}).validate()
    >>> config.strategies
    ['argus', 'conv', 'spatula', 'crossroi']
    """

    def __init__(self, values: Mapping):
        values = dict(values)
        base = values.pop('scenario', None)
        if base is not None:
            values = merge_tree(load_scenario(base), values)
            values.setdefault('name', base)
        self.values = copy.deepcopy(values)

    @classmethod
    def from_dict(cls, values: Mapping) -> ScenarioConfig:
        return cls(values)

    @classmethod
    def from_file(cls, path) -> ScenarioConfig:
        """ Read a JSON configuration file. A built-in scenario name is accepted as well. """
        if not os.path.exists(path) and path in list_scenarios():
            return cls({'scenario': path})
        try:
            with open(path, encoding='utf-8') as f:
                values = json.load(f)
        except OSError as e:
            raise ConfigurationError(f'cannot read {path}: {e.strerror}', field='config') from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f'{path} line {e.lineno} column {e.colno}: {e.msg}', field='config') from e
        if not isinstance(values, dict):
            raise ConfigurationError(f'{path} must hold a JSON object', field='config')
        values.setdefault('name', os.path.splitext(os.path.basename(path))[0])
        return cls(values)

    def with_overrides(self, overrides: Mapping[str, Any]) -> ScenarioConfig:
        """ Copy of the configuration with dotted-path overrides applied. """
        values = self.to_dict()
        for path, value in overrides.items():
            if path == 'scenario':
                raise ConfigurationError('the base scenario cannot be overridden', field='scenario')
            set_path(values, path, value)
        return ScenarioConfig(values)

    def select_cameras(self, camera_ids: Sequence[str]) -> ScenarioConfig:
        """ Copy of the configuration restricted to some cameras. """
        wanted = set(camera_ids)
        values = self.to_dict()
        values['cameras'] = [c for c in values.get('cameras', []) if str(c.get('id')) in wanted]
        return ScenarioConfig(values)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.values)

    def __repr__(self):
        return f'ScenarioConfig(name={self.name!r}, cameras={self.camera_ids}, strategies={self.strategies})'

    @property
    def name(self) -> str:
        return str(self.values.get('name', 'scenario'))

    @property
    def camera_ids(self) -> List[str]:
        return [str(c['id']) for c in self.values.get('cameras', [])]

    @property
    def strategies(self) -> List[str]:
        return list(self.values.get('strategies', ['argus', 'conv']))

    @property
    def seeds(self) -> List[int]:
        return list(self.values.get('seeds', [0]))

    @property
    def alignment_ms(self) -> float:
        return float(self.values.get('alignment_ms', DEFAULT_ALIGNMENT_MS))

    @property
    def training_fraction(self) -> float:
        return float(self.values.get('training_fraction', 0.1))

    @property
    def output_dir(self):
        return self.values.get('output_dir')

    # Validation

    def validate(self) -> ScenarioConfig:
        """ Check the whole tree, collecting every problem.

        Raises
        ------
        ConfigurationError
            Listing one ``<dotted.path>: <message>`` line per problem.
        """
        errors = self.errors()
        if errors:
            raise ConfigurationError(f'{len(errors)} invalid setting(s) in {self.name}:\n  ' + '\n  '.join(errors))
        return self

    def errors(self) -> List[str]:
        """ Diagnostics of all invalid settings, empty for a valid configuration. """
        errors: List[str] = []

        def report(path: str, error: Exception):
            if isinstance(error, ConfigurationError) and error.field:
                errors.append(str(error))
            else:
                errors.append(f'{path}: {error}')

        v = self.values
        for key in sorted(set(v) - set(SETTINGS)):
            errors.append(f'{key}: unknown setting')
        if ('world' in v) == ('trace' in v):
            errors.append('world: exactly one of world and trace must be given')

        cameras = v.get('cameras')
        if not isinstance(cameras, list) or not cameras:
            errors.append('cameras: at least one camera is required')
            cameras = []
        ids = []
        for i, camera in enumerate(cameras):
            where = f'cameras.{i}'
            if not isinstance(camera, dict) or 'id' not in camera:
                errors.append(f'{where}.id: camera id is missing')
                continue
            ids.append(str(camera['id']))
            try:
                geometry = self._geometry(camera)
                if 'world' in v:
                    self._camera_model(camera, geometry)
            except (ConfigurationError, ValueError, TypeError, KeyError) as e:
                report(where, e)
        if len(set(ids)) != len(ids):
            errors.append('cameras: camera ids must be unique')

        try:
            self.build_profiles()
        except (ConfigurationError, ValueError, TypeError, KeyError) as e:
            report('profiles', e)

        object_ids = None
        if 'world' in v:
            try:
                world = self.world_config(seed=0).validate()
                object_ids = [o.object_id for o in world.objects]
            except (ConfigurationError, ValueError, TypeError, KeyError) as e:
                report('world', e)
        elif 'trace' in v and not os.path.isfile(str(self._trace_path())):
            errors.append(f'trace.path: no such file {self._trace_path()}')

        for section, oracle in (('detector', DetectionOracle), ('identifier', IdentificationOracle)):
            try:
                oracle(**v.get(section, {}), seed=0)._check_params()
            except (ValueError, TypeError) as e:
                report(section, e)

        errors.extend(self._query_errors(object_ids))

        strategies = v.get('strategies', ['argus', 'conv'])
        if not isinstance(strategies, list) or not strategies:
            errors.append('strategies: at least one strategy is required')
        else:
            for s in strategies:
                if s not in STRATEGIES:
                    errors.append(f'strategies: unknown strategy {s!r}, available: {sorted(STRATEGIES)}')

        argus = v.get('argus', {})
        unknown = sorted(set(argus) - (set(ArgusTracker().get_params()) - set(_INJECTED)))
        if unknown:
            errors.append(f'argus: unknown parameters {unknown}')
        else:
            try:
                ArgusTracker(**argus)._check_params()
                check_probability(argus.get('alpha', 0.5), 'alpha')
                for name in ('cache_threshold', 'entry_threshold', 'prune_threshold'):
                    check_open_interval(argus.get(name, 0.5), 0., 1., name)
            except (ValueError, TypeError) as e:
                report('argus', e)

        seeds = v.get('seeds', [0])
        if not isinstance(seeds, list) or not seeds or not all(isinstance(s, int) for s in seeds):
            errors.append('seeds: a non-empty list of integers is required')
        try:
            if self.alignment_ms < 0:
                raise ValueError(f'must be non-negative, got {self.alignment_ms}')
        except (ValueError, TypeError) as e:
            report('alignment_ms', e)
        try:
            if not 0. <= self.training_fraction < 1.:
                raise ValueError(f'must be in [0, 1), got {self.training_fraction}')
        except (ValueError, TypeError) as e:
            report('training_fraction', e)
        return errors

    def _query_errors(self, object_ids) -> List[str]:
        errors = []
        queries = self.values.get('queries', {})
        pool = queries.get('objects', object_ids)
        count = queries.get('count', None if pool is None else len(pool))
        if pool is not None and object_ids is not None:
            for object_id in pool:
                if object_id not in object_ids:
                    errors.append(f'queries.objects: unknown object {object_id!r}')
        if count is not None:
            if not isinstance(count, int) or count < 0:
                errors.append(f'queries.count: must be a non-negative integer, got {count!r}')
            elif pool is not None and count > len(pool):
                errors.append(f'queries.count: {count} queries requested, but the pool has {len(pool)} objects')
        try:
            check_open_interval(queries.get('tau', 0.8), -1., 1., 'tau')
        except (ValueError, TypeError) as e:
            errors.append(f'queries.tau: {e}')
        return errors

    # Builders

    @staticmethod
    def _geometry(camera: Mapping) -> FrameGeometry:
        resolution = camera.get('resolution', [1920, 1080])
        if isinstance(resolution, str):
            resolution = resolution.lower().split('x')
        try:
            width, height = (int(r) for r in resolution)
        except (TypeError, ValueError):
            raise ConfigurationError(f'resolution must be [width, height], got {resolution!r}',
                                     field=f'cameras.{camera.get("id")}.resolution') from None
        return FrameGeometry(width, height)

    @staticmethod
    def _camera_model(camera: Mapping, geometry: FrameGeometry) -> CameraModel:
        where = f'cameras.{camera["id"]}'
        common = dict(geometry=geometry,
                      frame_rate=float(camera.get('fps', 10.)),
                      clock_offset_ms=float(camera.get('clock_offset_ms', 0.)),
                      height_scale=float(camera.get('height_scale', 1.)))
        if 'homography' in camera:
            return CameraModel(camera_id=str(camera['id']), homography=camera['homography'], **common)
        missing = [k for k in ('look_at', 'yaw', 'pixels_per_meter') if k not in camera]
        if missing:
            raise ConfigurationError(f'either a homography or {missing} are required', field=where)
        check_positive(camera['pixels_per_meter'], f'{where}.pixels_per_meter')
        return CameraModel.look_at(str(camera['id']), tuple(camera['look_at']), float(camera['yaw']),
                                   float(camera['pixels_per_meter']), tilt=float(camera.get('tilt', 0.)),
                                   **common)

    def geometries(self) -> Dict[str, FrameGeometry]:
        return {str(c['id']): self._geometry(c) for c in self.values.get('cameras', [])}

    def build_cameras(self) -> List[CameraModel]:
        geometries = self.geometries()
        return [self._camera_model(c, geometries[str(c['id'])]) for c in self.values.get('cameras', [])]

    def world_config(self, seed: int) -> WorldConfig:
        world = dict(self.values['world'])
        objects = []
        for i, obj in enumerate(world.pop('objects', [])):
            unknown = sorted(set(obj) - set(_OBJECT_KEYS))
            if unknown:
                raise ConfigurationError(f'unknown object keys {unknown}', field=f'world.objects.{i}')
            objects.append(ObjectSpec(**{_OBJECT_KEYS[k]: value for k, value in obj.items()}))
        world.pop('seed', None)
        return WorldConfig(objects=tuple(objects), seed=seed, **world)

    def _trace_path(self):
        trace = self.values['trace']
        return trace['path'] if isinstance(trace, Mapping) else trace

    def build_bundles(self, seed: int) -> List[FrameBundle]:
        """ Time-aligned bundles of the whole timeline for one seed. """
        if 'world' in self.values:
            world = SyntheticWorld(self.world_config(seed), self.build_cameras())
            return list(align_frames(world.camera_streams(), self.alignment_ms))
        wanted = set(self.camera_ids)
        bundles = []
        for bundle in ingest_trace(self._trace_path(), self.alignment_ms, geometry=self.geometries()):
            frames = {c: f for c, f in bundle.frames.items() if c in wanted}
            if frames:
                bundles.append(FrameBundle(bundle.timestamp_ms, frames))
        return bundles

    def labels(self, bundles: Sequence[FrameBundle] = ()) -> Dict[str, str]:
        """ Class label per object id, from the world or from the annotations of `bundles`. """
        if 'world' in self.values:
            return {str(o['id']): o.get('label', 'person') for o in self.values['world'].get('objects', [])}
        return {a.object_id: a.label for bundle in bundles for a in bundle.annotations()}

    def build_profiles(self) -> Dict[str, CameraProfile]:
        """ Profiles of the configured cameras, from a profile file or from per-camera presets. """
        settings = self.values.get('profiles', {})
        ids = self.camera_ids
        if 'file' in settings:
            profiles = load_profiles(settings['file'])
            missing = sorted(set(ids) - set(profiles))
            if missing:
                raise ConfigurationError(f'no profile for cameras {missing} in {settings["file"]}',
                                         field='profiles.file')
            return {c: profiles[c] for c in ids}
        profiles = {}
        for camera in self.values.get('cameras', []):
            camera_id = str(camera['id'])
            preset = camera.get('profile', settings.get('preset'))
            if preset is None:
                raise ConfigurationError('no profile preset', field=f'cameras.{camera_id}.profile')
            profiles[camera_id] = load_profile_preset(preset, camera_id, peers=ids,
                                                      bandwidth=float(settings.get('bandwidth', 1e9)),
                                                      resolution=self._geometry(camera).resolution,
                                                      beta=float(settings.get('beta', 0.3)))
        return profiles

    def build_oracles(self, seed: int) -> Tuple[DetectionOracle, IdentificationOracle]:
        return (DetectionOracle(**self.values.get('detector', {}), seed=seed),
                IdentificationOracle(**self.values.get('identifier', {}), seed=seed))

    def query_ids(self, labels: Mapping[str, str]) -> List[str]:
        """ The first ``queries.count`` objects of the query pool. """
        queries = self.values.get('queries', {})
        pool = [str(o) for o in queries.get('objects', sorted(labels))]
        return pool[:queries.get('count', len(pool))]

    def build_queries(self, identifier: IdentificationOracle, labels: Mapping[str, str]):
        try:
            return make_queries(self.query_ids(labels), identifier, labels,
                                tau=float(self.values.get('queries', {}).get('tau', 0.8)))
        except ValueError as e:
            raise ConfigurationError(str(e), field='queries.objects') from e

    def build_tracker(self, strategy: str, queries, profiles: Mapping[str, CameraProfile],
                      detector: DetectionOracle, identifier: IdentificationOracle, seed: int,
                      verbose: int = 0) -> TrackerBase:
        kwargs = dict(queries=queries, profiles=profiles, detector=detector, identifier=identifier,
                      verbose=verbose)
        if strategy == 'argus':
            kwargs.update(self.values.get('argus', {}), seed=seed)
        return make_tracker(strategy, **kwargs)

    def split(self, bundles: Sequence[FrameBundle]) -> Tuple[List[FrameBundle], List[FrameBundle]]:
        """ Training segment (first `training_fraction` of the timeline) and evaluation segment. """
        n_train = int(len(bundles) * self.training_fraction)
        return list(bundles[:n_train]), list(bundles[n_train:])
