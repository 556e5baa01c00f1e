# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import json

import pandas as pd
import pytest

from skmct.cli import ScenarioConfig, main, merge_tree, parse_grid, parse_override, set_path, validate
from skmct.cli.main import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK
from skmct.cli.runner import execute, run, sweep
from skmct.exceptions import ConfigurationError
from skmct.metrics import REPORT_COLUMNS
from skmct.pipeline import TrackerBase
from skmct.worldsim import write_trace

SHORT = ['--world.duration=30']


def _garden(**overrides):
    return ScenarioConfig.from_dict({'scenario': 'garden-4cam'}).with_overrides({'world.duration': 30, **overrides})


@pytest.mark.parametrize('text, expected', [('--a.b=3', ('a.b', 3)),
                                            ('--a=0.5', ('a', 0.5)),
                                            ('--a=true', ('a', True)),
                                            ('--a=static', ('a', 'static')),
                                            ('--a=[1, 2]', ('a', [1, 2])),
                                            ('--a=null', ('a', None)),
                                            ])
def test_parse_override(text, expected):
    assert parse_override(text) == expected


@pytest.mark.parametrize('text', ['--a', '--=3'])
def test_parse_override_errors(text):
    with pytest.raises(ConfigurationError):
        parse_override(text)


def test_set_path():
    tree = {'cameras': [{'id': 'cam0'}, {'id': 'cam1'}]}
    set_path(tree, 'cameras.1.profile', 'jetson-agx-person')
    set_path(tree, 'argus.alpha', 0.3)
    assert tree == {'cameras': [{'id': 'cam0'}, {'id': 'cam1', 'profile': 'jetson-agx-person'}],
                    'argus': {'alpha': 0.3}}
    with pytest.raises(ConfigurationError, match='cameras.5'):
        set_path(tree, 'cameras.5.profile', 'x')
    with pytest.raises(ConfigurationError):
        set_path(tree, 'argus.alpha.deeper', 1)


def test_merge_tree_keeps_inputs():
    base = {'a': {'b': 1, 'c': 2}, 'd': [1]}
    override = {'a': {'b': 5}, 'd': [2, 3]}
    assert merge_tree(base, override) == {'a': {'b': 5, 'c': 2}, 'd': [2, 3]}
    assert base == {'a': {'b': 1, 'c': 2}, 'd': [1]}


@pytest.mark.parametrize('name', ['garden-4cam', 'intersection-5cam'])
def test_builtin_scenarios_are_valid(name):
    config = validate(name)
    assert config.name == name
    assert config.errors() == []
    assert set(config.build_profiles()) == set(config.camera_ids)


def test_config_overrides_scenario():
    config = ScenarioConfig.from_dict({'scenario': 'garden-4cam', 'seeds': [1, 2], 'argus': {'alpha': 0.3}})
    assert config.seeds == [1, 2]
    assert config.values['argus']['alpha'] == 0.3
    assert config.values['argus']['refresh_interval'] == 20
    with pytest.raises(ConfigurationError):
        config.with_overrides({'scenario': 'intersection-5cam'})


def test_errors_are_collected():
    config = _garden(**{'argus.alpha': 1.5, 'queries.count': 9, 'strategies': ['argus', 'magic'],
                        'detector.miss_prob': 2., 'colour': 'blue'})
    errors = config.errors()
    for path in ['argus', 'queries.count', 'strategies', 'detector', 'colour']:
        assert any(e.startswith(path) for e in errors), path
    with pytest.raises(ConfigurationError, match='5 invalid'):
        config.validate()


def test_unknown_argus_parameter():
    errors = _garden(**{'argus.speedup': 2}).errors()
    assert errors == ["argus: unknown parameters ['speedup']"]


def test_unknown_preset_is_named():
    errors = _garden(**{'cameras.0.profile': 'nope'}).errors()
    assert len(errors) == 1
    assert 'nope' in errors[0]


def test_world_and_trace_exclusive(tmp_path):
    config = _garden(**{'trace': {'path': str(tmp_path / 'missing.csv')}})
    assert any(e.startswith('world: exactly one') for e in config.errors())


def test_from_file(tmp_path):
    path = tmp_path / 'mini.json'
    path.write_text(json.dumps({'scenario': 'garden-4cam', 'seeds': [7]}))
    config = ScenarioConfig.from_file(str(path))
    assert config.name == 'mini'
    assert config.seeds == [7]

    broken = tmp_path / 'broken.json'
    broken.write_text('{"seeds": [1,')
    with pytest.raises(ConfigurationError, match='config'):
        ScenarioConfig.from_file(str(broken))
    with pytest.raises(ConfigurationError):
        ScenarioConfig.from_file(str(tmp_path / 'absent.json'))


def test_resolution_formats():
    geometries = _garden(**{'cameras.1.resolution': '1920x1080'}).geometries()
    assert geometries['cam0'].resolution == '1280x720'
    assert geometries['cam1'].resolution == '1920x1080'


def test_select_cameras_and_split():
    config = _garden().select_cameras(['cam2', 'cam0'])
    assert config.camera_ids == ['cam0', 'cam2']
    bundles = config.build_bundles(0)
    assert len(bundles) == 30
    assert all(b.camera_ids == ('cam0', 'cam2') for b in bundles)
    training, evaluation = config.split(bundles)
    assert len(training) == 3
    assert len(evaluation) == 27


def test_query_pool():
    config = _garden(**{'queries.count': 2})
    identifier = config.build_oracles(0)[1]
    queries = config.build_queries(identifier, config.labels())
    assert [q.query_id for q in queries] == ['p0', 'p1']
    assert all(q.label == 'person' for q in queries)


def test_trace_scenario(tmp_path):
    world = _garden(**{'world.duration': 10})
    path = tmp_path / 'garden.csv'
    write_trace(world.build_bundles(0), path)
    values = world.to_dict()
    del values['world']
    values['trace'] = {'path': str(path)}
    config = ScenarioConfig.from_dict(values).validate()
    bundles = config.build_bundles(0)
    assert 0 < len(bundles) <= 10
    assert config.labels(bundles)['p0'] == 'person'
    outcome = execute(config, 'conv', 0)
    assert outcome.report.n_steps == len(config.split(bundles)[1])


def test_execute_books_every_step():
    config = _garden().validate()
    outcome = execute(config, 'argus', 0)
    assert outcome.report.strategy == 'argus'
    assert outcome.report.n_steps == 27
    assert len(outcome.run.ledger) == 27
    assert outcome.mapping is not None
    assert execute(config, 'conv', 0).mapping is None


def test_run_writes_results(tmp_path):
    reports = run(_garden(), strategies=['conv', 'argus'], seeds=[0, 1, 2], out=str(tmp_path), snapshot=True)
    assert [(r.seed, r.strategy) for r in reports] == [(s, t) for s in [0, 1, 2] for t in ['conv', 'argus']]
    table = pd.read_csv(tmp_path / 'report.csv')
    assert list(table.columns) == REPORT_COLUMNS
    assert len(table) == 6
    for name in ['ledger_conv_0.csv', 'tracklets_argus_2.csv', 'mapping_1.csv', 'config.json']:
        assert (tmp_path / name).exists(), name
    echoed = ScenarioConfig.from_file(str(tmp_path / 'config.json'))
    assert echoed.errors() == []
    assert echoed.strategies == ['conv', 'argus']

    # report.csv accumulates
    run(_garden(), strategies=['conv'], seeds=[0], out=str(tmp_path))
    assert len(pd.read_csv(tmp_path / 'report.csv')) == 7


def test_run_in_parallel_keeps_order(tmp_path):
    sequential = run(_garden(), strategies=['conv', 'spatula'], seeds=[0, 1], out=str(tmp_path / 'a'))
    parallel = run(_garden(), strategies=['conv', 'spatula'], seeds=[0, 1], out=str(tmp_path / 'b'), n_jobs=2)
    assert [r.to_dict() for r in parallel] == [r.to_dict() for r in sequential]


@pytest.mark.parametrize('text, expected', [('', []),
                                            ('queries.count=1,2', [('queries.count', [1, 2])]),
                                            ('argus.inspection_order=static,reverse; argus.distribute=true',
                                             [('argus.inspection_order', ['static', 'reverse']),
                                              ('argus.distribute', [True])]),
                                            ])
def test_parse_grid(text, expected):
    assert parse_grid(text) == expected


@pytest.mark.parametrize('text', ['queries.count', 'queries.count=', 'a=1;a=2'])
def test_parse_grid_errors(text):
    with pytest.raises(ConfigurationError):
        parse_grid(text)


def test_sweep(tmp_path):
    table = sweep(_garden(), 'queries.count=1,2', strategies=['conv', 'argus'], out=str(tmp_path))
    assert len(table) == 4
    assert table['n_runs'].tolist() == [1, 1, 1, 1]
    assert table['queries.count'].tolist() == [1, 1, 2, 2]
    assert (tmp_path / 'sweep.csv').exists()


def test_sweep_camera_subsets(tmp_path):
    table = sweep(_garden(), 'cameras.count=3', strategies=['conv'], out=str(tmp_path))
    assert len(table) == 1
    assert table['n_runs'].iloc[0] == 4


def test_sweep_rejects_camera_count(tmp_path):
    with pytest.raises(ConfigurationError, match='cameras.count'):
        sweep(_garden(), 'cameras.count=9', strategies=['conv'], out=str(tmp_path))


def test_empty_sweep_writes_nothing(tmp_path):
    assert sweep(_garden(), '', out=str(tmp_path)).empty
    assert list(tmp_path.iterdir()) == []


def test_main_run(tmp_path, capsys):
    args = ['run', 'garden-4cam', '--strategies', 'conv,argus', '--seeds', '1,2', '--out', str(tmp_path)] + SHORT
    assert main(args) == EXIT_OK
    assert len(pd.read_csv(tmp_path / 'report.csv')) == 4
    assert 'argus' in capsys.readouterr().out


def test_main_is_deterministic(tmp_path):
    for out in ['a', 'b']:
        assert main(['run', 'garden-4cam', '--strategies', 'argus', '--out', str(tmp_path / out)] + SHORT) == 0
    assert (tmp_path / 'a' / 'report.csv').read_bytes() == (tmp_path / 'b' / 'report.csv').read_bytes()
    assert (tmp_path / 'a' / 'ledger_argus_0.csv').read_bytes() == (tmp_path / 'b' / 'ledger_argus_0.csv').read_bytes()


def test_main_configuration_error(tmp_path, capsys):
    args = ['run', 'garden-4cam', '--cameras.0.profile=nope', '--out', str(tmp_path)] + SHORT
    assert main(args) == EXIT_CONFIG
    assert 'nope' in capsys.readouterr().err
    assert not (tmp_path / 'report.csv').exists()


def test_main_invariant_violation(tmp_path, monkeypatch, capsys):
    def identify_twice(self, detection):
        self.identifier_.extract(detection.crop_id, detection.box)
        return self.identifier_.extract(detection.crop_id, detection.box)

    monkeypatch.setattr(TrackerBase, '_identify', identify_twice)
    args = ['run', 'garden-4cam', '--strategies', 'conv', '--out', str(tmp_path), '--world.duration=5']
    assert main(args) == EXIT_INVARIANT
    assert 'invariant' in capsys.readouterr().err


def test_main_sweep(tmp_path, capsys):
    args = ['sweep', 'garden-4cam', '--grid', 'queries.count=1,2', '--strategies', 'conv',
            '--out', str(tmp_path)] + SHORT
    assert main(args) == EXIT_OK
    assert len(pd.read_csv(tmp_path / 'sweep.csv')) == 2
    assert main(['sweep', 'garden-4cam', '--out', str(tmp_path / 'empty')]) == EXIT_OK


def test_main_validate_and_scenarios(capsys):
    assert main(['validate', 'intersection-5cam']) == EXIT_OK
    assert 'intersection-5cam: OK' in capsys.readouterr().out
    assert main(['validate', 'garden-4cam', '--argus.alpha=2']) == EXIT_CONFIG
    assert main(['scenarios']) == EXIT_OK
    out = capsys.readouterr().out
    assert 'garden-4cam' in out and 'intersection-5cam' in out


def test_main_rejects_stray_arguments():
    with pytest.raises(SystemExit):
        main(['run', 'garden-4cam', 'extra'])
