# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import os
import pytest
from skmct.utils.io import resolve_output_dir, OUTPUT_DIR_ENV


def test_output_dir_is_created(tmp_path):
    target = tmp_path / 'a' / 'b'
    path = resolve_output_dir(str(target))
    assert path == str(target)
    assert os.path.isdir(path)


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / 'from-env'))
    path = resolve_output_dir()
    assert path == str(tmp_path / 'from-env')
    assert os.path.isdir(path)


def test_output_dir_falls_back_to_temp(tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('not a directory')
    path = resolve_output_dir(str(blocker / 'sub'))
    assert path != str(blocker / 'sub')
    assert os.path.isdir(path)
