# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
import logging
import os
from tempfile import mkdtemp

__all__ = ['OUTPUT_DIR_ENV', 'resolve_output_dir']

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = 'SKMCT_OUTPUT_DIR'


def resolve_output_dir(directory: str = None, default: str = 'results') -> str:
    """ Create an output directory with precedence for `directory` if possible, in TMP otherwise.

    When `directory` is None, the environment variable ``SKMCT_OUTPUT_DIR``
    is consulted before falling back to `default`.
    """
    if directory is None:
        directory = os.environ.get(OUTPUT_DIR_ENV, default)
    try:
        os.makedirs(directory, exist_ok=True)
        path = directory
        warn = False
    except OSError:
        path = mkdtemp(prefix='skmct-')
        warn = True

    if warn:
        logger.warning(f'Could not create output directory {directory}. '
                       f'Instead, the path is {path}.')
    return path
