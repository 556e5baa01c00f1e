# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
"""
The :mod:`skmct.exceptions` module collects the error types raised by scikit-mct.
"""
from __future__ import annotations

__all__ = ['ConfigurationError',
           'InvariantViolation',
           'TraceFormatError',
           ]


class ConfigurationError(ValueError):
    """ Invalid scenario, world or camera configuration.

    Parameters
    ----------
    message: str
        Human readable diagnostic.

    field: str, optional
        Dotted path of the offending configuration key, e.g. ``world.extent``.
    """

    def __init__(self, message: str, field: str = None):
        self.field = field
        if field:
            message = f'{field}: {message}'
        super().__init__(message)


class TraceFormatError(ValueError):
    """ Malformed or inconsistent trace file.

    Attributes
    ----------
    line: int or None
        1-based line number of the offending row (the header is line 1).
    """

    def __init__(self, message: str, line: int = None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class InvariantViolation(RuntimeError):
    """ A runtime invariant of the tracking pipeline was broken.

    Raised, for example, when the number of identifications booked in a
    cost ledger differs from the number of identification oracle calls.
    """
