# -*- coding: utf-8 -*-
# SPDX-License-Identifier: BSD-3-Clause
from __future__ import annotations
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, Optional

import numpy as np

from .clear_mot import FrameScore, mota, motp

__all__ = ['Report',
           'REPORT_COLUMNS',
           'summarize',
           ]

REPORT_COLUMNS = ['strategy', 'scenario', 'seed', 'mean_ids', 'mean_latency_s', 'detect_latency_s',
                  'id_latency_s', 'motp', 'mota', 'crops_tx']
"""Columns of the report CSV, one row per (strategy, scenario, seed)."""


@dataclass(frozen=True)
class Report:
    """ Cost and quality summary of one tracking run.

    Latencies are per-step means. `motp` and `mota` are None when undefined.
    """
    strategy: Optional[str] = None
    scenario: Optional[str] = None
    seed: Optional[int] = None
    n_steps: int = 0
    mean_ids: float = 0.
    max_ids: int = 0
    total_ids: int = 0
    mean_latency_s: float = 0.
    detect_latency_s: float = 0.
    id_latency_s: float = 0.
    motp: Optional[float] = None
    mota: Optional[float] = None
    crops_tx: int = 0
    bytes_tx: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def row(self) -> Dict[str, Any]:
        """ Values of the report CSV columns. """
        record = self.to_dict()
        return {k: record[k] for k in REPORT_COLUMNS}


def summarize(ledger, scores: Iterable[FrameScore] = (), strategy: str = None, scenario: str = None,
              seed: int = None) -> Report:
    """ Summarize a cost ledger and its frame scores.

    Parameters
    ----------
    ledger: CostLedger

    scores: iterable of FrameScore
        Output of :func:`score_run`. Without scores, quality values are None.

    strategy, scenario, seed: optional
        Labels copied into the report.

    Returns
    -------
    Report
    """
    scores = list(scores)
    rows = list(ledger)
    ids = np.array([r.n_ids for r in rows], dtype=int)
    if not rows:
        return Report(strategy=strategy, scenario=scenario, seed=seed,
                      motp=motp(scores), mota=mota(scores))
    return Report(strategy=strategy,
                  scenario=scenario,
                  seed=seed,
                  n_steps=len(rows),
                  mean_ids=float(ids.mean()),
                  max_ids=int(ids.max()),
                  total_ids=int(ids.sum()),
                  mean_latency_s=float(np.mean([r.latency_s for r in rows])),
                  detect_latency_s=float(np.mean([r.detect_latency_s for r in rows])),
                  id_latency_s=float(np.mean([r.id_latency_s for r in rows])),
                  motp=motp(scores),
                  mota=mota(scores),
                  crops_tx=int(sum(r.crops_tx for r in rows)),
                  bytes_tx=int(sum(r.bytes_tx for r in rows)),
                  )
