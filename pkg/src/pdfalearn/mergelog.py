"""Reversible record of one merge, including its determinization cascade.

A merge mutates the APTA through exactly three kinds of elementary
writes, recorded in application order:

- REP     (node, absorber, old_color): representative pointer set, the
          absorbed node's color cleared to white;
- COUNTS  (absorber, absorbed, weight_slot): the absorbed node's count
          rows added into the absorber (plus its auxiliary weight row
          when allocated; weight_slot indexes the saved pre-merge row,
          restored verbatim on undo so floating point stays exact);
- ATTACH  (node, symbol, child): an empty child slot filled.

Replaying the log backwards restores the APTA bit for bit; replaying it
forwards re-performs the merge without re-running any consistency check,
which is what makes switching between search paths cheap.
"""

from __future__ import annotations

import numpy as np

from .apta import NO_NODE, WHITE

LOG_REP = 0
LOG_COUNTS = 1
LOG_ATTACH = 2


class MergeLog:
    """Ordered elementary actions of one applied merge."""

    __slots__ = ("kind", "e0", "e1", "e2", "weight_rows")

    def __init__(self, kind, e0, e1, e2, weight_rows=None):
        self.kind = np.asarray(kind, dtype=np.int8)
        self.e0 = np.asarray(e0, dtype=np.int64)
        self.e1 = np.asarray(e1, dtype=np.int64)
        self.e2 = np.asarray(e2, dtype=np.int64)
        self.weight_rows = weight_rows  # float64[k, alphabet+1] or None

    def __len__(self) -> int:
        return len(self.kind)


def undo_log(apta, log: MergeLog) -> None:
    """Restore the APTA to its exact state before the logged merge."""
    kind, e0, e1, e2 = log.kind, log.e0, log.e1, log.e2
    w = apta.aux_weight
    for i in range(len(kind) - 1, -1, -1):
        k = kind[i]
        if k == LOG_ATTACH:
            apta.children[e0[i], e1[i]] = NO_NODE
        elif k == LOG_COUNTS:
            q, qp = e0[i], e1[i]
            apta.symbol_counts[q] -= apta.symbol_counts[qp]
            apta.final_count[q] -= apta.final_count[qp]
            apta.path_count[q] -= apta.path_count[qp]
            if e2[i] >= 0:
                w[q] = log.weight_rows[e2[i]]
        else:  # LOG_REP
            apta.rep[e0[i]] = NO_NODE
            apta.color[e0[i]] = e2[i]


def redo_log(apta, log: MergeLog) -> None:
    """Re-apply a logged merge on the same pre-state it was recorded from."""
    kind, e0, e1, e2 = log.kind, log.e0, log.e1, log.e2
    w = apta.aux_weight
    for i in range(len(kind)):
        k = kind[i]
        if k == LOG_ATTACH:
            apta.children[e0[i], e1[i]] = e2[i]
        elif k == LOG_COUNTS:
            q, qp = e0[i], e1[i]
            apta.symbol_counts[q] += apta.symbol_counts[qp]
            apta.final_count[q] += apta.final_count[qp]
            apta.path_count[q] += apta.path_count[qp]
            if e2[i] >= 0:
                w[q] += w[qp]
        else:  # LOG_REP
            apta.rep[e0[i]] = e1[i]
            apta.color[e0[i]] = WHITE
