"""Pure-Python merge cascade.

This is the reference implementation of the hot kernel and the fallback
used when the compiled extension is unavailable.  It drives any
evaluation object (built-in or user-registered); the compiled kernel
only accelerates the built-ins and must produce identical results, which
the parity tests enforce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .apta import BLUE, NO_NODE, RED, WHITE  # noqa: F401  (color codes shared with engine)
from .evals import ll_delta
from .mergelog import LOG_ATTACH, LOG_COUNTS, LOG_REP, MergeLog


@dataclass
class CascadeOutcome:
    """Result of one attempted merge (root pair plus determinization)."""

    consistent: bool
    score: float
    dll: float
    dparams: int
    log: MergeLog | None


def _markov_ok(apta, x: int, y: int, order: int) -> bool:
    """Both states must share their trailing incoming-symbol path."""
    k = min(order, int(apta.depth[x]), int(apta.depth[y]))
    for _ in range(k):
        if apta.incoming[x] != apta.incoming[y]:
            return False
        x = apta.parent[x]
        y = apta.parent[y]
    return True


def cascade(apta, q: int, qp: int, params, ev, collect_log: bool = False,
            track_aic: bool = False) -> CascadeOutcome:
    """Merge qp into q with determinization (both must be chain ends).

    Consistency is decided by the structural constraints (markovian,
    redfixed) plus the evaluation object; the per-pair check is skipped
    beyond the ktail depth limit.  On an inconsistent outcome, or when
    ``collect_log`` is false, every write is rolled back before
    returning; otherwise the merge stays applied and the log is returned.

    ``track_aic`` additionally accumulates the exact likelihood decrease
    and parameter reduction of the cascade, independent of the
    evaluation in use (used by the search strategy for its objective).
    """
    rep = apta.rep
    color = apta.color
    children = apta.children
    scounts = apta.symbol_counts
    finals = apta.final_count
    paths = apta.path_count
    weights = apta.aux_weight
    alphabet = apta.alphabet_size
    ktail = params.ktail
    markovian = params.markovian
    redfixed = params.redfixed

    kind: list[int] = []
    e0: list[int] = []
    e1: list[int] = []
    e2: list[int] = []
    wrows: list[np.ndarray] = []

    st = ev.begin(apta, params)
    dll_total = 0.0
    dpar_total = 0

    def admit(x: int, y: int, depth: int) -> bool:
        nonlocal dll_total, dpar_total
        if markovian > 0 and not _markov_ok(apta, x, y, markovian):
            return False
        if (ktail == 0 or depth < ktail) and not ev.pair(apta, params, st, x, y, depth):
            return False
        if track_aic:
            dll, dpar = ll_delta(
                scounts[x], scounts[y], int(finals[x]), int(finals[y]),
                finalprob=params.finalprob, state_count=params.state_count,
            )
            dll_total += dll
            dpar_total += dpar
        kind.append(LOG_REP)
        e0.append(y)
        e1.append(x)
        e2.append(int(color[y]))
        rep[y] = x
        color[y] = WHITE
        wslot = -1
        if weights is not None:
            wslot = len(wrows)
            wrows.append(weights[x].copy())
            weights[x] += weights[y]
        kind.append(LOG_COUNTS)
        e0.append(x)
        e1.append(y)
        e2.append(wslot)
        scounts[x] += scounts[y]
        finals[x] += finals[y]
        paths[x] += paths[y]
        return True

    def find(n: int) -> int:
        while rep[n] != NO_NODE:
            n = rep[n]
        return int(n)

    ok = admit(q, qp, 0)
    if ok:
        stack = [(q, qp, 0, 0)]
        while stack and ok:
            x, y, a, depth = stack.pop()
            while a < alphabet:
                cy = children[y, a]
                if cy == NO_NODE:
                    a += 1
                    continue
                ty = find(cy)
                cx = children[x, a]
                if cx == NO_NODE:
                    if redfixed and color[x] == RED:
                        ok = False
                        break
                    kind.append(LOG_ATTACH)
                    e0.append(x)
                    e1.append(a)
                    e2.append(ty)
                    children[x, a] = ty
                    a += 1
                    continue
                tx = find(cx)
                if tx == ty:
                    a += 1
                    continue
                stack.append((x, y, a + 1, depth))
                if not admit(tx, ty, depth + 1):
                    ok = False
                else:
                    stack.append((tx, ty, 0, depth + 1))
                break

    score = 0.0
    if ok:
        ok, score = ev.finish(apta, params, st)

    if ok and collect_log:
        wmat = np.array(wrows) if wrows else None
        return CascadeOutcome(True, score, dll_total, dpar_total,
                              MergeLog(kind, e0, e1, e2, wmat))

    # Roll back every recorded write, newest first.
    for i in range(len(kind) - 1, -1, -1):
        k = kind[i]
        if k == LOG_ATTACH:
            children[e0[i], e1[i]] = NO_NODE
        elif k == LOG_COUNTS:
            xq, yq = e0[i], e1[i]
            scounts[xq] -= scounts[yq]
            finals[xq] -= finals[yq]
            paths[xq] -= paths[yq]
            if e2[i] >= 0:
                weights[xq] = wrows[e2[i]]
        else:
            rep[e0[i]] = NO_NODE
            color[e0[i]] = e2[i]

    return CascadeOutcome(ok, score, dll_total, dpar_total, None)
