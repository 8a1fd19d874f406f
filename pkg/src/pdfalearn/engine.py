"""Red-blue state merging: perform/undo merges and run the greedy loop.

The loop follows the classic scheme: keep a red core with a blue fringe,
evaluate candidate merges between fringe and core, perform the highest
scoring consistent one, and promote (extend) a blue state to red when
nothing consistent is left for it.  Low-frequency "sink" states are
never candidates; the run ends when only sinks remain on the fringe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .apta import BLUE, NO_NODE, RED, WHITE, Apta, build_prefix_tree
from .evals import EvalFunction, init_prefix_weights
from .kernels import cascade
from .mergelog import MergeLog, undo_log
from .traces import TraceSet

MODES = ("batch", "search", "predict")


@dataclass(frozen=True)
class EvalParams:
    """All learning parameters: thresholds, ordering flags, constraints.

    ``confidence_bound`` is the statistical test parameter; the counting
    thresholds (``sink_count``, ``state_count``, ``symbol_count``) all
    compare with strict less-than ("fewer than N occurrences is
    infrequent").  ``ktail`` = 0 means unlimited check depth.  Instances
    are immutable; derive variants with ``dataclasses.replace``.
    """

    confidence_bound: float = 0.01
    largestblue: bool = True
    shallowfirst: bool = False
    extend: bool = True
    blueblue: bool = False
    redfixed: bool = False
    markovian: int = 0
    ktail: int = 0
    sinkson: bool = False
    sink_count: int = 0
    state_count: int = 0
    symbol_count: int = 0
    correction: float = 1.0
    finalprob: bool = True
    mode: str = "batch"

    def __post_init__(self):
        if not 0.0 < self.confidence_bound <= 1.0:
            raise ValueError(f"confidence_bound must be in (0, 1], got {self.confidence_bound}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.correction < 0:
            raise ValueError("correction must be non-negative")
        for name in ("markovian", "ktail", "sink_count", "state_count", "symbol_count"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.sinkson and self.state_count and self.state_count >= self.sink_count:
            raise ValueError(
                "state_count must be lower than sink_count when sinks and "
                "statistical thresholds are both active"
            )


@dataclass
class Action:
    """One step of a merging run: an extend or a performed merge."""

    kind: str  # "extend" | "merge"
    blue: int
    partner: int | None = None  # absorbing red (or blue) state for merges
    score: float = 0.0
    freq: int = 0


def merge(apta: Apta, q: int, qp: int, ev: EvalFunction, params: EvalParams,
          ) -> tuple[bool, float, MergeLog | None]:
    """Merge qp into q (both chain ends) if consistent.

    On success all representative/count/transition updates stay applied
    and the log needed to undo them is returned; on an inconsistent
    outcome the structure has already been rolled back and the log is
    None.
    """
    if apta.rep[q] != NO_NODE or apta.rep[qp] != NO_NODE:
        raise ValueError("merge endpoints must be representatives (chain ends)")
    if q == qp:
        raise ValueError("cannot merge a state with itself")
    out = cascade(apta, q, qp, params, ev, collect_log=True)
    return out.consistent, out.score, out.log


def undo_merge(apta: Apta, log: MergeLog) -> None:
    """Reverse the most recently applied merge (stack discipline)."""
    undo_log(apta, log)


def is_sink(apta: Apta, q: int, params: EvalParams) -> bool:
    """Low-frequency states are sinks: never merge candidates."""
    return bool(params.sinkson and apta.path_count[q] < params.sink_count)


def _fringe(apta: Apta, params: EvalParams) -> tuple[list[int], list[int]]:
    """(non-sink blue representatives, red representatives), ids ascending."""
    reps = apta.representatives()
    colors = apta.color[reps]
    blues = [int(b) for b in reps[colors == BLUE] if not is_sink(apta, int(b), params)]
    reds = [int(r) for r in reps[colors == RED]]
    return blues, reds


def _select_blues(apta: Apta, blues: list[int], params: EvalParams) -> list[int]:
    """Apply the ordering flags; returns candidate blues, ids ascending.

    shallowfirst and largestblue each narrow the fringe to a single blue
    state (minimal depth / maximal frequency, ties to the smallest id):
    that is what makes one round of candidate evaluation linear in the
    red core rather than quadratic.
    """
    if not blues:
        return []
    selected = blues
    if params.shallowfirst:
        dmin = min(int(apta.depth[b]) for b in selected)
        selected = [b for b in selected if apta.depth[b] == dmin]
    if params.largestblue:
        cmax = max(int(apta.path_count[b]) for b in selected)
        selected = [b for b in selected if apta.path_count[b] == cmax]
    if params.shallowfirst or params.largestblue:
        selected = selected[:1]
    return selected


def candidate_order(apta: Apta, params: EvalParams) -> list[tuple[int, int]]:
    """Ordered candidate pairs (blue, partner); partner absorbs.

    Red partners come first (all pairs for the selected blues, ids
    ascending); blue-blue pairs follow when enabled.  Sink blues are
    excluded entirely.
    """
    blues, reds = _fringe(apta, params)
    selected = _select_blues(apta, blues, params)
    pairs = [(b, r) for b in selected for r in reds]
    if params.blueblue:
        pairs.extend((b, b2) for b in selected for b2 in blues if b2 != b)
    return pairs


@dataclass
class RunResult:
    """Final structure of a merging run plus the action trace."""

    apta: Apta
    actions: list[Action] = field(default_factory=list)


def refresh_blue(apta: Apta) -> list[tuple[int, int, int]]:
    """Color all white targets of red states blue; returns (node, old, new)."""
    changes = []
    reps = apta.representatives()
    for r in reps[apta.color[reps] == RED]:
        for a in range(apta.alphabet_size):
            c = apta.children[r, a]
            if c == NO_NODE:
                continue
            t = apta.find_representative(int(c))
            if apta.color[t] == WHITE:
                changes.append((t, WHITE, BLUE))
                apta.color[t] = BLUE
    return changes


def blue_row_targets(apta: Apta, node: int) -> list[tuple[int, int, int]]:
    """Blue the white targets of one (newly red) state's row."""
    changes = []
    for a in range(apta.alphabet_size):
        c = apta.children[node, a]
        if c == NO_NODE:
            continue
        t = apta.find_representative(int(c))
        if apta.color[t] == WHITE:
            changes.append((t, WHITE, BLUE))
            apta.color[t] = BLUE
    return changes


def blue_merge_targets(apta: Apta, log: MergeLog) -> list[tuple[int, int, int]]:
    """Blue the white targets a performed merge attached to red rows.

    A merge can only create new red-fringe states through its ATTACH
    entries (existing red transitions keep resolving to colored states,
    and the absorbed blue's class is represented by the colored partner),
    so scanning the log replaces a full red-core sweep.
    """
    from .mergelog import LOG_ATTACH

    changes = []
    for i in range(len(log.kind)):
        if log.kind[i] != LOG_ATTACH:
            continue
        x = int(log.e0[i])
        if apta.color[x] != RED:
            continue
        t = apta.find_representative(int(log.e2[i]))
        if apta.color[t] == WHITE:
            changes.append((t, WHITE, BLUE))
            apta.color[t] = BLUE
    return changes


def evaluate_candidates(apta: Apta, pairs: list[tuple[int, int]], ev: EvalFunction,
                        params: EvalParams) -> tuple[tuple[int, int], float] | None:
    """Try every candidate; return (pair, score) of the best consistent one.

    Ranking: higher score first, then red-blue before blue-blue, then the
    smallest (blue, partner) ids.  Every evaluation is a merge that is
    rolled back before the next candidate is tried.
    """
    best = None
    best_key = None
    for blue, partner in pairs:
        out = cascade(apta, partner, blue, params, ev, collect_log=False)
        if not out.consistent:
            continue
        is_bb = apta.color[partner] == BLUE
        key = (-out.score, int(is_bb), blue, partner)
        if best_key is None or key < best_key:
            best_key = key
            best = ((blue, partner), out.score)
    return best


def run_merging(ts: TraceSet, ev: EvalFunction, params: EvalParams,
                reporter=None) -> RunResult:
    """Build the prefix tree and merge until nothing merges anymore.

    ``reporter`` receives each Action as it happens (the CLI renders
    them as the x/m progress tokens).
    """
    apta = build_prefix_tree(ts)
    if ev.needs_prefix_weights:
        init_prefix_weights(apta, params.finalprob)
    actions: list[Action] = []

    while True:
        blues, _reds = _fringe(apta, params)
        if not blues:
            break
        pairs = candidate_order(apta, params)
        best = evaluate_candidates(apta, pairs, ev, params) if pairs else None
        if best is not None:
            (blue, partner), score = best
            consistent, perf_score, log = merge(apta, partner, blue, ev, params)
            assert consistent, "winning candidate must re-merge consistently"
            blue_merge_targets(apta, log)
            act = Action("merge", blue, partner, perf_score)
        elif params.extend:
            selected = _select_blues(apta, blues, params)
            node = selected[0]
            apta.color[node] = RED
            blue_row_targets(apta, node)
            act = Action("extend", node, freq=int(apta.path_count[node]))
        else:
            break
        actions.append(act)
        if reporter is not None:
            reporter(act)

    return RunResult(apta, actions)


def greedy_run(ts: TraceSet, ev: EvalFunction, params: EvalParams, reporter=None):
    """Learn a model greedily; returns the finalized automaton."""
    from .model import finalize_pdfa

    result = run_merging(ts, ev, params, reporter)
    return finalize_pdfa(result.apta, params, evaluation=ev.name)
