"""Finalized probabilistic automata and inference over them.

A Pdfa is immutable after learning: states with occurrence counts, a
deterministic transition map, and a flag saying whether final
probabilities are modeled.  Probabilities are always derived from the
counts, optionally Laplace-smoothed by a per-state correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

NEG_INF = float("-inf")


@dataclass(frozen=True)
class PdfaState:
    id: int
    final_count: int
    path_count: int
    sink: bool = False


@dataclass
class Pdfa:
    """Deterministic probabilistic automaton over an integer alphabet.

    ``transitions`` maps (state id, symbol) to (target id, count); per
    state, final_count plus the outgoing counts equals path_count.
    State 0 is the start state.
    """

    alphabet_size: int
    finalprob: bool
    states: list[PdfaState]
    transitions: dict[tuple[int, int], tuple[int, int]]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [s.id for s in self.states]
        if ids != list(range(len(ids))):
            raise ValueError("state ids must be 0..n-1 in order")
        known = set(ids)
        outgoing = {i: 0 for i in ids}
        for (src, a), (tgt, count) in self.transitions.items():
            if src not in known or tgt not in known:
                raise ValueError(f"transition ({src},{a})->{tgt} references unknown state")
            if not 0 <= a < self.alphabet_size:
                raise ValueError(f"transition symbol {a} outside alphabet")
            if count < 0:
                raise ValueError("negative transition count")
            outgoing[src] += count
        for s in self.states:
            if s.final_count < 0 or s.path_count < 0:
                raise ValueError("negative state count")
            if s.final_count + outgoing[s.id] != s.path_count:
                raise ValueError(
                    f"state {s.id}: final {s.final_count} + outgoing {outgoing[s.id]} "
                    f"!= path {s.path_count}"
                )

    @property
    def n_states(self) -> int:
        return len(self.states)

    def target(self, q: int, a: int) -> int | None:
        t = self.transitions.get((q, a))
        return t[0] if t is not None else None

    def count(self, q: int, a: int) -> int:
        t = self.transitions.get((q, a))
        return t[1] if t is not None else 0

    def support(self, q: int) -> list[int]:
        return sorted(a for (s, a) in self.transitions if s == q)

    def structurally_equal(self, other: "Pdfa") -> bool:
        """Equality of everything that defines behavior (metadata ignored)."""
        return (
            self.alphabet_size == other.alphabet_size
            and self.finalprob == other.finalprob
            and self.states == other.states
            and self.transitions == other.transitions
        )


@dataclass
class PredictionRecord:
    """Per-trace state walk and log-probability scores.

    The state sequence lists the state after each symbol, with the end
    state repeated; the score sequence has one entry per symbol plus a
    final-probability slot when final probabilities are modeled.
    Scores are natural logarithms; -inf marks impossible steps.
    ``reason`` names the first failure (missing_transition or
    unseen_symbol) if any.
    """

    state_sequence: list[int]
    score_sequence: list[float]
    reason: str | None = None


def _smoothed_log(count: int, total: int, slots: int, correction: float) -> float:
    num = count + correction
    den = total + correction * slots
    if num <= 0 or den <= 0:
        return NEG_INF
    return math.log(num / den)


def trace_scores(pdfa: Pdfa, symbols, correction: float = 0.0) -> PredictionRecord:
    """Walk a trace through the automaton, scoring every step.

    Each step scores ln((C(q,a)+correction) / (C(q)+correction*slots))
    where slots counts the state's supported symbols plus the final slot
    when final probabilities are modeled.  A missing transition (or a
    symbol outside the alphabet) scores -inf and stops the walk; the
    remaining scores are -inf and the state no longer advances.
    """
    states: list[int] = []
    scores: list[float] = []
    q = 0
    reason = None
    stuck = False
    for a in symbols:
        if stuck:
            scores.append(NEG_INF)
            states.append(q)
            continue
        if not 0 <= a < pdfa.alphabet_size:
            reason = "unseen_symbol"
            stuck = True
            scores.append(NEG_INF)
            states.append(q)
            continue
        t = pdfa.transitions.get((q, a))
        if t is None:
            reason = "missing_transition"
            stuck = True
            scores.append(NEG_INF)
            states.append(q)
            continue
        target, count = t
        slots = len(pdfa.support(q)) + (1 if pdfa.finalprob else 0)
        scores.append(_smoothed_log(count, pdfa.states[q].path_count, slots, correction))
        q = target
        states.append(q)
    states.append(q)
    if pdfa.finalprob:
        if stuck:
            scores.append(NEG_INF)
        else:
            slots = len(pdfa.support(q)) + 1
            scores.append(
                _smoothed_log(pdfa.states[q].final_count, pdfa.states[q].path_count,
                              slots, correction)
            )
    return PredictionRecord(states, scores, reason)


def trace_log_probability(pdfa: Pdfa, symbols, correction: float = 0.0) -> float:
    """Natural-log probability the automaton assigns to a whole trace."""
    return sum(trace_scores(pdfa, symbols, correction).score_sequence)


def is_anomaly(pdfa: Pdfa, symbols) -> tuple[bool, str | None]:
    """Alarm when a trace cannot be replayed or ends where no trace ended.

    Reasons: unseen_symbol (outside the alphabet), missing_transition
    (no such edge), zero_final (end state has no ending occurrences).
    """
    q = 0
    for a in symbols:
        if not 0 <= a < pdfa.alphabet_size:
            return True, "unseen_symbol"
        t = pdfa.transitions.get((q, a))
        if t is None:
            return True, "missing_transition"
        q = t[0]
    if pdfa.states[q].final_count == 0:
        return True, "zero_final"
    return False, None


def perplexity(candidate_probs, target_probs) -> float:
    """Exponentiated cross-entropy between target and candidate probabilities.

    Both vectors must cover the same traces; the target side is expected
    to be normalized over the evaluation set and the candidate side to be
    smoothed so no probability is zero.  Returns
    2 ** (-sum target * log2(candidate)).
    """
    if len(candidate_probs) != len(target_probs):
        raise ValueError("probability lists must have the same length")
    total = 0.0
    for pc, pt in zip(candidate_probs, target_probs):
        if pt == 0.0:
            continue
        if pc <= 0.0:
            raise ValueError("candidate probability must be positive after smoothing")
        total += pt * math.log2(pc)
    return 2.0 ** (-total)


def finalize_pdfa(apta, params, evaluation: str = "") -> Pdfa:
    """Extract the merged automaton from an APTA.

    States are the representative nodes reachable from the root's class,
    renumbered breadth-first (ascending symbols) so identical structures
    export identically.  Sink states are kept (counts stay conserved) and
    marked, letting exporters drop them.
    """
    from .engine import is_sink  # deferred: engine imports this module too

    order = apta.reachable_representatives()
    index = {old: i for i, old in enumerate(order)}
    states = [
        PdfaState(
            id=i,
            final_count=int(apta.final_count[old]),
            path_count=int(apta.path_count[old]),
            sink=is_sink(apta, old, params),
        )
        for i, old in enumerate(order)
    ]
    transitions = {}
    for i, old in enumerate(order):
        for a in range(apta.alphabet_size):
            if apta.children[old, a] == -1:
                continue
            tgt = apta.find_representative(int(apta.children[old, a]))
            transitions[(i, a)] = (index[tgt], int(apta.symbol_counts[old, a]))
    from dataclasses import asdict

    meta = {"parameters": asdict(params)}
    if evaluation:
        meta["evaluation"] = evaluation
    return Pdfa(apta.alphabet_size, params.finalprob, states, transitions, meta)
