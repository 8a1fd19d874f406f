"""Shared fixtures: random samples, hand-built models, checking helpers."""

from __future__ import annotations

import random

import pytest

from pdfalearn.apta import NO_NODE
from pdfalearn.model import Pdfa, PdfaState
from pdfalearn.traces import Trace, TraceSet


def random_trace_set(rng: random.Random, n_traces=None, alphabet=None, max_len=8) -> TraceSet:
    """Small random sample; geometric-ish lengths, uniform symbols."""
    if alphabet is None:
        alphabet = rng.randint(1, 4)
    if n_traces is None:
        n_traces = rng.randint(0, 25)
    traces = []
    for _ in range(n_traces):
        length = rng.randint(0, max_len)
        traces.append(Trace(1, tuple(rng.randrange(alphabet) for _ in range(length))))
    return TraceSet(alphabet, tuple(traces))


def determinization_closed(apta) -> bool:
    """After merging, each (class, symbol) must resolve to one target."""
    classes: dict[int, list[int]] = {}
    for n in range(apta.n_nodes):
        classes.setdefault(apta.find_representative(n), []).append(n)
    for q, members in classes.items():
        for a in range(apta.alphabet_size):
            targets = set()
            for m in members:
                c = apta.children[m, a]
                if c != NO_NODE:
                    targets.add(apta.find_representative(int(c)))
            if len(targets) > 1:
                return False
    return True


def class_path_counts_conserved(apta, original_paths) -> bool:
    """Each class's path count equals the sum over its members as built."""
    import numpy as np

    sums: dict[int, int] = {}
    for n in range(apta.n_nodes):
        r = apta.find_representative(n)
        sums[r] = sums.get(r, 0) + int(original_paths[n])
    return all(int(apta.path_count[r]) == s for r, s in sums.items())


# The trace sample used throughout: twenty sequences over {a=0, b=1},
# all starting with an a and ending with a b (the a(a|b)*b language).
TWENTY_TRACES = [
    [0, 1],
    [0, 1],
    [0, 1],
    [0, 0, 1],
    [0, 1],
    [0, 0, 1, 1, 1, 1, 0, 0, 0, 1],
    [0, 0, 1, 0, 1, 0, 0, 1, 1, 1],
    [0, 1, 1],
    [0, 1],
    [0, 0, 1],
    [0, 1],
    [0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 1],
    [0, 1, 1, 1],
    [0, 0, 1, 0, 1],
    [0, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1],
    [0, 1, 1, 1, 1],
    [0, 0, 1],
    [0, 1, 0, 1, 0, 0, 1],
    [0, 0, 1, 1, 1, 1, 0, 0, 0, 1],
    [0, 0, 0, 1, 1, 1, 1, 1],
]


@pytest.fixture
def twenty_trace_set() -> TraceSet:
    return TraceSet(2, tuple(Trace(1, tuple(t)) for t in TWENTY_TRACES))


@pytest.fixture
def loop_model() -> Pdfa:
    """Hand-built 3-state model of a(a|b)*b with the published counts.

    Symbols: a=0, b=1.  State 1 is the a-loop hub, state 2 the only
    state where traces end.
    """
    states = [PdfaState(0, 0, 20), PdfaState(1, 0, 50), PdfaState(2, 20, 50)]
    transitions = {
        (0, 0): (1, 20),
        (1, 0): (1, 20),
        (1, 1): (2, 30),
        (2, 0): (1, 10),
        (2, 1): (2, 20),
    }
    return Pdfa(2, True, states, transitions)
