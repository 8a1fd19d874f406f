"""Prefix tree construction, representatives, and count bookkeeping."""

import random

import numpy as np
import pytest

from conftest import random_trace_set
from pdfalearn.apta import BLUE, NO_NODE, RED, WHITE, build_prefix_tree
from pdfalearn.traces import Trace, TraceSet, parse_abbadingo


def _distinct_prefixes(ts):
    """Brute-force oracle: every non-empty prefix occurring in the sample."""
    prefixes = set()
    for tr in ts.traces:
        for i in range(1, len(tr.symbols) + 1):
            prefixes.add(tr.symbols[:i])
    return prefixes


def test_twenty_trace_counts(twenty_trace_set):
    apta = build_prefix_tree(twenty_trace_set)
    assert apta.path_count[apta.root] == 20


def test_specific_prefix_final_count():
    # Twenty traces, three of them exactly a-a-a-b-b.
    traces = [[0, 0, 0, 1, 1]] * 3 + [[0, 1]] * 17
    ts = TraceSet(2, tuple(Trace(1, tuple(t)) for t in traces))
    apta = build_prefix_tree(ts)
    q = apta.root
    for sym in (0, 0, 0, 1, 1):
        q = int(apta.children[q, sym])
        assert q != NO_NODE
    assert apta.final_count[q] == 3
    assert apta.path_count[apta.root] == 20


def test_empty_sample_single_red_root():
    apta = build_prefix_tree(TraceSet(3))
    assert apta.n_nodes == 1
    assert apta.color[apta.root] == RED
    assert apta.path_count[apta.root] == 0
    assert apta.final_count[apta.root] == 0


def test_node_count_matches_prefix_oracle():
    rng = random.Random(99)
    for _ in range(40):
        ts = random_trace_set(rng)
        apta = build_prefix_tree(ts)
        assert apta.n_nodes == 1 + len(_distinct_prefixes(ts))


def test_count_conservation_and_colors():
    rng = random.Random(7)
    for _ in range(25):
        ts = random_trace_set(rng)
        apta = build_prefix_tree(ts)
        assert apta.check_count_conservation()
        assert apta.color[apta.root] == RED
        for a in range(apta.alphabet_size):
            c = apta.children[apta.root, a]
            if c != NO_NODE:
                assert apta.color[c] == BLUE
        deeper = [
            n
            for n in range(apta.n_nodes)
            if n != apta.root and apta.parent[n] != apta.root
        ]
        assert all(apta.color[n] == WHITE for n in deeper)


def test_breadth_first_ids():
    ts = parse_abbadingo("2 2\n1 3 0 0 1\n1 2 1 0\n")
    apta = build_prefix_tree(ts)
    # Level 1 nodes get ids 1..k in symbol order, level 2 next, and so on.
    assert int(apta.children[0, 0]) == 1
    assert int(apta.children[0, 1]) == 2
    assert sorted((int(apta.children[1, 0]), int(apta.children[2, 0]))) == [3, 4]
    assert list(apta.depth) == sorted(apta.depth)


def test_find_representative_identity_and_chain():
    ts = parse_abbadingo("1 1\n1 5 0 0 0 0 0\n")
    apta = build_prefix_tree(ts)
    assert apta.find_representative(3) == 3
    # Hand-constructed chain 5 -> 4 -> 3 (two merges' pointers).
    apta.rep[5] = 4
    apta.rep[4] = 3
    assert apta.find_representative(5) == 3
    assert apta.find_representative(4) == 3


def test_resolve_transition_matches_tree_before_merging():
    rng = random.Random(4242)
    for _ in range(50):
        ts = random_trace_set(rng)
        apta = build_prefix_tree(ts)
        for q in range(apta.n_nodes):
            for a in range(apta.alphabet_size):
                raw = apta.children[q, a]
                resolved = apta.resolve_transition(q, a)
                assert resolved == (None if raw == NO_NODE else int(raw))


def test_resolve_transition_follows_representatives():
    # a-a chain: root -0-> 1 -0-> 2; merging 1 into root gives a self-loop.
    ts = parse_abbadingo("1 1\n1 2 0 0\n")
    apta = build_prefix_tree(ts)
    apta.rep[1] = 0
    assert apta.resolve_transition(0, 0) == 0


def test_probabilities_published_value():
    ts = TraceSet(2, tuple(Trace(1, (1,)) for _ in range(30)) + tuple(
        Trace(1, (0,)) for _ in range(20)))
    apta = build_prefix_tree(ts)
    s, f = apta.probabilities(apta.root)
    assert s[1] == pytest.approx(0.6)
    assert f == 0.0
    assert apta.path_count[apta.root] == 50


def test_probabilities_all_final():
    ts = TraceSet(2, (Trace(1, ()), Trace(1, ())))
    apta = build_prefix_tree(ts)
    s, f = apta.probabilities(apta.root)
    assert f == 1.0
    assert np.all(s == 0)


def test_probabilities_normalize():
    rng = random.Random(11)
    for _ in range(1000):
        alphabet = rng.randint(1, 6)
        counts = [rng.randint(0, 30) for _ in range(alphabet)]
        fin = rng.randint(0, 30)
        if fin + sum(counts) == 0:
            fin = 1
        ts_traces = []
        for a, c in enumerate(counts):
            ts_traces.extend(Trace(1, (a,)) for _ in range(c))
        ts_traces.extend(Trace(1, ()) for _ in range(fin))
        apta = build_prefix_tree(TraceSet(alphabet, tuple(ts_traces)))
        s, f = apta.probabilities(apta.root)
        assert f + float(np.sum(s)) == pytest.approx(1.0, abs=1e-12)


def test_probabilities_undefined_on_zero_count():
    apta = build_prefix_tree(TraceSet(2))
    with pytest.raises(ValueError, match="undefined"):
        apta.probabilities(apta.root)
