"""The augmented prefix tree acceptor (APTA) and its count bookkeeping.

State is kept in parallel numpy arrays indexed by node id rather than in
per-node objects: the merge cascade reads and writes these arrays millions
of times per run, and flat storage lets the compiled kernel and the
pure-Python fallback share one representation.  ``AptaNode`` is a thin
read-only view for inspection and tests.

Representative pointers implement a union/find structure without path
compression: lookups walk the chain every time, which keeps undoing a
merge as cheap as resetting the pointers that were written.
"""

from __future__ import annotations

import hashlib
from collections import deque

import numpy as np

from .traces import TraceSet

WHITE = 0
RED = 1
BLUE = 2

_COLOR_NAMES = {WHITE: "white", RED: "red", BLUE: "blue"}

NO_NODE = -1
NO_SYMBOL = -1


class Apta:
    """Prefix tree acceptor with occurrence counts and merge bookkeeping.

    Arrays, all indexed by node id (ids are assigned in breadth-first
    construction order so that "first blue state" tie-breaks are stable):

    - ``parent``, ``incoming``, ``depth``: tree position, immutable.
    - ``children[n, a]``: raw child pointer per symbol (NO_NODE if absent).
      Only rows of chain-end (representative) nodes are authoritative for
      the merged automaton; resolve through :meth:`resolve_transition`.
    - ``rep``: representative pointer (NO_NODE = none, i.e. chain end).
    - ``color``: WHITE / RED / BLUE.
    - ``final_count``, ``path_count``, ``symbol_counts``: exact integer
      occurrence counters; probabilities are always derived on demand.
    - ``aux_weight``: optional per-node real-valued row that merges
      additively alongside the counts (allocated by evaluation functions
      that need frozen prefix-tree reference mass, see ``evals``).
    """

    def __init__(self, n_nodes: int, alphabet_size: int):
        if alphabet_size < 1:
            raise ValueError("alphabet size must be positive")
        self.alphabet_size = alphabet_size
        self.root = 0
        n = max(n_nodes, 1)
        self.parent = np.full(n, NO_NODE, dtype=np.int32)
        self.incoming = np.full(n, NO_SYMBOL, dtype=np.int32)
        self.depth = np.zeros(n, dtype=np.int32)
        self.children = np.full((n, alphabet_size), NO_NODE, dtype=np.int32)
        self.rep = np.full(n, NO_NODE, dtype=np.int32)
        self.color = np.full(n, WHITE, dtype=np.int8)
        self.final_count = np.zeros(n, dtype=np.int64)
        self.path_count = np.zeros(n, dtype=np.int64)
        self.symbol_counts = np.zeros((n, alphabet_size), dtype=np.int64)
        self.aux_weight = None

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    # -- structure queries -------------------------------------------------

    def find_representative(self, q: int) -> int:
        """Follow representative pointers to the chain end (no compression)."""
        rep = self.rep
        while rep[q] != NO_NODE:
            q = rep[q]
        return int(q)

    def resolve_transition(self, q: int, a: int) -> int | None:
        """Target of (q, a) in the merged automaton; q must be a chain end."""
        c = self.children[q, a]
        if c == NO_NODE:
            return None
        return self.find_representative(c)

    def probabilities(self, q: int) -> tuple[np.ndarray, float]:
        """Empirical (symbol distribution, final probability) of node q."""
        c = self.path_count[q]
        if c == 0:
            raise ValueError(f"node {q} has zero occurrence count: distribution undefined")
        return self.symbol_counts[q] / c, float(self.final_count[q] / c)

    def representatives(self) -> np.ndarray:
        """Ids of all chain-end nodes."""
        return np.flatnonzero(self.rep == NO_NODE)

    def node(self, q: int) -> "AptaNode":
        return AptaNode(self, q)

    def reachable_representatives(self) -> list[int]:
        """Chain ends reachable from the root's class, in BFS order."""
        start = self.find_representative(self.root)
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            q = queue.popleft()
            for a in range(self.alphabet_size):
                t = self.resolve_transition(q, a)
                if t is not None and t not in seen:
                    seen.add(t)
                    order.append(t)
                    queue.append(t)
        return order

    def structural_signature(self) -> str:
        """Hash of all mutable state; equal hashes mean equal structure."""
        h = hashlib.blake2b(digest_size=16)
        h.update(np.ascontiguousarray(self.rep).tobytes())
        h.update(np.ascontiguousarray(self.color).tobytes())
        h.update(np.ascontiguousarray(self.children).tobytes())
        h.update(np.ascontiguousarray(self.final_count).tobytes())
        h.update(np.ascontiguousarray(self.path_count).tobytes())
        h.update(np.ascontiguousarray(self.symbol_counts).tobytes())
        if self.aux_weight is not None:
            h.update(np.ascontiguousarray(self.aux_weight).tobytes())
        return h.hexdigest()

    def check_count_conservation(self) -> bool:
        """path_count == final_count + sum of symbol counts, every node."""
        return bool(
            np.array_equal(self.path_count, self.final_count + self.symbol_counts.sum(axis=1))
        )


class AptaNode:
    """Read-only view of one APTA node."""

    __slots__ = ("_apta", "id")

    def __init__(self, apta: Apta, node_id: int):
        self._apta = apta
        self.id = node_id

    @property
    def depth(self) -> int:
        return int(self._apta.depth[self.id])

    @property
    def incoming_symbol(self) -> int | None:
        s = self._apta.incoming[self.id]
        return None if s == NO_SYMBOL else int(s)

    @property
    def children(self) -> dict[int, int]:
        row = self._apta.children[self.id]
        return {int(a): int(row[a]) for a in np.flatnonzero(row != NO_NODE)}

    @property
    def representative(self) -> int | None:
        r = self._apta.rep[self.id]
        return None if r == NO_NODE else int(r)

    @property
    def color(self) -> str:
        return _COLOR_NAMES[int(self._apta.color[self.id])]

    @property
    def path_count(self) -> int:
        return int(self._apta.path_count[self.id])

    @property
    def final_count(self) -> int:
        return int(self._apta.final_count[self.id])

    @property
    def symbol_counts(self) -> dict[int, int]:
        row = self._apta.symbol_counts[self.id]
        return {int(a): int(row[a]) for a in np.flatnonzero(row != 0)}


def build_prefix_tree(ts: TraceSet) -> Apta:
    """Construct the APTA: one node per distinct prefix, plus the root.

    Counts aggregate every trace occurrence (duplicates kept).  The root
    is colored red and its children blue; everything else starts white.
    """
    # First pass with a dict trie, then relabel breadth-first (ascending
    # symbol order) so node ids are reproducible.
    trie_children: list[dict[int, int]] = [{}]
    finals = [0]
    paths = [0]
    for tr in ts.traces:
        cur = 0
        paths[cur] += 1
        for s in tr.symbols:
            nxt = trie_children[cur].get(s)
            if nxt is None:
                nxt = len(trie_children)
                trie_children[cur][s] = nxt
                trie_children.append({})
                finals.append(0)
                paths.append(0)
            cur = nxt
            paths[cur] += 1
        finals[cur] += 1

    n = len(trie_children)
    order = np.empty(n, dtype=np.int64)  # order[bfs_id] = trie id
    bfs_of = np.empty(n, dtype=np.int64)
    queue = deque([0])
    k = 0
    while queue:
        t = queue.popleft()
        order[k] = t
        bfs_of[t] = k
        k += 1
        for a in sorted(trie_children[t]):
            queue.append(trie_children[t][a])

    apta = Apta(n, ts.alphabet_size)
    for bid in range(n):
        tid = order[bid]
        apta.final_count[bid] = finals[tid]
        apta.path_count[bid] = paths[tid]
        for a, child_tid in trie_children[tid].items():
            cid = bfs_of[child_tid]
            apta.children[bid, a] = cid
            apta.symbol_counts[bid, a] = paths[child_tid]
            apta.parent[cid] = bid
            apta.incoming[cid] = a
            apta.depth[cid] = apta.depth[bid] + 1

    apta.color[apta.root] = RED
    for a in range(ts.alphabet_size):
        c = apta.children[apta.root, a]
        if c != NO_NODE:
            apta.color[c] = BLUE
    return apta
