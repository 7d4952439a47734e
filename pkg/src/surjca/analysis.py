"""Decision procedures for one-dimensional cellular automata on full shifts.

All procedures work on the edge-labelled de Bruijn graph of the local rule:
nodes are (m-1)-words, the m-word ``w`` is an edge from ``w[:-1]`` to ``w[1:]``
labelled by ``rule(w)``.  Nodes and edges are handled as integer codes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .symbolic import SlidingBlockMap1D, SymbolicError, Word


class UnsupportedDomain(SymbolicError):
    """Raised when a procedure restricted to full shifts receives a proper SFT."""


class ResourceLimit(RuntimeError):
    pass


def _labelled_graph(phi: SlidingBlockMap1D):
    if not (phi.domain.is_full and phi.codomain.is_full):
        raise UnsupportedDomain("decision procedures are restricted to maps between full shifts")
    s = len(phi.domain.alphabet)
    m = phi.window
    n_nodes = s ** (m - 1)
    labels = phi.lookup_array()
    return s, m, n_nodes, labels


@dataclass
class SubsetAutomaton:
    """Determinized de Bruijn automaton; states are bitmasks of (m-1)-word codes."""

    n_nodes: int
    start: int
    transitions: dict = field(default_factory=dict)  # (state, symbol) -> state

    @property
    def states(self) -> set:
        out = {self.start}
        out.update(self.transitions.values())
        return out


def _subset_step_table(phi: SlidingBlockMap1D):
    s, m, n_nodes, labels = _labelled_graph(phi)
    t = len(phi.codomain.alphabet)
    step = [[0] * t for _ in range(n_nodes)]
    for e in range(s ** m):
        u, v = e // s, e % n_nodes
        step[u][labels[e]] |= 1 << v
    return step, n_nodes, t


def subset_automaton(phi: SlidingBlockMap1D) -> SubsetAutomaton:
    step, n_nodes, t = _subset_step_table(phi)
    sa = SubsetAutomaton(n_nodes, (1 << n_nodes) - 1)
    queue = deque([sa.start])
    seen = {sa.start}
    while queue:
        state = queue.popleft()
        for b in range(t):
            nxt = _advance(step, state, b)
            sa.transitions[(state, b)] = nxt
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return sa


def _advance(step, state: int, b: int) -> int:
    nxt = 0
    u = 0
    while state:
        if state & 1:
            nxt |= step[u][b]
        state >>= 1
        u += 1
    return nxt


def find_garden_of_eden(phi: SlidingBlockMap1D) -> Word | None:
    """Shortest word without a preimage (BFS, ties broken by symbol index), or None."""
    step, n_nodes, t = _subset_step_table(phi)
    start = (1 << n_nodes) - 1
    parent = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for b in range(t):
            nxt = _advance(step, state, b)
            if nxt in parent:
                continue
            parent[nxt] = (state, b)
            if nxt == 0:
                word = []
                cur = nxt
                while parent[cur] is not None:
                    cur, sym = parent[cur]
                    word.append(sym)
                return tuple(reversed(word))
            queue.append(nxt)
    return None


def is_surjective(phi: SlidingBlockMap1D) -> bool:
    return find_garden_of_eden(phi) is None


@dataclass
class PairGraph:
    """Pairs of (m-1)-words; an edge for every pair of equally labelled de Bruijn edges.

    ``edges[(u, v)]`` lists ``((u2, v2), diverging)`` where ``diverging`` tells
    whether the two underlying de Bruijn edges differ.
    """

    n_nodes: int
    edges: dict

    def diagonal(self):
        return [(u, u) for u in range(self.n_nodes)]


def pair_graph(phi: SlidingBlockMap1D) -> PairGraph:
    s, m, n_nodes, labels = _labelled_graph(phi)
    by_label = {}
    for e in range(s ** m):
        by_label.setdefault((e // s, int(labels[e])), []).append(e)
    edges = {}
    t = len(phi.codomain.alphabet)
    for u in range(n_nodes):
        for v in range(n_nodes):
            out = []
            for b in range(t):
                for e1 in by_label.get((u, b), ()):
                    for e2 in by_label.get((v, b), ()):
                        out.append(((e1 % n_nodes, e2 % n_nodes), e1 != e2))
            edges[(u, v)] = out
    return PairGraph(n_nodes, edges)


def _reverse(pg: PairGraph) -> dict:
    rev = {p: [] for p in pg.edges}
    for p, outs in pg.edges.items():
        for q, _ in outs:
            rev[q].append(p)
    return rev


def is_preinjective(phi: SlidingBlockMap1D) -> bool:
    """No two distinct asymptotic configurations share an image ("diamond" test)."""
    pg = pair_graph(phi)
    rev = _reverse(pg)
    reach_diag = set(pg.diagonal())
    queue = deque(reach_diag)
    while queue:
        q = queue.popleft()
        for p in rev[q]:
            if p not in reach_diag:
                reach_diag.add(p)
                queue.append(p)
    for d in pg.diagonal():
        for q, diverging in pg.edges[d]:
            if diverging and q in reach_diag:
                return False
    return True


def _infinite_core(nodes, succ) -> set:
    """Nodes with an infinite path starting from them under ``succ``."""
    alive = set(nodes)
    changed = True
    while changed:
        changed = False
        for p in list(alive):
            if not any(q in alive for q in succ[p]):
                alive.discard(p)
                changed = True
    return alive


def is_injective(phi: SlidingBlockMap1D) -> bool:
    """No two distinct bi-infinite configurations share an image."""
    pg = pair_graph(phi)
    succ = {p: [q for q, _ in outs] for p, outs in pg.edges.items()}
    rev = _reverse(pg)
    forward = _infinite_core(pg.edges, succ)
    backward = _infinite_core(pg.edges, rev)
    for p, outs in pg.edges.items():
        if p not in backward:
            continue
        for q, diverging in outs:
            if diverging and q in forward:
                return False
    return True


def preimage_counts(phi: SlidingBlockMap1D, n: int, cap: int = 1 << 22) -> np.ndarray:
    """Number of length-(n+m-1) preimages of every output word of length n,
    indexed by the output word's code."""
    s, m, _, labels = _labelled_graph(phi)
    t = len(phi.codomain.alphabet)
    N = n + m - 1
    if s ** N > cap:
        raise ResourceLimit(f"{s}**{N} input words exceed the enumeration cap {cap}")
    codes = np.arange(s ** N, dtype=np.int64)
    out = np.zeros_like(codes)
    for i in range(n):
        win = (codes // s ** (N - m - i)) % s ** m
        out = out * t + labels[win]
    return np.bincount(out, minlength=t ** n)


def balance_check(phi: SlidingBlockMap1D, n: int, cap: int = 1 << 22) -> bool:
    if n < 1:
        raise SymbolicError("n must be positive")
    counts = preimage_counts(phi, n, cap)
    return bool(np.all(counts == counts[0]))


def is_permutive(phi: SlidingBlockMap1D, side: str) -> bool:
    """Left (right) permutivity: the rule is a bijection in its first (last) cell."""
    s, m, _, labels = _labelled_graph(phi)
    if len(phi.codomain.alphabet) != s:
        return False
    table = labels.reshape((s,) * m)
    axis = 0 if side == "left" else m - 1
    moved = np.moveaxis(table, axis, -1).reshape(-1, s)
    return all(len(set(row)) == s for row in moved)
