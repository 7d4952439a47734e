"""Alphabets, words, one-dimensional shifts of finite type and sliding block maps.

Words are plain tuples of symbol indices.  Symbol names (strings) only appear at
the boundary: :meth:`Alphabet.encode` / :meth:`Alphabet.decode` and the model
file format in :mod:`surjca.models`.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

Word = tuple  # tuple[int, ...]


class SymbolicError(ValueError):
    """Invalid symbolic object or argument (bad word, empty shift, ...)."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", syms)
        if len(syms) < 2:
            raise SymbolicError("an alphabet needs at least two symbols")
        if len(set(syms)) != len(syms):
            raise SymbolicError(f"duplicate symbols in {syms}")
        for s in syms:
            if not s or any(c.isspace() for c in s) or "." in s or "->" in s:
                raise SymbolicError(f"illegal symbol name {s!r}")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def compact(self) -> bool:
        """True when every symbol is one character, so words print without separators."""
        return all(len(s) == 1 for s in self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise SymbolicError(f"unknown symbol {symbol!r}") from None

    def encode(self, text) -> Word:
        """Parse a word.  Strings are split per character for compact alphabets,
        on '.' otherwise; sequences of names are accepted as-is."""
        if isinstance(text, str):
            if self.compact and "." not in text:
                parts = list(text)
            else:
                parts = [p for p in text.split(".") if p]
        else:
            parts = list(text)
        return tuple(self.index(p) for p in parts)

    def decode(self, word: Sequence[int]) -> str:
        names = [self.symbols[i] for i in word]
        return "".join(names) if self.compact else ".".join(names)


def _word_name(alphabet: Alphabet, word: Word) -> str:
    names = [alphabet.symbols[i] for i in word]
    return "".join(names) if alphabet.compact else "(" + ",".join(names) + ")"


@dataclass(frozen=True, eq=False)
class Sft1D:
    """A one-dimensional shift of finite type.

    ``forbidden`` is normalized on construction to a set of words of one common
    length ``F``; ``memory`` is ``F - 1``.  An empty shift is rejected.
    """

    alphabet: Alphabet
    forbidden: frozenset = frozenset()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        s = len(self.alphabet)
        raw = {tuple(w) for w in self.forbidden}
        for w in raw:
            if not w or any(not 0 <= a < s for a in w):
                raise SymbolicError(f"bad forbidden word {w}")
        F = max((len(w) for w in raw), default=1)
        norm = set()
        if raw:
            for w in itertools.product(range(s), repeat=F):
                if any(_has_factor(w, f) for f in raw):
                    norm.add(w)
        object.__setattr__(self, "forbidden", frozenset(norm))
        object.__setattr__(self, "_F", F)
        if not self._core()[0]:
            raise SymbolicError("the shift of finite type is empty")

    # identity is determined by the alphabet and the normalized forbidden set
    def __eq__(self, other):
        if not isinstance(other, Sft1D):
            return NotImplemented
        return self.alphabet == other.alphabet and self._F == other._F and self.forbidden == other.forbidden

    def __hash__(self):
        return hash((self.alphabet, self._F, self.forbidden))

    def __repr__(self):
        return f"Sft1D({self.alphabet.symbols}, F={self._F}, |forbidden|={len(self.forbidden)})"

    @classmethod
    def full(cls, alphabet: Alphabet | Sequence[str]) -> Sft1D:
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        return cls(alphabet)

    @classmethod
    def from_strings(cls, symbols: Sequence[str], forbidden: Iterable[str] = ()) -> Sft1D:
        alphabet = Alphabet(tuple(symbols))
        return cls(alphabet, frozenset(alphabet.encode(w) for w in forbidden))

    @property
    def window(self) -> int:
        """Common length ``F`` of the normalized forbidden words."""
        return self._F

    @property
    def memory(self) -> int:
        return self._F - 1

    @property
    def is_full(self) -> bool:
        return not self.forbidden

    def locally_allowed(self, word: Word) -> bool:
        F = self._F
        if not self.forbidden:
            return True
        return all(word[i : i + F] not in self.forbidden for i in range(len(word) - F + 1))

    def periodic_allowed(self, word: Word) -> bool:
        """Whether the bi-infinite periodic extension of ``word`` lies in the shift."""
        if not word:
            return False
        reps = -(-(len(word) + self._F) // len(word))
        ext = tuple(word) * reps
        return self.locally_allowed(ext[: len(word) + self._F - 1])

    def _core(self):
        """Essential order-q word graph, q = max(memory, 1): (nodes, edges)."""
        if "core" in self._cache:
            return self._cache["core"]
        s = len(self.alphabet)
        q = max(self.memory, 1)
        nodes = {w for w in itertools.product(range(s), repeat=q) if self.locally_allowed(w)}
        edges = {w + (a,) for w in nodes for a in range(s) if self.locally_allowed(w + (a,))}
        edges = {e for e in edges if e[1:] in nodes}
        changed = True
        while changed:
            has_out = {e[:-1] for e in edges}
            has_in = {e[1:] for e in edges}
            keep = nodes & has_out & has_in
            changed = keep != nodes
            nodes = keep
            edges = {e for e in edges if e[:-1] in nodes and e[1:] in nodes}
        out = (sorted(nodes), sorted(edges))
        self._cache["core"] = out
        return out

    def words(self, n: int) -> list:
        """Sorted list of the words of length ``n`` occurring in the shift."""
        key = ("words", n)
        if key in self._cache:
            return self._cache[key]
        nodes, edges = self._core()
        q = max(self.memory, 1)
        if n == 0:
            out = [()]
        elif n <= q:
            out = sorted({w[:n] for w in nodes})
        else:
            follow = {}
            for e in edges:
                follow.setdefault(e[:-1], []).append(e[-1])
            prev = self.words(n - 1)
            out = [w + (a,) for w in prev for a in follow.get(w[len(w) - q :], ())]
            out.sort()
        self._cache[key] = out
        return out

    def word_set(self, n: int) -> frozenset:
        key = ("wordset", n)
        if key not in self._cache:
            self._cache[key] = frozenset(self.words(n))
        return self._cache[key]

    def is_allowed(self, word: Word) -> bool:
        return tuple(word) in self.word_set(len(word))


def _has_factor(word: Word, factor: Word) -> bool:
    k = len(factor)
    return any(word[i : i + k] == factor for i in range(len(word) - k + 1))


@dataclass(eq=False)
class DeBruijnGraph:
    """Order-``n`` word graph of a shift: nodes are allowed n-words, edges allowed
    (n+1)-words running from their n-prefix to their n-suffix."""

    order: int
    nodes: list
    edges: list
    weights: dict | None = None
    node_index: dict = field(init=False, repr=False)
    components: np.ndarray = field(init=False, repr=False)
    n_components: int = field(init=False)

    def __post_init__(self):
        self.node_index = {u: i for i, u in enumerate(self.nodes)}
        for e in self.edges:
            if e[:-1] not in self.node_index or e[1:] not in self.node_index:
                raise SymbolicError(f"edge {e} has an endpoint outside the node set")
        n = len(self.nodes)
        src = [self.node_index[e[:-1]] for e in self.edges]
        dst = [self.node_index[e[1:]] for e in self.edges]
        adj = csr_matrix((np.ones(len(self.edges)), (src, dst)), shape=(n, n))
        self.n_components, self.components = connected_components(adj, directed=True, connection="strong")

    def source(self, edge: Word) -> int:
        return self.node_index[edge[:-1]]

    def target(self, edge: Word) -> int:
        return self.node_index[edge[1:]]

    def out_edges(self) -> list:
        out = [[] for _ in self.nodes]
        for e in self.edges:
            out[self.source(e)].append(e)
        return out

    @property
    def strongly_connected(self) -> bool:
        return self.n_components == 1

    def period(self) -> int:
        """gcd of cycle lengths (graph must be strongly connected)."""
        level = {0: 0}
        queue = deque([0])
        succ = [[] for _ in self.nodes]
        for e in self.edges:
            succ[self.source(e)].append(self.target(e))
        while queue:
            u = queue.popleft()
            for v in succ[u]:
                if v not in level:
                    level[v] = level[u] + 1
                    queue.append(v)
        g = 0
        for e in self.edges:
            u, v = self.source(e), self.target(e)
            g = gcd(g, level[u] + 1 - level[v])
        return g


def build_de_bruijn(sft: Sft1D, n: int) -> DeBruijnGraph:
    if n < 1 or n < sft.memory:
        raise SymbolicError(f"de Bruijn order {n} must be positive and at least the memory {sft.memory}")
    return DeBruijnGraph(n, sft.words(n), sft.words(n + 1))


def is_mixing(sft: Sft1D) -> bool:
    g = build_de_bruijn(sft, max(sft.memory, 1))
    return g.strongly_connected and g.period() == 1


@dataclass(frozen=True, eq=False)
class SlidingBlockMap1D:
    """Sliding block map ``(Φx)(i) = rule[x[i+left .. i+right]]``.

    ``rule`` maps every allowed window word of the domain to a codomain symbol
    index.  Validity of the image is checked on construction.
    """

    domain: Sft1D
    codomain: Sft1D
    left: int
    right: int
    rule: dict
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.left > self.right:
            raise SymbolicError("empty neighborhood")
        m = self.window
        rule = {tuple(k): int(v) for k, v in self.rule.items()}
        object.__setattr__(self, "rule", rule)
        t = len(self.codomain.alphabet)
        for w in self.domain.words(m):
            if w not in rule:
                raise SymbolicError(f"rule undefined on allowed word {w}")
            if not 0 <= rule[w] < t:
                raise SymbolicError(f"rule value {rule[w]} outside the codomain alphabet")
        Fc = self.codomain.window
        if self.codomain.forbidden:
            for u in self.domain.words(Fc + m - 1):
                img = _apply_rule(rule, u, m)
                if img in self.codomain.forbidden:
                    raise SymbolicError(f"image of {u} is forbidden in the codomain")

    @classmethod
    def from_local_rule(cls, domain: Sft1D, left: int, right: int, fn: Callable, codomain: Sft1D | None = None):
        codomain = domain if codomain is None else codomain
        m = right - left + 1
        rule = {w: fn(w) for w in domain.words(m)}
        return cls(domain, codomain, left, right, rule)

    def __eq__(self, other):
        if not isinstance(other, SlidingBlockMap1D):
            return NotImplemented
        return (self.domain == other.domain and self.codomain == other.codomain
                and self.left == other.left and self.right == other.right and self.rule == other.rule)

    def __hash__(self):
        return hash((self.domain, self.codomain, self.left, self.right))

    @property
    def window(self) -> int:
        return self.right - self.left + 1

    @property
    def is_ca(self) -> bool:
        return self.domain == self.codomain

    def lookup_array(self) -> np.ndarray:
        """Rule as an array indexed by the base-|S| code of the window (first cell most significant)."""
        if "arr" not in self._cache:
            s = len(self.domain.alphabet)
            arr = np.full(s ** self.window, -1, dtype=np.int64)
            for w, v in self.rule.items():
                arr[word_code(w, s)] = v
            self._cache["arr"] = arr
        return self._cache["arr"]


def word_code(word: Sequence[int], base: int) -> int:
    c = 0
    for a in word:
        c = c * base + a
    return c


def _apply_rule(rule: dict, w: Word, m: int) -> Word:
    return tuple(rule[w[i : i + m]] for i in range(len(w) - m + 1))


def apply_to_word(phi: SlidingBlockMap1D, w: Sequence[int]) -> Word:
    w = tuple(w)
    m = phi.window
    if len(w) < m:
        raise SymbolicError(f"word of length {len(w)} shorter than the window {m}")
    if not phi.domain.is_allowed(w):
        raise SymbolicError(f"word {w} is not allowed in the domain")
    return _apply_rule(phi.rule, w, m)


def apply_periodic(phi: SlidingBlockMap1D, w: Sequence[int]) -> Word:
    w = tuple(w)
    n = len(w)
    if n < 1:
        raise SymbolicError("empty periodic word")
    if not phi.domain.periodic_allowed(w):
        raise SymbolicError(f"periodic extension of {w} is not allowed in the domain")
    m = phi.window
    return tuple(phi.rule[tuple(w[(i + phi.left + j) % n] for j in range(m))] for i in range(n))


def compose(outer: SlidingBlockMap1D, inner: SlidingBlockMap1D) -> SlidingBlockMap1D:
    """The map ``outer ∘ inner`` (apply ``inner`` first)."""
    if inner.codomain != outer.domain:
        raise SymbolicError("codomain of the inner map differs from the domain of the outer map")
    left = outer.left + inner.left
    right = outer.right + inner.right
    mi, mo = inner.window, outer.window
    m = mi + mo - 1
    rule = {}
    for u in inner.domain.words(m):
        v = _apply_rule(inner.rule, u, mi)
        rule[u] = outer.rule[v]
    return SlidingBlockMap1D(inner.domain, outer.codomain, left, right, rule)


def power(phi: SlidingBlockMap1D, t: int) -> SlidingBlockMap1D:
    if t < 1:
        raise SymbolicError("power needs t >= 1")
    out = phi
    for _ in range(t - 1):
        out = compose(phi, out)
    return out


def identity_map(sft: Sft1D) -> SlidingBlockMap1D:
    return SlidingBlockMap1D(sft, sft, 0, 0, {(a,): a for (a,) in sft.words(1)})


def shift_map(sft: Sft1D) -> SlidingBlockMap1D:
    """The left shift ``(σx)(i) = x(i+1)``."""
    return SlidingBlockMap1D(sft, sft, 1, 1, {(a,): a for (a,) in sft.words(1)})


def block_presentation(sft: Sft1D, D: int):
    """Higher-block presentation.  Returns ``(sft_D, recoder, decoder)`` where
    ``recoder: X -> X^[D]`` and ``decoder: X^[D] -> X`` are mutually inverse."""
    if D < 1:
        raise SymbolicError("block length must be at least 1")
    if D == 1:
        ident = identity_map(sft)
        return sft, ident, ident
    blocks = sft.words(D)
    index = {b: i for i, b in enumerate(blocks)}
    alphabet = Alphabet(tuple(_word_name(sft.alphabet, b) for b in blocks))
    K = max(2, sft.window - D + 1)
    allowed = {tuple(index[u[i : i + D]] for i in range(K)) for u in sft.words(D + K - 1)}
    forbidden = frozenset(t for t in itertools.product(range(len(blocks)), repeat=K) if t not in allowed)
    new = Sft1D(alphabet, forbidden)
    recoder = SlidingBlockMap1D(sft, new, 0, D - 1, {b: index[b] for b in blocks})
    decoder = SlidingBlockMap1D(new, sft, 0, 0, {(i,): b[0] for b, i in index.items()})
    return new, recoder, decoder


def recode_word(w: Sequence[int], blocks: Sequence[Word], D: int) -> Word:
    """Word-level recoding into D-blocks (length shrinks by D-1)."""
    index = {b: i for i, b in enumerate(blocks)}
    w = tuple(w)
    return tuple(index[w[i : i + D]] for i in range(len(w) - D + 1))


def decode_word(codes: Sequence[int], blocks: Sequence[Word]) -> Word:
    """Inverse of :func:`recode_word`: spell out a block sequence."""
    if not codes:
        return ()
    return tuple(blocks[c][0] for c in codes) + tuple(blocks[codes[-1]][1:])
