"""Local observables with exact rational values: energy differences, triviality,
conservation under a cellular automaton, flux synthesis and discovery of all
conservation laws up to a given range.

An observable of range ``k`` and offset ``o`` reads the cells ``x[o .. o+k-1]``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import linalg
from .analysis import ResourceLimit, UnsupportedDomain
from .symbolic import (
    SlidingBlockMap1D,
    Sft1D,
    SymbolicError,
    Word,
    apply_periodic,
    build_de_bruijn,
    is_mixing,
    word_code,
)


class ContractViolation(ValueError):
    """An operation was called outside its precondition (e.g. flux of a non-conserved observable)."""


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def rational_str(x: Fraction) -> str:
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, eq=False)
class LocalObservable:
    sft: Sft1D
    k: int
    table: dict
    offset: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise SymbolicError("observable range must be positive")
        table = {tuple(w): as_fraction(v) for w, v in self.table.items()}
        missing = [w for w in self.sft.words(self.k) if w not in table]
        if missing:
            raise SymbolicError(f"observable undefined on allowed words, e.g. {missing[0]}")
        object.__setattr__(self, "table", {w: table[w] for w in self.sft.words(self.k)})

    @classmethod
    def from_function(cls, sft: Sft1D, k: int, fn: Callable, offset: int = 0):
        return cls(sft, k, {w: fn(w) for w in sft.words(k)}, offset)

    @classmethod
    def constant(cls, sft: Sft1D, c) -> LocalObservable:
        return cls.from_function(sft, 1, lambda w: c)

    @classmethod
    def indicator(cls, sft: Sft1D, pattern: Sequence[int], offset: int = 0) -> LocalObservable:
        pattern = tuple(pattern)
        return cls.from_function(sft, len(pattern), lambda w: int(w == pattern), offset)

    def __call__(self, window: Sequence[int]) -> Fraction:
        return self.table[tuple(window)]

    def __eq__(self, other):
        if not isinstance(other, LocalObservable):
            return NotImplemented
        lo = min(self.offset, other.offset)
        hi = max(self.offset + self.k, other.offset + other.k)
        return (self.sft == other.sft
                and self.widen(lo, hi - lo).table == other.widen(lo, hi - lo).table)

    __hash__ = None

    def widen(self, start: int, k: int) -> LocalObservable:
        """Same function read on the window ``[start, start+k-1]`` (must contain the current one)."""
        if start > self.offset or start + k < self.offset + self.k:
            raise SymbolicError("widened window must contain the current one")
        if start == self.offset and k == self.k:
            return self
        i = self.offset - start
        return LocalObservable(self.sft, k, {w: self.table[w[i : i + self.k]] for w in self.sft.words(k)}, start)

    def _aligned(self, other: LocalObservable):
        if self.sft != other.sft:
            raise SymbolicError("observables live on different shifts")
        lo = min(self.offset, other.offset)
        hi = max(self.offset + self.k, other.offset + other.k)
        return self.widen(lo, hi - lo), other.widen(lo, hi - lo)

    def __add__(self, other):
        if not isinstance(other, LocalObservable):
            c = as_fraction(other)
            return LocalObservable(self.sft, self.k, {w: v + c for w, v in self.table.items()}, self.offset)
        a, b = self._aligned(other)
        return LocalObservable(a.sft, a.k, {w: v + b.table[w] for w, v in a.table.items()}, a.offset)

    __radd__ = __add__

    def __neg__(self):
        return LocalObservable(self.sft, self.k, {w: -v for w, v in self.table.items()}, self.offset)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        c = as_fraction(c)
        return LocalObservable(self.sft, self.k, {w: v * c for w, v in self.table.items()}, self.offset)

    __rmul__ = __mul__

    def shifted(self, j: int) -> LocalObservable:
        """``f ∘ σ^j``."""
        return LocalObservable(self.sft, self.k, self.table, self.offset + j)

    def site_values(self, w: Sequence[int]) -> list:
        """Values at every site of the periodic configuration generated by ``w``."""
        n = len(w)
        return [self.table[tuple(w[(i + self.offset + j) % n] for j in range(self.k))] for i in range(n)]

    def periodic_sum(self, w: Sequence[int]) -> Fraction:
        return sum(self.site_values(w), Fraction(0))

    def compose(self, phi: SlidingBlockMap1D) -> LocalObservable:
        """``f ∘ Φ`` as an observable on the domain of ``phi``."""
        if phi.codomain != self.sft:
            raise SymbolicError("observable does not live on the codomain of the map")
        m = phi.window
        K = self.k + m - 1
        table = {}
        for u in phi.domain.words(K):
            img = tuple(phi.rule[u[i : i + m]] for i in range(self.k))
            table[u] = self.table[img]
        return LocalObservable(phi.domain, K, table, self.offset + phi.left)


@dataclass
class FluxObservable:
    """Flux ``h`` certifying ``f∘Φ - f = h∘σ - h``."""

    h: LocalObservable
    f: LocalObservable
    phi: SlidingBlockMap1D

    def check_periodic(self, w: Sequence[int]) -> bool:
        w = tuple(w)
        fx = self.f.site_values(w)
        fphi = self.f.site_values(apply_periodic(self.phi, w))
        hx = self.h.site_values(w)
        n = len(w)
        return all(fphi[i] - fx[i] == hx[(i + 1) % n] - hx[i] for i in range(n))


@dataclass
class ConservedBasis:
    representatives: list
    quotient_dim: int
    trivial_basis: list
    nullspace_dim: int
    k: int = field(default=0)


def _patched(background: Word, patch: Word, position: int, lo: int, hi: int) -> Word:
    p = len(background)
    return tuple(
        patch[i - position] if position <= i < position + len(patch) else background[i % p]
        for i in range(lo, hi)
    )


def delta_f(f: LocalObservable, background: Sequence[int], w1: Sequence[int], w2: Sequence[int],
            position: int = 0) -> Fraction:
    """``Δ_f(x, y)`` for ``x`` (``y``) the periodic background with ``w1`` (``w2``) written at ``position``."""
    background, w1, w2 = tuple(background), tuple(w1), tuple(w2)
    if len(w1) != len(w2):
        raise SymbolicError("patches must have equal length")
    sft = f.sft
    if not sft.periodic_allowed(background):
        raise SymbolicError("background is not an allowed periodic word")
    L = len(w1)
    F = sft.window
    for w in (w1, w2):
        ctx = _patched(background, w, position, position - F + 1, position + L + F - 1)
        if not sft.locally_allowed(ctx):
            raise SymbolicError(f"patch {w} creates a forbidden word")
    lo = position - f.offset - f.k + 1
    hi = position + L - f.offset
    total = Fraction(0)
    for i in range(lo, hi):
        a, b = i + f.offset, i + f.offset + f.k
        total += f.table[_patched(background, w2, position, a, b)] - f.table[_patched(background, w1, position, a, b)]
    return total


def _graph_potential(f: LocalObservable):
    """Try to write ``f - c`` as a coboundary on the de Bruijn graph.

    Returns ``(ok, c, potential, K)`` where ``potential`` maps (K-1)-words to
    rationals, ``f`` having been widened to range ``K`` at its own offset.
    """
    sft = f.sft
    if not is_mixing(sft):
        raise UnsupportedDomain("triviality is decided on mixing shifts only")
    K = max(f.k, sft.memory + 1, 2)
    g = f.widen(f.offset, K)
    graph = build_de_bruijn(sft, K - 1)
    out = graph.out_edges()
    # mean weight of some cycle fixes the candidate constant
    seen = {}
    path = []
    u = 0
    while u not in seen:
        seen[u] = len(path)
        e = out[u][0]
        path.append(e)
        u = graph.target(e)
    cycle = path[seen[u]:]
    c = sum((g.table[e] for e in cycle), Fraction(0)) / len(cycle)
    pot = {0: Fraction(0)}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for e in out[u]:
            v = graph.target(e)
            if v not in pot:
                pot[v] = pot[u] + g.table[e] - c
                queue.append(v)
    ok = all(g.table[e] - c == pot[graph.target(e)] - pot[graph.source(e)] for e in graph.edges)
    potential = {graph.nodes[i]: val for i, val in pot.items()}
    return ok, c, potential, K


def is_trivial(f: LocalObservable):
    """``(True, c)`` if ``f`` is physically equivalent to the constant ``c``, else ``(False, None)``."""
    ok, c, _, _ = _graph_potential(f)
    return (True, c) if ok else (False, None)


def physically_equivalent(f: LocalObservable, g: LocalObservable) -> bool:
    return is_trivial(f - g)[0]


def conservation_defect(phi: SlidingBlockMap1D, f: LocalObservable) -> LocalObservable:
    """``f∘Φ - f``."""
    if not phi.is_ca:
        raise SymbolicError("conservation is defined for cellular automata (domain = codomain)")
    return f.compose(phi) - f


def is_conserved(phi: SlidingBlockMap1D, f: LocalObservable) -> bool:
    ok, c = is_trivial(conservation_defect(phi, f))
    return ok and c == 0


def synthesize_flux(phi: SlidingBlockMap1D, f: LocalObservable) -> FluxObservable:
    d = conservation_defect(phi, f)
    ok, c, potential, K = _graph_potential(d)
    if not ok or c != 0:
        raise ContractViolation("observable is not conserved; no flux exists")
    h = LocalObservable(f.sft, K - 1, potential, d.offset)
    return FluxObservable(h, f, phi)


def discover_conserved(phi: SlidingBlockMap1D, k: int, cap: int = 10**6) -> ConservedBasis:
    """All range-``k`` observables conserved by ``phi``, modulo trivially conserved ones."""
    if not phi.is_ca:
        raise SymbolicError("conservation is defined for cellular automata (domain = codomain)")
    if not phi.domain.is_full:
        raise UnsupportedDomain("discovery is implemented on full shifts")
    if k < 1:
        raise SymbolicError("range must be positive")
    sft = phi.domain
    s = len(sft.alphabet)
    m, l, r = phi.window, phi.left, phi.right
    a = min(l, 0)
    W = max(r + k - 1, k - 1) - a + 1
    W = max(W, 2)
    if s ** W > cap:
        raise ResourceLimit(f"{s}**{W} windows exceed the cap {cap}")
    nvar = s ** k

    def defect_row(u):
        # coefficient vector of (f∘Φ - f) on the window word u (u starts at cell a)
        row = [0] * nvar
        img = tuple(phi.rule[u[l - a + i : l - a + i + m]] for i in range(k))
        row[word_code(img, s)] += 1
        row[word_code(u[-a : -a + k], s)] -= 1
        return row

    nodes = list(itertools.product(range(s), repeat=W - 1))
    index = {u: i for i, u in enumerate(nodes)}
    path = {0: [0] * nvar}
    tree = set()
    queue = deque([0])
    while queue:
        ui = queue.popleft()
        u = nodes[ui]
        for b in range(s):
            e = u + (b,)
            vi = index[e[1:]]
            if vi not in path:
                row = defect_row(e)
                path[vi] = [x + y for x, y in zip(path[ui], row)]
                tree.add(e)
                queue.append(vi)
    constraints = []
    for u in nodes:
        for b in range(s):
            e = u + (b,)
            if e in tree:
                continue
            row = defect_row(e)
            pu, pv = path[index[u]], path[index[e[1:]]]
            c = [x + y - z for x, y, z in zip(row, pu, pv)]
            if any(c):
                constraints.append(c)
    words = list(itertools.product(range(s), repeat=k))
    null = linalg.nullspace(constraints, nvar) if constraints else [
        [Fraction(int(i == j)) for j in range(nvar)] for i in range(nvar)]
    trivial = [[Fraction(1)] * nvar]
    if k > 1:
        for v in itertools.product(range(s), repeat=k - 1):
            trivial.append([Fraction(int(w[1:] == v) - int(w[:-1] == v)) for w in words])
    trivial_red, _ = linalg.rref(trivial, nvar)
    reps = linalg.extend_basis(trivial_red, null, nvar)

    def to_obs(vec):
        return LocalObservable(sft, k, {w: vec[word_code(w, s)] for w in words})

    return ConservedBasis(
        representatives=[to_obs(v) for v in reps],
        quotient_dim=len(null) - len(trivial_red),
        trivial_basis=[to_obs(v) for v in trivial_red],
        nullspace_dim=len(null),
        k=k,
    )
