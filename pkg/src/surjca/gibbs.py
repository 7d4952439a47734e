"""Shift-invariant Gibbs measures of finite-range observables on mixing 1D SFTs.

A Gibbs measure is built from the transfer matrix ``T[u][v] = exp(-f(w))``
over (K-1)-word contexts and stored as a stationary Markov chain.  Image
measures under sliding block maps are only ever represented by their cylinder
tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conservation import LocalObservable
from .symbolic import SlidingBlockMap1D, Sft1D, SymbolicError, is_mixing

EIGEN_TOL = 1e-12
MAX_ITER = 100_000


class ConvergenceError(RuntimeError):
    pass


@dataclass(eq=False)
class MarkovMeasure:
    """Stationary Markov measure of order ``order`` on ``sft``.

    ``P[i, a]`` is the probability of appending symbol ``a`` to context
    ``contexts[i]`` and ``rho`` the stationary law of the contexts.
    """

    sft: Sft1D
    order: int
    contexts: list
    P: np.ndarray
    rho: np.ndarray
    context_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.rho = np.asarray(self.rho, dtype=float)
        self.context_index = {u: i for i, u in enumerate(self.contexts)}
        s = len(self.sft.alphabet)
        if self.order < self.sft.memory:
            raise SymbolicError("Markov order must be at least the memory of the shift")
        if list(self.contexts) != self.sft.words(self.order):
            raise SymbolicError("contexts must be the allowed words of length `order`")
        if self.P.shape != (len(self.contexts), s):
            raise SymbolicError("transition array has the wrong shape")
        if np.any(self.P < 0) or np.max(np.abs(self.P.sum(axis=1) - 1)) > 1e-9:
            raise SymbolicError("transition rows must be probability vectors")
        allowed = self.sft.word_set(self.order + 1)
        for i, u in enumerate(self.contexts):
            for a in range(s):
                if (self.P[i, a] > 0) != ((u + (a,)) in allowed):
                    raise SymbolicError(f"support of the chain differs from the shift at {u + (a,)}")
        if abs(self.rho.sum() - 1) > 1e-9 or np.any(self.rho < 0):
            raise SymbolicError("stationary vector must be a probability vector")
        drift = self.rho - self.context_step(self.rho)
        if np.max(np.abs(drift)) > 1e-9:
            raise SymbolicError("rho is not stationary")

    @property
    def n_symbols(self) -> int:
        return len(self.sft.alphabet)

    def context_step(self, dist: np.ndarray) -> np.ndarray:
        out = np.zeros_like(dist)
        if self.order == 0:
            return dist.copy()
        for i, u in enumerate(self.contexts):
            for a in range(self.n_symbols):
                if self.P[i, a] > 0:
                    out[self.context_index[(u + (a,))[1:]]] += dist[i] * self.P[i, a]
        return out

    def cylinder(self, w: Sequence[int]) -> float:
        w = tuple(w)
        r = self.order
        if len(w) < r:
            return math.fsum(self.rho[i] for i, u in enumerate(self.contexts) if u[: len(w)] == w)
        i = self.context_index.get(w[:r])
        if i is None:
            return 0.0
        p = self.rho[i]
        for j in range(r, len(w)):
            ctx = w[j - r : j]
            ci = self.context_index.get(ctx)
            if ci is None:
                return 0.0
            p *= self.P[ci, w[j]]
        return float(p)

    def level(self, n: int) -> dict:
        """Probabilities of all positive-mass words of length ``n``, built by extension."""
        r = self.order
        if n <= r:
            out = {}
            for i, u in enumerate(self.contexts):
                out[u[:n]] = out.get(u[:n], 0.0) + self.rho[i]
            return {w: float(p) for w, p in sorted(out.items()) if p > 0}
        cur = {u: float(self.rho[i]) for i, u in enumerate(self.contexts) if self.rho[i] > 0}
        for _ in range(n - r):
            nxt = {}
            for w, p in cur.items():
                ci = self.context_index[w[len(w) - r :]] if r else 0
                row = self.P[ci]
                for a in range(self.n_symbols):
                    if row[a] > 0:
                        nxt[w + (a,)] = p * row[a]
            cur = nxt
        return cur

    def transition_matrix(self) -> np.ndarray:
        """First-order transition matrix over symbols (requires order 1)."""
        if self.order != 1:
            raise SymbolicError("symbol transition matrix needs an order-1 measure")
        return self.P.copy()


@dataclass
class CylinderTable:
    max_length: int
    levels: dict  # n -> {word: probability}

    def prob(self, w: Sequence[int]) -> float:
        return self.levels[len(w)].get(tuple(w), 0.0)

    def level_sums(self) -> list:
        return [math.fsum(self.levels[n].values()) for n in range(1, self.max_length + 1)]

    def max_inconsistency(self) -> float:
        worst = 0.0
        for n in range(2, self.max_length + 1):
            marg = {}
            for w, p in self.levels[n].items():
                marg.setdefault(w[:-1], []).append(p)
            keys = set(marg) | set(self.levels[n - 1])
            for u in keys:
                worst = max(worst, abs(math.fsum(marg.get(u, [])) - self.levels[n - 1].get(u, 0.0)))
        for total in self.level_sums():
            worst = max(worst, abs(total - 1))
        return worst

    def expectation(self, f: LocalObservable) -> float:
        return math.fsum(p * float(f.table[w]) for w, p in self.levels[f.k].items() if w in f.table)


def cylinder_table(mu: MarkovMeasure, L: int) -> CylinderTable:
    top = mu.level(L)
    return _table_from_top(top, L)


def _table_from_top(top: dict, L: int) -> CylinderTable:
    levels = {L: dict(sorted(top.items()))}
    for n in range(L - 1, 0, -1):
        acc = {}
        for w, p in levels[n + 1].items():
            acc.setdefault(w[:-1], []).append(p)
        levels[n] = {u: math.fsum(ps) for u, ps in sorted(acc.items())}
    return CylinderTable(L, levels)


def average_tables(tables: Sequence[CylinderTable], weights: Sequence[float] | None = None) -> CylinderTable:
    if weights is None:
        weights = [1.0 / len(tables)] * len(tables)
    L = min(t.max_length for t in tables)
    levels = {}
    for n in range(1, L + 1):
        acc = {}
        for t, wt in zip(tables, weights):
            for w, p in t.levels[n].items():
                acc.setdefault(w, []).append(wt * p)
        levels[n] = {w: math.fsum(ps) for w, ps in sorted(acc.items())}
    return CylinderTable(L, levels)


@dataclass
class TransferMatrix:
    states: list
    matrix: np.ndarray
    K: int


def transfer_matrix(sft: Sft1D, f: LocalObservable) -> TransferMatrix:
    if f.sft != sft:
        raise SymbolicError("observable lives on another shift")
    K = max(f.k, sft.memory + 1)
    g = f.widen(f.offset, K)
    if K == 1:
        # single dummy context; the one "transition" sums over symbols
        total = sum(math.exp(-float(g.table[(a,)])) for (a,) in sft.words(1))
        return TransferMatrix([()], np.array([[total]]), 1)
    states = sft.words(K - 1)
    idx = {u: i for i, u in enumerate(states)}
    T = np.zeros((len(states), len(states)))
    for w in sft.words(K):
        T[idx[w[:-1]], idx[w[1:]]] = math.exp(-float(g.table[w]))
    return TransferMatrix(states, T, K)


def perron(T: np.ndarray, tol: float = EIGEN_TOL, max_iter: int = MAX_ITER):
    """Perron root and positive right eigenvector by power iteration."""
    v = np.ones(T.shape[0]) / T.shape[0]
    lam = 0.0
    for _ in range(max_iter):
        w = T @ v
        lam = w.sum() / v.sum()
        w /= w.sum()
        resid = np.linalg.norm(T @ w - lam * w) / (lam * np.linalg.norm(w))
        v = w
        if resid <= tol:
            return lam, v
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def gibbs_from_observable(sft: Sft1D, f: LocalObservable) -> MarkovMeasure:
    if not is_mixing(sft):
        raise SymbolicError("Gibbs construction needs a mixing shift")
    tm = transfer_matrix(sft, f)
    s = len(sft.alphabet)
    if tm.K == 1:
        weights = np.array([math.exp(-float(f.widen(f.offset, 1).table[(a,)])) for a in range(s)])
        p = weights / weights.sum()
        return MarkovMeasure(sft, 0, [()], p[None, :], np.array([1.0]))
    T = tm.matrix
    lam, right = perron(T)
    _, left = perron(T.T)
    idx = {u: i for i, u in enumerate(tm.states)}
    P = np.zeros((len(tm.states), s))
    for i, u in enumerate(tm.states):
        for a in range(s):
            v = (u + (a,))[1:]
            j = idx.get(v)
            if j is not None and T[i, j] > 0:
                P[i, a] = T[i, j] * right[j] / (lam * right[i])
    P /= P.sum(axis=1, keepdims=True)
    rho = left * right
    rho /= rho.sum()
    return MarkovMeasure(sft, tm.K - 1, list(tm.states), P, rho)


def pressure(sft: Sft1D, f: LocalObservable) -> float:
    if not is_mixing(sft):
        raise SymbolicError("pressure is computed on mixing shifts")
    T = transfer_matrix(sft, f).matrix
    lam, _ = perron(T)
    return math.log(lam)


def entropy(mu: MarkovMeasure) -> float:
    """Entropy per site in nats."""
    P = mu.P
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return float(-np.sum(mu.rho * terms.sum(axis=1)))


def expected_value(mu: MarkovMeasure, f: LocalObservable) -> float:
    return math.fsum(mu.cylinder(w) * float(v) for w, v in f.table.items())


def stationary(Q: np.ndarray) -> np.ndarray:
    """Stationary probability vector of an irreducible stochastic matrix."""
    n = Q.shape[0]
    A = np.vstack([Q.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0, None)
    return pi / pi.sum()


def markov_from_transitions(sft: Sft1D, order: int, P: np.ndarray) -> MarkovMeasure:
    """Markov measure with the given context transitions and its stationary law."""
    contexts = sft.words(order)
    P = np.asarray(P, dtype=float)
    if order == 0:
        return MarkovMeasure(sft, 0, contexts, P, np.array([1.0]))
    idx = {u: i for i, u in enumerate(contexts)}
    Q = np.zeros((len(contexts), len(contexts)))
    for i, u in enumerate(contexts):
        for a in range(P.shape[1]):
            if P[i, a] > 0:
                Q[i, idx[(u + (a,))[1:]]] += P[i, a]
    return MarkovMeasure(sft, order, contexts, P, stationary(Q))


def bernoulli(sft: Sft1D, probs: Sequence[float]) -> MarkovMeasure:
    if not sft.is_full:
        raise SymbolicError("Bernoulli measures live on full shifts")
    probs = np.asarray(probs, dtype=float)
    return MarkovMeasure(sft, 0, [()], probs[None, :], np.array([1.0]))


def random_markov_measure(sft: Sft1D, order: int, rng: np.random.Generator) -> MarkovMeasure:
    order = max(order, sft.memory)
    s = len(sft.alphabet)
    allowed = sft.word_set(order + 1)
    contexts = sft.words(order)
    P = np.zeros((len(contexts), s))
    for i, u in enumerate(contexts):
        for a in range(s):
            if (u + (a,)) in allowed:
                P[i, a] = rng.uniform(0.05, 1.0)
    P /= P.sum(axis=1, keepdims=True)
    return markov_from_transitions(sft, order, P)


def pushforward(phi: SlidingBlockMap1D, mu: MarkovMeasure, L: int, cap: int = 1 << 22) -> CylinderTable:
    """Exact cylinder table of the image measure up to length ``L``."""
    if mu.sft != phi.domain:
        raise SymbolicError("measure does not live on the domain of the map")
    if L < 1:
        raise SymbolicError("L must be positive")
    m = phi.window
    N = L + m - 1
    if len(phi.domain.alphabet) ** N > cap:
        raise SymbolicError(f"pushforward length {L} exceeds the enumeration cap")
    acc = {}
    for u, p in mu.level(N).items():
        y = tuple(phi.rule[u[i : i + m]] for i in range(L))
        acc.setdefault(y, []).append(p)
    top = {y: math.fsum(ps) for y, ps in acc.items()}
    return _table_from_top(top, L)


def block_entropies(table: CylinderTable) -> list:
    return [-math.fsum(p * math.log(p) for p in table.levels[n].values() if p > 0)
            for n in range(1, table.max_length + 1)]


def block_entropy_profile(table: CylinderTable) -> list:
    """``(n, H_n / n, H_{n+1} - H_n)`` for ``n = 1 .. L-1``."""
    H = block_entropies(table)
    return [(n, H[n - 1] / n, H[n] - H[n - 1]) for n in range(1, table.max_length)]


@dataclass
class InvarianceReport:
    equal_up_to_L: bool
    first_mismatch: tuple | None  # (length, word, pushed, original)
    max_deviation: float
    L: int
    note: str = "equality of cylinders up to a finite length does not certify invariance"


def compare_tables(a: CylinderTable, b: CylinderTable, tol: float = 1e-9) -> InvarianceReport:
    L = min(a.max_length, b.max_length)
    worst = 0.0
    first = None
    for n in range(1, L + 1):
        for w in sorted(set(a.levels[n]) | set(b.levels[n])):
            pa, pb = a.levels[n].get(w, 0.0), b.levels[n].get(w, 0.0)
            d = abs(pa - pb)
            worst = max(worst, d)
            if d > tol and first is None:
                first = (n, w, pa, pb)
    return InvarianceReport(first is None, first, worst, L)


def check_invariance(phi: SlidingBlockMap1D, mu: MarkovMeasure, L: int, tol: float = 1e-9) -> InvarianceReport:
    if not phi.is_ca:
        raise SymbolicError("invariance needs domain = codomain")
    return compare_tables(pushforward(phi, mu, L), cylinder_table(mu, L), tol)
