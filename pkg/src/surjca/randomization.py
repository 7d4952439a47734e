"""Approach to equilibrium under additive binary cellular automata.

For an XOR-type rule the output cell ``(Φ^t x)(0)`` is the parity of the input
cells in a support set (a row of Pascal's triangle mod 2 for neighbourhood
{0, 1}).  Marginals of ``Φ^t π`` for Bernoulli ``π`` then follow from a
character sum over subsets of output cells.  Non-additive rules are only
sampled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gibbs import MarkovMeasure
from .symbolic import SlidingBlockMap1D, SymbolicError


class UnsupportedMap(SymbolicError):
    pass


MAX_EXACT_N = 24


@dataclass
class ParityRow:
    t: int
    start: int  # input cell of bit 0 of ``support``
    support: int  # bitset

    @property
    def cells(self) -> list:
        return [self.start + j for j in range(self.support.bit_length()) if self.support >> j & 1]

    @property
    def weight(self) -> int:
        return self.support.bit_count()


@dataclass
class MarginalDistribution:
    """Law of ``n`` consecutive cells; index = base-|S| code, first cell most significant."""

    n: int
    probs: np.ndarray
    n_symbols: int = 2

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (self.n_symbols ** self.n,):
            raise SymbolicError("probability vector has the wrong length")


def additive_coefficients(phi: SlidingBlockMap1D) -> list:
    """GF(2) coefficients of a binary rule that is the XOR of some of its cells."""
    if not (phi.is_ca and phi.domain.is_full and len(phi.domain.alphabet) == 2):
        raise UnsupportedMap("exact oracle needs a binary full-shift cellular automaton")
    m = phi.window
    coeffs = [phi.rule[tuple(int(i == j) for i in range(m))] for j in range(m)]
    for w, v in phi.rule.items():
        if v != sum(c * a for c, a in zip(coeffs, w)) % 2:
            raise UnsupportedMap("rule is not additive")
    return coeffs


def _poly(coeffs) -> int:
    return sum(1 << j for j, c in enumerate(coeffs) if c)


def _clmul(a: int, b: int) -> int:
    out = 0
    j = 0
    while b:
        if b & 1:
            out ^= a << j
        b >>= 1
        j += 1
    return out


def parity_rows(phi: SlidingBlockMap1D, T: int):
    """Yield the parity rows for ``t = 0 .. T-1``."""
    poly = _poly(additive_coefficients(phi))
    s = 1
    for t in range(T):
        yield ParityRow(t, t * phi.left, s)
        s = _clmul(s, poly)


def parity_row(phi: SlidingBlockMap1D, t: int) -> ParityRow:
    if t < 0:
        raise SymbolicError("t must be non-negative")
    poly = _poly(additive_coefficients(phi))
    s = 1
    for _ in range(t):
        s = _clmul(s, poly)
    return ParityRow(t, t * phi.left, s)


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    h = 1
    while h < len(v):
        v = v.reshape(-1, 2, h)
        a, b = v[:, 0, :].copy(), v[:, 1, :].copy()
        v[:, 0, :], v[:, 1, :] = a + b, a - b
        v = v.reshape(-1)
        h *= 2
    return v


def marginal_from_row(row: ParityRow, p: float, n: int) -> MarginalDistribution:
    if not 1 <= n <= MAX_EXACT_N:
        raise SymbolicError(f"n must lie in 1..{MAX_EXACT_N}")
    q = 1.0 - 2.0 * p
    # subset bit b selects output cell n-1-b, whose support is the row shifted by that cell
    masks = [row.support << (n - 1 - b) for b in range(n)]
    chars = np.empty(2 ** n)
    cur = 0
    chars[0] = 1.0
    for i in range(1, 2 ** n):
        b = (i & -i).bit_length() - 1
        cur ^= masks[b]
        chars[i ^ (i >> 1)] = q ** cur.bit_count()
    probs = _walsh_hadamard(chars) / 2 ** n
    return MarginalDistribution(n, np.clip(probs, 0.0, None))


def exact_marginal(phi: SlidingBlockMap1D, t: int, p: float, n: int) -> MarginalDistribution:
    """Law of ``n`` consecutive cells of ``Φ^t π`` for ``π`` Bernoulli with ``P(1) = p``."""
    return marginal_from_row(parity_row(phi, t), p, n)


def tv_to_uniform(dist: MarginalDistribution) -> float:
    return float(0.5 * np.abs(dist.probs - 1.0 / len(dist.probs)).sum())


def cesaro_marginal(phi: SlidingBlockMap1D, T: int, p: float, n: int) -> MarginalDistribution:
    if T < 1:
        raise SymbolicError("T must be positive")
    acc = np.zeros(2 ** n)
    for row in parity_rows(phi, T):
        acc += marginal_from_row(row, p, n).probs
    return MarginalDistribution(n, acc / T)


@dataclass
class ExactSeries:
    tv: np.ndarray
    cesaro_tv: np.ndarray
    density: np.ndarray  # P(cell = 1)


def exact_series(phi: SlidingBlockMap1D, T: int, p: float, n: int) -> ExactSeries:
    tv = np.empty(T)
    ces = np.empty(T)
    dens = np.empty(T)
    acc = np.zeros(2 ** n)
    q = 1.0 - 2.0 * p
    for row in parity_rows(phi, T):
        probs = marginal_from_row(row, p, n).probs
        acc += probs
        t = row.t
        tv[t] = 0.5 * np.abs(probs - 2.0 ** -n).sum()
        ces[t] = 0.5 * np.abs(acc / (t + 1) - 2.0 ** -n).sum()
        dens[t] = (1.0 - q ** row.weight) / 2.0
    return ExactSeries(tv, ces, dens)


def density_one_diagnostic(series, eps: float) -> float:
    """Fraction of times at which the distance to equilibrium is at most ``eps``."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise SymbolicError("empty series")
    return float(np.count_nonzero(series <= eps) / series.size)


def spike_ratios(tv, ks) -> dict:
    """``tv[2^k]`` over the median of ``tv`` on the open interval ``(2^(k-1), 2^(k+1))``."""
    tv = np.asarray(tv)
    out = {}
    for k in ks:
        lo, hi = 2 ** (k - 1) + 1, 2 ** (k + 1)
        if hi > len(tv):
            raise SymbolicError(f"series too short for k={k}")
        out[k] = float(tv[2 ** k] / np.median(tv[lo:hi]))
    return out


@dataclass
class SampleResult:
    marginal: MarginalDistribution
    density: np.ndarray  # symbol-1 density per time step 0..t
    n_windows: int
    cells: np.ndarray  # final cell counts observed per step
    stderr: np.ndarray  # binomial standard error of each marginal entry


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream; identical across platforms for a given seed."""
    return np.random.Generator(np.random.Philox(seed))


def _initial(init, samples: int, width: int, n_symbols: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(init, MarkovMeasure):
        mu = init
        r = mu.order
        x = np.empty((samples, width), dtype=np.int64)
        ctx = rng.choice(len(mu.contexts), size=samples, p=mu.rho)
        start = np.array([mu.contexts[c] for c in ctx], dtype=np.int64).reshape(samples, r)
        x[:, :r] = start[:, :width]
        cum = np.cumsum(mu.P, axis=1)
        for j in range(r, width):
            if r:
                ci = np.array([mu.context_index[tuple(row)] for row in x[:, j - r : j]])
            else:
                ci = np.zeros(samples, dtype=np.int64)
            u = rng.random(samples)[:, None]
            x[:, j] = (u > cum[ci]).sum(axis=1)
        return x
    probs = np.atleast_1d(np.asarray(init, dtype=float))
    if probs.size == 1:
        probs = np.array([1.0 - probs[0], probs[0]])
    if probs.size != n_symbols:
        raise SymbolicError("initial symbol law has the wrong size")
    return rng.choice(n_symbols, size=(samples, width), p=probs).astype(np.int64)


def sample_orbit(phi: SlidingBlockMap1D, init, t: int, width: int, samples: int, seed: int,
                 n: int = 1) -> SampleResult:
    """Monte-Carlo marginal of ``n`` cells of ``Φ^t π`` and the density trace.

    Every replica is a finite segment shrinking by ``m - 1`` cells per step, so
    no boundary condition enters.  Marginal counts use windows spaced so that
    their light cones do not overlap.
    """
    if not phi.is_ca:
        raise SymbolicError("sampling needs a cellular automaton")
    m = phi.window
    s = len(phi.domain.alphabet)
    cone = t * (m - 1)
    if width < n + cone:
        raise SymbolicError(f"width {width} too small: need at least {n + cone}")
    rng = make_rng(seed)
    x = _initial(init, samples, width, s, rng)
    table = phi.lookup_array()
    dens = np.empty(t + 1)
    cells = np.empty(t + 1, dtype=np.int64)
    dens[0] = np.count_nonzero(x == 1) / x.size
    cells[0] = x.size
    for step in range(1, t + 1):
        L = x.shape[1] - m + 1
        code = np.zeros((samples, L), dtype=np.int64)
        for j in range(m):
            code = code * s + x[:, j : j + L]
        x = table[code]
        dens[step] = np.count_nonzero(x == 1) / x.size
        cells[step] = x.size
    stride = n + cone
    starts = np.arange(0, x.shape[1] - n + 1, stride)
    code = np.zeros((samples, starts.size), dtype=np.int64)
    for j in range(n):
        code = code * s + x[:, starts + j]
    counts = np.bincount(code.ravel(), minlength=s ** n)
    total = counts.sum()
    probs = counts / total
    stderr = np.sqrt(np.maximum(probs * (1 - probs), 1.0 / total) / total)
    return SampleResult(MarginalDistribution(n, probs, s), dens, int(total), cells, stderr)
