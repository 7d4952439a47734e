"""Finite-torus two-dimensional models: Q2R dynamics, Ising energy and the
Ising-to-contour factor map.

Spins are boolean arrays (``True`` = ``+``) indexed ``[row, col]``, rows
growing downward.  Site ``(i, j)`` is even when ``(i + j) % 2 == 0``.

Contour symbols are 4-bit port masks N=1, E=2, S=4, W=8.  The contour cell at
``(i, j)`` sits at the centre of the spin block ``(i..i+1, j..j+1)``; a port is
on when the two spins separated by that half-edge of the dual lattice differ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N, E, S, W = 1, 2, 4, 8

CONTOUR_MASKS = {
    "empty": 0,
    "H": E | W,
    "V": N | S,
    "LD": W | S,
    "RD": E | S,
    "RU": E | N,
    "LU": W | N,
    "X": N | E | S | W,
}
CONTOUR_NAMES = {v: k for k, v in CONTOUR_MASKS.items()}
# contour length observable: half the number of ports
CONTOUR_LENGTH = {mask: bin(mask).count("1") // 2 for mask in CONTOUR_NAMES}

# 2x2 blocks (top-left, top-right, bottom-left, bottom-right) -> contour symbol
CONTOUR_RULE = {
    "++++": "empty", "+++-": "RD", "++-+": "LD", "++--": "H",
    "+-++": "RU", "+-+-": "V", "+--+": "X", "+---": "LU",
    "----": "empty", "---+": "RD", "--+-": "LD", "--++": "H",
    "-+--": "RU", "-+-+": "V", "-++-": "X", "-+++": "LU",
}


class LatticeError(ValueError):
    pass


@dataclass
class TorusConfig2D:
    cells: np.ndarray  # bool, True = "+"

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=bool)
        if self.cells.ndim != 2 or min(self.cells.shape) < 2:
            raise LatticeError("torus needs at least 2x2 cells")

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @classmethod
    def uniform(cls, height: int, width: int, up: bool = True) -> TorusConfig2D:
        return cls(np.full((height, width), up))

    @classmethod
    def checkerboard(cls, height: int, width: int) -> TorusConfig2D:
        i, j = np.indices((height, width))
        return cls((i + j) % 2 == 0)

    @classmethod
    def bernoulli(cls, height: int, width: int, p_up: float, rng: np.random.Generator) -> TorusConfig2D:
        return cls(rng.random((height, width)) < p_up)

    @classmethod
    def from_text(cls, text: str) -> TorusConfig2D:
        rows = [r.strip() for r in text.splitlines() if r.strip()]
        if any(set(r) - {"+", "-"} for r in rows):
            raise LatticeError("spin grids use only '+' and '-'")
        if len({len(r) for r in rows}) != 1:
            raise LatticeError("ragged spin grid")
        return cls(np.array([[c == "+" for c in r] for r in rows]))

    def to_text(self) -> str:
        return "\n".join("".join("+" if v else "-" for v in row) for row in self.cells) + "\n"

    def copy(self) -> TorusConfig2D:
        return TorusConfig2D(self.cells.copy())

    def __eq__(self, other):
        return isinstance(other, TorusConfig2D) and np.array_equal(self.cells, other.cells)


@dataclass
class ContourConfig2D:
    masks: np.ndarray  # uint8 port masks

    def names(self) -> list:
        return [[CONTOUR_NAMES[int(v)] for v in row] for row in self.masks]

    def to_text(self) -> str:
        return "\n".join(" ".join(r) for r in self.names()) + "\n"

    @classmethod
    def from_names(cls, rows) -> ContourConfig2D:
        return cls(np.array([[CONTOUR_MASKS[n] for n in r] for r in rows], dtype=np.uint8))


def _two_two(x: np.ndarray) -> np.ndarray:
    """Sites whose four neighbours split 2-2, by carry-save addition of the shifted planes."""
    a = np.roll(x, 1, axis=0)
    b = np.roll(x, -1, axis=0)
    c = np.roll(x, 1, axis=1)
    d = np.roll(x, -1, axis=1)
    s1, c1 = a ^ b, a & b
    s2, c2 = c ^ d, c & d
    ones = s1 ^ s2
    twos = c1 ^ c2 ^ (s1 & s2)
    fours = c1 & c2
    return ~ones & twos & ~fours


def _parity_masks(shape):
    i, j = np.indices(shape)
    even = (i + j) % 2 == 0
    return even, ~even


def _check_even(c: TorusConfig2D):
    if c.height % 2 or c.width % 2:
        raise LatticeError("Q2R needs even torus dimensions")


def _phase(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return x ^ (_two_two(x) & mask)


def q2r_step(c: TorusConfig2D) -> TorusConfig2D:
    _check_even(c)
    even, odd = _parity_masks(c.cells.shape)
    return TorusConfig2D(_phase(_phase(c.cells, even), odd))


def q2r_inverse_step(c: TorusConfig2D) -> TorusConfig2D:
    _check_even(c)
    even, odd = _parity_masks(c.cells.shape)
    return TorusConfig2D(_phase(_phase(c.cells, odd), even))


class Q2RSimulator:
    """In-place Q2R stepping with preallocated parity masks."""

    def __init__(self, c: TorusConfig2D):
        _check_even(c)
        self.x = c.cells.copy()
        self.even, self.odd = _parity_masks(self.x.shape)
        self.t = 0

    def step(self, n: int = 1):
        for _ in range(n):
            self.x ^= _two_two(self.x) & self.even
            self.x ^= _two_two(self.x) & self.odd
            self.t += 1

    def back(self, n: int = 1):
        for _ in range(n):
            self.x ^= _two_two(self.x) & self.odd
            self.x ^= _two_two(self.x) & self.even
            self.t -= 1

    @property
    def config(self) -> TorusConfig2D:
        return TorusConfig2D(self.x.copy())


def _cells(c) -> np.ndarray:
    return c.cells if isinstance(c, TorusConfig2D) else np.asarray(c, dtype=bool)


def ising_energy(c) -> int:
    """Number of anti-aligned nearest-neighbour pairs on the torus."""
    x = _cells(c)
    return int(np.count_nonzero(x != np.roll(x, 1, axis=0)) + np.count_nonzero(x != np.roll(x, 1, axis=1)))


def ising_f_total(c) -> int:
    """Sum over sites of the Ising observable ``(n_opposite - n_same) / 2``; an integer on tori."""
    x = _cells(c)
    bonds = 2 * x.size
    anti = ising_energy(x)
    return anti - (bonds - anti)


def magnetization(c) -> int:
    x = _cells(c)
    return int(2 * np.count_nonzero(x) - x.size)


def contour_map(c) -> ContourConfig2D:
    x = _cells(c)
    tl = x
    tr = np.roll(x, -1, axis=1)
    bl = np.roll(x, -1, axis=0)
    br = np.roll(bl, -1, axis=1)
    masks = ((tl != tr) * N + (tr != br) * E + (bl != br) * S + (tl != bl) * W).astype(np.uint8)
    return ContourConfig2D(masks)


def contour_map_table(c) -> ContourConfig2D:
    """Slow reference: look every 2x2 block up in the 16-entry rule table."""
    x = _cells(c)
    h, w = x.shape
    out = np.zeros((h, w), dtype=np.uint8)
    sym = lambda v: "+" if v else "-"
    for i in range(h):
        for j in range(w):
            key = sym(x[i, j]) + sym(x[i, (j + 1) % w]) + sym(x[(i + 1) % h, j]) + sym(x[(i + 1) % h, (j + 1) % w])
            out[i, j] = CONTOUR_MASKS[CONTOUR_RULE[key]]
    return ContourConfig2D(out)


def is_valid_contour(y: ContourConfig2D) -> bool:
    m = np.asarray(y.masks)
    if not np.all(np.isin(m, list(CONTOUR_NAMES))):
        return False
    east = (m & E) > 0
    west_of_right = (np.roll(m, -1, axis=1) & W) > 0
    south = (m & S) > 0
    north_of_below = (np.roll(m, -1, axis=0) & N) > 0
    return bool(np.array_equal(east, west_of_right) and np.array_equal(south, north_of_below))


def contour_length(y: ContourConfig2D) -> int:
    m = np.asarray(y.masks).astype(np.int64)
    return int(sum(np.count_nonzero(m & bit) for bit in (N, E, S, W)) // 2)


def delta_ratio_check(x, y):
    """``(Δ_f, Δ_{g∘Θ})`` between two spin configurations of the same torus."""
    xa, ya = _cells(x), _cells(y)
    if xa.shape != ya.shape:
        raise LatticeError("configurations have different dimensions")
    d_ising = ising_f_total(ya) - ising_f_total(xa)
    d_contour = contour_length(contour_map(ya)) - contour_length(contour_map(xa))
    return d_ising, d_contour


def block_distribution(c, n: int = 2) -> np.ndarray:
    """Empirical law of the n x n spin blocks over all torus positions (index = bits row-major)."""
    x = _cells(c)
    code = np.zeros(x.shape, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            code = code * 2 + np.roll(np.roll(x, -i, axis=0), -j, axis=1)
    counts = np.bincount(code.ravel(), minlength=2 ** (n * n))
    return counts / counts.sum()


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return float(0.5 * np.abs(np.asarray(p) - np.asarray(q)).sum())
