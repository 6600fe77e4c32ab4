"""Random codebooks, dithered query sets and trajectory codewords."""

from __future__ import annotations

import struct
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .geometry import Trajectory, wrap
from .seeding import generator

SIZE_CAP = 1 << 31
_TOL = 1e-12
CODEBOOK_MAGIC = b"TSCB"
_HEADER = struct.Struct("<4sQQdQ")


class ArcSet:
    """Finite union of half-open arcs on the unit circle.

    Stored as sorted, disjoint, non-adjacent segments ``[a, b)`` inside
    ``[0, 1]``; an arc crossing 0 is kept as the two pieces ``[a, 1)`` and
    ``[0, b)`` and reported whole by :attr:`arcs`.
    """

    __slots__ = ("_starts", "_ends")

    def __init__(self, segments=()):
        segs = []
        for a, b in segments:
            segs.extend(_split(float(a), float(b)))
        segs.sort()
        merged = []
        for a, b in segs:
            if merged and a <= merged[-1][1] + _TOL:
                if b > merged[-1][1]:
                    merged[-1][1] = b
            else:
                merged.append([a, b])
        self._starts = [a for a, _ in merged]
        self._ends = [b for _, b in merged]

    @classmethod
    def full(cls):
        return cls([(0.0, 1.0)])

    @classmethod
    def from_bins(cls, column, shift: float = 0.0) -> "ArcSet":
        """Union of bins ``[m/M, (m+1)/M)`` with ``column[m] == 1``, rotated by ``shift``."""
        col = np.asarray(column, dtype=np.int8)
        M = len(col)
        if not col.any():
            return cls()
        if col.all():
            return cls.full()
        edges = np.flatnonzero(np.diff(np.concatenate(([0], col, [0]))))
        runs = edges.reshape(-1, 2) / M
        shift = wrap(shift)
        return cls((a + shift, b + shift) for a, b in runs)

    @property
    def segments(self):
        return list(zip(self._starts, self._ends))

    @property
    def arcs(self):
        segs = self.segments
        if len(segs) >= 2 and segs[0][0] <= _TOL and segs[-1][1] >= 1 - _TOL:
            return [(segs[-1][0], segs[0][1])] + segs[1:-1]
        return segs

    def measure(self) -> float:
        return float(sum(b - a for a, b in zip(self._starts, self._ends)))

    def __contains__(self, w) -> bool:
        w = wrap(float(w))
        i = bisect_right(self._starts, w) - 1
        return i >= 0 and w < self._ends[i]

    def complement(self) -> "ArcSet":
        out, prev = [], 0.0
        for a, b in zip(self._starts, self._ends):
            if a > prev + _TOL:
                out.append((prev, a))
            prev = b
        if prev < 1.0 - _TOL:
            out.append((prev, 1.0))
        return ArcSet(out)

    def rotate(self, shift: float) -> "ArcSet":
        shift = wrap(shift)
        return ArcSet((a + shift, b + shift) for a, b in self.segments)

    def is_empty(self) -> bool:
        return not self._starts

    def __eq__(self, other):
        if not isinstance(other, ArcSet) or len(self._starts) != len(other._starts):
            return NotImplemented if not isinstance(other, ArcSet) else False
        return all(
            abs(a - c) <= 1e-9 and abs(b - d) <= 1e-9
            for (a, b), (c, d) in zip(self.segments, other.segments)
        )

    def __repr__(self):
        return f"ArcSet({self.arcs!r})"


def _split(a, b):
    """Map the anticlockwise arc from ``a`` to ``b`` onto segments in [0, 1].

    ``b < a`` denotes an arc through 0; ``b - a >= 1`` is the whole circle.
    """
    if b == a:
        return []
    if b - a >= 1.0 - _TOL:
        return [(0.0, 1.0)]
    aw, bw = wrap(a), wrap(b)
    if aw < bw:
        return [(aw, bw)]
    if bw <= _TOL:
        return [(aw, 1.0)]
    return [(aw, 1.0), (0.0, bw)]


def measure(s: ArcSet) -> float:
    return s.measure()


def contains(s: ArcSet, w: float) -> bool:
    return w in s


def normalize_halfplus(s: ArcSet) -> tuple[ArcSet, bool]:
    """Replace a set of measure above 1/2 by its complement and report the flip."""
    if s.measure() <= 0.5:
        return s, False
    return s.complement(), True


@dataclass(frozen=True)
class Dither:
    A: float
    B: float

    def __post_init__(self):
        if not (0.0 <= self.A < 1.0 and 0.0 <= self.B < 1.0):
            raise ValueError("dither components must lie in [0, 1)")

    def shift(self, n: int) -> float:
        return wrap(self.A + self.B * n)


@dataclass(frozen=True, eq=False)
class Codebook:
    """``M x N`` array of i.i.d. Bern(q) bits, reproducible from ``seed``."""

    bits: np.ndarray
    q: float
    seed: int

    @property
    def M(self):
        return self.bits.shape[0]

    @property
    def N(self):
        return self.bits.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, Codebook)
            and self.q == other.q
            and self.seed == other.seed
            and np.array_equal(self.bits, other.bits)
        )


def draw_codebook(M: int, N: int, q: float, seed: int, cap: int = SIZE_CAP) -> Codebook:
    if M < 1 or N < 1:
        raise ValueError("codebook dimensions must be positive")
    if not 0.0 < q <= 0.5:
        raise ValueError(f"input mass q={q} outside (0, 1/2]")
    if M * N > cap:
        raise ValueError(f"codebook of {M}x{N} bits exceeds cap {cap}")
    rng = generator(seed)
    bits = np.empty((M, N), dtype=np.uint8)
    rows = max(1, (1 << 22) // N)
    # row blocks reproduce a single (M, N) draw in C order
    for lo in range(0, M, rows):
        hi = min(M, lo + rows)
        bits[lo:hi] = rng.random((hi - lo, N)) < q
    return Codebook(bits, float(q), int(seed))


def query_set(cb: Codebook, d: Dither, n: int) -> ArcSet:
    """Union of bins whose column-``n`` bit is 1, rotated by ``A + B n``; ``n`` is 1-based."""
    if not 1 <= n <= cb.N:
        raise ValueError(f"time index {n} outside 1..{cb.N}")
    return ArcSet.from_bins(cb.bits[:, n - 1], d.shift(n))


def trajectory_codeword(cb: Codebook, t: Trajectory) -> np.ndarray:
    if t.M != cb.M or len(t.bins) != cb.N:
        raise ValueError("trajectory and codebook dimensions differ")
    return cb.bits[np.asarray(t.bins), np.arange(cb.N)]


def save_codebook(cb: Codebook, path) -> None:
    header = _HEADER.pack(CODEBOOK_MAGIC, cb.M, cb.N, cb.q, cb.seed)
    body = np.packbits(cb.bits.reshape(-1), bitorder="little").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def load_codebook(path) -> Codebook:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, M, N, q, seed = _HEADER.unpack_from(raw)
    if magic != CODEBOOK_MAGIC:
        raise ValueError("not a codebook file")
    body = np.frombuffer(raw, dtype=np.uint8, offset=_HEADER.size)
    bits = np.unpackbits(body, count=M * N, bitorder="little").reshape(M, N)
    return Codebook(bits, q, seed)
