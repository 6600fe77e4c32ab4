"""Circle arithmetic, bin partitions and enumeration of trajectory codeword indices.

A trajectory is the sequence of bins ``floor(M * ((w0 + v n) mod 1))`` for
``n = 1..N``. Shifting ``w0`` by ``1/M`` adds one to every bin, so the set of
trajectories is closed under cyclic shifts and a :class:`TrajectoryTable`
stores only the canonical patterns whose first bin is 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_CAP = 1 << 28


class CapExceeded(RuntimeError):
    def __init__(self, count, cap):
        super().__init__(f"trajectory count {count} exceeds cap {cap}")
        self.count = count
        self.cap = cap


def wrap(x):
    """Reduce into [0, 1)."""
    if np.ndim(x):
        y = np.mod(x, 1.0)
        y[y >= 1.0] = 0.0
        return y
    y = math.fmod(x, 1.0)
    if y < 0:
        y += 1.0
    return 0.0 if y >= 1.0 else y


def cyclic_distance(a, b):
    d = np.abs(np.asarray(a, float) - np.asarray(b, float)) % 1.0
    d = np.minimum(d, 1.0 - d)
    return d if d.ndim else float(d)


def advance(w0, v, n):
    if np.any(np.asarray(n) < 0):
        raise ValueError("time index must be non-negative")
    return wrap(np.asarray(w0) + np.asarray(v) * np.asarray(n))


def bin_index(w, M: int):
    if M < 1:
        raise ValueError("M must be positive")
    b = np.floor(np.asarray(w, float) * M).astype(np.int64)
    b = np.minimum(b, M - 1)
    return b if b.ndim else int(b)


def bins_for_resolution(N: int, delta: float) -> int:
    """Partition size ceil(N / delta)."""
    return math.ceil(N / delta - 1e-9)


@dataclass(frozen=True)
class Trajectory:
    w0: float
    v: float
    bins: tuple[int, ...]
    M: int


def trajectory_of(w0: float, v: float, N: int, M: int) -> Trajectory:
    if N < 1 or M < 1:
        raise ValueError("N and M must be positive")
    n = np.arange(1, N + 1)
    bins = bin_index(wrap(w0 + v * n), M)
    return Trajectory(wrap(w0), wrap(v), tuple(int(b) for b in bins), M)


def is_close(w0, v, w0p, vp, delta: float, N: int) -> bool:
    """(delta, N)-closeness: positions within delta and velocities within delta / N."""
    if delta <= 0 or N < 1:
        raise ValueError("delta must be positive and N >= 1")
    return bool(cyclic_distance(w0, w0p) <= delta and cyclic_distance(v, vp) <= delta / N)


def count_line_intersections(w0, v, w0p, vp, N: int, tol: float = 1e-12) -> int:
    n = np.arange(1, N + 1)
    d = cyclic_distance(wrap(w0 + v * n), wrap(w0p + vp * n))
    return int(np.count_nonzero(d <= tol))


@dataclass(frozen=True)
class TrajectoryTable:
    """Deduplicated trajectories in shift-canonical form.

    Entry ``k = pattern * M + shift`` has bins ``(patterns[pattern] + shift) % M``
    and representative ``(w0_rep[pattern] + shift / M, v_rep[pattern])``.
    """

    N: int
    M: int
    patterns: np.ndarray
    w0_rep: np.ndarray
    v_rep: np.ndarray
    grid_w: float | None = None
    grid_v: float | None = None

    def __len__(self):
        return len(self.patterns) * self.M

    @property
    def n_patterns(self):
        return len(self.patterns)

    def bins(self, k: int) -> np.ndarray:
        p, u = divmod(int(k), self.M)
        return (self.patterns[p] + u) % self.M

    def representative(self, k: int) -> tuple[float, float]:
        p, u = divmod(int(k), self.M)
        return wrap(float(self.w0_rep[p]) + u / self.M), float(self.v_rep[p])

    def all_bins(self) -> np.ndarray:
        """Materialised (K, N) bin array; only sensible for small tables."""
        u = np.arange(self.M)
        out = (self.patterns[:, None, :] + u[None, :, None]) % self.M
        return out.reshape(-1, self.N)

    def entries(self):
        for k in range(len(self)):
            yield tuple(int(b) for b in self.bins(k)), self.representative(k)


def _canonical(bins, w0, M):
    shift = bins[:, 0].copy()
    pats = (bins - shift[:, None]) % M
    return pats, wrap(w0 - shift / M)


def _dedup(pats, w0, v):
    # keep first occurrence in sweep order
    _, first = np.unique(pats, axis=0, return_index=True)
    first.sort()
    return pats[first], w0[first], v[first]


def _critical_velocities(N, M):
    """Velocities j/(M d), d < N, where two bin boundaries cross; sorted, unique."""
    crit = {0.0}
    for d in range(1, N):
        for j in range(1, M * d):
            if math.gcd(j, d) == 1:
                crit.add(j / (M * d))
    return np.array(sorted(crit))


def _sweep_exact(N, M, cap=None):
    """One representative per cell of the exact line arrangement with first bin 0.

    Between consecutive critical velocities the breakpoints of x1 = w0 + v in
    [0, 1/M) keep their order, so the cells are found by sorting them per slab.
    Slabs are visited in increasing velocity, cells in increasing position.
    Returns deduplicated patterns. With ``cap`` the sweep stops early, raising
    CapExceeded with the partial count, once the distinct entries exceed it.
    """
    crit = _critical_velocities(N, M)
    hi = np.append(crit[1:], 1.0)
    vs = 0.5 * (crit + hi)
    S = M * vs
    n1 = np.arange(N)
    pats_out, x_out, v_out = [], [], []
    raw = 0
    chunk = max(1, 200_000 // max(N * N, 1))
    for lo in range(0, len(vs), chunk):
        s = S[lo:lo + chunk]
        # breakpoints of X = M*x1 in [0, 1): X = -s*(n-1) mod 1
        bp = np.mod(-s[:, None] * n1[None, 1:], 1.0)
        bp = np.concatenate([np.zeros((len(s), 1)), bp, np.ones((len(s), 1))], axis=1)
        bp.sort(axis=1)
        mids = 0.5 * (bp[:, :-1] + bp[:, 1:])
        width = bp[:, 1:] - bp[:, :-1]
        keep = width > 1e-12
        srow = np.broadcast_to(s[:, None], mids.shape)[keep]
        X = mids[keep]
        pats = np.floor(X[:, None] + srow[:, None] * n1[None, :]).astype(np.int64) % M
        pats_out.append(pats)
        x_out.append(X / M)
        v_out.append(srow / M)
        raw += len(pats)
        if cap is not None and raw * M > cap:
            # raw cells overcount; consolidate before deciding
            p_, x_, v_ = _dedup(np.concatenate(pats_out), np.concatenate(x_out), np.concatenate(v_out))
            pats_out, x_out, v_out = [p_], [x_], [v_]
            raw = len(p_)
            if raw * M > cap:
                raise CapExceeded(raw * M, cap)
    pats = np.concatenate(pats_out)
    x1 = np.concatenate(x_out)
    v = np.concatenate(v_out)
    return _dedup(pats, wrap(x1 - v), v)


def _sweep_grid(N, M, grid_w, grid_v, velocities=None):
    ws = np.arange(0.0, 1.0, grid_w)
    vs = np.asarray(velocities, float) if velocities is not None else np.arange(0.0, 1.0, grid_v)
    n = np.arange(1, N + 1)
    pats_out, w_out, v_out = [], [], []
    seen = set()
    for v in vs:
        bins = bin_index(wrap(ws[:, None] + v * n[None, :]), M)
        pats, w0c = _canonical(bins, ws, M)
        pats, w0c, vv = _dedup(pats, w0c, np.full(len(ws), v))
        fresh = []
        for i, row in enumerate(map(bytes, pats.astype(np.int32))):
            if row not in seen:
                seen.add(row)
                fresh.append(i)
        if fresh:
            pats_out.append(pats[fresh])
            w_out.append(w0c[fresh])
            v_out.append(vv[fresh])
    return np.concatenate(pats_out), np.concatenate(w_out), np.concatenate(v_out)


def enumerate_trajectories(
    N: int,
    M: int,
    grid_w: float | None = None,
    grid_v: float | None = None,
    *,
    velocities=None,
    cap: int = DEFAULT_CAP,
) -> TrajectoryTable:
    """Distinct trajectories of length ``N`` over ``M`` bins.

    With no grids the exact arrangement is swept. With ``grid_w`` and
    ``grid_v`` the (w0, v) product grid is swept instead, which can miss thin
    cells when the grid is coarse. ``velocities`` restricts v to the listed
    values (e.g. ``[0.0]`` for a known velocity) and sweeps w0 on ``grid_w``.
    """
    if N < 1 or M < 1:
        raise ValueError("N and M must be positive")
    if velocities is not None:
        grid_w = grid_w if grid_w is not None else 1.0 / (4 * M)
        if list(velocities) == [0.0] or list(velocities) == [0]:
            pats = np.zeros((1, N), dtype=np.int64)
            t = TrajectoryTable(N, M, pats, np.array([0.5 / M]), np.array([0.0]), grid_w, None)
        else:
            pats, w0, v = _sweep_grid(N, M, grid_w, None, velocities)
            t = TrajectoryTable(N, M, pats, w0, v, grid_w, None)
    elif grid_w is None and grid_v is None:
        pats, w0, v = _sweep_exact(N, M, cap)
        t = TrajectoryTable(N, M, pats, w0, v)
    else:
        if grid_w is None or grid_v is None:
            raise ValueError("grid_w and grid_v must be given together")
        pats, w0, v = _sweep_grid(N, M, grid_w, grid_v)
        t = TrajectoryTable(N, M, pats, w0, v, grid_w, grid_v)
    if len(t) > cap:
        raise CapExceeded(len(t), cap)
    return TrajectoryTable(t.N, t.M, np.ascontiguousarray(t.patterns, dtype=np.int32), t.w0_rep, t.v_rep, t.grid_w, t.grid_v)


def growth_exponent(M: int, N: int, ns=None) -> float:
    """Least-squares slope of log(K / M^2) against log(n) over n in ``ns``."""
    ns = list(ns) if ns is not None else [n for n in range(2, N + 1)]
    ns = [n for n in ns if n >= 2]
    if len(ns) < 2:
        return float("nan")
    ks = [len(enumerate_trajectories(n, M)) / M**2 for n in ns]
    return float(np.polyfit(np.log(ns), np.log(ks), 1)[0])


def write_table_csv(table: TrajectoryTable, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["seq_id", "w0_rep", "v_rep", "bins"])
    for k in range(len(table)):
        w0, v = table.representative(k)
        w.writerow([k, f"{w0:.9f}", f"{v:.9f}", ";".join(str(int(b)) for b in table.bins(k))])
