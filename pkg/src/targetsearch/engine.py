"""Search strategies against a simulated moving target, and the Monte Carlo harness."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import infotheory as it
from .coding import ArcSet, Codebook, draw_codebook, normalize_halfplus
from .geometry import (
    CapExceeded,
    DEFAULT_CAP,
    TrajectoryTable,
    bins_for_resolution,
    cyclic_distance,
    enumerate_trajectories,
    wrap,
)
from .kernels import scan_patterns
from .noise import NoiseModel, noise_at
from .seeding import derive, generator

KNOWN = "known"
UNKNOWN = "unknown"
STRATEGIES = ("nonadaptive", "forney", "yi", "two_phase")
WILSON_Z = 1.959963984540054


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@lru_cache(maxsize=64)
def _optimal_q(model: NoiseModel, kappa: float):
    return it.optimal_q(model, kappa)


def zoom_model(model: NoiseModel, alpha: float) -> NoiseModel:
    """Noise seen by a set of relative measure ``s`` inside a window of length ``alpha``."""
    if model.kind == "constant":
        return model
    if model.kind == "linear":
        return NoiseModel.linear(model.p0, float(model(alpha / 2)))
    knots = [(s / alpha, p) for s, p in model.knots]
    return NoiseModel.table(knots)


@dataclass(frozen=True)
class SearchParams:
    N: int
    model: NoiseModel
    delta: float | None = None
    R: float | None = None
    kappa_mode: str = UNKNOWN
    eps_slack: float = 0.02
    T: float = 0.0
    lam: float | None = None
    alpha: float = 0.1
    eta: float | None = None
    max_retries: int = 32
    seed: int = 0
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ConfigError("N", "must be a positive integer")
        if self.delta is None and self.R is None:
            raise ConfigError("delta", "give either delta or R")
        if self.R is not None and self.R <= 0:
            raise ConfigError("R", "must be positive")
        if self.delta is None:
            object.__setattr__(self, "delta", 2.0 ** (-self.N * self.R))
        elif self.R is None:
            if not 0.0 < self.delta < 1.0:
                raise ConfigError("delta", "must lie in (0, 1)")
            object.__setattr__(self, "R", math.log2(1.0 / self.delta) / self.N)
        elif not math.isclose(self.delta, 2.0 ** (-self.N * self.R), rel_tol=1e-9):
            raise ConfigError("delta", "inconsistent with R (delta = 2^(-N R))")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta", "must lie in (0, 1)")
        if self.kappa_mode not in (KNOWN, UNKNOWN):
            raise ConfigError("kappa_mode", f"must be {KNOWN!r} or {UNKNOWN!r}")
        if self.eps_slack < 0:
            raise ConfigError("eps_slack", "must be non-negative")
        if self.T < 0:
            raise ConfigError("T", "must be non-negative")
        if self.lam is not None and self.lam < 0:
            raise ConfigError("lam", "must be non-negative")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError("alpha", "must lie in (0, 1/2)")
        if self.max_retries < 0:
            raise ConfigError("max_retries", "must be non-negative")
        if self.eta is not None:
            top = 0.5 - self.p_validate
            if not 0.0 < self.eta < top:
                raise ConfigError("eta", f"must lie in (0, {top:.6f})")

    @property
    def kappa(self) -> float:
        return 1.0 if self.kappa_mode == KNOWN else 0.5

    @property
    def M(self) -> int:
        return bins_for_resolution(self.N, self.delta)

    @property
    def q_star(self) -> float:
        return float(_optimal_q(self.model, self.kappa)[0])

    @property
    def rate_star(self) -> float:
        return float(_optimal_q(self.model, self.kappa)[1])

    @property
    def p_validate(self) -> float:
        """Crossover when probing a delta-interval."""
        s = min(self.delta, 1.0 - self.delta)
        return float(self.model(s))

    @property
    def eta_value(self) -> float:
        return self.eta if self.eta is not None else (0.5 - self.p_validate) / 4

    def lam_for(self, strategy: str) -> float:
        if self.lam is not None:
            return self.lam
        if strategy == "two_phase":
            return 0.8
        _, rate = _optimal_q(self.model, 1.0)
        return self.kappa * rate / self.R - 1.0


@dataclass
class TrialOutcome:
    w_hat: float
    v_hat: float
    w_true: float
    v_true: float
    success: bool
    close: bool
    tau: int
    retries: int = 0
    erasures: int = 0
    capped: bool = False
    first_repeated: bool = False
    attempts: int = 1
    oversized: int = 0
    ties: int = 0
    max_probe_measure: float = 0.0


@dataclass
class DecodeResult:
    index: int
    distance: int
    margin: int
    tie: bool
    hist: np.ndarray = field(repr=False)


def run_query(w_n: float, s: ArcSet, flip: bool, model: NoiseModel, rng: np.random.Generator) -> int:
    """One noisy answer: membership of ``w_n`` in ``s`` XOR ``flip``, through BSC(p[|s|])."""
    m = s.measure()
    p = model.p0 if m <= 0 else noise_at(model, m)
    x = int(w_n in s) ^ int(flip)
    return x ^ int(rng.random() < p)


def _observe(bits, pos_bins, model, q_star, eps_slack, rng, outside_flip=False):
    """Noisy statistics for a non-adaptive block of queries.

    ``bits`` is the (M, L) codebook, ``pos_bins[n]`` the target's bin in the
    query frame at time n (``-1`` when the target lies outside the probed
    window). Columns above measure 1/2 are complemented before probing and the
    answer flipped back. Observations taken on sets smaller than
    ``q_star + eps_slack`` are topped up with extra noise so that every
    statistic has crossover ``p[q_star + eps_slack]``.
    Returns ``(y, probed_measures, oversized_count)``.
    """
    M, L = bits.shape
    frac = bits.sum(axis=0) / M
    flip = frac > 0.5
    probed = np.where(flip, 1.0 - frac, frac)
    cols = np.arange(L)
    inside = pos_bins >= 0
    x = np.where(inside, bits[np.where(inside, pos_bins, 0), cols], flip.astype(np.uint8) if outside_flip else 0)
    p = np.where(probed > 0, model(np.maximum(probed, 1e-300)), model.p0)
    target_mass = min(q_star + eps_slack, 0.5)
    p_target = float(model(target_mass))
    aux = np.where((probed < target_mass) & (p < p_target), (p_target - p) / np.maximum(1 - 2 * p, 1e-300), 0.0)
    z = rng.random(L) < p
    z2 = rng.random(L) < aux
    y = (x.astype(np.uint8) ^ z ^ z2).astype(np.uint8)
    return y, probed, int(np.count_nonzero(probed > target_mass + 1e-12))


def _scan(table_patterns, bits, y):
    E = np.ascontiguousarray((bits ^ y[None, :]).T, dtype=np.uint8)
    best_k, best_d, second_d, hist = scan_patterns(E, table_patterns)
    margin = (second_d - best_d) if second_d >= 0 else bits.shape[1] + 1
    return DecodeResult(int(best_k), int(best_d), int(margin), second_d == best_d, hist)


def ml_decode(table: TrajectoryTable, cb: Codebook, y, p_assumed: float) -> DecodeResult:
    """Entry whose codeword is nearest to ``y`` in Hamming distance, lowest index on ties.

    For ``p_assumed < 1/2`` the nearest codeword is the maximum-likelihood one.
    """
    if len(table) == 0:
        raise ValueError("empty trajectory table")
    if not 0 <= p_assumed <= 0.5:
        raise ValueError("assumed crossover must lie in [0, 1/2]")
    if table.M != cb.M or table.N != cb.N:
        raise ValueError("table and codebook dimensions differ")
    return _scan(table.patterns, cb.bits, np.asarray(y, dtype=np.uint8))


def _log2_sum(terms):
    terms = np.asarray(terms, float)
    finite = terms[np.isfinite(terms)]
    if finite.size == 0:
        return -math.inf
    top = finite.max()
    return float(top + np.log2(np.exp2(finite - top).sum()))


def forney_log_ratio(hist, best_d: int, N: int, p: float) -> float:
    """log2 of P(y|best) / sum of P(y|others), from the distance histogram."""
    d = np.arange(len(hist))
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.where(d > 0, d * np.log2(p), 0.0) + np.where(N - d > 0, (N - d) * np.log2(1 - p), 0.0)
    rest = np.asarray(hist, float).copy()
    rest[best_d] -= 1
    with np.errstate(divide="ignore"):
        others = _log2_sum(np.where(rest > 0, np.log2(np.maximum(rest, 1e-300)) + lp, -np.inf))
    return float(lp[best_d] - others)


def forney_test(dec: DecodeResult, N: int, p: float, T: float) -> bool:
    if dec.tie:
        return False
    return forney_log_ratio(dec.hist, dec.distance, N, p) >= N * T


def forney_decode(table: TrajectoryTable, cb: Codebook, y, p_assumed: float, T: float):
    """Declared entry index, or ``None`` for an erasure."""
    if T < 0:
        raise ValueError("threshold must be non-negative")
    dec = ml_decode(table, cb, y, p_assumed)
    return dec.index if forney_test(dec, cb.N, p_assumed, T) else None


def yi_validate(interval: ArcSet, rounds: int, model: NoiseModel, eta: float, rng: np.random.Generator, target) -> bool:
    """Probe ``interval`` ``rounds`` times; accept when the share of ones is typical.

    ``target`` is the target's position in the interval's frame, either fixed
    or one value per round. Acceptance needs a fraction of ones of at least
    ``1 - p[|interval|] - eta``.
    """
    if rounds < 1:
        raise ValueError("rounds must be positive")
    s, flip = normalize_halfplus(interval)
    m = s.measure()
    p = model.p0 if m <= 0 else float(model(m))
    if not 0 < eta < 0.5 - p:
        raise ValueError(f"eta must lie in (0, {0.5 - p})")
    pos = np.broadcast_to(np.asarray(target, float), (rounds,))
    x = np.fromiter((w in s for w in pos), dtype=np.uint8, count=rounds) ^ np.uint8(flip)
    y = x ^ (rng.random(rounds) < p)
    return bool(y.mean() >= 1.0 - p - eta - 1e-12)


def centered_interval(delta: float) -> ArcSet:
    return ArcSet([(1.0 - delta / 2, delta / 2)])


@lru_cache(maxsize=8)
def trajectory_table(N: int, M: int, kappa_mode: str, cap: int = DEFAULT_CAP) -> TrajectoryTable:
    if kappa_mode == KNOWN:
        return enumerate_trajectories(N, M, velocities=[0.0], cap=cap)
    return enumerate_trajectories(N, M, cap=cap)


@dataclass
class _Attempt:
    w_end: float
    v_hat: float
    dec: DecodeResult
    oversized: int
    max_probe: float


def _nonadaptive_attempt(params: SearchParams, table, w_start, v, seed, a) -> _Attempt:
    N, M = params.N, params.M
    q = params.q_star
    cb = draw_codebook(M, N, q, derive(seed, "codebook", a))
    drng = generator(seed, "dither", a)
    A, B = drng.random(), drng.random()
    n = np.arange(1, N + 1)
    w = wrap(w_start + v * n)
    frame_v = v if params.kappa_mode == KNOWN else B
    u = wrap(w - A - frame_v * n)
    pos = np.minimum(np.floor(u * M).astype(np.int64), M - 1)
    y, probed, oversized = _observe(cb.bits, pos, params.model, q, params.eps_slack, generator(seed, "noise", a))
    dec = _scan(table.patterns, cb.bits, y)
    w0r, vr = table.representative(dec.index)
    if params.kappa_mode == KNOWN:
        w0_hat, v_hat = wrap(w0r + A), v
    else:
        w0_hat, v_hat = wrap(w0r + A), wrap(vr + B)
    return _Attempt(wrap(w0_hat + v_hat * N), v_hat, dec, oversized, float(probed.max()))


def _finish(params, w_hat, v_hat, w0, v, tau, **kw) -> TrialOutcome:
    w_true = wrap(w0 + v * tau)
    dw = cyclic_distance(w_hat, w_true)
    dv = cyclic_distance(v_hat, v)
    success = max(dw, dv) <= params.delta
    close = dw <= params.delta and dv <= params.delta / params.N
    return TrialOutcome(w_hat, v_hat, w_true, v, bool(success), bool(close), int(tau), **kw)


def _table_for(params):
    return trajectory_table(params.N, params.M, params.kappa_mode, params.cap)


def strategy_nonadaptive(params: SearchParams, truth, seed: int) -> TrialOutcome:
    """Single block of ``N`` dithered codebook queries followed by trajectory ML decoding."""
    w0, v = truth
    att = _nonadaptive_attempt(params, _table_for(params), w0, v, seed, 0)
    return _finish(
        params, att.w_end, att.v_hat, w0, v, params.N,
        oversized=att.oversized, ties=int(att.dec.tie), max_probe_measure=att.max_probe,
    )


def _p_assumed(params):
    return float(params.model(min(params.q_star + params.eps_slack, 0.5)))


def strategy_forney(params: SearchParams, truth, seed: int) -> TrialOutcome:
    """Repeat the non-adaptive block until the likelihood-ratio test declares."""
    w0, v = truth
    table = _table_for(params)
    N, p = params.N, _p_assumed(params)
    erasures = oversized = ties = 0
    first_repeated = False
    for a in range(params.max_retries + 1):
        att = _nonadaptive_attempt(params, table, wrap(w0 + v * a * N), v, seed, a)
        oversized += att.oversized
        ties += int(att.dec.tie)
        if forney_test(att.dec, N, p, params.T):
            capped = False
            break
        erasures += 1
        first_repeated = first_repeated or a == 0
    else:
        capped = True
    attempts = a + 1
    return _finish(
        params, att.w_end, att.v_hat, w0, v, N * attempts,
        retries=attempts - 1, erasures=erasures, capped=capped, first_repeated=first_repeated,
        attempts=attempts, oversized=oversized, ties=ties,
    )


def strategy_yi(params: SearchParams, truth, seed: int) -> TrialOutcome:
    """Non-adaptive block, then probe the estimated delta-interval; restart on rejection."""
    validate_strategy("yi", params)
    lam = params.lam_for("yi")
    w0, v = truth
    table = _table_for(params)
    N = params.N
    rounds = max(1, round(lam * N))
    block = N + rounds
    interval = centered_interval(params.delta)
    eta = params.eta_value
    rejections = oversized = 0
    first_repeated = False
    for a in range(params.max_retries + 1):
        t0 = a * block
        att = _nonadaptive_attempt(params, table, wrap(w0 + v * t0), v, seed, a)
        oversized += att.oversized
        r = np.arange(1, rounds + 1)
        rel = wrap(w0 + v * (t0 + N + r) - (att.w_end + att.v_hat * r))
        if yi_validate(interval, rounds, params.model, eta, generator(seed, "validate", a), rel):
            capped = False
            break
        rejections += 1
        first_repeated = first_repeated or a == 0
    else:
        capped = True
    attempts = a + 1
    w_hat = wrap(att.w_end + att.v_hat * rounds)
    return _finish(
        params, w_hat, att.v_hat, w0, v, block * attempts,
        retries=attempts - 1, erasures=rejections, capped=capped, first_repeated=first_repeated,
        attempts=attempts, oversized=oversized,
    )


def two_phase_lengths(N: int, lam: float) -> tuple[int, int, int]:
    """Queries spent on the coarse search, the zoomed search and validation."""
    L1 = round(math.log2(N))
    L2 = round(lam * N) - L1
    V = N - L1 - L2
    if L1 < 1 or L2 < 1 or V < 1:
        raise ConfigError("lam", f"phase lengths ({L1}, {L2}, {V}) must all be positive for N={N}")
    return L1, L2, V


_ROW = np.zeros((1, 1), dtype=np.int32)


def _row_search(bits, u_rel, model, q, eps_slack, rng, window=1.0):
    """Row-decoded non-adaptive search for a stationary target.

    ``u_rel`` is the target's coordinate in the window frame (in [0, 1) when
    inside). Returns ``(row, y, probed)`` with measures in window units.
    """
    M, L = bits.shape
    if 0.0 <= u_rel < 1.0:
        pos = np.full(L, min(int(u_rel * M), M - 1), dtype=np.int64)
    else:
        pos = np.full(L, -1, dtype=np.int64)
    y, probed, _ = _observe(bits, pos, model, q, eps_slack, rng, outside_flip=True)
    dec = _scan(np.zeros((1, L), dtype=np.int32), bits, y)
    return dec.index, probed * window


def strategy_two_phase(params: SearchParams, truth, seed: int) -> TrialOutcome:
    """Coarse search to resolution alpha, zoomed search to delta, then validation."""
    validate_strategy("two_phase", params)
    lam = params.lam_for("two_phase")
    N, alpha, delta = params.N, params.alpha, params.delta
    L1, L2, V = two_phase_lengths(N, lam)
    w0, v = truth
    model = params.model
    q1 = float(_optimal_q(model, 1.0)[0])
    zmodel = zoom_model(model, alpha)
    q2 = float(_optimal_q(zmodel, 1.0)[0])
    M1 = math.ceil(L1 / alpha - 1e-9)
    M2 = math.ceil(L2 * alpha / delta - 1e-9)
    interval = centered_interval(delta)
    eta = params.eta_value
    rejections = 0
    first_repeated = False
    max_probe = 0.0
    # co-moving frame: the target sits at w0 for the whole search
    for a in range(params.max_retries + 1):
        d = generator(seed, "dither", a)
        A1, A2 = d.random(), d.random()
        cb1 = draw_codebook(M1, L1, q1, derive(seed, "codebook1", a))
        m1, _ = _row_search(cb1.bits, wrap(w0 - A1), model, q1, params.eps_slack, generator(seed, "noise1", a))
        start = wrap(A1 + (m1 + 0.5) / M1 - alpha / 2)
        cb2 = draw_codebook(M2, L2, q2, derive(seed, "codebook2", a))
        rel = wrap(w0 - start)
        z = wrap(rel / alpha - A2) if rel < alpha else -1.0
        m2, probed = _row_search(cb2.bits, z, zmodel, q2, params.eps_slack, generator(seed, "noise2", a), alpha)
        max_probe = max(max_probe, float(probed.max()))
        u_hat = wrap(start + alpha * wrap(A2 + (m2 + 0.5) / M2))
        if yi_validate(interval, V, model, eta, generator(seed, "validate", a), wrap(w0 - u_hat)):
            capped = False
            break
        rejections += 1
        first_repeated = first_repeated or a == 0
    else:
        capped = True
    attempts = a + 1
    tau = N * attempts
    return _finish(
        params, wrap(u_hat + v * tau), v, w0, v, tau,
        retries=attempts - 1, erasures=rejections, capped=capped, first_repeated=first_repeated,
        attempts=attempts, max_probe_measure=max_probe,
    )


STRATEGY_FUNCS = {
    "nonadaptive": strategy_nonadaptive,
    "forney": strategy_forney,
    "yi": strategy_yi,
    "two_phase": strategy_two_phase,
}


def validate_strategy(strategy: str, params: SearchParams) -> None:
    """Raise ConfigError for a strategy and parameter combination that cannot run."""
    if strategy not in STRATEGY_FUNCS:
        raise ConfigError("strategy", f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    if strategy == "forney" and params.max_retries < 1:
        raise ConfigError("max_retries", "must be at least 1 for erasure decoding")
    if strategy == "yi":
        lam = params.lam_for("yi")
        if lam <= 0:
            raise ConfigError("lam", f"validation fraction must be positive (default gives {lam:.4f}; R too high)")
    if strategy == "two_phase":
        if params.kappa_mode != KNOWN:
            raise ConfigError("kappa_mode", "two-phase search needs a known velocity")
        lam = params.lam_for("two_phase")
        if not 0 < lam < 1:
            raise ConfigError("lam", "must lie in (0, 1) for two-phase search")
        two_phase_lengths(params.N, lam)


def reported_settings(strategy: str, params: SearchParams) -> tuple[float, float, float]:
    """The (T, lambda, alpha) triple a strategy actually uses; zero where unused."""
    T = params.T if strategy == "forney" else 0.0
    lam = params.lam_for(strategy) if strategy in ("yi", "two_phase") else 0.0
    alpha = params.alpha if strategy == "two_phase" else 0.0
    return T, lam, alpha


def attempt_length(strategy: str, params: SearchParams) -> int:
    if strategy == "yi":
        return params.N + max(1, round(params.lam_for("yi") * params.N))
    return params.N


@dataclass
class SweepStats:
    strategy: str
    kappa_mode: str
    N: int
    R: float
    delta: float
    T: float
    lam: float
    alpha: float
    trials: int
    failures: int
    eps_hat: float
    ci_lo: float
    ci_hi: float
    mean_tau: float
    sd_tau: float
    retries_mean: float
    erasure_rate: float
    seed: int
    first_repeat_rate: float = 0.0
    attempt_len: int = 0
    capped: int = 0
    close_failures: int = 0
    oversized_rate: float = 0.0

    def row(self) -> list[str]:
        f = it.fmt_float
        return [
            self.strategy, self.kappa_mode, str(self.N), f(self.R), f(self.delta), f(self.T),
            f(self.lam), f(self.alpha), str(self.trials), str(self.failures), f(self.eps_hat),
            f(self.ci_lo), f(self.ci_hi), f(self.mean_tau), f(self.sd_tau), f(self.retries_mean),
            f(self.erasure_rate), str(self.seed),
        ]


CSV_COLUMNS = [
    "strategy", "kappa_mode", "N", "R", "delta", "T", "lambda", "alpha", "trials", "failures",
    "eps_hat", "ci_lo", "ci_hi", "mean_tau", "sd_tau", "retries_mean", "erasure_rate", "seed",
]


def write_stats_csv(stats, fh, header=True) -> None:
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(CSV_COLUMNS)
    for s in stats:
        w.writerow(s.row())


def wilson_interval(failures: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    phat = failures / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def draw_truth(seed: int, i: int) -> tuple[float, float]:
    g = generator(seed, "truth", i)
    return float(g.random()), float(g.random())


def _run_chunk(args):
    strategy, params, seed, lo, hi = args
    fn = STRATEGY_FUNCS[strategy]
    return [fn(params, draw_truth(seed, i), derive(seed, "trial", i)) for i in range(lo, hi)]


def run_trials(strategy: str, params: SearchParams, trials: int, seed: int, workers: int = 1) -> list[TrialOutcome]:
    validate_strategy(strategy, params)
    if trials < 1:
        raise ConfigError("trials", "must be positive")
    if workers <= 1:
        return _run_chunk((strategy, params, seed, 0, trials))
    # warm the table before forking so workers share it
    if strategy != "two_phase":
        _table_for(params)
    n_chunks = min(trials, workers * 4)
    bounds = np.linspace(0, trials, n_chunks + 1).astype(int)
    jobs = [(strategy, params, seed, int(bounds[j]), int(bounds[j + 1])) for j in range(n_chunks)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_run_chunk, jobs))
    return [o for part in parts for o in part]


def summarize(strategy: str, params: SearchParams, outcomes, seed: int) -> SweepStats:
    trials = len(outcomes)
    failures = sum(not o.success for o in outcomes)
    taus = np.array([o.tau for o in outcomes], float)
    attempts = sum(o.attempts for o in outcomes)
    repeats = sum(o.erasures for o in outcomes)
    lo, hi = wilson_interval(failures, trials)
    T, lam, alpha = reported_settings(strategy, params)
    return SweepStats(
        strategy=strategy,
        kappa_mode=params.kappa_mode,
        N=params.N,
        R=params.R,
        delta=params.delta,
        T=T,
        lam=lam,
        alpha=alpha,
        trials=trials,
        failures=failures,
        eps_hat=failures / trials,
        ci_lo=lo,
        ci_hi=hi,
        mean_tau=float(taus.mean()),
        sd_tau=float(taus.std(ddof=1)) if trials > 1 else 0.0,
        retries_mean=float(np.mean([o.retries for o in outcomes])),
        erasure_rate=repeats / attempts if attempts else 0.0,
        seed=seed,
        first_repeat_rate=float(np.mean([o.first_repeated for o in outcomes])),
        attempt_len=attempt_length(strategy, params),
        capped=sum(o.capped for o in outcomes),
        close_failures=sum(not o.close for o in outcomes),
        oversized_rate=sum(o.oversized for o in outcomes) / (attempts * params.N) if attempts else 0.0,
    )


def monte_carlo(strategy: str, params: SearchParams, trials: int, seed: int, workers: int = 1) -> SweepStats:
    """Run ``trials`` independent searches with uniform (w0, v) and aggregate them."""
    outcomes = run_trials(strategy, params, trials, seed, workers)
    return summarize(strategy, params, outcomes, seed)


def empirical_forney_curve(params: SearchParams, T_grid, trials: int, seed: int) -> it.ExponentCurve:
    """Error exponent and effective rate of one-shot erasure decoding for each threshold.

    The same simulated blocks are scored under every threshold. Points with
    fewer than 10 errors are flagged unreliable; with no errors the exponent
    is a 95% lower bound.
    """
    table = _table_for(params)
    N, p = params.N, _p_assumed(params)
    runs = []
    for i in range(trials):
        w0, v = draw_truth(seed, i)
        att = _nonadaptive_attempt(params, table, w0, v, derive(seed, "trial", i), 0)
        w_true = wrap(w0 + v * N)
        ok = max(cyclic_distance(att.w_end, w_true), cyclic_distance(att.v_hat, v)) <= params.delta
        ratio = -math.inf if att.dec.tie else forney_log_ratio(att.dec.hist, att.dec.distance, N, p)
        runs.append((ratio, ok))
    ratios = np.array([r for r, _ in runs])
    oks = np.array([o for _, o in runs])
    points, info = [], []
    for T in sorted(float(t) for t in T_grid):
        declared = ratios >= N * T
        n_dec = int(declared.sum())
        errors = int(np.count_nonzero(declared & ~oks))
        erasure = 1.0 - n_dec / trials
        lower_bounded = errors == 0
        if n_dec == 0:
            E = 0.0
        elif errors == 0:
            E = -math.log2(1.0 - 0.05 ** (1.0 / n_dec)) / N
        else:
            E = -math.log2(errors / n_dec) / N
        points.append(it.RatePoint(params.R * (1.0 - erasure), E))
        info.append({"T": T, "declared": n_dec, "errors": errors, "erasure": erasure,
                     "unreliable": errors < 10, "lower_bounded": lower_bounded})
    order = np.argsort([pt.rate for pt in points], kind="stable")
    return it.ExponentCurve(
        "decision_feedback_empirical",
        [points[i] for i in order],
        {"points": [info[i] for i in order], "N": N, "trials": trials, "seed": seed},
    )


def with_overrides(params: SearchParams, **kw) -> SearchParams:
    """Copy of ``params`` with fields replaced; delta is re-derived when R changes."""
    if "R" in kw and "delta" not in kw:
        kw["delta"] = None
    if "N" in kw and "R" not in kw and "delta" not in kw:
        kw["delta"] = None
    return replace(params, **kw)


__all__ = [
    "ConfigError", "DecodeResult", "SearchParams", "SweepStats", "TrialOutcome",
    "empirical_forney_curve", "forney_decode", "ml_decode", "monte_carlo", "run_query",
    "reported_settings", "strategy_forney", "strategy_nonadaptive", "strategy_two_phase", "strategy_yi",
    "validate_strategy", "yi_validate",
]
