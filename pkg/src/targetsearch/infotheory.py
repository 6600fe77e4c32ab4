"""Rate and reliability quantities for binary channels, in bits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._optimize import grid_golden_max
from .noise import NoiseModel

GRID_STEP = 1e-4
REFINE_TOL = 1e-6

CURVE_IDS = (
    "random_coding",
    "decision_feedback_empirical",
    "burnashev_qstar",
    "yi_nonadaptive",
    "yi_adaptive",
)


@dataclass(frozen=True)
class RatePoint:
    rate: float
    exponent: float


@dataclass
class ExponentCurve:
    curve_id: str
    points: list[RatePoint]
    meta: dict = field(default_factory=dict)

    @property
    def rates(self):
        return np.array([pt.rate for pt in self.points])

    @property
    def exponents(self):
        return np.array([pt.exponent for pt in self.points])


def _check_prob(name, p, lo=0.0, hi=1.0):
    if not lo <= p <= hi:
        raise ValueError(f"{name}={p} outside [{lo}, {hi}]")


def _h(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    out = np.where((p <= 0) | (p >= 1), 0.0, out)
    return out if out.ndim else float(out)


def binary_entropy(p: float) -> float:
    _check_prob("p", p)
    return float(_h(p))


def _mi(q, p):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return _h(q * (1 - p) + (1 - q) * p) - _h(p)


def mutual_info(q: float, p: float) -> float:
    """I(X;Y) for X ~ Bern(q) through BSC(p)."""
    _check_prob("q", q)
    _check_prob("p", p, 0.0, 0.5)
    return float(_mi(q, p))


def capacity(p: float) -> float:
    _check_prob("p", p, 0.0, 0.5)
    return 1.0 - float(_h(p))


def c1(p: float) -> float:
    """D(p || 1-p) in bits; infinite for a noiseless channel."""
    _check_prob("p", p, 0.0, 0.5)
    if p == 0.0:
        return math.inf
    return (1 - 2 * p) * math.log2((1 - p) / p)


def _e0(rho, q, p):
    rho = np.asarray(rho, dtype=float)
    s = 1.0 / (1.0 + rho)
    a = p**s
    b = (1 - p) ** s
    y0 = ((1 - q) * b + q * a) ** (1 + rho)
    y1 = ((1 - q) * a + q * b) ** (1 + rho)
    return -np.log2(y0 + y1)


def gallager_e0(rho: float, q: float, p: float) -> float:
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho={rho} outside [0, 1]")
    _check_prob("q", q)
    _check_prob("p", p, 0.0, 0.5)
    return float(_e0(rho, q, p))


def _check_kappa(kappa):
    if kappa not in (0.5, 1, 1.0):
        raise ValueError(f"kappa must be 1/2 or 1, got {kappa}")


def random_coding_exponent(R: float, q: float, p: float, kappa: float = 1.0) -> float:
    """max over rho in [0, 1] of E0(rho, q, p) - rho R / kappa, floored at zero."""
    if R < 0:
        raise ValueError("rate must be non-negative")
    _check_kappa(kappa)
    _check_prob("q", q)
    _check_prob("p", p, 0.0, 0.5)
    slope = R / kappa
    _, val = grid_golden_max(
        lambda r: _e0(r, q, p) - r * slope,
        lambda r: float(_e0(r, q, p)) - r * slope,
        0.0,
        1.0,
        GRID_STEP,
        REFINE_TOL,
        prefer="high",
    )
    return max(0.0, val)


def optimal_q(model: NoiseModel, kappa: float = 1.0) -> tuple[float, float]:
    """Input mass maximising kappa * I(q, p[q]) over (0, 1/2], and the maximum."""
    _check_kappa(kappa)

    def fv(q):
        return kappa * _mi(q, np.minimum(model(q), 0.5))

    return grid_golden_max(fv, lambda q: float(fv(q)), GRID_STEP, 0.5, GRID_STEP, REFINE_TOL, prefer="high")


def max_rate_adaptive(model: NoiseModel) -> float:
    return capacity(model.p0)


def _line(R, intercept_e, intercept_r):
    if R < 0:
        raise ValueError("rate must be non-negative")
    if R >= intercept_r:
        return 0.0
    if math.isinf(intercept_e):
        return math.inf
    return intercept_e * (1.0 - R / intercept_r)


def yi_nonadaptive_exponent(R: float, model: NoiseModel, kappa: float = 1.0) -> float:
    _, rate_star = optimal_q(model, kappa)
    return _line(R, c1(model.p0), rate_star)


def yi_adaptive_exponent(R: float, model: NoiseModel) -> float:
    return _line(R, c1(model.p0), capacity(model.p0))


def burnashev_exponent(R: float, p: float) -> float:
    return _line(R, c1(p), capacity(p))


def curve_bundle(model: NoiseModel, rate_grid, empirical: ExponentCurve | None = None, kappa: float = 1.0):
    """Analytic exponent curves on ``rate_grid`` plus an optional empirical one."""
    grid = [float(r) for r in rate_grid]
    c_top = capacity(model.p0)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("rate grid must be sorted")
    if grid and (grid[0] < 0 or grid[-1] > c_top + 1e-12):
        raise ValueError(f"rate grid must lie within [0, {c_top:.6f}]")

    q_star, rate_star = optimal_q(model, kappa)
    p_star = float(model(q_star))
    meta = {"model": model.to_dict(), "kappa": kappa, "q_star": q_star}

    curves = [
        ExponentCurve(
            "random_coding",
            [RatePoint(r, random_coding_exponent(r, q_star, p_star, kappa)) for r in grid],
            dict(meta),
        )
    ]
    if empirical is not None:
        curves.append(empirical)
    curves.append(ExponentCurve("burnashev_qstar", [RatePoint(r, burnashev_exponent(r, p_star)) for r in grid], dict(meta)))
    e_top = c1(model.p0)
    curves.append(ExponentCurve("yi_nonadaptive", [RatePoint(r, _line(r, e_top, rate_star)) for r in grid], dict(meta)))
    curves.append(ExponentCurve("yi_adaptive", [RatePoint(r, _line(r, e_top, c_top)) for r in grid], dict(meta)))
    return curves


def fmt_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6f}"


def write_curves_csv(curves, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["curve_id", "R", "E"])
    for c in curves:
        for pt in c.points:
            w.writerow([c.curve_id, fmt_float(pt.rate), fmt_float(pt.exponent)])


def read_curves_csv(fh) -> list[ExponentCurve]:
    by_id: dict[str, list[RatePoint]] = {}
    for row in csv.DictReader(fh):
        by_id.setdefault(row["curve_id"], []).append(RatePoint(float(row["R"]), float(row["E"])))
    return [ExponentCurve(cid, sorted(pts, key=lambda p: p.rate)) for cid, pts in by_id.items()]
