"""Measurement-dependent noise: crossover probability as a function of probed measure."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NoiseModel:
    """Non-decreasing map from probed measure ``s`` in (0, 1/2] to a BSC crossover.

    ``kind`` is one of ``"constant"``, ``"linear"`` or ``"table"``. For tables,
    ``knots`` is a sequence of ``(measure, probability)`` pairs interpolated
    piecewise-linearly and held constant outside the knot range.
    """

    kind: str
    p0: float
    phalf: float | None = None
    knots: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if self.kind == "constant":
            object.__setattr__(self, "phalf", float(self.p0))
        elif self.kind == "linear":
            if self.phalf is None:
                raise ValueError("linear noise model needs phalf")
        elif self.kind == "table":
            knots = tuple((float(s), float(p)) for s, p in self.knots)
            if len(knots) < 1:
                raise ValueError("table noise model needs at least one knot")
            xs = [s for s, _ in knots]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("table knots must be strictly increasing in measure")
            object.__setattr__(self, "knots", knots)
            object.__setattr__(self, "p0", float(self._interp(0.0)))
            object.__setattr__(self, "phalf", float(self._interp(0.5)))
        else:
            raise ValueError(f"unknown noise model kind {self.kind!r}")

        ps = [self.p0, self.phalf] + [p for _, p in self.knots]
        if any(not (0.0 <= p <= 0.5) for p in ps):
            raise ValueError("crossover probabilities must lie in [0, 1/2]")
        if self.kind == "linear" and self.phalf < self.p0:
            raise ValueError("noise must be non-decreasing in the probed measure")
        if self.kind == "table":
            kp = [p for _, p in self.knots]
            if any(b < a for a, b in zip(kp, kp[1:])):
                raise ValueError("noise must be non-decreasing in the probed measure")

    @classmethod
    def constant(cls, p: float) -> "NoiseModel":
        return cls("constant", float(p))

    @classmethod
    def linear(cls, p0: float, phalf: float) -> "NoiseModel":
        return cls("linear", float(p0), float(phalf))

    @classmethod
    def table(cls, knots) -> "NoiseModel":
        return cls("table", 0.0, None, tuple(tuple(k) for k in knots))

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        kind = d.get("kind")
        if kind == "constant":
            return cls.constant(d["p0"])
        if kind == "linear":
            return cls.linear(d["p0"], d["phalf"])
        if kind == "table":
            return cls.table(d["knots"])
        raise ValueError(f"unknown noise model kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "table":
            return {"kind": "table", "knots": [list(k) for k in self.knots]}
        if self.kind == "constant":
            return {"kind": "constant", "p0": self.p0}
        return {"kind": "linear", "p0": self.p0, "phalf": self.phalf}

    def _interp(self, s):
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        return np.interp(s, xs, ys)

    def __call__(self, s):
        """Vectorised evaluation on [0, 1/2] with no domain check; ``s=0`` gives p0."""
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            out = np.full(s.shape, self.p0)
        elif self.kind == "linear":
            out = self.p0 + (self.phalf - self.p0) * (s / 0.5)
        else:
            out = self._interp(s)
        return out if out.ndim else float(out)


def noise_at(model: NoiseModel, s: float) -> float:
    if not 0.0 < s <= 0.5:
        raise ValueError(f"probed measure must lie in (0, 1/2], got {s}")
    return float(model(s))


def sample_bsc(p: float, x: int, rng: np.random.Generator) -> int:
    """Pass bit ``x`` through BSC(p); uses exactly one uniform draw."""
    flip = rng.random() < p
    return int(x) ^ int(flip)
