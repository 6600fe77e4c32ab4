import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from targetsearch import infotheory as it
from targetsearch.noise import NoiseModel

LINEAR = NoiseModel.linear(0.1, 0.45)

# frozen from a 1e-6 step scan over rho (independent loop, not the library optimiser)
ER_Q05_P01_R025 = 0.08195753732919658
# frozen from a 1e-7 step scan of I(q, 0.1 + 0.7 q) on [0.14, 0.16]
LINEAR_Q_STAR = 0.1499978
LINEAR_RATE_STAR = 0.14138353326449815


def h_oracle(x):
    return 0.0 if x in (0.0, 1.0) else -x * math.log2(x) - (1 - x) * math.log2(1 - x)


@pytest.mark.parametrize("p,expected", [(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)])
def test_entropy_trivial(p, expected):
    assert it.binary_entropy(p) == expected


def test_entropy_value():
    assert it.binary_entropy(0.1) == pytest.approx(0.46899, abs=1e-5)


def test_entropy_domain():
    with pytest.raises(ValueError):
        it.binary_entropy(1.2)


def test_mutual_info_examples():
    assert it.mutual_info(0.5, 0.1) == pytest.approx(0.53101, abs=1e-5)
    assert it.mutual_info(0.3, 0.1) == pytest.approx(0.4559, abs=1e-4)
    for q in (0.0, 0.2, 0.7, 1.0):
        assert it.mutual_info(q, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_mutual_info_domain():
    with pytest.raises(ValueError):
        it.mutual_info(0.5, 0.6)


def test_capacity_examples():
    assert it.capacity(0.0) == 1.0
    assert it.capacity(0.5) == 0.0
    assert it.capacity(0.1) == pytest.approx(0.53101, abs=1e-5)


def test_capacity_is_max_over_q():
    qs = np.linspace(0, 1, 2001)
    for p in (0.03, 0.1, 0.3):
        assert max(it.mutual_info(q, p) for q in qs) == pytest.approx(it.capacity(p), abs=1e-12)


def test_c1_examples():
    assert it.c1(0.5) == 0.0
    assert it.c1(0.25) == pytest.approx(0.5 * math.log2(3), abs=1e-12)
    assert it.c1(0.25) == pytest.approx(0.79248, abs=1e-5)
    assert it.c1(0.1) == pytest.approx(0.8 * math.log2(9), abs=1e-12)
    assert it.c1(0.1) == pytest.approx(2.5359, abs=1e-4)
    assert it.c1(0.0) == math.inf


def test_c1_matches_relative_entropy():
    for p in (0.01, 0.1, 0.37):
        d = p * math.log2(p / (1 - p)) + (1 - p) * math.log2((1 - p) / p)
        assert it.c1(p) == pytest.approx(d, rel=1e-12)


def test_e0_examples():
    assert it.gallager_e0(0.0, 0.3, 0.1) == pytest.approx(0.0, abs=1e-15)
    assert it.gallager_e0(0.7, 0.3, 0.5) == pytest.approx(0.0, abs=1e-12)
    closed = 1 - math.log2(1 + 2 * math.sqrt(0.1 * 0.9))
    assert it.gallager_e0(1.0, 0.5, 0.1) == pytest.approx(closed, abs=1e-12)
    assert it.gallager_e0(1.0, 0.5, 0.1) == pytest.approx(0.32193, abs=1e-4)


def test_e0_domain():
    with pytest.raises(ValueError):
        it.gallager_e0(1.5, 0.5, 0.1)


@pytest.mark.parametrize("q,p", [(0.5, 0.1), (0.2, 0.05), (0.35, 0.3)])
def test_e0_slope_at_zero(q, p):
    rho = 1e-4
    assert it.gallager_e0(rho, q, p) / rho == pytest.approx(it.mutual_info(q, p), rel=1e-3)


def test_random_coding_value_matches_grid_oracle():
    assert it.random_coding_exponent(0.25, 0.5, 0.1, 1.0) == pytest.approx(ER_Q05_P01_R025, abs=1e-9)


def test_random_coding_zero_rate():
    for q, p in [(0.5, 0.1), (0.2, 0.2)]:
        assert it.random_coding_exponent(0.0, q, p, 1.0) == pytest.approx(it.gallager_e0(1.0, q, p), abs=1e-12)


@pytest.mark.parametrize("kappa", [0.5, 1.0])
def test_random_coding_vanishes_at_mi(kappa):
    q, p = 0.3, 0.12
    R = kappa * it.mutual_info(q, p)
    assert it.random_coding_exponent(R, q, p, kappa) == pytest.approx(0.0, abs=1e-6)
    assert it.random_coding_exponent(1.2 * R, q, p, kappa) == 0.0
    assert it.random_coding_exponent(0.9 * R, q, p, kappa) > 0.0


def test_random_coding_bad_kappa():
    with pytest.raises(ValueError):
        it.random_coding_exponent(0.1, 0.5, 0.1, 0.7)


def test_random_coding_convex_nonincreasing():
    q, p = 0.4, 0.08
    rs = np.linspace(0, it.mutual_info(q, p), 41)
    e = np.array([it.random_coding_exponent(r, q, p, 1.0) for r in rs])
    assert np.all(np.diff(e) <= 1e-12)
    assert np.all(e[:-2] - 2 * e[1:-1] + e[2:] >= -1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.0, 0.5))
def test_mi_symmetric(q, p):
    assert it.mutual_info(q, p) == pytest.approx(it.mutual_info(1 - q, p), abs=1e-12)


def test_capacity_strictly_decreasing():
    ps = np.linspace(0, 0.5, 201)
    c = [it.capacity(p) for p in ps]
    assert all(b < a for a, b in zip(c, c[1:]))


def test_optimal_q_constant_noise():
    q, r = it.optimal_q(NoiseModel.constant(0.11), 1.0)
    assert q == 0.5
    assert r == pytest.approx(1 - h_oracle(0.11), abs=1e-12)
    q, r = it.optimal_q(NoiseModel.constant(0.11), 0.5)
    assert q == 0.5 and r == pytest.approx(0.5 * (1 - h_oracle(0.11)), abs=1e-12)


def test_optimal_q_clean():
    q, r = it.optimal_q(NoiseModel.constant(0.0), 1.0)
    assert (q, r) == (0.5, 1.0)


def test_optimal_q_linear_regression():
    q, r = it.optimal_q(LINEAR, 1.0)
    assert q == pytest.approx(LINEAR_Q_STAR, abs=2e-6)
    assert r == pytest.approx(LINEAR_RATE_STAR, abs=1e-12)


def test_max_rate_adaptive():
    assert it.max_rate_adaptive(NoiseModel.constant(0.0)) == 1.0
    assert it.max_rate_adaptive(LINEAR) == pytest.approx(0.53101, abs=1e-5)
    assert it.max_rate_adaptive(NoiseModel.constant(0.5)) == 0.0


def test_adaptivity_gain():
    for m in (LINEAR, NoiseModel.linear(0.0, 0.3), NoiseModel.table([(0.0, 0.02), (0.2, 0.3), (0.5, 0.31)])):
        assert it.max_rate_adaptive(m) >= it.optimal_q(m, 1.0)[1]


def test_yi_nonadaptive_line():
    c1 = it.c1(0.1)
    _, istar = it.optimal_q(LINEAR, 1.0)
    assert it.yi_nonadaptive_exponent(0.0, LINEAR) == pytest.approx(c1)
    assert it.yi_nonadaptive_exponent(istar, LINEAR) == 0.0
    assert it.yi_nonadaptive_exponent(istar / 2, LINEAR) == pytest.approx(1.26795, abs=1e-4)
    assert it.yi_nonadaptive_exponent(1.0, LINEAR) == 0.0


def test_yi_adaptive_line():
    assert it.yi_adaptive_exponent(0.0, LINEAR) == pytest.approx(it.c1(0.1))
    assert it.yi_adaptive_exponent(it.capacity(0.1), LINEAR) == 0.0
    assert it.yi_adaptive_exponent(0.25, LINEAR) == pytest.approx(1.3420, abs=1e-3)


def test_yi_infinite_when_clean():
    clean = NoiseModel.linear(0.0, 0.2)
    assert it.yi_adaptive_exponent(0.3, clean) == math.inf
    assert it.yi_nonadaptive_exponent(0.0, clean) == math.inf


def test_burnashev_line():
    assert it.burnashev_exponent(0.0, 0.1) == pytest.approx(it.c1(0.1))
    assert it.burnashev_exponent(it.capacity(0.1), 0.1) == 0.0
    assert it.burnashev_exponent(0.25, 0.1) == pytest.approx(1.3420, abs=1e-3)


def test_bundle_zero_grid_gives_intercepts():
    curves = {c.curve_id: c for c in it.curve_bundle(LINEAR, [0.0])}
    q, _ = it.optimal_q(LINEAR, 1.0)
    ps = float(LINEAR(q))
    assert curves["random_coding"].exponents[0] == pytest.approx(it.gallager_e0(1.0, q, ps))
    assert curves["burnashev_qstar"].exponents[0] == pytest.approx(it.c1(ps))
    assert curves["yi_nonadaptive"].exponents[0] == pytest.approx(it.c1(0.1))
    assert curves["yi_adaptive"].exponents[0] == pytest.approx(it.c1(0.1))
    assert "decision_feedback_empirical" not in curves


def test_bundle_constant_noise_d_equals_e():
    m = NoiseModel.constant(0.11)
    grid = np.linspace(0, it.capacity(0.11), 7)
    curves = {c.curve_id: c for c in it.curve_bundle(m, grid)}
    np.testing.assert_allclose(curves["yi_nonadaptive"].exponents, curves["yi_adaptive"].exponents, atol=1e-9)


def test_bundle_linear_e_dominates_d():
    grid = np.linspace(0, it.capacity(0.1), 30)
    curves = {c.curve_id: c for c in it.curve_bundle(LINEAR, grid)}
    d, e = curves["yi_nonadaptive"].exponents, curves["yi_adaptive"].exponents
    assert np.all(e >= d) and np.all(d >= 0)


def test_bundle_rejects_bad_grid():
    with pytest.raises(ValueError):
        it.curve_bundle(LINEAR, [0.2, 0.1])
    with pytest.raises(ValueError):
        it.curve_bundle(LINEAR, [0.0, 0.9])


def test_bundle_includes_empirical():
    emp = it.ExponentCurve("decision_feedback_empirical", [it.RatePoint(0.1, 0.2)])
    ids = [c.curve_id for c in it.curve_bundle(LINEAR, [0.0, 0.1], empirical=emp)]
    assert ids == ["random_coding", "decision_feedback_empirical", "burnashev_qstar", "yi_nonadaptive", "yi_adaptive"]


def test_curves_csv_format():
    buf = io.StringIO()
    it.write_curves_csv(it.curve_bundle(NoiseModel.linear(0.0, 0.3), [0.0, 0.1]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "curve_id,R,E"
    assert "yi_adaptive,0.000000,inf" in lines
    assert all(len(l.split(",")) == 3 for l in lines)
    back = it.read_curves_csv(io.StringIO(buf.getvalue()))
    assert [c.curve_id for c in back] == ["random_coding", "burnashev_qstar", "yi_nonadaptive", "yi_adaptive"]
