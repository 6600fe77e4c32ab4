import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import binom, chi2_contingency

from targetsearch import coding as c
from targetsearch.geometry import Trajectory, advance, trajectory_of


def test_codebook_tiny_q():
    cb = c.draw_codebook(100, 100, 1e-9, seed=4)
    assert cb.bits.sum() <= 1


def test_codebook_deterministic():
    a = c.draw_codebook(37, 19, 0.3, seed=123)
    b = c.draw_codebook(37, 19, 0.3, seed=123)
    assert a == b
    assert not np.array_equal(a.bits, c.draw_codebook(37, 19, 0.3, seed=124).bits)


def test_codebook_ones_fraction():
    cb = c.draw_codebook(512, 512, 0.3, seed=8)
    assert abs(cb.bits.mean() - 0.3) <= 0.01


def test_codebook_blocks_match_single_draw():
    from targetsearch.seeding import generator

    M, N = 3000, 1500
    cb = c.draw_codebook(M, N, 0.4, seed=2)
    ref = generator(2).random((M, N)) < 0.4
    assert np.array_equal(cb.bits, ref)


@pytest.mark.parametrize("M,N,q", [(0, 3, 0.2), (3, 0, 0.2), (3, 3, 0.0), (3, 3, 0.6)])
def test_codebook_invalid(M, N, q):
    with pytest.raises(ValueError):
        c.draw_codebook(M, N, q, seed=0)


def test_codebook_cap():
    with pytest.raises(ValueError):
        c.draw_codebook(100, 100, 0.3, seed=0, cap=9999)


def make_cb(bits, q=0.5, seed=0):
    return c.Codebook(np.asarray(bits, dtype=np.uint8), q, seed)


def test_query_set_examples():
    d0 = c.Dither(0.0, 0.0)
    assert c.query_set(make_cb([[0], [0], [0]]), d0, 1).is_empty()
    full = c.query_set(make_cb([[1], [1], [1]]), d0, 1)
    assert full.measure() == 1.0
    s = c.query_set(make_cb([[1], [0], [1], [0]]), d0, 1)
    assert s.arcs == [(0.0, 0.25), (0.5, 0.75)]
    assert c.measure(s) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        c.query_set(make_cb([[1], [0]]), d0, 2)


def test_query_set_dither_rotates():
    cb = make_cb([[1, 0], [0, 1], [0, 0], [0, 0]])
    s = c.query_set(cb, c.Dither(0.1, 0.3), 2)
    # bin 1 = [0.25, 0.5) shifted by 0.1 + 0.6
    assert s.arcs == [(pytest.approx(0.95), pytest.approx(0.2))]


def test_measure_examples():
    assert c.ArcSet().measure() == 0.0
    assert c.ArcSet([(0.9, 0.1)]).measure() == pytest.approx(0.2)


def test_contains_examples():
    assert not c.contains(c.ArcSet(), 0.3)
    arc = c.ArcSet([(0.9, 0.1)])
    assert c.contains(arc, 0.95)
    assert not c.contains(arc, 0.1)
    assert c.contains(arc, 0.0)
    assert c.contains(c.ArcSet.full(), 0.999)


def test_arcset_merges_adjacent():
    s = c.ArcSet([(0.2, 0.3), (0.3, 0.4), (0.35, 0.5)])
    assert s.arcs == [(0.2, 0.5)]
    assert c.ArcSet.from_bins([1, 1, 0, 1]).arcs == [(0.75, 0.5)]


def test_normalize_examples():
    s = c.ArcSet([(0.1, 0.4)])
    assert c.normalize_halfplus(s) == (s, False)
    out, flip = c.normalize_halfplus(c.ArcSet.full())
    assert out.is_empty() and flip
    out, flip = c.normalize_halfplus(c.ArcSet([(0.2, 0.8)]))
    assert flip and out.measure() == pytest.approx(0.4)
    assert 0.9 in out and 0.5 not in out


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.floats(0, 1, exclude_max=True))
def test_rotation_preserves_measure(col, shift):
    s = c.ArcSet.from_bins(col)
    assert s.rotate(shift).measure() == pytest.approx(sum(col) / len(col), abs=1e-9)
    assert c.ArcSet.from_bins(col, shift).measure() == pytest.approx(sum(col) / len(col), abs=1e-9)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=30), st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_membership_matches_bins(col, shift, w):
    s = c.ArcSet.from_bins(col, shift)
    m = int(np.floor(((w - shift) % 1.0) * len(col))) % len(col)
    edge = ((w - shift) % 1.0) * len(col)
    if min(abs(edge - round(edge)), 1.0) > 1e-9:
        assert (w in s) == bool(col[m])


@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), max_size=6))
def test_complement_partitions_circle(pairs):
    s = c.ArcSet(pairs)
    assert s.measure() + s.complement().measure() == pytest.approx(1.0, abs=1e-9)


def test_dither_range():
    with pytest.raises(ValueError):
        c.Dither(1.0, 0.2)
    assert c.Dither(0.5, 0.75).shift(2) == pytest.approx(0.0)


def test_trajectory_codeword_examples():
    cb = c.draw_codebook(8, 5, 0.4, seed=1)
    t = trajectory_of(0.3, 0.0, 5, 8)
    assert np.array_equal(c.trajectory_codeword(cb, t), cb.bits[2])
    zero = make_cb(np.zeros((8, 5)))
    assert not c.trajectory_codeword(zero, trajectory_of(0.1, 0.37, 5, 8)).any()
    diag = make_cb([[1, 0], [0, 1]])
    assert tuple(c.trajectory_codeword(diag, Trajectory(0.0, 0.0, (0, 1), 2))) == (1, 1)
    with pytest.raises(ValueError):
        c.trajectory_codeword(diag, trajectory_of(0.0, 0.0, 3, 2))


def clean_sequence(cb, d, w0, v):
    return tuple(int(c.contains(c.query_set(cb, d, n), advance(w0, v, n))) for n in range(1, cb.N + 1))


def test_dither_equivalence():
    cb = c.draw_codebook(12, 6, 0.4, seed=21)
    rng = np.random.default_rng(77)
    trials = 4000
    no_dither = c.Dither(0.0, 0.0)
    a = [clean_sequence(cb, no_dither, *rng.random(2)) for _ in range(trials)]
    b = [clean_sequence(cb, c.Dither(*rng.random(2)), 0.137, 0.611) for _ in range(trials)]
    keys = sorted(set(a) | set(b))
    ca = np.array([a.count(k) for k in keys])
    cb_ = np.array([b.count(k) for k in keys])
    # pool sparse categories so expected counts stay above 5
    big = (ca + cb_) >= 20
    table = np.array([np.append(ca[big], ca[~big].sum()), np.append(cb_[big], cb_[~big].sum())])
    table = table[:, table.sum(axis=0) > 0]
    _, pval, _, _ = chi2_contingency(table)
    assert pval > 1e-3


def test_concentration_of_column_measure():
    M, q, eps, cols = 4096, 0.3, 0.05, 1000
    cb = c.draw_codebook(M, cols, q, seed=5)
    d = c.Dither(0.0, 0.0)
    meas = np.array([c.query_set(cb, d, n).measure() for n in range(1, cols + 1)])
    np.testing.assert_allclose(meas, cb.bits.mean(axis=0), atol=1e-9)
    frac = np.mean(np.abs(meas - q) > eps)
    oracle = binom.cdf(np.floor((q - eps) * M), M, q) + binom.sf(np.ceil((q + eps) * M) - 1, M, q)
    assert oracle < 1e-10
    assert frac < 1e-3


def test_concentration_decays_in_m():
    q, eps = 0.3, 0.05
    fracs = [np.mean(np.abs(c.draw_codebook(M, 2000, q, seed=M).bits.mean(axis=0) - q) > eps) for M in (64, 256, 1024)]
    assert fracs[0] > fracs[1] > fracs[2]


def test_codebook_file_layout(tmp_path):
    cb = c.draw_codebook(5, 7, 0.3, seed=2**63 + 5)
    path = tmp_path / "cb.bin"
    c.save_codebook(cb, path)
    raw = path.read_bytes()
    magic, M, N, q, seed = struct.unpack_from("<4sQQdQ", raw)
    assert (magic, M, N, q, seed) == (b"TSCB", 5, 7, 0.3, 2**63 + 5)
    body = raw[struct.calcsize("<4sQQdQ"):]
    assert len(body) == (35 + 7) // 8
    flat = cb.bits.reshape(-1)
    assert body[0] == sum(int(flat[i]) << i for i in range(8))
    assert c.load_codebook(path) == cb


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(struct.pack("<4sQQdQ", b"NOPE", 1, 1, 0.5, 0) + b"\x00")
    with pytest.raises(ValueError):
        c.load_codebook(path)
