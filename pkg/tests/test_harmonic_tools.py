import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ultraharmonic import harmonic_tools as ht
from ultraharmonic.errors import DomainError

nonneg = arrays(np.float64, st.integers(1, 40), elements=st.floats(0, 10, allow_subnormal=False))


def ap_brute(w, p):
    """Direct double loop over windows, no prefix sums."""
    w = np.asarray(w, float)
    best = 0.0
    for a in range(w.size):
        for b in range(a, w.size):
            seg = w[a:b + 1]
            L = seg.size
            if p == 1:
                q = seg.sum() / L * (1 / seg).max()
            else:
                q = seg.sum() / L * (np.sum(seg ** (-1 / (p - 1))) / L) ** (p - 1)
            best = max(best, q)
    return best


# ---------------------------------------------------------------- A_p

@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
def test_ap_unit_weight(p):
    assert ht.ap_constant(np.ones(50), p) == pytest.approx(1.0, rel=1e-14)


@given(arrays(np.float64, st.integers(1, 25), elements=st.floats(0.01, 100)),
       st.sampled_from([1.0, 1.5, 2.0, 4.0]))
def test_ap_matches_brute(w, p):
    assert ht.ap_constant(w, p) == pytest.approx(ap_brute(w, p), rel=1e-12)


def test_ap_monotone_in_N():
    w = ht.power_weight(0.7, 300)
    vals = [ht.ap_constant(w, 2.0, N) for N in range(0, 300, 13)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_ap_sqrt_weight_stabilises():
    a, b = (ht.ap_constant(ht.power_weight(0.5, N), 2.0) for N in (2 ** 11, 2 ** 12))
    assert abs(b / a - 1) < 0.01


def test_ap_linear_weight_grows():
    vals = [ht.ap_constant(ht.power_weight(1.0, N), 2.0) for N in (2 ** 8, 2 ** 10, 2 ** 12)]
    assert vals[0] < vals[1] < vals[2]


def test_ap_domain():
    with pytest.raises(DomainError):
        ht.ap_constant([1.0, 2.0], 0.5)
    with pytest.raises(DomainError):
        ht.ap_constant([1.0, 0.0], 2.0)
    with pytest.raises(DomainError):
        ht.ap_constant([1.0, 2.0], 2.0, N=5)


# ----------------------------------------------------------- norms

def test_weighted_norm_examples(rng):
    f = rng.standard_normal(30)
    for p in (1.0, 2.0, 3.5):
        assert ht.weighted_norm(f, np.ones(30), p) == pytest.approx(np.linalg.norm(f, p), rel=1e-13)
        w = rng.uniform(0.1, 5, 30)
        assert ht.weighted_norm([-2.5], w, p) == pytest.approx(w[0] ** (1 / p) * 2.5, rel=1e-14)
    assert ht.weighted_norm(f, np.ones(30), math.inf) == np.abs(f).max()


@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(-50, 50)))
def test_weak_below_strong(f):
    w = np.linspace(0.5, 3, f.size)
    assert ht.weak_quasinorm(f, w) <= ht.weighted_norm(f, w, 1.0) * (1 + 1e-12) + 1e-300


def test_weak_quasinorm_example():
    # |f| = (3, 1, 2), w = 1: levels give 3*1, 2*2, 1*3
    assert ht.weak_quasinorm([3.0, -1.0, 2.0], np.ones(3)) == 4.0


def test_weighted_norm_short_weight():
    with pytest.raises(DomainError):
        ht.weighted_norm([1.0, 2.0, 3.0], [1.0], 2)


# ------------------------------------------------------- Hardy operators

def test_hardy0_constant():
    n = np.arange(1, 21)
    assert np.isnan(ht.hardy0(np.ones(21))[0])
    assert np.allclose(ht.hardy0(np.ones(21))[1:], (n + 1) / n, rtol=1e-15)


@pytest.mark.parametrize("k", [1, 4, 11])
def test_hardy_inf_delta(k):
    g = np.zeros(16)
    g[k] = 1.0
    H = ht.hardy_inf(g)[1:]
    n = np.arange(1, 16)
    assert np.allclose(H, np.where(n <= k, 1 / k, 0.0), rtol=1e-15, atol=0)


def test_hardy0_l2_bound(rng):
    worst = 0.0
    for _ in range(8):
        g = np.abs(rng.standard_normal(4097))
        worst = max(worst, np.linalg.norm(ht.hardy0(g)[1:]) / np.linalg.norm(g))
    assert worst <= 2.2


# --------------------------------------------------- maximal function

def test_maximal_of_delta():
    g = np.zeros(30)
    g[0] = 1.0
    assert np.allclose(ht.hl_maximal(g), 1 / np.arange(1, 31), rtol=1e-15)


def test_maximal_of_constant():
    assert np.allclose(ht.hl_maximal(np.full(17, 2.5)), 2.5, rtol=1e-15)


@given(nonneg)
def test_maximal_stack_matches_brute(g):
    fast, slow = ht.hl_maximal(g), ht.hl_maximal(g, "brute")
    assert np.allclose(fast, slow, rtol=1e-14, atol=1e-14)
    assert np.all(fast >= g * (1 - 1e-14))


def test_maximal_large_random(rng):
    g = rng.exponential(size=700) * (rng.random(700) < 0.3)
    assert np.allclose(ht.hl_maximal(g), ht.hl_maximal_brute(g), rtol=1e-14, atol=1e-14)


def test_maximal_rejects_negative():
    with pytest.raises(DomainError):
        ht.hl_maximal([1.0, -1.0])
    with pytest.raises(DomainError):
        ht.hl_maximal([1.0], method="fast")


# --------------------------------------------------- intervals, windows

@pytest.mark.parametrize("n,expected", [(0, (0, 0)), (1, (1, 1)), (2, (1, 3)), (5, (3, 7)), (10, (5, 15))])
def test_window(n, expected):
    assert ht.window(n) == expected
    assert np.flatnonzero(ht.window_mask(20)[n]).tolist() == list(range(expected[0], expected[1] + 1))


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_dilate_contains(a, b):
    a, b = min(a, b), max(a, b)
    D = ht.IntervalN(a, b).dilate()
    assert D.a <= a and D.b >= b
    assert D.b >= b + (b - a) / 2
    assert D.a <= a - (b - a) / 2 or D.a == 0


def test_interval_domain():
    with pytest.raises(DomainError):
        ht.IntervalN(3, 2)


# --------------------------------------------------------- local/global

def hilbert_like(N):
    n = np.arange(N + 1)[:, None]
    m = np.arange(N + 1)[None, :]
    with np.errstate(divide="ignore"):
        E = np.where(n == m, 0.0, 1.0 / (n - m))
    return ht.KernelMatrix(E, "hilbert")


def test_global_part_vanishes_inside_window():
    K = hilbert_like(40)
    f = np.zeros(41)
    f[10:16] = 1.0  # inside W_n for n = 10
    loc, glob = ht.local_global_split(K, f)
    assert glob[10] == 0.0 and loc[10] != 0.0


@pytest.mark.parametrize("n0", [1, 3, 7])
def test_split_example(n0):
    K = hilbert_like(4 * n0 + 2)
    f = np.zeros(4 * n0 + 1)
    f[4 * n0] = 1.0
    loc, glob = ht.local_global_split(K, f)
    assert loc[n0] == 0.0
    assert glob[n0] == pytest.approx(-1 / (3 * n0), rel=1e-15)


def test_hardy_domination_is_finite(rng):
    K = hilbert_like(256)
    C = max(ht.hardy_domination_constant(K, rng.standard_normal(257)) for _ in range(5))
    assert 0 < C < 20


# ------------------------------------------------------------- certifier

def test_size_of_hilbert_kernel():
    assert ht.size_constant(hilbert_like(64)) == pytest.approx(1.0, rel=1e-15)


def test_hilbert_kernel_certifies():
    rep = ht.cz_certify(hilbert_like(128), hilbert_like(256))
    assert rep.passed, rep.drift
    assert rep.constants["size"] == pytest.approx(1.0)


def test_constant_kernel_fails():
    one = lambda N: ht.KernelMatrix(np.ones((N + 1, N + 1)), "one")
    rep = ht.cz_certify(one(64), one(128))
    assert not rep.passed
    assert rep.constants["size@2N"] == pytest.approx(2 * rep.constants["size"], rel=0.02)


def test_regularity_of_hilbert_kernel():
    c1, c2 = ht.regularity_constants(hilbert_like(200))
    # |1/(n-m) - 1/(l-m)| |n-m|^2/|n-l| = |n-m|/|l-m| < 2 when l lies in the band
    assert 0.5 < c1 < 2.5 and 0.5 < c2 < 2.5


def test_hormander_family_shape():
    F = ht.hormander_family(100, seed=3)
    assert F.shape == (101, 1 + 7 + 8)
    assert np.array_equal(F, ht.hormander_family(100, seed=3))


def test_certify_small_kernel_rejected():
    with pytest.raises(DomainError):
        ht.cz_constants(hilbert_like(8))


def test_kernel_csv_roundtrip(tmp_path):
    K = hilbert_like(20)
    path = tmp_path / "k.csv"
    n, m = np.indices(K.entries.shape)
    np.savetxt(path, np.column_stack([n.ravel(), m.ravel(), K.entries.ravel()]),
               delimiter=",", header="n,m,value", comments="", fmt=["%d", "%d", "%.17g"])
    L = ht.load_kernel_csv(path)
    assert np.array_equal(L.entries, K.entries)


def test_weight_seq_rejects():
    with pytest.raises(DomainError):
        ht.WeightSeq(np.array([]))
    with pytest.raises(DomainError):
        ht.WeightSeq(np.array([1.0, np.nan]))
