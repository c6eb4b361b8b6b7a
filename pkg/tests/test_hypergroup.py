import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ultraharmonic import hypergroup as hg
from ultraharmonic import specfun as sf
from ultraharmonic import transform as tf
from ultraharmonic.errors import DomainError

import oracles

LAMS = [0.6, 1.0, 1.5, 2.5]
orders = st.sampled_from(LAMS + [0.3, 4.2])


def mp_triple(lam, n, m, k):
    """int p_n p_m p_k (1-x^2)^(lam-1/2) dx with x = cos(theta) (tanh-sinh quadrature)."""
    lam = mp.mpf(lam)

    def p(j, x):
        return oracles.p(lam, j, x)

    def f(th):
        x = mp.cos(th)
        return p(n, x) * p(m, x) * p(k, x) * mp.sin(th) ** (2 * lam)

    with mp.workdps(30):
        return float(mp.quad(f, [0, mp.pi / 2, mp.pi]))


def test_odd_total_vanishes():
    for lam in LAMS:
        assert hg.linearization_c(lam, 0, 1, 2) == 0.0


@pytest.mark.parametrize("lam", LAMS)
def test_zero_index_is_scaled_delta(lam):
    n, k = np.meshgrid(np.arange(30), np.arange(30), indexing="ij")
    C = hg.linearization_c(lam, n, 0, k)
    assert np.allclose(C, math.sqrt(sf.weight_w(lam, 0)) * np.eye(30), rtol=1e-14, atol=0)


def test_chebyshev_value():
    assert hg.linearization_c(1.0, 1, 1, 2) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-15)
    # trig integral (2/pi)^{3/2} int_0^pi sin(2t) sin(2t) sin(3t) / sin(t) dt = (2/pi)^{3/2} pi/2
    assert mp_triple(1.0, 1, 1, 2) == pytest.approx((2 / math.pi) ** 1.5 * math.pi / 2, rel=1e-12)


@pytest.mark.parametrize("lam", [0.6, 1.5, 2.5])
@pytest.mark.parametrize("nmk", [(0, 0, 0), (1, 1, 2), (2, 3, 3), (4, 6, 8), (7, 5, 4), (10, 9, 3)])
def test_closed_form_against_mpmath(lam, nmk):
    assert hg.linearization_c(lam, *nmk) == pytest.approx(mp_triple(lam, *nmk), rel=1e-10, abs=1e-13)


def test_oracle_values():
    assert hg.linearization_c_oracle(1.0, 0, 0, 0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-13)
    assert hg.linearization_c_oracle(1.0, 1, 1, 2) == pytest.approx(hg.linearization_c(1.0, 1, 1, 2), abs=1e-12)
    for lam in LAMS:
        assert abs(hg.linearization_c_oracle(lam, 5, 7, 20)) <= 1e-14


@given(orders, st.integers(0, 60), st.integers(0, 60), st.integers(0, 60))
def test_closed_form_against_quadrature(lam, n, m, k):
    c = hg.linearization_c(lam, n, m, k)
    o = hg.linearization_c_oracle(lam, n, m, k)
    assert c == pytest.approx(o, rel=1e-9, abs=1e-12)


@given(orders, st.integers(0, 300), st.integers(0, 300), st.integers(0, 300))
def test_permutation_symmetry(lam, n, m, k):
    vals = {hg.linearization_c(lam, *p) for p in [(n, m, k), (m, n, k), (k, m, n), (n, k, m)]}
    assert max(vals) - min(vals) <= 1e-14 * max(vals)
    assert min(vals) >= 0


def test_table_oracle_matches_closed_form():
    K = 20
    n, m, k = np.meshgrid(*(np.arange(K + 1),) * 3, indexing="ij")
    for lam in LAMS:
        T = hg.linearization_table_oracle(lam, K)
        C = hg.linearization_c(lam, n, m, k)
        assert np.max(np.abs(T - C)) <= 1e-12 * max(1.0, np.abs(C).max())


# --------------------------------------------------------------- translate

@given(orders, st.lists(st.floats(-5, 5), min_size=1, max_size=20))
def test_translate_by_zero(lam, f):
    f = np.array(f)
    assert np.allclose(pad(hg.translate(lam, 0, f), f.size)[:f.size], math.sqrt(sf.weight_w(lam, 0)) * f, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("n", [0, 1, 5, 12])
def test_translate_delta(lam, n):
    out = hg.translate(lam, n, [1.0])
    ref = np.zeros(n + 1)
    ref[n] = math.sqrt(sf.weight_w(lam, 0))
    assert np.allclose(out, ref, rtol=1e-13, atol=1e-15)


@given(orders, st.integers(0, 20), st.integers(0, 20))
def test_translate_of_delta_is_coefficient(lam, n, k):
    d = np.zeros(k + 1)
    d[k] = 1.0
    out = hg.translate(lam, n, d)
    m = np.arange(out.size)
    assert np.allclose(out, hg.linearization_c(lam, m, n, k), rtol=1e-13, atol=0)


# ----------------------------------------------------------------- convolve

def pad(a, n):
    out = np.zeros(max(n, a.size))
    out[:a.size] = a
    return out


seqs = st.lists(st.floats(-3, 3), min_size=1, max_size=17).map(np.array)


@given(orders, seqs)
def test_identity_element(lam, f):
    out = pad(hg.convolve(lam, f, hg.identity_element(lam)), f.size)
    assert np.max(np.abs(out[:f.size] - f)) <= 1e-14 * max(1.0, np.abs(f).max())


@given(orders, seqs, seqs)
def test_commutative(lam, f, g):
    a, b = hg.convolve(lam, f, g), hg.convolve(lam, g, f)
    n = max(a.size, b.size)
    assert np.allclose(pad(a, n), pad(b, n), rtol=1e-12, atol=1e-12)


@given(orders, seqs, seqs, seqs)
def test_associative(lam, f, g, h):
    a = hg.convolve(lam, hg.convolve(lam, f, g), h)
    b = hg.convolve(lam, f, hg.convolve(lam, g, h))
    n = max(a.size, b.size)
    a, b = pad(a, n), pad(b, n)
    scale = np.abs(f).sum() * np.abs(g).sum() * np.abs(h).sum() + 1
    assert np.max(np.abs(a - b)) <= 1e-12 * scale


@given(orders, seqs, seqs)
def test_transform_identity(lam, f, g):
    h = hg.convolve(lam, f, g)
    rule = sf.gauss_jacobi(lam - 0.5, h.size + 4)
    x = rule.nodes
    Fh = tf.forward_transform(lam, h, rule).values
    Ff = tf.forward_transform(lam, f, rule).values
    Fg = tf.forward_transform(lam, g, rule).values
    rhs = (1 - x * x) ** (-lam / 2 + 0.25) * Ff * Fg
    scale = np.abs(f).sum() * np.abs(g).sum() + 1
    assert np.max(np.abs(Fh - rhs)) <= 1e-10 * scale


def test_delta_one_squared():
    d1 = np.array([0.0, 1.0])
    assert hg.convolve(1.0, d1, d1)[2] == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)


@pytest.mark.parametrize("lam", LAMS)
def test_convolution_matrix(lam, rng):
    f = rng.standard_normal(9)
    g = rng.standard_normal(60)
    A = hg.convolution_matrix(lam, f, 40)
    gg = np.zeros(A.shape[1])
    gg[:g.size] = g[:A.shape[1]]
    ref = hg.convolve(lam, f, gg)[:41]
    assert np.allclose(A @ gg, ref, rtol=1e-12, atol=1e-12)


def test_zero_sequence():
    assert not hg.convolve(1.5, np.zeros(4), [1.0, 2.0]).any()
    assert hg.support(np.zeros(5)) == 0


# ---------------------------------------------------------------- Laplacian

def test_laplacian_delta_chebyshev():
    out = hg.apply_laplacian(1.0, [1.0])
    assert np.allclose(out, [-2.0, 1.0], atol=1e-15)


@given(orders, seqs)
def test_laplacian_spectral_identity(lam, f):
    d = hg.apply_laplacian(lam, f)
    rule = sf.gauss_jacobi(lam - 0.5, f.size + 4)
    x = rule.nodes
    lhs = tf.forward_transform(lam, d, rule).values
    rhs = 2 * (x - 1) * tf.forward_transform(lam, f, rule).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-11 * (np.abs(f).sum() + 1)


@given(orders, seqs)
def test_laplacian_is_negative(lam, f):
    d = hg.apply_laplacian(lam, f)
    assert np.dot(d[:f.size], pad(f, d.size)[:f.size]) <= 1e-12 * (np.dot(f, f) + 1)


@given(orders, seqs, st.integers(1, 4))
def test_laplacian_powers(lam, f, k):
    g = f
    for _ in range(k):
        g = hg.apply_laplacian(lam, g)
    assert np.allclose(hg.apply_laplacian(lam, f, k), g, rtol=1e-14, atol=1e-13)


def test_laplacian_power_domain():
    with pytest.raises(DomainError):
        hg.apply_laplacian(1.0, [1.0], 0)
