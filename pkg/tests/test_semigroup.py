import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ultraharmonic import hypergroup as hg
from ultraharmonic import semigroup as sg
from ultraharmonic import specfun as sf
from ultraharmonic.errors import ConfigurationError, DomainError

import oracles

LAMS = [0.6, 1.0, 1.5, 2.5]
TS = [0.01, 0.5, 3.0]
A3_GRID = sg.TimeGrid(1e-8, 1e8, 10)


def unit(rng, n):
    f = rng.standard_normal(n)
    return f / np.linalg.norm(f)


def mp_multiplier_coeff(lam, n, mult):
    """int mult(x) p_n(x) (1-x^2)^(lam-1/2) dx: the kernel of a multiplier at index n."""
    with mp.workdps(25):
        g = lambda th: mult(mp.cos(th)) * oracles.p(lam, n, mp.cos(th)) * mp.sin(th) ** (2 * mp.mpf(lam))
        return float(mp.quad(g, [0, mp.pi / 4, mp.pi / 2, mp.pi]))


# ------------------------------------------------------------------ time grid

def test_time_grid_basics():
    g = sg.TimeGrid(1e-2, 1e2, 5)
    assert g.steps == 20 and g.points[0] == pytest.approx(1e-2) and g.points[-1] == pytest.approx(1e2)
    assert g.trapezoid_weights().sum() == pytest.approx(math.log(1e4))
    fine = g.refine()
    assert np.allclose(fine.points[::2], g.points, rtol=1e-13)
    assert sg.TimeGrid.parse("1e-3,10,4") == sg.TimeGrid(1e-3, 10.0, 4)


@pytest.mark.parametrize("args", [(1.0, 0.5, 3), (0.0, 1.0, 3), (1.0, 2.0, 0), (1.0, 2.0, 2.5)])
def test_time_grid_rejects(args):
    with pytest.raises(ConfigurationError):
        sg.TimeGrid(*args)


def test_time_grid_parse_error():
    with pytest.raises(ConfigurationError):
        sg.TimeGrid.parse("1,2")


# ---------------------------------------------------------------- heat kernel

@pytest.mark.parametrize("lam", [0.6, 1.5])
@pytest.mark.parametrize("t", [0.05, 1.0, 6.0])
@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_heat_kernel_against_spectral_integral(lam, t, n):
    ref = mp_multiplier_coeff(lam, n, lambda x: mp.e ** (-2 * t * (1 - x)))
    assert sg.heat_kernel_coeff(lam, t, n) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_heat_kernel_value_lambda_one():
    ref = math.sqrt(math.pi) * math.gamma(1.5) * math.sqrt(2 / math.pi) * math.exp(-2) * 1.5906368546373291
    assert sg.heat_kernel_coeff(1.0, 1.0, 0) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("lam", LAMS)
def test_heat_kernel_small_time(lam):
    assert sg.heat_kernel_coeff(lam, 1e-6, 0) == pytest.approx(1 / math.sqrt(sf.weight_w(lam, 0)), abs=1e-5)
    for n in (1, 2, 3):
        r = sg.heat_kernel_coeff(lam, 1e-4, n) / sg.heat_kernel_coeff(lam, 1e-5, n)
        assert r == pytest.approx(10.0 ** n, rel=1e-3)


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("t", [1e-3, 0.7, 40.0, 3000.0])
def test_heat_kernel_row_matches_coefficients(lam, t):
    h = sg.heat_kernel_row(lam, t)
    assert h.max() * sg.KERNEL_CUT > 0
    for n in np.unique(np.linspace(0, h.size - 1, 6).astype(int)):
        assert h[n] == pytest.approx(sg.heat_kernel_coeff(lam, t, int(n)), rel=1e-11)


def test_heat_kernel_row_is_kernel_of_identity():
    lam, t = 1.5, 2.0
    e = hg.identity_element(lam)
    h = sg.heat_kernel_row(lam, t)
    assert np.allclose(sg.heat_apply(lam, t, e, n_out=h.size - 1), h, rtol=1e-12, atol=1e-16)


# ----------------------------------------------------------------- heat apply

@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("route", ["convolution", "spectral"])
def test_heat_contraction_and_semigroup(lam, route, rng):
    f = unit(rng, 17)
    for t in TS:
        wt = sg.heat_apply(lam, t, f, route)
        assert np.linalg.norm(wt) <= 1 + 1e-12
        for s in TS:
            direct = sg.heat_apply(lam, s + t, f)
            both = sg.heat_apply(lam, s, wt, route, n_out=direct.size - 1)
            assert np.linalg.norm(both - direct) <= 1e-10


@given(st.sampled_from(LAMS), st.floats(1e-3, 200.0), st.integers(0, 2 ** 32 - 1))
def test_heat_routes_agree(lam, t, seed):
    f = unit(np.random.default_rng(seed), 9)
    a = sg.heat_apply(lam, t, f)
    b = sg.heat_apply(lam, t, f, "spectral", n_out=a.size - 1)
    assert np.linalg.norm(a - b) <= 1e-9


@pytest.mark.parametrize("lam", LAMS)
def test_heat_does_not_preserve_constants(lam):
    out = sg.heat_apply(lam, 1.0, np.ones(65), n_out=0)
    assert abs(out[0] - 1.0) > 1e-3


def test_heat_unknown_route():
    with pytest.raises(ConfigurationError):
        sg.heat_apply(1.0, 1.0, [1.0], route="magic")
    with pytest.raises(DomainError):
        sg.heat_apply(1.0, 0.0, [1.0])


# ------------------------------------------------------------ heat derivatives

@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("t", [0.05, 1.0, 20.0])
def test_heat_derivative_finite_difference(lam, t, rng):
    f = unit(rng, 9)
    d = sg.heat_time_derivative(lam, t, 1, f)
    n = d.size - 1
    dt = t * 1e-4
    fd = (sg.heat_apply(lam, t + dt, f, n_out=n) - sg.heat_apply(lam, t - dt, f, n_out=n)) / (2 * dt)
    assert np.linalg.norm(fd - d) <= 1e-6 * np.linalg.norm(d)


@pytest.mark.parametrize("lam", LAMS)
def test_heat_derivative_routes(lam, rng):
    f = unit(rng, 9)
    t = 0.8
    for k in (1, 2, 3):
        a = sg.heat_time_derivative(lam, t, k, f)
        b = sg.heat_time_derivative(lam, t, k, f, "spectral", n_out=a.size - 1)
        assert np.linalg.norm(a - b) <= 1e-9
    a = sg.heat_time_derivative(lam, t, 1, f)
    c = sg.heat_time_derivative(lam, t, 1, f, "psi", n_out=a.size - 1)
    assert np.linalg.norm(a - c) <= 1e-10


@pytest.mark.parametrize("lam", LAMS)
def test_heat_second_derivative_composes(lam, rng):
    f = unit(rng, 9)
    t = 0.4
    a = sg.heat_time_derivative(lam, t, 2, f)
    b = sg.heat_time_derivative(lam, t, 1, hg.apply_laplacian(lam, f), n_out=a.size - 1)
    assert np.allclose(a, b, atol=1e-13)


def test_heat_derivative_domain():
    with pytest.raises(DomainError):
        sg.heat_time_derivative(1.0, 1.0, 0, [1.0])
    with pytest.raises(ConfigurationError):
        sg.heat_time_derivative(1.0, 1.0, 2, [1.0], route="psi")


@pytest.mark.parametrize("lam", LAMS)
@pytest.mark.parametrize("t", [0.02, 1.0, 15.0])
def test_psi_kernel_finite_difference(lam, t):
    dt = t * 1e-4
    for k in (0, 1, 5, 12):
        fd = (sg.heat_kernel_coeff(lam, t + dt, k) - sg.heat_kernel_coeff(lam, t - dt, k)) / (2 * dt)
        assert sg.psi_heat_kernel(lam, t, k) == pytest.approx(t * fd, rel=1e-6, abs=1e-14)


@pytest.mark.parametrize("lam", LAMS)
def test_psi_row_matches_three_term_formula(lam):
    t = 2.5
    row = sg.psi_kernel_row(lam, t, 20)
    ref = [sg.psi_heat_kernel(lam, t, k) for k in range(21)]
    assert np.allclose(row, ref, rtol=1e-11, atol=1e-15)


def test_psi_decay_beyond_eight():
    ts = np.geomspace(1e-3, 1e5, 200)
    sup = np.max(np.abs(np.stack([sg.psi_kernel_row(1.5, t, 60) for t in ts])), axis=0)
    assert np.all(np.diff(sup[8:]) < 0)


# -------------------------------------------------------------------- Poisson

@pytest.mark.parametrize("lam", [0.6, 1.5])
@pytest.mark.parametrize("t", [0.3, 2.0])
def test_poisson_kernel_against_spectral_integral(lam, t):
    out = sg.poisson_apply(lam, t, hg.identity_element(lam), n_out=6, tol=1e-12)
    for n in (0, 3, 6):
        ref = mp_multiplier_coeff(lam, n, lambda x: mp.e ** (-t * mp.sqrt(2 * (1 - x))))
        assert out[n] == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("lam", [0.6, 1.5])
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_poisson_routes_agree(lam, t, rng):
    f = unit(rng, 17)
    a = sg.poisson_apply(lam, t, f, "subordination")
    b = sg.poisson_apply(lam, t, f, "spectral")
    assert np.linalg.norm(a - b) <= 1e-6
    assert np.linalg.norm(a) <= 1 + 1e-9


def test_poisson_semigroup_law(rng):
    lam = 1.5
    f = unit(rng, 9)
    n = 200
    ps = sg.poisson_apply(lam, 0.7, f, "spectral", n_out=n)
    both = sg.poisson_apply(lam, 1.1, ps, "spectral", n_out=n)
    direct = sg.poisson_apply(lam, 1.8, f, "spectral", n_out=n)
    assert np.linalg.norm(both[:60] - direct[:60]) <= 1e-6


@pytest.mark.parametrize("lam", [0.6, 1.5])
def test_poisson_derivative(lam, rng):
    f = unit(rng, 9)
    t, dt = 1.3, 1.3e-4
    d = sg.poisson_time_derivative(lam, t, 1, f)
    fd = (sg.poisson_apply(lam, t + dt, f, "spectral", tol=1e-12)
          - sg.poisson_apply(lam, t - dt, f, "spectral", tol=1e-12)) / (2 * dt)
    assert np.linalg.norm(fd - d) <= 1e-5 * np.linalg.norm(d)
    for k in (1, 2):
        s = sg.poisson_time_derivative(lam, t, k, f, "subordination")
        assert np.linalg.norm(s - sg.poisson_time_derivative(lam, t, k, f)) <= 1e-5


def test_poisson_decays_at_support():
    lam = 1.0
    d = sg.poisson_time_derivative(lam, 0.05, 1, hg.identity_element(lam))
    assert 0.05 * d[0] < 0


def test_poisson_route_limits():
    with pytest.raises(ConfigurationError):
        sg.poisson_time_derivative(1.0, 1.0, 3, [1.0], route="subordination")
    with pytest.raises(ConfigurationError):
        sg.poisson_apply(1.0, 1.0, [1.0], route="other")
    with pytest.raises(DomainError):
        sg.poisson_time_derivative(1.0, 1.0, 0, [1.0])


# ---------------------------------------------------------------- g-functions

@pytest.mark.parametrize("kind", ["heat", "poisson"])
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("lam", LAMS)
def test_spectral_aggregate(kind, k, lam, rng):
    f = unit(rng, 33)
    assert sg.g_aggregate_spectral(kind, lam, k, f, A3_GRID) == pytest.approx(math.gamma(2 * k) / 4 ** k, rel=1e-6)


@pytest.mark.parametrize("lam", [1.0, 1.5])
def test_heat_g1_ratio(lam, rng):
    f = unit(rng, 9)
    g = sg.g_function("heat", lam, 1, f, A3_GRID, n_out=1024)
    assert np.linalg.norm(g) == pytest.approx(0.5, abs=2e-3)


def test_poisson_g2_ratio(rng):
    f = unit(rng, 9)
    g = sg.g_function("poisson", 1.5, 2, f, A3_GRID, n_out=1024)
    assert np.linalg.norm(g) == pytest.approx(math.sqrt(6) / 4, abs=2e-3)


def test_g_of_zero_and_domain():
    assert not sg.g_function("heat", 1.0, 1, np.zeros(3), A3_GRID, n_out=16).any()
    with pytest.raises(DomainError):
        sg.g_function("heat", 1.0, 0, [1.0], A3_GRID)
    with pytest.raises(ConfigurationError):
        sg.g_function("heat", 1.0, 1, [1.0], sg.TimeGrid(1e-3, 1e3, 10))
    with pytest.raises(ConfigurationError):
        sg.g_function("wave", 1.0, 1, [1.0], A3_GRID)


def test_g_function_many_matches_single(rng):
    fs = np.stack([unit(rng, 12) for _ in range(3)])
    G = sg.g_function_many("heat", 0.6, 1, fs, A3_GRID, n_out=100)
    for f, g in zip(fs, G):
        assert np.allclose(g, sg.g_function("heat", 0.6, 1, f, A3_GRID, n_out=100), rtol=1e-10, atol=1e-14)


def test_g_function_info(rng):
    g, info = sg.g_function("poisson", 1.0, 1, unit(rng, 5), A3_GRID, n_out=64, return_info=True)
    assert info["change"] <= 1e-6 and info["points_per_decade"] >= 20 and info["nodes"] == 130


def test_sweep_matches_heat_apply(rng):
    lam, f = 1.5, unit(rng, 7)
    op = sg.SweepOperator(lam, f, 60)
    for t in (0.1, 4.0):
        ref = sg.heat_apply(lam, t, f, n_out=60)
        assert np.allclose(op.values("heat", 0, [t])[:, 0], ref, atol=1e-12)
        d = sg.heat_time_derivative(lam, t, 2, f, n_out=60)
        assert np.allclose(op.values(sg.SemigroupKind.HEAT, 2, [t])[:, 0], t * t * d, atol=1e-11)


# ------------------------------------------------------------------- maximal

@given(st.sampled_from(LAMS), st.integers(0, 2 ** 32 - 1))
def test_maximal_properties(lam, seed):
    rng = np.random.default_rng(seed)
    f = np.abs(unit(rng, 9))
    grid = sg.TimeGrid(1e-8, 1e8, 4)
    W = sg.maximal("heat", lam, f, grid, n_out=40)
    P = sg.maximal("poisson", lam, f, grid, n_out=40)
    assert np.all(W[:9] >= f - 1e-12)
    assert np.all(P <= W + 1e-9)


@pytest.mark.parametrize("lam", LAMS)
def test_maximal_of_delta_at_origin(lam):
    e = np.array([1.0])
    grid = sg.TimeGrid(1e-8, 1e8, 10)
    W, arg = sg.maximal("heat", lam, e, grid, n_out=20, return_argmax=True)
    assert W[0] == pytest.approx(1.0, abs=1e-7)
    assert arg[0] in (0.0, grid.t_min)
    near = sg.SweepOperator(lam, e, 20).values("heat", 0, [grid.t_min])[0, 0]
    assert near == pytest.approx(1.0, abs=1e-7)


def test_refined_sup_finds_peak():
    centers = np.array([0.3, 7.7, 1234.5])

    def evaluate(ts):
        return np.exp(-(np.log(ts)[None, :] - np.log(centers)[:, None]) ** 2)

    sup, arg = sg.refined_sup(evaluate, np.geomspace(1e-3, 1e5, 33))
    assert np.allclose(sup, 1.0, atol=1e-8)
    assert np.allclose(arg, centers, rtol=1e-3)


# ------------------------------------------------------------------- kernels

def test_kernel_rule_ladder():
    assert sg.kernel_rule_size(64, 1.0) % 65 == 0
    assert sg.kernel_rule_size(64, 1e4) > sg.kernel_rule_size(64, 1.0)
    assert sg.kernel_rule_size(64, 1.0, "poisson-deriv") >= 130


@pytest.mark.parametrize("lam", [0.6, 1.5])
def test_heat_kernel_slice_is_translate_of_row(lam):
    N, t = 24, 3.0
    (_, K), = sg.kernel_slices("heat", lam, N, [t])
    h = sg.heat_kernel_row(lam, t, 2 * N)
    for n in (0, 5, 17):
        assert np.allclose(K[n], hg.translate(lam, n, h)[:N + 1], atol=1e-12)
    assert np.allclose(K, K.T, atol=1e-14)


def test_psi_and_poisson_slices():
    lam, N, t = 1.5, 16, 1.2
    (_, Kpsi), = sg.kernel_slices("psi", lam, N, [t])
    psi = sg.psi_kernel_row(lam, t, 2 * N)
    assert np.allclose(Kpsi[3], hg.translate(lam, 3, psi)[:N + 1], atol=1e-12)
    (_, Kp), = sg.kernel_slices("poisson-deriv", lam, N, [t])
    ref = t * sg.poisson_time_derivative(lam, t, 1, hg.identity_element(lam), n_out=2 * N, tol=1e-12)
    assert np.allclose(Kp[0], math.sqrt(sf.weight_w(lam, 0)) * ref[:N + 1], atol=1e-9)


def test_kernel_envelope_small():
    K = sg.kernel_envelope("heat", 1.0, 32)
    assert K.entries.shape == (33, 33) and np.allclose(K.entries, K.entries.T, atol=1e-14)
    assert K.params["norm"] == "sup"
    assert sg.kernel_envelope("psi", 1.0, 32).params["norm"] == "l2"
    with pytest.raises(ConfigurationError):
        sg.kernel_envelope("wave", 1.0, 8)


@pytest.mark.parametrize("which", ["heat", "psi"])
def test_decay_envelope_stable(which):
    e = sg.decay_envelope(1.0, 128, which)
    assert np.isfinite(e).all()
    assert e.max() <= 1.1 * e[:65].max()
