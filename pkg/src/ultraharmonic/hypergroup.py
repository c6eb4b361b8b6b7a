"""Linearization coefficients, translation, convolution and the lambda-Laplacian.

Sequences are 1-D float arrays indexed from 0; trailing entries beyond the
stated support are zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .specfun import LOG_SQRT_PI, as_order, coupling_a, gauss_jacobi, log_weight_w, orthonormal_table


@dataclass(frozen=True)
class TriIndex:
    """Index triple with sigma = (n+m+k)/2 when the triple is admissible."""

    n: int
    m: int
    k: int

    @property
    def sigma(self) -> int | None:
        return _sigma(self.n, self.m, self.k)


def _sigma(n: int, m: int, k: int) -> int | None:
    s = n + m + k
    if s % 2 or k < abs(n - m) or k > n + m:
        return None
    return s // 2


def as_seq(f) -> np.ndarray:
    """Float copy of a finite sequence."""
    f = np.asarray(f, dtype=float).ravel()
    return f.copy() if f.size else np.zeros(1)


def support(f) -> int:
    """Largest index with a nonzero entry (0 for the zero sequence)."""
    nz = np.flatnonzero(np.asarray(f))
    return int(nz[-1]) if nz.size else 0


def _log_rising_ratio(a: float, b: float, top: int) -> np.ndarray:
    """ln[(a)_v / (b)_v] for v = 0..top as a running sum of small log1p terms."""
    j = np.arange(top, dtype=float)
    return np.concatenate([[0.0], np.cumsum(np.log1p((a - b) / (b + j)))])


def log_linearization_c(lam, n, m, k):
    """ln c_lam(n,m,k) on admissible triples, -inf elsewhere (broadcasts).

    Gamma quotients are regrouped into ratios of rising factorials, each a
    table lookup, so no large log-gamma values cancel.
    """
    lam = as_order(lam)
    n, m, k = np.broadcast_arrays(np.asarray(n, dtype=np.int64), np.asarray(m, dtype=np.int64),
                                  np.asarray(k, dtype=np.int64))
    tot = n + m + k
    ok = (tot % 2 == 0) & (k >= np.abs(n - m)) & (k <= n + m)
    sig = np.where(ok, tot // 2, 0)
    top = int(sig.max(initial=0))
    two = _log_rising_ratio(2 * lam, 1.0, top)      # (2 lam)_v / v!
    one = _log_rising_ratio(lam, 1.0, top)          # (lam)_d / d!
    tail = _log_rising_ratio(2 * lam, lam + 1, top)  # (2 lam)_s / (lam+1)_s
    g = special.gammaln
    const = (0.5 * g(lam) - 1.5 * g(lam + 0.5) - 1.5 * LOG_SQRT_PI + (1 - 2 * lam) * math.log(2)
             + math.log(math.pi) + g(2 * lam) - g(lam + 1))
    out = np.full(n.shape, const) + tail[sig]
    for v in (n, m, k):
        v = np.where(ok, v, 0)
        out = out + 0.5 * np.log(v + lam) - 0.5 * two[v] + one[sig - v]
    return np.where(ok, out, -np.inf)


def linearization_c(lam, n, m, k):
    """c_lam(n,m,k): closed form, zero off the parity/triangle set."""
    out = np.exp(log_linearization_c(lam, n, m, k))
    return float(out) if np.ndim(out) == 0 else out


def linearization_c_oracle(lam, n: int, m: int, k: int, margin: int = 2) -> float:
    """c_lam(n,m,k) as the integral of p_n p_m p_k against (1-x^2)^(lam-1/2).

    Degree counting alone gives exact zeros: an odd integrand, or one index
    above the sum of the others (p_k is orthogonal to the lower-degree p_n p_m).
    Elsewhere a Gauss rule exact for the product is used.
    """
    lam = as_order(lam)
    a, b, c = sorted((n, m, k))
    if (n + m + k) % 2 or c > a + b:
        return 0.0
    Q = (n + m + k + 1) // 2 + 1 + margin
    rule = gauss_jacobi(lam - 0.5, Q)
    P = orthonormal_table(lam, max(n, m, k), rule.nodes)
    return math.fsum(rule.weights * P[n] * P[m] * P[k])


def translate(lam, n: int, f) -> np.ndarray:
    """(tau_n f)(m) = sum_k c(n,m,k) f(k), m = 0..n+supp(f)."""
    f = as_seq(f)
    K = support(f)
    ks = np.flatnonzero(f)
    ms = np.arange(n + K + 1)
    if ks.size == 0:
        return np.zeros(n + K + 1)
    C = linearization_c(lam, n, ms[:, None], ks[None, :])
    return C @ f[ks]


def convolve(lam, f, g) -> np.ndarray:
    """(f # g)(n) = sum_m f(m) (tau_n g)(m), n = 0..supp(f)+supp(g).

    Rows are independent; each one is a bilinear form f^T C_n g with
    C_n[m,k] = c(n,m,k) restricted to the supports.
    """
    f, g = as_seq(f), as_seq(g)
    N = support(f) + support(g)
    out = np.zeros(N + 1)
    ms, ks = np.flatnonzero(f), np.flatnonzero(g)
    if ms.size == 0 or ks.size == 0:
        return out
    fm, gk = f[ms], g[ks]
    for n in range(N + 1):
        # c(n,m,k) vanishes unless |m - k| <= n <= m + k
        C = linearization_c(lam, n, ms[:, None], ks[None, :])
        out[n] = fm @ C @ gk
    return out


def identity_element(lam, length: int = 1) -> np.ndarray:
    """delta_0 / sqrt(w(0)), the unit of #."""
    e = np.zeros(max(length, 1))
    e[0] = math.exp(-0.5 * log_weight_w(lam, 0))
    return e


def apply_laplacian(lam, f, k: int = 1) -> np.ndarray:
    """Delta^k f with (Delta f)(n) = a_n f(n+1) - 2 f(n) + a_{n-1} f(n-1)."""
    if k < 1:
        raise DomainError("power must be >= 1")
    out = as_seq(f)
    for _ in range(k):
        g = np.concatenate([out, [0.0]])
        N = g.size
        a = coupling_a(lam, np.arange(-1, N))  # a[j] = a_{j-1}
        res = -2.0 * g
        res[:-1] += a[1:N] * g[1:]
        res[1:] += a[1:N] * g[:-1]
        out = res
    return out


def convolution_matrix(lam, f, n_out: int) -> np.ndarray:
    """Matrix A with (f # g)(n) = (A @ g)(n) for n <= n_out.

    Only g(k) with k <= n_out + supp(f) can reach those outputs, so A has
    n_out + supp(f) + 1 columns. Useful when one f meets many kernels.
    """
    f = as_seq(f)
    S = support(f)
    ms = np.flatnonzero(f)
    A = np.zeros((n_out + 1, n_out + S + 1))
    if ms.size == 0:
        return A
    ks = np.arange(n_out + S + 1)
    for n in range(n_out + 1):
        lo, hi = max(0, n - S), n + S + 1
        C = linearization_c(lam, n, ms[:, None], ks[None, lo:hi])
        A[n, lo:hi] = f[ms] @ C
    return A


def linearization_table_oracle(lam, K: int, margin: int = 2) -> np.ndarray:
    """c_lam(n,m,k) for all n,m,k <= K from one Gauss rule (quadrature, no closed form)."""
    lam = as_order(lam)
    rule = gauss_jacobi(lam - 0.5, (3 * K + 1) // 2 + 1 + margin)
    P = orthonormal_table(lam, K, rule.nodes)
    return np.einsum("i,ni,mi,ki->nmk", rule.weights, P, P, P, optimize=True)
