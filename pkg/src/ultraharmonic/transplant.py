"""Transplantation between ultraspherical orders.

``K(n, m) = int phi_n^mu phi_m^lam dx`` vanishes unless n, m have equal
parity; otherwise the integrand is ``p_n^mu p_m^lam (1-x^2)^((lam+mu)/2 - 1/2)``
and a Gauss rule for that weight integrates it exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError
from .harmonic_tools import KernelMatrix, weighted_norm
from .hypergroup import as_seq, support
from .specfun import as_order, gauss_jacobi, orthonormal_table
from .transform import analyze, synthesize

MARGIN = 4
MAX_SIZE = 2 ** 14
PARITIES = ("full", "even", "odd")


def _alpha(lam: float, mu: float) -> float:
    return 0.5 * (lam + mu) - 0.5


def _rule_size(max_index: int) -> int:
    # degree of p_n p_m is at most 2 * max_index; Q nodes are exact to 2Q - 1
    return max_index + 1 + MARGIN


def transplant_kernel(lam, mu, n: int, m: int, Q: int | None = None) -> float:
    """K_{lam,mu}(n, m): twice the integral over (0, 1) by the half rule; 0 at opposite parity."""
    lam, mu = as_order(lam), as_order(mu)
    if n < 0 or m < 0:
        raise DomainError("indices must be natural")
    if (n - m) % 2:
        return 0.0
    Q = Q or math.ceil((n + m) / 2) + 1 + MARGIN
    x, w = gauss_jacobi(_alpha(lam, mu), Q).half()
    pn = orthonormal_table(mu, n, x)[n]
    pm = orthonormal_table(lam, m, x)[m]
    return float(np.sum(w * pn * pm))


@dataclass(frozen=True)
class TransplantKernel:
    """Dense K_{lam,mu} on {0..N}^2 for one parity class.

    ``full`` indexes (n, m) directly; ``even`` stores K(2n, 2m) and ``odd``
    stores K(2n+1, 2m+1).
    """

    lam: float
    mu: float
    N: int
    parity: str
    entries: np.ndarray

    def lattice(self) -> np.ndarray:
        """Original indices of rows/columns."""
        i = np.arange(self.N + 1)
        return {"full": i, "even": 2 * i, "odd": 2 * i + 1}[self.parity]

    def as_kernel_matrix(self) -> KernelMatrix:
        return KernelMatrix(self.entries, "transplant",
                            {"lambda": self.lam, "mu": self.mu, "parity": self.parity})

    def to_csv(self, path) -> None:
        n, m = np.meshgrid(np.arange(self.N + 1), np.arange(self.N + 1), indexing="ij")
        np.savetxt(path, np.column_stack([n.ravel(), m.ravel(), self.entries.ravel()]),
                   delimiter=",", header="n,m,value", comments="", fmt=["%d", "%d", "%.17g"])


def build_kernel_matrix(lam, mu, N: int, parity: str = "full") -> TransplantKernel:
    """All entries share one half rule sized for the largest index.

    Same-parity blocks are V_mu diag(2 omega) V_lam^T over the nodes in [0, 1).
    """
    lam, mu = as_order(lam), as_order(mu)
    if parity not in PARITIES:
        raise DomainError(f"parity must be one of {PARITIES}")
    if N > MAX_SIZE:
        raise ResourceError(f"N = {N} exceeds the dense limit {MAX_SIZE}")
    idx = {"full": np.arange(N + 1), "even": 2 * np.arange(N + 1),
           "odd": 2 * np.arange(N + 1) + 1}[parity]
    top = int(idx[-1])
    x, w = gauss_jacobi(_alpha(lam, mu), _rule_size(top)).half()
    Vmu = orthonormal_table(mu, top, x)[idx]
    Vlam = orthonormal_table(lam, top, x)[idx]
    E = (Vmu * w) @ Vlam.T
    if parity == "full":
        E[(idx[:, None] - idx[None, :]) % 2 == 1] = 0.0
    return TransplantKernel(lam, mu, N, parity, E)


def transplant_apply(lam, mu, f, N_out: int) -> np.ndarray:
    """(T f)(n) = sum_m K(n, m) f(m), n = 0..N_out.

    Streamed through the full symmetric rule: synthesize f in the lam basis,
    then analyze in the mu basis; O((N_out + supp f) Q) work, no matrix.
    Opposite-parity terms cancel between x and -x.
    """
    f = as_seq(f)
    if support(f) > N_out:
        raise DomainError("supp(f) must not exceed N_out")
    return _stream(lam, mu, f, N_out)


def _stream(lam, mu, f: np.ndarray, N_out: int) -> np.ndarray:
    lam, mu = as_order(lam), as_order(mu)
    f = f[:support(f) + 1]
    rule = gauss_jacobi(_alpha(lam, mu), _rule_size(max(N_out, f.size - 1)))
    vals = rule.weights * synthesize(lam, f, rule.nodes)
    return analyze(mu, vals, rule.nodes, N_out)


def isometry_deficiency(lam, mu, f, N_out: int) -> float:
    """||f||^2 - ||T f||^2 on 0..N_out (the part of T f beyond N_out is missing)."""
    g = transplant_apply(lam, mu, f, N_out)
    return float(np.dot(f, f) - np.dot(g, g))


def roundtrip_defect(lam, mu, f, N: int) -> float:
    """||T_{mu,lam}(T_{lam,mu} f |[0,N]) - f|| on [0, N/4]."""
    f = as_seq(f)
    if support(f) > N // 8:
        raise DomainError("needs supp(f) <= N/8")
    g = transplant_apply(lam, mu, f, N)
    h = _stream(mu, lam, g, N // 4)
    ref = np.zeros(N // 4 + 1)
    ref[:min(f.size, ref.size)] = f[:ref.size]
    return float(np.linalg.norm(h - ref))


def unit_chain(lam: float, mu: float) -> list[float]:
    """Orders lam, lam+1, ..., lam+r, mu with mu in (lam+r, lam+r+1]."""
    r = max(0, math.ceil(mu - lam - 1 - 1e-12))
    return [lam + j for j in range(r + 1)] + [mu]


def composition_check(lam, mu, f, N: int) -> float:
    """|| chain of unit steps applied to f - T_{lam,mu} f || on [0, N/4].

    Intermediate results are truncated to [0, N].
    """
    lam, mu = as_order(lam), as_order(mu)
    if not mu > lam:
        raise DomainError("needs mu > lam")
    f = as_seq(f)
    orders = unit_chain(lam, mu)
    g = f
    for a, b in zip(orders[:-1], orders[1:]):
        g = transplant_apply(a, b, g, N)
    direct = _stream(lam, mu, f, N // 4)
    return float(np.linalg.norm(g[:N // 4 + 1] - direct))


def duality_gap(lam, mu, f, g, N_out: int) -> float:
    """|<T_{mu,lam} f, g> - <f, T_{lam,mu} g>| with both sides on [0, N_out]."""
    f, g = as_seq(f), as_seq(g)
    a = transplant_apply(mu, lam, f, N_out)
    b = transplant_apply(lam, mu, g, N_out)
    gg = np.zeros(N_out + 1)
    gg[:min(g.size, N_out + 1)] = g[:N_out + 1]
    ff = np.zeros(N_out + 1)
    ff[:min(f.size, N_out + 1)] = f[:N_out + 1]
    return abs(float(a @ gg - ff @ b))


def weighted_ratio_band(lam, mu, fs, N_out: int, p: float, w) -> tuple[float, float]:
    """(min, max) of ||T f||_{p,w} / ||f||_{p,w} over the rows of ``fs``."""
    ratios = []
    for f in fs:
        f = as_seq(f)
        Tf = transplant_apply(lam, mu, f, N_out)
        fw = np.zeros(N_out + 1)
        fw[:f.size] = f
        ratios.append(weighted_norm(Tf, w, p) / weighted_norm(fw, w, p))
    return float(min(ratios)), float(max(ratios))
