"""The lambda-transform, its quadrature inverse and a spectral-multiplier engine.

``F f(x) = sum_n f(n) phi_n(x)``. On a rule with exponent ``lam - 1/2`` the
polynomial part ``sum_n f(n) p_n(x)`` is what the rule integrates, so all
inner products below are written in terms of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AccuracyError, ConfigurationError
from .hypergroup import as_seq, support
from .specfun import QuadRule, as_order, gauss_jacobi, gauss_jacobi_general, orthonormal_rows

DOUBLING_CAP = 2 ** 15


@dataclass(frozen=True)
class NodeFunction:
    """Values of a function at the nodes of a rule."""

    rule: QuadRule
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[0] != self.rule.count:
            raise ConfigurationError("one value per node is required")

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.rule.nodes, self.values]), delimiter=",",
                   header="node,value", comments="", fmt="%.17g")


def _check_rule(lam: float, rule: QuadRule, exact: bool) -> None:
    if exact and abs(rule.alpha - (lam - 0.5)) > 1e-14:
        raise ConfigurationError(f"rule exponent {rule.alpha} != lam - 1/2 = {lam - 0.5}")


def synthesize(lam, f, x, block: int = 512) -> np.ndarray:
    """sum_n f(n) p_n(x) (the polynomial part of F f)."""
    f = as_seq(f)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.size)
    for n0, P in orthonormal_rows(lam, f.size - 1, x, block):
        out += f[n0:n0 + P.shape[0]] @ P
    return out


def analyze(lam, values, x, N: int, block: int = 512) -> np.ndarray:
    """sum_i values_i p_n(x_i) for n = 0..N."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    values = np.asarray(values, dtype=float)
    out = np.empty((N + 1,) + values.shape[1:])
    for n0, P in orthonormal_rows(lam, N, x, block):
        out[n0:n0 + P.shape[0]] = P @ values
    return out


def forward_transform(lam, f, rule: QuadRule, exact: bool = True) -> NodeFunction:
    """F f at the nodes of ``rule``."""
    lam = as_order(lam)
    _check_rule(lam, rule, exact)
    x = rule.nodes
    vals = synthesize(lam, f, x) * (1 - x * x) ** (lam / 2 - 0.25)
    return NodeFunction(rule, vals)


def inverse_transform(lam, F: NodeFunction, N: int) -> np.ndarray:
    """f(n) = int F phi_n dx, n = 0..N, by the rule carried by ``F``.

    With rule exponent alpha the integrand is split as
    ``[F (1-x^2)^(lam/2 - 1/4 - alpha)] p_n (1-x^2)^alpha``; the effective
    weights are ``omega_i (1 - x_i^2)^(lam/2 - 1/4 - alpha)``.
    """
    lam = as_order(lam)
    rule = F.rule
    x = rule.nodes
    eff = rule.weights * (1 - x * x) ** (lam / 2 - 0.25 - rule.alpha)
    return analyze(lam, eff * F.values, x, N)


def plancherel_norm2(lam, f, rule: QuadRule) -> float:
    """||F f||^2 on (-1,1) through the rule (exact when Q >= supp(f) + 1)."""
    lam = as_order(lam)
    _check_rule(lam, rule, True)
    s = synthesize(lam, f, rule.nodes)
    return float(np.dot(rule.weights, s * s))


def default_rule_size(n_in: int, n_out: int, margin: int = 8) -> int:
    """Nodes needed to integrate p_n p_m exactly for n <= n_in, m <= n_out."""
    return (n_in + n_out) // 2 + 1 + margin


def spectral_sweep(lam, f, multipliers: np.ndarray, rule: QuadRule, n_out: int) -> np.ndarray:
    """Apply several node-sampled multipliers at once.

    ``multipliers`` has shape (Q,) or (Q, T); returns shape (n_out+1,) or
    (n_out+1, T) with ``out[n] = sum_i omega_i m(x_i) (sum_k f(k) p_k(x_i)) p_n(x_i)``.
    """
    lam = as_order(lam)
    _check_rule(lam, rule, True)
    c = rule.weights * synthesize(lam, f, rule.nodes)
    M = np.asarray(multipliers, dtype=float)
    return analyze(lam, (c * M.T).T, rule.nodes, n_out)


def spectral_apply(lam, f, multiplier: Callable[[np.ndarray], np.ndarray], N_out: int | None = None,
                   rule: QuadRule | None = None, tol: float = 1e-10, cap: int = DOUBLING_CAP,
                   spread: float = 0.0, q_min: int = 0, return_info: bool = False):
    """F^{-1}[m F f] truncated to n <= N_out.

    Starts from ``rule`` (or the smallest exact size for polynomial data) and
    doubles the node count until two successive outputs agree to ``tol`` in
    l^2 relative to ||f||_2. ``N_out`` defaults to supp(f) + ceil(8 (1 + spread)).
    ``q_min`` lets callers who know the multiplier's scale skip rules that
    are too coarse to see it (two such rules can agree on a wrong answer).
    """
    lam = as_order(lam)
    f = as_seq(f)
    if N_out is None:
        N_out = support(f) + math.ceil(8 * (1 + spread))
    Q = rule.count if rule is not None else default_rule_size(f.size - 1, N_out)
    Q = max(Q, q_min)
    scale = max(float(np.linalg.norm(f)), np.finfo(float).tiny)

    def run(q):
        r = gauss_jacobi(lam - 0.5, q)
        return spectral_sweep(lam, f, multiplier(r.nodes), r, N_out)

    prev = run(Q)
    while True:
        if 2 * Q > cap:
            raise AccuracyError(f"spectral_apply did not settle within {cap} nodes")
        Q *= 2
        cur = run(Q)
        diff = float(np.linalg.norm(cur - prev)) / scale
        if diff <= tol:
            break
        prev = cur
    if return_info:
        return cur, {"nodes": Q, "agreement": diff}
    return cur


def sqrt_variable_rule(lam, Q: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes x_i and weights W_i with sum_i W_i g(x_i) ~ int g (1-x^2)^(lam-1/2) dx,
    built in the variable y = sqrt((1-x)/2) in [0, 1].

    With x = 1 - 2y^2 the measure becomes 2^(2lam+1) y^(2lam) (1-y^2)^(lam-1/2) dy,
    so functions of s = sqrt(2(1-x)) = 2y are smooth in the integration variable.
    """
    lam = as_order(lam)
    alpha, beta = lam - 0.5, 2 * lam
    u, w = gauss_jacobi_general(alpha, beta, Q)
    y = 0.5 * (1 + u)
    x = 1 - 2 * y * y
    W = 2.0 ** (2 * lam + 1 - alpha - beta - 1) * w * (1 + y) ** (lam - 0.5)
    return x, W


def spectral_apply_sqrt(lam, f, multiplier_s: Callable[[np.ndarray], np.ndarray], N_out: int,
                        tol: float = 1e-10, cap: int = 2 ** 13, return_info: bool = False):
    """Like ``spectral_apply`` for multipliers given as functions of s = sqrt(2(1-x)).

    Such multipliers (Poisson type) are not smooth in x at x = 1; in the
    variable y = s/2 they are, and a Jacobi rule in y converges geometrically.
    """
    lam = as_order(lam)
    f = as_seq(f)
    Q = support(f) + N_out + 16
    scale = max(float(np.linalg.norm(f)), np.finfo(float).tiny)

    def run(q):
        x, W = sqrt_variable_rule(lam, q)
        s = np.sqrt(2.0 * np.clip(1.0 - x, 0.0, None))
        return analyze(lam, W * multiplier_s(s) * synthesize(lam, f, x), x, N_out)

    prev = run(Q)
    while True:
        if 2 * Q > cap:
            raise AccuracyError(f"spectral_apply_sqrt did not settle within {cap} nodes")
        Q *= 2
        cur = run(Q)
        diff = float(np.linalg.norm(cur - prev)) / scale
        if diff <= tol:
            break
        prev = cur
    if return_info:
        return cur, {"nodes": Q, "agreement": diff}
    return cur
