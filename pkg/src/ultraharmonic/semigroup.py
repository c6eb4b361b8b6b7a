"""Heat and Poisson semigroups on the lattice, their t-derivatives,
Littlewood-Paley g-functions, maximal operators and kernel envelopes.

Two routes are kept apart throughout: hypergroup convolution with the Bessel
kernel (sequence side) and multipliers on the transform side. On the
transform side

* heat:    ``m_t(x) = exp(-2 t (1 - x))``
* Poisson: ``m_t(x) = exp(-t s(x))`` with ``s(x) = sqrt(2 (1 - x))``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import AccuracyError, ConfigurationError, DomainError
from .harmonic_tools import MAX_OFFSET, KernelAccumulator, KernelMatrix
from .hypergroup import apply_laplacian, as_seq, convolution_matrix, support
from .specfun import (LOG_SQRT_PI, as_order, gauss_jacobi, log_scaled_heat_factor,
                      log_scaled_heat_row, log_weight_w, orthonormal_table)
from .transform import analyze, spectral_apply, spectral_apply_sqrt, sqrt_variable_rule, synthesize

KERNEL_CUT = 1e-18
SQRT_PI = math.sqrt(math.pi)


class SemigroupKind(enum.Enum):
    HEAT = "heat"
    POISSON = "poisson"


@dataclass(frozen=True)
class TimeGrid:
    """Log-uniform grid on [t_min, t_max].

    ``round(decades * points_per_decade)`` steps; when that product is an
    integer, ``refine()`` keeps every old point.
    """

    t_min: float = 1e-8
    t_max: float = 1e8
    points_per_decade: int = 40

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max and math.isfinite(self.t_max)):
            raise ConfigurationError("need 0 < t_min < t_max < inf")
        if int(self.points_per_decade) != self.points_per_decade or self.points_per_decade < 1:
            raise ConfigurationError("points_per_decade must be a positive integer")

    @property
    def steps(self) -> int:
        return max(1, round(math.log10(self.t_max / self.t_min) * self.points_per_decade))

    @property
    def points(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.steps + 1)

    @property
    def log_step(self) -> float:
        return math.log(self.t_max / self.t_min) / self.steps

    def trapezoid_weights(self) -> np.ndarray:
        """Weights of the trapezoid rule in ln t (i.e. for dt/t)."""
        w = np.full(self.steps + 1, self.log_step)
        w[[0, -1]] *= 0.5
        return w

    def refine(self) -> "TimeGrid":
        return TimeGrid(self.t_min, self.t_max, 2 * self.points_per_decade)

    def spans(self, lo: float, hi: float) -> bool:
        return self.t_min <= lo * (1 + 1e-12) and self.t_max >= hi * (1 - 1e-12)

    @classmethod
    def parse(cls, text: str) -> "TimeGrid":
        """From ``"t_min,t_max,ppd"``."""
        try:
            a, b, c = text.split(",")
            return cls(float(a), float(b), int(c))
        except ValueError as exc:
            raise ConfigurationError(f"bad time grid {text!r}; expected min,max,ppd") from exc


def _check_t(t: float) -> None:
    if not t > 0:
        raise DomainError("t must be > 0")


def _as_kind(kind) -> SemigroupKind:
    try:
        return kind if isinstance(kind, SemigroupKind) else SemigroupKind(str(kind).lower())
    except ValueError as exc:
        raise ConfigurationError(f"unknown semigroup {kind!r}") from exc


# ------------------------------------------------------------ heat kernel

def _log_prefactor(lam: float, n) -> np.ndarray:
    # sqrt(pi) Gamma(lam + 1/2) sqrt(w(n))
    return LOG_SQRT_PI + special.gammaln(lam + 0.5) + 0.5 * log_weight_w(lam, n)


def heat_kernel_coeff(lam, t: float, n: int) -> float:
    """h_t(n) = sqrt(pi) Gamma(lam+1/2) sqrt(w(n)) e^{-2t} t^{-lam} I_{lam+n}(2t)."""
    lam = as_order(lam)
    _check_t(t)
    if n < 0:
        return 0.0
    return math.exp(_log_prefactor(lam, n) + log_scaled_heat_factor(lam, int(n), t))


def _cut_tail(h: np.ndarray) -> np.ndarray:
    """Zero everything from the first entry past the peak below KERNEL_CUT * max."""
    peak = int(np.argmax(h))
    small = np.flatnonzero(h[peak:] < KERNEL_CUT * h[peak])
    if small.size:
        h[peak + small[0]:] = 0.0
    return h


def heat_kernel_row(lam, t: float, n_max: int | None = None) -> np.ndarray:
    """h_t(0..n_max); by default n_max is where the row falls below 1e-18 of its max."""
    lam = as_order(lam)
    _check_t(t)
    if n_max is not None:
        h = np.exp(_log_prefactor(lam, np.arange(n_max + 1)) + log_scaled_heat_row(lam, n_max, t))
        return _cut_tail(h)
    # the row is ~ Gaussian of width sqrt(4t) for large t and ~ t^n / n! for small t
    n_max = int(2 * t + 13 * math.sqrt(t) + 16)
    while True:
        h = np.exp(_log_prefactor(lam, np.arange(n_max + 1)) + log_scaled_heat_row(lam, n_max, t))
        if h[-1] < KERNEL_CUT * h.max():
            h = _cut_tail(h)
            return h[:support(h) + 1]
        n_max *= 2


def psi_heat_kernel(lam, t: float, k: int) -> float:
    """psi_t(k) = t d/dt h_t(k), from h_t(k-1), h_t(k), h_t(k+1) (h_t(-1) = 0)."""
    lam = as_order(lam)
    _check_t(t)
    lw = lambda j: log_weight_w(lam, j)
    out = -2.0 * t * heat_kernel_coeff(lam, t, k)
    if k >= 1:
        out += k / (lam + k) * math.exp(0.5 * (lw(k) - lw(k - 1))) * t * heat_kernel_coeff(lam, t, k - 1)
    out += (2 * lam + k) / (lam + k) * math.exp(0.5 * (lw(k) - lw(k + 1))) * t * heat_kernel_coeff(lam, t, k + 1)
    return out


def psi_kernel_row(lam, t: float, n_max: int | None = None) -> np.ndarray:
    """psi_t(0..n_max) as t * (Laplacian of the heat row)."""
    lam = as_order(lam)
    h = heat_kernel_row(lam, t, None if n_max is None else n_max + 1)
    out = t * apply_laplacian(lam, h)
    return out[:len(h) if n_max is None else n_max + 1]


# ------------------------------------------------------------- heat apply

def _default_out(lam: float, t: float, f: np.ndarray, extra: int = 0) -> int:
    return support(f) + extra + len(heat_kernel_row(lam, t)) - 1


def _heat_conv(lam: float, t: float, A: np.ndarray) -> np.ndarray:
    h = heat_kernel_row(lam, t, A.shape[1] - 1)
    return A @ h


def _heat_nodes(t: float) -> int:
    # e^{-2t(1-x)} lives on 1 - x ~ 1/t; Gauss nodes near x = 1 are ~ 1/Q^2 apart
    return int(math.sqrt(37.0 * t)) + 8


def heat_multiplier(t: float, k: int = 0):
    """x -> (2(x-1))^k exp(-2t(1-x)); the transform side of d^k/dt^k W_t."""
    return lambda x: (2.0 * (x - 1.0)) ** k * np.exp(-2.0 * t * (1.0 - x))


def heat_apply(lam, t: float, f, route: str = "convolution", n_out: int | None = None) -> np.ndarray:
    """W_t f on 0..n_out (default: the full support of h_t # f)."""
    lam = as_order(lam)
    _check_t(t)
    f = as_seq(f)
    if n_out is None:
        n_out = _default_out(lam, t, f)
    if route == "convolution":
        return _heat_conv(lam, t, convolution_matrix(lam, f, n_out))
    if route == "spectral":
        return spectral_apply(lam, f, heat_multiplier(t), N_out=n_out, q_min=_heat_nodes(t))
    raise ConfigurationError(f"unknown route {route!r}")


def heat_time_derivative(lam, t: float, k: int, f, route: str = "laplacian",
                         n_out: int | None = None) -> np.ndarray:
    """d^k/dt^k W_t f.

    ``laplacian``: W_t applied to Delta^k f. ``spectral``: multiplier
    (2(x-1))^k e^{-2t(1-x)}. ``psi`` (k = 1): (psi_t # f) / t.
    """
    lam = as_order(lam)
    _check_t(t)
    if k < 1:
        raise DomainError("derivative order must be >= 1")
    f = as_seq(f)
    if n_out is None:
        n_out = _default_out(lam, t, f, extra=k)
    if route == "laplacian":
        return _heat_conv(lam, t, convolution_matrix(lam, apply_laplacian(lam, f, k), n_out))
    if route == "spectral":
        return spectral_apply(lam, f, heat_multiplier(t, k), N_out=n_out, q_min=_heat_nodes(t))
    if route == "psi":
        if k != 1:
            raise ConfigurationError("the psi route gives the first derivative only")
        A = convolution_matrix(lam, f, n_out)
        return A @ psi_kernel_row(lam, t, A.shape[1] - 1) / t
    raise ConfigurationError(f"unknown route {route!r}")


# ---------------------------------------------------------------- Poisson

def poisson_multiplier(t: float, k: int = 0):
    """x -> (-s)^k exp(-t s), s = sqrt(2(1-x))."""
    def m(x):
        s = np.sqrt(2.0 * np.clip(1.0 - x, 0.0, None))
        return (-s) ** k * np.exp(-t * s)
    return m


# t^k d^k/dt^k of t exp(-t^2/(4s)) in the variable u = t^2/(4s), up to e^{-u}
_SUB_FACTORS = {0: lambda u: 1.0, 1: lambda u: 1.0 - 2.0 * u,
                2: lambda u: 4.0 * u * u - 6.0 * u}
_Y_TOP = math.log(60.0)
MAX_HEAT_TIME = 1e12


def _subordinate(lam: float, t: float, A: np.ndarray, k: int, scale: float,
                 tol: float, h0: float = 0.5, max_halvings: int = 8) -> np.ndarray:
    """(1/sqrt pi) int e^{-u} u^{-1/2} g_k(u) W_{t^2/(4u)} f du.

    Trapezoid rule in y = ln u, where the integrand is analytic and decays
    like e^{(lam+1) y} to the left and doubly exponentially to the right.
    The left end is pushed out until the discarded part is negligible, then
    the step halves (reusing old points) until two sums agree to ``tol``.
    """
    factor = _SUB_FACTORS[k]
    cache: dict[float, np.ndarray] = {}

    def term(y):
        if y not in cache:
            u = math.exp(y)
            s = t * t / (4.0 * u)
            if s > MAX_HEAT_TIME:
                raise AccuracyError("subordination needs heat times beyond the supported range")
            cache[y] = math.exp(-u + 0.5 * y) / SQRT_PI * factor(u) * _heat_conv(lam, s, A)
        return cache[y]

    y_knee = min(math.log(t * t / 4.0), 0.0)
    j, tail = 0, []
    total = np.zeros(A.shape[0])
    while True:
        y = _Y_TOP - j * h0
        v = term(y)
        total += v
        tail = (tail + [float(np.linalg.norm(v))])[-4:]
        j += 1
        if y < y_knee - 4 and len(tail) == 4 and h0 * sum(tail) < 1e-3 * tol * scale:
            break
    y_low = _Y_TOP - (j - 1) * h0
    h = h0
    prev = h * total
    for _ in range(max_halvings):
        mids = np.arange(_Y_TOP - 0.5 * h, y_low, -h)
        total = total + sum(term(float(y)) for y in mids)
        h *= 0.5
        cur = h * total
        if np.linalg.norm(cur - prev) <= tol * scale:
            return cur
        prev = cur
    raise AccuracyError("subordination quadrature did not settle")


def _poisson_out(f: np.ndarray, n_out: int | None) -> int:
    return support(f) + 64 if n_out is None else n_out


def poisson_apply(lam, t: float, f, route: str = "subordination", n_out: int | None = None,
                  tol: float = 1e-9) -> np.ndarray:
    """P_t f on 0..n_out (default supp(f) + 64; the kernel has polynomial tails)."""
    return _poisson(lam, t, 0, f, route, n_out, tol)


def poisson_time_derivative(lam, t: float, k: int, f, route: str = "spectral",
                            n_out: int | None = None, tol: float = 1e-9) -> np.ndarray:
    """d^k/dt^k P_t f; the subordination route exists for k <= 2."""
    if k < 1:
        raise DomainError("derivative order must be >= 1")
    return _poisson(lam, t, k, f, route, n_out, tol)


def _poisson(lam, t, k, f, route, n_out, tol):
    lam = as_order(lam)
    _check_t(t)
    f = as_seq(f)
    n_out = _poisson_out(f, n_out)
    scale = max(float(np.linalg.norm(f)), np.finfo(float).tiny)
    if route == "spectral":
        return spectral_apply_sqrt(lam, f, lambda s: (-s) ** k * np.exp(-t * s), n_out, tol=tol)
    if route == "subordination":
        if k > 2:
            raise ConfigurationError("subordination derivatives are provided for k <= 2")
        A = convolution_matrix(lam, f, n_out)
        return _subordinate(lam, t, A, k, scale, tol) / t ** k
    raise ConfigurationError(f"unknown route {route!r}")


# ------------------------------------------- sweeps over many t at once

def _scaled_derivative_multipliers(kind: SemigroupKind, k: int, x: np.ndarray,
                                   ts: np.ndarray) -> np.ndarray:
    """(Q, T) array of t^k d^k/dt^k m_t(x)."""
    if kind is SemigroupKind.HEAT:
        u = 2.0 * np.outer(1.0 - x, ts)
        return (-u) ** k * np.exp(-u)
    u = np.outer(np.sqrt(2.0 * np.clip(1.0 - x, 0.0, None)), ts)
    return (-u) ** k * np.exp(-u)


@dataclass
class SweepOperator:
    """Semigroup restricted to outputs 0..n_out through a fixed Gauss rule.

    With Q = rule_factor (n_out + 1) nodes the operator is
    ``f -> sum_i omega_i m(x_i) F f(x_i) p_n(x_i)``; the t-dependence sits in
    a (Q, T) multiplier array so one recurrence pass serves all t.
    """

    lam: float
    f: np.ndarray
    n_out: int
    rule_factor: int = 2
    coeff: np.ndarray = field(init=False, repr=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.lam = as_order(self.lam)
        self.f = as_seq(self.f)
        Q = self.rule_factor * (self.n_out + 1)
        if Q < support(self.f) + 1:
            raise ConfigurationError("rule too small for the input support")
        rule = gauss_jacobi(self.lam - 0.5, Q)
        self.nodes = rule.nodes
        self.coeff = rule.weights * synthesize(self.lam, self.f, rule.nodes)

    def values(self, kind: SemigroupKind, k: int, ts, chunk: int = 128) -> np.ndarray:
        """(n_out+1, T) array of t^k d^k/dt^k T_t f(n)."""
        kind = _as_kind(kind)
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.empty((self.n_out + 1, ts.size))
        for j in range(0, ts.size, chunk):
            M = _scaled_derivative_multipliers(kind, k, self.nodes, ts[j:j + chunk])
            out[:, j:j + chunk] = analyze(self.lam, self.coeff[:, None] * M, self.nodes, self.n_out)
        return out


def _check_grid(grid: TimeGrid) -> None:
    if not grid.spans(1e-8, 1e8):
        raise ConfigurationError("the time grid must span at least [1e-8, 1e8]")


def g_function(kind, lam, k: int, f, grid: TimeGrid | None = None, n_out: int | None = None,
               rule_factor: int = 2, tol: float = 1e-6, max_refine: int = 4,
               return_info: bool = False):
    """g^k(n) = (int |t^k d^k/dt^k T_t f(n)|^2 dt/t)^{1/2} for n = 0..n_out.

    Log-trapezoid on ``grid``; points per decade double until the l^2
    aggregate moves by at most ``tol`` (relative). Refinement reuses the old
    points, so each pass only evaluates the new midpoints.
    """
    kind = _as_kind(kind)
    if k < 1:
        raise DomainError("order must be >= 1")
    grid = grid or TimeGrid()
    _check_grid(grid)
    f = as_seq(f)
    if n_out is None:
        n_out = support(f) + 64
    op = SweepOperator(lam, f, n_out, rule_factor)
    ts = grid.points
    V = op.values(kind, k, ts)
    w = np.ones(ts.size)
    w[[0, -1]] = 0.5
    raw = (V * V) @ w  # trapezoid sum without the step
    g2 = raw * grid.log_step
    agg = math.sqrt(g2.sum())
    for _ in range(max_refine):
        finer = grid.refine()
        mids = np.sqrt(ts[:-1] * ts[1:])
        Vm = op.values(kind, k, mids)
        raw = raw + (Vm * Vm).sum(axis=1)
        g2 = raw * finer.log_step
        new = math.sqrt(g2.sum())
        grid, ts = finer, np.sort(np.concatenate([ts, mids]))
        change = abs(new - agg) / new if new > 0 else 0.0
        agg = new
        if change <= tol:
            g = np.sqrt(g2)
            info = {"points_per_decade": grid.points_per_decade, "change": change,
                    "nodes": op.rule_factor * (n_out + 1)}
            return (g, info) if return_info else g
    raise AccuracyError("g-function grid refinement did not settle")


def g_function_many(kind, lam, k: int, fs, grid: TimeGrid | None = None, n_out: int | None = None,
                    rule_factor: int = 2, tol: float = 1e-6, max_refine: int = 4) -> np.ndarray:
    """g^k for each row of ``fs`` at once; returns (len(fs), n_out+1).

    Same discretisation and refinement rule as ``g_function``, with the
    stopping test applied to the worst row.
    """
    kind = _as_kind(kind)
    grid = grid or TimeGrid()
    _check_grid(grid)
    fs = np.atleast_2d(np.asarray(fs, dtype=float))
    lam = as_order(lam)
    if n_out is None:
        n_out = max(support(f) for f in fs) + 64
    rule = gauss_jacobi(lam - 0.5, rule_factor * (n_out + 1))
    x = rule.nodes
    C = rule.weights[:, None] * np.stack([synthesize(lam, f, x) for f in fs], axis=1)  # (Q, F)

    def sumsq(ts, chunk=max(1, 4096 // fs.shape[0])):
        acc = np.zeros((fs.shape[0], n_out + 1))
        for j in range(0, ts.size, chunk):
            M = _scaled_derivative_multipliers(kind, k, x, ts[j:j + chunk])
            B = (C[:, :, None] * M[:, None, :]).reshape(x.size, -1)
            V = analyze(lam, B, x, n_out).reshape(n_out + 1, fs.shape[0], -1)
            acc += np.einsum("nft,nft->fn", V, V)
        return acc

    ts = grid.points
    ends = sumsq(ts[[0, -1]])
    raw = sumsq(ts[1:-1]) + 0.5 * ends
    agg = np.sqrt((raw * grid.log_step).sum(axis=1))
    for _ in range(max_refine):
        finer = grid.refine()
        mids = np.sqrt(ts[:-1] * ts[1:])
        raw = raw + sumsq(mids)
        new = np.sqrt((raw * finer.log_step).sum(axis=1))
        change = float(np.max(np.abs(new - agg) / np.where(new > 0, new, 1.0)))
        grid, ts, agg = finer, np.sort(np.concatenate([ts, mids])), new
        if change <= tol:
            return np.sqrt(raw * grid.log_step)
    raise AccuracyError("g-function grid refinement did not settle")


def g_aggregate_spectral(kind, lam, k: int, f, grid: TimeGrid | None = None) -> float:
    """||g^k f||_2^2 computed on the transform side.

    int int |t^k d_t^k m_t(x)|^2 |F f(x)|^2 dx dt/t with an exact Gauss rule
    in x (Plancherel) and the log-trapezoid in t.
    """
    kind = _as_kind(kind)
    lam = as_order(lam)
    grid = grid or TimeGrid()
    f = as_seq(f)
    rule = gauss_jacobi(lam - 0.5, f.size + 8)
    F2 = rule.weights * synthesize(lam, f, rule.nodes) ** 2
    M = _scaled_derivative_multipliers(kind, k, rule.nodes, grid.points)
    return float(F2 @ (M * M) @ grid.trapezoid_weights())


def refined_sup(evaluate, ts: np.ndarray, passes: int = 2, zoom: int = 8,
                vertex: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise sup over t of a nonnegative (R, T) array ``evaluate(ts)``.

    Candidates: the grid, then ``passes`` local log-t refinements by ``zoom``
    around each row's maximiser, then the vertex of a parabola in ln t
    through the best point and its neighbours. Adding candidates never
    lowers the result. Returns (sup, argmax t).
    """
    lt = np.log(np.asarray(ts, dtype=float))
    vals = evaluate(np.exp(lt))
    rows = np.arange(vals.shape[0])
    step = float(np.diff(lt).max()) if lt.size > 1 else 1.0
    for _ in range(passes):
        best = np.unique(np.argmax(vals, axis=1))
        step /= zoom
        offs = np.arange(-zoom + 1, zoom) * step
        new = np.setdiff1d(np.unique((lt[best][:, None] + offs[None, :]).ravel()), lt)
        if new.size == 0:
            break
        lt = np.concatenate([lt, new])
        vals = np.concatenate([vals, evaluate(np.exp(new))], axis=1)
        order = np.argsort(lt)
        lt, vals = lt[order], vals[:, order]
    if vertex and lt.size >= 3:
        i = np.clip(np.argmax(vals, axis=1), 1, lt.size - 2)
        x0, x1, x2 = lt[i - 1], lt[i], lt[i + 1]
        y0, y1, y2 = vals[rows, i - 1], vals[rows, i], vals[rows, i + 1]
        den = (x0 - x1) * (x0 - x2) * (x1 - x2)
        den = np.where(den == 0, 1.0, den)
        a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
        b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den
        xv = np.where(a < 0, -b / np.where(a == 0, 1.0, 2 * a), x1)
        cand = np.setdiff1d(np.unique(np.clip(xv, x0, x2)), lt)
        if cand.size:
            lt = np.concatenate([lt, cand])
            vals = np.concatenate([vals, evaluate(np.exp(cand))], axis=1)
    j = np.argmax(vals, axis=1)
    return vals[rows, j], np.exp(lt[j])


def maximal(kind, lam, f, grid: TimeGrid | None = None, n_out: int | None = None,
            rule_factor: int = 2, passes: int = 2, zoom: int = 8, vertex: bool = True,
            return_argmax: bool = False):
    """Grid lower bound for sup_t |T_t f(n)|, n = 0..n_out.

    Candidates are those of ``refined_sup`` plus the t -> 0 limit |f(n)|
    (reported with argmax t = 0).
    """
    kind = _as_kind(kind)
    grid = grid or TimeGrid()
    _check_grid(grid)
    f = as_seq(f)
    if n_out is None:
        n_out = support(f) + 64
    op = SweepOperator(lam, f, n_out, rule_factor)
    sup, arg = refined_sup(lambda ts: np.abs(op.values(kind, 0, ts)), grid.points,
                           passes, zoom, vertex)
    limit = np.zeros(n_out + 1)
    m = min(f.size, n_out + 1)
    limit[:m] = np.abs(f[:m])
    out = np.maximum(sup, limit)
    if return_argmax:
        return out, np.where(limit >= sup, 0.0, arg)
    return out


# --------------------------------------------------------- kernel envelopes

KERNEL_KINDS = ("heat", "psi", "poisson-deriv")


def kernel_rule_size(N: int, t: float, kind: str = "heat") -> int:
    """Gauss nodes for the t-slice of a kernel on {0..N}^2, on a ladder of multiples of N+1.

    Heat-type multipliers need Q >~ N + sqrt(37 t). The Poisson kernel is
    integrated in y = sqrt((1-x)/2), where the polynomial part has twice the
    degree, hence the 2(N+1) base.
    """
    base = 2 * (N + 1) if kind == "poisson-deriv" else N + 1
    need = base + math.sqrt(37.0 * t) + 8
    return (N + 1) * math.ceil(need / (N + 1))


def _kernel_multiplier(kind: str, t: float):
    if kind == "heat":
        return heat_multiplier(t)
    if kind == "psi":
        return lambda x: 2.0 * t * (x - 1.0) * np.exp(-2.0 * t * (1.0 - x))
    if kind == "poisson-deriv":
        return lambda x: t * poisson_multiplier(t, 1)(x)
    raise ConfigurationError(f"unknown kernel {kind!r}")


def kernel_slices(kind: str, lam, N: int, ts):
    """Yield (t, K_t) with K_t(n, m) = tau_n(k_t)(m) computed spectrally:
    ``K_t = V diag(omega m_t(x)) V^T`` with V[n, i] = p_n(x_i)."""
    lam = as_order(lam)
    V, Q = None, None
    for t in np.asarray(ts, dtype=float):
        q = kernel_rule_size(N, t, kind)
        if q != Q:
            if kind == "poisson-deriv":
                x, w = sqrt_variable_rule(lam, q)
            else:
                rule = gauss_jacobi(lam - 0.5, q)
                x, w = rule.nodes, rule.weights
            V = orthonormal_table(lam, N, x)
            Q = q
        d = w * _kernel_multiplier(kind, t)(x)
        yield t, (V * d) @ V.T


def default_kernel_grid(N: int) -> TimeGrid:
    return TimeGrid(1e-3, float(N) ** 2, 5)


def kernel_envelope(kind: str, lam, N: int, grid: TimeGrid | None = None,
                    max_offset: int = MAX_OFFSET) -> KernelMatrix:
    """t-norm of the kernel on {0..N}^2: sup over the grid for ``heat``,
    L^2(dt/t) (log-trapezoid) for ``psi`` and ``poisson-deriv``."""
    if kind not in KERNEL_KINDS:
        raise ConfigurationError(f"unknown kernel {kind!r}")
    grid = grid or default_kernel_grid(N)
    acc = KernelAccumulator(N, max_offset, "sup" if kind == "heat" else "l2")
    for (t, K), w in zip(kernel_slices(kind, lam, N, grid.points), grid.trapezoid_weights()):
        acc.add(K, w)
    params = {"lambda": float(lam), "t_grid": [grid.t_min, grid.t_max, grid.points_per_decade],
              "norm": acc.norm}
    return acc.result(kind, params)


# ------------------------------------------------------- decay envelopes

def decay_envelope(lam, k_max: int, which: str = "heat", grid: TimeGrid | None = None) -> np.ndarray:
    """(k+1)^p sup_t |q_t(k)| for k = 0..k_max.

    ``heat``: q = e^{-2t} t^{-lam} I_{lam+k}(2t), p = 2 lam + 1.
    ``psi``:  q = psi_t(k), p = lam + 1.
    """
    lam = as_order(lam)
    grid = grid or TimeGrid(1e-4, 1e7, 20)
    ks = np.arange(k_max + 1)
    if which == "heat":
        row = lambda t: np.exp(log_scaled_heat_row(lam, k_max, t))
        p = 2 * lam + 1
    elif which == "psi":
        row = lambda t: np.abs(psi_kernel_row(lam, t, k_max))
        p = lam + 1
    else:
        raise ConfigurationError(f"unknown envelope {which!r}")
    sup, _ = refined_sup(lambda ts: np.column_stack([row(t) for t in ts]), grid.points)
    return (ks + 1.0) ** p * sup
