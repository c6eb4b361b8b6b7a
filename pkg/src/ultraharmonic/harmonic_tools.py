"""Weighted l^p tools and a numeric Calderon-Zygmund kernel certifier.

Kernels are handled as dense matrices of norms: for a family K_t indexed by
time, ``entries[n, m]`` holds sup_t |K_t(n, m)| and the difference arrays hold
sup_t |K_t(n+d, m) - K_t(n, m)| (rows) and sup_t |K_t(n, m+d) - K_t(n, m)|
(columns). For a scalar kernel all three come from the matrix itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .hypergroup import as_seq

MAX_OFFSET = 8


# ----------------------------------------------------------------- weights

@dataclass(frozen=True)
class WeightSeq:
    """Strictly positive weight w(0..N)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0 or np.any(~(v > 0)):
            raise DomainError("weights must be a nonempty positive vector")
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size - 1


def power_weight(a: float, N: int) -> WeightSeq:
    """w(n) = (n + 1)^a for n = 0..N."""
    return WeightSeq(np.arange(1, N + 2, dtype=float) ** a)


def _wvals(w) -> np.ndarray:
    return w.values if isinstance(w, WeightSeq) else WeightSeq(np.asarray(w, dtype=float)).values


def ap_constant(w, p: float, N: int | None = None) -> float:
    """Max over windows [n, m] in [0, N] of the A_p quantity.

    p > 1:  (m-n+1)^{-p} (sum w) (sum w^{-1/(p-1)})^{p-1}
    p = 1:  (m-n+1)^{-1} (sum w) max 1/w
    """
    if not p >= 1:
        raise DomainError("p must be >= 1")
    v = _wvals(w)
    N = v.size - 1 if N is None else int(N)
    if N > v.size - 1:
        raise DomainError("N exceeds the weight length")
    v = v[:N + 1]
    S1 = np.concatenate([[0.0], np.cumsum(v)])
    best = 0.0
    if p == 1:
        inv = 1.0 / v
        for n in range(N + 1):
            L = np.arange(1, N - n + 2, dtype=float)
            q = (S1[n + 1:] - S1[n]) / L * np.maximum.accumulate(inv[n:])
            best = max(best, float(q.max()))
        return best
    dual = v ** (-1.0 / (p - 1))
    S2 = np.concatenate([[0.0], np.cumsum(dual)])
    for n in range(N + 1):
        L = np.arange(1, N - n + 2, dtype=float)
        q = (S1[n + 1:] - S1[n]) / L * ((S2[n + 1:] - S2[n]) / L) ** (p - 1)
        best = max(best, float(q.max()))
    return best


def weighted_norm(f, w, p: float) -> float:
    """(sum |f|^p w)^{1/p}; sup |f| at p = inf."""
    if not p >= 1:
        raise DomainError("p must be >= 1")
    f = np.abs(as_seq(f))
    v = _wvals(w)[:f.size]
    if f.size > v.size:
        raise DomainError("weight shorter than sequence")
    if math.isinf(p):
        return float(f.max())
    return float(np.sum(f ** p * v) ** (1.0 / p))


def weak_quasinorm(f, w) -> float:
    """sup_s s * w({|f| > s}), evaluated at the level jumps."""
    f = np.abs(as_seq(f))
    v = _wvals(w)[:f.size]
    order = np.argsort(-f, kind="stable")
    fs, ws = f[order], np.cumsum(v[order])
    # s just below a distinct value fs[j] captures every index with |f| >= fs[j]
    last = np.r_[fs[1:] != fs[:-1], True]
    cand = fs[last] * ws[last]
    return float(cand.max()) if cand.size else 0.0


# --------------------------------------------------------------- Hardy / M

def hardy0(g) -> np.ndarray:
    """H_0 g(n) = n^{-1} sum_{m<=n} g(m); entry 0 is undefined (nan)."""
    g = as_seq(g)
    out = np.cumsum(g)
    n = np.arange(g.size, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = out / n
    out[0] = np.nan
    return out


def hardy_inf(g) -> np.ndarray:
    """H_inf g(n) = sum_{m>=n} g(m)/m on the finite support; entry 0 is nan."""
    g = as_seq(g)
    out = np.full(g.size, np.nan)
    if g.size > 1:
        m = np.arange(1, g.size, dtype=float)
        out[1:] = np.cumsum((g[1:] / m)[::-1])[::-1]
    return out


def _check_nonneg(g) -> np.ndarray:
    g = as_seq(g)
    if np.any(g < 0):
        raise DomainError("maximal function needs g >= 0")
    return g


def hl_maximal_brute(g) -> np.ndarray:
    """Noncentered maximal function by scanning every interval."""
    g = _check_nonneg(g)
    N = g.size
    S = np.concatenate([[0.0], np.cumsum(g)])
    M = np.zeros(N)
    for a in range(N):
        avg = (S[a + 1:] - S[a]) / np.arange(1, N - a + 1)
        # best interval [a, b] with b >= n, for every n >= a
        tail = np.maximum.accumulate(avg[::-1])[::-1]
        np.maximum(M[a:], tail, out=M[a:])
    return M


def hl_maximal(g, method: str = "stack") -> np.ndarray:
    """Noncentered Hardy-Littlewood maximal function on {0..N}.

    ``stack``: the averages are slopes between points of the cumulative-sum
    graph; for each n the best pair is a bridge between the lower hull of the
    prefix points and the upper hull of the suffix points. Both hull families
    are built with a monotone stack and stored as parent pointers.
    """
    if method == "brute":
        return hl_maximal_brute(g)
    if method != "stack":
        raise DomainError(f"unknown method {method!r}")
    g = _check_nonneg(g)
    N = g.size
    S = np.concatenate([[0.0], np.cumsum(g)])
    P = N + 1  # points 0..N

    def cross(o, a, b):
        return (a - o) * (S[b] - S[o]) - (S[a] - S[o]) * (b - o)

    # lower hull of points 0..i, as pointer chain from i leftwards
    left = np.full(P, -1, dtype=np.int64)
    stack: list[int] = []
    for i in range(P):
        while len(stack) >= 2 and cross(stack[-2], stack[-1], i) <= 0:
            stack.pop()
        left[i] = stack[-1] if stack else -1
        stack.append(i)
    # upper hull of points i..N, as pointer chain from i rightwards
    right = np.full(P, -1, dtype=np.int64)
    stack = []
    for i in range(P - 1, -1, -1):
        while len(stack) >= 2 and cross(i, stack[-1], stack[-2]) >= 0:
            stack.pop()
        right[i] = stack[-1] if stack else -1
        stack.append(i)

    def slope(a, b):
        return (S[b] - S[a]) / (b - a)

    M = np.empty(N)
    for n in range(N):
        # coordinate ascent: each chain is unimodal for a fixed partner point
        a, b = n, n + 1
        while True:
            a_new, best = n, slope(n, b)
            while left[a_new] >= 0 and slope(left[a_new], b) >= best:
                a_new = left[a_new]
                best = slope(a_new, b)
            b_new = n + 1
            best = slope(a_new, b_new)
            while right[b_new] >= 0 and slope(a_new, right[b_new]) >= best:
                b_new = right[b_new]
                best = slope(a_new, b_new)
            if a_new == a and b_new == b:
                break
            a, b = a_new, b_new
        M[n] = best
    return M


# ------------------------------------------------------- intervals, windows

@dataclass(frozen=True)
class IntervalN:
    """Discrete interval [a, b] of naturals."""

    a: int
    b: int

    def __post_init__(self):
        if not 0 <= self.a <= self.b:
            raise DomainError("need 0 <= a <= b")

    def dilate(self) -> "IntervalN":
        """2I = [a - (b-a)/2, b + (b-a)/2] with endpoints rounded outward."""
        h = (self.b - self.a) / 2
        return IntervalN(max(0, math.floor(self.a - h)), math.ceil(self.b + h))


def window(n: int) -> tuple[int, int]:
    """W_n = [ceil(n/2), floor(3n/2)]."""
    return (n + 1) // 2, (3 * n) // 2


def window_mask(N: int) -> np.ndarray:
    """Boolean (N+1, N+1) matrix, True where m lies in W_n."""
    n = np.arange(N + 1)[:, None]
    m = np.arange(N + 1)[None, :]
    return (2 * m >= n) & (2 * m <= 3 * n)


# -------------------------------------------------------------- kernels

@dataclass
class KernelMatrix:
    """Kernel norms on {0..N}^2 plus optional norms of index differences."""

    entries: np.ndarray
    kernel: str = "scalar"
    params: dict = field(default_factory=dict)
    row_diffs: dict | None = None
    col_diffs: dict | None = None

    @property
    def N(self) -> int:
        return self.entries.shape[0] - 1

    def row_diff(self, d: int) -> np.ndarray:
        """||K(n+d, m) - K(n, m)||, shape (N+1-d, N+1)."""
        if self.row_diffs is not None:
            return self.row_diffs[d]
        E = self.entries
        return np.abs(E[d:] - E[:-d])

    def col_diff(self, d: int) -> np.ndarray:
        """||K(n, m+d) - K(n, m)||, shape (N+1, N+1-d)."""
        if self.col_diffs is not None:
            return self.col_diffs[d]
        E = self.entries
        return np.abs(E[:, d:] - E[:, :-d])

    @classmethod
    def from_stack(cls, mats, kernel: str, params: dict, max_offset: int = MAX_OFFSET):
        """Reduce an iterable of matrices K_t by sup over t."""
        acc = None
        for K in mats:
            if acc is None:
                acc = KernelAccumulator(K.shape[0] - 1, max_offset)
            acc.add(K)
        return acc.result(kernel, params)


class KernelAccumulator:
    """Running t-norm of |K_t| and of its row/column differences.

    ``norm="sup"`` keeps the maximum over added slices; ``norm="l2"`` sums
    ``weight * |.|^2`` (a quadrature for dt/t) and takes the root at the end.
    """

    def __init__(self, N: int, max_offset: int = MAX_OFFSET, norm: str = "sup"):
        if norm not in ("sup", "l2"):
            raise ConfigurationError(f"unknown norm {norm!r}")
        self.N = N
        self.D = max_offset
        self.norm = norm
        self.entries = np.zeros((N + 1, N + 1))
        self.rows = {d: np.zeros((N + 1 - d, N + 1)) for d in range(1, max_offset + 1)}
        self.cols = {d: np.zeros((N + 1, N + 1 - d)) for d in range(1, max_offset + 1)}

    def _fold(self, acc: np.ndarray, v: np.ndarray, weight: float) -> None:
        if self.norm == "sup":
            np.maximum(acc, np.abs(v), out=acc)
        else:
            acc += weight * v * v

    def add(self, K: np.ndarray, weight: float = 1.0) -> None:
        self._fold(self.entries, K, weight)
        for d in range(1, self.D + 1):
            self._fold(self.rows[d], K[d:] - K[:-d], weight)
            self._fold(self.cols[d], K[:, d:] - K[:, :-d], weight)

    def result(self, kernel: str, params: dict) -> KernelMatrix:
        f = np.sqrt if self.norm == "l2" else (lambda a: a)
        return KernelMatrix(f(self.entries), kernel, dict(params),
                            {d: f(v) for d, v in self.rows.items()},
                            {d: f(v) for d, v in self.cols.items()})


def load_kernel_csv(path) -> KernelMatrix:
    """Read ``n,m,value`` rows (an optional header line is skipped)."""
    data = np.genfromtxt(path, delimiter=",", comments="#", names=None)
    if data.ndim == 1:
        data = data[None, :]
    data = data[~np.isnan(data).any(axis=1)]
    n, m = data[:, 0].astype(int), data[:, 1].astype(int)
    N = int(max(n.max(), m.max()))
    E = np.zeros((N + 1, N + 1))
    E[n, m] = data[:, 2]
    return KernelMatrix(E, kernel="file", params={"path": str(path)})


def local_global_split(K, f) -> tuple[np.ndarray, np.ndarray]:
    """(T_loc f, T_glob f) for the matrix kernel K on {0..N}."""
    E = K.entries if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    f = as_seq(f)
    N = E.shape[0] - 1
    fN = np.zeros(N + 1)
    fN[:min(f.size, N + 1)] = f[:N + 1]
    mask = window_mask(N)
    glob = np.where(mask, 0.0, E) @ fN
    return E @ fN - glob, glob


def hardy_domination_constant(K, f) -> float:
    """max_{n>=1} |T_glob f(n)| / (H_0 + H_inf)(|f|)(n)."""
    _, glob = local_global_split(K, f)
    g = np.abs(as_seq(f))
    N = glob.size - 1
    gN = np.zeros(N + 1)
    gN[:min(g.size, N + 1)] = g[:N + 1]
    H = (hardy0(gN) + hardy_inf(gN))[1:]
    num = np.abs(glob[1:])
    ok = H > 0
    if np.any((num > 1e-300) & ~ok):
        return math.inf
    return float(np.max(num[ok] / H[ok])) if np.any(ok) else 0.0


def _band_pairs(N: int, d: int):
    """Masks for pairs (j, j+d) x m: both indices strictly inside (m/2, 3m/2),
    and |n - m| > 2d measured from the end n = j (first) or n = j+d (second)."""
    j = np.arange(N + 1 - d)[:, None]
    m = np.arange(N + 1)[None, :]
    l = j + d
    band = (2 * j > m) & (2 * l > m) & (2 * j < 3 * m) & (2 * l < 3 * m)
    return band & (np.abs(j - m) > 2 * d), band & (np.abs(l - m) > 2 * d), j, l, m


def size_constant(K: KernelMatrix, band_only: bool = False) -> float:
    """max_{n != m} ||K(n,m)|| |n - m| (optionally on the band m/2 <= n <= 3m/2)."""
    N = K.N
    n = np.arange(N + 1)[:, None]
    m = np.arange(N + 1)[None, :]
    val = K.entries * np.abs(n - m)
    mask = n != m
    if band_only:
        mask &= (2 * n >= m) & (2 * n <= 3 * m)
    return float(val[mask].max()) if np.any(mask) else 0.0


def regularity_constants(K: KernelMatrix, max_offset: int = MAX_OFFSET) -> tuple[float, float]:
    """(C_reg1, C_reg2): max of ||K(n,m)-K(l,m)|| |n-m|^2 / |n-l| over admissible
    triples with |n-l| <= max_offset, and the same for ||K(m,n)-K(m,l)||."""
    N = K.N
    out = [0.0, 0.0]
    for d in range(1, max_offset + 1):
        first, second, j, l, m = _band_pairs(N, d)
        # diff[j, m] = ||K(j+d, m) - K(j, m)||, then the column analogue
        for i, diff in enumerate((K.row_diff(d), K.col_diff(d).T)):
            for mask, n in ((first, j), (second, l)):
                if np.any(mask):
                    R = diff * (n - m).astype(float) ** 2 / d
                    out[i] = max(out[i], float(R[mask].max()))
    return out[0], out[1]


def hormander_family(N: int, seed: int = 0, n_random: int = 8) -> np.ndarray:
    """Columns: indicators of dyadic blocks and seeded random +-1 sequences."""
    cols = []
    j = 0
    cols.append(np.eye(1, N + 1, 0).ravel())
    while 2 ** j <= N:
        v = np.zeros(N + 1)
        v[2 ** j:min(2 ** (j + 1), N + 1)] = 1.0
        cols.append(v)
        j += 1
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        cols.append(rng.choice([-1.0, 1.0], size=N + 1))
    return np.column_stack(cols)


def _tilde_steps(K: KernelMatrix, transpose: bool) -> np.ndarray:
    """Unit-step norms of the windowed kernel.

    Rows (transpose=False): D[j, m] = ||Kt(j+1, m) - Kt(j, m)|| with
    Kt(n, m) = chi_{W_n}(m) K(n, m). Columns: D[j, m] = ||Kt(m, j+1) - Kt(m, j)||.
    """
    N = K.N
    W = window_mask(N)
    E = K.entries
    if not transpose:
        inA, inB = W[:-1], W[1:]
        diff = K.row_diff(1)
        return np.where(inA & inB, diff, np.where(inA, E[:-1], 0.0) + np.where(inB, E[1:], 0.0))
    # column steps of Kt(m, .) where the window is W_m (row index m)
    inA, inB = W[:, :-1], W[:, 1:]
    diff = K.col_diff(1)
    D = np.where(inA & inB, diff, np.where(inA, E[:, :-1], 0.0) + np.where(inB, E[:, 1:], 0.0))
    return D.T


def hormander_constant(K: KernelMatrix, transpose: bool = False, seed: int = 0) -> float:
    """Telescoped bound for the Hormander sums over a dyadic interval family.

    For I = [a, b] and n, l in I, ||Kt(n,m) - Kt(l,m)|| is bounded by the sum
    of unit steps from a to b, so sum_{m outside 2I} ... is at most
    sum_m |f(m)| (S[b, m] - S[a, m]); this is divided by min_{n in I} M(|f|)(n).
    """
    N = K.N
    D = _tilde_steps(K, transpose)  # (N, N+1)
    S = np.vstack([np.zeros((1, N + 1)), np.cumsum(D, axis=0)])  # S[j] = sum_{i<j} D[i]
    F = np.abs(hormander_family(N, seed))
    Mf = np.column_stack([hl_maximal(F[:, i]) for i in range(F.shape[1])])
    best = 0.0
    L = 2
    while L <= N:
        for a in range(0, N - L + 1, L // 2):
            b = a + L
            I2 = IntervalN(a, b).dilate()
            outside = np.ones(N + 1, dtype=bool)
            outside[I2.a:I2.b + 1] = False
            U = (S[b] - S[a])[outside] @ F[outside]
            low = Mf[a:b + 1].min(axis=0)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(low > 0, U / low, np.where(U > 0, np.inf, 0.0))
            best = max(best, float(r.max()))
        L *= 2
    return best


@dataclass
class CZReport:
    """Fitted constants of one kernel, optionally with drift against size 2N."""

    kernel: str
    N: int
    params: dict
    constants: dict
    drift: dict | None = None
    passed: bool | None = None

    def as_dict(self) -> dict:
        return {"kernel": self.kernel, "N": self.N, "params": self.params,
                "constants": self.constants, "drift": self.drift, "pass": self.passed}


def cz_constants(K: KernelMatrix, hormander: bool = True, band_only: bool = False,
                 max_offset: int = MAX_OFFSET) -> dict:
    if K.N < 16:
        raise DomainError("certification needs N >= 16")
    c1, c2 = regularity_constants(K, max_offset)
    out = {"size": size_constant(K, band_only), "reg1": c1, "reg2": c2}
    if hormander:
        out["hormander1"] = hormander_constant(K, False)
        out["hormander2"] = hormander_constant(K, True)
    return out


def cz_certify(K: KernelMatrix, K_double: KernelMatrix | None = None, drift_tol: float = 0.10,
               hormander: bool = True, band_only: bool = False) -> CZReport:
    """Fit size / regularity / Hormander constants; with ``K_double`` (the same
    kernel on {0..2N}) also the relative drift of each constant, and pass iff all
    constants are finite and every drift is below ``drift_tol``."""
    c = cz_constants(K, hormander, band_only)
    rep = CZReport(K.kernel, K.N, dict(K.params), c)
    finite = all(math.isfinite(v) for v in c.values())
    if K_double is None:
        rep.passed = finite
        return rep
    c2 = cz_constants(K_double, hormander, band_only)
    rep.drift = {k: (abs(c2[k] / c[k] - 1.0) if c[k] > 0 else (0.0 if c2[k] == 0 else math.inf))
                 for k in c}
    rep.constants = {**{k: v for k, v in c.items()}, **{f"{k}@2N": v for k, v in c2.items()}}
    rep.passed = finite and all(math.isfinite(v) for v in c2.values()) and all(
        d < drift_tol for d in rep.drift.values())
    return rep
