"""Run configuration, verification reports and the registry of acceptance checks.

Every check returns named measurements, each with a tolerance and a sense
(``le``: value <= tol, ``ge``: value >= tol). A report with one ``le``
measurement carries it verbatim; otherwise ``observed`` is the worst
normalised score (value/tol or tol/value) against tolerance 1.
"""
from __future__ import annotations

import json
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import harmonic_tools as ht
from . import hypergroup as hg
from . import semigroup as sg
from . import specfun as sf
from . import transform as tf
from . import transplant as tp
from .errors import ConfigurationError

THREADS_ENV = "ULTRAHARMONIC_THREADS"

DEFAULT_TOLERANCES: dict[str, float] = {
    "plancherel.isometry": 1e-11,
    "heat-semigroup.contraction": 1e-12,
    "heat-semigroup.semigroup_law": 1e-10,
    "heat-semigroup.route_agreement": 1e-9,
    "g-spectral-aggregate.relative": 1e-6,
    "g1-heat-ratio.ratio_error": 2e-2,
    "g1-heat-ratio.defect_drop": 0.35,
    "g-poisson-ratio.ratio_error": 2e-2,
    "g-poisson-ratio.defect_drop": 0.35,
    "hypergroup-identity.identity": 1e-14,
    "hypergroup-identity.transform_identity": 1e-10,
    "linearization-closed-form.relative": 1e-9,
    "linearization-closed-form.absolute": 1e-12,
    "chebyshev-closed-form.max_error": 1e-12,
    "cz-heat.drift": 0.10,
    "cz-psi.drift": 0.10,
    "cz-transplant.drift": 0.10,
    "bessel-routes.relative": 1e-9,
    "decay-envelopes.drift": 0.10,
    "poisson-routes.route_agreement": 1e-6,
    "poisson-routes.maximal_order": 1e-9,
    "transplant-l2.deficiency_floor": 1e-10,
    "transplant-l2.deficiency_shrink": 1.0,
    "transplant-l2.roundtrip": 1e-2,
    "transplant-l2.roundtrip_drop": 0.35,
    "transplant-l2.duality": 1e-9,
    "transplant-l2.composition": 5e-3,
    "ap-constants.constant_weight": 0.0,
    "ap-constants.sqrt_weight_change": 0.01,
    "ap-constants.linear_weight_growth": 0.10,
    "weighted-probes.band_drift": 0.15,
}


# ------------------------------------------------------------------ config

@dataclass
class RunConfig:
    """Everything a run depends on; equal configs give equal report values."""

    seed: int = 20240601
    lambdas: tuple[float, ...] = (0.6, 1.0, 1.5, 2.5)
    kernel_lambda: float = 1.0
    sizes: tuple[int, ...] = (512, 1024)
    t_grid: str = "1e-8,1e8,10"
    p_list: tuple[float, ...] = (1.5, 2.0, 3.0)
    weight_exponents: tuple[str, ...] = ("0", "(p-1)/2")
    out: str | None = None
    threads: int | None = None
    only: tuple[str, ...] = ()
    tolerances: dict = field(default_factory=dict)
    record_timing: bool = True

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        bad = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if bad:
            raise ConfigurationError(f"unknown tolerance keys {sorted(bad)}")
        self.lambdas = tuple(float(x) for x in self.lambdas)
        self.sizes = tuple(int(x) for x in self.sizes)
        self.p_list = tuple(float(x) for x in self.p_list)
        self.only = tuple(self.only)
        sg.TimeGrid.parse(self.t_grid)

    def tolerance(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def parallelism(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        env = os.environ.get(THREADS_ENV)
        return max(1, int(env)) if env else 1

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambdas"], d["sizes"] = list(self.lambdas), list(self.sizes)
        d["p_list"], d["weight_exponents"] = list(self.p_list), list(self.weight_exponents)
        d["only"] = list(self.only)
        return d


def random_sequence(seed, N_supp: int, distribution: str = "gaussian") -> np.ndarray:
    """Unit-l2 sequence of length N_supp (a seed or a Generator)."""
    if N_supp < 1:
        raise ConfigurationError("N_supp must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if distribution == "gaussian":
        f = rng.standard_normal(N_supp)
        return f / np.linalg.norm(f)
    if distribution == "rademacher":
        return rng.choice([-1.0, 1.0], size=N_supp) / math.sqrt(N_supp)
    raise ConfigurationError(f"unknown distribution {distribution!r}")


# ------------------------------------------------------------------ reports

@dataclass
class VerificationReport:
    check_id: str
    parameters: dict
    constants: dict
    tolerance: float
    observed: float
    passed: bool
    scaling: list | None = None
    runtime_ms: int = 0

    def to_dict(self) -> dict:
        return {"check_id": self.check_id, "parameters": self.parameters,
                "constants": self.constants, "tolerance": self.tolerance,
                "observed": self.observed, "pass": self.passed, "scaling": self.scaling,
                "runtime_ms": self.runtime_ms}

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(d["check_id"], d["parameters"], d["constants"], d["tolerance"],
                   d["observed"], d["pass"], d.get("scaling"), d.get("runtime_ms", 0))

    def line(self) -> str:
        crit = self.parameters.get("criterion", "")
        return (f"{crit:>4} {self.check_id:<26} {'PASS' if self.passed else 'FAIL'}  "
                f"observed={self.observed:.3e} tol={self.tolerance:.3e}  {self.runtime_ms} ms")


@dataclass
class Measure:
    name: str
    value: float
    tol: float
    sense: str = "le"

    def score(self) -> float:
        v, t = float(self.value), float(self.tol)
        if math.isnan(v):
            return math.inf
        if self.sense == "le":
            if t == 0:
                return 0.0 if v <= 0 else math.inf
            return v / t
        return t / v if v > 0 else math.inf


@dataclass
class CheckResult:
    measures: list[Measure]
    parameters: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    scaling: list | None = None


class Context:
    """What a check sees: the config, its own RNG and tolerance lookup."""

    def __init__(self, config: RunConfig, check_id: str):
        self.config = config
        self.check_id = check_id
        self.rng = np.random.default_rng([int(config.seed), zlib.crc32(check_id.encode())])

    def tol(self, name: str) -> float:
        return self.config.tolerance(f"{self.check_id}.{name}")

    def measure(self, name: str, value: float, sense: str = "le") -> Measure:
        return Measure(name, float(value), self.tol(name), sense)


def _finish(check_id: str, criterion: str, res: CheckResult, ms: int) -> VerificationReport:
    ms_list = res.measures
    params = {"criterion": criterion, **res.parameters,
              "tolerances": {m.name: [m.tol, m.sense] for m in ms_list}}
    consts = {**{m.name: jsonable(m.value) for m in ms_list}, **{k: jsonable(v) for k, v in res.constants.items()}}
    if len(ms_list) == 1 and ms_list[0].sense == "le":
        obs, tol = ms_list[0].value, ms_list[0].tol
        passed = ms_list[0].score() <= 1.0
    else:
        obs, tol = max(m.score() for m in ms_list), 1.0
        passed = obs <= 1.0
    return VerificationReport(check_id, params, consts, jsonable(tol), jsonable(obs), bool(passed),
                              res.scaling, ms)


def jsonable(v):
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: jsonable(x) for k, x in v.items()}
    if isinstance(v, (bool, str)) or v is None:
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


# ------------------------------------------------------------------ checks

REGISTRY: dict[str, tuple[str, Callable[[Context], CheckResult]]] = {}


def check(check_id: str, criterion: str):
    def deco(fn):
        REGISTRY[check_id] = (criterion, fn)
        return fn
    return deco


def _grid(ctx: Context) -> sg.TimeGrid:
    return sg.TimeGrid.parse(ctx.config.t_grid)


@check("plancherel", "A1")
def _plancherel(ctx: Context) -> CheckResult:
    worst = 0.0
    for lam in ctx.config.lambdas:
        f = random_sequence(ctx.rng, 128)
        rule = sf.gauss_jacobi(lam - 0.5, 160)
        worst = max(worst, abs(tf.plancherel_norm2(lam, f, rule) - 1.0))
    return CheckResult([ctx.measure("isometry", worst)], {"N": 128, "Q": 160,
                                                          "lambdas": list(ctx.config.lambdas)})


@check("heat-semigroup", "A2")
def _heat_semigroup(ctx: Context) -> CheckResult:
    ts = (0.01, 0.5, 3.0)
    contraction = law = agree = 0.0
    for lam in ctx.config.lambdas:
        f = random_sequence(ctx.rng, 17)
        for t in ts:
            wt = sg.heat_apply(lam, t, f)
            wt_s = sg.heat_apply(lam, t, f, "spectral", n_out=wt.size - 1)
            agree = max(agree, float(np.linalg.norm(wt - wt_s)))
            contraction = max(contraction, np.linalg.norm(wt) - 1.0, np.linalg.norm(wt_s) - 1.0)
            for s in ts:
                direct = sg.heat_apply(lam, s + t, f)
                n = direct.size - 1
                for route, inner in (("convolution", wt), ("spectral", wt_s)):
                    both = sg.heat_apply(lam, s, inner, route, n_out=n)
                    law = max(law, float(np.linalg.norm(both - direct)))
    return CheckResult([ctx.measure("contraction", max(contraction, 0.0)),
                        ctx.measure("semigroup_law", law), ctx.measure("route_agreement", agree)],
                       {"t": list(ts), "lambdas": list(ctx.config.lambdas), "supp": 16})


@check("g-spectral-aggregate", "A3")
def _g_spectral(ctx: Context) -> CheckResult:
    grid = _grid(ctx)
    worst, consts = 0.0, {}
    for lam in ctx.config.lambdas:
        f = random_sequence(ctx.rng, 33)
        for kind in ("heat", "poisson"):
            for k in (1, 2, 3):
                exact = math.gamma(2 * k) / 4 ** k
                v = sg.g_aggregate_spectral(kind, lam, k, f, grid)
                err = abs(v / exact - 1.0)
                worst = max(worst, err)
                consts[f"{kind}_k{k}_lam{lam}"] = err
    return CheckResult([ctx.measure("relative", worst)],
                       {"t_grid": ctx.config.t_grid, "lambdas": list(ctx.config.lambdas)}, consts)


def _g_ratio(ctx: Context, kind: str, k: int, target: float) -> CheckResult:
    lam, N = 0.6, 4096
    grid = _grid(ctx)
    f = random_sequence(ctx.rng, 33)
    ratios = [float(np.linalg.norm(sg.g_function(kind, lam, k, f, grid, n_out=n))) for n in (N, 2 * N)]
    defects = [abs(r - target) for r in ratios]
    drop = 1.0 - defects[1] / defects[0] if defects[0] > 0 else 0.0
    return CheckResult([ctx.measure("ratio_error", defects[0]),
                        ctx.measure("defect_drop", drop, "ge")],
                       {"lambda": lam, "k": k, "N": N, "supp": 32, "t_grid": ctx.config.t_grid,
                        "rule_factor": 2, "target": target},
                       {"ratio_N": ratios[0], "ratio_2N": ratios[1]},
                       [N, 2 * N, defects[1] / defects[0] if defects[0] > 0 else None])


@check("g1-heat-ratio", "A3")
def _g1_heat(ctx: Context) -> CheckResult:
    return _g_ratio(ctx, "heat", 1, 0.5)


@check("g-poisson-ratio", "A3")
def _g_poisson(ctx: Context) -> CheckResult:
    return _g_ratio(ctx, "poisson", 2, math.sqrt(math.gamma(4)) / 4)


@check("hypergroup-identity", "A4")
def _hypergroup_identity(ctx: Context) -> CheckResult:
    ident = trans = 0.0
    for lam in ctx.config.lambdas:
        f = ctx.rng.standard_normal(int(ctx.rng.integers(1, 17)))
        g = ctx.rng.standard_normal(int(ctx.rng.integers(1, 17)))
        e = hg.identity_element(lam)
        fe = hg.convolve(lam, f, e)
        ident = max(ident, float(np.max(np.abs(fe[:f.size] - f))))
        h = hg.convolve(lam, f, g)
        rule = sf.gauss_jacobi(lam - 0.5, h.size + 4)
        x = rule.nodes
        lhs = tf.synthesize(lam, h, x)
        rhs = tf.synthesize(lam, f, x) * tf.synthesize(lam, g, x)
        trans = max(trans, float(np.max(np.abs(lhs - rhs))))
    return CheckResult([ctx.measure("identity", ident), ctx.measure("transform_identity", trans)],
                       {"max_support": 16, "lambdas": list(ctx.config.lambdas)})


@check("linearization-closed-form", "A5")
def _linearization(ctx: Context) -> CheckResult:
    K = 40
    rel = ab = 0.0
    n, m, k = np.meshgrid(np.arange(K + 1), np.arange(K + 1), np.arange(K + 1), indexing="ij")
    for lam in ctx.config.lambdas:
        closed = hg.linearization_c(lam, n, m, k)
        oracle = hg.linearization_table_oracle(lam, K)
        ok = np.isfinite(hg.log_linearization_c(lam, n, m, k))
        big = ok & (np.abs(oracle) >= 1e-3)
        small = ok & ~big
        rel = max(rel, float(np.max(np.abs(closed[big] / oracle[big] - 1.0))))
        if small.any():
            ab = max(ab, float(np.max(np.abs(closed[small] - oracle[small]))))
    special = abs(hg.linearization_c(1.0, 1, 1, 2) - math.sqrt(2 / math.pi))
    return CheckResult([ctx.measure("relative", max(rel, special / math.sqrt(2 / math.pi))),
                        ctx.measure("absolute", ab)],
                       {"K": K, "lambdas": list(ctx.config.lambdas)}, {"c1_112_error": special})


@check("chebyshev-closed-form", "A6")
def _chebyshev(ctx: Context) -> CheckResult:
    worst = 0.0
    n = np.arange(201)
    for th in (math.pi / 7, math.pi / 3, 9 * math.pi / 10):
        phi = sf.phi_sequence(1.0, 200, math.cos(th))
        ref = math.sqrt(2 / math.pi) * np.sin((n + 1) * th) / math.sqrt(math.sin(th))
        worst = max(worst, float(np.max(np.abs(phi - ref))))
    return CheckResult([ctx.measure("max_error", worst)], {"n_max": 200})


def _drift_result(ctx: Context, reports: list[tuple[str, ht.CZReport, tuple[str, ...]]],
                  params: dict) -> CheckResult:
    worst, consts = 0.0, {}
    finite = True
    for label, rep, keys in reports:
        for key in keys:
            consts[f"{label}.{key}"] = rep.constants[key]
            consts[f"{label}.{key}@2N"] = rep.constants[f"{key}@2N"]
            consts[f"{label}.{key}.drift"] = rep.drift[key]
            finite &= math.isfinite(rep.constants[key]) and math.isfinite(rep.constants[f"{key}@2N"])
            worst = max(worst, rep.drift[key])
    return CheckResult([ctx.measure("drift", worst if finite else math.inf)], params, consts)


def _cz_semigroup(ctx: Context, kind: str) -> CheckResult:
    lam = ctx.config.kernel_lambda
    N1, N2 = ctx.config.sizes
    K1 = sg.kernel_envelope(kind, lam, N1)
    K2 = sg.kernel_envelope(kind, lam, N2)
    rep = ht.cz_certify(K1, K2)
    keys = ("size", "reg1", "reg2", "hormander1", "hormander2")
    return _drift_result(ctx, [(kind, rep, keys)],
                         {"lambda": lam, "N": [N1, N2], "t_grid": K1.params["t_grid"],
                          "t_norm": K1.params["norm"], "max_offset": ht.MAX_OFFSET})


@check("cz-heat", "A7")
def _cz_heat(ctx: Context) -> CheckResult:
    return _cz_semigroup(ctx, "heat")


@check("cz-psi", "A7")
def _cz_psi(ctx: Context) -> CheckResult:
    return _cz_semigroup(ctx, "psi")


TRANSPLANT_SETS = (((1.2, 2.0), False), ((0.8, 1.4), False), ((0.5, 3.0), True))


@check("cz-transplant", "A7")
def _cz_transplant(ctx: Context) -> CheckResult:
    N1, N2 = ctx.config.sizes
    reports = []
    for (lam, mu), band in TRANSPLANT_SETS:
        keys = ["size"] + (["reg1"] if mu > 1 else []) + (["reg2"] if lam > 1 else [])
        for parity in ("even", "odd"):
            K1 = tp.build_kernel_matrix(lam, mu, N1, parity).as_kernel_matrix()
            K2 = tp.build_kernel_matrix(lam, mu, N2, parity).as_kernel_matrix()
            rep = ht.cz_certify(K1, K2, hormander=False, band_only=band)
            reports.append((f"({lam},{mu}){parity}{'-band' if band else ''}", rep, tuple(keys)))
    return _drift_result(ctx, reports, {"N": [N1, N2], "pairs": [list(p) for p, _ in TRANSPLANT_SETS],
                                        "band_only": [b for _, b in TRANSPLANT_SETS]})


@check("bessel-routes", "A8")
def _bessel(ctx: Context) -> CheckResult:
    worst = 0.0
    for nu in (0.6, 1.5, 3.5, 10.6, 50.5):
        for z in (0.01, 1.0, 10.0, 100.0):
            a = sf.log_bessel_i_series(nu, z)
            b = sf.log_bessel_i_recurrence(nu, z)
            c = sf.bessel_integral_oracle(nu, z, log=True)
            # relative error of I from the difference of logs
            worst = max(worst, abs(math.expm1(a - b)), abs(math.expm1(a - c)))
    return CheckResult([ctx.measure("relative", worst)],
                       {"nu": [0.6, 1.5, 3.5, 10.6, 50.5], "z": [0.01, 1.0, 10.0, 100.0]})


@check("decay-envelopes", "A8")
def _decay(ctx: Context) -> CheckResult:
    K = 512
    worst, consts = 0.0, {}
    for lam in (0.6, 1.5):
        for which in ("heat", "psi"):
            e = sg.decay_envelope(lam, K, which)
            c1, c2 = float(e[:K // 2 + 1].max()), float(e.max())
            consts[f"{which}_lam{lam}"] = [c1, c2]
            worst = max(worst, abs(c2 / c1 - 1.0))
    return CheckResult([ctx.measure("drift", worst)], {"k_max": [K // 2, K], "lambdas": [0.6, 1.5]},
                       consts)


@check("poisson-routes", "A9")
def _poisson(ctx: Context) -> CheckResult:
    agree = order = 0.0
    grid = _grid(ctx)
    for lam in (0.6, 1.5):
        f = random_sequence(ctx.rng, 17)
        for t in (0.1, 1.0, 10.0):
            a = sg.poisson_apply(lam, t, f, "subordination")
            b = sg.poisson_apply(lam, t, f, "spectral")
            agree = max(agree, float(np.linalg.norm(a - b)))
        W = sg.maximal("heat", lam, f, grid, n_out=80)
        P = sg.maximal("poisson", lam, f, grid, n_out=80)
        order = max(order, float(np.max(P - W)))
    return CheckResult([ctx.measure("route_agreement", agree),
                        ctx.measure("maximal_order", max(order, 0.0))],
                       {"t": [0.1, 1.0, 10.0], "lambdas": [0.6, 1.5], "n_out": 80,
                        "t_grid": ctx.config.t_grid})


@check("transplant-l2", "A10")
def _transplant(ctx: Context) -> CheckResult:
    lam, mu = 1.5, 2.5
    f = random_sequence(ctx.rng, 33)
    Ns = (512, 1024, 2048)
    defs = [tp.isometry_deficiency(lam, mu, f, n) for n in Ns]
    shrink = max(defs[i + 1] / defs[i] if defs[i] > 0 else math.inf for i in range(len(Ns) - 1))
    C = max(d * n for d, n in zip(defs, Ns))
    delta = np.zeros(3)
    delta[2] = 1.0
    rt = [tp.roundtrip_defect(lam, mu, delta, n) for n in (4096, 8192)]
    g = random_sequence(ctx.rng, 21)
    dual = tp.duality_gap(lam, mu, f, g, 2048)
    comp = tp.composition_check(1.2, 3.0, random_sequence(ctx.rng, 33), 4096)
    return CheckResult([ctx.measure("deficiency_floor", max(-min(defs), 0.0)),
                        ctx.measure("deficiency_shrink", shrink),
                        ctx.measure("roundtrip", rt[0]),
                        ctx.measure("roundtrip_drop", 1.0 - rt[1] / rt[0] if rt[0] > 0 else 0.0, "ge"),
                        ctx.measure("duality", dual), ctx.measure("composition", comp)],
                       {"lambda": lam, "mu": mu, "deficiency_N": list(Ns), "roundtrip_N": [4096, 8192],
                        "composition": [1.2, 3.0, 4096]},
                       {"deficiencies": defs, "deficiency_C": C, "roundtrip_defects": rt},
                       [4096, 8192, rt[1] / rt[0] if rt[0] > 0 else None])


@check("ap-constants", "A11")
def _ap(ctx: Context) -> CheckResult:
    N1, N2 = 2 ** 11, 2 ** 12
    const = abs(ht.ap_constant(np.ones(N2 + 1), 2.0) - 1.0)
    s = [ht.ap_constant(ht.power_weight(0.5, n), 2.0) for n in (N1, N2)]
    l = [ht.ap_constant(ht.power_weight(1.0, n), 2.0) for n in (N1, N2)]
    return CheckResult([ctx.measure("constant_weight", const),
                        ctx.measure("sqrt_weight_change", abs(s[1] / s[0] - 1.0)),
                        ctx.measure("linear_weight_growth", l[1] / l[0] - 1.0, "ge")],
                       {"N": [N1, N2], "p": 2.0},
                       {"sqrt_weight": s, "linear_weight": l}, [N1, N2, l[1] / l[0]])


def _weight_exponent(text: str, p: float) -> float:
    return {"0": 0.0, "(p-1)/2": (p - 1) / 2}[text] if text in ("0", "(p-1)/2") else float(text)


def _band(ratios) -> tuple[float, float]:
    return float(np.min(ratios)), float(np.max(ratios))


def _band_drift(b1, b2) -> float:
    return max(abs(b2[0] / b1[0] - 1.0), abs(b2[1] / b1[1] - 1.0))


@check("weighted-probes", "A12")
def _weighted(ctx: Context) -> CheckResult:
    N1, N2 = ctx.config.sizes
    grid = _grid(ctx)
    worst, consts = 0.0, {}
    for lam in (0.6, 1.5):
        bands = {}
        for N in (N1, N2):
            F = np.stack([random_sequence(ctx.rng, N // 4) for _ in range(64)])
            G = sg.g_function_many("heat", lam, 1, F, grid, n_out=N)
            Fp = np.zeros((64, N + 1))
            Fp[:, :N // 4] = F
            for p in ctx.config.p_list:
                for a_spec in ctx.config.weight_exponents:
                    w = ht.power_weight(_weight_exponent(a_spec, p), N)
                    r = [ht.weighted_norm(G[i], w, p) / ht.weighted_norm(Fp[i], w, p) for i in range(64)]
                    bands.setdefault((p, a_spec), []).append(_band(r))
        for (p, a_spec), (b1, b2) in bands.items():
            d = _band_drift(b1, b2)
            consts[f"g1 lam={lam} p={p} a={a_spec}"] = [b1[0], b1[1], b2[0], b2[1], d]
            worst = max(worst, d)
    lam, mu = 1.5, 2.5
    tb = []
    for N in (N1, N2):
        fs = [random_sequence(ctx.rng, N // 4) for _ in range(64)]
        tb.append(tp.weighted_ratio_band(lam, mu, fs, N, 2.0, ht.power_weight(0.5, N)))
    d = _band_drift(*tb)
    consts[f"transplant ({lam},{mu}) p=2 a=1/2"] = [*tb[0], *tb[1], d]
    worst = max(worst, d)
    return CheckResult([ctx.measure("band_drift", worst)],
                       {"N": [N1, N2], "samples": 64, "supp": "N/4", "p": list(ctx.config.p_list),
                        "weight_exponents": list(ctx.config.weight_exponents), "lambdas": [0.6, 1.5],
                        "transplant": [lam, mu], "t_grid": ctx.config.t_grid}, consts)


# ------------------------------------------------------------------ runner

def run_check(check_id: str, config: RunConfig) -> VerificationReport:
    if check_id not in REGISTRY:
        raise ConfigurationError(f"unknown check id {check_id!r}")
    criterion, fn = REGISTRY[check_id]
    t0 = time.perf_counter()
    res = fn(Context(config, check_id))
    ms = int(round(1000 * (time.perf_counter() - t0))) if config.record_timing else 0
    return _finish(check_id, criterion, res, ms)


def run_suite(config: RunConfig, echo: Callable[[str], None] | None = None) -> list[VerificationReport]:
    """Run the selected checks (all by default); results come back in registry order."""
    ids = list(config.only) if config.only else list(REGISTRY)
    unknown = [i for i in ids if i not in REGISTRY]
    if unknown:
        raise ConfigurationError(f"unknown check ids {unknown}")
    ids = [i for i in REGISTRY if i in ids]
    workers = config.parallelism()
    if workers == 1:
        reports = []
        for i in ids:
            reports.append(run_check(i, config))
            if echo:
                echo(reports[-1].line())
        return reports
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(lambda i: run_check(i, config), ids))
    if echo:
        for r in reports:
            echo(r.line())
    return reports


def summary(reports: list[VerificationReport]) -> dict:
    passed = sum(r.passed for r in reports)
    return {"passed": passed, "failed": len(reports) - passed}


def report_document(config: RunConfig, reports: list[VerificationReport]) -> dict:
    return {"config": config.as_dict(), "reports": [r.to_dict() for r in reports],
            "summary": summary(reports)}


def write_json(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_reports(path) -> tuple[dict, list[VerificationReport]]:
    with open(path) as fh:
        doc = json.load(fh)
    validate_document(doc)
    return doc, [VerificationReport.from_dict(d) for d in doc["reports"]]


REPORT_KEYS = {"check_id": str, "parameters": dict, "constants": dict, "tolerance": (float, int, str),
               "observed": (float, int, str), "pass": bool, "scaling": (list, type(None)),
               "runtime_ms": int}


def validate_document(doc: dict) -> None:
    """Structural check of the report schema; raises ConfigurationError."""
    if set(doc) != {"config", "reports", "summary"}:
        raise ConfigurationError("top level must be {config, reports, summary}")
    if set(doc["summary"]) != {"passed", "failed"}:
        raise ConfigurationError("summary must be {passed, failed}")
    for r in doc["reports"]:
        if set(r) != set(REPORT_KEYS):
            raise ConfigurationError(f"report keys {sorted(r)} do not match the schema")
        for k, typ in REPORT_KEYS.items():
            if not isinstance(r[k], typ):
                raise ConfigurationError(f"field {k} has type {type(r[k]).__name__}")
    if doc["summary"]["passed"] + doc["summary"]["failed"] != len(doc["reports"]):
        raise ConfigurationError("summary counts do not add up")


# ------------------------------------------------------------------ CSV

def write_sequence_csv(path, f) -> None:
    """index,value rows without a header."""
    f = np.asarray(f, dtype=float)
    np.savetxt(path, np.column_stack([np.arange(f.size), f]), delimiter=",", fmt=["%d", "%.17g"])


def read_sequence_csv(path) -> np.ndarray:
    data = np.atleast_2d(np.loadtxt(path, delimiter=","))
    idx = data[:, 0].astype(int)
    out = np.zeros(idx.max() + 1)
    out[idx] = data[:, 1]
    return out


def write_matrix_csv(path, E: np.ndarray) -> None:
    """Long format with a header row: n,m,value."""
    n, m = np.meshgrid(np.arange(E.shape[0]), np.arange(E.shape[1]), indexing="ij")
    np.savetxt(path, np.column_stack([n.ravel(), m.ravel(), E.ravel()]), delimiter=",",
               header="n,m,value", comments="", fmt=["%d", "%d", "%.17g"])
