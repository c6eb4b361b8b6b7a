"""Command line: ``ultraharmonic [--seed S] [--threads T] [--out PATH] VERB ...``."""
from __future__ import annotations

import sys
import time

import click
import numpy as np

from . import harmonic_tools as ht
from . import harness as hs
from . import semigroup as sg
from . import transplant as tp
from .errors import AccuracyError, ConfigurationError, DomainError, NumericError, ResourceError

LIBRARY_ERRORS = (AccuracyError, ConfigurationError, DomainError, NumericError, ResourceError)


def _grid(text: str | None) -> sg.TimeGrid | None:
    return sg.TimeGrid.parse(text) if text else None


def _input(ctx: click.Context, path: str | None, random: int | None) -> np.ndarray:
    if path:
        return hs.read_sequence_csv(path)
    if random:
        return hs.random_sequence(ctx.obj["seed"], random)
    raise click.UsageError("give --input f.csv or --random N")


def _out(ctx: click.Context, local: str | None) -> str | None:
    return local or ctx.obj["out"]


def _emit_sequence(path: str | None, f: np.ndarray) -> None:
    if path:
        hs.write_sequence_csv(path, f)
    else:
        for i, v in enumerate(f):
            click.echo(f"{i},{v:.17g}")


class _Group(click.Group):
    """Reports library errors as one-line CLI errors instead of tracebacks."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except LIBRARY_ERRORS as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc


@click.group(cls=_Group)
@click.option("--seed", type=int, default=hs.RunConfig.seed, show_default=True)
@click.option("--threads", type=int, default=None,
              help=f"Parallel checks; overrides ${hs.THREADS_ENV}.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file.")
@click.pass_context
def main(ctx, seed, threads, out):
    """Discrete ultraspherical harmonic analysis: kernels, semigroups, certification."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, threads=threads, out=out)


@main.command()
@click.option("--kind", type=click.Choice([*sg.KERNEL_KINDS, "transplant"]), default="heat")
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--mu", type=float, default=None)
@click.option("--size", "N", type=int, required=True)
@click.option("--parity", type=click.Choice(tp.PARITIES), default="full")
@click.option("--t-grid", default=None, help="min,max,ppd")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def kernel(ctx, kind, lam, mu, N, parity, t_grid, out):
    """Export a kernel matrix (t-norm for semigroup kernels) as n,m,value CSV."""
    K = _build(kind, lam, mu, N, parity, _grid(t_grid))
    path = _out(ctx, out)
    if path is None:
        raise click.UsageError("kernel export needs --out")
    hs.write_matrix_csv(path, K.entries)
    click.echo(f"{kind} kernel N={N} -> {path}")


def _build(kind, lam, mu, N, parity="full", grid=None) -> ht.KernelMatrix:
    if kind == "transplant":
        if mu is None:
            raise click.UsageError("transplant kernels need --mu")
        return tp.build_kernel_matrix(lam, mu, N, parity).as_kernel_matrix()
    return sg.kernel_envelope(kind, lam, N, grid)


@main.command()
@click.option("--semigroup", "kind", type=click.Choice(["heat", "poisson"]), default="heat")
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--t", "t", type=float, required=True)
@click.option("--k", "k", type=int, default=0, help="Order of the time derivative.")
@click.option("--input", "path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--random", type=int, default=None, help="Random unit input of this support.")
@click.option("--n-out", type=int, default=None)
@click.option("--route", default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def evolve(ctx, kind, lam, t, k, path, random, n_out, route, out):
    """Apply W_t, P_t or their t-derivatives to a sequence."""
    f = _input(ctx, path, random)
    if kind == "heat":
        g = (sg.heat_apply(lam, t, f, route or "convolution", n_out) if k == 0
             else sg.heat_time_derivative(lam, t, k, f, route or "laplacian", n_out))
    else:
        g = (sg.poisson_apply(lam, t, f, route or "subordination", n_out) if k == 0
             else sg.poisson_time_derivative(lam, t, k, f, route or "spectral", n_out))
    _emit_sequence(_out(ctx, out), g)


@main.command()
@click.option("--semigroup", "kind", type=click.Choice(["heat", "poisson"]), default="heat")
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--k", "k", type=int, default=1)
@click.option("--input", "path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--random", type=int, default=None)
@click.option("--n-out", type=int, default=None)
@click.option("--t-grid", default=None, help="min,max,ppd")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def gfunction(ctx, kind, lam, k, path, random, n_out, t_grid, out):
    """Littlewood-Paley g^k of a sequence; prints ||g f|| / ||f|| to stderr."""
    f = _input(ctx, path, random)
    g = sg.g_function(kind, lam, k, f, _grid(t_grid), n_out)
    click.echo(f"ratio {np.linalg.norm(g) / np.linalg.norm(f):.12g}", err=True)
    _emit_sequence(_out(ctx, out), g)


@main.command()
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--mu", type=float, required=True)
@click.option("--size", "N", type=int, required=True)
@click.option("--parity", type=click.Choice(tp.PARITIES), default="full")
@click.option("--apply", "apply_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def transplant(ctx, lam, mu, N, parity, apply_path, out):
    """Export K_{lam,mu} on {0..N}, or with --apply compute T f on 0..N."""
    path = _out(ctx, out)
    if apply_path:
        _emit_sequence(path, tp.transplant_apply(lam, mu, hs.read_sequence_csv(apply_path), N))
        return
    if path is None:
        raise click.UsageError("kernel export needs --out")
    tp.build_kernel_matrix(lam, mu, N, parity).to_csv(path)
    click.echo(f"transplant kernel ({lam},{mu}) {parity} N={N} -> {path}")


@main.command()
@click.option("--kernel", "kind", type=click.Choice(["heat", "psi", "poisson-deriv", "transplant", "file"]),
              required=True)
@click.option("--size", "N", type=int, default=512, show_default=True)
@click.option("--lambda", "lam", type=float, default=1.0, show_default=True)
@click.option("--mu", type=float, default=None)
@click.option("--parity", type=click.Choice(tp.PARITIES), default="even", show_default=True)
@click.option("--t-grid", default=None, help="min,max,ppd (default: per-size kernel grid)")
@click.option("--file", "path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--band-only", is_flag=True)
@click.option("--tolerance", type=float, default=0.10, show_default=True, help="Allowed drift N -> 2N.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def certify(ctx, kind, N, lam, mu, parity, t_grid, path, band_only, tolerance, out):
    """Fit kernel constants at N and 2N and report their drift (file kernels: one size)."""
    t0 = time.perf_counter()
    grid = _grid(t_grid)
    hormander = kind != "transplant"
    if kind == "file":
        if not path:
            raise click.UsageError("--kernel file needs --file")
        rep = ht.cz_certify(ht.load_kernel_csv(path), hormander=hormander, band_only=band_only)
    else:
        K1 = _build(kind, lam, mu, N, parity, grid)
        K2 = _build(kind, lam, mu, 2 * N, parity, grid)
        rep = ht.cz_certify(K1, K2, tolerance, hormander, band_only)
    observed = max(rep.drift.values()) if rep.drift else 0.0
    report = hs.VerificationReport(
        f"certify-{kind}", {"N": rep.N, "band_only": band_only, **rep.params},
        hs.jsonable({**rep.constants, **{f"{k}.drift": v for k, v in (rep.drift or {}).items()}}),
        tolerance, hs.jsonable(observed), bool(rep.passed),
        [rep.N, 2 * rep.N, None] if rep.drift else None,
        int(round(1000 * (time.perf_counter() - t0))))
    click.echo(report.line())
    _finish_run(ctx, [report], out, {"command": "certify", "kernel": kind})


@main.command()
@click.option("--only", multiple=True, help="Run just this check id (repeatable).")
@click.option("--list", "list_only", is_flag=True, help="List check ids and exit.")
@click.option("--no-timing", is_flag=True, help="Write runtime_ms = 0 (byte-identical reruns).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def verify(ctx, only, list_only, no_timing, out):
    """Run the acceptance checks; exit status 1 if any fails."""
    if list_only:
        for cid, (crit, _) in hs.REGISTRY.items():
            click.echo(f"{crit:>4} {cid}")
        return
    try:
        cfg = hs.RunConfig(seed=ctx.obj["seed"], threads=ctx.obj["threads"], only=only,
                           out=_out(ctx, out), record_timing=not no_timing)
        reports = hs.run_suite(cfg, echo=click.echo)
    except ConfigurationError as exc:
        raise click.UsageError(str(exc)) from exc
    _finish_run(ctx, reports, out, cfg.as_dict())


def _finish_run(ctx, reports, out, config: dict) -> None:
    s = hs.summary(reports)
    click.echo(f"passed {s['passed']}  failed {s['failed']}")
    path = _out(ctx, out)
    if path:
        hs.write_json(path, {"config": config, "reports": [r.to_dict() for r in reports], "summary": s})
    ctx.exit(1 if s["failed"] else 0)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
