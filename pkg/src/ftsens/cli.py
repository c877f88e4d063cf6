"""Command-line experiment runner.

Every task returns a JSON-ready report, an optional CSV table and plot series;
``--out DIR`` writes them to files, otherwise the report goes to stdout.
Exit status: 0 certified or verified, 2 violation suspected, 1 error.
"""

from __future__ import annotations

import math
import os
import re
import sys as _sys
import time
from fractions import Fraction
from pathlib import Path

import click
import numpy as np
import yaml

from . import kernels
from .certifier import SUSPECTED, certify, dyadic_schedule
from .continua import build_cw_unstable, shift_fu_closed_form
from .errors import ConfigError, FtsensError
from .firsttime import first_increase
from .geometry import Dyadic, HilbertPoint
from .hypmetric_entropy import (chain_lemma_check, compatibility_check, entropy_estimate,
                                lambda_m, mark, random_catalog, random_chain, split_constants,
                                split_tree, square_pool, torus_pool, verify_hyperbolic,
                                verify_sandwich)
from .serialize import csv_text, dumps, jsonable
from .systems import (CircleMap, ProductSystem, ShiftSystem, SlowedFlow, cat_map,
                      random_hilbert_point)

SCHEMA_VERSION = 1
SYSTEMS = ("shift", "cat", "cat-id", "shift-rotation", "slowed-flow")
TASKS = ("first-time", "certify", "continuum", "ftmetric", "entropy", "split-tree", "demo-notft")
EXIT_OK, EXIT_ERROR, EXIT_SUSPECTED = 0, 1, 2

_FRACTION = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")
_DECIMAL = re.compile(r"^\s*[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?\s*$")


class TaskResult:
    def __init__(self, report: dict, table: str | None = None, plots: dict | None = None,
                 status: int = EXIT_OK):
        self.report, self.table, self.plots, self.status = report, table, plots or {}, status


# parsing -----------------------------------------------------------------------

def parse_number(text, exact: bool):
    """Fractions like ``1/8`` on exact paths, decimals on sampled ones."""
    if isinstance(text, (int, float, Fraction)) and not isinstance(text, bool):
        text = str(text)
    s = str(text)
    if exact:
        if not _FRACTION.match(s):
            raise click.BadParameter(f"{s!r}: exact paths take fractions such as 1/8")
        return Fraction(s.replace(" ", ""))
    if "/" in s or not _DECIMAL.match(s):
        raise click.BadParameter(f"{s!r}: sampled paths take decimals such as 0.05")
    return float(s)


def parse_list(text, exact: bool) -> list:
    if isinstance(text, (list, tuple)):
        return [parse_number(v, exact) for v in text]
    return [parse_number(v, exact) for v in str(text).split(",") if v.strip()]


def parse_point(text) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in str(text).split(","))
    except ValueError:
        raise click.BadParameter(f"{text!r} is not a comma-separated point") from None


def make_system(name: str, epsilon=None, flow_h: float = 0.05):
    if name == "shift":
        return ShiftSystem(Dyadic.from_fraction(Fraction(epsilon)) if epsilon is not None else Dyadic(1, -3))
    if name == "cat":
        return cat_map()
    if name == "cat-id":
        return ProductSystem(cat_map(), CircleMap(None))
    if name == "shift-rotation":
        base = make_system("shift", epsilon)
        return ProductSystem(base, CircleMap())
    if name == "slowed-flow":
        return SlowedFlow(h=flow_h, samples=128, refine_gap=4e-3)
    raise click.BadParameter(f"unknown system {name!r}; choose from {', '.join(SYSTEMS)}")


def _dy(v):
    return Dyadic.from_fraction(Fraction(v))


def job_count(jobs: int | None) -> int:
    env = os.environ.get("FTSENS_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise click.BadParameter(f"FTSENS_JOBS={env!r} is not an integer") from None
    return max(1, jobs or os.cpu_count() or 1)


# output ------------------------------------------------------------------------

def _fmt(v) -> tuple[str, str | None]:
    """Decimal rendering, plus the reduced fraction for exact values."""
    if isinstance(v, Dyadic):
        v = v.to_fraction()
    if isinstance(v, Fraction):
        return repr(float(v)), str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v)), None
    return repr(float(getattr(v, "lower", v))), None


def emit_plotdata(series, path, meta: dict | None = None) -> Path:
    """Two numeric columns, one point per line, ``#`` header with metadata.
    Exact values carry their reduced fraction as a trailing comment."""
    path = Path(path)
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    for x, y in series:
        (xs, xf), (ys, yf) = _fmt(x), _fmt(y)
        exact = [f for f in (xf, yf) if f is not None]
        lines.append(f"{xs} {ys}" + (f"  # {' '.join(exact)}" if yf is not None else ""))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_outputs(result: TaskResult, out: str | None, name: str) -> None:
    if out is None:
        click.echo(dumps(result.report), nl=False)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / f"{name}.json").write_text(dumps(result.report), encoding="utf-8")
    if result.table is not None:
        (d / f"{name}.csv").write_text(result.table, encoding="utf-8", newline="")
    for key, (series, meta) in result.plots.items():
        emit_plotdata(series, d / f"{name}_{key}.dat", meta)
    click.echo(f"wrote {name} outputs to {d}")


# tasks -------------------------------------------------------------------------

def task_first_time(p: dict) -> TaskResult:
    exact = p["system"] != "slowed-flow"
    eps = parse_number(p.get("epsilon", "1/8" if exact else "0.1"), exact)
    sys = make_system(p["system"], eps if p["system"] == "shift" else None)
    r = parse_number(p["r"], exact)
    thr = parse_number(p.get("threshold", p.get("epsilon", "1/8" if exact else "0.1")), exact)
    rng = np.random.default_rng(p.get("seed", 0))
    if p["system"] == "shift":
        x = random_hilbert_point(rng)
        r, thr = _dy(r), _dy(thr)
    elif "x" in p:
        x = parse_point(p["x"])
        if exact:
            x = tuple(Fraction(v).limit_denominator(10 ** 6) for v in x)
    else:
        x = tuple(float(v) for v in rng.random(2))
    rec = first_increase(sys, x, r, thr, p.get("budget"))
    report = {"system": sys.id, "x": jsonable(x), "r": jsonable(r), "threshold": jsonable(thr),
              "n1": rec.n1, "ambiguous_steps": rec.ambiguous_steps,
              "diam_trace": [[j, jsonable(d)] for j, d in rec.diam_trace]}
    meta = {"system": sys.id, "series": "j vs diam f^j(B(x, r))", "r": r, "threshold": thr}
    return TaskResult(report, plots={"diam": (rec.diam_trace, meta)})


def _shift_samples(count: int, seed):
    rng = np.random.default_rng(seed)
    return [random_hilbert_point(rng) for _ in range(count)]


def task_certify(p: dict) -> TaskResult:
    name = p["system"]
    exact = name != "slowed-flow"
    count = int(p.get("samples", 10))
    if count < 1:
        raise click.UsageError("empty sample list: --samples must be at least 1")
    eps = parse_number(p.get("epsilon", "1/8" if exact else "0.1"), exact)
    gammas = parse_list(p.get("gammas", "1/16" if exact else "0.025"), exact)
    n_max = int(p.get("n_max", 16))
    seed = p.get("seed", 0)
    sys = make_system(name, eps if name == "shift" else None)
    if name == "shift":
        eps, gammas = _dy(eps), [_dy(g) for g in gammas]
        schedule = dyadic_schedule(eps.ldexp(-1), n_max)
        samples = _shift_samples(count, seed)
    elif name == "slowed-flow":
        schedule = dyadic_schedule(float(p.get("r1", 0.2)), n_max)
        offs = np.linspace(0.05, 0.3, count)
        samples = [sys.stable_orbit_point(float(s)) for s in offs]
    else:
        raise click.BadParameter(f"certify runs on shift or slowed-flow, not {name!r}")
    rep = certify(sys, samples, schedule, gammas, eps, budget=p.get("budget"),
                  jobs=job_count(p.get("jobs")), seed=None if exact else seed)
    series = {}
    for g, st in rep.per_gamma.items():
        best = {}
        for _, k, d in st.f2:
            best[k] = max(best.get(k, 0), d)
        series[f"f2_{len(series)}"] = (sorted(best.items()),
                                       {"series": "k vs max F2 difference", "gamma": g})
    status = EXIT_SUSPECTED if rep.verdict == SUSPECTED else EXIT_OK
    return TaskResult(rep.to_dict(), rep.to_csv(), series, status)


def task_continuum(p: dict) -> TaskResult:
    if p["system"] != "shift":
        raise click.BadParameter("the continuum task builds exact shift records")
    eps = parse_number(p.get("epsilon", "1/8"), True)
    gamma = parse_number(p.get("gamma", "1/16"), True)
    sys = make_system("shift", eps)
    x = _shift_samples(1, p.get("seed", 0))[0]
    g = _dy(gamma)
    rec = build_cw_unstable(sys, x, g, sys.m_gamma(g), range(1, int(p.get("stages", 12)) + 1))
    series = [(st.m, st.residual) for st in rec.stages if st.residual is not None]
    meta = {"system": sys.id, "series": "stage vs Hausdorff residual", "gamma": g}
    return TaskResult(rec.to_dict(), plots={"residual": (series, meta)},
                      status=EXIT_OK if rec.converged else EXIT_ERROR)


def task_ftmetric(p: dict) -> TaskResult:
    eps = parse_number(p.get("epsilon", "1/8"), True)
    sys = make_system("shift", eps)
    m = lambda_m(sys, sys.epsilon)
    rng = np.random.default_rng(p.get("seed", 0))
    rows, ok = [], True
    for c in range(int(p.get("catalogs", 3))):
        x = HilbertPoint({i: Dyadic(int(v), -8) for i, v in zip(range(-4, 9), rng.integers(64, 193, 13))})
        target, boxes, a, b = random_catalog(sys, rng, x, int(p.get("k", 3)), int(p.get("size", 50)))
        sw = verify_sandwich(sys, boxes, target, a, b, sys.epsilon, m)
        hyp = verify_hyperbolic(sys, mark(sys, target, a, b, sys.epsilon, m), boxes, int(p.get("n_max", 10)))
        compat = compatibility_check(sys, boxes, [sys.epsilon.ldexp(-j) for j in (1, 2, 3)],
                                     sys.epsilon, m)
        c_ok = sw.ok and hyp.ok and not any(r.failures for r in compat)
        ok &= c_ok
        rows.append((c, len(boxes), str(sw.result.D_value), str(sw.result.rho_of_whole),
                     sw.refinements, sw.ok, hyp.ok, c_ok))
    lemma_fail = 0
    trials = int(p.get("lemma_trials", 100))
    for _ in range(trials):
        lemma_fail += not chain_lemma_check(sys, random_chain(sys, rng, 5), sys.epsilon, m).ok
    ok &= lemma_fail == 0
    report = {"system": sys.id, "m": m, "lambda": f"2^(-1/{m})", "catalog_restricted": True,
              "catalogs": [dict(zip(("index", "size", "D", "rho", "refinements", "sandwich",
                                     "hyperbolic", "ok"), r)) for r in rows],
              "chain_lemma": {"trials": trials, "failures": lemma_fail}, "ok": ok}
    table = csv_text(["catalog", "size", "D", "rho", "refinements", "sandwich", "hyperbolic", "ok",
                      "provenance"], [(*r, "exact") for r in rows])
    return TaskResult(report, table, status=EXIT_OK if ok else EXIT_ERROR)


def task_entropy(p: dict) -> TaskResult:
    name = p["system"]
    delta = parse_number(p.get("delta", "0.05"), False)
    n_max = int(p.get("n_max", 12))
    size = int(p.get("pool", 100_000))
    seed = p.get("seed", 0)
    sys = make_system(name)
    if name not in ("cat", "slowed-flow"):
        raise click.BadParameter("entropy runs on cat or slowed-flow")
    if p.get("pool_kind", "square") == "square":
        center = parse_point(p.get("center", "0.3,0.6"))
        pool = square_pool(center, float(p.get("pool_side", 0.0125)), size, seed)
    else:
        pool = torus_pool(size, seed)
    t0 = time.perf_counter()
    res = entropy_estimate(sys, delta, n_max, pool)
    report = {"system": sys.id, **res.to_dict(), "seconds": round(time.perf_counter() - t0, 3),
              "pool_kind": p.get("pool_kind", "square"), "seed": seed}
    if name == "cat":
        report["log_expansion"] = math.log(sys.expansion)
    table = csv_text(["n", "s", "log_s", "provenance"],
                     [(n, s, math.log(s), f"sampled({seed})") for n, s in zip(res.n_values, res.counts)])
    series = [(n, math.log(s)) for n, s in zip(res.n_values, res.counts)]
    return TaskResult(report, table, {"logs": (series, {"system": sys.id, "series": "n vs log s(n, delta)",
                                                        "delta": delta})})


def task_split_tree(p: dict) -> TaskResult:
    eps = parse_number(p.get("epsilon", "1/8"), True)
    delta = parse_number(p.get("delta", "1/16"), True)
    sys = make_system("shift", eps)
    d = _dy(delta)
    sc = split_constants(sys, d)
    M = int(p.get("M", sc.M))
    x = HilbertPoint.constant()
    C0 = shift_fu_closed_form(x, sc.k_node, sys.epsilon)
    res = split_tree(sys, C0, M, d, int(p.get("depth", 6)), anchor=x, k_node=sc.k_node)
    report = res.to_dict()
    report.update({"system": sys.id, "k_node": sc.k_node, "alpha": str(sc.alpha),
                   "m_delta_over_6": sc.m_small})
    return TaskResult(report, status=EXIT_OK if res.ok else EXIT_ERROR)


def task_demo_notft(p: dict) -> TaskResult:
    q = dict(p)
    q.update(system="slowed-flow", epsilon=str(p.get("epsilon", "0.1")),
             gammas=str(p.get("gammas", "0.025")), samples=p.get("samples", 1),
             n_max=p.get("n_max", 10))
    res = task_certify(q)
    res.report["note"] = ("growth of the per-radius differences near the stable orbit of the "
                          "rest point is the statistical signature of a first-time violation")
    return res


TASK_FUNCS = {"first-time": task_first_time, "certify": task_certify, "continuum": task_continuum,
              "ftmetric": task_ftmetric, "entropy": task_entropy, "split-tree": task_split_tree,
              "demo-notft": task_demo_notft}


def selftest() -> TaskResult:
    checks = {}
    rng = np.random.default_rng(0)
    orbits = rng.random((300, 4, 2))
    a = kernels.greedy_separated(orbits, 0.1, backend="numpy")
    checks["greedy_numpy"] = len(a) > 0
    if kernels._core is not None:
        b = kernels.greedy_separated(orbits, 0.1, backend="cython")
        checks["greedy_backends_agree"] = list(a) == list(b)
        pts = rng.random((20, 2))
        u, v = pts.copy(), pts.copy()
        kernels.rk4_advance(u, 50, 0.02, 0.0, 0.0, math.sqrt(2) - 1, backend="numpy")
        kernels.rk4_advance(v, 50, 0.02, 0.0, 0.0, math.sqrt(2) - 1, backend="cython")
        checks["rk4_backends_agree"] = bool(np.allclose(u, v, atol=1e-12))
    sys = ShiftSystem()
    eps = sys.epsilon
    ok = True
    for x in _shift_samples(5, 1):
        for n in (4, 6):
            for g in (eps.ldexp(-1), eps.ldexp(-2)):
                n1 = first_increase(sys, x, eps.ldexp(-n), g).n1
                ok &= n1 in (n - sys.k_gamma(g) - 1, n - sys.k_gamma(g))
    checks["shift_first_time_window"] = ok
    checks["split_tree_depth3"] = task_split_tree({"depth": 3}).report["separated"]
    good = all(checks.values())
    return TaskResult({"backend": kernels.BACKEND, "checks": checks, "ok": good},
                      status=EXIT_OK if good else EXIT_ERROR)


# config files ------------------------------------------------------------------

def load_config(path: str) -> dict:
    """YAML config with an explicit ``schema_version``; errors carry line:column."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        node = yaml.compose(text)
        cfg = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark_ = exc.problem_mark or exc.context_mark
        where = f"{path}:{mark_.line + 1}:{mark_.column + 1}" if mark_ else path
        raise ConfigError(f"{where}: {exc.problem or exc}") from None

    def where(key):
        if node is not None and isinstance(node, yaml.MappingNode):
            for k, _ in node.value:
                if k.value == key:
                    return f"{path}:{k.start_mark.line + 1}:{k.start_mark.column + 1}"
        return f"{path}:1:1"

    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}:1:1: top level must be a mapping")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{where('schema_version')}: schema_version must be {SCHEMA_VERSION}")
    if cfg.get("task") not in TASKS:
        raise ConfigError(f"{where('task')}: task must be one of {', '.join(TASKS)}")
    system = cfg.get("system", "shift")
    if system not in SYSTEMS:
        raise ConfigError(f"{where('system')}: system must be one of {', '.join(SYSTEMS)}")
    params = cfg.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError(f"{where('params')}: params must be a mapping")
    if "samples" in params and isinstance(params["samples"], list):
        if not params["samples"]:
            raise click.UsageError("empty sample list in config")
        params["samples"] = len(params["samples"])
    return {"task": cfg["task"], "params": {"system": system, **params},
            "out": (cfg.get("output") or {}).get("dir")}


# click wiring --------------------------------------------------------------------

_common = [
    click.option("--out", type=click.Path(file_okay=False), default=None,
                 help="Directory for JSON, CSV and plot-data files (default: JSON on stdout)."),
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--jobs", type=int, default=None, help="Worker processes (default: logical cores)."),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


def _finish(ctx, result: TaskResult, out, name):
    write_outputs(result, out, name)
    ctx.exit(result.status)


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """First-time sensitivity experiments."""


@cli.command("first-time")
@click.option("--system", type=click.Choice(SYSTEMS), default="shift", show_default=True)
@click.option("--epsilon", default=None)
@click.option("--r", "r", required=True, help="Ball radius.")
@click.option("--threshold", default=None)
@click.option("--x", "x", default=None, help="Point as comma-separated coordinates (torus systems).")
@click.option("--budget", type=int, default=None)
@common
@click.pass_context
def first_time_cmd(ctx, system, epsilon, r, threshold, x, budget, out, seed, jobs):
    """First increasing time of one ball."""
    p = {"system": system, "r": r, "seed": seed, "budget": budget}
    for k, v in (("epsilon", epsilon), ("threshold", threshold), ("x", x)):
        if v is not None:
            p[k] = v
    _finish(ctx, task_first_time(p), out, "first_time")


@cli.command("certify")
@click.option("--system", type=click.Choice(("shift", "slowed-flow")), default="shift", show_default=True)
@click.option("--epsilon", default=None)
@click.option("--gammas", default=None, help="Comma-separated thresholds.")
@click.option("--n-max", type=int, default=16, show_default=True, help="Schedule length.")
@click.option("--samples", type=int, default=10, show_default=True)
@click.option("--r1", default="0.2", show_default=True, help="First radius on sampled paths.")
@click.option("--budget", type=int, default=None)
@common
@click.pass_context
def certify_cmd(ctx, system, epsilon, gammas, n_max, samples, r1, budget, out, seed, jobs):
    """Empirical F1/F2 differences and a verdict."""
    p = {"system": system, "n_max": n_max, "samples": samples, "seed": seed, "jobs": jobs,
         "budget": budget, "r1": r1}
    if epsilon is not None:
        p["epsilon"] = epsilon
    if gammas is not None:
        p["gammas"] = gammas
    _finish(ctx, task_certify(p), out, "certify")


@cli.command("continuum")
@click.option("--epsilon", default="1/8", show_default=True)
@click.option("--gamma", default="1/16", show_default=True)
@click.option("--stages", type=int, default=12, show_default=True)
@common
@click.pass_context
def continuum_cmd(ctx, epsilon, gamma, stages, out, seed, jobs):
    """Local cw-unstable continuum on the shift."""
    p = {"system": "shift", "epsilon": epsilon, "gamma": gamma, "stages": stages, "seed": seed}
    _finish(ctx, task_continuum(p), out, "continuum")


@cli.command("ftmetric")
@click.option("--epsilon", default="1/8", show_default=True)
@click.option("--catalogs", type=int, default=3, show_default=True)
@click.option("--size", type=int, default=50, show_default=True)
@click.option("--n-max", type=int, default=10, show_default=True)
@click.option("--lemma-trials", type=int, default=100, show_default=True)
@common
@click.pass_context
def ftmetric_cmd(ctx, epsilon, catalogs, size, n_max, lemma_trials, out, seed, jobs):
    """Sandwich, hyperbolicity, chain lemma and compatibility on random catalogs."""
    p = {"epsilon": epsilon, "catalogs": catalogs, "size": size, "n_max": n_max,
         "lemma_trials": lemma_trials, "seed": seed}
    _finish(ctx, task_ftmetric(p), out, "ftmetric")


@cli.command("entropy")
@click.option("--system", type=click.Choice(("cat", "slowed-flow")), default="cat", show_default=True)
@click.option("--delta", default="0.05", show_default=True)
@click.option("--n-max", type=int, default=12, show_default=True)
@click.option("--pool", type=int, default=100_000, show_default=True)
@click.option("--pool-kind", type=click.Choice(("square", "torus")), default="square", show_default=True)
@click.option("--pool-side", type=float, default=0.0125, show_default=True)
@click.option("--center", default="0.3,0.6", show_default=True)
@common
@click.pass_context
def entropy_cmd(ctx, system, delta, n_max, pool, pool_kind, pool_side, center, out, seed, jobs):
    """Greedy separated-set entropy estimate."""
    p = {"system": system, "delta": delta, "n_max": n_max, "pool": pool, "pool_kind": pool_kind,
         "pool_side": pool_side, "center": center, "seed": seed}
    _finish(ctx, task_entropy(p), out, "entropy")


@cli.command("split-tree")
@click.option("--epsilon", default="1/8", show_default=True)
@click.option("--delta", default="1/16", show_default=True)
@click.option("--depth", type=int, default=6, show_default=True)
@click.option("--M", "M", type=int, default=None, help="Override the derived split time.")
@common
@click.pass_context
def split_tree_cmd(ctx, epsilon, delta, depth, M, out, seed, jobs):
    """Exactly certified separated set from recursive splitting on the shift."""
    p = {"epsilon": epsilon, "delta": delta, "depth": depth}
    if M is not None:
        p["M"] = M
    _finish(ctx, task_split_tree(p), out, "split_tree")


@cli.command("demo-notft")
@click.option("--samples", type=int, default=1, show_default=True)
@click.option("--n-max", type=int, default=10, show_default=True)
@common
@click.pass_context
def demo_notft_cmd(ctx, samples, n_max, out, seed, jobs):
    """Certifier on the slowed flow, anchored near the stable orbit of the rest point."""
    p = {"samples": samples, "n_max": n_max, "seed": seed, "jobs": jobs}
    _finish(ctx, task_demo_notft(p), out, "demo_notft")


@cli.command("selftest")
@click.pass_context
def selftest_cmd(ctx):
    """Quick consistency checks of kernels and exact paths."""
    _finish(ctx, selftest(), None, "selftest")


@cli.command("run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def run_cmd(ctx, config):
    """Run the task described by a YAML config file."""
    cfg = load_config(config)
    _finish(ctx, TASK_FUNCS[cfg["task"]](cfg["params"]), cfg["out"], cfg["task"].replace("-", "_"))


def main(argv=None) -> int:
    """Entry point; usage and task errors exit with status 1."""
    try:
        rv = cli.main(args=argv, prog_name="ftsens", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_ERROR
    except click.Abort:
        return EXIT_ERROR
    except (FtsensError, ValueError) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_ERROR
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    _sys.exit(main())
