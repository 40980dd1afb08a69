"""Command line: invariant suites, Zhu tables, sewing and propagation dumps."""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor

import click
from gmpy2 import mpq

from . import geometry as geo
from . import propagation as prop
from . import sewing as sw
from . import suites
from . import zhu
from .modules import VacuumModule
from .scalars import parse_scalar, scalar_to_str
from .voa import CutoffError, build_heisenberg, build_virasoro, build_voa

SUITES = ("jacobi", "coord", "tensor", "zhu", "propagation", "sewing", "blocks")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


UsageError = click.UsageError


# -- configuration ----------------------------------------------------------------

def load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in doc.items()}


def merged(config, **flags):
    """Config values overridden by every flag that was given."""
    out = dict(config)
    for k, v in flags.items():
        if v is not None and v != ():
            out[k] = v
    return out


def parse_c(value):
    try:
        return parse_scalar(value)
    except ValueError as exc:
        raise UsageError(f"invalid central charge: {exc}")


def parse_label(text):
    """'1,1' -> (1, 1); '' or 'vac' -> the vacuum label ()."""
    s = str(text).strip().strip("()[]")
    if s in ("", "vac", "vacuum"):
        return ()
    try:
        parts = tuple(int(x) for x in s.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"invalid basis label {text!r}")
    if list(parts) != sorted(parts, reverse=True) or any(p < 1 for p in parts):
        raise UsageError(f"basis label {text!r} must be a decreasing list of positive parts")
    return parts


def make_voa(cfg, default_cutoff=6):
    name = cfg.get("voa", "heisenberg")
    cutoff = int(cfg.get("cutoff", default_cutoff))
    if cutoff < 2:
        raise UsageError("cutoff must be at least 2")
    if name == "heisenberg":
        return build_heisenberg(cutoff)
    if name == "virasoro":
        return build_virasoro(parse_c(cfg.get("c", "1/2")), cutoff)
    raise UsageError(f"unknown voa {name!r}")


def check_label(V, lab):
    if V.name == "virasoro" and any(p < 2 for p in lab):
        raise UsageError(f"Virasoro basis labels have parts >= 2, got {lab}")


def emit(doc, summary, cfg=None):
    text = json.dumps(doc, sort_keys=True, indent=2)
    out = (cfg or {}).get("output")
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc.strerror}")
    else:
        click.echo(text)
    click.echo(summary, err=True)


def common(f):
    f = click.option("--config", type=click.Path(), default=None, help="JSON file mirroring the flags.")(f)
    f = click.option("--voa", type=click.Choice(["heisenberg", "virasoro"]), default=None)(f)
    f = click.option("--c", "c", default=None, help="Central charge p/q or 'generic' (Virasoro).")(f)
    f = click.option("--cutoff", type=int, default=None, help="Weight cutoff K.")(f)
    f = click.option("--output", type=click.Path(), default=None, help="Write the JSON report here.")(f)
    return f


# -- suites ---------------------------------------------------------------------------

def _run_suite(name, desc, seed=0):
    V = build_voa(desc)
    if name == "jacobi":
        return suites.jacobi_suite(V, total=min(6, V.cutoff))
    if name == "coord":
        return suites.coord_suite(V, wcap=min(6, V.cutoff), seed=seed)
    if name == "tensor":
        return suites.tensor_suite((V, build_heisenberg(V.cutoff)), total=min(5, V.cutoff), span=1)
    if name == "zhu":
        cases = [(V, n, V.cutoff) for n in (0, 1) if V.cutoff >= 2 * n + 1]
        rep = suites.zhu_pipeline_suite(cases)
        laws = suites.zhu_laws_suite(cases)
        rep["laws"] = laws
        rep["pass"] = rep["pass"] and laws["pass"]
        return rep
    big = V.with_cutoff(40)
    if name == "propagation":
        return suites.propagation_suite(big, wcap=2)
    if name == "sewing":
        return suites.sewing_suite(big, wcap=2)
    if name == "blocks":
        return suites.block_suite(big, K=min(8, V.cutoff))
    raise ValueError(name)


class LibraryError(click.ClickException):
    exit_code = EXIT_USAGE


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (CutoffError, geo.GeometryError) as exc:
            raise LibraryError(str(exc)) from None


@click.group(cls=_Group)
@click.version_option(package_name="artifact")
def main():
    """Exact computations with vertex operator algebras at genus zero."""


@main.command()
@common
@click.option("--suite", "suite", multiple=True, type=click.Choice(SUITES + ("all",)), help="Suites to run.")
@click.option("--criterion", "criterion", multiple=True, type=click.IntRange(1, 9),
              help="Acceptance criteria to run at their full parameters (repeatable).")
@click.option("--seed", type=int, default=None, help="Seed for the random coordinate maps.")
@click.option("--jobs", type=int, default=None, help="Worker processes (output order is fixed).")
def check(config, voa, c, cutoff, output, suite, criterion, seed, jobs):
    """Run invariant suites or acceptance criteria; exit 1 on any exact-equality failure."""
    cfg = merged(load_config(config), voa=voa, c=c, cutoff=cutoff, output=output, suite=suite,
                 criterion=criterion, seed=seed, jobs=jobs)
    njobs = max(1, int(cfg.get("jobs") or 1))
    crit = cfg.get("criterion") or []
    if isinstance(crit, int):
        crit = [crit]
    if crit:
        for n in crit:
            if not isinstance(n, int) or not 1 <= n <= 9:
                raise UsageError(f"criteria are numbered 1..9, got {n!r}")
        results = _map(suites.acceptance_criterion, [list(crit)], njobs)
        ok = all(r["pass"] for r in results)
        emit({"criteria": results, "pass": ok},
             "\n".join(f"criterion {r['criterion']}: {'pass' if r['pass'] else 'FAIL'} "
                       f"({r['checked']} checks)" for r in results), cfg)
        sys.exit(EXIT_PASS if ok else EXIT_FAIL)
    V = make_voa(cfg)
    names = cfg.get("suite") or ["jacobi"]
    if isinstance(names, str):
        names = [names]
    if "all" in names:
        names = list(SUITES)
    for n in names:
        if n not in SUITES:
            raise UsageError(f"unknown suite {n!r}")
    desc = V.descriptor()
    seed = int(cfg.get("seed") or 0)
    reports = _map(_run_suite, [names, [desc] * len(names), [seed] * len(names)], njobs)
    ok = all(r["pass"] for r in reports)
    emit({"voa": V.descriptor(), "reports": reports, "pass": ok},
         "\n".join(f"{r['suite']}: {'pass' if r['pass'] else 'FAIL'} ({r['checked']} checks)" for r in reports), cfg)
    sys.exit(EXIT_PASS if ok else EXIT_FAIL)


def _map(fn, columns, njobs):
    """Apply ``fn`` across argument columns, in a process pool when asked; order is kept."""
    if njobs > 1 and len(columns[0]) > 1:
        with ProcessPoolExecutor(max_workers=njobs) as ex:
            return list(ex.map(fn, *columns))
    return [fn(*args) for args in zip(*columns)]


# -- zhu ----------------------------------------------------------------------------------

@main.command("zhu")
@common
@click.option("--level", type=int, default=None, help="Level n of A_n(V).")
def zhu_cmd(config, voa, c, cutoff, output, level):
    """Emit the A_n(V) product table with stability and pipeline flags."""
    cfg = merged(load_config(config), voa=voa, c=c, cutoff=cutoff, output=output, level=level)
    V = make_voa(cfg)
    n = int(cfg.get("level", 0))
    if n < 0:
        raise UsageError("level must be nonnegative")
    K = V.cutoff
    data = zhu.build_A_n(V, n, K)
    agree, _, _ = zhu.pipelines_agree(V, n, K)
    laws = data.check_laws()
    doc = data.to_json()
    doc["pipelines_agree"] = agree
    doc["laws_checked"] = data.laws_checked
    doc["law_failures"] = [repr(f) for f in laws[:10]]
    doc["a_vs_atilde_delta"] = data.zn_dim
    one = data.project({V.vacuum: 1})
    doc["unit"] = [list(k) for k in one]
    om = zhu.omega_vector(data.V)
    if data.fits(2):
        doc["omega_central"] = all(
            data.product(om, {r: 1}) == data.product({r: 1}, om)
            for r in data.reps if data.fits(2, data.V.weight(r)))
    if not data.stable:
        doc["warning"] = f"cutoff {K} is outside the stable window for level {n}"
    ok = agree and not laws
    emit(doc, f"A_{n}({V.name}) at cutoff {K}: dim {len(data.reps)}, stable={data.stable}, "
              f"pipelines_agree={agree}, laws={'pass' if not laws else 'FAIL'}", cfg)
    sys.exit(EXIT_PASS if ok else EXIT_FAIL)


# -- sewing and propagation -------------------------------------------------------------------

def _functional(V, cfg):
    a = parse_label(cfg.get("phi_a", ""))
    b = parse_label(cfg.get("phi_b", ""))
    check_label(V, a)
    check_label(V, b)
    return prop.MatrixCoefficient(V, a, b)


def _geometry(cfg, phi):
    doc = cfg.get("geometry")
    if doc is None:
        return geo.q_sphere(*phi.levels)
    if isinstance(doc, str):
        try:
            with open(doc) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read geometry {doc}: {exc.strerror}")
        except json.JSONDecodeError as exc:
            raise UsageError(f"geometry parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    try:
        return geo.PointedSphere.from_json(doc)
    except geo.GeometryError as exc:
        raise UsageError(f"invalid geometry: {exc}")


def _q_levels(X):
    """Levels (a_inf, a0) for the sphere with incoming 1 and outgoing 0, inf."""
    inc = X.incoming_points
    out = {mp.point: mp.level for mp in X.outgoing}
    if inc != [mpq(1)] or set(out) != {geo.INF, mpq(0)}:
        raise UsageError("propagation dumps support the sphere with incoming 1 and outgoing 0, inf")
    return out[geo.INF], out[mpq(0)]


def sew_options(f):
    f = click.option("--phi-a", default=None, help="Block phi_{a,b}: label a at 0.")(f)
    f = click.option("--phi-b", default=None, help="Block phi_{a,b}: label b at inf.")(f)
    f = click.option("--u", "u", default=None, help="Basis label u.")(f)
    f = click.option("--w", "w", default=None, help="Basis label w.")(f)
    f = click.option("--order", type=int, default=None, help="Expansion order.")(f)
    return f


@main.command()
@common
@sew_options
def sew(config, voa, c, cutoff, output, phi_a, phi_b, u, w, order):
    """Normalized sewing series of phi (x) <Y(u,1)w, w'> and its propagation cross-check."""
    cfg = merged(load_config(config), voa=voa, c=c, cutoff=cutoff, output=output, phi_a=phi_a, phi_b=phi_b,
                 u=u, w=w, order=order)
    V = make_voa(cfg).with_cutoff(10 ** 6)
    phi = _functional(V, cfg)
    uu, ww = parse_label(cfg.get("u", "")), parse_label(cfg.get("w", ""))
    check_label(V, uu)
    check_label(V, ww)
    N = int(cfg.get("order", 8))
    if N < 0:
        raise UsageError("order must be nonnegative")
    series = sw.sewing_series(sw.sphere_sewing_task(phi, uu), ww, N)
    rep = sw.sewing_vs_propagation(phi, [(uu, ww)], N)
    sphere = sw.sphere_sewing_check(phi, [(uu, ww)], N)
    ok = rep["pass"] and sphere["pass"]
    doc = {"functional": phi.describe(), "u": list(uu), "w": list(ww), "order": N,
           "series": sw.series_to_json(series),
           "sewing_vs_propagation": rep, "cross_check": "pass" if ok else "fail"}
    emit(doc, f"sewing order {N}: {len(series)} nonzero coefficients, cross-check {doc['cross_check']}", cfg)
    sys.exit(EXIT_PASS if ok else EXIT_FAIL)


@main.command()
@common
@sew_options
@click.option("--geometry", default=None, help="Pointed sphere JSON file.")
def propagate(config, voa, c, cutoff, output, phi_a, phi_b, u, w, order, geometry):
    """Propagated rational functions on the sphere q, checked by two routes and a certificate."""
    cfg = merged(load_config(config), voa=voa, c=c, cutoff=cutoff, output=output, phi_a=phi_a, phi_b=phi_b,
                 u=u, w=w, order=order, geometry=geometry)
    V = make_voa(cfg).with_cutoff(10 ** 6)
    phi = _functional(V, cfg)
    X = _geometry(cfg, phi)
    levels = _q_levels(X)
    if tuple(levels) != phi.levels:
        phi = zhu.Relevelled(phi, levels)
    if cfg.get("u") is not None:
        vs = [parse_label(cfg["u"])]
    else:
        vs = V.basis.upto(2)
    if cfg.get("w") is not None:
        ws = [parse_label(cfg["w"])]
    else:
        ws = V.basis.upto(2)
    for lab in vs + ws:
        check_label(V, lab)
    P = prop.QPropagator(phi)
    items = []
    ok = True
    for v in vs:
        for x in ws:
            try:
                F = P.F(v, x)
            except prop.NoSolutionError as exc:
                items.append({"v": list(v), "w": list(x), "error": str(exc)})
                ok = False
                continue
            cert = prop.certify_q(P, v, x).passed
            routes = all(P.minus(v, k, y) == P.minus(v, k, y, route="B")
                         and P.plus_prime(v, k, y) == P.plus_prime(v, k, y, route="B")
                         for k in range(-2, 3) for y in [x])
            ok = ok and cert and routes
            items.append({"v": list(v), "w": list(x), "function": F.to_json(),
                          "certificate": cert, "routes_agree": routes})
    doc = {"functional": phi.describe(), "geometry": X.descriptor(), "functions": items,
           "cross_check": "pass" if ok else "fail"}
    emit(doc, f"propagated {len(items)} functions, cross-check {doc['cross_check']}", cfg)
    sys.exit(EXIT_PASS if ok else EXIT_FAIL)


# -- fusion quotient -----------------------------------------------------------------------------

@main.command()
@common
@click.option("--geometry", default=None, help="Pointed sphere JSON file (default: q at --level).")
@click.option("--level", type=int, default=None, help="Levels (n, n) of the default sphere.")
@click.option("--weight-budget", "E", type=int, default=None, help="Section weight budget E.")
@click.option("--pole-budget", "k", type=int, default=None, help="Pole budget k at incoming points.")
def fusion(config, voa, c, cutoff, output, geometry, level, E, k):
    """Coinvariant quotient of the vacuum module on a pointed sphere."""
    cfg = merged(load_config(config), voa=voa, c=c, cutoff=cutoff, output=output, geometry=geometry, level=level, E=E, k=k)
    V = make_voa(cfg)
    K = V.cutoff
    n = int(cfg.get("level", 0))
    if cfg.get("geometry") is None:
        X = geo.q_sphere(n, n)
    else:
        X = _geometry(cfg, None)
    if len(X.incoming) != 1:
        raise UsageError("fusion supports one incoming point carrying the vacuum module")
    fq = geo.FusionQuotient(X, VacuumModule(V), int(cfg.get("E", K)), int(cfg.get("k", K + 1)), K)
    doc = fq.to_json()
    emit(doc, f"fusion quotient dim {fq.dim} at cutoff {K}", cfg)
    sys.exit(EXIT_PASS)


@main.command("dump-voa")
@common
def dump_voa(config, voa, c, cutoff, output):
    """Descriptor, graded dimensions and the conformal vector."""
    cfg = merged(load_config(config), voa=voa, c=c, cutoff=cutoff, output=output)
    V = make_voa(cfg)
    doc = V.descriptor()
    doc["dims"] = [len(V.basis.of_weight(n)) for n in range(V.cutoff + 1)]
    doc["basis"] = [list(lab) for lab in V.basis.upto()]
    doc["conformal"] = [[list(k), scalar_to_str(x)] for k, x in sorted(V.conformal.items())]
    emit(doc, f"{V.name} to weight {V.cutoff}: dims {doc['dims']}", cfg)
    sys.exit(EXIT_PASS)


def run():
    main()


if __name__ == "__main__":
    run()
