"""Invariant suites shared by the command line and the acceptance tests.

Every suite returns a plain report dict with at least ``suite``,
``checked``, ``failures`` (the first few, JSON friendly) and ``pass``.
"""

from __future__ import annotations

import random
from itertools import product

from gmpy2 import mpq

from . import coords
from . import propagation as prop
from . import sewing as sw
from . import zhu
from .linalg import vaxpy
from .modules import VacuumModule, jacobi_check, jacobi_required_cutoff
from .multimodule import MultiModule, slot_round_trip, verify_tensor_jacobi
from .scalars import RatFunc, scalar_to_str
from .voa import build_heisenberg, build_virasoro

MAX_REPORTED = 10


def _report(suite, checked, failures, **extra):
    out = {
        "suite": suite,
        "checked": checked,
        "n_failures": len(failures),
        "failures": [repr(f) for f in failures[:MAX_REPORTED]],
        "pass": not failures,
    }
    out.update(extra)
    return out


def _triples(V, total):
    labs = V.basis.upto(total)
    for u in labs:
        for v in labs:
            for w in labs:
                if V.weight(u) + V.weight(v) + V.weight(w) <= total:
                    yield u, v, w


# -- Jacobi ------------------------------------------------------------------------

def jacobi_suite(V, total=6, span=2):
    """All homogeneous basis triples of total weight <= ``total``, (m,n,h) in [-span, span]^3.

    Instances touching weights above the cutoff are rerun on a wider view
    of the same algebra; ``escalated`` counts them.
    """
    W = VacuumModule(V)
    wide = {}
    rng = range(-span, span + 1)
    checked = 0
    escalated = 0
    failures = []
    for u, v, w in _triples(V, total):
        wu, wv, ww = V.weight(u), V.weight(v), V.weight(w)
        for m, n, h in product(rng, rng, rng):
            need = jacobi_required_cutoff(wu, wv, ww, m, n, h)
            M = W
            if need > V.cutoff:
                escalated += 1
                M = wide.get(need)
                if M is None:
                    M = wide[need] = VacuumModule(V.with_cutoff(need))
            diff = jacobi_check(M, {u: 1}, {v: 1}, {w: 1}, m, n, h)
            checked += 1
            if diff:
                failures.append((u, v, w, m, n, h))
    return _report("jacobi", checked, failures, voa=V.descriptor(), escalated=escalated)


# -- coordinate change ------------------------------------------------------------

def random_polynomial_map(rng, order):
    lead = mpq(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 3))
    rho = [0, lead] + [mpq(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(order - 1)]
    return coords.fit_coefficients(rho, order)


def coord_suite(V, wcap=6, maps=20, seed=0):
    """Fitted gamma_z against its closed form, the composition law and the z^{L(0)} identity."""
    W = VacuumModule(V.with_cutoff(max(V.cutoff, wcap)))
    labs = W.voa.basis.upto(wcap)
    z = RatFunc.t()
    failures = []
    checked = 0
    K = wcap
    g = coords.gamma_map(z, K)
    for v in labs:
        lhs = coords.apply_U(g, W, {v: 1})
        rhs = coords.closed_form_gamma(W, z, {v: 1})
        vaxpy(lhs, rhs, -1)
        checked += 1
        if lhs:
            failures.append(("gamma_closed_form", v))
    rng = random.Random(seed)
    samples = [{v: 1} for v in labs]
    for _ in range(maps):
        r1 = random_polynomial_map(rng, K)
        r2 = random_polynomial_map(rng, K)
        rep = coords.check_representation(r1, r2, W, samples)
        checked += rep["checked"]
        if not rep["pass"]:
            failures.append(("composition", [scalar_to_str(x) for x in r1.series()]))
    for v in labs:
        checked += 1
        if coords.check_gamma_scaling(W, {v: 1}):
            failures.append(("scaling_identity", v))
    return _report("coord", checked, failures, voa=V.descriptor())


# -- tensor modules --------------------------------------------------------------------

def tensor_suite(voas, total=5, span=1, cutoff=None):
    """Jacobi for tensor-factorizable triples and the slot round trip."""
    cutoff = cutoff or total + 3 * span + 2
    vs = [V.with_cutoff(cutoff) for V in voas]
    W = MultiModule([VacuumModule(V) for V in vs])
    labels = W.basis_upto(total)
    samples = []
    rng = range(-span, span + 1)
    for u in labels:
        for v in labels:
            for w in labels:
                if W.weight(u) + W.weight(v) + W.weight(w) > total:
                    continue
                for m, n, h in product(rng, rng, rng):
                    samples.append((u, v, w, m, n, h))
    rep = verify_tensor_jacobi(W, samples)
    failures = [f[0] for f in rep["failures"]]
    checked = rep["checked"]
    for i, V in enumerate(vs):
        for a in V.basis.upto(3):
            for w in W.basis_upto(3):
                for n in range(-2, 3):
                    checked += 1
                    if slot_round_trip(W, i, a, n, w):
                        failures.append(("round_trip", i, a, n, w))
    return _report("tensor", checked, failures, voas=[V.descriptor() for V in vs], span=span)


# -- Zhu algebras -------------------------------------------------------------------------

def zhu_pipeline_suite(cases):
    """Geometric and classical quotients agree for each (V, n, K)."""
    failures = []
    dims = []
    for V, n, K in cases:
        ok, g, c = zhu.pipelines_agree(V, n, K)
        dims.append({"voa": V.name, "level": n, "cutoff": K, "dim": c.dim})
        if not ok:
            failures.append((V.name, n, K))
    return _report("zhu_pipelines", len(cases), failures, cases=dims)


def zhu_laws_suite(cases):
    failures = []
    checked = 0
    for V, n, K in cases:
        data = zhu.build_A_n(V, n, K)
        f = data.check_laws()
        checked += data.laws_checked
        failures.extend((V.name, n, K) + tuple(x) for x in f)
    return _report("zhu_laws", checked, failures)


def top_level_suite(cases, ucap=3, wcap=3):
    failures = []
    checked = 0
    for V, n in cases:
        rep = zhu.check_top_level(V, n, VacuumModule(V), ucap, wcap)
        checked += rep["checks"]
        failures.extend((V.name, n) + tuple(x[:2]) for x in rep["failures"])
    return _report("top_level", checked, failures)


# -- propagation -------------------------------------------------------------------------------

def default_pool(V):
    """Matrix-coefficient blocks used by the propagation and sewing suites."""
    if V.name == "heisenberg":
        pairs = [((), ()), ((1,), (1,)), ((1, 1), (2,))]
    else:
        pairs = [((), ()), ((2,), (2,)), ((2,), ())]
    return [prop.MatrixCoefficient(V, a, b) for a, b in pairs]


def propagation_suite(V, wcap=3, order=8, p2=mpq(1, 3)):
    """Double propagation properties, the vacuum identity, certificates and commutation."""
    failures = []
    checked = 0
    labs = V.basis.upto(wcap)
    for phi in default_pool(V):
        P = prop.propagator(phi)
        for v1 in labs:
            for v2 in labs:
                for w in labs:
                    checked += 1
                    f = prop.property_suite(phi, v1, v2, w, p2, order)
                    failures.extend(("double",) + x[:2] for x in f)
        for w in labs:
            checked += 1
            F = P.F(V.vacuum, w)
            for x in (mpq(2), mpq(-1, 3)):
                if F(x) != phi({w: 1}):
                    failures.append(("vacuum", w, x))
        for v in labs:
            for w in labs:
                checked += 1
                if not prop.certify_q(P, v, w).passed:
                    failures.append(("certificate", v, w))
        pairs = [((u, j), (v, k)) for u in labs[:4] for v in labs[:4] for j in range(-1, 3) for k in range(-1, 3)]
        c = zhu.commutation_check(phi, pairs, V.basis.upto(2))
        checked += len(pairs)
        failures.extend(("commutation",) + x for x in c)
    return _report("propagation", checked, failures, voa=V.descriptor(), order=order)


# -- sewing -----------------------------------------------------------------------------------------

def sewn_family(phi, wcap):
    """Sections (v, u, w, m, l) whose pole orders just meet the outgoing conditions."""
    V = phi.voa
    need = sum(phi.levels) + 2
    labs = V.basis.upto(wcap)
    out = []
    for m in range(need + 2):
        for l in range(need + 2):
            if m + l < need or m + l > need + 1:
                continue
            out.extend((v, u, w, m, l) for v in labs for u in labs for w in labs)
    return out


def sewing_suite(V, wcap=3, order=8):
    failures = []
    checked = 0
    labs = V.basis.upto(wcap)
    pairs = [(u, w) for u in labs for w in labs]
    for phi in default_pool(V):
        rep = sw.sphere_sewing_check(phi, pairs, order)
        checked += rep["checked"]
        failures.extend(("sphere_identity",) + f for f in rep["failures"])
        rep = sw.sewing_vs_propagation(phi, pairs, order)
        checked += rep["checked"]
        if not rep["pass"]:
            failures.append(("sewing_vs_propagation", rep["first_mismatch"]))
        rep = sw.sewn_relation_check(phi, sewn_family(phi, 2), 5)
        checked += rep["checked"]
        if not rep["pass"]:
            failures.append(("sewn_relation", rep["witness"]))
    out = _report("sewing", checked, failures, voa=V.descriptor(), order=order)
    if V.name == "heisenberg":
        fp = sw.heisenberg_four_point(V, order)
        out["four_point_exact"] = fp["sewn"] == fp["oracle"] == fp["closed_form"]
        if not out["four_point_exact"]:
            out["pass"] = False
        num = sw.heisenberg_four_point(V, 40, mpq(1, 2))["sewn"]
        out["probe"] = sw.convergence_probe(sw.series_coefficients(num, 41))
    return out


# -- block regression --------------------------------------------------------------------------------

def block_pool(V, K=8):
    """Functionals marked as blocks, each with its level."""
    pool = list(default_pool(V))
    for n in (0, 1):
        data = zhu.build_A_n(V, n, K)
        pool.extend(zhu.dual_functionals(data))
    mc = default_pool(V)
    pool.append(zhu.SumFunctional([(mpq(2), mc[0]), (mpq(-1), mc[1])]))
    pool.append(prop.Y_minus(mc[1], V.basis.upto(2)[-1], 0))
    pool.append(prop.Y_plus(mc[1], V.basis.upto(2)[-1], 0))
    return pool


def block_suite(V, K=8, K_pattern=12, targets=((0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2))):
    """Every pool member kills its relations; the vanishing pattern decides the others.

    Relations survive the weight truncation only partially, so the pattern
    comparison for exact functionals runs at the larger ``K_pattern``.
    """
    failures = []
    checked = 0
    positive = 0
    for phi in block_pool(V, K):
        cut = getattr(phi, "cutoff", None)
        KK = min(K, cut) if cut is not None else K
        checked += 1
        if not zhu.kills_relations(phi, phi.levels, KK):
            failures.append(("not_a_block", phi.describe()))
        if cut is not None:
            continue
        for lv in targets:
            checked += 1
            pattern = zhu.vanishing_pattern(phi, lv, 3)
            kills = zhu.kills_relations(phi, lv, K_pattern)
            positive += pattern
            if pattern != kills:
                failures.append(("pattern", phi.describe(), lv, pattern, kills))
    return _report("blocks", checked, failures, voa=V.descriptor(), pattern_positive=positive)



# -- acceptance criteria --------------------------------------------------------------------

def _acceptance_voas():
    heis = build_heisenberg(8)
    half = build_virasoro(mpq(1, 2), 8)
    generic = build_virasoro(RatFunc.t(), 8)
    return heis, half, generic


def _probe_ok(rep, radius=0.5, rel=0.10):
    probe = rep.get("probe") or {}
    r = probe.get("radius")
    return r is not None and abs(r - radius) <= rel * radius


def acceptance_criterion(n):
    """Run acceptance criterion ``n`` (1..9) at its stated parameters."""
    heis, half, generic = _acceptance_voas()
    if n == 1:
        title = "Jacobi identity, total weight <= 6, (m, n, h) in [-2, 2]^3"
        reports = [jacobi_suite(V, total=6, span=2) for V in (heis, half, generic)]
    elif n == 2:
        title = "coordinate change: gamma_z closed form, composition law, scaling identity"
        reports = [coord_suite(V, wcap=6, maps=20, seed=0) for V in (heis, half, generic)]
    elif n == 3:
        title = "tensor modules: Jacobi for factorizable triples of weight <= 5, slot round trip"
        reports = [tensor_suite((heis, heis), total=5, span=2),
                   tensor_suite((heis, generic), total=5, span=2)]
    elif n == 4:
        title = "geometric and classical Zhu quotients agree"
        reports = [zhu_pipeline_suite([(heis, 0, 6), (heis, 1, 6), (half, 0, 6)])]
    elif n == 5:
        title = "Zhu algebra laws on the truncation"
        reports = [zhu_laws_suite([(heis, 0, 8), (heis, 1, 8), (half, 0, 8), (half, 1, 8),
                                   (generic, 0, 6)])]
    elif n == 6:
        title = "top-level representation o(u <> v) = o(u) o(v) on Omega_n(V)"
        # O~_n generators reach weight 2 ucap + 2 n + 1, above the common cutoff
        wide = [V.with_cutoff(16) for V in (heis, half)]
        reports = [top_level_suite([(wide[0], 0), (wide[0], 1), (wide[1], 0), (wide[1], 1)],
                                   ucap=3, wcap=3)]
    elif n == 7:
        title = "double propagation properties, vacuum identity, certificates, commutation"
        reports = [propagation_suite(V.with_cutoff(40), wcap=3, order=8) for V in (heis, half)]
    elif n == 8:
        title = "sewing: sphere instance, sewing vs propagation, four-point function, probe"
        reports = [sewing_suite(V.with_cutoff(60), wcap=3, order=8) for V in (heis, half)]
        reports[0]["probe_within_10_percent"] = _probe_ok(reports[0])
        reports[0]["pass"] = reports[0]["pass"] and reports[0]["probe_within_10_percent"]
    elif n == 9:
        title = "every marked block kills its relations; vanishing pattern decides the rest"
        reports = [block_suite(V.with_cutoff(40), K=8) for V in (heis, half)]
    else:
        raise ValueError(f"acceptance criteria are numbered 1..9, got {n}")
    return {"criterion": n, "title": title, "reports": reports,
            "checked": sum(r["checked"] for r in reports),
            "pass": all(r["pass"] for r in reports)}
