"""Pipeline stages shared by the command line and by ``run_pipeline``.

Each stage returns a plain dict (encoded later) and a pass flag.  Nothing
here reads the clock, so identical configs give identical reports.
"""

import math
import os

import numpy as np

from . import render
from .cfrac import bounded_type_witness, brjuno_partial_sum
from .circle import tune
from .config import parse_complex
from .dynamics import BlaschkeCubic, QuadraticSiegel
from .geometry import (
    best_limit,
    boundary_cloud,
    cauchy_gaps,
    deep_point_from_mask,
    deep_point_grid,
    julia_cloud,
    scaling_factor,
    self_similarity_kappa,
    tight_similarity_test,
    triangle_probe,
)
from .dynamics import Fate, classify_points
from .param_search import ratio_residual, refine, verify_herman
from .reports import make_report, write_csv, write_report


class StageFailed(RuntimeError):
    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"{stage}: {message}")


def cf_stage(rot, depth):
    rot = rot.extended(depth)
    coeffs = list(rot.coefficients[:depth])
    conv = rot.convergents()[:depth]
    period = rot.period()
    body = {
        "theta": rot.value,
        "name": rot.name,
        "coefficients": coeffs,
        "convergents": [{"n": c.index, "p": c.p, "q": c.q} for c in conv],
        "denominators": rot.denominators()[: depth + 1],
        "period": None if period is None else {"preperiod": period[0], "period": period[1]},
        "max_coefficient": bounded_type_witness(coeffs),
    }
    if depth >= 2:
        body["brjuno_partial_sum"] = brjuno_partial_sum(coeffs, depth - 1)
    return body, True


def find_params_stage(cfg):
    rot = cfg.rotation
    res = tune(float(cfg.a), rot, n=cfg.rotation_iterates)
    body = {
        "a": res.a,
        "t": res.t,
        "b": res.b,
        "rho": res.rho.value,
        "rotation_residual": res.residual,
        "iterates": res.rho.n,
    }
    return body, res


def parameters(cfg, tuned=None):
    """``(a, b)`` from the config, tuning ``b`` when it is not given."""
    if cfg.b is not None:
        return complex(cfg.a), parse_complex(cfg.b, "b")
    if tuned is None:
        _, tuned = find_params_stage(cfg)
    return complex(tuned.a), tuned.b


def refine_stage(cfg, a, b):
    rot = cfg.rotation
    res = refine((a, b), rot, cfg.n, tol=cfg.tol, dps=cfg.work_dps)
    ladder = [ratio_residual(res.to_map(), rot, m, dps=cfg.work_dps).residual for m in range(2, cfg.n + 1)]
    body = {
        "a": res.a,
        "b": res.b,
        "n": res.n,
        "residual": res.residual,
        "abs_residual": abs(res.residual),
        "steps": len(res.trace),
        "residual_ladder": [{"n": m, "residual": r, "abs": abs(r)} for m, r in zip(range(2, cfg.n + 1), ladder)],
    }
    return body, res


def _herman(cfg, P, f):
    rep = verify_herman(f, cfg.rotation, budget=cfg.rotation_iterates)
    body = {
        c.name: {"passed": c.passed, "value": c.value, "threshold": c.threshold, "detail": c.detail}
        for c in rep.checks
    }
    return body, rep.passed, None


def _scaling(cfg, P, f):
    lo, hi = cfg.geom("scaling_ns")
    ns = list(range(lo, hi + 1))
    Ls = scaling_factor(P, f, ns, dps=cfg.work_dps)
    gaps = cauchy_gaps(Ls)
    # differences shrink until rounding takes over; judge the first five gaps
    head = gaps[:5]
    ok = bool(np.all(np.diff(head) < 0) and np.all(Ls != 0))
    body = {
        "L_hat": [{"n": n, "L": L} for n, L in zip(ns, Ls)],
        "gaps": list(gaps),
        "L_limit": best_limit(Ls),
    }
    return body, ok, None


def _kappa(cfg, P, f):
    lo, hi = cfg.geom("kappa_ns")
    k = self_similarity_kappa(P, ns=range(lo, hi + 1), dps=cfg.work_dps)
    gaps = k.gaps()
    lim = k.limit
    ok = bool(0 < abs(lim) < 1 and np.all(np.diff(gaps[:6]) < 0))
    body = {
        "s": k.s,
        "parity": k.parity,
        "kappa": [{"n": n, "kappa": v} for n, v in zip(k.ns, k.values)],
        "gaps": list(gaps),
        "kappa_limit": lim,
        "abs_kappa": abs(lim),
    }
    return body, ok, None


def _tight(cfg, P, f, L=None):
    N = int(cfg.geom("cloud_n"))
    if L is None:
        lo, hi = cfg.geom("scaling_ns")
        L = best_limit(scaling_factor(P, f, range(lo, hi + 1), dps=cfg.work_dps))
    A = L * (julia_cloud(boundary_cloud(P, P.omega, N), P) - P.omega)
    B = julia_cloud(boundary_cloud(f, f.omega2, N), f) - f.omega2
    k0, k1 = cfg.geom("tight_ks")
    rep = tight_similarity_test(A, B, ks=range(k0, k1 + 1), L_hat=L, workers=cfg.workers)
    body = {
        "L_hat": L,
        "R0": rep.R0,
        "beta_AB": rep.ab.beta,
        "r2_AB": rep.ab.r2,
        "beta_BA": rep.ba.beta,
        "r2_BA": rep.ba.r2,
        "beta_hat": rep.beta_hat,
        "degenerate_perfect": rep.degenerate_perfect,
        "notes": list(rep.notes),
    }
    return body, rep.passed, rep.rows()


def _deep(cfg, P, f):
    rmax = float(cfg.geom("deep_rmax"))
    grid = deep_point_grid(
        P, P.omega, rmax, int(cfg.geom("deep_px")), int(cfg.geom("deep_maxiter")), workers=cfg.workers
    )
    radii = [rmax * 2.0 ** -k for k in range(5)]
    rep = deep_point_from_mask(grid.mask(Fate.BOUNDED), grid.viewport, P.omega, radii)
    half = deep_point_from_mask((grid.coords() - P.omega).real > 0, grid.viewport, P.omega, radii)
    body = {
        "slope": rep.slope,
        "beta_hat": rep.beta_hat,
        "fit_residual": rep.residual,
        "half_plane_slope": half.slope,
        "half_plane_passed": half.passed,
        "pixel_size": grid.viewport.pixel_size,
    }
    return body, rep.passed and not half.passed, rep.rows()


def _triangle(cfg, P, f, L=None):
    N = int(cfg.geom("cloud_n"))
    ell = float(cfg.geom("triangle_length"))
    if L is None:
        lo, hi = cfg.geom("scaling_ns")
        L = best_limit(scaling_factor(P, f, range(lo, hi + 1), dps=cfg.work_dps))
    cP = julia_cloud(boundary_cloud(P, P.omega, N), P)
    cf = julia_cloud(boundary_cloud(f, f.omega2, N), f)
    tp = triangle_probe(cP, P.omega, ell, inside=lambda z: classify_points(P, z, 2000)[0] == Fate.BOUNDED)
    tf = triangle_probe(
        cf, f.omega2, abs(L) * ell, inside=lambda z: classify_points(f, z, 2000)[0] == Fate.BOUNDED
    )
    ratio = tf.aperture / tp.aperture if tp.aperture > 0 else math.inf
    ok = tp.aperture > 0 and tf.aperture > 0 and abs(ratio - 1) <= 0.2
    body = {
        "length_P": ell,
        "length_f": abs(L) * ell,
        "aperture_P": tp.aperture,
        "aperture_f": tf.aperture,
        "direction_P": tp.direction,
        "direction_f": tf.direction,
        "ratio": ratio,
    }
    return body, ok, None


CHECK_RUNNERS = {
    "herman": _herman,
    "scaling": _scaling,
    "kappa": _kappa,
    "tight": _tight,
    "deep": _deep,
    "triangle": _triangle,
}


def verify_stage(cfg, a, b, checks):
    """Run the named checks; returns ``{name: (body, passed, table)}``."""
    P = QuadraticSiegel(cfg.rotation)
    f = BlaschkeCubic(a, b)
    out = {}
    for name in checks:
        out[name] = CHECK_RUNNERS[name](cfg, P, f)
    return out


def center_of(spec, P, f):
    s = str(spec).strip().lower()
    if s == "omega":
        return P.omega
    if s in ("omega1", "omega2"):
        return f.critical(int(s[-1]))
    return parse_complex(spec, "center")


def render_view(view, P, f, palette="classic", workers=None):
    g = P if view["map"] == "P" else f
    c = center_of(view.get("center", "0"), P, f)
    vp = render.Viewport.square(c, float(view["width"]), int(view.get("px", 800)))
    grid = render.classify_grid(g, vp, int(view.get("maxiter", 2000)), workers=workers)
    return grid, render.encode_image(grid, view.get("palette", palette))


def run_pipeline(cfg):
    """All stages in order; writes reports, tables, grids and images under ``cfg.out``.

    Returns ``(exit_code, written_paths)`` with code 1 when a check fails.
    """
    out = cfg.out
    os.makedirs(out, exist_ok=True)
    conf = cfg.report_dict()
    written = []

    def put(name, kind, body):
        path = os.path.join(out, name)
        write_report(make_report(kind, body, conf), path)
        written.append(path)

    rot = cfg.rotation
    body, _ = cf_stage(rot, cfg.depth)
    put("01_cf.json", "cf", body)

    tuned = None
    if cfg.b is None:
        body, tuned = find_params_stage(cfg)
        put("02_params.json", "find-params", body)
    a, b = parameters(cfg, tuned)
    body, res = refine_stage(cfg, a, b)
    put("03_refine.json", "refine", body)
    # geometry runs at the circle-tuned map (refined b agrees to the refine tolerance)
    f_b = b
    results = verify_stage(cfg, a, f_b, [c for c in cfg.checks])
    all_ok = True
    summary = {}
    for name, (body, ok, table) in results.items():
        all_ok &= bool(ok)
        summary[name] = ok
        put(f"04_verify_{name}.json", f"verify:{name}", dict(body, passed=ok))
        if table:
            path = os.path.join(out, f"04_verify_{name}.csv")
            write_csv(table, path)
            written.append(path)

    P = QuadraticSiegel(rot)
    f = BlaschkeCubic(a, f_b)
    img_dir = os.path.join(out, "images")
    os.makedirs(img_dir, exist_ok=True)
    for view in cfg.views:
        grid, png = render_view(view, P, f, cfg.palette, cfg.workers)
        ip = os.path.join(img_dir, f"{view['name']}.png")
        gp = os.path.join(img_dir, f"{view['name']}.grid")
        with open(ip, "wb") as fh:
            fh.write(png)
        render.write_grid(grid, gp)
        written += [ip, gp]
    put("05_summary.json", "summary", {"checks": summary, "passed": all_ok, "refined_b": res.b})
    return (0 if all_ok else 1), written
