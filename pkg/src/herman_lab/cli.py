"""``herman-lab`` command line.

Exit codes: 0 success, 1 a check or stage failed, 2 bad usage or config.
Errors are printed to stdout as ``{"error": {...}}``.
"""

import argparse
import json
import os
import sys

from . import render, workflow
from .config import CHECKS, ConfigError, load_config
from .dynamics import BlaschkeCubic, QuadraticSiegel
from .reports import dumps, make_report, write_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _error(kind, message, field=None, stage=None):
    err = {"type": kind, "message": str(message)}
    if field is not None:
        err["field"] = field
    if stage is not None:
        err["stage"] = stage
    sys.stdout.write(json.dumps({"error": err}, sort_keys=True) + "\n")


def _common(p, theta=True, params=False):
    p.add_argument("--config", help="YAML run configuration")
    if theta:
        p.add_argument("--theta", help="golden, silver, a decimal, or cf:PRE;PERIOD")
    if params:
        p.add_argument("--a", type=float, help="slice parameter in (0, 1/3)")
        p.add_argument("--b", help="complex b (x+yj) or t=<turns>; tuned when omitted")
        p.add_argument("--precision", choices=["auto", "double", "extended"])
        p.add_argument("--iterates", type=int, dest="rotation_iterates", help="rotation-number iterates")
    p.add_argument("--workers", type=int, help="worker threads (default HERMAN_LAB_WORKERS or 1)")


def build_parser():
    ap = _Parser(prog="herman-lab", description="Herman rings versus Siegel disks: search and checks")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("cf", help="continued fraction of theta")
    _common(p)
    p.add_argument("--depth", type=int)

    p = sub.add_parser("find-params", help="tune b on the symmetric slice")
    _common(p, params=True)

    p = sub.add_parser("refine", help="secant refinement of b on the ratio residual")
    _common(p, params=True)
    p.add_argument("--n", type=int, help="deepest convergent level")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("verify", help="Herman-ring and geometry checks")
    _common(p, params=True)
    p.add_argument("--check", action="append", choices=CHECKS, help="repeatable; default herman")
    p.add_argument("--csv", help="directory for per-scale CSV tables")
    p.add_argument("--cloud-n", type=int, help="orbit points per boundary cloud")
    p.add_argument("--deep-px", type=int, help="deep-point grid size")

    p = sub.add_parser("render", help="classify a viewport and write a PNG")
    _common(p, params=True)
    p.add_argument("--map", choices=["P", "f"], default="P")
    p.add_argument("--center", default="0", help="complex, omega, omega1 or omega2")
    p.add_argument("--width", type=float, default=3.0)
    p.add_argument("--px", type=int, default=800)
    p.add_argument("--maxiter", type=int, default=2000)
    p.add_argument("--palette", choices=sorted(render.PALETTES))
    p.add_argument("--supersample", type=int, default=1)
    p.add_argument("--out", required=True, help="PNG path")
    p.add_argument("--dump", help="raw grid dump path")

    p = sub.add_parser("pipeline", help="cf, find-params, refine, verify and render in one go")
    _common(p, params=True)
    p.add_argument("--out", help="output directory")
    return ap


def _overrides(ns):
    keys = ("theta", "a", "b", "precision", "rotation_iterates", "workers", "depth", "n", "tol", "palette")
    out = {k: getattr(ns, k) for k in keys if getattr(ns, k, None) is not None}
    if getattr(ns, "command", None) == "pipeline" and ns.out is not None:
        out["out"] = ns.out
    geo = {}
    if getattr(ns, "cloud_n", None) is not None:
        geo["cloud_n"] = ns.cloud_n
    if getattr(ns, "deep_px", None) is not None:
        geo["deep_px"] = ns.deep_px
    if geo:
        out["geometry"] = geo
    return out


def _emit(report):
    sys.stdout.write(dumps(report))


def _cmd_cf(cfg, ns):
    depth = ns.depth if ns.depth is not None else cfg.depth
    if depth < 1:
        raise ConfigError("depth", "must be positive")
    body, _ = workflow.cf_stage(cfg.rotation, depth)
    _emit(make_report("cf", body, cfg.report_dict()))
    return EXIT_OK


def _cmd_find(cfg, ns):
    body, _ = workflow.find_params_stage(cfg)
    _emit(make_report("find-params", body, cfg.report_dict()))
    return EXIT_OK


def _cmd_refine(cfg, ns):
    a, b = workflow.parameters(cfg)
    body, _ = workflow.refine_stage(cfg, a, b)
    _emit(make_report("refine", body, cfg.report_dict()))
    return EXIT_OK


def _cmd_verify(cfg, ns):
    a, b = workflow.parameters(cfg)
    checks = ns.check or ["herman"]
    results = workflow.verify_stage(cfg, a, b, checks)
    body = {}
    ok = True
    for name, (res, passed, table) in results.items():
        body[name] = dict(res, passed=passed)
        ok &= bool(passed)
        if table and ns.csv:
            os.makedirs(ns.csv, exist_ok=True)
            write_csv(table, os.path.join(ns.csv, f"{name}.csv"))
    body["passed"] = ok
    _emit(make_report("verify", body, cfg.report_dict()))
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_render(cfg, ns):
    P = QuadraticSiegel(cfg.rotation)
    if ns.map == "f" or str(ns.center).lower() in ("omega1", "omega2"):
        a, b = workflow.parameters(cfg)
        f = BlaschkeCubic(a, b)
    else:
        f = None
    g = P if ns.map == "P" else f
    c = workflow.center_of(ns.center, P, f)
    vp = render.Viewport.square(c, ns.width, ns.px)
    grid, png = render.render_image(g, vp, ns.maxiter, ns.palette or cfg.palette, ns.supersample, cfg.workers)
    with open(ns.out, "wb") as fh:
        fh.write(png)
    if ns.dump:
        render.write_grid(grid, ns.dump)
    body = {"map_id": grid.map_id, "image": ns.out, "grid": ns.dump, "fractions": grid.fractions()}
    _emit(make_report("render", body, cfg.report_dict()))
    return EXIT_OK


def _cmd_pipeline(cfg, ns):
    code, written = workflow.run_pipeline(cfg)
    sys.stdout.write(json.dumps({"exit": code, "written": written}, sort_keys=True) + "\n")
    return code


COMMANDS = {
    "cf": _cmd_cf,
    "find-params": _cmd_find,
    "refine": _cmd_refine,
    "verify": _cmd_verify,
    "render": _cmd_render,
    "pipeline": _cmd_pipeline,
}


def main(argv=None):
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required")
        cfg = load_config(ns.config, _overrides(ns))
        return COMMANDS[ns.command](cfg, ns)
    except UsageError as exc:
        _error("usage", exc, exc.field)
        return EXIT_USAGE
    except ConfigError as exc:
        _error("config", exc, exc.field)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _error("config", exc, "config")
        return EXIT_USAGE
    except workflow.StageFailed as exc:
        _error("stage", exc, stage=exc.stage)
        return EXIT_FAIL
    except Exception as exc:  # any numerical failure is a failed stage, not a crash
        _error(type(exc).__name__, exc, stage=getattr(ns, "command", None))
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
