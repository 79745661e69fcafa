"""JSON reports with every number written as a decimal string."""

import json
import math
from importlib import metadata

import mpmath
import numpy as np

# doubles are written as their shortest round-trip decimal; mpmath numbers with MP_DIGITS
MP_DIGITS = 30


def version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
        return "0+unknown"


def num(x, digits=MP_DIGITS):
    """Decimal string for a real; ``"inf"``/``"nan"`` for the specials."""
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, digits, strip_zeros=False)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def encode(obj, digits=MP_DIGITS):
    """Recursively replace floats (and complex, numpy scalars, mpmath numbers) by strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, mpmath.mpf)):
        return num(obj, digits)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": num(obj.real, digits), "im": num(obj.imag, digits)}
    if isinstance(obj, mpmath.mpc):
        return {"re": num(obj.real, digits), "im": num(obj.imag, digits)}
    if isinstance(obj, np.ndarray):
        return [encode(v, digits) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): encode(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v, digits) for v in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def make_report(kind, body, config=None, digits=MP_DIGITS):
    rep = {
        "kind": kind,
        "version": version(),
        "numbers": {
            "encoding": "decimal-string",
            "double": "shortest round-trip",
            "extended_significant_digits": digits,
        },
        "result": encode(body, digits),
    }
    if config is not None:
        rep["config"] = encode(config, digits)
    return rep


def dumps(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report))


def write_csv(rows, path, digits=MP_DIGITS):
    """Plain CSV of homogeneous dict rows (numbers as decimal strings)."""
    import csv

    rows = list(rows)
    if not rows:
        open(path, "w").close()
        return
    keys = list(rows[0])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([_cell(r[k], digits) for k in keys])


def _cell(v, digits):
    e = encode(v, digits)
    if isinstance(e, dict):
        return f"{e['re']}{'' if e['im'].startswith('-') else '+'}{e['im']}j"
    return e
