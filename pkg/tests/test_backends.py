import json
import os
import subprocess
import sys

import numpy as np
import pytest

from herman_lab import kernels
from herman_lab._accel import BACKEND, HAVE_NUMBA, resolve

SCRIPT = """
import json, numpy as np
from herman_lab import BACKEND, kernels
from herman_lab.cfrac import RotationNumber
from herman_lab.dynamics import QuadraticSiegel, classify_points
P = QuadraticSiegel(RotationNumber.golden())
pts = (np.linspace(-1.5, 1.0, 40)[:, None] + 1j * np.linspace(-1, 1, 40)[None, :]).ravel()
tags, iters = classify_points(P, pts, 300)
rho = float(kernels.slice_rotation(0.2, np.array([0.3]), 0.0, 5000)[0])
print(json.dumps({"backend": BACKEND, "tags": tags.tolist(), "iters": iters.tolist(), "rho": rho}))
"""


def run_child(flag):
    env = dict(os.environ)
    env.pop("HERMAN_LAB_NO_NUMBA", None)
    if flag is not None:
        env["HERMAN_LAB_NO_NUMBA"] = flag
    proc = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def test_flag_selects_numpy():
    out = run_child("1")
    assert out["backend"] == "numpy"


@pytest.mark.skipif(not HAVE_NUMBA, reason="needs numba")
def test_default_is_numba_and_matches_numpy():
    fast, slow = run_child(None), run_child("1")
    assert fast["backend"] == "numba"
    assert fast["tags"] == slow["tags"] and fast["iters"] == slow["iters"]
    assert abs(fast["rho"] - slow["rho"]) < 1e-12


def test_resolve():
    assert resolve() == BACKEND
    assert resolve("numpy") == "numpy"
    with pytest.raises(ValueError):
        resolve("cuda")


@pytest.mark.skipif(not HAVE_NUMBA, reason="needs numba")
def test_rotation_kernels_agree():
    ts = np.linspace(0, 1, 7, endpoint=False)
    a = kernels.slice_rotation(0.2, ts, 0.0, 4000, backend="numba")
    b = kernels.slice_rotation(0.2, ts, 0.0, 4000, backend="numpy")
    assert np.max(np.abs(a - b)) < 1e-12
    z0 = 1.0 + 0j
    a = kernels.angular_rotation(0.2, 1j, z0, 4000, backend="numba")
    b = kernels.angular_rotation(0.2, 1j, z0, 4000, backend="numpy")
    assert abs(a - b) < 1e-12


def test_benchmark_script_runs():
    bench = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    proc = subprocess.run(
        [sys.executable, bench, "--quick", "--repeat", "1"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0, proc.stderr
    assert "speedup" in proc.stdout.lower()
