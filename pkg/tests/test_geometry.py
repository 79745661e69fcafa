import cmath
import math

import numpy as np
import pytest

from herman_lab.cfrac import RotationNumber
from herman_lab.dynamics import QuadraticSiegel, orbit
from herman_lab.geometry import (
    CenterNotInComponentError,
    NotOnLocusError,
    PeriodUnconfirmedError,
    ResolutionError,
    ScaleRangeError,
    boundary_cloud,
    cloud_diameter,
    deep_point_from_mask,
    inner_outer_radius,
    kappa_from_displacements,
    local_inverse,
    scaling_from_orbits,
    self_similar_clouds,
    self_similarity_kappa,
    tight_similarity_test,
    triangle_probe,
)
from herman_lab.dynamics import BlaschkeCubic
from herman_lab.render import Viewport

import synthetic


def grid(width=2.0, px=512, center=0j):
    vp = Viewport.square(center, width, px)
    return vp, vp.pixel_coords()


# --- clouds -----------------------------------------------------------------

def test_cloud_P(P):
    c = boundary_cloud(P, P.omega, 10**4)
    r = np.abs(c.points)
    assert np.isfinite(r).all() and r.min() > 0
    assert c.N == 10**4 and len(c.points) == 10**4 + 1


def test_cloud_moduli_f(f):
    outer = boundary_cloud(f, f.omega2, 10**4).points
    inner = boundary_cloud(f, f.omega1, 10**4).points
    assert np.abs(outer).min() > 1
    assert np.abs(inner).max() < 1


def test_cloud_escape_raises():
    g = BlaschkeCubic(0.2, 3 * cmath.exp(0.4j))
    with pytest.raises(NotOnLocusError):
        boundary_cloud(g, g.omega2, 1000)


def test_cloud_diameter_exact(rng):
    z = rng.standard_normal(3000) + 1j * rng.standard_normal(3000)
    brute = np.abs(z[:, None] - z[None, :]).max()
    assert cloud_diameter(z) == pytest.approx(brute, rel=1e-12)
    line = np.linspace(0, 1, 50_000) * cmath.exp(0.3j)
    assert cloud_diameter(line) == pytest.approx(1.0, rel=1e-12)


# --- tight similarity ---------------------------------------------------------

def test_self_comparison_degenerate():
    A = synthetic.parabola(0.5j)
    rep = tight_similarity_test(A, A, ks=range(3, 9))
    assert rep.degenerate_perfect and rep.passed
    radii = [r.r_outer for r in rep.table]
    assert np.all(np.diff(radii) < 0)


def test_rotated_clone_fails():
    beta, passed = synthetic.rotated_clone_beta(0.3)
    assert beta <= 0.01 and not passed
    A = synthetic.parabola(0.5j)
    rep = tight_similarity_test(A, A * cmath.exp(0.3j), ks=range(3, 9))
    assert not rep.passed


def test_scale_range_error():
    A = synthetic.parabola(0.5j)
    with pytest.raises(ScaleRangeError) as exc:
        tight_similarity_test(A, A, ks=range(3, 40))
    assert exc.value.usable


def test_report_rows_have_both_directions():
    A, B = synthetic.parabola(0.5j), synthetic.parabola(-0.3 + 0.4j)
    rep = tight_similarity_test(A, B, ks=range(3, 9))
    rows = rep.rows()
    assert len(rows) == 6 and {"m_AB", "m_BA"} <= set(rows[0])


# --- scaling and kappa -----------------------------------------------------------

def test_synthetic_scaling_exact(P, golden):
    qs = golden.denominators()[5:15]
    o = orbit(P, P.omega, qs[-1])
    L = -3.7 + 3.3j
    w2 = 4.2 - 0.1j
    Ls = scaling_from_orbits(w2 + L * (o - P.omega), w2, o, P.omega, qs)
    assert np.max(np.abs(Ls - L)) < 1e-12


def test_synthetic_kappa_constant():
    kappa = 0.3 - 0.5j
    d0 = 0.2 + 0.1j
    deltas = [d0]
    for _ in range(10):
        deltas.append(kappa * np.conj(deltas[-1]))
    ks = kappa_from_displacements(deltas, 1)
    assert np.max(np.abs(ks - kappa)) < 1e-14


def test_kappa_golden_and_silver(P, silver):
    k = self_similarity_kappa(P)
    assert k.anticonformal and k.parity == "anticonformal"
    assert np.all((np.abs(k.values) > 0) & (np.abs(k.values) < 1))
    ks = self_similarity_kappa(QuadraticSiegel(silver))
    assert ks.anticonformal
    assert 0 < abs(ks.limit) < 1


def test_kappa_refuses_unconfirmed_period():
    rot = RotationNumber.from_value(math.pi - 3, depth=20)
    with pytest.raises(PeriodUnconfirmedError):
        self_similarity_kappa(QuadraticSiegel(rot))
    with pytest.raises(PeriodUnconfirmedError):
        self_similarity_kappa(QuadraticSiegel(RotationNumber.from_period([], [1, 2])), s=3)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["golden", "silver"])
def test_siegel_boundary_self_similar(name):
    P = QuadraticSiegel(getattr(RotationNumber, name)())
    # closest returns stay far above double rounding at this depth
    kappa = self_similarity_kappa(P, ns=range(6, 18), dps=0).limit
    shifted, image = self_similar_clouds(P, kappa, 1, 10**6)
    rep = tight_similarity_test(shifted, image)
    assert rep.passed, (rep.ab, rep.ba)


@pytest.mark.slow
def test_preimage_points(P, f, L_hat, cloud_P, cloud_f):
    wp = next(z for z in P.preimages(P.omega) if abs(z - P.omega) > 1e-9)
    us = [u for u in f.preimages(f.omega2) if abs(u - f.omega2) > 1e-6]
    assert len(us) == 2 or len(us) == 3
    sel = np.abs(cloud_P.points - P.omega) < 0.5
    Jp = local_inverse(P, cloud_P.points[sel], P.omega, wp)
    for u in us:
        assert abs(f(u) - f.omega2) < 1e-10
        Jf = local_inverse(f, cloud_f.points[sel], f.omega2, u)
        Lp = L_hat * P.derivative(wp) / f.derivative(u)
        ok = np.isfinite(Jp) & np.isfinite(Jf)
        rep = tight_similarity_test(Lp * (Jp[ok] - wp), Jf[ok] - u)
        assert rep.passed, (u, rep.ab, rep.ba)


# --- deep point ----------------------------------------------------------------

def test_full_plane_degenerate():
    vp, z = grid()
    rep = deep_point_from_mask(np.ones(z.shape, bool), vp, 0j, [0.5, 0.25, 0.125])
    assert rep.degenerate and rep.passed
    assert all(a == 0 for a in rep.areas)


def test_half_plane_fails():
    vp, z = grid(px=2048)
    radii = [0.8 * 2.0 ** -k for k in range(5)]
    rep = deep_point_from_mask(z.real > 0, vp, 0j, radii)
    assert abs(rep.slope - 2) < 0.05 and not rep.passed
    for r, a in zip(rep.radii, rep.areas):
        assert a == pytest.approx(math.pi * r * r / 2, rel=0.05)
    assert np.all(np.diff(rep.areas) >= 0)


def test_cusp_is_deep():
    # complement of a cusp |y| < x^2: excluded area ~ r^3
    vp, z = grid(px=2048)
    radii = [0.8 * 2.0 ** -k for k in range(5)]
    rep = deep_point_from_mask(~((z.real > 0) & (np.abs(z.imag) < z.real ** 2)), vp, 0j, radii)
    assert rep.slope == pytest.approx(3, abs=0.1) and rep.passed


def test_resolution_error():
    vp, z = grid(px=64)
    with pytest.raises(ResolutionError) as exc:
        deep_point_from_mask(z.real > 0, vp, 0j, [0.5, 0.01])
    assert exc.value.required == pytest.approx(0.01 / 8)


def test_inner_outer_disk_and_ellipse():
    vp, z = grid(width=5.0, px=600)
    r_in, r_out = inner_outer_radius(np.abs(z) < 1, vp, 0j)
    assert r_in == pytest.approx(1, abs=0.02) and r_out == pytest.approx(1, abs=0.02)
    r_in, r_out = inner_outer_radius((z.real / 2) ** 2 + z.imag ** 2 < 1, vp, 0j)
    assert r_in == pytest.approx(1, abs=0.02) and r_out == pytest.approx(2, abs=0.02)
    with pytest.raises(CenterNotInComponentError):
        inner_outer_radius(np.abs(z) < 1, vp, 1.5 + 0j)


# --- triangle probe -------------------------------------------------------------------

def test_triangle_circle():
    pts = 1 + np.exp(2j * math.pi * np.arange(20_000) / 20_000)
    rep = triangle_probe(pts, 0j, 0.2)
    assert rep.aperture == pytest.approx(math.pi, abs=0.02)


def test_triangle_two_rays():
    phi0 = math.radians(70)
    t = np.linspace(0, 1, 5000)
    pts = np.concatenate([t, t * cmath.exp(1j * phi0)])

    def inside(z):
        ang = np.angle(z)
        return (ang > 0) & (ang < phi0)

    rep = triangle_probe(pts, 0j, 0.5, inside=inside)
    assert rep.aperture == pytest.approx(phi0, abs=math.radians(1))
    assert rep.direction == pytest.approx(phi0 / 2, abs=math.radians(1.5))


def test_triangle_blocked_is_zero():
    # a dense point disk around the vertex leaves no room
    r = np.sqrt(np.linspace(0, 1, 200_000))
    a = np.linspace(0, 2000 * math.pi, 200_000)
    rep = triangle_probe(r * np.exp(1j * a), 0j, 0.5)
    assert rep.aperture < 0.05
