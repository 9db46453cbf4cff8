"""Axisymmetric support-function backend: curvature oracles and invariants."""
import math

import numpy as np
import pytest

from widthflow.errors import CentroidOutside, ConvexityLost
from widthflow.geom import (
    AxiSurface,
    curvatures_axi,
    inradius_axi,
    pinching_ratio,
    principal_radii,
    read_axi_csv,
    volume_and_centroid_z,
    write_axi_csv,
)
from widthflow.speed import make_speed


def spheroid_support(theta, a, c):
    return np.sqrt(a**2 * np.sin(theta) ** 2 + c**2 * np.cos(theta) ** 2)


def spheroid_radii_exact(theta, a, c):
    """Principal radii of the (a, a, c) spheroid at support angle theta.

    Derived from the support function h = sqrt(a^2 sin^2 + c^2 cos^2):
    meridional radius h'' + h collapses to a^2 c^2 / h^3 and the azimuthal
    radius h' cot(theta) + h to a^2 / h.
    """
    h = spheroid_support(theta, a, c)
    return (a * c) ** 2 / h**3, a**2 / h


def test_spheroid_radii_formula_against_finite_differences():
    # Independent check of the closed forms above: differentiate the support
    # function numerically with a step far smaller than any grid used below.
    a, c = 1.0, 2.0
    eps = 1e-4  # second difference loses ~1e-16/eps^2 to roundoff
    for theta in (0.3, 0.9, np.pi / 2, 2.2, 2.9):
        h0 = spheroid_support(theta, a, c)
        hp = spheroid_support(theta + eps, a, c)
        hm = spheroid_support(theta - eps, a, c)
        d1 = (hp - hm) / (2 * eps)
        d2 = (hp - 2 * h0 + hm) / eps**2
        r1_fd = d2 + h0
        r2_fd = d1 / np.tan(theta) + h0
        r1_cf, r2_cf = spheroid_radii_exact(np.array([theta]), a, c)
        assert r1_fd == pytest.approx(r1_cf[0], rel=1e-6)
        assert r2_fd == pytest.approx(r2_cf[0], rel=1e-6)


def test_sphere_radii_exact():
    s = AxiSurface.sphere(2.0, 64)
    r1, r2 = principal_radii(s)
    # Uniform h makes the difference stencils vanish identically.
    assert np.all(r1 == 2.0)
    assert np.all(r2 == 2.0)
    field = curvatures_axi(s)
    assert np.all(field.lam1 == 0.5)
    assert np.all(field.lam2 == 0.5)


def test_spheroid_radii_match_oracle():
    a, c = 1.0, 2.0
    s = AxiSurface.spheroid(a, c, 256)
    r1, r2 = principal_radii(s)
    r1x, r2x = spheroid_radii_exact(s.theta, a, c)
    assert np.abs(r1[1:-1] / r1x - 1).max() < 1e-3
    assert np.abs(r2[1:-1] / r2x - 1).max() < 1e-3
    # Poles of the (1,1,2) spheroid have radius a^2/c = 1/2.
    assert r1[0] == pytest.approx(0.5, rel=1e-3)
    assert r1[-1] == pytest.approx(0.5, rel=1e-3)


def test_spheroid_convergence_order():
    a, c = 1.0, 2.0
    errs = []
    for n in (64, 128, 256):
        s = AxiSurface.spheroid(a, c, n)
        r1, r2 = principal_radii(s)
        r1x, r2x = spheroid_radii_exact(s.theta, a, c)
        errs.append(max(np.abs(r1[1:-1] / r1x - 1).max(), np.abs(r2[1:-1] / r2x - 1).max()))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) > 1.8


def test_nonconvex_support_raises():
    n = 96
    theta = np.pi * np.arange(n + 1) / n
    h = 1.0 + 0.2 * np.cos(6 * theta)
    s = AxiSurface.from_full(h)
    with pytest.raises(ConvexityLost):
        curvatures_axi(s)


def test_translated_sphere_inradius_and_centroid():
    s = AxiSurface.sphere(1.0, 128).translated(0.3)
    vol, zbar = volume_and_centroid_z(s)
    assert vol == pytest.approx(4 * np.pi / 3, rel=1e-4)
    assert zbar == pytest.approx(0.3, abs=1e-4)
    assert inradius_axi(s) == pytest.approx(1.0, rel=1e-4)


def test_spheroid_inradius_is_short_semiaxis():
    s = AxiSurface.spheroid(1.0, 2.0, 256)
    assert inradius_axi(s) == pytest.approx(1.0, rel=1e-4)


def test_pinching_ratio_arithmetic_is_one():
    s = AxiSurface.spheroid(1.0, 2.0, 128)
    field = curvatures_axi(s)
    assert pinching_ratio(field, make_speed("arithmetic-mean")) == 1.0


def test_pinching_ratio_geometric_spheroid():
    # Brute-force oracle: max of (l1+l2)/(2 sqrt(l1 l2)) over the analytic
    # curvature formulas.  For semi-axes (1,1,2) the max sits at the equator
    # where the pair is (1/4, 1), giving (1/4 + 1)/(2 * 1/2) = 1.25.
    th = np.linspace(1e-4, np.pi - 1e-4, 20001)
    r1x, r2x = spheroid_radii_exact(th, 1.0, 2.0)
    l1x, l2x = 1 / r1x, 1 / r2x
    oracle = np.max((l1x + l2x) / (2 * np.sqrt(l1x * l2x)))
    assert oracle == pytest.approx(1.25, abs=1e-6)

    s = AxiSurface.spheroid(1.0, 2.0, 256)
    field = curvatures_axi(s)
    c0 = pinching_ratio(field, make_speed("geometric-mean"))
    assert c0 == pytest.approx(oracle, rel=1e-3)
    assert c0 >= 1.0


def test_csv_roundtrip(tmp_path):
    s = AxiSurface.spheroid(1.0, 2.0, 64)
    path = tmp_path / "surf.csv"
    write_axi_csv(s, path)
    back = read_axi_csv(path)
    assert np.array_equal(back.full_theta(), s.full_theta())
    assert np.array_equal(back.full_h(), s.full_h())


def test_grid_validation_errors():
    with pytest.raises(ValueError):
        AxiSurface.from_full(np.ones(3))  # too few nodes
    theta_bad = np.array([0.0, 0.2, 0.9, 2.0, np.pi])
    with pytest.raises(ValueError):
        AxiSurface(theta=theta_bad[1:-1], h=np.ones(3), pole_north=1.0, pole_south=1.0)
    with pytest.raises(ValueError):
        AxiSurface.from_full(np.array([1.0, 1.0, -0.5, 1.0, 1.0]))
