import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import lpmv

from rellich.errors import InvalidInput, NoRootError
from rellich.geometry import ConeGeometry
from rellich.spectrum import (
    ModeOperator,
    SturmLiouvilleGrid,
    arc_spectrum,
    cap_spectrum_numeric,
    find_theta_star,
    first_eigenvalue,
    full_sphere_spectrum,
    geometry_spectrum,
    half_sphere_spectrum,
    harmonic_count,
)


def legendre_eigenvalue(theta, m=0, j=1):
    """j-th nu(nu+1) with P_nu^m(cos theta) = 0, scanning nu upward."""
    x = math.cos(theta)
    f = lambda nu: lpmv(m, nu, x)
    roots, nu, step = [], m + 1e-9, 0.01
    while len(roots) < j:
        if f(nu) * f(nu + step) < 0:
            roots.append(brentq(f, nu, nu + step, xtol=1e-14))
        nu += step
    r = roots[-1]
    return r * (r + 1)


def shooting_eigenvalue(theta, guess_lo, guess_hi):
    """Lowest l = 0 eigenvalue on the n = 3 cap by shooting from the pole."""

    def end_value(lam):
        eps = 1e-6
        y0 = [1 - lam * eps**2 / 4, -lam * eps / 2]
        rhs = lambda p, y: [y[1], -math.cos(p) / math.sin(p) * y[1] - lam * y[0]]
        sol = solve_ivp(rhs, (eps, theta), y0, rtol=1e-12, atol=1e-14)
        return sol.y[0, -1]

    return brentq(end_value, guess_lo, guess_hi, xtol=1e-13)


def test_harmonic_counts():
    assert [harmonic_count(3, k) for k in range(4)] == [1, 3, 5, 7]
    assert [harmonic_count(2, k) for k in range(4)] == [1, 2, 2, 2]
    assert harmonic_count(4, 2) == 9


def test_full_sphere_examples():
    s = full_sphere_spectrum(3, 3)
    assert list(s.values) == [0, 2, 6]
    assert [e.multiplicity for e in s] == [1, 3, 5]
    assert list(full_sphere_spectrum(2, 3).values) == [0, 1, 4]
    assert list(full_sphere_spectrum(4, 2).values) == [0, 3]


def test_half_sphere_examples():
    assert list(half_sphere_spectrum(3, 3).values) == [2, 6, 12]
    assert list(half_sphere_spectrum(2, 2).values) == [1, 4]
    assert list(half_sphere_spectrum(5, 1).values) == [4]
    # odd harmonics in the last variable: 1, 2, 3 for n = 3
    assert [e.multiplicity for e in half_sphere_spectrum(3, 3)] == [1, 2, 3]


def test_arc_examples():
    assert list(arc_spectrum(math.pi / 2, 2).values) == [1, 4]
    assert list(arc_spectrum(math.pi, 2).values) == [0.25, 1]
    assert list(arc_spectrum(math.pi / 4, 1).values) == [4]
    assert list(arc_spectrum(math.pi / 2, 7).values) == list(half_sphere_spectrum(2, 7).values)
    with pytest.raises(InvalidInput):
        arc_spectrum(0.0, 2)


@pytest.mark.parametrize("n", range(2, 7))
def test_half_sphere_inside_full_sphere(n):
    full = set(full_sphere_spectrum(n, 20).values)
    assert all(v in full and v > 0 for v in half_sphere_spectrum(n, 12).values)


def test_hemisphere_numeric_lowest_three():
    s = cap_spectrum_numeric(3, math.pi / 2, 2, 2, SturmLiouvilleGrid(4000))
    low = s.values[:3]
    assert np.all(np.abs(low - [2, 6, 12]) / [2, 6, 12] < 1e-3)
    assert [(e.ell, e.j) for e in s.entries[:2]] == [(0, 1), (1, 1)]
    # 12 is shared by (l, j) = (0, 2) and (2, 1)
    assert {(e.ell, e.j) for e in s.entries[2:4]} == {(0, 2), (2, 1)}
    assert s.entries[1].multiplicity == 2


@pytest.mark.parametrize("n", [3, 4, 5])
def test_hemisphere_consistency_and_refinement(n):
    exact = half_sphere_spectrum(n, 3).values
    errs = []
    for nodes in (1000, 2000, 4000):
        s = cap_spectrum_numeric(n, math.pi / 2, 3, 3, SturmLiouvilleGrid(nodes))
        errs.append(np.max(np.abs(s.values[:3] - exact) / exact))
    assert errs[-1] < 1e-3
    assert errs[0] / errs[1] >= 3 and errs[1] / errs[2] >= 3


def test_legendre_oracle_cap():
    theta = 2.0
    s = cap_spectrum_numeric(3, theta, 1, 2, SturmLiouvilleGrid(4000))
    by_mode = {(e.ell, e.j): e.value for e in s}
    for (ell, j), v in by_mode.items():
        assert v == pytest.approx(legendre_eigenvalue(theta, ell, j), rel=2e-6)


def test_shooting_oracle_cap():
    lam = first_eigenvalue(ConeGeometry.cap(3, 2.0), SturmLiouvilleGrid(2000))
    assert lam == pytest.approx(shooting_eigenvalue(2.0, 0.5, 1.5), rel=1e-5)


def test_four_dimensional_radial_modes_closed_form():
    # u = sin(k phi) / sin(phi) gives lam = (j pi / theta)^2 - 1
    theta = 1.3
    op = ModeOperator(4, theta, 0, SturmLiouvilleGrid(4000))
    lam = op.eigenvalues(3)
    exact = [(j * math.pi / theta) ** 2 - 1 for j in (1, 2, 3)]
    assert lam == pytest.approx(exact, rel=1e-5)


def test_domain_monotonicity():
    grid = SturmLiouvilleGrid(1000)
    for n in (3, 4):
        prev = None
        for theta in (0.5, 1.0, 1.5, 2.0):
            vals = {(e.ell, e.j): e.value for e in cap_spectrum_numeric(n, theta, 2, 2, grid)}
            if prev is not None:
                assert all(vals[k] < prev[k] for k in vals)
            prev = vals


def test_first_eigenvalue_vanishes_near_full_sphere():
    grid = SturmLiouvilleGrid(2000)
    lams = [first_eigenvalue(ConeGeometry.cap(4, t), grid) for t in (2.5, 3.0, 3.1, 3.14)]
    assert all(x > 0 for x in lams)
    assert all(b < a for a, b in zip(lams, lams[1:]))
    assert lams[-1] < 1e-2


def test_first_eigenvalue_examples():
    assert first_eigenvalue(ConeGeometry.cap(3, math.pi / 2)) == pytest.approx(2, rel=1e-6)
    assert first_eigenvalue(ConeGeometry.arc(math.pi / 2)) == 1
    assert first_eigenvalue(ConeGeometry.full_sphere(5)) == 0
    assert first_eigenvalue(ConeGeometry.half_sphere(4)) == 3


def test_spectrum_sorted_and_bound_complete():
    s = cap_spectrum_numeric(3, 1.2, 4, 3, SturmLiouvilleGrid(500))
    assert np.all(np.diff(s.values) >= 0)
    wide = cap_spectrum_numeric(3, 1.2, 10, 8, SturmLiouvilleGrid(500))
    cut = s.bound * (1 - 1e-9)
    below = wide.values[wide.values < cut]
    assert np.allclose(np.sort(below), s.values[s.values < cut])


def test_grid_validation():
    with pytest.raises(InvalidInput):
        SturmLiouvilleGrid(15)
    with pytest.raises(InvalidInput):
        cap_spectrum_numeric(2, 1.0)
    with pytest.raises(InvalidInput):
        cap_spectrum_numeric(3, 3.5)


def test_theta_star_matches_legendre_zero():
    oracle = brentq(lambda t: lpmv(0, 0.5, math.cos(t)), 1.6, 3.1, xtol=1e-15)
    t4 = find_theta_star(3, 0.75, SturmLiouvilleGrid(4000))
    t8 = find_theta_star(3, 0.75, SturmLiouvilleGrid(8000))
    assert math.pi / 2 < t4 < math.pi
    assert abs(t4 - t8) < 1e-3
    assert t8 == pytest.approx(oracle, abs=1e-5)


def test_theta_star_hemisphere():
    assert find_theta_star(3, 2.0) == pytest.approx(math.pi / 2, abs=1e-5)


def test_theta_star_out_of_window():
    with pytest.raises(NoRootError):
        find_theta_star(3, 1e6)
    with pytest.raises(NoRootError):
        find_theta_star(3, 1e-9)


def test_geometry_spectrum_dispatch():
    assert list(geometry_spectrum(ConeGeometry.arc(1.0), 2).values) == pytest.approx(
        [(math.pi / 2) ** 2, math.pi**2]
    )
    assert geometry_spectrum(ConeGeometry.full_sphere(3), 2).values[0] == 0
