import math

import numpy as np
import pytest
from scipy.optimize import brentq

from rellich.constants import gamma, gamma_bar, mu_halfspace_navier
from rellich.emden_fowler import Bump, SeparableConeFunction, builtin_family, energy_breakdown
from rellich.errors import DegenerateInput, InvalidInput, NumericalFailure
from rellich.geometry import ConeGeometry
from rellich.quotients import (
    MinimizingSequenceParams,
    ModeProblem1D,
    best_mode,
    clamped_angular_factor,
    m_dirichlet_discrete,
    m_navier,
    m_navier_discrete,
    minimizing_sequence_quotient,
    mode_quotient_infimum,
    scaled_mass,
    scaling_monotonicity_check,
    strictly_greater,
)
from rellich.spectrum import arc_spectrum, half_sphere_spectrum


def clamped_arc_oracle(half_length):
    """Lowest mu of (D^2 + 1)^2 phi = mu phi, phi = phi' = 0 at +-L, even branch."""
    L = half_length

    def f(mu):
        a, b = math.sqrt(1 + math.sqrt(mu)), math.sqrt(math.sqrt(mu) - 1)
        return math.cos(a * L) * b * math.sinh(b * L) + a * math.sin(a * L) * math.cosh(b * L)

    return brentq(f, 1.0 + 1e-9, 30.0, xtol=1e-14)


def test_navier_spectral_distance():
    d = m_navier(half_sphere_spectrum(3, 4), gamma(3, 0))
    assert d.value == pytest.approx(25 / 16) and d.eigenvalue == 2


def test_navier_discrete_hemisphere():
    r = m_navier_discrete(ConeGeometry.half_sphere(3), gamma(3, 0))
    assert r.value == pytest.approx(25 / 16, rel=1e-3)
    assert r.mode == 0 and len(r.trail) == 3
    errs = [abs(v - 25 / 16) for v in r.trail]
    assert errs[0] > errs[1] > errs[2]


def test_navier_discrete_arc():
    r = m_navier_discrete(ConeGeometry.arc(1.0), -1.0)
    assert r.value == pytest.approx(((math.pi / 2) ** 2 - 1) ** 2, rel=1e-6)


def test_navier_discrete_needs_enough_modes():
    with pytest.raises(InvalidInput):
        m_navier_discrete(ConeGeometry.half_sphere(3), -200.0, nodes=500, ell_max=2)
    with pytest.raises(InvalidInput):
        m_navier_discrete(ConeGeometry.full_sphere(3), 0.0)


def test_dirichlet_arc_against_transcendental_oracle():
    r = m_dirichlet_discrete(ConeGeometry.arc(math.pi / 2), -1.0)
    exact = clamped_arc_oracle(math.pi / 2)
    assert r.value > 0.36
    assert r.value == pytest.approx(exact, rel=1e-5)
    errs = [exact - v for v in r.trail]
    assert all(e > 0 for e in errs) and errs[0] > errs[1] > errs[2]


def test_dirichlet_strictly_above_navier():
    for geo, g in [(ConeGeometry.arc(math.pi / 2), -1.0), (ConeGeometry.cap(3, 1.2), gamma(3, 0))]:
        d = m_dirichlet_discrete(geo, g, nodes=1000).value
        nv = m_navier_discrete(geo, g, nodes=1000).value
        assert strictly_greater(d, nv)


def test_dirichlet_arc_bounded_by_first_eigenvalue():
    lam1 = arc_spectrum(1.0, 1).values[0]
    assert m_dirichlet_discrete(ConeGeometry.arc(1.0), 0.0).value >= lam1**2


def test_dirichlet_requires_proper_domain():
    with pytest.raises(InvalidInput):
        m_dirichlet_discrete(ConeGeometry.arc(math.pi), -1.0)
    with pytest.raises(InvalidInput):
        m_dirichlet_discrete(ConeGeometry.arc(1.0), 0.0, nodes=32)


def test_clamped_factor_consistent():
    f = clamped_angular_factor(ConeGeometry.arc(math.pi / 2), -1.0, nodes=1000)
    assert f.l_energy == pytest.approx(f.mu, rel=1e-9)
    assert f.grad > 0


@pytest.mark.parametrize("lam, n, alpha", [(0.0, 3, 0.0), (2.0, 3, 0.0), (1.0, 2, 1.0)])
def test_mode_quotient_lower_bound_and_trail(lam, n, alpha):
    g, gb = gamma(n, alpha), gamma_bar(n, alpha)
    r = mode_quotient_infimum(ModeProblem1D(lam, g, gb, S=20, nodes=2000))
    floor = (lam + g) ** 2
    assert all(v >= floor - 1e-9 for v in r.trail)
    assert r.trail[0] > r.trail[1] > r.trail[2]
    assert r.value - floor < 0.05


@pytest.mark.parametrize("lam, g, gb", [(2.0, 0.25, 0.5), (0.0, -0.75, 0.75), (6.0, -4.0, 5.0)])
def test_mode_quotient_exact_sine_modes(lam, g, gb):
    # on the full interval the difference operators share the sine eigenvectors,
    # so the discrete value is min_j sigma_j^2 + 2(lam+gbar) sigma_j + (lam+gamma)^2
    p = ModeProblem1D(lam, g, gb, S=6, nodes=300)
    h, N = p.spacing, p.nodes
    sigma = 4 / h**2 * np.sin(np.arange(1, N + 1) * math.pi / (2 * (N + 1))) ** 2
    exact = np.min(sigma**2 + 2 * (lam + gb) * sigma + (lam + g) ** 2)
    assert mode_quotient_infimum(p, levels=1).value == pytest.approx(exact, rel=1e-8)


def test_half_line_clamped_above_dirichlet():
    g, gb = gamma(3, 0), gamma_bar(3, 0)
    d = mode_quotient_infimum(ModeProblem1D(2.0, g, gb, "half", "dirichlet", S=10, nodes=1000), 1).value
    c = mode_quotient_infimum(ModeProblem1D(2.0, g, gb, "half", "clamped", S=10, nodes=1000), 1).value
    assert c > d > (2.0 + g) ** 2


def test_mode_problem_validation():
    with pytest.raises(InvalidInput):
        ModeProblem1D(0.0, 0.0, 0.0, "half", "none")
    with pytest.raises(InvalidInput):
        ModeProblem1D(0.0, 0.0, 0.0, S=-1)


@pytest.mark.parametrize("i", range(5))
def test_scaling_monotonicity_builtin(i):
    u = SeparableConeFunction.single(3, 0.0, builtin_family()[i], 2.0)
    q = scaling_monotonicity_check(energy_breakdown(u))
    assert np.all(np.diff(q) > 0)


def test_scaling_monotonicity_rejects():
    u = SeparableConeFunction.single(3, 0.0, Bump(0, 1, 0.0), 2.0)
    with pytest.raises(DegenerateInput):
        scaling_monotonicity_check(energy_breakdown(u))
    b = energy_breakdown(SeparableConeFunction.single(3, 0.0, Bump(0, 1), 2.0))
    with pytest.raises(InvalidInput):
        scaling_monotonicity_check(b, [0.5, 0.25])


def test_minimizing_sequence_hemisphere():
    geo = ConeGeometry.half_sphere(3)
    target = mu_halfspace_navier(3, 0)
    mode = best_mode(geo, 0.0)
    e1 = minimizing_sequence_quotient(MinimizingSequenceParams(1e-2, mode=mode), geo, 0.0) - target
    e2 = minimizing_sequence_quotient(MinimizingSequenceParams(5e-3, mode=mode), geo, 0.0) - target
    assert 0 < e1 < 1e-3
    assert 0 < e2 < e1 / 3
    assert scaled_mass(MinimizingSequenceParams(1e-2)) == pytest.approx(1.0, rel=1e-8)


def test_minimizing_sequence_needs_unit_profile():
    with pytest.raises(InvalidInput):
        minimizing_sequence_quotient(MinimizingSequenceParams(0.1, psi=Bump(0, 1)), ConeGeometry.half_sphere(3), 0.0)
    with pytest.raises(InvalidInput):
        MinimizingSequenceParams(0.0)
