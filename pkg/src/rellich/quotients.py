"""Discrete Rayleigh quotients behind the Navier and Dirichlet constants.

Angular problems:

* ``m_navier_discrete`` minimises int |L phi|^2 / int |phi|^2 over
  H^2 cap H^1_0 of a cap; per azimuthal mode this is min (lam_hat + gamma)^2
  over the eigenvalues of the discrete Dirichlet operator.
* ``m_dirichlet_discrete`` does the same over H^2_0.  The wall node keeps
  u = 0, a mirrored ghost enforces u' = 0, and the wall value of L u enters
  the quadrature.  This adds a rank-one term to the Navier form, so the
  smallest eigenvalue is the root of a secular equation in the Navier
  eigenbasis, which stays accurate even though the form scales like h^-4.

Cylinder problems reduce to one-dimensional fourth-order quotients in s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson
from scipy.linalg import eig_banded
from scipy.optimize import brentq

from .constants import SpectralDistance, gamma as gamma_of, gamma_bar as gamma_bar_of, spectral_distance_sq
from .emden_fowler import Bump, EnergyBreakdown, Profile, scaling_quotients
from .errors import DegenerateInput, InvalidInput, NumericalFailure
from .geometry import ConeGeometry
from .spectrum import ModeOperator, Spectrum, SturmLiouvilleGrid, geometry_spectrum

STRICT_ABS = 1e-8
STRICT_REL = 1e-6


@dataclass(frozen=True)
class QuotientResult:
    """A discrete quotient value with the attaining mode and the refinement trail."""

    value: float
    mode: Optional[int]
    grid: dict
    trail: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.trail:
            raise InvalidInput("refinement trail must be nonempty")


def strictly_greater(a: float, b: float) -> bool:
    """a > b by more than rounding: margin above 1e-8 + 1e-6 * a."""
    return a - b > STRICT_ABS + STRICT_REL * abs(a)


def m_navier(spectrum: Spectrum, gamma: float) -> SpectralDistance:
    """Squared distance from -gamma to the spectrum and the attaining eigenvalue."""
    return spectral_distance_sq(gamma, spectrum)


def _modes(geometry: ConeGeometry, ell_max: int) -> range:
    return range(2) if geometry.n == 2 else range(ell_max + 1)


def _cap_of(geometry: ConeGeometry) -> ConeGeometry:
    if geometry.shape == "full":
        raise InvalidInput("angular quotients need a cap, arc or hemisphere")
    return geometry.as_cap()


def _trail_grids(nodes: int, levels: int) -> list[int]:
    return [max(nodes >> (levels - 1 - i), 16) for i in range(levels)]


def _navier_once(geometry: ConeGeometry, gamma: float, nodes: int, ell_max: int) -> tuple[float, int]:
    best, arg = math.inf, 0
    grid = SturmLiouvilleGrid(nodes)
    for ell in _modes(geometry, ell_max):
        lam = ModeOperator(geometry.n, geometry.theta, ell, grid).eigenvalues()
        if ell == ell_max and geometry.n > 2 and lam[0] < -gamma:
            raise InvalidInput(
                f"ell_max={ell_max} too small: mode {ell} still has eigenvalues below {-gamma:.6g}"
            )
        v = float(np.min((lam + gamma) ** 2))
        if v < best:
            best, arg = v, ell
    return best, arg


def m_navier_discrete(
    geometry: ConeGeometry, gamma: float, nodes: int = 4000, ell_max: int = 8, levels: int = 3
) -> QuotientResult:
    """Navier angular quotient on a cap or arc, with a coarse-to-fine trail."""
    cap = _cap_of(geometry)
    trail, mode = [], 0
    for m in _trail_grids(nodes, levels):
        v, mode = _navier_once(cap, gamma, m, ell_max)
        trail.append(v)
    return QuotientResult(trail[-1], mode, {"nodes": nodes, "ell_max": ell_max, "theta": cap.theta}, tuple(trail))


def clamped_mode_minimum(op: ModeOperator, gamma: float) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of the clamped form for one mode, and its nodal minimiser.

    In the orthonormal eigenbasis of the scaled Navier operator the clamped
    form is diag((lam_i + gamma)^2) + rho q q^T, q the wall-adjacent row of
    the eigenvector matrix; the smallest eigenvalue solves
    1/rho + sum q_i^2 / (d_i - mu) = 0 below the second-smallest d_i.
    """
    lam, Q = op.eigensystem
    d = (lam + gamma) ** 2
    rho = op.wall_weight * (2.0 / op.h**2) ** 2 / op.mass[-1]
    q = Q[-1, :]
    order = np.argsort(d, kind="stable")
    d, q, Qs = d[order], q[order], Q[:, order]
    # equal d_i: rotate the degenerate pair so that only one member couples
    d_lo = d[0]
    q2 = q * q
    same = np.abs(d - d_lo) <= 1e-14 * max(1.0, d_lo)
    w0 = float(q2[same].sum())
    rest = ~same
    k = int(np.argmax(rest))
    d_next = d[k]
    if w0 == 0.0:
        return float(d_lo), Qs[:, 0] / np.sqrt(op.mass)

    def secular(mu: float) -> float:
        return 1.0 / rho + w0 / (d_lo - mu) + float(np.sum(q2[rest] / (d[rest] - mu)))

    gap = d_next - d_lo
    a = d_lo + gap * 1e-15 + 1e-300
    b = d_next - gap * 1e-15
    if not (secular(a) < 0 < secular(b)):
        raise NumericalFailure("secular equation not bracketed")
    mu = brentq(secular, a, b, xtol=1e-15 * max(1.0, d_next), rtol=1e-15, maxiter=500)
    coef = np.zeros_like(d)
    coef[same] = q[same] / (d_lo - mu)
    coef[rest] = q[rest] / (d[rest] - mu)
    y = Qs @ coef
    return float(mu), y / np.sqrt(op.mass)


def _dirichlet_once(geometry: ConeGeometry, gamma: float, nodes: int, ell_max: int) -> tuple[float, int]:
    best, arg = math.inf, 0
    grid = SturmLiouvilleGrid(nodes)
    for ell in _modes(geometry, ell_max):
        op = ModeOperator(geometry.n, geometry.theta, ell, grid)
        v, _ = clamped_mode_minimum(op, gamma)
        if v < best:
            best, arg = v, ell
    return best, arg


def m_dirichlet_discrete(
    geometry: ConeGeometry, gamma: float, nodes: int = 2000, ell_max: int = 8, levels: int = 3
) -> QuotientResult:
    """Clamped (H^2_0) angular quotient on a proper cap or arc."""
    cap = _cap_of(geometry)
    if not cap.is_proper:
        raise InvalidInput("clamped quotients need a domain whose closure is not the whole sphere")
    if nodes < 64:
        raise InvalidInput("clamped quotients need at least 64 nodes")
    trail, mode = [], 0
    for m in _trail_grids(nodes, levels):
        v, mode = _dirichlet_once(cap, gamma, max(m, 64), ell_max)
        trail.append(v)
    return QuotientResult(trail[-1], mode, {"nodes": nodes, "ell_max": ell_max, "theta": cap.theta}, tuple(trail))


@dataclass(frozen=True)
class ClampedAngularFactor:
    """Discrete H^2_0 angular profile with its three quadratic integrals.

    ``mu`` is the clamped quotient value; ``l_energy`` re-evaluates
    int |L phi|^2 directly from the nodal values and agrees with it to rounding.
    """

    ell: int
    mu: float
    grad: float
    l_energy: float
    gamma: float
    values: np.ndarray = field(repr=False)


def clamped_angular_factor(
    geometry: ConeGeometry, gamma: float, nodes: int = 2000, ell_max: int = 8
) -> ClampedAngularFactor:
    """The discrete minimiser of the clamped quotient, normalised to unit mass."""
    cap = _cap_of(geometry)
    grid = SturmLiouvilleGrid(nodes)
    best = None
    for ell in _modes(cap, ell_max):
        op = ModeOperator(cap.n, cap.theta, ell, grid)
        mu, u = clamped_mode_minimum(op, gamma)
        if best is None or mu < best[0]:
            best = (mu, u, op)
    mu, u, op = best
    mass = float(np.sum(op.mass * u * u))
    u = u / math.sqrt(mass)
    Au = op.apply(u)
    grad = float(np.sum(op.mass * u * Au))
    wall = -2.0 * u[-1] / op.h**2
    l_energy = float(np.sum(op.mass * (Au + gamma * u) ** 2) + op.wall_weight * wall**2)
    return ClampedAngularFactor(op.ell, mu, grad, l_energy, gamma, u)


# -- cylinder (s-variable) problems -----------------------------------------

Interval = Literal["full", "half"]
Endpoint = Literal["dirichlet", "clamped", "none"]


@dataclass(frozen=True)
class ModeProblem1D:
    """Quotient [int v''^2 + 2(lam+gbar) int v'^2 + (lam+gamma)^2 int v^2] / int v^2.

    ``interval="full"`` means [-S, S] with v = 0 beyond the ends;
    ``"half"`` means (0, S] with the stated condition at s = 0.
    """

    lam: float
    gamma: float
    gamma_bar: float
    interval: Interval = "full"
    endpoint: Endpoint = "none"
    S: float = 40.0
    nodes: int = 4000

    def __post_init__(self) -> None:
        if self.S <= 0 or self.nodes < 16:
            raise InvalidInput("degenerate grid")
        if not all(math.isfinite(x) for x in (self.lam, self.gamma, self.gamma_bar)):
            raise InvalidInput("coefficients must be finite")
        if self.interval == "half" and self.endpoint == "none":
            raise InvalidInput("a half-line problem needs a condition at s = 0")

    @property
    def spacing(self) -> float:
        if self.interval == "full":
            return 2 * self.S / (self.nodes + 1)
        return self.S / (self.nodes + 1)

    def refined(self, nodes: int, S: Optional[float] = None) -> "ModeProblem1D":
        return ModeProblem1D(
            self.lam, self.gamma, self.gamma_bar, self.interval, self.endpoint, S or self.S, nodes
        )


def _banded_lowest(B: sp.spmatrix, bw: int) -> float:
    n = B.shape[0]
    ab = np.zeros((bw + 1, n))
    B = B.todia() if not sp.isspmatrix_dia(B) else B
    for k in range(bw + 1):
        ab[bw - k, k:] = B.diagonal(k)
    return float(eig_banded(ab, eigvals_only=True, select="i", select_range=(0, 0))[0])


def _uniform_operators(p: ModeProblem1D):
    """Second differences D2, first differences D1 (per cell) for nodes s_1..s_N."""
    N, h = p.nodes, p.spacing
    main = -2.0 * np.ones(N)
    D2 = sp.diags([np.ones(N - 1), main, np.ones(N - 1)], [-1, 0, 1], format="lil")
    if p.interval == "half" and p.endpoint == "clamped":
        # v_0 = 0 at s = 0 and ghost v_{-1} = v_1; the wall row carries v''(0) = 2 v_1 / h^2
        D2 = sp.vstack([sp.csr_matrix(([2.0], ([0], [0])), shape=(1, N)), D2.tocsr()])
        c2 = np.full(N + 1, h)
        c2[0] = h / 2
    else:
        D2 = D2.tocsr()
        c2 = np.full(N, h)
    D2 = D2 / h**2
    # cells between consecutive nodes plus the two end cells touching zeros
    D1 = sp.diags([-np.ones(N), np.ones(N)], [-1, 0], shape=(N + 1, N)) / h
    c1 = np.full(N + 1, h)
    return D2, c2, D1, c1


def _mode_quotient_once(p: ModeProblem1D) -> float:
    D2, c2, D1, c1 = _uniform_operators(p)
    h = p.spacing
    a1 = 2.0 * (p.lam + p.gamma_bar)
    a0 = (p.lam + p.gamma) ** 2
    B = D2.T @ sp.diags(c2) @ D2 + a1 * (D1.T @ sp.diags(c1) @ D1) + a0 * h * sp.identity(p.nodes)
    return _banded_lowest(B / h, 2)


def mode_quotient_infimum(problem: ModeProblem1D, levels: int = 3) -> QuotientResult:
    """Lowest discrete value of the one-dimensional mode quotient.

    The trail doubles S and the node count together, keeping the spacing,
    so the trail decreases as the truncated line grows.
    """
    trail = []
    for i in range(levels):
        f = 2 ** (levels - 1 - i)
        trail.append(_mode_quotient_once(problem.refined(max(problem.nodes // f, 16), problem.S / f)))
    return QuotientResult(
        trail[-1], None, {"nodes": problem.nodes, "S": problem.S, "interval": problem.interval}, tuple(trail)
    )


def scaling_monotonicity_check(
    breakdown: EnergyBreakdown, t_values: Sequence[float] = (0.25, 0.5, 0.75, 1.0)
) -> np.ndarray:
    """Quotients of w(t s, .) along increasing t in (0, 1]; strictly increasing when w_s carries energy."""
    if breakdown.ws_mass <= 0:
        raise DegenerateInput("w_s vanishes identically, so w = 0")
    t = np.asarray(t_values, dtype=float)
    if np.any(t <= 0) or np.any(t > 1) or np.any(np.diff(t) <= 0):
        raise InvalidInput("t values must increase inside (0, 1]")
    q = scaling_quotients(breakdown, t)
    active = breakdown.wss_term > 0 or breakdown.grad_ws_term + breakdown.ws_term > 0
    if active and np.any(np.diff(q) <= 0):
        raise NumericalFailure("scaled quotients failed to increase strictly")
    return q


@dataclass(frozen=True)
class MinimizingSequenceParams:
    """w(s, sigma) = t^{1/2} psi(t s) phi_h(sigma) with int psi^2 = 1."""

    t: float
    psi: Profile = field(default_factory=lambda: Bump.normalized(0.0, 4.0))
    mode: int = 0
    samples: int = 8001

    def __post_init__(self) -> None:
        if self.t <= 0:
            raise InvalidInput("scaling t must be positive")


def profile_moments(psi: Profile, samples: int = 8001) -> tuple[float, float, float]:
    """int psi^2, int psi'^2, int psi''^2 by Simpson on the support."""
    lo, hi = psi.support
    s = np.linspace(lo, hi, samples | 1)
    v, dv, d2v = psi.derivatives(s)
    return tuple(float(simpson(f * f, x=s)) for f in (v, dv, d2v))


def minimizing_sequence_quotient(
    params: MinimizingSequenceParams,
    geometry: ConeGeometry,
    alpha: float,
    spectrum: Optional[Spectrum] = None,
) -> float:
    """(lam_h + gamma)^2 + t^4 int psi''^2 + 2 t^2 (gbar + lam_h) int psi'^2."""
    m0, m1, m2 = profile_moments(params.psi, params.samples)
    if abs(m0 - 1.0) > 1e-8:
        raise InvalidInput(f"psi must have unit L^2 norm, got {m0}")
    spectrum = spectrum or geometry_spectrum(geometry)
    if not (0 <= params.mode < len(spectrum)):
        raise InvalidInput(f"mode {params.mode} not in the spectrum")
    lam = spectrum.entries[params.mode].value
    g, gb = gamma_of(geometry.n, alpha), gamma_bar_of(geometry.n, alpha)
    t = params.t
    return (lam + g) ** 2 + t**4 * m2 + 2 * t**2 * (gb + lam) * m1


def best_mode(geometry: ConeGeometry, alpha: float, spectrum: Optional[Spectrum] = None) -> int:
    """Index of the eigenvalue attaining the spectral distance."""
    spectrum = spectrum or geometry_spectrum(geometry)
    d = spectral_distance_sq(gamma_of(geometry.n, alpha), spectrum)
    return spectrum.entries.index(d.entry)


def scaled_mass(params: MinimizingSequenceParams) -> float:
    """int |w|^2 for w = t^{1/2} psi(t s) computed on the dilated support."""
    lo, hi = params.psi.support
    t = params.t
    s = np.linspace(lo / t, hi / t, params.samples | 1)
    v = math.sqrt(t) * params.psi.derivatives(t * s)[0]
    return float(simpson(v * v, x=s))
