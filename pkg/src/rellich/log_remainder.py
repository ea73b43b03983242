"""Logarithmic remainder terms on cone-like domains.

On Omega = C_Sigma cap B^n the Emden-Fowler variable s = -log|x| runs over
(0, inf), on the exterior domain over (-inf, 0); |log|x|| = |s|.  The
remainder inequality is checked mode by mode on the cylinder, and the
sharpness of its coefficients reduces to one-dimensional Hardy quotients

    int v'^2  >= 1/4  int s^-2 v^2     (v(0) = 0)
    int v''^2 >= 9/16 int s^-4 v^2     (v(0) = v'(0) = 0)

discretised on log-spaced grids.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .constants import gamma as gamma_of
from .constants import gamma_bar as gamma_bar_of
from .constants import mu_halfspace_navier, mu_whole_space, spectral_distance_sq
from .emden_fowler import Bump, ModeTerm, Profile, Reflected, SeparableConeFunction, WallProfile
from .errors import HypothesisError, InvalidInput, NumericalFailure
from .geometry import ConeGeometry
from .quotients import QuotientResult, clamped_angular_factor
from .spectrum import SturmLiouvilleGrid, first_eigenvalue, full_sphere_spectrum, geometry_spectrum

BoundaryCondition = Literal["navier", "mixed", "dirichlet"]
DomainKind = Literal["ball", "exterior"]

HARDY_1 = 0.25
HARDY_2 = 9.0 / 16.0
SLACK_TOL = 1e-8


@dataclass(frozen=True)
class LogGrid:
    """Geometric grid s_0 = smin < ... < s_{count-1} = smax; s_0 plays the wall s = 0."""

    smin: float = 1e-4
    smax: float = 1e4
    count: int = 4096

    def __post_init__(self) -> None:
        if not (self.smin > 0):
            raise InvalidInput(f"smin must be positive, got {self.smin}")
        if not (self.smax > self.smin):
            raise InvalidInput("smax must exceed smin")
        if self.count < 16:
            raise InvalidInput("log grid needs at least 16 nodes")

    @property
    def points(self) -> np.ndarray:
        return np.geomspace(self.smin, self.smax, self.count)

    @property
    def decades(self) -> float:
        return math.log10(self.smax / self.smin)

    def extended(self, decades: float) -> "LogGrid":
        """Widen by ``decades`` on each side at the same number of cells per decade."""
        per = (self.count - 1) / self.decades
        total = self.decades + 2 * decades
        return LogGrid(self.smin / 10**decades, self.smax * 10**decades, int(round(per * total)) + 1)


DEFAULT_GRID = LogGrid()
SCAN_GRID = LogGrid(1e-16, 1e16, 16384)


@dataclass(frozen=True)
class HalfLineForms:
    """Quadratic forms on nodal values at s_1..s_{K-1} (s_0 is the wall).

    K1: P1 stiffness int v'^2 with v(s_0) = 0.
    K2: int v''^2 from nonuniform second differences; the wall row uses the
        mirrored ghost v(-h) = v(h), i.e. v = v' = 0 at s_0.
    M2, M4: lumped int s^-2 v^2 and int s^-4 v^2 with the weight taken at cell midpoints.
    The right end is left free.
    """

    K1: sp.csr_matrix
    K2: sp.csr_matrix
    M2: np.ndarray
    M4: np.ndarray

    @classmethod
    def on(cls, s: np.ndarray) -> "HalfLineForms":
        K = s.size
        d = np.diff(s)
        inv = 1.0 / d
        main = np.zeros(K)
        main[:-1] += inv
        main[1:] += inv
        K1 = sp.diags([main, -inv, -inv], [0, 1, -1], format="csr")

        hl, hr = d[:-1], d[1:]
        r = np.arange(1, K - 1)
        rows = np.concatenate([[0], r, r, r])
        cols = np.concatenate([[1], r - 1, r, r + 1])
        vals = np.concatenate(
            [[2.0 / d[0] ** 2], 2.0 / (hl * (hl + hr)), -2.0 / (hl * hr), 2.0 / (hr * (hl + hr))]
        )
        D = sp.csr_matrix((vals, (rows, cols)), shape=(K - 1, K))
        c = np.empty(K - 1)
        c[0] = d[0] / 2
        c[1:] = (d[:-1] + d[1:]) / 2
        K2 = D.T @ sp.diags(c) @ D

        mid = 0.5 * (s[1:] + s[:-1])

        def lump(p: int) -> np.ndarray:
            wc = mid ** (-p) * d
            m = np.zeros(K)
            m[:-1] += wc / 2
            m[1:] += wc / 2
            return m[1:]

        keep = slice(1, None)
        return cls(K1[keep, keep].tocsr(), K2[keep, keep].tocsr(), lump(2), lump(4))


def lowest_pencil(A: sp.spmatrix, m: np.ndarray) -> float:
    """Smallest eigenvalue of A x = mu diag(m) x by shift-invert Lanczos.

    The graded log grids make the scaled matrix norm huge compared with
    its smallest eigenvalue; inverting keeps the relative accuracy.
    """
    sc = 1.0 / np.sqrt(m)
    B = (sp.diags(sc) @ A @ sp.diags(sc)).tocsc()
    v0 = np.ones(B.shape[0])
    try:
        val = eigsh(B, k=1, sigma=0.0, which="LM", v0=v0, return_eigenvectors=False)
    except Exception as exc:  # ARPACK or factorisation failure
        raise NumericalFailure(f"pencil eigensolve failed: {exc}") from exc
    return float(val[0])


def _hardy_once(order: int, grid: LogGrid) -> float:
    f = HalfLineForms.on(grid.points)
    if order == 1:
        return lowest_pencil(f.K1, f.M2)
    return lowest_pencil(f.K2, f.M4)


def hardy_halfline(order: int, grid: LogGrid = DEFAULT_GRID, steps: int = 3, widen: float = 4.0) -> QuotientResult:
    """Discrete Hardy constant of order 1 (vs 1/4) or 2 (vs 9/16).

    ``value`` is the quotient on ``grid``; the trail appends ``steps``
    refinements, each widening the grid by ``widen`` decades per side.
    """
    if order not in (1, 2):
        raise InvalidInput(f"order must be 1 or 2, got {order}")
    trail = [_hardy_once(order, grid.extended(k * widen)) for k in range(steps + 1)]
    meta = {"smin": grid.smin, "smax": grid.smax, "count": grid.count, "widen_decades": widen}
    return QuotientResult(trail[0], None, meta, tuple(trail))


def half_line_quotient(profile: Profile, order: int, grid: LogGrid = DEFAULT_GRID) -> float:
    """int |v^(order)|^2 / int s^(-2 order) v^2 for an explicit profile, by midpoint quadrature."""
    q = _Quadrature.on(grid, "ball")
    v, dv, d2v = profile.derivatives(q.s)
    num = q.integral((dv if order == 1 else d2v) ** 2)
    return num / q.integral(v * v * q.abs_s ** (-2 * order))


# -- remainder verification --------------------------------------------------


@dataclass(frozen=True)
class ConeLikeDomain:
    """C_Sigma cap B^n ("ball") or C_Sigma minus the closed unit ball ("exterior")."""

    geometry: ConeGeometry
    kind: DomainKind = "ball"

    def __post_init__(self) -> None:
        if self.kind not in ("ball", "exterior"):
            raise InvalidInput(f"unknown domain kind {self.kind!r}")

    @property
    def sign(self) -> int:
        return 1 if self.kind == "ball" else -1


@dataclass(frozen=True)
class _Quadrature:
    s: np.ndarray
    abs_s: np.ndarray
    w: np.ndarray

    @classmethod
    def on(cls, grid: LogGrid, kind: DomainKind) -> "_Quadrature":
        nodes = np.concatenate([[0.0], grid.points])
        mid = 0.5 * (nodes[1:] + nodes[:-1])
        w = np.diff(nodes)
        s = mid if kind == "ball" else -mid
        return cls(s, mid, w)

    def integral(self, f: np.ndarray) -> float:
        return float(np.sum(f * self.w))


@dataclass(frozen=True)
class RemainderReport:
    """Terms of the remainder inequality lhs - mu_term >= log2_term + log4_term."""

    bc: str
    kind: str
    lhs_energy: float
    mu: float
    mu_term: float
    log2_coef: float
    log2_term: float
    log4_coef: float
    log4_term: float
    slack: float
    mu_is_estimate: bool = False

    @property
    def holds(self) -> bool:
        return self.slack >= -SLACK_TOL * abs(self.lhs_energy)

    def terms(self) -> tuple[float, ...]:
        """Every numeric field, for exact comparisons between mirrored reports."""
        return (
            self.lhs_energy, self.mu, self.mu_term, self.log2_coef,
            self.log2_term, self.log4_coef, self.log4_term, self.slack,
        )


def navier_constant(geometry: ConeGeometry, alpha: float, grid: SturmLiouvilleGrid = SturmLiouvilleGrid()) -> float:
    """mu_N of the cone: the squared distance from -gamma to the angular spectrum."""
    if geometry.shape == "full":
        return mu_whole_space(geometry.n, alpha)
    if geometry.shape == "half":
        return mu_halfspace_navier(geometry.n, alpha)
    g = gamma_of(geometry.n, alpha)
    return spectral_distance_sq(g, geometry_spectrum(geometry, grid=grid)).value


def _check_wall(profile: Profile, domain: ConeLikeDomain, bc: BoundaryCondition) -> None:
    lo, hi = profile.support
    if domain.kind == "ball" and lo < 0:
        raise InvalidInput(f"profile support {profile.support} leaves s > 0")
    if domain.kind == "exterior" and hi > 0:
        raise InvalidInput(f"profile support {profile.support} leaves s < 0")
    v, dv, _ = profile.derivatives(np.array([0.0]))
    scale = max(1.0, float(np.max(np.abs(profile.derivatives(np.linspace(lo, hi, 65))[0]))))
    if abs(v[0]) > 1e-12 * scale:
        raise InvalidInput("u does not vanish on the unit sphere")
    if bc != "navier" and abs(dv[0]) > 1e-12 * scale:
        raise InvalidInput(f"{bc} condition needs a vanishing gradient on the unit sphere")


def verify_log_inequality(
    u: SeparableConeFunction,
    domain: ConeLikeDomain,
    bc: BoundaryCondition = "navier",
    grid: LogGrid = DEFAULT_GRID,
    angular_nodes: int = 2000,
    check: bool = True,
) -> RemainderReport:
    """Evaluate both sides of the logarithmic remainder inequality for ``u``.

    Navier and mixed use mu_N; the 9/16 term enters for mixed and Dirichlet.
    On a proper cap the Dirichlet case replaces the angular factor by the
    discrete clamped minimiser and mu by its quotient, a numerical estimate
    (``mu_is_estimate``).  All integrals are midpoint sums over the cells of
    {0} u grid, mirrored for the exterior domain in the same order, so a
    mirrored input gives a bit-identical report.
    """
    if bc not in ("navier", "mixed", "dirichlet"):
        raise InvalidInput(f"unknown boundary condition {bc!r}")
    geo = domain.geometry
    if u.n != geo.n:
        raise InvalidInput("function and domain dimensions differ")
    n, alpha = u.n, u.alpha
    g, gb = gamma_of(n, alpha), gamma_bar_of(n, alpha)
    for t in u.terms:
        _check_wall(t.profile, domain, bc)

    clamped = bc == "dirichlet" and geo.is_proper
    if clamped:
        if len(u.terms) != 1:
            raise InvalidInput("the clamped angular factor supports single-term functions only")
        factor = clamped_angular_factor(geo, g, angular_nodes)
        mu = factor.mu
        angular = [(factor.l_energy, factor.grad)]
        lam_sigma = float(
            min(
                first_eigenvalue(geo, SturmLiouvilleGrid(angular_nodes)),
                factor.grad,
            )
        )
    else:
        sl_grid = SturmLiouvilleGrid(angular_nodes)
        mu = navier_constant(geo, alpha, sl_grid)
        lam_sigma = first_eigenvalue(geo, sl_grid)
        for t in u.terms:
            if t.eigenvalue < lam_sigma - 1e-9 * max(1.0, lam_sigma):
                raise InvalidInput(f"mode eigenvalue {t.eigenvalue} lies below the first eigenvalue")
        angular = [((t.eigenvalue + g) ** 2, t.eigenvalue) for t in u.terms]

    q = _Quadrature.on(grid, domain.kind)
    lhs = mass = m2 = m4 = 0.0
    for t, (l_energy, grad) in zip(u.terms, angular):
        v, dv, d2v = t.profile.derivatives(q.s)
        v2 = v * v
        i0 = q.integral(v2)
        i1 = q.integral(dv * dv)
        i2 = q.integral(d2v * d2v)
        lhs += l_energy * i0 + i2 + 2.0 * (grad + gb) * i1
        mass += i0
        m2 += q.integral(v2 / q.abs_s**2)
        m4 += q.integral(v2 / q.abs_s**4)

    c2 = (gb + lam_sigma) / 2.0
    c4 = HARDY_2 if bc in ("mixed", "dirichlet") else 0.0
    mu_term = mu * mass
    log2_term = c2 * m2
    log4_term = c4 * m4
    slack = lhs - mu_term - log2_term - log4_term
    report = RemainderReport(
        bc, domain.kind, lhs, mu, mu_term, c2, log2_term, c4, log4_term, slack, clamped
    )
    if check and not report.holds:
        raise NumericalFailure(f"remainder inequality violated: slack {slack:.3e} on lhs {lhs:.3e}")
    return report


# -- seeded verification manifest -------------------------------------------


@dataclass(frozen=True)
class ManifestSample:
    """One test function: a radial profile times the angular mode ``mode`` of S^{n-1}."""

    n: int
    alpha: float
    mode: int
    profile: dict = field(hash=False)

    def radial_profile(self) -> Profile:
        p = dict(self.profile)
        kind = p.pop("kind")
        if kind == "bump":
            return Bump(**p)
        if kind == "wall":
            return WallProfile(**p)
        raise InvalidInput(f"unknown profile kind {kind!r}")

    def function(self, kind: DomainKind = "ball") -> SeparableConeFunction:
        prof = self.radial_profile()
        if kind == "exterior":
            prof = Reflected(prof)
        lam = full_sphere_spectrum(self.n, self.mode + 1).entries[self.mode].value
        return SeparableConeFunction.single(self.n, self.alpha, prof, lam)

    @property
    def domain(self) -> ConeGeometry:
        return ConeGeometry.full_sphere(self.n)


def build_manifest(bc: BoundaryCondition, count: int = 20, seed: int = 42) -> list[ManifestSample]:
    """Seeded test family: n in {2, 3}, the first two angular modes, bumps and wall profiles.

    Wall profiles have power 1 for the Navier case and power 2 otherwise.
    """
    rng = np.random.default_rng([seed, ("navier", "mixed", "dirichlet").index(bc)])
    out = []
    for i in range(count):
        n = int(rng.integers(2, 4))
        alpha = round(float(rng.uniform(-4.0, 8.0)), 3)
        mode = i % 2
        if i % 4 < 2:
            hw = round(float(rng.uniform(0.5, 3.0)), 3)
            center = round(hw + float(rng.uniform(0.0, 4.0)), 3)
            prof = {"kind": "bump", "center": center, "half_width": hw}
        else:
            reach = round(float(rng.uniform(1.0, 6.0)), 3)
            prof = {"kind": "wall", "reach": reach, "power": 1 if bc == "navier" else 2}
        out.append(ManifestSample(n, alpha, mode, prof))
    return out


def manifest_json(samples: Sequence[ManifestSample]) -> str:
    return json.dumps([asdict(s) for s in samples], indent=2, sort_keys=True) + "\n"


def verify_manifest(
    bc: BoundaryCondition, count: int = 20, seed: int = 42, grid: LogGrid = DEFAULT_GRID
) -> list[tuple[ManifestSample, RemainderReport, RemainderReport]]:
    """Reports on the ball and on the mirrored exterior domain for every manifest sample."""
    out = []
    for smp in build_manifest(bc, count, seed):
        reps = [
            verify_log_inequality(smp.function(k), ConeLikeDomain(smp.domain, k), bc, grid, check=False)
            for k in ("ball", "exterior")
        ]
        out.append((smp, reps[0], reps[1]))
    return out


# -- sharpness of the coefficients ---------------------------------------------


@dataclass(frozen=True)
class SharpnessPoint:
    t: float
    a_bound: float
    b_bound: float


@dataclass(frozen=True)
class SharpnessScan:
    """Largest admissible A (with B = 9/16) and B (with A = (gbar + lam)/2) per scale t."""

    c: float
    a_target: float
    b_target: float
    points: tuple[SharpnessPoint, ...]
    grid: LogGrid

    def at(self, t: float) -> SharpnessPoint:
        for p in self.points:
            if p.t == t:
                return p
        raise KeyError(t)

    @property
    def a_limit(self) -> float:
        """A bound at the smallest t (the t -> 0 proxy)."""
        return min(self.points, key=lambda p: p.t).a_bound

    @property
    def b_limit(self) -> float:
        """B bound at the largest t (the t -> infinity proxy)."""
        return max(self.points, key=lambda p: p.t).b_bound


def sharpness_scan(
    geometry: ConeGeometry,
    alpha: float,
    t_values: Sequence[float] = (1e-4, 1e-3, 1e3, 1e4),
    grid: LogGrid = SCAN_GRID,
    angular_nodes: int = 4000,
) -> SharpnessScan:
    """Empirical upper bounds on the remainder coefficients over the scaled family.

    With c = gbar + lam_Sigma the scaled inequality reads
    t^2 int v''^2 + 2c int v'^2 >= A int s^-2 v^2 + B t^2 int s^-4 v^2
    for v clamped at s = 0; A and B are the smallest generalised eigenvalues
    of the corresponding pencils on the discrete clamped space.
    """
    if not t_values or any(t <= 0 for t in t_values):
        raise InvalidInput("scales t must be positive")
    n = geometry.n
    g, gb = gamma_of(n, alpha), gamma_bar_of(n, alpha)
    sl = SturmLiouvilleGrid(angular_nodes)
    spectrum = geometry_spectrum(geometry, grid=sl)
    lam = spectrum.entries[0].value
    best = spectral_distance_sq(g, spectrum).value
    if (lam + g) ** 2 > best * (1 + 1e-12) + 1e-14:
        raise HypothesisError(
            f"the distance from {-g:.6g} to the spectrum is not attained at the first eigenvalue {lam:.6g}"
        )
    c = gb + lam
    a_target, b_target = c / 2.0, HARDY_2
    f = HalfLineForms.on(grid.points)
    M2, M4 = sp.diags(f.M2), sp.diags(f.M4)
    pts = []
    for t in sorted(t_values):
        t2 = t * t
        base = t2 * f.K2 + 2.0 * c * f.K1
        a = lowest_pencil(base - b_target * t2 * M4, f.M2)
        b = lowest_pencil(base - a_target * M2, t2 * f.M4)
        pts.append(SharpnessPoint(float(t), a, b))
    return SharpnessScan(c, a_target, b_target, tuple(pts), grid)


# -- explicit constants for alpha = 0 ------------------------------------------


@dataclass(frozen=True)
class CorollaryConstants:
    n: int
    mu: float
    log2: float
    log4: float


def corollary_constants(n: int, alpha: float = 0.0) -> CorollaryConstants:
    """(mu, log^-2 coefficient, log^-4 coefficient) on the punctured ball and exterior domain.

    For alpha = 0 the closed forms are checked: n = 2 gives (0, 1/2, 9/16)
    and n >= 3 gives ((n(n-4)/4)^2, (n^2-4n+8)/8, 9/16).
    """
    mu = mu_whole_space(n, alpha)
    log2 = (gamma_bar_of(n, alpha) + 0.0) / 2.0
    out = CorollaryConstants(n, mu, log2, HARDY_2)
    if alpha == 0:
        if n == 2:
            expect = (0.0, 0.5)
        else:
            expect = ((n * (n - 4) / 4) ** 2, (n * n - 4 * n + 8) / 8)
        for got, want in zip((mu, log2), expect):
            if abs(got - want) > 1e-12 * max(1.0, abs(want)):
                raise NumericalFailure(f"closed form mismatch: {got} vs {want}")
    return out


__all__ = [
    "ConeLikeDomain",
    "CorollaryConstants",
    "DEFAULT_GRID",
    "HalfLineForms",
    "LogGrid",
    "ManifestSample",
    "ModeTerm",
    "RemainderReport",
    "SCAN_GRID",
    "SharpnessScan",
    "build_manifest",
    "corollary_constants",
    "half_line_quotient",
    "hardy_halfline",
    "manifest_json",
    "navier_constant",
    "sharpness_scan",
    "verify_log_inequality",
    "verify_manifest",
]
