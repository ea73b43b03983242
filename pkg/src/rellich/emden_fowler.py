"""Emden-Fowler transform between cone functions and cylinder functions.

A cone function is stored in separated form

    u(x) = |x|^{(4-n-alpha)/2} * sum_k v_k(-log|x|) phi_k(x/|x|)

where the phi_k are L^2-orthonormal Dirichlet eigenfunctions of the angular
domain with eigenvalues lam_k, so its cylinder image is w = sum_k v_k phi_k.
Two independent routes evaluate the weighted integrals: mode sums on the
cylinder (``energy_breakdown``) and radial quadrature of the polar Laplacian
(``polar_energy`` / ``polar_mass``, adaptive in r), which only share the
profile evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol, Sequence

import numpy as np
from scipy.integrate import quad, simpson

from .constants import gamma as gamma_of
from .constants import gamma_bar as gamma_bar_of
from .errors import DegenerateInput, InvalidInput
from .spectrum import Spectrum


class Profile(Protocol):
    """A C^2 function of one variable with closed-form derivatives."""

    support: tuple[float, float]

    def derivatives(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]: ...


def _bump_integral(m: int) -> float:
    # int_{-1}^{1} (1 - x^2)^m dx
    return 2.0 ** (2 * m + 1) * math.factorial(m) ** 2 / math.factorial(2 * m + 1)


@dataclass(frozen=True)
class Bump:
    """amplitude * (1 - ((s - center)/half_width)^2)^3 on its support, 0 outside."""

    center: float
    half_width: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.half_width <= 0:
            raise InvalidInput("bump half width must be positive")

    @classmethod
    def normalized(cls, center: float, half_width: float) -> "Bump":
        """Bump with unit L^2 norm."""
        return cls(center, half_width, 1.0 / math.sqrt(half_width * _bump_integral(6)))

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - self.half_width, self.center + self.half_width)

    def derivatives(self, s):
        s = np.asarray(s, dtype=float)
        h = self.half_width
        x = (s - self.center) / h
        inside = np.abs(x) < 1.0
        q = np.where(inside, 1.0 - x * x, 0.0)
        a = self.amplitude
        v = a * q**3
        dv = a * (-6.0 * x * q**2) / h
        d2v = a * (-6.0 * q**2 + 24.0 * x * x * q) / (h * h)
        return v, np.where(inside, dv, 0.0), np.where(inside, d2v, 0.0)

    def __call__(self, s):
        return self.derivatives(s)[0]


@dataclass(frozen=True)
class WallProfile:
    """amplitude * s^power * (1 - s/reach)^3 on [0, reach], 0 elsewhere.

    power 1 vanishes at s = 0 with nonzero slope (Navier wall); power 2 is
    clamped (value and slope vanish).
    """

    reach: float
    power: int = 1
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.reach <= 0 or self.power not in (1, 2):
            raise InvalidInput("wall profile needs reach > 0 and power in {1, 2}")

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, self.reach)

    def derivatives(self, s):
        s = np.asarray(s, dtype=float)
        b, p, a = self.reach, self.power, self.amplitude
        inside = (s >= 0.0) & (s < b)
        y = np.where(inside, 1.0 - s / b, 0.0)
        sp = np.where(inside, s, 0.0)
        f = sp**p
        df = p * sp ** (p - 1)
        d2f = p * (p - 1) * sp ** max(p - 2, 0) if p > 1 else np.zeros_like(sp)
        g, dg, d2g = y**3, -3.0 * y**2 / b, 6.0 * y / (b * b)
        v = a * f * g
        dv = a * (df * g + f * dg)
        d2v = a * (d2f * g + 2.0 * df * dg + f * d2g)
        return v, np.where(inside, dv, 0.0), np.where(inside, d2v, 0.0)

    def __call__(self, s):
        return self.derivatives(s)[0]


@dataclass(frozen=True)
class Reflected:
    """s -> base(-s)."""

    base: Profile

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.base.support
        return (-hi, -lo)

    def derivatives(self, s):
        v, dv, d2v = self.base.derivatives(-np.asarray(s, dtype=float))
        return v, -dv, d2v

    def __call__(self, s):
        return self.derivatives(s)[0]


@dataclass(frozen=True)
class Dilated:
    """s -> base(t s)."""

    base: Profile
    t: float

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.base.support
        return (lo / self.t, hi / self.t)

    def derivatives(self, s):
        v, dv, d2v = self.base.derivatives(self.t * np.asarray(s, dtype=float))
        return v, self.t * dv, self.t**2 * d2v

    def __call__(self, s):
        return self.derivatives(s)[0]


@dataclass(frozen=True)
class ModeTerm:
    """One separated term v(s) phi(sigma), phi orthonormal with eigenvalue ``eigenvalue``."""

    profile: Profile
    eigenvalue: float
    label: str = ""


@dataclass(frozen=True)
class SGrid:
    """Uniform grid on [lo, hi] with an odd number of samples (Simpson)."""

    lo: float
    hi: float
    samples: int = 4001

    def __post_init__(self) -> None:
        if self.samples < 64:
            raise InvalidInput("need at least 64 samples")
        if self.hi <= self.lo:
            raise InvalidInput("empty s-grid")
        if self.samples % 2 == 0:
            object.__setattr__(self, "samples", self.samples + 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.samples)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.samples - 1)

    def covering(self, support: tuple[float, float], margin_cells: int = 2) -> bool:
        m = margin_cells * self.spacing
        return self.lo + m <= support[0] and support[1] <= self.hi - m

    def reflected(self) -> "SGrid":
        return SGrid(-self.hi, -self.lo, self.samples)


@dataclass(frozen=True)
class SeparableConeFunction:
    """Cone function u with cylinder profile terms, exponent data (n, alpha) and an s-grid."""

    n: int
    alpha: float
    terms: tuple[ModeTerm, ...]
    grid: SGrid

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidInput("dimension must be >= 2")
        if not self.terms:
            raise InvalidInput("need at least one mode term")
        for t in self.terms:
            if not self.grid.covering(t.profile.support):
                raise InvalidInput(
                    f"profile support {t.profile.support} not inside the grid with a 2-cell margin"
                )

    @classmethod
    def single(cls, n, alpha, profile, eigenvalue, samples=4001, pad=1.0):
        lo, hi = profile.support
        return cls(n, alpha, (ModeTerm(profile, eigenvalue),), SGrid(lo - pad, hi + pad, samples))

    @property
    def exponent(self) -> float:
        """Power of |x| multiplying w in u."""
        return (4 - self.n - self.alpha) / 2

    def radial_parts(self, r: np.ndarray) -> list[np.ndarray]:
        """u's radial factor for each term at radii r (angular factors excluded)."""
        r = np.asarray(r, dtype=float)
        return [r**self.exponent * t.profile(-np.log(r)) for t in self.terms]


@dataclass(frozen=True)
class CylinderField:
    """Sampled cylinder function w = sum_k w_k(s) phi_k on a uniform s-grid."""

    s: np.ndarray
    values: tuple[np.ndarray, ...]
    eigenvalues: tuple[float, ...]
    n: int
    alpha: float

    @property
    def spacing(self) -> float:
        return float(self.s[1] - self.s[0])


def forward_transform(u: SeparableConeFunction) -> CylinderField:
    """w(s) = |x|^{(n+alpha-4)/2} u(x) at |x| = e^{-s}, sampled per mode."""
    s = u.grid.points
    r = np.exp(-s)
    parts = u.radial_parts(r)
    vals = tuple(r ** (-u.exponent) * p for p in parts)
    return CylinderField(s, vals, tuple(t.eigenvalue for t in u.terms), u.n, u.alpha)


def inverse_transform(w: CylinderField, terms: Sequence[ModeTerm]) -> SeparableConeFunction:
    """Rebuild the cone function whose image is ``w``; ``terms`` supply the closed forms."""
    s = w.s
    grid = SGrid(float(s[0]), float(s[-1]), s.size)
    u = SeparableConeFunction(w.n, w.alpha, tuple(terms), grid)
    for t, vals in zip(u.terms, w.values):
        if not np.allclose(t.profile(s), vals, rtol=0, atol=1e-12 * max(1.0, np.abs(vals).max())):
            raise InvalidInput("profile terms do not reproduce the sampled field")
    return u


def laplacian_cylinder_form(w: CylinderField) -> tuple[np.ndarray, ...]:
    """Per-mode bracket -L w + w_ss + (alpha - 2) w_s from finite differences of the samples.

    |x|^{(n+alpha)/2} Delta u equals the sum of these brackets times phi_k.
    """
    if w.s.size < 5:
        raise InvalidInput("grid too coarse for the difference stencil")
    g = gamma_of(w.n, w.alpha)
    h = w.spacing
    out = []
    for lam, v in zip(w.eigenvalues, w.values):
        dv = np.gradient(v, h, edge_order=2)
        d2v = np.empty_like(v)
        d2v[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
        d2v[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
        d2v[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
        out.append(-(lam + g) * v + d2v + (w.alpha - 2) * dv)
    return tuple(out)


def bracket_energy(w: CylinderField) -> float:
    return float(sum(simpson(b * b, x=w.s) for b in laplacian_cylinder_form(w)))


@dataclass(frozen=True)
class EnergyBreakdown:
    """Cylinder terms of the weighted energy: total = |Lw|^2 + w_ss + 2|grad w_s|^2 + 2 gbar |w_s|^2."""

    lw_term: float
    wss_term: float
    grad_ws_term: float
    ws_term: float
    l2_mass: float
    ws_mass: float = 0.0

    @property
    def total(self) -> float:
        return self.lw_term + self.wss_term + self.grad_ws_term + self.ws_term

    @property
    def quotient(self) -> float:
        return self.total / self.l2_mass


def energy_breakdown(
    u: SeparableConeFunction, spectrum: Optional[Spectrum] = None
) -> EnergyBreakdown:
    """Mode-sum evaluation of the energy identity terms by Simpson's rule."""
    if spectrum is not None:
        for t in u.terms:
            if not spectrum.contains(t.eigenvalue):
                raise InvalidInput(f"mode eigenvalue {t.eigenvalue} missing from the spectrum")
    g, gb = gamma_of(u.n, u.alpha), gamma_bar_of(u.n, u.alpha)
    s = u.grid.points
    lw = wss = grad = ws = mass = ws_mass = 0.0
    for t in u.terms:
        v, dv, d2v = t.profile.derivatives(s)
        m0, m1, m2 = (float(simpson(f * f, x=s)) for f in (v, dv, d2v))
        lw += (t.eigenvalue + g) ** 2 * m0
        wss += m2
        grad += 2.0 * t.eigenvalue * m1
        ws += 2.0 * gb * m1
        mass += m0
        ws_mass += m1
    return EnergyBreakdown(lw, wss, grad, ws, mass, ws_mass)


def cross_terms(u: SeparableConeFunction) -> tuple[float, float]:
    """int w w_s and int w_ss w_s over the cylinder; both vanish for compact support."""
    s = u.grid.points
    a = b = 0.0
    for t in u.terms:
        v, dv, d2v = t.profile.derivatives(s)
        a += float(simpson(v * dv, x=s))
        b += float(simpson(d2v * dv, x=s))
    return a, b


# -- polar side -------------------------------------------------------------


class RadialFunction(Protocol):
    def __call__(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]: ...


@dataclass(frozen=True)
class ConeRadial:
    """r -> r^p v(-log r) with derivatives in r by the chain rule."""

    profile: Profile
    power: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        v, dv, d2v = self.profile.derivatives(-np.log(r))
        p = self.power
        V, V1, V2 = v, -dv / r, (d2v + dv) / r**2
        f = r**p * V
        f1 = p * r ** (p - 1) * V + r**p * V1
        f2 = p * (p - 1) * r ** (p - 2) * V + 2 * p * r ** (p - 1) * V1 + r**p * V2
        return f, f1, f2


@dataclass(frozen=True)
class KelvinRadial:
    """r -> r^{2-n} U(1/r) for a radial factor U."""

    base: RadialFunction
    n: int

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        U, U1, U2 = self.base(1.0 / r)
        g, g1, g2 = U, -U1 / r**2, U2 / r**4 + 2 * U1 / r**3
        q = 2 - self.n
        f = r**q * g
        f1 = q * r ** (q - 1) * g + r**q * g1
        f2 = q * (q - 1) * r ** (q - 2) * g + 2 * q * r ** (q - 1) * g1 + r**q * g2
        return f, f1, f2


# A polar part is (radial factor, eigenvalue, (r_lo, r_hi) containing its support).
PolarPart = tuple[RadialFunction, float, tuple[float, float]]


def _radial_integral(integrand, r_range: tuple[float, float]) -> float:
    # adaptive quadrature directly in r, independent of the cylinder s-grid
    val, _err = quad(lambda r: float(integrand(np.array([r]))[0]), *r_range, epsabs=0.0, epsrel=1e-13, limit=400)
    return float(val)


def polar_mass(parts: Sequence[PolarPart], n: int, beta: float) -> float:
    """int |x|^beta |u|^2 dx for u = sum f_k(r) phi_k, orthonormal phi_k."""
    total = 0.0
    for f, _lam, rr in parts:
        total += _radial_integral(lambda r, f=f: r ** (beta + n - 1) * f(r)[0] ** 2, rr)
    return total


def polar_energy(parts: Sequence[PolarPart], n: int, beta: float) -> float:
    """int |x|^beta |Delta u|^2 dx with Delta f phi = (f'' + (n-1) f'/r - lam f / r^2) phi."""
    total = 0.0
    for f, lam, rr in parts:

        def integrand(r, f=f, lam=lam):
            f0, f1, f2 = f(r)
            lap = f2 + (n - 1) * f1 / r - lam * f0 / r**2
            return r ** (beta + n - 1) * lap**2

        total += _radial_integral(integrand, rr)
    return total


def polar_parts(u: SeparableConeFunction) -> list[PolarPart]:
    out = []
    for t in u.terms:
        lo, hi = t.profile.support
        out.append((ConeRadial(t.profile, u.exponent), t.eigenvalue, (math.exp(-hi), math.exp(-lo))))
    return out


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of one transform identity and their relative gap."""

    name: str
    cylinder: float
    polar: float

    @property
    def rel_error(self) -> float:
        return abs(self.cylinder - self.polar) / max(abs(self.polar), 1e-300)


def check_transform_identities(u: SeparableConeFunction) -> tuple[IdentityCheck, IdentityCheck]:
    """L^2 isometry and energy identity, cylinder mode sums against polar quadrature."""
    b = energy_breakdown(u)
    parts = polar_parts(u)
    mass = IdentityCheck("l2_mass", b.l2_mass, polar_mass(parts, u.n, u.alpha - 4))
    energy = IdentityCheck("energy", b.total, polar_energy(parts, u.n, u.alpha))
    return mass, energy


def kelvin_transform(u: SeparableConeFunction) -> SeparableConeFunction:
    """x -> |x|^{2-n} u(x/|x|^2): profiles reflected, alpha replaced by 4 - alpha."""
    terms = tuple(
        replace(t, profile=t.profile.base if isinstance(t.profile, Reflected) else Reflected(t.profile))
        for t in u.terms
    )
    return SeparableConeFunction(u.n, 4 - u.alpha, terms, u.grid.reflected())


@dataclass(frozen=True)
class KelvinCheck:
    mass: IdentityCheck
    energy: IdentityCheck
    quotient: IdentityCheck


def check_kelvin(u: SeparableConeFunction) -> KelvinCheck:
    """Kelvin identities by direct polar quadrature of the inverted function.

    Compares int |x|^{a-4}|hat u|^2 with int |x|^{-a}|u|^2 and
    int |x|^a |Delta hat u|^2 with int |x|^{4-a}|Delta u|^2; hat u is built as
    r^{2-n} U(1/r) directly, not through the reflected profile.
    """
    a, n = u.alpha, u.n
    parts = polar_parts(u)
    hat = [(KelvinRadial(f, n), lam, (1.0 / hi, 1.0 / lo)) for f, lam, (lo, hi) in parts]
    m = IdentityCheck("kelvin_mass", polar_mass(hat, n, a - 4), polar_mass(parts, n, -a))
    e = IdentityCheck("kelvin_energy", polar_energy(hat, n, a), polar_energy(parts, n, 4 - a))
    q = IdentityCheck("kelvin_quotient", e.cylinder / m.cylinder, e.polar / m.polar)
    return KelvinCheck(m, e, q)


def scaling_quotients(b: EnergyBreakdown, t_values: Sequence[float]) -> np.ndarray:
    """Quotient of w(t s, sigma) for each t, from the breakdown of w."""
    if b.l2_mass <= 0:
        raise DegenerateInput("zero function")
    t = np.asarray(t_values, dtype=float)
    return (b.lw_term + t**4 * b.wss_term + t**2 * (b.grad_ws_term + b.ws_term)) / b.l2_mass


def builtin_family() -> tuple[Bump, ...]:
    """Five C^2 bumps at several centres and scales."""
    return (
        Bump(0.0, 1.0),
        Bump(0.5, 2.0),
        Bump(-1.5, 0.75),
        Bump(2.0, 3.0),
        Bump(-0.3, 1.5),
    )
