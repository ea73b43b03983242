"""Dirichlet spectra of the Laplace-Beltrami operator on spherical domains.

Exact spectra are available for the full sphere, the hemisphere and arcs
(n = 2).  Geodesic caps in higher dimension are handled by separating the
azimuthal S^{n-2} harmonics of degree ``ell`` and discretising the remaining
polar Sturm-Liouville problem

    -(sin^{n-2} u')' + ell (ell + n - 3) sin^{n-4} u = lam sin^{n-2} u   on (0, theta)

with a conservative three-point scheme.  The same mode operators are reused
by :mod:`rellich.quotients` for the Navier and clamped angular quotients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import InvalidInput, NoRootError, NumericalFailure
from .geometry import ConeGeometry

MIN_NODES = 16


def harmonic_count(d: int, k: int) -> int:
    """Dimension of the space of degree-``k`` spherical harmonics in ``d`` variables."""
    if k < 0 or d < 1:
        return 0
    if k == 0:
        return 1
    if k == 1:
        return d
    return math.comb(d + k - 1, k) - math.comb(d + k - 3, k - 2)


def hemisphere_multiplicity(n: int, k: int) -> int:
    # degree-k harmonics in n variables that are odd in the last one
    return sum(harmonic_count(n - 1, k - j) for j in range(1, k + 1, 2))


@dataclass(frozen=True, order=True)
class SpectrumEntry:
    value: float
    ell: int
    j: int = 1
    multiplicity: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues with indices and multiplicities.

    Every eigenvalue strictly below ``bound`` is guaranteed to be listed;
    entries above it may be present but the list is not complete there.
    """

    entries: tuple[SpectrumEntry, ...]
    geometry: ConeGeometry
    bound: float

    def __post_init__(self) -> None:
        if not self.entries:
            raise InvalidInput("a spectrum needs at least one entry")
        vals = [e.value for e in self.entries]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise InvalidInput("spectrum entries must be sorted ascending")

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def contains(self, value: float, rtol: float = 1e-9) -> bool:
        return bool(np.any(np.isclose(self.values, value, rtol=rtol, atol=rtol)))


def full_sphere_spectrum(n: int, count: int) -> Spectrum:
    """First ``count`` distinct eigenvalues k(n-2+k) of S^{n-1}."""
    _check_n(n)
    _check_count(count)
    entries = tuple(
        SpectrumEntry(float(k * (n - 2 + k)), k, 1, harmonic_count(n, k)) for k in range(count)
    )
    return Spectrum(entries, ConeGeometry.full_sphere(n), entries[-1].value)


def half_sphere_spectrum(n: int, count: int) -> Spectrum:
    """First ``count`` Dirichlet eigenvalues k(k+n-2), k >= 1, of a hemisphere."""
    _check_n(n)
    _check_count(count)
    entries = tuple(
        SpectrumEntry(float(k * (k + n - 2)), k, 1, hemisphere_multiplicity(n, k))
        for k in range(1, count + 1)
    )
    return Spectrum(entries, ConeGeometry.half_sphere(n), entries[-1].value)


def arc_spectrum(theta: float, count: int) -> Spectrum:
    """Dirichlet eigenvalues (k pi / (2 theta))^2 of an arc of length 2 theta.

    The formula is inferred from the two-branch arc constant; it is the
    spectrum of -d^2/dx^2 on an interval of length 2 theta.
    """
    _check_theta(theta, closed=True)
    _check_count(count)
    entries = tuple(
        SpectrumEntry((k * math.pi / (2.0 * theta)) ** 2, k, 1, 1) for k in range(1, count + 1)
    )
    return Spectrum(entries, ConeGeometry.arc(theta), entries[-1].value)


@dataclass(frozen=True)
class SturmLiouvilleGrid:
    """Uniform interior grid on (0, theta): ``nodes`` points at i*h, h = theta/(nodes+1)."""

    nodes: int = 4000

    def __post_init__(self) -> None:
        if self.nodes < MIN_NODES:
            raise InvalidInput(f"grid too coarse: {self.nodes} nodes < {MIN_NODES}")

    def spacing(self, theta: float) -> float:
        return theta / (self.nodes + 1)

    def points(self, theta: float) -> np.ndarray:
        return self.spacing(theta) * np.arange(1, self.nodes + 1)

    def weights(self, n: int, theta: float) -> np.ndarray:
        return np.sin(self.points(theta)) ** (n - 2)

    def refined(self, factor: int = 2) -> "SturmLiouvilleGrid":
        return SturmLiouvilleGrid(self.nodes * factor)


class ModeOperator:
    """Discrete angular operator for one azimuthal degree ``ell`` on a cap.

    The stiffness matrix K and the lumped mass M (trapezoid weights
    sin^{n-2}(phi) h) define the symmetric tridiagonal S = M^{-1/2} K M^{-1/2};
    its eigenvalues approximate the Dirichlet eigenvalues of the mode.

    ell = 0 closes the pole with zero flux; ell >= 1 with u = 0.  For n = 2
    the "cap" is the arc (-theta, theta): ell = 0 carries the even functions
    (the midpoint is a node with half mass) and ell = 1 the odd ones.
    """

    def __init__(self, n: int, theta: float, ell: int, grid: SturmLiouvilleGrid):
        _check_theta(theta, closed=n == 2)
        if n < 2:
            raise InvalidInput(f"dimension must be >= 2, got {n}")
        if ell < 0 or (n == 2 and ell > 1):
            raise InvalidInput(f"no azimuthal modes of degree {ell} in dimension {n}")
        self.n, self.theta, self.ell, self.grid = n, float(theta), ell, grid
        h = grid.spacing(theta)
        center = n == 2 and ell == 0
        idx = np.arange(0 if center else 1, grid.nodes + 1)
        phi = h * idx
        w_right = _weight(n, h * (idx + 0.5))
        w_left = _weight(n, h * (idx - 0.5))
        if ell == 0:
            w_left[0] = 0.0
        mass = _weight(n, phi) * h
        if center:
            mass[0] = 0.5 * h
        stiff = (w_left + w_right) / h
        if ell > 0 and n > 2:
            stiff = stiff + h * ell * (ell + n - 3) * np.sin(phi) ** (n - 4)
        scale = 1.0 / np.sqrt(mass)
        self.h = h
        self.phi = phi
        self.mass = mass
        self.diag = stiff * scale * scale
        self.off = -(w_right[:-1] / h) * scale[:-1] * scale[1:]

    @property
    def size(self) -> int:
        return self.phi.size

    @property
    def wall_weight(self) -> float:
        """Trapezoid weight of the wall node phi = theta."""
        return float(_weight(self.n, np.array([self.theta]))[0] * self.h / 2)

    def eigenvalues(self, count: Optional[int] = None) -> np.ndarray:
        if count is None:
            return eigh_tridiagonal(self.diag, self.off, eigvals_only=True)
        count = min(count, self.size)
        return eigh_tridiagonal(
            self.diag, self.off, eigvals_only=True, select="i", select_range=(0, count - 1)
        )

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and orthonormal eigenvectors of the scaled operator S."""
        return eigh_tridiagonal(self.diag, self.off)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Discrete -Laplace-Beltrami (restricted to this mode) applied to nodal values."""
        sq = np.sqrt(self.mass)
        y = sq * u
        out = self.diag * y
        out[:-1] += self.off * y[1:]
        out[1:] += self.off * y[:-1]
        return out / sq


def _weight(n: int, phi: np.ndarray) -> np.ndarray:
    if n == 2:
        return np.ones_like(phi, dtype=float)
    return np.sin(phi) ** (n - 2)


def cap_spectrum_numeric(
    n: int,
    theta: float,
    ell_max: int = 8,
    j_max: int = 5,
    grid: SturmLiouvilleGrid = SturmLiouvilleGrid(),
) -> Spectrum:
    """Lowest ``j_max`` eigenvalues of each azimuthal degree 0..ell_max on a cap."""
    if n < 3:
        raise InvalidInput("numerical caps need n >= 3; arcs are exact (arc_spectrum)")
    _check_theta(theta)
    if ell_max < 0 or j_max < 1:
        raise InvalidInput("need ell_max >= 0 and j_max >= 1")
    entries = []
    bound = math.inf
    for ell in range(ell_max + 1):
        vals = ModeOperator(n, theta, ell, grid).eigenvalues(j_max)
        m = harmonic_count(n - 1, ell)
        entries.extend(SpectrumEntry(float(v), ell, j + 1, m) for j, v in enumerate(vals))
        bound = min(bound, float(vals[-1]))
        if ell == ell_max:
            # higher degrees start above the lowest eigenvalue of this one
            bound = min(bound, float(vals[0]))
    entries.sort(key=lambda e: (e.value, e.ell, e.j))
    return Spectrum(tuple(entries), ConeGeometry.cap(n, theta), bound)


def geometry_spectrum(
    geometry: ConeGeometry,
    count: int = 12,
    ell_max: int = 8,
    j_max: int = 5,
    grid: SturmLiouvilleGrid = SturmLiouvilleGrid(),
) -> Spectrum:
    """Spectrum of any supported geometry, exact where a formula exists."""
    if geometry.shape == "full":
        return full_sphere_spectrum(geometry.n, count)
    if geometry.shape == "half":
        return half_sphere_spectrum(geometry.n, count)
    if geometry.n == 2:
        return arc_spectrum(geometry.theta, count)
    return cap_spectrum_numeric(geometry.n, geometry.theta, ell_max, j_max, grid)


def first_eigenvalue(geometry: ConeGeometry, grid: SturmLiouvilleGrid = SturmLiouvilleGrid()) -> float:
    """Smallest Dirichlet eigenvalue of the domain (0 for the full sphere)."""
    if geometry.shape == "full":
        return 0.0
    if geometry.shape == "half":
        return float(geometry.n - 1)
    if geometry.n == 2:
        return (math.pi / (2.0 * geometry.theta)) ** 2
    return float(ModeOperator(geometry.n, geometry.theta, 0, grid).eigenvalues(1)[0])


def find_theta_star(
    n: int,
    target: float,
    grid: SturmLiouvilleGrid = SturmLiouvilleGrid(),
    bracket: Sequence[float] = (0.05, math.pi - 1e-3),
    xtol: float = 1e-12,
) -> float:
    """Cap radius whose first eigenvalue equals ``target``.

    The first eigenvalue decreases strictly with the radius, so the root is
    unique inside the bracket when it exists.
    """
    if n < 2:
        raise InvalidInput(f"dimension must be >= 2, got {n}")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < lo < hi < math.pi):
        raise InvalidInput(f"bad bracket {bracket!r}")

    def residual(theta: float) -> float:
        return first_eigenvalue(ConeGeometry.cap(n, theta), grid) - target

    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise NoRootError(
            f"target {target} outside the window ({f_hi + target:.6g}, {f_lo + target:.6g})"
        )
    theta = brentq(residual, lo, hi, xtol=xtol)
    if abs(residual(theta)) >= 1e-3:
        raise NumericalFailure(f"eigenvalue residual too large at theta={theta}")
    return float(theta)


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise InvalidInput(f"dimension must be an integer >= 2, got {n!r}")


def _check_count(count: int) -> None:
    if count < 1:
        raise InvalidInput(f"count must be >= 1, got {count}")


def _check_theta(theta: float, closed: bool = False) -> None:
    # arcs may reach theta = pi: the circle slit at one point
    if not (0.0 < theta < math.pi or (closed and theta == math.pi)):
        raise InvalidInput(f"theta must lie in (0, pi{']' if closed else ')'}, got {theta!r}")
