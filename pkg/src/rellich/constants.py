"""Closed-form Rellich constants on cones, and parameter sweeps over them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Callable, Literal, NamedTuple, Optional, Sequence, Union

from .errors import InsufficientSpectrum, InvalidInput
from .geometry import ConeGeometry
from .spectrum import Spectrum, SpectrumEntry, arc_spectrum

RESONANCE_TOL = 1e-9


def _check_n(n: int) -> None:
    if int(n) != n or n < 2:
        raise InvalidInput(f"invalid dimension {n!r}: need an integer n >= 2")


def gamma(n: int, alpha: float) -> float:
    """((n-2)/2)^2 - ((alpha-2)/2)^2."""
    _check_n(n)
    return ((n - 2) / 2) ** 2 - ((alpha - 2) / 2) ** 2


def gamma_bar(n: int, alpha: float) -> float:
    """((n-2)/2)^2 + ((alpha-2)/2)^2."""
    _check_n(n)
    return ((n - 2) / 2) ** 2 + ((alpha - 2) / 2) ** 2


@dataclass(frozen=True)
class ReducedCoefficients:
    gamma: float
    gamma_bar: float

    @classmethod
    def of(cls, n: int, alpha: float) -> "ReducedCoefficients":
        return cls(gamma(n, alpha), gamma_bar(n, alpha))


class SpectralDistance(NamedTuple):
    value: float
    entry: SpectrumEntry

    @property
    def eigenvalue(self) -> float:
        return self.entry.value


def spectral_distance_sq(gamma_: float, spectrum: Spectrum) -> SpectralDistance:
    """Squared distance from -gamma to the spectrum, with the attaining entry.

    Raises InsufficientSpectrum when an unlisted eigenvalue above the
    spectrum's completeness bound could still be closer to -gamma.
    """
    best: Optional[SpectrumEntry] = None
    best_val = math.inf
    for e in spectrum.entries:
        d = (e.value + gamma_) ** 2
        if d < best_val:
            best, best_val = e, d
    if spectrum.bound + gamma_ < math.sqrt(best_val):
        raise InsufficientSpectrum(
            f"spectrum complete only below {spectrum.bound:.6g}; cannot certify the distance "
            f"from {-gamma_:.6g} (extend the spectrum)"
        )
    return SpectralDistance(best_val, best)


def _min_branches(gamma_: float, eig: Callable[[int], float], k0: int) -> tuple[float, int]:
    # (gamma + t)^2 increases for t >= |gamma|: stop one index past the first
    # eigenvalue reaching |gamma| + 1.
    k = k0
    while eig(k) < abs(gamma_) + 1:
        k += 1
    best, arg = math.inf, k0
    for j in range(k0, k + 2):
        v = (gamma_ + eig(j)) ** 2
        if v < best:
            best, arg = v, j
    return best, arg


def _sphere_eig(n: int) -> Callable[[int], float]:
    return lambda k: float(k * (n - 2 + k))


def mu_whole_space(n: int, alpha: float) -> float:
    """Best constant on R^n minus the origin: min over k >= 0 of (gamma + k(n-2+k))^2."""
    return _min_branches(gamma(n, alpha), _sphere_eig(n), 0)[0]


def mu_halfspace_navier(n: int, alpha: float) -> float:
    """Best Navier constant on a half-space: the same minimum over k >= 1."""
    return _min_branches(gamma(n, alpha), _sphere_eig(n), 1)[0]


def mu_radial(n: int, alpha: float) -> float:
    return gamma(n, alpha) ** 2


def mu_nonradial(n: int, alpha: float) -> float:
    return _min_branches(gamma(n, alpha), _sphere_eig(n), 1)[0]


def is_resonant(n: int, alpha: float) -> bool:
    """True when alpha is in {n, n+2, ...} or {4-n, 2-n, ...}, i.e. the constant vanishes."""
    _check_n(n)
    for x in ((alpha - n) / 2, (4 - n - alpha) / 2):
        r = round(x)
        if r >= 0 and abs(x - r) <= RESONANCE_TOL:
            return True
    return False


def _check_theta(theta: float) -> None:
    # theta = pi is the circle slit at one point
    if not (0.0 < theta <= math.pi):
        raise InvalidInput(f"theta must lie in (0, pi], got {theta!r}")


def arc_mu_navier(theta: float, alpha: float) -> float:
    """Navier constant of the planar cone over an arc of length 2 theta."""
    _check_theta(theta)
    c = math.pi / (2.0 * theta)
    return _min_branches(gamma(2, alpha), lambda k: (k * c) ** 2, 1)[0]


def arc_breakpoints(alpha: float, lo: float, hi: float) -> list[float]:
    """Zeros and branch crossings of theta -> arc_mu_navier(theta, alpha) in [lo, hi].

    With a = -gamma_{2,alpha} > 0 the k-th branch vanishes at
    theta = k pi / (2 sqrt(a)) and branches k, k+1 cross (local maxima) at
    theta = pi sqrt((k^2 + (k+1)^2) / (8 a)).
    """
    a = -gamma(2, alpha)
    if a <= 0:
        return []
    pts = []
    k = 1
    while True:
        zero = k * math.pi / (2.0 * math.sqrt(a))
        cross = math.pi * math.sqrt((k * k + (k + 1) ** 2) / (8.0 * a))
        if zero > hi:
            break
        pts.extend(p for p in (zero, cross) if lo <= p <= hi and p < math.pi)
        k += 1
    return sorted(pts)


def resonant_alphas(n: int, lo: float, hi: float) -> list[float]:
    _check_n(n)
    out = set()
    j = 0
    while n + 2 * j <= hi or 4 - n - 2 * j >= lo:
        for a in (n + 2 * j, 4 - n - 2 * j):
            if lo <= a <= hi:
                out.add(float(a))
        j += 1
    return sorted(out)


Param = Literal["alpha", "theta"]
Domain = Literal["whole", "halfspace", "radial", "nonradial", "arc"]


@dataclass(frozen=True)
class SweepTable:
    """Parameter samples (strictly increasing) and the constant at each."""

    param: str
    points: tuple[float, ...]
    values: tuple[float, ...]
    fmt: str = "csv"

    def __post_init__(self) -> None:
        if len(self.points) != len(self.values):
            raise InvalidInput("one value per sample point is required")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise InvalidInput("sample points must be strictly increasing")

    def rows(self) -> list[tuple[str, str]]:
        return [(repr(float(p)), format_value(v)) for p, v in zip(self.points, self.values)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "value"])
        w.writerows(self.rows())
        return buf.getvalue()

    def argmax(self) -> int:
        return max(range(len(self.values)), key=self.values.__getitem__)

    def local_maxima(self) -> list[int]:
        """Interior indices whose value is >= both neighbours and > at least one."""
        v = self.values
        return [
            i
            for i in range(1, len(v) - 1)
            if v[i] >= v[i - 1] and v[i] >= v[i + 1] and (v[i] > v[i - 1] or v[i] > v[i + 1])
        ]


def format_value(v: float) -> str:
    """15 significant digits; negative zero printed as 0."""
    return format(float(v) + 0.0, ".15g")


def decimal_grid(start: Union[float, str], stop: Union[float, str], step: Union[float, str]) -> list[float]:
    """start, start+step, ... <= stop, accumulated in decimal so 2.0 lands on 2.0."""
    d0, d1, ds = (Decimal(str(x)) for x in (start, stop, step))
    if ds <= 0:
        raise InvalidInput(f"step must be positive, got {step}")
    if d1 <= d0:
        raise InvalidInput(f"empty range [{start}, {stop}]")
    count = int((d1 - d0) / ds) + 1
    return [float(d0 + i * ds) for i in range(count)]


def sweep(
    param: Param,
    start: Union[float, str],
    stop: Union[float, str],
    step: Union[float, str],
    n: int = 2,
    alpha: float = 0.0,
    domain: Domain = "whole",
    breakpoints: bool = True,
    fmt: str = "csv",
) -> SweepTable:
    """Tabulate a closed-form constant along alpha or along the arc radius theta.

    With ``breakpoints`` the exact zeros and branch crossings inside the range
    are merged into the grid, so curve extrema appear as samples.
    """
    _check_n(n)
    pts = decimal_grid(start, stop, step)
    lo, hi = pts[0], float(Decimal(str(stop)))
    if param == "alpha":
        funcs = {
            "whole": mu_whole_space,
            "halfspace": mu_halfspace_navier,
            "radial": mu_radial,
            "nonradial": mu_nonradial,
        }
        if domain not in funcs:
            raise InvalidInput(f"alpha sweeps support {sorted(funcs)}, not {domain!r}")
        if breakpoints and domain in ("whole", "nonradial", "halfspace"):
            pts = _merge(pts, resonant_alphas(n, lo, hi))
        f = funcs[domain]
        vals = [f(n, a) for a in pts]
    elif param == "theta":
        if n != 2:
            raise InvalidInput("closed-form theta sweeps exist for arcs (n = 2) only")
        if not (0.0 < lo and hi < math.pi):
            raise InvalidInput("theta range must lie inside (0, pi)")
        if breakpoints:
            pts = _merge(pts, arc_breakpoints(alpha, lo, hi))
        vals = [arc_mu_navier(t, alpha) for t in pts]
    else:
        raise InvalidInput(f"unknown sweep parameter {param!r}")
    return SweepTable(param, tuple(pts), tuple(vals), fmt)


def _merge(grid: Sequence[float], extra: Sequence[float], tol: float = 1e-12) -> list[float]:
    out = list(grid)
    for x in extra:
        if not any(abs(x - g) <= tol * max(1.0, abs(x)) for g in out):
            out.append(x)
    return sorted(out)


def spectrum_for_arc(theta: float, alpha: float) -> Spectrum:
    """Arc spectrum long enough to certify the distance from -gamma_{2,alpha}."""
    need = abs(gamma(2, alpha)) + 1
    count = max(2, int(math.ceil(2 * theta * math.sqrt(need) / math.pi)) + 2)
    return arc_spectrum(theta, count)


__all__ = [
    "ConeGeometry",
    "ReducedCoefficients",
    "SpectralDistance",
    "SweepTable",
    "arc_breakpoints",
    "arc_mu_navier",
    "decimal_grid",
    "format_value",
    "gamma",
    "gamma_bar",
    "is_resonant",
    "mu_halfspace_navier",
    "mu_nonradial",
    "mu_radial",
    "mu_whole_space",
    "resonant_alphas",
    "spectral_distance_sq",
    "spectrum_for_arc",
    "sweep",
]
