"""Angular domains of cones in R^n."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

from .errors import InvalidInput

Shape = Literal["full", "half", "cap"]


@dataclass(frozen=True)
class ConeGeometry:
    """Dimension ``n`` and the spherical domain generating the cone.

    An arc (n = 2) may have theta = pi, the circle slit at one point.

    ``shape`` is ``"full"`` (the whole sphere S^{n-1}), ``"half"`` (a
    hemisphere) or ``"cap"`` (a geodesic ball of radius ``theta``).  For
    ``n == 2`` a cap is an arc of length ``2 * theta``.
    """

    n: int
    shape: Shape = "full"
    theta: Optional[float] = None

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise InvalidInput(f"dimension must be an integer >= 2, got {self.n!r}")
        if self.shape not in ("full", "half", "cap"):
            raise InvalidInput(f"unknown shape {self.shape!r}")
        if self.shape == "cap":
            if self.theta is None or not (
                0.0 < self.theta < math.pi or (self.n == 2 and self.theta == math.pi)
            ):
                raise InvalidInput(f"cap radius must lie in (0, pi), got {self.theta!r}")
        elif self.theta is not None:
            raise InvalidInput("theta is only meaningful for caps")

    @classmethod
    def full_sphere(cls, n: int) -> "ConeGeometry":
        return cls(n, "full")

    @classmethod
    def half_sphere(cls, n: int) -> "ConeGeometry":
        return cls(n, "half")

    @classmethod
    def cap(cls, n: int, theta: float) -> "ConeGeometry":
        return cls(n, "cap", float(theta))

    @classmethod
    def arc(cls, theta: float) -> "ConeGeometry":
        return cls(2, "cap", float(theta))

    @property
    def is_proper(self) -> bool:
        """True when the closure of the domain is not the whole sphere."""
        return self.shape != "full" and self.radius < math.pi

    @property
    def radius(self) -> float:
        """Geodesic radius; a hemisphere is the cap of radius pi/2."""
        if self.shape == "full":
            return math.pi
        if self.shape == "half":
            return math.pi / 2
        return float(self.theta)

    def as_cap(self) -> "ConeGeometry":
        if self.shape == "full":
            raise InvalidInput("the full sphere is not a cap")
        return ConeGeometry(self.n, "cap", self.radius)
