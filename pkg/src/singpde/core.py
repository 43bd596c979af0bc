"""Shared scalar utilities: weight functions, disc/sector geometry, grids.

The admissible time weights form a closed two-parameter family,

    mu(t) = t**alpha            (alpha > 0), or
    mu(t) = log(1/t)**(-beta)   (beta > 1, requires T0 < 1),

chosen so that the accumulated weight phi(t) = integral_0^t mu(s)/s ds has
an exact closed form (t**alpha / alpha, resp. log(1/t)**(1-beta)/(beta-1)).
An adaptive quadrature fallback is kept for cross-checking the closed
forms; both must agree to high relative accuracy.

Space domains are open discs D_R = {|x| < R} and sectors
S(theta, R) = {0 < |x| < R, |arg x| < theta} with the logarithmic/angular
boundary distance d_S(x) = min(log(R/|x|), theta - |arg x|), which is
positive exactly on the open sector.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad


class SingpdeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SingpdeError):
    """An argument lies outside the region an operation is defined on."""


# ---------------------------------------------------------------------------
# weight functions


@dataclass(frozen=True)
class WeightFn:
    """Admissible weight mu(t) on (0, T0].

    kind "power" uses mu(t) = t**alpha; kind "log-power" uses
    mu(t) = log(1/t)**(-beta).  Both are positive, continuous, increasing
    on (0, T0] with integrable mu(s)/s, and vanish as t -> +0.
    """

    kind: str
    alpha: float = 1.0
    beta: float = 2.0
    T0: float = 0.3

    def __post_init__(self):
        if self.kind not in ("power", "log-power"):
            raise DomainError(f"unknown weight kind {self.kind!r}")
        if self.T0 <= 0:
            raise DomainError("T0 must be positive")
        if self.kind == "power" and self.alpha <= 0:
            raise DomainError("power weight needs alpha > 0")
        if self.kind == "log-power":
            if self.beta <= 1:
                raise DomainError("log-power weight needs beta > 1")
            if self.T0 >= 1:
                raise DomainError("log-power weight needs T0 < 1")

    def mu(self, t: float) -> float:
        if not 0 < t <= self.T0:
            raise DomainError(f"t={t} outside (0, {self.T0}]")
        if self.kind == "power":
            return t ** self.alpha
        return math.log(1.0 / t) ** (-self.beta)


def weight_eval(w: WeightFn, t: float) -> float:
    """Value of mu(t); raises DomainError for t outside (0, T0]."""
    return w.mu(t)


@dataclass(frozen=True)
class PhiWeight:
    """Accumulated weight phi(t) = integral_0^t mu(s)/s ds.

    Increasing on (0, T0] with phi(t) -> 0 as t -> +0.  `value` uses the
    closed form; `quadrature` integrates numerically (substituting
    s = exp(-y), which removes the endpoint singularity) and exists to
    audit the closed form.
    """

    weight: WeightFn

    def value(self, t: float) -> float:
        w = self.weight
        if not 0 < t <= w.T0:
            raise DomainError(f"t={t} outside (0, {w.T0}]")
        if w.kind == "power":
            return t ** w.alpha / w.alpha
        return math.log(1.0 / t) ** (1.0 - w.beta) / (w.beta - 1.0)

    def quadrature(self, t: float, rel_tol: float = 1e-10) -> float:
        w = self.weight
        if not 0 < t <= w.T0:
            raise DomainError(f"t={t} outside (0, {w.T0}]")
        y0 = math.log(1.0 / t)
        if w.kind == "power":
            integrand = lambda y: math.exp(-w.alpha * y)
        else:
            integrand = lambda y: y ** (-w.beta)
        val, _ = quad(integrand, y0, np.inf, epsabs=0.0, epsrel=rel_tol, limit=200)
        return val


def phi_eval(w: WeightFn, t: float) -> float:
    """Closed-form phi(t) for the weight w."""
    return PhiWeight(w).value(t)


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class Disc:
    """Open disc D_R = {x in C : |x| < R}."""

    R: float

    def __post_init__(self):
        if self.R <= 0:
            raise DomainError("disc radius must be positive")

    def contains(self, x: complex) -> bool:
        return abs(x) < self.R


@dataclass(frozen=True)
class Sector:
    """Open sector S(theta, R) = {0 < |x| < R, |arg x| < theta}.

    Membership uses the principal argument in (-pi, pi]; the sectors in
    use never reach the cut (theta < pi is enforced).
    """

    theta: float
    R: float

    def __post_init__(self):
        if not 0 < self.theta < math.pi:
            raise DomainError("sector opening must lie in (0, pi)")
        if self.R <= 0:
            raise DomainError("sector radius must be positive")

    def contains(self, x: complex) -> bool:
        r = abs(x)
        if r == 0 or r >= self.R:
            return False
        return abs(cmath.phase(x)) < self.theta

    def distance(self, x: complex) -> float:
        return sector_distance(self, x)

    def euclid_margin(self, x: complex) -> float:
        """Euclidean distance from x to the sector boundary (lower bound)."""
        r = abs(x)
        ang = self.theta - abs(cmath.phase(x))
        return min(self.R - r, r * math.sin(min(ang, math.pi / 2)), r)


def sector_distance(s: Sector, x: complex) -> float:
    """Boundary distance d_S(x) = min(log(R/|x|), theta - |arg x|).

    Positive iff x is interior.  x = 0 is outside every sector and has no
    argument, so it is rejected.
    """
    if x == 0:
        raise DomainError("sector distance undefined at x = 0")
    return min(math.log(s.R / abs(x)), s.theta - abs(cmath.phase(x)))


def shrunk_sector(s: Sector, eta: float) -> Sector:
    """The concentric sector S(eta*theta, eta*R) for 0 < eta <= 1."""
    if not 0 < eta <= 1:
        raise DomainError(f"eta={eta} outside (0, 1]")
    return Sector(eta * s.theta, eta * s.R)


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class Grid:
    """Deterministic sample grid: descending times x space points.

    Times are a geometric ladder (strictly positive, sorted descending so
    consumers walk toward the singular time).  Space points lie strictly
    inside the declared domain.  No randomness anywhere: identical calls
    produce identical grids.
    """

    times: tuple
    points: tuple

    @staticmethod
    def geometric_times(t_max: float, t_min: float, n: int) -> tuple:
        if not 0 < t_min < t_max:
            raise DomainError("need 0 < t_min < t_max")
        if n < 2:
            raise DomainError("need at least two time samples")
        ratio = (t_min / t_max) ** (1.0 / (n - 1))
        return tuple(t_max * ratio ** k for k in range(n))

    @staticmethod
    def disc_points(disc: Disc, n_circles: int = 4, n_angles: int = 16) -> tuple:
        pts = []
        for i in range(1, n_circles + 1):
            r = disc.R * i / (n_circles + 1)
            for k in range(n_angles):
                ang = 2 * math.pi * k / n_angles
                pts.append(r * cmath.exp(1j * ang))
        return tuple(pts)

    @staticmethod
    def sector_points(sector: Sector, n_radii: int = 8, n_angles: int = 8,
                      r_lo_frac: float = 0.02) -> tuple:
        # log-radius x angle lattice, strictly interior
        pts = []
        lo = math.log(sector.R * r_lo_frac)
        hi = math.log(sector.R)
        dlog = (hi - lo) / n_radii
        for i in range(n_radii):
            r = math.exp(hi - (i + 0.5) * dlog)
            for j in range(n_angles):
                ang = -sector.theta + sector.theta * (2 * j + 1) / n_angles
                pts.append(r * cmath.exp(1j * ang))
        return tuple(pts)

    @classmethod
    def for_disc(cls, disc: Disc, t_max: float, t_min: float, n_times: int = 30,
                 n_circles: int = 4, n_angles: int = 16) -> "Grid":
        return cls(cls.geometric_times(t_max, t_min, n_times),
                   cls.disc_points(disc, n_circles, n_angles))

    @classmethod
    def for_sector(cls, sector: Sector, t_max: float, t_min: float,
                   n_times: int = 30, n_radii: int = 8, n_angles: int = 8) -> "Grid":
        return cls(cls.geometric_times(t_max, t_min, n_times),
                   cls.sector_points(sector, n_radii, n_angles))


# ---------------------------------------------------------------------------
# numerical differentiation of holomorphic functions


def cauchy_derivative(fn, x: complex, radius: float, n: int = 32) -> complex:
    """Derivative of a holomorphic fn at x via a circle of the given radius.

    Trapezoid quadrature of the Cauchy integral; spectrally accurate when
    fn is holomorphic on the closed circle.  The caller must pick a radius
    that stays inside fn's domain.
    """
    if radius <= 0:
        raise DomainError("cauchy_derivative needs a positive radius")
    ks = np.arange(n)
    phases = np.exp(2j * math.pi * ks / n)
    vals = np.asarray([fn(x + radius * ph) for ph in phases], dtype=complex)
    return complex(np.sum(vals * np.conj(phases)) / (n * radius))
