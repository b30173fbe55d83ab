"""Lyapunov exponents of the polynomial and tent families, and the
logarithmic-potential integrals that decompose them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError
from .maps import MapDescriptor, gen_logistic_coeffs, horner
from .numerics import QUAD_TOL, ToleranceSpec, quad_singular
from .transfer import invariant_density

BURN_IN = 100
CRITICAL_EPS = 1e-13


@dataclass(frozen=True)
class LyapunovResult:
    m: int
    value: float
    method: str  # quadrature | orbit_average | piecewise_exact
    error_estimate: float
    restarts: int = 0


def derivative_coeffs(m: int) -> np.ndarray:
    """Coefficients (highest degree first) of the degree-m map's derivative."""
    return np.asarray(gen_logistic_coeffs(m).derivative().coefficients, dtype=float)


def critical_points(m: int) -> np.ndarray:
    """Zeros of the degree-m map's derivative: 2 cos(j pi / m), j = 1..m-1."""
    return 2.0 * np.cos(np.pi * np.arange(m - 1, 0, -1) / m)


def roots_fm(m: int) -> np.ndarray:
    """The m real roots 2 cos((2j + 1) pi / (2m)), ascending in (-2, 2)."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    j = np.arange(m - 1, -1, -1)
    return 2.0 * np.cos((2 * j + 1) * np.pi / (2 * m))


def local_lyapunov(md: MapDescriptor, x: float) -> float:
    """log |f'(x)|; raises at tent breakpoints and polynomial critical points."""
    if md.family == "tent":
        t = x * md.m
        if abs(t - round(t)) < CRITICAL_EPS:
            raise SingularityError(f"tent map is not differentiable at x={x!r}")
        return math.log(md.m)
    if md.family == "logistic":
        d = md.r * (1.0 - 2.0 * x)
        if abs(d) < CRITICAL_EPS:
            raise SingularityError(f"critical point of the logistic map at x={x!r}")
        return math.log(abs(d))
    if md.family == "gen_logistic":
        d = horner(derivative_coeffs(md.m), x)
        if abs(d) < math.sqrt(CRITICAL_EPS):
            raise SingularityError(f"critical point at x={x!r}")
        return math.log(abs(d))
    raise ValueError(f"no local exponent for family {md.family!r}")


def average_lyapunov_quadrature(
    m: int, tol: ToleranceSpec = QUAD_TOL
) -> LyapunovResult:
    """Invariant average of log |f_m'| against the arcsine density.

    The integrand has logarithmic singularities at the m - 1 critical points
    and the density has inverse-square-root blow-ups at +-2; all are declared
    to the quadrature.  The result equals log m.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    dcoef = derivative_coeffs(m)

    def integrand(x: float) -> float:
        return math.log(abs(horner(dcoef, x))) * invariant_density("discriminant_D", x)

    sing = [-2.0, *critical_points(m), 2.0]
    val = quad_singular(integrand, -2.0, 2.0, sing, tol)
    return LyapunovResult(m, val, "quadrature", tol.abs_tol)


def average_lyapunov_orbit(
    m: int,
    x0: float,
    n: int,
    map_family: str = "gen_logistic",
) -> LyapunovResult:
    """Birkhoff average of log |f'| along one orbit, after a fixed burn-in.

    An orbit point landing within machine distance of a critical point is
    perturbed by 1e-9 and the restart is counted.  For the tent family the
    local exponent is log m everywhere, so the average is exact.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if n < 1:
        raise ValueError("n must be positive")
    if map_family == "tent":
        return LyapunovResult(m, math.log(m), "piecewise_exact", 0.0)
    if map_family != "gen_logistic":
        raise ValueError("orbit averages cover gen_logistic and tent families")
    if not -2.0 < x0 < 2.0:
        raise ValueError("x0 must lie in (-2, 2)")

    coeffs = tuple(float(c) for c in gen_logistic_coeffs(m).coefficients)
    crit = tuple(float(c) for c in critical_points(m))
    head, tail = coeffs[0], coeffs[1:]
    restarts = 0
    x = x0
    for _ in range(BURN_IN):
        acc = head
        for c in tail:
            acc = acc * x + c
        x = -2.0 if acc < -2.0 else (2.0 if acc > 2.0 else acc)

    orbit = np.empty(n)
    for i in range(n):
        if min(abs(c - x) for c in crit) < CRITICAL_EPS:
            x += 1e-9
            restarts += 1
        orbit[i] = x
        acc = head
        for c in tail:
            acc = acc * x + c
        x = -2.0 if acc < -2.0 else (2.0 if acc > 2.0 else acc)

    logs = np.log(np.abs(np.polyval(derivative_coeffs(m), orbit)))
    value = float(np.mean(logs))
    stderr = float(np.std(logs, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return LyapunovResult(m, value, "orbit_average", stderr, restarts)


def I_integral(a: float, tol: ToleranceSpec = QUAD_TOL) -> float:
    """(1/pi) integral of log |2 sin y - a| over [-pi/2, pi/2].

    This is the logarithmic potential of the arcsine law evaluated at ``a``;
    it vanishes identically on [-2, 2] and equals log((|a| + sqrt(a^2 - 4))/2)
    outside.  The integrand's singularity at y = asin(a/2) is declared.
    """
    sing = []
    if abs(a) <= 2.0:
        sing.append(math.asin(a / 2.0))

    def integrand(y: float) -> float:
        return math.log(abs(2.0 * math.sin(y) - a))

    val = quad_singular(integrand, -math.pi / 2.0, math.pi / 2.0, sing, tol)
    return val / math.pi


def I_integral_xform(a: float, tol: ToleranceSpec = QUAD_TOL) -> float:
    """Independent evaluation of the same potential in the x variable:
    (1/pi) integral of log |x - a| / sqrt(4 - x^2) over [-2, 2]."""

    def integrand(x: float) -> float:
        return math.log(abs(x - a)) / math.sqrt(4.0 - x * x)

    sing = [-2.0, 2.0]
    if -2.0 < a < 2.0:
        sing.append(a)
    return quad_singular(integrand, -2.0, 2.0, sorted(sing), tol) / math.pi
