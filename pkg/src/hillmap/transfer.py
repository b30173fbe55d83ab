"""Density evolution under the piecewise-linear fold maps and their polynomial
conjugates: exact pushforwards of step densities, L1 distances, bounded
variation machinery, the arcsine-type invariant densities, and exact mixing
checks in rational arithmetic.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DomainError
from .numerics import QUAD_TOL, ToleranceSpec, quad_singular


@dataclass(frozen=True)
class StepDensity:
    """A piecewise-constant function on [edges[0], edges[-1]].

    Densities are nonnegative; signed step functions (differences of
    densities) are allowed so the pushforward can be tested for linearity.
    Outside its edge span a step density is understood as zero.
    """

    edges: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or v.ndim != 1 or e.size != v.size + 1 or v.size < 1:
            raise ValueError("need n+1 edges for n cell values")
        if not np.all(np.diff(e) > 0):
            raise ValueError("edges must be strictly increasing")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "StepDensity":
        return cls(np.array([lo, hi]), np.array([1.0 / (hi - lo)]))

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def mass(self) -> float:
        return float(np.dot(self.values, self.widths))

    def norm1(self) -> float:
        return float(np.dot(np.abs(self.values), self.widths))

    def normalized(self) -> "StepDensity":
        if np.any(self.values < 0):
            raise ValueError("cannot normalise a signed step function")
        return StepDensity(self.edges, self.values / self.mass())

    def cdf(self, x):
        """Integral over (-inf, x] (zero extension outside the span).

        The CDF of a step density is piecewise linear, so interpolation over
        the cumulative cell masses is exact.  Accepts scalars or arrays.
        """
        cum = np.concatenate([[0.0], np.cumsum(self.values * self.widths)])
        out = np.interp(x, self.edges, cum)
        return out if isinstance(x, np.ndarray) else float(out)

    def integral(self, a: float, b: float) -> float:
        return self.cdf(b) - self.cdf(a)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, xs, side="right") - 1, 0, len(self.values) - 1)
        out = np.where((xs >= self.edges[0]) & (xs <= self.edges[-1]), self.values[idx], 0.0)
        return out if isinstance(x, np.ndarray) else float(out)

    def simplify(self) -> "StepDensity":
        """Merge adjacent cells with identical values."""
        keep = np.concatenate([[True], self.values[1:] != self.values[:-1]])
        starts = np.nonzero(keep)[0]
        edges = np.concatenate([self.edges[starts], [self.edges[-1]]])
        return StepDensity(edges, self.values[starts])

    def to_csv_rows(self) -> list[tuple[float, float, float]]:
        return [
            (float(self.edges[i]), float(self.edges[i + 1]), float(v))
            for i, v in enumerate(self.values)
        ]

    def to_json(self) -> str:
        return json.dumps({"edges": self.edges.tolist(), "values": self.values.tolist()})


@dataclass(frozen=True)
class SmoothDensity:
    """A pointwise-evaluable density with declared singular points."""

    evaluation: Callable[[float], float]
    domain: tuple[float, float]
    singularities: tuple = field(default_factory=tuple)

    def __call__(self, x: float) -> float:
        return self.evaluation(x)


# Invariant densities ---------------------------------------------------------

def invariant_density(kind: str, x: float) -> float:
    """The arcsine-type invariant densities.

    ``logistic_q``: 1 / (pi sqrt(x (1 - x))) on (0, 1);
    ``discriminant_D``: 1 / (pi sqrt(4 - x^2)) on (-2, 2).
    """
    if kind == "logistic_q":
        if not 0.0 < x < 1.0:
            raise DomainError("q is defined on the open (0, 1)")
        return 1.0 / (math.pi * math.sqrt(x * (1.0 - x)))
    if kind == "discriminant_D":
        if not -2.0 < x < 2.0:
            raise DomainError("D is defined on the open (-2, 2)")
        return 1.0 / (math.pi * math.sqrt(4.0 - x * x))
    raise ValueError(f"unknown invariant density {kind!r}")


D_DENSITY = SmoothDensity(
    lambda x: invariant_density("discriminant_D", x), (-2.0, 2.0), (-2.0, 2.0)
)
Q_DENSITY = SmoothDensity(
    lambda x: invariant_density("logistic_q", x), (0.0, 1.0), (0.0, 1.0)
)


def invariant_cdf(delta: float) -> float:
    """CDF of the discriminant invariant density: 1/2 + asin(delta/2)/pi."""
    if not -2.0 <= delta <= 2.0:
        raise DomainError("delta must lie in [-2, 2]")
    return 0.5 + math.asin(delta / 2.0) / math.pi


def invariant_quantile(u: float) -> float:
    """Quantile of the discriminant invariant density: -2 cos(pi u)."""
    if not 0.0 <= u <= 1.0:
        raise DomainError("u must lie in [0, 1]")
    return -2.0 * math.cos(math.pi * u)


# Exact pushforward under the piecewise-linear folds ---------------------------

def _push_fold(p: StepDensity, slope: int) -> StepDensity:
    """Exact image density under the fold of slope +-``slope`` onto [0, 1].

    Every source cell is split at the fold breakpoints j/slope, mapped through
    its (single) linear branch onto [0, 1] with weight value/slope, and the
    overlapping images are summed by an event sweep over their endpoints.
    """
    lo, hi = p.domain
    if lo < -1e-12:
        raise DomainError("fold input must live on [0, inf)")
    j0 = int(math.floor(lo * slope))
    j1 = int(math.ceil(hi * slope))
    grid = np.arange(j0, j1 + 1) / slope
    edges = np.union1d(p.edges, grid[(grid > lo) & (grid < hi)])
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = p(mids)

    branch = np.floor(mids * slope).astype(int)
    up = branch % 2 == 0
    e_lo, e_hi = edges[:-1], edges[1:]
    ya = np.where(up, e_lo * slope - branch, -e_hi * slope + branch + 1)
    yb = np.where(up, e_hi * slope - branch, -e_lo * slope + branch + 1)
    weights = vals / slope

    nz = weights != 0.0
    ya, yb, weights = ya[nz], yb[nz], weights[nz]
    out_edges, inverse = np.unique(np.concatenate([ya, yb]), return_inverse=True)
    deltas = np.zeros(out_edges.size)
    np.add.at(deltas, inverse[: ya.size], weights)
    np.add.at(deltas, inverse[ya.size :], -weights)
    levels = np.cumsum(deltas)[:-1]
    if out_edges.size < 2:
        return StepDensity(np.array([0.0, 1.0]), np.array([0.0]))
    return StepDensity(out_edges, levels).simplify()


def pushforward_tent(p: StepDensity, m: int) -> StepDensity:
    """Exact transfer-operator image of ``p`` under the m-piece tent map."""
    lo, hi = p.domain
    if lo < -1e-12 or hi > 1.0 + 1e-12:
        raise DomainError("tent pushforward expects a density on [0, 1]")
    return _push_fold(p, m)


def pushforward_fold(p: StepDensity, l: int) -> StepDensity:
    """Exact image on [0, 1] of a compactly supported density on [0, inf)."""
    return _push_fold(p, l)


# Conjugate route for the polynomial maps --------------------------------------

def delta_to_kappa(p: StepDensity, resolution: int) -> StepDensity:
    """Project a density on [-2, 2] onto a uniform grid in the fold coordinate.

    kappa = arccos(delta/2)/pi; each kappa cell receives exactly the mass of
    its delta image, so the projection error is pure within-cell averaging.
    """
    k_edges = np.linspace(0.0, 1.0, resolution + 1)
    cum = p.cdf(2.0 * np.cos(np.pi * k_edges))
    masses = cum[:-1] - cum[1:]
    return StepDensity(k_edges, masses * resolution)


def kappa_to_delta(pk: StepDensity) -> StepDensity:
    """Inverse coordinate change of :func:`delta_to_kappa` (mass preserving)."""
    d_edges = 2.0 * np.cos(np.pi * pk.edges)[::-1]
    masses = (pk.values * pk.widths)[::-1]
    return StepDensity(d_edges, masses / np.diff(d_edges))


def pushforward_genlogistic(
    p: StepDensity, m: int, resolution: int = 2**14
) -> StepDensity:
    """Transfer-operator image under the degree-m trace polynomial.

    Works through the conjugacy delta = 2 cos(pi kappa): project onto a
    uniform kappa grid, push exactly through the m-piece tent map, and map
    back.  Mass is preserved to rounding.
    """
    lo, hi = p.domain
    if lo < -2.0 - 1e-12 or hi > 2.0 + 1e-12:
        raise DomainError("expected a density on [-2, 2]")
    pk = delta_to_kappa(p, resolution)
    qk = pushforward_tent(pk, m)
    return kappa_to_delta(qk)


def l1_to_uniform(pk: StepDensity) -> float:
    """Exact L1 distance on [0, 1] between a step density and the constant 1."""
    lo, hi = pk.domain
    d = float(np.dot(np.abs(pk.values - 1.0), pk.widths))
    return d + max(lo - 0.0, 0.0) + max(1.0 - hi, 0.0)


def uniform_kappa_projection(resolution: int) -> StepDensity:
    """Exact kappa projection of the uniform density on [-2, 2].

    The mass of the uniform density between the delta images of a kappa cell
    has the closed form (cos(pi a) - cos(pi b)) / 2.
    """
    k = np.linspace(0.0, 1.0, resolution + 1)
    masses = 0.5 * (np.cos(np.pi * k[:-1]) - np.cos(np.pi * k[1:]))
    return StepDensity(k, masses * resolution)


def evolve_genlogistic(
    m: int,
    steps: int,
    resolution: int = 2**14,
    initial: StepDensity | str = "uniform",
) -> tuple[list[dict], StepDensity]:
    """Iterate the exact transfer operator and record convergence.

    The evolution runs in the fold coordinate, where the invariant density is
    the constant 1 and the recorded ``l1_to_invariant`` is exact; it equals
    the L1 distance of the transported density to the arcsine density through
    the (measure-preserving) coordinate change.  Returns the per-step records
    and the final density mapped back to [-2, 2].
    """
    if isinstance(initial, str):
        if initial != "uniform":
            raise ValueError("initial must be 'uniform' or a StepDensity")
        pk = uniform_kappa_projection(resolution)
    else:
        pk = delta_to_kappa(initial, resolution)
    records = []
    for n in range(steps + 1):
        records.append(
            {
                "step": n,
                "l1_to_invariant": l1_to_uniform(pk),
                "mass": pk.mass(),
                "resolution": int(pk.values.size),
            }
        )
        if n < steps:
            pk = pushforward_tent(pk, m)
    return records, kappa_to_delta(pk)


# Distances and variation -------------------------------------------------------

def l1_distance(
    p: StepDensity,
    q: StepDensity | SmoothDensity,
    tol: ToleranceSpec = QUAD_TOL,
) -> float:
    """L1 distance, exact for two step densities (zero-extended to a common
    span), quadrature against a smooth density with declared singularities."""
    if isinstance(q, StepDensity):
        edges = np.union1d(p.edges, q.edges)
        mids = 0.5 * (edges[:-1] + edges[1:])
        return float(np.dot(np.abs(p(mids) - q(mids)), np.diff(edges)))

    qlo, qhi = q.domain
    plo, phi = p.domain
    if plo < qlo - 1e-9 or phi > qhi + 1e-9:
        raise DomainError("step density exceeds the smooth density's domain")
    cells = list(zip(p.edges[:-1], p.edges[1:], p.values))
    # per-cell floor: near a singular endpoint QUADPACK cannot certify much
    # below ~1e-9 per panel, and the aggregate stays far inside any use here
    budget = ToleranceSpec(
        max(tol.abs_tol / (len(cells) + 2), 1e-8), tol.rel_tol, tol.max_steps
    )
    total = 0.0
    for lo, hi, v in cells:
        sing = [s for s in q.singularities if lo <= s <= hi]
        total += quad_singular(lambda x: abs(v - q(x)), lo, hi, sing, budget)
    # tails of q outside the step support
    if plo > qlo:
        total += quad_singular(q, qlo, plo, [s for s in q.singularities if s <= plo], budget)
    if phi < qhi:
        total += quad_singular(q, phi, qhi, [s for s in q.singularities if s >= phi], budget)
    return total


def variation(p: StepDensity) -> float:
    """Total variation of the zero-extended step function: both boundary
    values plus all interior jumps."""
    v = p.values
    return float(abs(v[0]) + np.sum(np.abs(np.diff(v))) + abs(v[-1]))


def _sampled_variation(q: SmoothDensity, n: int) -> float:
    lo, hi = q.domain
    xs = np.linspace(lo, hi, n + 1)[1:-1]  # avoid endpoint singularities
    vals = np.array([q(x) for x in xs])
    return float(np.sum(np.abs(np.diff(vals))))


def step_approximate(q: SmoothDensity, l: int) -> StepDensity:
    """Width-1/l midpoint-sampled step approximation of a BV density.

    The approximation error in L1 is bounded by ess V(q) / l, which is only
    meaningful for densities of bounded variation; unbounded variation is
    detected by sampling and reported as a precondition violation.
    """
    if l < 1:
        raise ValueError("l must be a positive integer")
    lo, hi = q.domain
    n_cells = round((hi - lo) * l)
    if n_cells < 1 or abs(n_cells - (hi - lo) * l) > 1e-9:
        raise ValueError("domain width must be a multiple of 1/l")
    coarse = _sampled_variation(q, 4096)
    fine = _sampled_variation(q, 8192)
    if fine > 1.25 * coarse + 1e-9:
        raise DomainError(
            "density is not of bounded variation (sampled variation diverges)"
        )
    edges = lo + np.arange(n_cells + 1) / l
    mids = 0.5 * (edges[:-1] + edges[1:])
    return StepDensity(edges, np.array([q(x) for x in mids]))


def counterexample_density(i_max: int) -> StepDensity:
    """Truncation of the unbounded-variation density sum 2^(i/2) on the dyadic
    cells (2^-(i+1), 2^-i], i = 0..i_max-1.

    Its fold images lose only O(2^(-n/2)) per doubling instead of O(2^-n),
    which shows the bounded-variation decay rate is sharp about its
    hypothesis.  The truncated mass is (1 - 2^(-i_max/2)) (2 + sqrt(2)) / 2.
    """
    if i_max < 1:
        raise ValueError("i_max must be a positive integer")
    edges = [2.0 ** (-(i + 1)) for i in range(i_max)][::-1] + [1.0]
    values = [2.0 ** (i / 2.0) for i in range(i_max)][::-1]
    return StepDensity(np.array(edges), np.array(values))


COUNTEREXAMPLE_LIMIT_MASS = (2.0 + math.sqrt(2.0)) / 2.0
COUNTEREXAMPLE_ERROR_CONSTANT = (2.0 + math.sqrt(2.0)) / 4.0


# Exact preimages and mixing ----------------------------------------------------

def _exactish(x):
    return Fraction(x) if isinstance(x, (int, Fraction)) else x


def preimage_intervals(m: int, n: int, target: tuple) -> list[tuple]:
    """The n-fold tent-map preimage of an interval, as disjoint intervals.

    Pulls the target back through each linear branch recursively; adjacent
    intervals that share an endpoint are merged.  Integer or Fraction inputs
    are processed in exact rational arithmetic.
    """
    if m < 1 or n < 0:
        raise ValueError("need m >= 1 and n >= 0")
    a, b = (_exactish(v) for v in target)
    if a > b or a < 0 or b > 1:
        raise DomainError("target must be a subinterval of [0, 1]")
    intervals = [(a, b)]
    for _ in range(n):
        pulled = []
        for lo, hi in intervals:
            for j in range(m):
                if j % 2 == 0:
                    pulled.append(((lo + j) / m, (hi + j) / m))
                else:
                    pulled.append(((j + 1 - hi) / m, (j + 1 - lo) / m))
        pulled.sort()
        merged = [pulled[0]]
        for lo, hi in pulled[1:]:
            if lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
            else:
                merged.append((lo, hi))
        intervals = merged
    return intervals


def mixing_correlation(m: int, n: int, A: tuple, B: tuple):
    """Lebesgue(g_m^-n(A) intersect B) - |A| |B|, exact for rational inputs.

    Vanishes identically once n exceeds the digit resolution of m-adic
    intervals A and B, which is the strong-mixing mechanism of the tent maps.
    """
    a1, a2 = (_exactish(v) for v in A)
    b1, b2 = (_exactish(v) for v in B)
    inter = 0 * a1
    for lo, hi in preimage_intervals(m, n, (a1, a2)):
        left = max(lo, b1)
        right = min(hi, b2)
        if right > left:
            inter += right - left
    return inter - (a2 - a1) * (b2 - b1)
