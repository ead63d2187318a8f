"""Derivative-free maximization of the shape functionals over parametric
families, the volume-constrained slab-cut family, and the divergent
union-of-balls sequence with certified G intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import betainc

from . import exact_ellipsoid as exact
from . import functionals, geometry
from .errors import (
    InternalConsistencyError,
    ShapeFnError,
    UnsupportedRepresentationError,
    ValidationError,
)
from .estimators import EstimatorConfig
from .functionals import FunctionalId, evaluate
from .geometry import Ball, BallUnion, Capsule, Ellipsoid, Polytope, hull_2d

_THETA_CLIP = 10.0  # log-axis range; keeps the parameter-to-body map total


class SlabBody:
    """Axis-aligned ellipsoid cut by the symmetric slab |x_d| <= h a_d."""

    def __init__(self, semi_axes, h):
        a = np.asarray(semi_axes, dtype=float)
        if a.ndim != 1 or a.size < 2 or np.any(a <= 0):
            raise ValidationError("need positive semi-axes")
        if not 0.0 < h <= 1.0:
            raise ValidationError("slab fraction h must be in (0, 1]")
        self.axes = a
        self.h = float(h)
        self.dimension = a.size
        self.ellipsoid = Ellipsoid(a)

    def measure(self):
        d = self.dimension
        full = geometry.unit_ball_volume(d) * float(np.prod(self.axes))
        return full * slab_volume_fraction(d, self.h)

    def signed_distance(self, P):
        # interior: min of member distances; exterior: max of member signed
        # distances (a safe lower bound near the cut edge)
        sd_e = geometry.signed_distance(self.ellipsoid, P)
        sd_s = np.abs(P[:, -1]) - self.h * self.axes[-1]
        return np.maximum(np.atleast_1d(sd_e), sd_s)

    def distance_lower(self, P):
        g = np.sqrt(np.sum((P / self.axes) ** 2, axis=1))
        lb_e = np.abs(g - 1.0) * float(self.axes.min())
        sd_s = np.abs(P[:, -1]) - self.h * self.axes[-1]
        inside = (g <= 1.0) & (sd_s <= 0.0)
        out = np.maximum(np.where(g > 1.0, lb_e, 0.0), np.maximum(sd_s, 0.0))
        return np.where(inside, np.minimum(lb_e, -sd_s), out)

    def bounding_ball(self):
        return np.zeros(self.dimension), float(self.axes.max())

    def bounding_box(self):
        hi = self.axes.copy()
        hi[-1] *= self.h
        return -hi, hi

    def diameter_inradius(self):
        # conservative pair: diameter upper bound (projection argument),
        # inradius lower bound (centered ball)
        a = self.axes
        diam = 2.0 * min(float(a.max()),
                         math.hypot(float(a[:-1].max()), self.h * a[-1]))
        r = min(float(a.min()), self.h * float(a[-1]))
        return diam, r


def slab_volume_fraction(d, h):
    """|B_1 cut by |x_d| <= h| / |B_1| (same fraction for any ellipsoid)."""
    if h >= 1.0:
        return 1.0
    return float(betainc(0.5, (d + 1.0) / 2.0, h * h))


def slab_fraction_inverse(d, frac):
    """Smallest h with slab_volume_fraction(d, h) >= frac."""
    if frac >= 1.0:
        return 1.0
    return float(brentq(lambda h: slab_volume_fraction(d, h) - frac,
                        1e-12, 1.0, xtol=1e-13))


def _cut_ellipse_polygon(axes, h, n_points=256):
    """Planar ellipse cut by |y| <= h a_2, as the hull of boundary samples."""
    phi = math.asin(min(h, 1.0))
    t = np.linspace(-phi, phi, n_points // 2)
    arcs = np.concatenate([t, math.pi - t[::-1]])
    pts = np.stack([axes[0] * np.cos(arcs), axes[1] * np.sin(arcs)], axis=-1)
    return hull_2d(pts)


@dataclass(frozen=True)
class Family:
    """Parametric shape family over log semi-axes (last pinned to 0)."""

    kind: str  # ellipsoids | boxes | capsules | ellipsoid_slab
    dim: int
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind not in ("ellipsoids", "boxes", "capsules", "ellipsoid_slab"):
            raise ValidationError(f"unknown family {self.kind!r}")
        if self.dim < 2:
            raise ValidationError("need dim >= 2")
        if self.kind == "boxes" and self.dim > 3:
            raise ValidationError("box family supports dim <= 3")
        if self.kind == "ellipsoid_slab":
            if self.epsilon is None or self.epsilon < 0:
                raise ValidationError("ellipsoid_slab needs epsilon >= 0")
        elif self.epsilon is not None:
            raise ValidationError(f"{self.kind} takes no epsilon")

    @property
    def n_params(self):
        if self.kind == "capsules":
            return 1
        if self.kind == "ellipsoid_slab":
            return self.dim  # d-1 log axes + slab parameter
        return self.dim - 1

    def to_body(self, theta):
        theta = np.clip(np.asarray(theta, dtype=float), -_THETA_CLIP, _THETA_CLIP)
        if theta.size != self.n_params:
            raise ValidationError("parameter count mismatch")
        d = self.dim
        if self.kind == "ellipsoids":
            return Ellipsoid(np.exp(np.r_[theta, 0.0]))
        if self.kind == "boxes":
            half = np.exp(np.r_[theta, 0.0])
            corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * d)).reshape(d, -1).T
            return Polytope(corners * half)
        if self.kind == "capsules":
            L = 2.0 * math.exp(theta[0])
            p = np.zeros(d)
            q = np.zeros(d)
            p[0], q[0] = -0.5 * L, 0.5 * L
            return Capsule(p, q, 1.0)
        # ellipsoid_slab: slab fraction via a logistic parameter, projected
        # up to the feasibility threshold |E|/|body| <= 1 + epsilon
        axes = np.exp(np.r_[theta[:-1], 0.0])
        h_raw = 1.0 / (1.0 + math.exp(-theta[-1]))
        h_min = slab_fraction_inverse(d, 1.0 / (1.0 + self.epsilon))
        h = max(h_raw, h_min)
        if h >= 1.0 - 1e-12:
            return Ellipsoid(axes)
        if d == 2:
            return _cut_ellipse_polygon(axes, h)
        return SlabBody(axes, h)


@dataclass(frozen=True)
class SearchResult:
    best_params: np.ndarray
    best_body: object
    best_value: float
    best_eval: object
    trace: tuple
    converged: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {"best_params": list(map(float, self.best_params)),
                "best_value": self.best_value,
                "best_eval": self.best_eval.to_dict(),
                "trace": list(self.trace),
                "converged": self.converged,
                "extra": self.extra}


def maximize(f, family, cfg=None, restarts=20, seed=0, xatol=1e-7,
             max_evals=4000):
    """Nelder-Mead maximization over the family's reduced parameter space.

    Stochastic backends are evaluated under common random numbers (the
    config seed is fixed across the simplex), so the landscape is
    deterministic within one search."""
    cfg = cfg or EstimatorConfig()
    probe = family.to_body(np.zeros(family.n_params))
    if not f.dimension_ok(probe.dimension):
        raise ValidationError(f"{f.name} undefined in dimension {probe.dimension}")

    def neg(theta):
        try:
            return -evaluate(f, family.to_body(theta), cfg).value
        except ShapeFnError:
            return 1e9

    rng = np.random.default_rng(seed)
    best_val, best_x, trace, converged = -math.inf, None, [], False
    for _ in range(restarts):
        x0 = rng.uniform(-0.7, 0.7, family.n_params)
        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"xatol": xatol, "fatol": 1e-14,
                                "maxfev": max_evals, "maxiter": max_evals})
        if -res.fun > best_val:
            best_val, best_x = -res.fun, res.x
        converged = converged or bool(res.success)
        trace.append(best_val)
    body = family.to_body(best_x)
    ev = evaluate(f, body, cfg)
    return SearchResult(np.asarray(best_x), body, best_val, ev,
                        tuple(trace), converged)


def _constrained_ratio_bound(d, epsilon):
    if d >= 4:
        critical = math.sqrt((d - 1.0) * (d - 2.0) / (d * (d - 3.0))) - 1.0
        q = 1.0 - d * (d - 3.0) / ((d - 1.0) * (d - 2.0)) * (1.0 + epsilon) ** 2
        bound = (2.0 ** d * math.sqrt(d * (d - 1.0) ** d * (d - 2.0) / (d - 3.0))
                 * q ** (1.0 - d))
    elif d == 2:
        critical = 2.0 ** (1.0 / 3.0) - 1.0
        bound = 2.0 ** (11.0 / 3.0) / (critical - epsilon)
    else:
        raise ValidationError("constrained search needs d = 2 or d >= 4")
    if epsilon >= critical:
        raise ValidationError(
            f"epsilon {epsilon} is at or above the critical value {critical}")
    return bound


def maximize_constrained(f, d, epsilon, cfg=None, restarts=8, seed=0,
                         max_evals=200):
    """Lower bound for the volume-constrained supremum via the slab-cut
    ellipsoid family; the diameter/inradius bound of the constrained
    problem is asserted on the result."""
    ratio_bound = _constrained_ratio_bound(d, epsilon)
    family = Family("ellipsoid_slab", d, epsilon)
    result = maximize(f, family, cfg, restarts=restarts, seed=seed,
                      max_evals=max_evals)
    diam, r = geometry.diameter_inradius(result.best_body)
    if diam / r > ratio_bound * (1.0 + 1e-9):
        raise InternalConsistencyError(
            f"best body has diam/r = {diam / r}, above the bound {ratio_bound}")
    extra = dict(result.extra, epsilon=epsilon, diam_over_inradius=diam / r,
                 ratio_bound=ratio_bound)
    return SearchResult(result.best_params, result.best_body,
                        result.best_value, result.best_eval, result.trace,
                        result.converged, extra)


# ---------------------------------------------------------------------------
# divergent union-of-balls sequence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalValue:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValidationError("empty interval")


@dataclass(frozen=True)
class CounterexampleRow:
    k: int
    g: IntervalValue
    volume: float
    torsion: float
    cap: IntervalValue
    separation: float

    def to_dict(self):
        return {"k": self.k, "G_lower": self.g.lower, "G_upper": self.g.upper,
                "volume": self.volume, "torsion": self.torsion,
                "cap_lower": self.cap.lower, "cap_upper": self.cap.upper,
                "separation": self.separation}


def _validate_beta(d, beta):
    if d < 3:
        raise ValidationError("need d >= 3")
    if not (1.0 / d < beta < 1.0 / (d - 2.0)):
        raise ValidationError(
            f"beta must lie in (1/{d}, 1/{d - 2}) exclusive")


def counterexample_sequence(d, beta, k_list):
    """Certified G intervals for unions of k disjoint balls with radii
    j^-beta placed on a line with center spacing S = k^3 sum(radii).

    Volume and torsion are exact sums; capacity is bracketed between the
    subadditive upper bound and a trial-measure lower bound whose
    interaction defect delta = (k-1) (1/(S-1))^{d-2} is explicit."""
    _validate_beta(d, beta)
    ks = sorted({int(k) for k in k_list})
    if ks[0] < 1:
        raise ValidationError("k must be >= 1")
    om, tau, kap = exact.omega_d(d), exact.tau_d(d), exact.kappa_d(d)

    rows = []
    s_vol = s_tor = s_cap = s_rad = 0.0
    prev = 0
    for k in ks:
        j = np.arange(prev + 1, k + 1, dtype=float)
        s_vol += float(np.sum(j ** (-beta * d)))
        s_tor += float(np.sum(j ** (-beta * (d + 2))))
        s_cap += float(np.sum(j ** (-beta * (d - 2))))
        s_rad += float(np.sum(j ** -beta))
        prev = k
        S = k ** 3 * s_rad
        delta = 0.0 if k == 1 else (k - 1) * (1.0 / (S - 1.0)) ** (d - 2)
        if delta >= 1.0:
            raise ValidationError("separation too small to certify capacity")
        vol = om * s_vol
        tor = tau * s_tor
        cap = IntervalValue(kap * s_cap / (1.0 + delta), kap * s_cap)
        g = IntervalValue(tor * cap.lower / vol ** 2, tor * cap.upper / vol ** 2)
        rows.append(CounterexampleRow(k, g, vol, tor, cap, S))
    return rows


def build_ball_union(d, beta, k):
    """The k-th union in the divergent sequence as an explicit body."""
    _validate_beta(d, beta)
    radii = np.arange(1, k + 1, dtype=float) ** -beta
    S = k ** 3 * float(radii.sum())
    centers = np.zeros((k, d))
    centers[:, 0] = S * np.arange(k)
    return BallUnion(centers, radii)
