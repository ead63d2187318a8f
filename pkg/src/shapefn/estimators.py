"""Monte Carlo and discrete-extremal estimators for torsion, Newtonian
capacity and logarithmic capacity on general convex bodies.

Randomness is drawn from counter-based Philox streams keyed by
(seed, batch index, substream), so results are bit-identical for a given
(seed, body, config) regardless of how batches are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import geometry
from .errors import (
    DegenerateEstimateError,
    StuckWalkError,
    UnsupportedRepresentationError,
    ValidationError,
)
from .exact_ellipsoid import kappa_d
from .geometry import (
    Ball,
    BallUnion,
    Capsule,
    Ellipsoid,
    Polytope,
    bounding_ball,
    bounding_box,
    boundary_distance_lower,
    diameter_inradius,
    measure,
    signed_distance,
    unit_ball_volume,
)

_MAX_WALK_STEPS = 10 ** 6


@dataclass(frozen=True)
class EstimatorConfig:
    walk_count: int = 100_000
    shell_epsilon: float | None = None  # default: 1e-5 x inradius
    escape_radius_factor: float = 2.0
    seed: int = 0
    batch_size: int | None = None
    threads: int = 1
    fekete_points: int = 128

    def __post_init__(self):
        if self.walk_count < 1000:
            raise ValidationError("walk_count must be at least 10^3")
        if self.shell_epsilon is not None and self.shell_epsilon <= 0:
            raise ValidationError("shell_epsilon must be positive")
        if self.escape_radius_factor < 2:
            raise ValidationError("escape_radius_factor must be >= 2")
        if self.fekete_points < 16:
            raise ValidationError("fekete_points must be at least 16")

    def resolved_batch_size(self):
        if self.batch_size is not None:
            return self.batch_size
        return max(1000, self.walk_count // 50)

    def to_dict(self):
        return {"walk_count": self.walk_count, "shell_epsilon": self.shell_epsilon,
                "escape_radius_factor": self.escape_radius_factor,
                "seed": self.seed, "batch_size": self.batch_size,
                "threads": self.threads, "fekete_points": self.fekete_points}


@dataclass(frozen=True)
class Estimate:
    value: float
    standard_error: float
    walk_count_used: int
    backend: str
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {"value": self.value, "stderr": self.standard_error,
                "n": self.walk_count_used, "backend": self.backend}


def _stream(seed, batch, sub):
    # 128-bit Philox key: (seed | batch | substream)
    key = ((int(seed) & (2 ** 64 - 1)) << 64) | (int(batch) << 3) | int(sub)
    return np.random.Generator(np.random.Philox(key=key))


def _unit_vectors(rng, n, d):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _shell_reference(body):
    if isinstance(body, BallUnion):
        return float(body.radii.min())
    return diameter_inradius(body)[1]


def _resolve_epsilon(cfg, body):
    ref = _shell_reference(body)
    if cfg.shell_epsilon is None:
        return 1e-5 * ref
    if cfg.shell_epsilon > 1e-3 * ref:
        raise ValidationError("shell_epsilon must be <= 1e-3 x body inradius")
    return cfg.shell_epsilon


def _batch_sizes(n, batch_size):
    nb = max(1, math.ceil(n / batch_size))
    base = n // nb
    sizes = np.full(nb, base)
    sizes[: n - base * nb] += 1
    return sizes


def _combine_batches(batch_means, sizes, scale=1.0):
    x = np.asarray(batch_means, dtype=float)
    w = sizes / sizes.sum()
    grand = float(w @ x)
    if len(x) > 1:
        se = math.sqrt(float(np.sum(w ** 2 * (x - grand) ** 2)) * len(x) / (len(x) - 1))
    else:
        se = float("inf")
    return scale * grand, scale * se


def _run_batches(fn, n_batches, threads):
    if threads <= 1:
        return [fn(b) for b in range(n_batches)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_batches)))


def _sample_interior(body, n, rng):
    lo, hi = bounding_box(body)
    out = np.empty((n, lo.size))
    have = 0
    while have < n:
        cand = lo + (hi - lo) * rng.random((2 * (n - have) + 16, lo.size))
        keep = cand[signed_distance(body, cand) < 0]
        take = min(n - have, keep.shape[0])
        out[have: have + take] = keep[:take]
        have += take
    return out


def _torsion_walks(body, pos, eps, rng):
    """Accumulated R^2/(2d) along walk-on-spheres paths until absorption."""
    d = body.dimension
    n = pos.shape[0]
    acc = np.zeros(n)
    idx = np.arange(n)
    pos = pos.copy()
    for _ in range(_MAX_WALK_STEPS):
        if idx.size == 0:
            return acc
        r = boundary_distance_lower(body, pos[idx])
        near = r < eps
        if near.any():
            r = r.copy()
            r[near] = np.abs(signed_distance(body, pos[idx][near]))
        alive = r >= eps
        idx = idx[alive]
        r = r[alive]
        if idx.size == 0:
            return acc
        acc[idx] += r * r / (2.0 * d)
        pos[idx] += r[:, None] * _unit_vectors(rng, idx.size, d)
    raise StuckWalkError("torsion walk exceeded step budget; shell_epsilon too small?")


def wos_torsion(body, cfg=None):
    """Torsional rigidity T(body) = |body| x mean of the walk accumulator."""
    cfg = cfg or EstimatorConfig()
    eps = _resolve_epsilon(cfg, body)
    vol = measure(body)
    sizes = _batch_sizes(cfg.walk_count, cfg.resolved_batch_size())

    def one(b):
        rng = _stream(cfg.seed, b, 0)
        pos = _sample_interior(body, int(sizes[b]), rng)
        return float(_torsion_walks(body, pos, eps, rng).mean())

    means = _run_batches(one, len(sizes), cfg.threads)
    value, se = _combine_batches(means, sizes, scale=vol)
    return Estimate(value, se, int(sizes.sum()), "wos_torsion")


def wos_torsion_pointwise(body, point, cfg=None):
    """Estimate of the torsion function u(point) (pointwise oracle)."""
    cfg = cfg or EstimatorConfig()
    eps = _resolve_epsilon(cfg, body)
    sizes = _batch_sizes(cfg.walk_count, cfg.resolved_batch_size())
    p = np.asarray(point, dtype=float)

    def one(b):
        rng = _stream(cfg.seed, b, 0)
        pos = np.tile(p, (int(sizes[b]), 1))
        return float(_torsion_walks(body, pos, eps, rng).mean())

    means = _run_batches(one, len(sizes), cfg.threads)
    value, se = _combine_batches(means, sizes)
    return Estimate(value, se, int(sizes.sum()), "wos_torsion_pointwise")


_WEIGHT_FLOOR = 1e-6  # relative truncation bias, negligible vs Monte Carlo noise


def _capacity_hits(body, center, R, n, eps, rng):
    """Total absorbed weight of n exterior walks launched from the R-sphere.

    The escape test is handled by expectation: instead of killing a walk at
    radius rho > R with the exact escape probability, its weight is
    multiplied by the survival probability (R/rho)^(d-2) and it re-enters
    uniformly on the R-sphere. This removes the kill/survive variance; the
    walk is dropped once its weight is below a floor."""
    d = body.dimension
    pos = center + R * _unit_vectors(rng, n, d)
    w = np.ones(n)
    total = 0.0
    for _ in range(_MAX_WALK_STEPS):
        if pos.shape[0] == 0:
            return total
        r = boundary_distance_lower(body, pos)
        near = r < eps
        if near.any():
            r = r.copy()
            r[near] = np.abs(signed_distance(body, pos[near]))
        absorbed = r < eps
        if absorbed.any():
            total += float(w[absorbed].sum())
            pos, w, r = pos[~absorbed], w[~absorbed], r[~absorbed]
        if pos.shape[0] == 0:
            return total
        pos = pos + r[:, None] * _unit_vectors(rng, pos.shape[0], d)
        rho = np.linalg.norm(pos - center, axis=1)
        far = rho > R
        if far.any():
            w[far] *= (R / rho[far]) ** (d - 2)
            pos[far] = center + R * _unit_vectors(rng, int(far.sum()), d)
        keep = w > _WEIGHT_FLOOR
        if not keep.all():
            pos, w = pos[keep], w[keep]
    raise StuckWalkError("capacity walk exceeded step budget")


def wos_capacity(body, cfg=None):
    """Newtonian capacity by exterior walk-on-spheres hitting probability,
    with Richardson extrapolation across launch radii R and 2R."""
    cfg = cfg or EstimatorConfig()
    d = body.dimension
    if d < 3:
        raise UnsupportedRepresentationError("Newtonian capacity needs d >= 3")
    eps = _resolve_epsilon(cfg, body)
    center, rb = bounding_ball(body)
    R1 = cfg.escape_radius_factor * rb
    kap = kappa_d(d)
    f = 2.0 ** (2 - d)  # bias decay factor between radii R and 2R
    sizes = _batch_sizes(cfg.walk_count, cfg.resolved_batch_size())

    def one(b):
        m = int(sizes[b])
        caps = []
        for ridx, R in enumerate((R1, 2.0 * R1)):
            rng = _stream(cfg.seed, b, 1 + ridx)
            h = _capacity_hits(body, center, R, m, eps, rng)
            caps.append(kap * R ** (d - 2) * h / m)
        return (caps[1] - f * caps[0]) / (1.0 - f), caps

    results = _run_batches(one, len(sizes), cfg.threads)
    means = [r[0] for r in results]
    if not any(m > 0 for m in means):
        raise DegenerateEstimateError("no capacity walk hit the body")
    value, se = _combine_batches(means, sizes)
    raw1, _ = _combine_batches([r[1][0] for r in results], sizes)
    raw2, _ = _combine_batches([r[1][1] for r in results], sizes)
    return Estimate(value, se, int(sizes.sum()), "wos_capacity",
                    extra={"raw_R": raw1, "raw_2R": raw2})


# ---------------------------------------------------------------------------
# Fekete points / transfinite diameter (logarithmic capacity, d = 2)
# ---------------------------------------------------------------------------

class _BoundaryChart:
    """Arc parameterization of a planar boundary: t in [0, period) -> R^2."""

    def __init__(self, body):
        if isinstance(body, Ball) and body.dimension == 2:
            body = Ellipsoid(np.full(2, body.radius), body.center)
        if isinstance(body, Ellipsoid) and body.dimension == 2:
            self.kind = "ellipse"
            self.a = body.semi_axes
            self.c = body.center
            self.period = 2.0 * math.pi
        elif isinstance(body, Polytope) and body.dimension == 2:
            self.kind = "polygon"
            V = body.vertices
            edges = np.roll(V, -1, axis=0) - V
            L = np.linalg.norm(edges, axis=1)
            self.V, self.edges = V, edges
            self.cum = np.concatenate([[0.0], np.cumsum(L)])
            self.period = float(self.cum[-1])
        elif isinstance(body, Capsule) and body.dimension == 2 and body.radius == 0.0:
            self.kind = "segment"
            self.p, self.q = body.p, body.q
            self.period = body.length
        else:
            raise UnsupportedRepresentationError(
                "fekete chart needs a planar ellipse, polygon or segment")
        self.cyclic = self.kind != "segment"

    def points(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "segment":
            s = np.clip(t / self.period, 0.0, 1.0)
            return self.p + s[:, None] * (self.q - self.p)
        t = np.mod(t, self.period)
        if self.kind == "ellipse":
            return self.c + np.stack([self.a[0] * np.cos(t), self.a[1] * np.sin(t)], axis=-1)
        i = np.clip(np.searchsorted(self.cum, t, side="right") - 1, 0, len(self.V) - 1)
        frac = (t - self.cum[i]) / np.maximum(self.cum[i + 1] - self.cum[i], 1e-300)
        return self.V[i] + frac[:, None] * self.edges[i]

    def initial(self, n):
        if self.kind == "segment":
            # Chebyshev-node start (near-extremal for an interval)
            th = np.arange(n) * math.pi / (n - 1)
            return (1.0 - np.cos(th)) * 0.5 * self.period
        return self.period * np.arange(n) / n


def _fekete_ascent(chart, n, max_sweeps=25, tol=1e-5):
    """Cyclic coordinate ascent of sum log |x_i - x_j| along the boundary."""
    t = chart.initial(n).copy()
    X = chart.points(t)
    L = chart.period
    window = 1.2 * L / n

    def gain(i, ti):
        p = chart.points(np.array([ti]))[0]
        dd = np.linalg.norm(X - p, axis=1)
        dd[i] = 1.0
        dd = np.maximum(dd, 1e-300)
        return -np.log(dd).sum()

    converged = False
    for _ in range(max_sweeps):
        improved = 0.0
        for i in range(n):
            lo, hi = t[i] - window, t[i] + window
            if not chart.cyclic:
                lo, hi = max(lo, 0.0), min(hi, L)
            res = minimize_scalar(lambda ti: gain(i, ti), bounds=(lo, hi),
                                  method="bounded",
                                  options={"xatol": 1e-11 * L})
            cur = gain(i, t[i])
            if res.fun < cur:
                improved += cur - res.fun
                t[i] = np.mod(res.x, L) if chart.cyclic else res.x
                X[i] = chart.points(np.array([t[i]]))[0]
        # pair-energy stagnation; the cyclic charts have a rotational flat
        # direction, so point movement alone never settles
        if improved < tol * n:
            converged = True
            break
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    iu = np.triu_indices(n, k=1)
    diam_n = math.exp(2.0 / (n * (n - 1)) * float(np.log(D[iu]).sum()))
    return diam_n, converged


def fekete_logcap(body, n_points=None, cfg=None):
    """Logarithmic capacity via Fekete-point transfinite diameters at n and
    2n boundary points, extrapolated linearly in 1/n."""
    cfg = cfg or EstimatorConfig()
    n_points = n_points or cfg.fekete_points
    chart = _BoundaryChart(body)
    v_n, ok_n = _fekete_ascent(chart, n_points)
    v_2n, ok_2n = _fekete_ascent(chart, 2 * n_points)
    value = 2.0 * v_2n - v_n
    return Estimate(value, abs(v_n - v_2n), 2 * n_points, "fekete",
                    extra={"raw_n": v_n, "raw_2n": v_2n,
                           "converged": bool(ok_n and ok_2n)})


def mc_surface_area(body, cfg=None):
    """Surface area of a d >= 4 ellipsoid by the Cauchy projection formula,
    calibrated so the unit ball is exact in expectation."""
    cfg = cfg or EstimatorConfig()
    if not isinstance(body, Ellipsoid) or body.dimension < 4:
        raise UnsupportedRepresentationError("mc_surface_area needs a d >= 4 ellipsoid")
    a = body.semi_axes
    d = a.size
    const = d * unit_ball_volume(d) * float(np.prod(a))
    sizes = _batch_sizes(cfg.walk_count, cfg.resolved_batch_size())

    def one(b):
        rng = _stream(cfg.seed, b, 0)
        U = _unit_vectors(rng, int(sizes[b]), d)
        return float(np.sqrt(np.sum((U / a) ** 2, axis=1)).mean())

    means = _run_batches(one, len(sizes), cfg.threads)
    value, se = _combine_batches(means, sizes, scale=const)
    return Estimate(value, se, int(sizes.sum()), "mc_surface_area")
