"""Convex body representations and geometric measures.

Bodies are immutable value objects sharing one query contract:
``contains``, ``signed_distance`` (negative inside), ``bounding_ball``.
All measure operations are pure functions of the body.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .errors import (
    InternalConsistencyError,
    RankDeficiencyError,
    UnsupportedRepresentationError,
    ValidationError,
)

_REP_TOL = 1e-9


def _as_point(x, d=None):
    p = np.asarray(x, dtype=float)
    if d is not None and p.shape != (d,):
        raise ValidationError(f"expected a point of dimension {d}, got shape {p.shape}")
    return p


def unit_ball_volume(d):
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass(frozen=True, eq=False)
class Ball:
    radius: float
    center: np.ndarray = None
    dimension: int = 3

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError("ball radius must be positive")
        if self.center is None:
            object.__setattr__(self, "center", np.zeros(self.dimension))
        else:
            c = _as_point(self.center)
            object.__setattr__(self, "center", c)
            object.__setattr__(self, "dimension", c.size)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    semi_axes: np.ndarray
    center: np.ndarray = None
    orientation: np.ndarray = None  # columns are axis directions; None = axis aligned

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.semi_axes, dtype=float))
        if a.ndim != 1 or a.size < 2:
            raise ValidationError("semi_axes must be a vector of length >= 2")
        if np.any(a <= 0):
            raise ValidationError("all semi-axes must be strictly positive")
        object.__setattr__(self, "semi_axes", a)
        if self.center is None:
            object.__setattr__(self, "center", np.zeros(a.size))
        else:
            object.__setattr__(self, "center", _as_point(self.center, a.size))
        if self.orientation is not None:
            R = np.asarray(self.orientation, dtype=float)
            if R.shape != (a.size, a.size):
                raise ValidationError("orientation must be a d x d matrix")
            if not np.allclose(R.T @ R, np.eye(a.size), atol=1e-9):
                raise ValidationError("orientation must be orthogonal")
            object.__setattr__(self, "orientation", R)

    @property
    def dimension(self):
        return self.semi_axes.size

    def sorted_axes(self):
        """Semi-axes in non-increasing order, ties broken by original index."""
        a = self.semi_axes
        order = np.lexsort((np.arange(a.size), -a))
        return a[order]

    def canonical(self):
        """Axis-aligned copy (all functionals here are rigid-motion invariant)."""
        if self.orientation is None and not self.center.any():
            return self
        return Ellipsoid(self.semi_axes.copy())


@dataclass(frozen=True, eq=False)
class Polytope:
    vertices: np.ndarray
    normals: np.ndarray = None  # outward unit normals
    offsets: np.ndarray = None  # n . x <= offset

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2:
            raise ValidationError("vertices must be an (n, d) array")
        d = V.shape[1]
        if self.normals is None or self.offsets is None:
            hull = ConvexHull(V)
            eq = hull.equations  # n . x + b <= 0
            N = eq[:, :-1]
            c = -eq[:, -1]
            if d == 2:
                V = V[hull.vertices]  # counterclockwise order
            else:
                V = V[np.sort(np.unique(hull.simplices))]
            object.__setattr__(self, "_hull", hull)
        else:
            N = np.asarray(self.normals, dtype=float)
            c = np.asarray(self.offsets, dtype=float)
            object.__setattr__(self, "_hull", None)
        norms = np.linalg.norm(N, axis=1)
        N = N / norms[:, None]
        c = c / norms
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "normals", N)
        object.__setattr__(self, "offsets", c)
        self._check_representations()

    def _check_representations(self):
        # mutual containment: every vertex satisfies the H-rep, every facet is tight
        slack = self.vertices @ self.normals.T - self.offsets
        if slack.max() > _REP_TOL:
            raise ValidationError("V- and H-representations disagree (vertex outside)")
        if np.any(slack.max(axis=0) < -_REP_TOL):
            raise ValidationError("V- and H-representations disagree (loose facet)")

    @property
    def dimension(self):
        return self.vertices.shape[1]

    def hull(self):
        h = getattr(self, "_hull", None)
        if h is None:
            h = ConvexHull(self.vertices)
            object.__setattr__(self, "_hull", h)
        return h


@dataclass(frozen=True, eq=False)
class Capsule:
    p: np.ndarray
    q: np.ndarray
    radius: float

    def __post_init__(self):
        p = _as_point(self.p)
        q = _as_point(self.q, p.size)
        if self.radius < 0:
            raise ValidationError("capsule radius must be non-negative")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def dimension(self):
        return self.p.size

    @property
    def length(self):
        return float(np.linalg.norm(self.q - self.p))


@dataclass(frozen=True, eq=False)
class BallUnion:
    centers: np.ndarray
    radii: np.ndarray
    disjoint: bool = True

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.centers, dtype=float))
        r = np.atleast_1d(np.asarray(self.radii, dtype=float))
        if C.shape[0] != r.size or np.any(r <= 0):
            raise ValidationError("centers/radii mismatch or non-positive radius")
        object.__setattr__(self, "centers", C)
        object.__setattr__(self, "radii", r)
        if self.disjoint and C.shape[0] > 1:
            D = np.linalg.norm(C[:, None, :] - C[None, :, :], axis=-1)
            gap = D - (r[:, None] + r[None, :])
            np.fill_diagonal(gap, np.inf)
            if gap.min() <= 0:
                raise ValidationError("balls flagged disjoint but closed balls touch")

    @property
    def dimension(self):
        return self.centers.shape[1]


Body = Ball | Ellipsoid | Polytope | Capsule | BallUnion


def dimension(body):
    return body.dimension


def is_convex(body):
    return not isinstance(body, BallUnion) or len(body.radii) == 1


# ---------------------------------------------------------------------------
# measure / perimeter / diameter / inradius
# ---------------------------------------------------------------------------

def measure(body):
    """Lebesgue measure. Exact closed forms; polytopes only for d in {2, 3}."""
    if hasattr(body, "measure"):
        return body.measure()
    d = body.dimension
    if isinstance(body, Ball):
        return unit_ball_volume(d) * body.radius ** d
    if isinstance(body, Ellipsoid):
        return unit_ball_volume(d) * float(np.prod(body.semi_axes))
    if isinstance(body, Polytope):
        if d > 3:
            raise UnsupportedRepresentationError("polytope volume only for d <= 3")
        return float(body.hull().volume)
    if isinstance(body, Capsule):
        # cylinder part + full ball
        r, L = body.radius, body.length
        return unit_ball_volume(d - 1) * r ** (d - 1) * L + unit_ball_volume(d) * r ** d
    if isinstance(body, BallUnion):
        if not body.disjoint:
            raise UnsupportedRepresentationError(
                "volume of overlapping ball unions is not implemented")
        return float(np.sum(unit_ball_volume(d) * body.radii ** d))
    raise UnsupportedRepresentationError(type(body).__name__)


def ellipse_perimeter_agm(a, b):
    """Perimeter of an ellipse via AGM evaluation of the complete elliptic
    integral of the second kind (1e-12 relative)."""
    big, small = (a, b) if a >= b else (b, a)
    if big == small:
        return 2.0 * math.pi * big
    x, y = 1.0, small / big
    c = math.sqrt(1.0 - y * y)
    csum = 0.5 * c * c
    pow2 = 0.5
    # quadratic convergence: ~7 iterations; the cap guards against x - y
    # stagnating at a few ulps
    for _ in range(64):
        if c <= 1e-16 * x:
            break
        x, y, c = 0.5 * (x + y), math.sqrt(x * y), 0.5 * (x - y)
        pow2 *= 2.0
        csum += pow2 * c * c
    K = math.pi / (2.0 * x)
    E = K * (1.0 - csum)
    return 4.0 * big * E


_GL_NODE_CACHE = {}


def _gl_nodes(n):
    if n not in _GL_NODE_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_NODE_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)  # mapped to [0, 1]
    return _GL_NODE_CACHE[n]


def _ellipsoid_surface_3d(axes, tol=1e-9):
    """Chart quadrature of the parameterized ellipsoid surface (d=3)."""
    a, b, c = axes
    prev = None
    n = 32
    while n <= 4096:
        t, wt = _gl_nodes(n)          # theta / pi
        theta = math.pi * t
        phi = 2.0 * math.pi * np.arange(n) / n  # periodic -> trapezoid
        st = np.sin(theta)[:, None]
        ct = np.cos(theta)[:, None]
        cp = np.cos(phi)[None, :]
        sp = np.sin(phi)[None, :]
        integrand = st * np.sqrt(
            (b * c * st * cp) ** 2 + (a * c * st * sp) ** 2 + (a * b * ct) ** 2)
        val = math.pi * (2.0 * math.pi / n) * float(wt @ integrand.sum(axis=1))
        if prev is not None and abs(val - prev) <= tol * abs(val):
            return val
        prev = val
        n *= 2
    return prev


def _ellipsoid_surface_highd(axes, tol=1e-11):
    """Surface area for any d >= 2 from Cauchy's projection formula.

    S = d omega_d (prod a) E_u sqrt(sum u_i^2/a_i^2) over the unit sphere;
    the spherical average reduces to a 1-D integral via the Gaussian
    representation of sqrt(.).
    """
    a = np.asarray(axes, dtype=float)
    d = a.size
    ci = 1.0 / a ** 2
    scale = ci.max()
    ci = ci / scale  # condition the integrand; sqrt(scale) restored below

    def f(w):
        # t = (w/(1-w))^2 ; 1-D reduction of E_gauss[sqrt(sum c g^2)]
        v = w / (1.0 - w)
        t = v * v
        prod = np.prod(1.0 + 2.0 * ci[:, None] * t[None, :], axis=0) ** -0.5
        return 2.0 * (1.0 - prod) / w ** 2

    prev = None
    n = 64
    while n <= 8192:
        x, w = _gl_nodes(n)
        val = float(w @ f(x)) / (2.0 * math.sqrt(math.pi))
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
            break
        prev = val
        n *= 2
    e_gauss = val * math.sqrt(scale)
    e_norm = math.sqrt(2.0) * math.exp(math.lgamma((d + 1) / 2.0) - math.lgamma(d / 2.0))
    mean_proj = e_gauss / e_norm
    return d * unit_ball_volume(d) * float(np.prod(a)) * mean_proj


def perimeter(body):
    """Surface measure of a convex body (perimeter if d=2)."""
    d = body.dimension
    if isinstance(body, BallUnion):
        raise UnsupportedRepresentationError("perimeter requires a convex body")
    if isinstance(body, Ball):
        return d * unit_ball_volume(d) * body.radius ** (d - 1)
    if isinstance(body, Ellipsoid):
        a = body.semi_axes
        if d == 2:
            return ellipse_perimeter_agm(a[0], a[1])
        return _ellipsoid_surface_highd(a)
    if isinstance(body, Polytope):
        if d > 3:
            raise UnsupportedRepresentationError("polytope perimeter only for d <= 3")
        return float(body.hull().area)
    if isinstance(body, Capsule):
        r, L = body.radius, body.length
        lateral = (d - 1) * unit_ball_volume(d - 1) * r ** (d - 2) * L
        caps = d * unit_ball_volume(d) * r ** (d - 1)
        return lateral + caps
    raise UnsupportedRepresentationError(type(body).__name__)


def diameter_inradius(body):
    """(diameter, inradius) of a convex body."""
    if hasattr(body, "diameter_inradius"):
        return body.diameter_inradius()
    if isinstance(body, Ball):
        return 2.0 * body.radius, body.radius
    if isinstance(body, Ellipsoid):
        a = body.semi_axes
        return 2.0 * float(a.max()), float(a.min())
    if isinstance(body, Polytope):
        V = body.vertices
        D = np.linalg.norm(V[:, None, :] - V[None, :, :], axis=-1)
        diam = float(D.max())
        # inscribed-ball LP: maximize r subject to n.x + r <= offset
        d = body.dimension
        A = np.hstack([body.normals, np.ones((body.normals.shape[0], 1))])
        res = linprog(c=np.r_[np.zeros(d), -1.0], A_ub=A, b_ub=body.offsets,
                      bounds=[(None, None)] * d + [(0, None)], method="highs")
        if not res.success:
            raise InternalConsistencyError("inradius LP failed: " + res.message)
        return diam, float(res.x[-1])
    if isinstance(body, Capsule):
        return body.length + 2.0 * body.radius, body.radius
    raise UnsupportedRepresentationError("diameter/inradius requires a convex body")


# ---------------------------------------------------------------------------
# signed distance
# ---------------------------------------------------------------------------

def _seg_distance(pts, p, q):
    v = q - p
    L2 = float(v @ v)
    if L2 == 0.0:
        return np.linalg.norm(pts - p, axis=-1)
    t = np.clip((pts - p) @ v / L2, 0.0, 1.0)
    proj = p + t[:, None] * v
    return np.linalg.norm(pts - proj, axis=-1)


def _tri_distance(pts, tri):
    """Distance from points (n,3) to a single triangle (3,3)."""
    a, b, c = tri
    ab, ac = b - a, c - a
    n = np.cross(ab, ac)
    nn = float(n @ n)
    ap = pts - a
    if nn < 1e-30:
        return np.minimum(_seg_distance(pts, a, b),
                          np.minimum(_seg_distance(pts, b, c), _seg_distance(pts, a, c)))
    # barycentric coordinates of in-plane projection
    d00, d01, d11 = float(ab @ ab), float(ab @ ac), float(ac @ ac)
    d20 = ap @ ab
    d21 = ap @ ac
    denom = d00 * d11 - d01 * d01
    v = (d11 * d20 - d01 * d21) / denom
    w = (d00 * d21 - d01 * d20) / denom
    inside = (v >= 0) & (w >= 0) & (v + w <= 1)
    plane_dist = np.abs(ap @ n) / math.sqrt(nn)
    edge = np.minimum(_seg_distance(pts, a, b),
                      np.minimum(_seg_distance(pts, b, c), _seg_distance(pts, a, c)))
    return np.where(inside, plane_dist, edge)


def _ellipsoid_boundary_distance(axes, pts):
    """Exact distance from points to the boundary of an axis-aligned ellipsoid.

    Solves the projection problem's Lagrange equation
    sum (a_i p_i)^2 / (a_i^2 + t)^2 = 1 by safeguarded bisection + Newton in
    the shifted variable s = t + min a_i^2, which stays well conditioned near
    the degenerate interior branch.
    """
    a = np.asarray(axes, dtype=float)
    P = np.atleast_2d(np.abs(pts)).astype(float)
    # nudge exact zeros; the generic branch then converges to the degenerate limit
    tiny = 1e-18 * a
    P = np.maximum(P, tiny[None, :])
    a2 = a * a
    amin2 = a2.min()
    shift = a2 - amin2  # (a_i^2 + t) = shift_i + s
    ap2 = (a * P) ** 2

    g2 = np.sum((P / a) ** 2, axis=1)
    # bracket in s: f decreasing, root in (0, s_hi)
    s_lo = np.zeros(P.shape[0])
    s_hi = np.sqrt(ap2.sum(axis=1)) + amin2  # f(s_hi) < 1 always

    def f(s):
        return np.sum(ap2 / (shift[None, :] + s[:, None]) ** 2, axis=1) - 1.0

    for _ in range(90):
        mid = 0.5 * (s_lo + s_hi)
        s_lo = np.where(f(mid) > 0, mid, s_lo)
        s_hi = np.where(f(mid) > 0, s_hi, mid)
    s = 0.5 * (s_lo + s_hi)
    # Newton polish
    for _ in range(4):
        den = shift[None, :] + s[:, None]
        fval = np.sum(ap2 / den ** 2, axis=1) - 1.0
        fp = -2.0 * np.sum(ap2 / den ** 3, axis=1)
        step = fval / fp
        s_new = s - step
        s = np.where((s_new > s_lo) & (s_new < s_hi), s_new, s)
    x = a2[None, :] * P / (shift[None, :] + s[:, None])
    dist = np.linalg.norm(P - x, axis=1)
    return dist, g2


def ellipsoid_distance_lower_bound(axes, pts):
    """Conservative bound never exceeding the true boundary distance.

    |g - 1| * a_min with g = sqrt(sum x_i^2/a_i^2); valid inside and outside
    since |grad g| <= 1/a_min everywhere.
    """
    a = np.asarray(axes, dtype=float)
    g = np.sqrt(np.sum((np.atleast_2d(pts) / a) ** 2, axis=1))
    return np.abs(g - 1.0) * a.min()


def signed_distance(body, points):
    """Signed distance to the body boundary, negative inside.

    Accepts a single point or an (n, d) array; returns matching shape.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    P = np.atleast_2d(pts)
    d = body.dimension
    if P.shape[1] != d:
        raise ValidationError("point dimension mismatch")

    if hasattr(body, "signed_distance"):
        sd = np.asarray(body.signed_distance(P), dtype=float)
    elif isinstance(body, Ball):
        sd = np.linalg.norm(P - body.center, axis=1) - body.radius
    elif isinstance(body, Ellipsoid):
        Q = P - body.center
        if body.orientation is not None:
            Q = Q @ body.orientation
        dist, g2 = _ellipsoid_boundary_distance(body.semi_axes, Q)
        sd = np.where(g2 < 1.0, -dist, dist)
    elif isinstance(body, Polytope):
        slack = P @ body.normals.T - body.offsets
        inner = slack.max(axis=1)
        sd = inner.copy()
        out = inner > 0
        if np.any(out):
            Po = P[out]
            if d == 2:
                V = body.vertices
                best = np.full(Po.shape[0], np.inf)
                for i in range(V.shape[0]):
                    best = np.minimum(best, _seg_distance(Po, V[i], V[(i + 1) % V.shape[0]]))
            else:
                hull = body.hull()
                pts_all = hull.points
                best = np.full(Po.shape[0], np.inf)
                for simp in hull.simplices:
                    best = np.minimum(best, _tri_distance(Po, pts_all[simp]))
            sd[out] = best
    elif isinstance(body, Capsule):
        sd = _seg_distance(P, body.p, body.q) - body.radius
    elif isinstance(body, BallUnion):
        sd_all = (np.linalg.norm(P[:, None, :] - body.centers[None, :, :], axis=-1)
                  - body.radii[None, :])
        all_out = np.all(sd_all > 0, axis=1)
        sd = np.where(all_out, sd_all.min(axis=1), -np.abs(sd_all).min(axis=1))
    else:
        raise UnsupportedRepresentationError(type(body).__name__)
    return float(sd[0]) if single else sd


def boundary_distance_lower(body, points):
    """Lower bound on |signed_distance|, cheap enough for WoS step sizing."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if hasattr(body, "distance_lower"):
        return np.asarray(body.distance_lower(P), dtype=float)
    if isinstance(body, Ellipsoid):
        Q = P - body.center
        if body.orientation is not None:
            Q = Q @ body.orientation
        return ellipsoid_distance_lower_bound(body.semi_axes, Q)
    if isinstance(body, Polytope):
        # interior: exact facet-plane distance; exterior: the largest
        # halfspace violation is a valid lower bound
        return np.abs((P @ body.normals.T - body.offsets).max(axis=1))
    return np.abs(signed_distance(body, P))


def contains(body, points):
    sd = signed_distance(body, points)
    return sd < 0 if np.isscalar(sd) else sd < 0


def bounding_ball(body):
    """A (not necessarily minimal) enclosing ball: (center, radius)."""
    if hasattr(body, "bounding_ball"):
        return body.bounding_ball()
    if isinstance(body, Ball):
        return body.center.copy(), body.radius
    if isinstance(body, Ellipsoid):
        return body.center.copy(), float(body.semi_axes.max())
    if isinstance(body, Polytope):
        c = body.vertices.mean(axis=0)
        return c, float(np.linalg.norm(body.vertices - c, axis=1).max())
    if isinstance(body, Capsule):
        c = 0.5 * (body.p + body.q)
        return c, 0.5 * body.length + body.radius
    if isinstance(body, BallUnion):
        c = body.centers.mean(axis=0)
        r = float((np.linalg.norm(body.centers - c, axis=1) + body.radii).max())
        return c, r
    raise UnsupportedRepresentationError(type(body).__name__)


def bounding_box(body):
    """Axis-aligned (lo, hi) box containing the body."""
    if hasattr(body, "bounding_box"):
        return body.bounding_box()
    if isinstance(body, Ball):
        return body.center - body.radius, body.center + body.radius
    if isinstance(body, Ellipsoid):
        if body.orientation is None:
            h = body.semi_axes
        else:
            h = np.sqrt(((body.orientation * body.semi_axes[None, :]) ** 2).sum(axis=1))
        return body.center - h, body.center + h
    if isinstance(body, Polytope):
        return body.vertices.min(axis=0), body.vertices.max(axis=0)
    if isinstance(body, Capsule):
        lo = np.minimum(body.p, body.q) - body.radius
        return lo, np.maximum(body.p, body.q) + body.radius
    if isinstance(body, BallUnion):
        lo = (body.centers - body.radii[:, None]).min(axis=0)
        hi = (body.centers + body.radii[:, None]).max(axis=0)
        return lo, hi
    raise UnsupportedRepresentationError(type(body).__name__)


def inradius(body):
    return diameter_inradius(body)[1]


def scale(body, t):
    """Homothety about the origin by factor t > 0."""
    if t <= 0:
        raise ValidationError("scale factor must be positive")
    t = float(t)
    if isinstance(body, Ball):
        return Ball(body.radius * t, body.center * t)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(body.semi_axes * t, body.center * t, body.orientation)
    if isinstance(body, Polytope):
        return Polytope(body.vertices * t)
    if isinstance(body, Capsule):
        return Capsule(body.p * t, body.q * t, body.radius * t)
    if isinstance(body, BallUnion):
        return BallUnion(body.centers * t, body.radii * t, body.disjoint)
    raise UnsupportedRepresentationError(type(body).__name__)


def support_point(body, directions):
    """argmax over the body of <x, u> for each unit direction u, (n, d)."""
    U = np.atleast_2d(np.asarray(directions, dtype=float))
    if isinstance(body, Ball):
        return body.center + body.radius * U
    if isinstance(body, Ellipsoid):
        if body.orientation is None:
            w = body.semi_axes ** 2 * U
            return body.center + w / np.linalg.norm(w / body.semi_axes[None, :], axis=1, keepdims=True)
        R = body.orientation
        Ur = U @ R
        w = body.semi_axes ** 2 * Ur
        w = w / np.linalg.norm(w / body.semi_axes[None, :], axis=1, keepdims=True)
        return body.center + w @ R.T
    if isinstance(body, Polytope):
        idx = np.argmax(U @ body.vertices.T, axis=1)
        return body.vertices[idx]
    if isinstance(body, Capsule):
        ends = np.where((U @ (body.q - body.p))[:, None] >= 0, body.q, body.p)
        return ends + body.radius * U
    raise UnsupportedRepresentationError("support of this variant not available")


# ---------------------------------------------------------------------------
# hull / Loewner ellipsoid / John pair
# ---------------------------------------------------------------------------

def hull_2d(points):
    """Convex hull of planar points by the monotone chain, CCW Polytope."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 2 or P.shape[0] < 3:
        raise ValidationError("need at least 3 planar points")
    pts = sorted(map(tuple, P))

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                (x1, y1), (x2, y2) = out[-2], out[-1]
                if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    verts = lower[:-1] + upper[:-1]
    if len(verts) < 3:
        raise RankDeficiencyError("points are collinear")
    return Polytope(np.array(verts))


def loewner_ellipsoid(points, tol=1e-8, max_iter=200000):
    """Minimum-volume enclosing ellipsoid by Khachiyan's barycentric ascent
    with Wolfe-Atwood decrease steps (relative volume gap <= 1e-7)."""
    P = np.asarray(points, dtype=float)
    n, d = P.shape
    if n < d + 1 or np.linalg.matrix_rank(P - P.mean(axis=0)) < d:
        raise RankDeficiencyError("points do not affinely span R^d")
    Q = np.hstack([P, np.ones((n, 1))])  # (n, d+1)
    u = np.full(n, 1.0 / n)
    for it in range(max_iter):
        V = Q.T @ (u[:, None] * Q)
        Vinv = np.linalg.inv(V)
        M = np.einsum("ij,jk,ik->i", Q, Vinv, Q)
        jp = int(np.argmax(M))
        kp = M[jp] / (d + 1) - 1.0
        active = u > 1e-12
        Mact = np.where(active, M, np.inf)
        jm = int(np.argmin(Mact))
        km = 1.0 - M[jm] / (d + 1)
        if kp <= tol and km <= tol:
            break
        if kp >= km:
            j, Mj = jp, M[jp]
            lam = (Mj - d - 1.0) / ((d + 1.0) * (Mj - 1.0))
        else:
            j, Mj = jm, M[jm]
            lam = (Mj - d - 1.0) / ((d + 1.0) * (Mj - 1.0))
            lam = max(lam, -u[j] / (1.0 - u[j]))
        u = (1.0 - lam) * u
        u[j] += lam
    center = P.T @ u
    S = P.T @ (u[:, None] * P) - np.outer(center, center)
    A = np.linalg.inv(S) / d
    # calibrate so all points are (numerically) inside
    m = float(np.einsum("ij,jk,ik->i", P - center, A, P - center).max())
    A = A / m
    evals, evecs = np.linalg.eigh(A)
    axes = 1.0 / np.sqrt(evals)  # eigh ascending -> axes descending
    order = np.argsort(-axes, kind="stable")
    return Ellipsoid(axes[order], center, evecs[:, order])


def _sphere_directions(d, n, seed=0):
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((n, d))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def john_pair(body, n_directions=10000, tol=1e-8):
    """(inner, outer) ellipsoid sandwich: outer is the Loewner ellipsoid,
    inner is the outer shrunk by the dimension about its center."""
    d = body.dimension
    if isinstance(body, Ball):
        outer = Ellipsoid(np.full(d, body.radius), body.center)
    elif isinstance(body, Ellipsoid):
        outer = body
    elif isinstance(body, Polytope):
        outer = loewner_ellipsoid(body.vertices)
    else:
        raise UnsupportedRepresentationError("john_pair needs a polytope or ellipsoid")
    inner = Ellipsoid(outer.semi_axes / d, outer.center, outer.orientation)

    scale_len = float(outer.semi_axes.max())
    U = _sphere_directions(d, n_directions)
    # inner boundary points must lie in the body
    bd = inner.semi_axes[None, :] * U
    if inner.orientation is not None:
        bd = bd @ inner.orientation.T
    bd = inner.center + bd
    if np.any(signed_distance(body, bd) > tol * scale_len):
        raise InternalConsistencyError("inner John ellipsoid not contained in body")
    # body support points must lie in the outer ellipsoid
    sp = support_point(body, U) - outer.center
    if outer.orientation is not None:
        sp = sp @ outer.orientation
    if np.any(np.sum((sp / outer.semi_axes) ** 2, axis=1) > 1.0 + 1e-6):
        raise InternalConsistencyError("body not contained in outer John ellipsoid")
    return inner, outer


def john_sorted_axes(body):
    """Sorted (descending) semi-axes of the outer John/Loewner ellipsoid."""
    _, outer = john_pair(body)
    return outer.sorted_axes()


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def body_to_dict(body):
    if isinstance(body, Ball):
        return {"kind": "ball", "radius": body.radius, "center": body.center.tolist()}
    if isinstance(body, Ellipsoid):
        out = {"kind": "ellipsoid", "semi_axes": body.semi_axes.tolist(),
               "center": body.center.tolist()}
        if body.orientation is not None:
            out["orientation"] = body.orientation.tolist()
        return out
    if isinstance(body, Polytope):
        return {"kind": "polytope", "vertices": body.vertices.tolist()}
    if isinstance(body, Capsule):
        return {"kind": "capsule", "p": body.p.tolist(), "q": body.q.tolist(),
                "radius": body.radius}
    if isinstance(body, BallUnion):
        return {"kind": "ball_union", "centers": body.centers.tolist(),
                "radii": body.radii.tolist(), "disjoint": body.disjoint}
    raise UnsupportedRepresentationError(type(body).__name__)


def body_from_dict(doc):
    try:
        kind = doc["kind"]
        if kind == "ball":
            return Ball(doc["radius"], doc.get("center"))
        if kind == "ellipsoid":
            return Ellipsoid(doc["semi_axes"], doc.get("center"),
                             doc.get("orientation"))
        if kind == "polytope":
            return Polytope(np.asarray(doc["vertices"], dtype=float))
        if kind == "capsule":
            return Capsule(doc["p"], doc["q"], doc["radius"])
        if kind == "ball_union":
            return BallUnion(doc["centers"], doc["radii"], doc.get("disjoint", True))
    except KeyError as exc:
        raise ValidationError(f"missing body field: {exc}") from exc
    raise ValidationError(f"unknown body kind: {kind!r}")
