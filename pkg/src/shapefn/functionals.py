"""Scale-invariant shape functionals assembled from torsion, capacity,
measure and perimeter, with exact/stochastic backend dispatch."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import estimators, geometry
from . import exact_ellipsoid as exact
from .errors import UnsupportedRepresentationError, ValidationError
from .estimators import EstimatorConfig
from .geometry import Ball, BallUnion, Capsule, Ellipsoid, Polytope


@dataclass(frozen=True)
class FunctionalId:
    kind: str  # G | H | G_alpha | H_alpha
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("G", "H", "G_alpha", "H_alpha"):
            raise ValidationError(f"unknown functional {self.kind!r}")
        if self.kind == "G_alpha":
            if self.alpha is None or not 0.0 <= self.alpha <= 2.0:
                raise ValidationError("G_alpha needs alpha in [0, 2]")
        elif self.kind == "H_alpha":
            if self.alpha is None or not 0.0 <= self.alpha <= 1.5:
                raise ValidationError("H_alpha needs alpha in [0, 3/2]")
        elif self.alpha is not None:
            raise ValidationError(f"{self.kind} takes no alpha")

    @property
    def name(self):
        if self.alpha is None:
            return self.kind
        return f"{self.kind}({self.alpha:g})"

    def dimension_ok(self, d):
        if self.kind in ("G", "G_alpha"):
            return d >= 3
        return d == 2

    def exponents(self, d):
        """(torsion power, volume power, perimeter power); capacity power 1."""
        if self.kind == "G":
            return 1.0, 2.0, 0.0
        if self.kind == "G_alpha":
            return 1.0, self.alpha, d * (2.0 - self.alpha) / (d - 1.0)
        if self.kind == "H":
            return 0.5, 1.5, 0.0
        return 0.5, self.alpha, 3.0 - 2.0 * self.alpha

    def ball_value(self, d):
        if self.kind == "G":
            return exact.g_ball(d)
        if self.kind == "G_alpha":
            return exact.g_alpha_ball(d, self.alpha)
        if self.kind == "H":
            return exact.H_BALL
        return exact.h_alpha_ball(self.alpha)


def parse_functional(kind, alpha=None):
    if kind in ("G_alpha", "H_alpha"):
        return FunctionalId(kind, float(alpha))
    return FunctionalId(kind)


@dataclass(frozen=True)
class Component:
    value: float
    stderr: float
    backend: str

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr, "backend": self.backend}


@dataclass(frozen=True)
class Evaluation:
    functional: FunctionalId
    value: float
    stderr: float
    bracket: tuple
    components: dict = field(default_factory=dict)

    def to_dict(self):
        return {"functional": self.functional.name, "value": self.value,
                "stderr": self.stderr,
                "bracket": [self.bracket[0], self.bracket[1]],
                "components": {k: v.to_dict() for k, v in self.components.items()}}


def _is_exact_ellipsoid(body):
    return isinstance(body, (Ball, Ellipsoid))


def _axes(body):
    if isinstance(body, Ball):
        return np.full(body.dimension, body.radius)
    return body.semi_axes


def compute_components(body, cfg=None, need=("T", "cap", "V", "P")):
    """Torsion, capacity, volume and perimeter of a body with per-component
    backend tags; ellipsoids/balls are exact, other bodies stochastic."""
    cfg = cfg or EstimatorConfig()
    if isinstance(body, Ellipsoid):
        body = body.canonical()
    d = body.dimension
    comp = {}
    if "T" in need:
        if _is_exact_ellipsoid(body):
            comp["T"] = Component(exact.torsion_ellipsoid(_axes(body)), 0.0, "exact")
        else:
            est = estimators.wos_torsion(body, cfg)
            comp["T"] = Component(est.value, est.standard_error, est.backend)
    if "cap" in need:
        if d >= 3:
            if _is_exact_ellipsoid(body):
                comp["cap"] = Component(
                    exact.cap_newtonian_ellipsoid(_axes(body)), 0.0, "exact")
            else:
                est = estimators.wos_capacity(body, cfg)
                comp["cap"] = Component(est.value, est.standard_error, est.backend)
        else:
            if _is_exact_ellipsoid(body):
                a = _axes(body)
                comp["cap"] = Component(exact.cap_log_ellipse(a[0], a[1]), 0.0, "exact")
            else:
                est = estimators.fekete_logcap(body, cfg=cfg)
                comp["cap"] = Component(est.value, est.standard_error, est.backend)
    if "V" in need:
        comp["V"] = Component(geometry.measure(body), 0.0, "exact")
    if "P" in need:
        comp["P"] = Component(geometry.perimeter(body), 0.0, "exact")
    return comp


def assemble(f, components, d):
    """Combine components into an Evaluation of functional f."""
    pT, pV, pP = f.exponents(d)
    T = components["T"]
    cap = components["cap"]
    value = T.value ** pT * cap.value
    rel2 = (pT * T.stderr / T.value) ** 2 if T.stderr else 0.0
    if cap.value:
        rel2 += (cap.stderr / cap.value) ** 2 if cap.stderr else 0.0
    if pV:
        value /= components["V"].value ** pV
    if pP:
        value /= components["P"].value ** pP
    stderr = value * math.sqrt(rel2)
    bracket = (value - 3.0 * stderr, value + 3.0 * stderr)
    used = {"T": T, "cap": cap}
    if pV:
        used["V"] = components["V"]
    if pP:
        used["P"] = components["P"]
    return Evaluation(f, value, stderr, bracket, used)


def evaluate(f, body, cfg=None):
    """Evaluate a functional on a body with backend dispatch."""
    d = body.dimension
    if not f.dimension_ok(d):
        raise ValidationError(f"{f.name} is not defined in dimension {d}")
    pT, pV, pP = f.exponents(d)
    need = ["T", "cap"]
    if pV:
        need.append("V")
    if pP:
        need.append("P")
    comp = compute_components(body, cfg, need=tuple(need))
    return assemble(f, comp, d)


def scale_invariance_check(f, body, t_list, cfg=None):
    """Max relative deviation of f over homotheties of the body.

    Stochastic backends use common random numbers (same config seed), so the
    default relative shell width makes scaled walks identical in law."""
    base = evaluate(f, body, cfg)
    dev = 0.0
    for t in t_list:
        ev = evaluate(f, geometry.scale(body, t), cfg)
        dev = max(dev, abs(ev.value - base.value) / abs(base.value))
    return dev
