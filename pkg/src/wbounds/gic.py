"""Two-user Gaussian interference channel: outer bound, corners, inner curve.

The channel is Y1 = X1 + b X2 + Z1, Y2 = a X1 + X2 + Z2 with unit noise and
power budgets P1, P2.  All rates are in nats; conversion happens at the CLI.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import InvariantError, RegionCurve

_R2_TOL = 1e-12


class PowerConstraint(enum.Enum):
    ALMOST_SURE = "almost_sure"
    AVERAGE = "average"


@dataclass(frozen=True)
class GicParams:
    a: float
    b: float
    p1: float
    p2: float
    constraint: PowerConstraint = PowerConstraint.ALMOST_SURE

    def __post_init__(self):
        if self.a < 0.0 or self.b < 0.0:
            raise InvariantError("gic: cross gains a, b must be >= 0")
        if self.p1 <= 0.0 or self.p2 <= 0.0:
            raise InvariantError("gic: powers must be > 0")

    def c1(self) -> float:
        return 0.5 * math.log1p(self.p1)

    def c2(self) -> float:
        return 0.5 * math.log1p(self.p2)

    def c2_tilde(self) -> float:
        return 0.5 * math.log1p(self.p2 / (1.0 + self.a**2 * self.p1))


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float

    def __post_init__(self):
        if not (math.isfinite(self.r1) and math.isfinite(self.r2)):
            raise InvariantError("rate point must be finite")
        if self.r1 < 0.0 or self.r2 < 0.0:
            raise InvariantError("rate point must be non-negative")


@dataclass(frozen=True)
class CornerReport:
    c1: float
    c2: float
    c2_tilde: float
    c1_prime: float
    c2_prime: float
    case_label: str

    def __post_init__(self):
        tol = 1e-12
        if self.c2_tilde > self.c2 + tol or self.c1_prime > self.c1 + tol:
            raise InvariantError("corner report: tilde/primed corners cannot exceed capacities")
        if self.c2_prime > self.c2 + tol:
            raise InvariantError("corner report: c2' cannot exceed C2")


# ---------------------------------------------------------------------------
# Outer bound (valid for 0 < a <= 1, any b >= 0, R2 in [C2~, C2])
# ---------------------------------------------------------------------------


def _delta(params: GicParams, r2: float) -> float:
    gap = max(params.c2() - r2, 0.0)
    if params.constraint is PowerConstraint.ALMOST_SURE:
        return gap + params.a * math.sqrt(2.0 * params.p1 * gap / (1.0 + params.p2))
    coef = 3.0 * math.sqrt(1.0 + params.a**2 * params.p1 + params.p2) + 4.0 * params.a * math.sqrt(
        params.p1
    )
    return gap + math.sqrt(2.0 * gap / (1.0 + params.p2)) * coef


def outer_bound_r1_branch(params: GicParams, r2: float) -> tuple[float, str]:
    """R1 bound and the name of the active min-branch.

    Branch "sato_kramer" is the previously known term; "corner" is the new
    term that pins the upper corner.  Ties label as "corner".
    """
    a = params.a
    if not 0.0 < a <= 1.0:
        raise InvariantError("a must lie in (0,1]")
    c2 = params.c2()
    c2t = params.c2_tilde()
    if r2 < c2t - _R2_TOL or r2 > c2 + _R2_TOL:
        raise InvariantError(
            f"R2={r2!r} outside the theorem range [{c2t!r}, {c2!r}]"
        )
    r2 = min(max(r2, c2t), c2)
    a2 = a * a
    big_a = (params.p1 + (1.0 + params.p2) / a2) * math.exp(-2.0 * r2)
    delta = _delta(params, r2)
    term_known = big_a - 1.0 / a2 + 1.0
    term_new = big_a * ((1.0 + params.p2) * (1.0 - (1.0 - a2) * math.exp(-2.0 * delta)) - a2) / params.p2
    if term_new <= term_known:
        return 0.5 * math.log(term_new), "corner"
    return 0.5 * math.log(term_known), "sato_kramer"


def outer_bound_r1(params: GicParams, r2: float) -> float:
    return outer_bound_r1_branch(params, r2)[0]


def outer_curve(params: GicParams, r2_grid_size: int) -> RegionCurve:
    """Sample the outer bound on a uniform R2 grid over [C2~, C2]."""
    if r2_grid_size < 2:
        raise InvariantError("outer_curve: grid must have at least 2 points")
    r2s = np.linspace(params.c2_tilde(), params.c2(), r2_grid_size)
    pts = [(outer_bound_r1(params, float(r2)), float(r2)) for r2 in r2s]
    return RegionCurve(tuple(pts), "outer")


def hk_inner_curve(params: GicParams, s_grid_size: int) -> RegionCurve:
    """Single-parameter rate-splitting inner curve for the Z-channel (b = 0).

    s in [0, P1] is the private-signal power of user 1; s = 0 gives
    (C1, C2~) and s = P1 gives (C1', C2).
    """
    if s_grid_size < 2:
        raise InvariantError("hk_inner_curve: grid must have at least 2 points")
    a2 = params.a**2
    p1, p2 = params.p1, params.p2
    pts = []
    for s in np.linspace(0.0, p1, s_grid_size):
        r1 = 0.5 * math.log1p(p1 - s) + 0.5 * math.log1p(a2 * s / (1.0 + a2 * (p1 - s) + p2))
        r2 = 0.5 * math.log1p(p2 / (1.0 + a2 * (p1 - s)))
        pts.append((r1, r2))
    return RegionCurve(tuple(pts), "inner")


# ---------------------------------------------------------------------------
# MAC intersection and sum-rate bound
# ---------------------------------------------------------------------------


def mac_intersection(params: GicParams):
    """Predicate for the intersection of the two MAC regions (both decode all)."""
    a2, b2 = params.a**2, params.b**2
    r1_cap = 0.5 * math.log1p(params.p1 * min(1.0, a2))
    r2_cap = 0.5 * math.log1p(params.p2 * min(1.0, b2))
    sum_cap = 0.5 * math.log1p(min(params.p1 + b2 * params.p2, params.p2 + a2 * params.p1))

    def inside(r1: float, r2: float) -> bool:
        return r1 >= 0.0 and r2 >= 0.0 and r1 <= r1_cap and r2 <= r2_cap and r1 + r2 <= sum_cap

    return inside


def sum_rate_bound(params: GicParams) -> float:
    """Sum-rate cap for b >= 1, where Y1 decodes both users."""
    if params.b < 1.0:
        raise InvariantError("sum_rate_bound: requires b >= 1")
    return 0.5 * math.log1p(params.b**2 * params.p2 + params.p1)


# ---------------------------------------------------------------------------
# Corner-point case tables
# ---------------------------------------------------------------------------


def corner_c1_prime(a: float, b: float, p1: float, p2: float) -> tuple[float, str]:
    """Max R1 at R2 = C2, with the case label of the applicable branch."""
    if not 0.0 <= a <= 1.0:
        raise InvariantError("corner_c1_prime: a must lie in [0,1]")
    if b < 0.0:
        raise InvariantError("corner_c1_prime: b must be >= 0")
    if a > 0.0:
        return 0.5 * math.log1p(a * a * p1 / (1.0 + p2)), "a_positive"
    if b == 0.0 or b >= math.sqrt(1.0 + p1):
        return 0.5 * math.log1p(p1), "a0_full_c1"
    if b > 1.0:
        return 0.5 * math.log1p((p1 + (b * b - 1.0) * p2) / (1.0 + p2)), "a0_moderate_b"
    return 0.5 * math.log1p(p1 / (1.0 + b * b * p2)), "a0_weak_b"


def corner_c2_prime(a: float, b: float, p1: float, p2: float) -> tuple[float, str]:
    """Max R2 at R1 = C1, with the case label of the applicable branch."""
    if not 0.0 <= a <= 1.0:
        raise InvariantError("corner_c2_prime: a must lie in [0,1]")
    if b < 0.0:
        raise InvariantError("corner_c2_prime: b must be >= 0")
    threshold = math.sqrt((1.0 + p1) / (1.0 + a * a * p1))
    if b == 0.0 or b >= threshold:
        return 0.5 * math.log1p(p2 / (1.0 + a * a * p1)), "b_zero_or_strong"
    if b > 1.0:
        return 0.5 * math.log1p(b * b * p2 / (1.0 + p1)), "b_moderate"
    return 0.5 * math.log1p(b * b * p2 / (1.0 + p1)), "b_weak"


def corner_report(params: GicParams) -> CornerReport:
    c1p, label1 = corner_c1_prime(params.a, params.b, params.p1, params.p2)
    c2p, label2 = corner_c2_prime(params.a, params.b, params.p1, params.p2)
    return CornerReport(
        c1=params.c1(),
        c2=params.c2(),
        c2_tilde=params.c2_tilde(),
        c1_prime=c1p,
        c2_prime=c2p,
        case_label=f"c1p={label1};c2p={label2}",
    )
