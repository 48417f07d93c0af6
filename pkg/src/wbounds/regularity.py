"""Regular-density calculus: smoothing constants and entropy-gap bounds.

A density p on R^n is (c1, c2)-regular when |grad log p(x)| <= c1|x| + c2
pointwise.  Every evaluator here is a pure formula in nats over precomputed
moments and transport distances; moment estimation stays with the caller so
each inequality is testable with controlled inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GaussianMixture1D, InvariantError


@dataclass(frozen=True)
class RegularityParams:
    """Log-gradient growth constants, nats per unit length."""

    c1: float
    c2: float

    def __post_init__(self):
        if not (self.c1 > 0.0) or self.c2 < 0.0:
            raise InvariantError("regularity: need c1 > 0 and c2 >= 0")

    def merge(self, other: "RegularityParams") -> "RegularityParams":
        """Constants valid for two densities at once (pointwise max)."""
        return RegularityParams(max(self.c1, other.c1), max(self.c2, other.c2))


@dataclass(frozen=True)
class MomentData:
    """Moment inputs shared by the bound evaluators."""

    m2_u: float = 0.0
    m2_v: float = 0.0
    mean_dot: float = 0.0
    norm1_b: float = 0.0
    sup_norm_b: float = 0.0

    def __post_init__(self):
        if min(self.m2_u, self.m2_v, self.norm1_b, self.sup_norm_b) < 0.0:
            raise InvariantError("moments: second moments and norms must be >= 0")
        # Cauchy-Schwarz consistency when a first-moment bound is supplied
        if self.norm1_b > 0.0 and self.sup_norm_b > 0.0 and self.norm1_b > self.sup_norm_b + 1e-12:
            raise InvariantError("moments: E|B| cannot exceed the almost-sure bound")


def delta_ppr(reg: RegularityParams, m2_u: float, m2_v: float, w2: float) -> float:
    """Entropy-gap coefficient times W2: (c1/2 (sqrt(m2_u)+sqrt(m2_v)) + c2) W2."""
    if min(m2_u, m2_v, w2) < 0.0:
        raise InvariantError("delta_ppr: all inputs must be >= 0")
    return (0.5 * reg.c1 * math.sqrt(m2_u) + 0.5 * reg.c1 * math.sqrt(m2_v) + reg.c2) * w2


def gaussian_smoothing_regularity(sigma_sq: float, norm1_b: float) -> RegularityParams:
    """Constants of B + N(0, sigma^2 I): (3/sigma^2, 4 E|B| / sigma^2) in nats."""
    if sigma_sq <= 0.0 or norm1_b < 0.0:
        raise InvariantError("gaussian_smoothing_regularity: need sigma_sq > 0, norm1_b >= 0")
    return RegularityParams(3.0 / sigma_sq, 4.0 * norm1_b / sigma_sq)


def shift_regularity(reg: RegularityParams, sup_norm_b: float) -> RegularityParams:
    """Adding a bounded independent shift |B| <= s keeps c1 and grows c2 by c1 s."""
    if sup_norm_b < 0.0:
        raise InvariantError("shift_regularity: sup_norm_b must be >= 0")
    return RegularityParams(reg.c1, reg.c2 + reg.c1 * sup_norm_b)


def w2lip_delta(sigma_sq: float, p_cap: float, n: int, w2: float) -> float:
    """Smoothed-input Lipschitz bound: (3 sqrt(n(s+P)) + 4 sqrt(nP)) W2 / s."""
    if sigma_sq <= 0.0 or min(p_cap, w2) < 0.0 or n < 1:
        raise InvariantError("w2lip_delta: invalid inputs")
    return (3.0 * math.sqrt(n * (sigma_sq + p_cap)) + 4.0 * math.sqrt(n * p_cap)) / sigma_sq * w2


def best_bound(sigma_g_sq: float, sup_norm_b: float, m2_u: float, m2_v: float, w1: float) -> float:
    """Sharpened one-sided gap for V = B + G with bounded B; may be negative."""
    if sigma_g_sq <= 0.0 or sup_norm_b < 0.0:
        raise InvariantError("best_bound: need sigma_g_sq > 0 and sup_norm_b >= 0")
    return (m2_u - m2_v + 2.0 * sup_norm_b * w1) / (2.0 * sigma_g_sq)


def cor_best_bound(
    sigma_g_sq: float,
    sigma_z_sq: float,
    c: float,
    sup_norm_b: float,
    m2_a: float,
    mean_dot: float,
    m2_g: float,
    kl_smoothed: float,
) -> float:
    """One-sided gap h(B+A+Z) - h(B+G+Z) from the divergence at reduced noise.

    The moment part is (m2_a + 2 mean_dot - m2_g) / (2 (sG^2 + sZ^2)); the
    transport part converts D(A + cZ || G + cZ) through the Gaussian
    transportation inequality, with sup_norm_b^2 playing the power budget.
    """
    if not 0.0 <= c <= 1.0:
        raise InvariantError("cor_best_bound: c must lie in [0, 1]")
    if sigma_g_sq <= 0.0 or sigma_z_sq <= 0.0 or kl_smoothed < 0.0 or sup_norm_b < 0.0:
        raise InvariantError("cor_best_bound: invalid inputs")
    s_total = sigma_g_sq + sigma_z_sq
    moment = (m2_a + 2.0 * mean_dot - m2_g) / (2.0 * s_total)
    coef = math.sqrt(2.0 * sup_norm_b**2 * (sigma_g_sq + c * c * sigma_z_sq)) / s_total
    return moment + coef * math.sqrt(kl_smoothed)


def symmetric_kl_bound(reg: RegularityParams, m2_u: float, m2_v: float, w2: float) -> float:
    """D(U||V) + D(V||U) <= 2 Delta when both laws share the constants."""
    return 2.0 * delta_ppr(reg, m2_u, m2_v, w2)


# ---------------------------------------------------------------------------
# Numerical regularity certificate at n = 1
# ---------------------------------------------------------------------------


def log_density_gradient(mix: GaussianMixture1D, x) -> np.ndarray:
    """(log p)'(x) for a smooth mixture, via softmax-weighted component scores."""
    if not mix.is_smooth:
        raise InvariantError("log_density_gradient: mixture contains atoms")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = x[:, None] - mix.means[None, :]
    expo = (
        -0.5 * z * z / mix.variances[None, :]
        - 0.5 * np.log(2.0 * math.pi * mix.variances)[None, :]
        + np.log(np.clip(mix.weights, 1e-300, None))[None, :]
    )
    peak = expo.max(axis=1, keepdims=True)
    w = np.exp(expo - peak)
    w /= w.sum(axis=1, keepdims=True)
    return (w * (-z / mix.variances[None, :])).sum(axis=1)


def regularity_certificate(
    smoothed: GaussianMixture1D,
    reg: RegularityParams,
    grid_points: int = 2001,
) -> tuple[bool, float]:
    """Check |(log p)'(x)| <= c1 |x| + c2 on a grid spanning +-10(sigma + max|b|).

    Returns (holds, max_violation); max_violation <= 0 when the certificate
    holds with margin.
    """
    span = 10.0 * (smoothed.sigma_max() + float(np.abs(smoothed.means).max()))
    xs = np.linspace(-span, span, grid_points)
    grad = np.abs(log_density_gradient(smoothed, xs))
    allowed = reg.c1 * np.abs(xs) + reg.c2
    violation = float((grad - allowed).max())
    return violation <= 1e-9 * (1.0 + reg.c1 * span + reg.c2), violation
