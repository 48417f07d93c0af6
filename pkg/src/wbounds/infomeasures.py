"""Entropy, divergence, and mutual information on both sides of every bound.

Discrete quantities are exact sums; 1-D differential quantities use the
adaptive Simpson engine over a tail-truncated window (the truncation is part
of the reported error estimate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import xlogy

from .core import Channel, GaussianMixture1D, InvariantError, Pmf
from .quadrature import QuadResult, adaptive_simpson


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy contract for the 1-D integrals."""

    abs_tol: float = 1e-9
    rel_tol: float = 0.0
    max_subdivisions: int = 40
    tail_sigma: float = 12.0

    def __post_init__(self):
        if self.abs_tol <= 0:
            raise InvariantError("quadrature: abs_tol must be > 0")
        if self.tail_sigma < 10:
            raise InvariantError("quadrature: tail_sigma must be >= 10")


DEFAULT_QUADRATURE = QuadratureSpec()


# ---------------------------------------------------------------------------
# Discrete measures (exact)
# ---------------------------------------------------------------------------


def shannon_entropy(p: Pmf) -> float:
    """H(P) in nats, with 0 log 0 = 0."""
    return float(-xlogy(p.probs, p.probs).sum())


def entropy_of_probs(probs: np.ndarray) -> float:
    """Entropy of a raw probability vector (internal fast path)."""
    return float(-xlogy(probs, probs).sum())


def kl_discrete(p: Pmf, q: Pmf) -> float:
    """D(P||Q) in nats; +inf when supp(P) is not contained in supp(Q)."""
    if p.size != q.size:
        raise InvariantError(f"kl_discrete: support sizes differ ({p.size} vs {q.size})")
    pp, qq = p.probs, q.probs
    if np.any((pp > 0) & (qq == 0)):
        return math.inf
    mask = pp > 0
    return float((pp[mask] * (np.log(pp[mask]) - np.log(qq[mask]))).sum())


def mutual_info_discrete(input_pmf: Pmf, channel: Channel) -> float:
    """I(X;Y) = H(Y) - sum_x p(x) H(Y|X=x), in nats."""
    if input_pmf.size != channel.input_size:
        raise InvariantError(
            f"mutual_info: input size {input_pmf.size} does not match channel "
            f"input {channel.input_size}"
        )
    px = input_pmf.probs
    out = px @ channel.rows
    h_rows = -xlogy(channel.rows, channel.rows).sum(axis=1)
    return entropy_of_probs(out) - float(px @ h_rows)


# ---------------------------------------------------------------------------
# 1-D differential measures
# ---------------------------------------------------------------------------


def _integration_window(mixes, tail_sigma: float):
    lo = min(m.support_span()[0] for m in mixes)
    hi = max(m.support_span()[1] for m in mixes)
    sig = max(m.sigma_max() for m in mixes)
    return lo - tail_sigma * sig, hi + tail_sigma * sig


def _mixture_seeds(mixes, lo, hi):
    seeds = []
    for m in mixes:
        seeds.extend(float(x) for x in m.means)
        sig = m.sigma_max()
        seeds.extend(float(x) + s * sig for x in m.means for s in (-2.0, 2.0))
    return [s for s in seeds if lo < s < hi]


def _integrate(f: Callable, mixes, spec: QuadratureSpec) -> QuadResult:
    lo, hi = _integration_window(mixes, spec.tail_sigma)
    res = adaptive_simpson(
        f, lo, hi, abs_tol=spec.abs_tol, rel_tol=spec.rel_tol,
        max_depth=spec.max_subdivisions,
        seeds=_mixture_seeds(mixes, lo, hi),
    )
    # Interval-doubling tail check: integrate the doubled-out shoulders and
    # fold any unexpected mass into the error estimate.
    width = hi - lo
    left = adaptive_simpson(f, lo - 0.5 * width, lo, abs_tol=spec.abs_tol, max_depth=12)
    right = adaptive_simpson(f, hi, hi + 0.5 * width, abs_tol=spec.abs_tol, max_depth=12)
    tail = abs(left.value) + abs(right.value) + left.error + right.error
    return QuadResult(res.value, res.error + tail, res.certified)


def diff_entropy_1d(p: GaussianMixture1D, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> QuadResult:
    """h(P) = -integral of f log f, in nats, with certified error estimate."""
    if not p.is_smooth:
        raise InvariantError("diff_entropy_1d: all component variances must be > 0")

    def integrand(x):
        lf = p.logpdf(x)
        f = np.exp(lf)
        return -np.where(f > 0, f * lf, 0.0)

    return _integrate(integrand, [p], spec)


def kl_1d(
    p: GaussianMixture1D,
    q: GaussianMixture1D,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> QuadResult:
    """D(P||Q) = integral of f log(f/g), in nats."""
    if not p.is_smooth or not q.is_smooth:
        raise InvariantError("kl_1d: all component variances must be > 0")

    def integrand(x):
        lf = p.logpdf(x)
        lg = q.logpdf(x)
        f = np.exp(lf)
        return np.where(f > 0, f * (lf - lg), 0.0)

    return _integrate(integrand, [p, q], spec)


def convolve_with_gaussian(p: GaussianMixture1D, sigma_sq: float) -> GaussianMixture1D:
    """Exact convolution with N(0, sigma_sq): every component variance grows."""
    if sigma_sq <= 0:
        raise InvariantError("convolve_with_gaussian: sigma_sq must be > 0")
    return GaussianMixture1D(p.weights, p.means, p.variances + sigma_sq)


def gaussian_entropy(var: float, n: int = 1) -> float:
    """Closed form h(N(mu, var I_n)) = (n/2) ln(2 pi e var)."""
    if var <= 0:
        raise InvariantError("gaussian_entropy: var must be > 0")
    return 0.5 * n * math.log(2.0 * math.pi * math.e * var)


def gaussian_kl(var1: float, var2: float) -> float:
    """Closed form D(N(0,var1) || N(0,var2)) in nats."""
    if var1 <= 0 or var2 <= 0:
        raise InvariantError("gaussian_kl: variances must be > 0")
    r = var1 / var2
    return 0.5 * (r - 1.0 - math.log(r))


# ---------------------------------------------------------------------------
# Concave maximization on [0, 1]
# ---------------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ConcaveMaxResult:
    argmax: float
    value: float
    concave_certified: bool
    method: str


def capacity_1d_concave(
    objective: Callable[[float], float],
    tol: float = 1e-9,
    concavity_samples: int = 33,
) -> ConcaveMaxResult:
    """Golden-section maximization of a concave objective on [0, 1].

    Concavity is spot-checked by midpoint sampling first; on failure the
    search falls back to a dense grid and the result is flagged.
    """
    xs = np.linspace(0.0, 1.0, concavity_samples)
    fs = np.array([objective(float(x)) for x in xs])
    scale = 1.0 + float(np.abs(fs).max())
    concave_ok = bool(np.all(fs[1:-1] >= 0.5 * (fs[:-2] + fs[2:]) - 1e-9 * scale))

    if not concave_ok:
        grid = np.linspace(0.0, 1.0, max(1001, min(int(math.ceil(1.0 / tol)) + 1, 10**6)))
        vals = np.array([objective(float(x)) for x in grid])
        k = int(np.argmax(vals))
        return ConcaveMaxResult(float(grid[k]), float(vals[k]), False, "grid_fallback")

    a, b = 0.0, 1.0
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = objective(c), objective(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = objective(d)
    mid = 0.5 * (a + b)
    return ConcaveMaxResult(mid, objective(mid), True, "golden_section")
