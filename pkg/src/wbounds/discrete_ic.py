"""Discrete-alphabet continuity bounds and the mod-3 interference corner.

Covers the Fano-type entropy-gap bound, per-letter channel constants, the
Dobrushin and strong-data-processing contraction coefficients, the concave
envelope governing tensorization of conditional-entropy gaps, and the corner
point of the additive mod-3 interference channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .core import Channel, InvariantError, Pmf, TwoInputChannel, simplex_grid
from .infomeasures import ConcaveMaxResult, capacity_1d_concave, entropy_of_probs, shannon_entropy
from .transport import dbar, eta_tv

LN3 = math.log(3.0)

__all__ = [
    "FcCurve",
    "GCurve",
    "DiscreteCornerReport",
    "EtaKlEstimate",
    "fano_fx",
    "entropy_gap_fano_ub",
    "channel_log_ratio_c",
    "prop_dbar_bounds",
    "eta_tv",
    "eta_tv_two_input",
    "eta_kl_two_input",
    "chang_one_sided_ub",
    "fc_envelope",
    "g_from_fc",
    "discrete_corner",
    "bernoulli_mod3_convolve",
]


def fano_fx(x: float, alphabet_size: int) -> float:
    """Fano function x ln(|X|-1) + h_b(x) in nats, with 0 ln(1/0) = 0."""
    if not 0.0 <= x <= 1.0:
        raise InvariantError(f"fano_fx: x={x!r} outside [0,1]")
    if alphabet_size < 2:
        raise InvariantError("fano_fx: alphabet_size must be >= 2")
    hb = 0.0
    if 0.0 < x < 1.0:
        hb = -x * math.log(x) - (1.0 - x) * math.log(1.0 - x)
    return x * math.log(alphabet_size - 1) + hb


def entropy_gap_fano_ub(p: Pmf, q: Pmf) -> float:
    """|H(P) - H(Q)| <= n F_X(dbar(P,Q)); requires exact dbar to be feasible."""
    if p.alphabet_size != q.alphabet_size or p.n != q.n:
        raise InvariantError("entropy_gap_fano_ub: pmfs must share alphabet and n")
    return p.n * fano_fx(dbar(p, q), p.alphabet_size)


def channel_log_ratio_c(w: TwoInputChannel) -> float:
    """Per-letter log-ratio constant: max over rows of ln(max entry / min entry).

    Returns +inf when some (x, a) row mixes zeros with positive mass; callers
    must reject an infinite constant before using the linear bounds.
    """
    rows = w.entries.reshape(-1, w.y_size)
    worst = 0.0
    for row in rows:
        mx = row.max()
        mn = row.min()
        if mn <= 0.0:
            if mx > 0.0:
                return math.inf
            continue
        worst = max(worst, math.log(mx / mn))
    return worst


def prop_dbar_bounds(
    w: TwoInputChannel,
    p_y: Pmf,
    p_y_tilde: Pmf,
    dbar_y: float,
    mean_conditional_dbar: float,
) -> tuple[float, float, float]:
    """The (entropy, divergence, information) bounds c n dbar, 2 c n dbar, 2 c n E[dbar|X]."""
    if p_y.alphabet_size != w.y_size or p_y_tilde.alphabet_size != w.y_size:
        raise InvariantError("prop_dbar_bounds: output pmfs must live on the channel output")
    if p_y.n != p_y_tilde.n:
        raise InvariantError("prop_dbar_bounds: output pmfs must share block length")
    c = channel_log_ratio_c(w)
    if math.isinf(c):
        raise InvariantError("prop_dbar_bounds: channel constant is infinite (zero entries)")
    n = p_y.n
    return (c * n * dbar_y, 2.0 * c * n * dbar_y, 2.0 * c * n * mean_conditional_dbar)


def eta_tv_two_input(w: TwoInputChannel) -> float:
    """Worst Dobrushin coefficient among the a-indexed channels W(.|x, .)."""
    return max(eta_tv(w.subchannel(x)) for x in range(w.x_size))


def chang_one_sided_ub(kl_nats: float, n: int, alphabet_size: int) -> float:
    """One-sided entropy gap against a product law: sqrt(2 n D) ln|X|."""
    if kl_nats < 0.0:
        raise InvariantError("chang_one_sided_ub: kl must be >= 0")
    return math.sqrt(2.0 * n * kl_nats) * math.log(alphabet_size)


# ---------------------------------------------------------------------------
# Strong data-processing constant (grid lower estimate)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EtaKlEstimate:
    """Grid-plus-refinement estimate of the KL contraction constant.

    The supremum is generally not attained on any grid, so ``value`` is a
    lower estimate; sound inequality checks must replace it by 1.
    """

    value: float
    grid_value: float
    x_star: int
    q_star: tuple

    kind: str = "grid_lower_bound"


def _kl_vec(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    if np.any(mask & (q <= 0)):
        return math.inf
    return float((p[mask] * (np.log(p[mask]) - np.log(q[mask]))).sum())


def eta_kl_two_input(
    w: TwoInputChannel,
    p0: Pmf,
    grid_resolution: int = 50,
    rel_tol: float = 1e-4,
) -> EtaKlEstimate:
    """sup over x and Q0 of D(Q0 Wx || p0 Wx) / D(Q0 || p0), gridded then refined.

    Q0 within KL 1e-6 of p0 is excluded to keep the ratio well-conditioned;
    local search halves its step until the relative improvement drops below
    ``rel_tol``.
    """
    if p0.size != w.a_size:
        raise InvariantError("eta_kl_two_input: p0 must live on the A alphabet")
    if p0.probs.min() <= 0.0:
        raise InvariantError("eta_kl_two_input: p0 must be strictly positive")

    p0v = p0.probs

    def ratio(x: int, q: np.ndarray) -> float:
        den = _kl_vec(q, p0v)
        if not math.isfinite(den) or den < 1e-6:
            return -1.0
        kern = w.entries[x]
        num = _kl_vec(q @ kern, p0v @ kern)
        if num < 1e-14:  # float dust from identical pushforwards
            num = 0.0
        return num / den

    grid = simplex_grid(w.a_size, grid_resolution)
    best = (-1.0, 0, p0v)
    for x in range(w.x_size):
        for q in grid:
            r = ratio(x, q)
            if r > best[0]:
                best = (r, x, q)
    grid_value = max(best[0], 0.0)

    value, x_star, q_star = grid_value, best[1], np.array(best[2])
    step = 0.5 / grid_resolution
    dim = w.a_size
    while step > 1e-9:
        improved = False
        for i in range(dim):
            for j in range(dim):
                if i == j:
                    continue
                cand = q_star.copy()
                cand[i] += step
                cand[j] -= step
                if cand.min() < 0.0:
                    continue
                cand /= cand.sum()
                r = ratio(x_star, cand)
                if r > value * (1.0 + rel_tol) or (r > value and value <= 0.0):
                    value, q_star = r, cand
                    improved = True
        if not improved:
            step *= 0.5
    return EtaKlEstimate(
        value=max(value, grid_value),
        grid_value=grid_value,
        x_star=int(x_star),
        q_star=tuple(float(t) for t in q_star),
    )


# ---------------------------------------------------------------------------
# Concave envelope of conditional-entropy pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FcCurve:
    """Upper concave, nondecreasing envelope of (H(X|B), H(X|A)) pairs.

    ``applicability`` carries the strictness margins: overlap_margin is the
    smallest pairwise row overlap of the A->B channel (condition: rows not
    mutually singular), tv_margin the smallest pairwise row TV of the X->A
    channel (condition: rows distinct).
    """

    knots: tuple
    t_max: float
    strict1: bool
    strict2: bool
    overlap_margin: float
    tv_margin: float
    grid_error: float

    def __post_init__(self):
        knots = tuple((float(t), float(f)) for t, f in self.knots)
        if not knots or knots[0] != (0.0, 0.0):
            raise InvariantError("fc curve: knots must start at (0, 0)")
        ts = [t for t, _ in knots]
        fs = [f for _, f in knots]
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise InvariantError("fc curve: knot abscissae must be strictly increasing")
        if any(f2 < f1 - 1e-12 for f1, f2 in zip(fs, fs[1:])):
            raise InvariantError("fc curve: envelope must be nondecreasing")
        if any(f > t + 1e-9 for t, f in knots):
            raise InvariantError("fc curve: envelope must satisfy F_c(t) <= t")
        # concavity across consecutive slopes
        slopes = [(f2 - f1) / (t2 - t1) for (t1, f1), (t2, f2) in zip(knots, knots[1:])]
        if any(s2 > s1 + 1e-9 for s1, s2 in zip(slopes, slopes[1:])):
            raise InvariantError("fc curve: envelope must be concave")
        object.__setattr__(self, "knots", knots)

    def value(self, t: float) -> float:
        """Piecewise-linear evaluation; queries beyond t_max clamp to the peak."""
        ts = np.array([k[0] for k in self.knots])
        fs = np.array([k[1] for k in self.knots])
        return float(np.interp(min(max(t, 0.0), self.t_max), ts, fs))


@dataclass(frozen=True)
class GCurve:
    """Numerical inverse of t -> t - F_c(t); g(0) = 0 and nondecreasing."""

    knots: tuple

    def __post_init__(self):
        knots = tuple((float(e), float(g)) for e, g in self.knots)
        if not knots or knots[0] != (0.0, 0.0):
            raise InvariantError("g curve: knots must start at (0, 0)")
        es = [e for e, _ in knots]
        gs = [g for _, g in knots]
        if any(e2 <= e1 for e1, e2 in zip(es, es[1:])):
            raise InvariantError("g curve: abscissae must be strictly increasing")
        if any(g2 < g1 for g1, g2 in zip(gs, gs[1:])):
            raise InvariantError("g curve: must be nondecreasing")
        object.__setattr__(self, "knots", knots)

    def value(self, eps: float) -> float:
        if eps < 0.0:
            raise InvariantError("g curve: eps must be >= 0")
        es = np.array([k[0] for k in self.knots])
        gs = np.array([k[1] for k in self.knots])
        return float(np.interp(min(eps, es[-1]), es, gs))


def _conditional_entropies(px_grid: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """H(X|O) for a batch of input laws through one kernel, vectorized."""
    joint = px_grid[:, :, None] * kernel[None, :, :]
    h_joint = -xlogy(joint, joint).sum(axis=(1, 2))
    marg = px_grid @ kernel
    h_marg = -xlogy(marg, marg).sum(axis=1)
    return h_joint - h_marg


def _upper_concave_hull(points: np.ndarray) -> list[tuple[float, float]]:
    """Upper hull (Andrew's monotone chain) of (t, F) points, left to right."""
    order = np.lexsort((-points[:, 1], points[:, 0]))
    pts = points[order]
    hull: list[tuple[float, float]] = []
    for t, f in pts:
        if hull and abs(t - hull[-1][0]) < 1e-12:
            continue  # same abscissa: the sort already put the best F first
        while len(hull) >= 2:
            (t1, f1), (t2, f2) = hull[-2], hull[-1]
            if (f2 - f1) * (t - t1) <= (f - f1) * (t2 - t1) + 1e-15:
                hull.pop()
            else:
                break
        hull.append((float(t), float(f)))
    return hull


def fc_envelope(
    p_a_given_x: Channel,
    p_b_given_a: Channel,
    simplex_grid_resolution: int,
) -> FcCurve:
    """Concave nondecreasing envelope of achievable (H(X|B), H(X|A)) pairs.

    Sweeping the input law over a simplex grid and taking the upper concave
    hull in t = H(X|B) realizes the auxiliary-variable optimization, since a
    ternary time-sharing variable suffices by Caratheodory.  The reported
    grid_error is a Fano-modulus bound on how far the true envelope can sit
    above the gridded one.
    """
    if p_a_given_x.output_size != p_b_given_a.input_size:
        raise InvariantError("fc_envelope: channels do not chain (A sizes differ)")
    if simplex_grid_resolution < 1:
        raise InvariantError("fc_envelope: empty grid")
    kx = p_a_given_x.input_size
    ka = p_a_given_x.output_size
    kb = p_b_given_a.output_size

    grid = simplex_grid(kx, simplex_grid_resolution)
    kernel_a = p_a_given_x.rows
    kernel_b = kernel_a @ p_b_given_a.rows
    f_vals = _conditional_entropies(grid, kernel_a)  # H(X|A)
    t_vals = _conditional_entropies(grid, kernel_b)  # H(X|B)
    t_vals = np.clip(t_vals, 0.0, None)
    f_vals = np.clip(f_vals, 0.0, None)
    f_vals = np.minimum(f_vals, t_vals + 0.0)  # degradedness up to roundoff

    pts = np.column_stack([t_vals, f_vals])
    pts = np.vstack([[0.0, 0.0], pts])
    hull = _upper_concave_hull(pts)

    # enforce nondecreasing: flatten past the peak
    peak_idx = max(range(len(hull)), key=lambda i: hull[i][1])
    t_max = hull[-1][0]
    knots = hull[: peak_idx + 1]
    if t_max > knots[-1][0] + 1e-12:
        knots.append((t_max, knots[-1][1]))
    if knots[0] != (0.0, 0.0):
        knots.insert(0, (0.0, 0.0))

    # strictness margins for the two applicability conditions
    rows_b = p_b_given_a.rows
    overlap = min(
        float(np.minimum(rows_b[i], rows_b[j]).sum())
        for i in range(ka)
        for j in range(i + 1, ka)
    ) if ka > 1 else 0.0
    rows_a = p_a_given_x.rows
    tv_margin = min(
        0.5 * float(np.abs(rows_a[i] - rows_a[j]).sum())
        for i in range(kx)
        for j in range(i + 1, kx)
    ) if kx > 1 else 0.0

    delta_tv = kx / (2.0 * simplex_grid_resolution)
    delta_tv = min(delta_tv, 1.0)
    err_f = fano_fx(delta_tv, max(kx * ka, 2)) + fano_fx(delta_tv, max(ka, 2))
    err_t = fano_fx(delta_tv, max(kx * kb, 2)) + fano_fx(delta_tv, max(kb, 2))

    return FcCurve(
        knots=tuple(knots),
        t_max=float(t_max),
        strict1=overlap > 1e-9,
        strict2=tv_margin > 1e-9,
        overlap_margin=overlap,
        tv_margin=tv_margin,
        grid_error=err_f + err_t,
    )


def g_from_fc(curve: FcCurve) -> GCurve:
    """Inverse of t -> t - F_c(t) over the envelope knots.

    Requires F_c(t) < t away from zero; the applicability flags computed from
    the channels gate the construction.
    """
    if not curve.strict1:
        raise InvariantError(
            "g_from_fc: condition violated (strict1): some A->B rows are mutually singular"
        )
    if not curve.strict2:
        raise InvariantError(
            "g_from_fc: condition violated (strict2): some X->A rows coincide"
        )
    eps_knots = [(0.0, 0.0)]
    for t, f in curve.knots[1:]:
        e = t - f
        if e <= eps_knots[-1][0]:
            raise InvariantError(
                "g_from_fc: envelope has F_c(t) = t in the interior; "
                "conditions (strict1)/(strict2) give no strict gap here"
            )
        eps_knots.append((e, t))
    return GCurve(tuple(eps_knots))


# ---------------------------------------------------------------------------
# Mod-3 interference corner point
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteCornerReport:
    c2: float
    c1_prime: float
    q_star: float
    p3: Pmf
    case: str
    search: ConcaveMaxResult | None = None

    def __post_init__(self):
        if self.c2 < 0.0 or self.c1_prime < 0.0:
            raise InvariantError("discrete corner: rates must be >= 0")
        if not 0.0 <= self.q_star <= 1.0:
            raise InvariantError("discrete corner: q_star must lie in [0,1]")


def bernoulli_mod3_convolve(q: float, p2: Pmf) -> Pmf:
    """Cyclic convolution of Bern(q) on {0,1} with a pmf on Z_3."""
    qvec = np.array([1.0 - q, q, 0.0])
    out = np.zeros(3)
    for shift in range(3):
        if qvec[shift] > 0.0:
            out += qvec[shift] * np.roll(p2.probs, shift)
    return Pmf(3, 1, out)


def discrete_corner(p2: Pmf) -> DiscreteCornerReport:
    """Corner point of the additive mod-3 channel with user-2 inputs in {0,1}.

    C2 maximizes H(Bern(q) * P2) - H(P2) over q; at that operating point
    C1' = ln 3 - H(P3).  Uniform noise makes user 2 invisible: the report
    then carries the degenerate pair (0, ln 2) with a distinguishing case tag.
    """
    if p2.alphabet_size != 3 or p2.n != 1:
        raise InvariantError("discrete_corner: p2 must be a single-letter pmf on Z_3")
    if p2.probs.min() <= 0.0:
        raise InvariantError(
            "discrete_corner: p2 must contain no zeros (channel constant c is infinite)"
        )
    if np.abs(p2.probs - 1.0 / 3.0).max() < 1e-12:
        return DiscreteCornerReport(
            c2=0.0,
            c1_prime=math.log(2.0),
            q_star=0.5,
            p3=Pmf.uniform(3),
            case="uniform_noise",
            search=None,
        )

    h2 = shannon_entropy(p2)

    def objective(q: float) -> float:
        return entropy_of_probs(bernoulli_mod3_convolve(q, p2).probs) - h2

    res = capacity_1d_concave(objective, tol=1e-9)
    p3 = bernoulli_mod3_convolve(res.argmax, p2)
    h3 = shannon_entropy(p3)
    return DiscreteCornerReport(
        c2=h3 - h2,
        c1_prime=LN3 - h3,
        q_star=res.argmax,
        p3=p3,
        case="theorem",
        search=res,
    )
