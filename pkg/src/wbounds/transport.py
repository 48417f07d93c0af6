"""Exact Wasserstein distances and divergence-to-transport converters.

Discrete optimal transport is solved exactly by the transportation simplex
(Bland's anti-cycling pivot order), so inequality verification downstream is
never blurred by approximation error.  Continuous 1-D W_p uses the quantile
representation with adaptive quadrature.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import (
    CouplingPlan,
    GaussianMixture1D,
    InvariantError,
    Pmf,
    all_index_strings,
)
from .quadrature import QuadResult, adaptive_simpson

_PIVOT_TOL = 1e-12
_MAX_PIVOTS_FACTOR = 200


@dataclass(frozen=True)
class CostMatrix:
    """Non-negative transport cost over support(mu) x support(nu)."""

    entries: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.entries, dtype=float)
        if c.ndim != 2:
            raise InvariantError("cost matrix must be 2-D")
        if not np.all(np.isfinite(c)):
            raise InvariantError("cost matrix: non-finite entry")
        if c.min() < 0.0:
            raise InvariantError(f"cost matrix: negative entry {c.min()!r}")
        arr = c.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @staticmethod
    def hamming(alphabet_size: int, n: int) -> "CostMatrix":
        """Normalized Hamming cost d_H(x,y)/n over X^n, entries in [0,1]."""
        digits = all_index_strings(alphabet_size, n)
        cost = (digits[:, None, :] != digits[None, :, :]).mean(axis=2)
        return CostMatrix(cost.astype(float))


# ---------------------------------------------------------------------------
# Transportation simplex
# ---------------------------------------------------------------------------


def _northwest_corner(a: np.ndarray, b: np.ndarray):
    """Initial basic feasible solution; always returns m+n-1 basis cells."""
    m, n = len(a), len(b)
    x = np.zeros((m, n))
    basis = []
    ra = a.copy()
    rb = b.copy()
    i = j = 0
    while True:
        t = min(ra[i], rb[j])
        x[i, j] = t
        basis.append((i, j))
        ra[i] -= t
        rb[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if ra[i] <= rb[j] and i < m - 1:
            i += 1
        elif j < n - 1:
            j += 1
        else:
            i += 1
    return x, basis


def _tree_duals(basis, cost, m, n):
    """Potentials with u[0]=0 solved over the spanning-tree basis."""
    rows_adj = [[] for _ in range(m)]
    cols_adj = [[] for _ in range(n)]
    for (i, j) in basis:
        rows_adj[i].append(j)
        cols_adj[j].append(i)
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    stack = [(True, 0)]
    while stack:
        is_row, idx = stack.pop()
        if is_row:
            for j in rows_adj[idx]:
                if np.isnan(v[j]):
                    v[j] = cost[idx, j] - u[idx]
                    stack.append((False, j))
        else:
            for i in cols_adj[idx]:
                if np.isnan(u[i]):
                    u[i] = cost[i, idx] - v[idx]
                    stack.append((True, i))
    return u, v


def _tree_cycle(basis, m, n, enter):
    """The unique alternating cycle created by adding ``enter`` to the basis.

    Returns the cycle cells starting with ``enter``; even positions gain flow,
    odd positions lose it.
    """
    i0, j0 = enter
    rows_adj = [[] for _ in range(m)]
    cols_adj = [[] for _ in range(n)]
    for (i, j) in basis:
        rows_adj[i].append(j)
        cols_adj[j].append(i)
    # BFS from col node j0 to row node i0 over basis edges
    parent = {}
    start = ("c", j0)
    goal = ("r", i0)
    parent[start] = None
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        kind, idx = node
        if kind == "c":
            for i in cols_adj[idx]:
                nxt = ("r", i)
                if nxt not in parent:
                    parent[nxt] = node
                    queue.append(nxt)
        else:
            for j in rows_adj[idx]:
                nxt = ("c", j)
                if nxt not in parent:
                    parent[nxt] = node
                    queue.append(nxt)
    if goal not in parent:
        raise RuntimeError("basis is not a spanning tree")
    path_nodes = [goal]
    while parent[path_nodes[-1]] is not None:
        path_nodes.append(parent[path_nodes[-1]])
    path_nodes.reverse()  # r_i0 ... c_j0
    cycle = [enter]
    for a, b in zip(path_nodes[:-1], path_nodes[1:]):
        (ka, ia), (kb, ib) = a, b
        cell = (ia, ib) if ka == "r" else (ib, ia)
        cycle.append(cell)
    return cycle


def ot_exact(mu: Pmf, nu: Pmf, cost: CostMatrix) -> CouplingPlan:
    """Exact optimal transport between two pmfs under an arbitrary cost.

    Transportation simplex with Bland's rule on both the entering cell (first
    negative reduced cost in lexicographic cell order) and the leaving cell
    (lexicographically smallest minimizer), which rules out cycling on
    degenerate bases.  The returned plan carries dual potentials certifying
    optimality via complementary slackness.
    """
    a_full = np.asarray(mu.probs, dtype=float)
    b_full = np.asarray(nu.probs, dtype=float)
    C_full = cost.entries
    if C_full.shape != (len(a_full), len(b_full)):
        raise InvariantError(
            f"ot_exact: cost shape {C_full.shape} does not match marginals "
            f"({len(a_full)}, {len(b_full)})"
        )

    rows = np.flatnonzero(a_full > 0.0)
    cols = np.flatnonzero(b_full > 0.0)
    a = a_full[rows].copy()
    b = b_full[cols].copy()
    b *= a.sum() / b.sum()  # balance to machine precision
    C = C_full[np.ix_(rows, cols)]
    m, n = len(a), len(b)

    x, basis = _northwest_corner(a, b)
    basis_set = set(basis)
    scale = max(1.0, float(np.abs(C).max()) if C.size else 1.0)
    tol = _PIVOT_TOL * scale
    max_pivots = 1000 + _MAX_PIVOTS_FACTOR * m * n

    for _ in range(max_pivots):
        u, v = _tree_duals(basis, C, m, n)
        reduced = C - u[:, None] - v[None, :]
        negative = reduced < -tol
        if not negative.any():
            break
        flat = int(np.argmax(negative.ravel()))  # first in lexicographic order
        enter = divmod(flat, n)
        cycle = _tree_cycle(basis, m, n, enter)
        losers = cycle[1::2]
        theta = min(x[c] for c in losers)
        leave = min(c for c in losers if x[c] <= theta)
        for k, c in enumerate(cycle):
            if k % 2 == 0:
                x[c] += theta
            else:
                x[c] -= theta
        x[leave] = 0.0
        basis_set.remove(leave)
        basis_set.add(enter)
        basis = sorted(basis_set)
    else:
        raise RuntimeError("transportation simplex exceeded pivot budget")

    x = np.clip(x, 0.0, None)
    cost_value = float((x * C).sum())

    joint = np.zeros((len(a_full), len(b_full)))
    joint[np.ix_(rows, cols)] = x
    u_full = np.full(len(a_full), np.nan)
    v_full = np.full(len(b_full), np.nan)
    u_full[rows] = u
    v_full[cols] = v
    # Feasible potentials for zero-mass rows/cols (mass 0, any feasible value)
    for i in np.flatnonzero(a_full == 0.0):
        u_full[i] = float((C_full[i, cols] - v).min()) if n else 0.0
    for j in np.flatnonzero(b_full == 0.0):
        v_full[j] = float((C_full[rows, j] - u_full[rows]).min()) if m else 0.0

    plan = CouplingPlan(joint, cost_value, u_full, v_full)
    _assert_certificate(plan, a_full, b_full, C_full)
    return plan


def _assert_certificate(plan: CouplingPlan, a, b, C, tol: float = 1e-9) -> None:
    """Strong-duality certificate; raises if the solve produced an invalid plan."""
    x = plan.joint
    if np.abs(x.sum(axis=1) - a).max() > tol or np.abs(x.sum(axis=0) - b).max() > tol:
        raise RuntimeError("ot_exact: plan marginals violate feasibility")
    u, v = plan.row_potentials, plan.col_potentials
    if (C - u[:, None] - v[None, :]).min() < -tol:
        raise RuntimeError("ot_exact: dual potentials infeasible")
    gap = abs(float(u @ a + v @ b) - plan.cost_value)
    if gap > tol:
        raise RuntimeError(f"ot_exact: duality gap {gap!r} exceeds tolerance")


# ---------------------------------------------------------------------------
# Discrete distances
# ---------------------------------------------------------------------------


def tv(p: Pmf, q: Pmf) -> float:
    """Total variation, half the L1 distance."""
    if p.size != q.size:
        raise InvariantError(f"tv: support sizes differ ({p.size} vs {q.size})")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def dbar(p: Pmf, q: Pmf, return_plan: bool = False):
    """Ornstein distance: exact W1 under normalized Hamming cost on X^n."""
    if p.alphabet_size != q.alphabet_size or p.n != q.n:
        raise InvariantError("dbar: pmfs must share alphabet and block length")
    if p.alphabet_size ** (2 * p.n) > 10**6:
        raise InvariantError(
            "dbar: instance too large for exact transport; "
            "use dbar_tensorize_ub for an upper bound instead"
        )
    plan = ot_exact(p, q, CostMatrix.hamming(p.alphabet_size, p.n))
    value = min(max(plan.cost_value, 0.0), 1.0)
    return (value, plan) if return_plan else value


def wasserstein_1d_discrete(positions_p, probs_p, positions_q, probs_q, p_order: int = 1):
    """Exact W_p for two discrete 1-D laws via ot_exact with |x-y|^p cost."""
    mu = Pmf.from_probs(probs_p)
    nu = Pmf.from_probs(probs_q)
    xs = np.asarray(positions_p, dtype=float)
    ys = np.asarray(positions_q, dtype=float)
    cost = CostMatrix(np.abs(xs[:, None] - ys[None, :]) ** p_order)
    plan = ot_exact(mu, nu, cost)
    return plan.cost_value ** (1.0 / p_order)


# ---------------------------------------------------------------------------
# 1-D continuous Wasserstein by quantiles
# ---------------------------------------------------------------------------


def _quantile_bracket(mix: GaussianMixture1D, tail_sigma: float = 12.0):
    lo_m, hi_m = mix.support_span()
    pad = tail_sigma * mix.sigma_max() + 1e-9 * (1.0 + abs(lo_m) + abs(hi_m)) + 1e-9
    return lo_m - pad - 1.0, hi_m + pad + 1.0


def _batch_quantile(mix: GaussianMixture1D, u: np.ndarray) -> np.ndarray:
    """Generalized inverse CDF by vectorized bisection on F(x) >= u.

    Smooth mixtures switch to guarded Newton once the bracket is tight; pure
    bisection runs to convergence when atoms make the CDF discontinuous.
    """
    lo_val, hi_val = _quantile_bracket(mix)
    lo = np.full_like(u, lo_val)
    hi = np.full_like(u, hi_val)
    smooth = mix.is_smooth
    for _ in range(30 if smooth else 90):
        mid = 0.5 * (lo + hi)
        ge = mix.cdf(mid) >= u
        hi = np.where(ge, mid, hi)
        lo = np.where(ge, lo, mid)
    if not smooth:
        return hi
    x = 0.5 * (lo + hi)
    for _ in range(8):
        fx = mix.cdf(x) - u
        dens = np.maximum(mix.pdf(x), 1e-300)
        x = np.clip(x - fx / dens, lo, hi)
    return x


def wp_quantile_1d(
    p: GaussianMixture1D,
    q: GaussianMixture1D,
    p_order: int,
    abs_tol: float = 1e-8,
) -> QuadResult:
    """W_p(P, Q) = (integral over u of |F_P^-1(u) - F_Q^-1(u)|^p du)^(1/p).

    Quantiles come from bracketed bisection (exact generalized inverses, so
    atomic components are handled); the u-integral uses adaptive Simpson with
    an explicit tail-error estimate.  Returns value with certified error.
    """
    if p_order not in (1, 2):
        raise InvariantError("wp_quantile_1d: p must be 1 or 2")

    def integrand(u):
        du = _batch_quantile(p, u) - _batch_quantile(q, u)
        return np.abs(du) ** p_order

    eps = 1e-13
    seeds = [eps]
    for s in (1e-9, 1e-6, 1e-3, 1e-2, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1 - 1e-3, 1 - 1e-6, 1 - 1e-9):
        seeds.append(s)
    seeds.append(1.0 - eps)
    res = adaptive_simpson(integrand, eps, 1.0 - eps, abs_tol=abs_tol * 0.5, seeds=seeds)
    tail = eps * float(integrand(np.array([eps]))[0] + integrand(np.array([1.0 - eps]))[0])
    total = max(res.value, 0.0)
    err = res.error + 2.0 * tail
    value = total ** (1.0 / p_order)
    upper = (total + err) ** (1.0 / p_order)
    return QuadResult(value=value, error=max(upper - value, 0.0), certified=res.certified)


def gaussian_w2(mean1: float, var1: float, mean2: float, var2: float) -> float:
    """Closed-form W2 between two 1-D Gaussians."""
    if var1 < 0 or var2 < 0:
        raise InvariantError("gaussian_w2: variances must be >= 0")
    return math.sqrt((mean1 - mean2) ** 2 + (math.sqrt(var1) - math.sqrt(var2)) ** 2)


# ---------------------------------------------------------------------------
# Transportation-information converters (pure formula evaluators, nats)
# ---------------------------------------------------------------------------


def talagrand_w2_ub(kl_nats: float, sigma_max_sq: float) -> float:
    """W2 upper bound from KL against a Gaussian reference: sqrt(2 sigma^2 D)."""
    if kl_nats < 0 or sigma_max_sq <= 0:
        raise InvariantError("talagrand_w2_ub: need kl >= 0 and sigma_max_sq > 0")
    return math.sqrt(2.0 * sigma_max_sq * kl_nats)


def marton_dbar_ub(kl_nats: float, n: int) -> float:
    """dbar upper bound against a product reference: sqrt(D / (2n))."""
    if kl_nats < 0 or n < 1:
        raise InvariantError("marton_dbar_ub: need kl >= 0 and n >= 1")
    return math.sqrt(kl_nats / (2.0 * n))


def dbar_tensorize_ub(p_letters, q_letters) -> float:
    """Upper bound on dbar of products: average of per-letter total variations."""
    if len(p_letters) != len(q_letters):
        raise InvariantError("dbar_tensorize_ub: letter lists must have equal length")
    n = len(p_letters)
    return sum(tv(pi, qi) for pi, qi in zip(p_letters, q_letters)) / n


def eta_tv(kernel) -> float:
    """Dobrushin contraction coefficient: max pairwise row total variation."""
    rows = kernel.rows
    k = rows.shape[0]
    best = 0.0
    for i in range(k):
        diff = 0.5 * np.abs(rows[i + 1 :] - rows[i]).sum(axis=1)
        if diff.size:
            best = max(best, float(diff.max()))
    return min(best, 1.0)


def dbar_contraction_ub(dbar_x: float, kernels) -> float:
    """Contraction of dbar through a product channel: max_i eta_TV(W_i) * dbar."""
    if not 0.0 <= dbar_x <= 1.0:
        raise InvariantError("dbar_contraction_ub: dbar_x must lie in [0,1]")
    return max(eta_tv(k) for k in kernels) * dbar_x
