"""Acceptance suite: every criterion at its stated tolerance and budget.

One PASS/FAIL line prints per criterion (run pytest with -s to see them all).
Criterion 13 concerns the optional plotting component and lives in that
package's own test suite; everything here runs without it.
"""

import functools
import json
import math
import time

import numpy as np
import pytest

from oracles import ot_vertex_enumeration
from wbounds.cli import main
from wbounds.core import Channel, GaussianMixture1D, Pmf
from wbounds.discrete_ic import discrete_corner, fano_fx, fc_envelope, g_from_fc
from wbounds.gic import GicParams, PowerConstraint, hk_inner_curve, outer_bound_r1
from wbounds.infomeasures import (
    diff_entropy_1d,
    entropy_of_probs,
    kl_discrete,
    shannon_entropy,
)
from wbounds.transport import CostMatrix, dbar, marton_dbar_ub, ot_exact, tv, wp_quantile_1d
from wbounds.verify import TrialConfig, run_family

LN2 = math.log(2.0)
LN3 = math.log(3.0)


def criterion(num: int, budget_s: float, desc: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[criterion {num:02d}] FAIL  {desc}")
                raise
            dt = time.perf_counter() - t0
            print(f"[criterion {num:02d}] PASS  {desc}  ({dt:.2f}s / budget {budget_s:.0f}s)")
            assert dt < budget_s, f"criterion {num} exceeded its {budget_s}s budget ({dt:.1f}s)"
        return wrapper
    return deco


@criterion(1, 5.0, "Gaussian variance-shift: W2 and entropy gap closed forms")
def test_criterion_01_gaussian_remark():
    base = GaussianMixture1D.single(0.0, 2.0)
    h_base = diff_entropy_1d(base)
    for t in (0.01, 0.1, 1.0):
        shifted = GaussianMixture1D.single(0.0, 2.0 + t)
        w2 = wp_quantile_1d(base, shifted, 2)
        assert w2.value == pytest.approx(math.sqrt(2.0 + t) - math.sqrt(2.0), abs=1e-6)
        gap = abs(h_base.value - diff_entropy_1d(shifted).value)
        assert gap == pytest.approx(0.5 * math.log1p(t / 2.0), abs=1e-8)


@criterion(2, 1.0, "outer bound at R2=C2 equals the corner value, both constraints")
def test_criterion_02_corner_consistency():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        a = float(rng.uniform(1e-6, 1.0))
        p1, p2 = (float(rng.uniform(0.1, 10.0)) for _ in range(2))
        target = 0.5 * math.log1p(a * a * p1 / (1.0 + p2))
        for constraint in PowerConstraint:
            params = GicParams(a, 0.0, p1, p2, constraint)
            assert outer_bound_r1(params, params.c2()) == pytest.approx(target, abs=1e-9)


@criterion(3, 5.0, "outer bound dominates the rate-splitting inner curve")
def test_criterion_03_outer_dominates_inner():
    rng = np.random.default_rng(33)
    for _ in range(20):
        a = float(rng.uniform(0.05, 1.0))
        p1, p2 = (float(rng.uniform(0.1, 10.0)) for _ in range(2))
        for constraint in PowerConstraint:
            params = GicParams(a, 0.0, p1, p2, constraint)
            for r1_hk, r2_hk in hk_inner_curve(params, 30).points:
                if params.c2_tilde() <= r2_hk <= params.c2():
                    assert outer_bound_r1(params, r2_hk) >= r1_hk - 1e-9


@criterion(4, 30.0, "exact OT vs polytope enumeration; dbar = tv at n = 1")
def test_criterion_04_ot_exactness():
    rng = np.random.default_rng(44)
    for _ in range(200):
        m, n = (int(rng.integers(2, 5)) for _ in range(2))
        mu = Pmf.from_probs(rng.dirichlet(np.ones(m)))
        nu = Pmf.from_probs(rng.dirichlet(np.ones(n)))
        cost = CostMatrix(rng.uniform(0.0, 2.0, size=(m, n)))
        plan = ot_exact(mu, nu, cost)
        assert abs(plan.cost_value - ot_vertex_enumeration(mu.probs, nu.probs, cost.entries)) <= 1e-9
    for _ in range(500):
        k = int(rng.integers(2, 5))
        p = Pmf.from_probs(rng.dirichlet(np.ones(k)))
        q = Pmf.from_probs(rng.dirichlet(np.ones(k)))
        assert dbar(p, q) == pytest.approx(tv(p, q), abs=1e-12)


_MARTON_CACHE: list = []


def _marton_instances():
    """1000 (P arbitrary, Q product) pairs with exact dbar; shared by #5 and #6."""
    if not _MARTON_CACHE:
        rng = np.random.default_rng(55)
        for _ in range(1000):
            k = int(rng.choice([2, 3]))
            n = int(rng.integers(1, 4))
            p = Pmf(k, n, rng.dirichlet(np.ones(k**n)))
            q = Pmf.product([Pmf.from_probs(rng.dirichlet(np.ones(k))) for _ in range(n)])
            _MARTON_CACHE.append((k, n, p, q, dbar(p, q)))
    return _MARTON_CACHE


@criterion(5, 120.0, "Marton: exact dbar <= sqrt(D/2n) on 1000 product-reference pairs")
def test_criterion_05_marton_suite():
    failures = 0
    for _, n, p, q, d in _marton_instances():
        failures += d > marton_dbar_ub(kl_discrete(p, q), n)
    assert failures == 0


@criterion(6, 120.0, "Fano continuity: |H(P)-H(Q)| <= n F_X(dbar) on 1000 pairs")
def test_criterion_06_jpt_suite():
    failures = 0
    for k, n, p, q, d in _marton_instances():
        gap = abs(shannon_entropy(p) - shannon_entropy(q))
        failures += gap > n * fano_fx(d, k) + 1e-10
    assert failures == 0


@criterion(7, 120.0, "two-input channel entropy/divergence/information bounds, 300 channels")
def test_criterion_07_dbar_props_suite():
    report = run_family(TrialConfig(seed=77, trials=300, family="dbar_props"))
    assert not report.failures, report.failures[:3]
    assert report.certified


@criterion(8, 120.0, "dbar tensorization/contraction and KL chains (eta_KL -> 1), 300 instances")
def test_criterion_08_marton_chain_suite():
    report = run_family(TrialConfig(seed=88, trials=300, family="marton_chain"))
    assert not report.failures, report.failures[:3]
    assert report.certified


@criterion(9, 300.0, "continuous regularity suite: certificates + all entropy-gap bounds")
def test_criterion_09_continuous_regularity():
    for family in ("ppr", "w2lip", "best", "cor_best"):
        report = run_family(TrialConfig(seed=99, trials=50, family=family))
        assert not report.failures, (family, report.failures[:3])
        assert report.certified, family
        assert report.min_slack > 0.0


@criterion(10, 120.0, "concave envelope: identity diagonal, strict gap, tensorization, g")
def test_criterion_10_fc_suite():
    ident = fc_envelope(Channel.bsc(0.1), Channel.identity(2), 200)
    assert max(abs(t - f) for t, f in ident.knots) <= 2e-3

    chain = fc_envelope(Channel.bsc(0.1), Channel.bsc(0.1), 200)
    margin = 0.3 - chain.value(0.3)
    assert margin > 0.0
    print(f"    strict-gap margin at t=0.3 nats: {margin:.6f}")

    kern_a2 = np.kron(chain_rows := Channel.bsc(0.1).rows, chain_rows)
    kern_ab = chain_rows @ chain_rows
    kern_b2 = np.kron(kern_ab, kern_ab)
    rng = np.random.default_rng(1010)
    for _ in range(100):
        joint = rng.dirichlet(np.ones(4))

        def cond_entropy(kern):
            j = joint[:, None] * kern
            return entropy_of_probs(j.ravel()) - entropy_of_probs(j.sum(axis=0))

        lhs = 0.5 * cond_entropy(kern_a2)
        rhs = chain.value(0.5 * cond_entropy(kern_b2)) + chain.grid_error
        assert lhs <= rhs

    g = g_from_fc(chain)
    assert g.value(0.0) == 0.0
    gs = [v for _, v in g.knots]
    assert all(b >= a for a, b in zip(gs, gs[1:]))


@criterion(11, 1.0, "mod-3 corner point: argmax, identity, grid oracle, uniform case")
def test_criterion_11_discrete_corner():
    p2 = Pmf.from_probs([0.8, 0.1, 0.1])
    report = discrete_corner(p2)
    assert report.q_star == pytest.approx(0.5, abs=1e-5)
    identity_gap = abs(report.c1_prime + report.c2 - (LN3 - shannon_entropy(p2)))
    assert identity_gap <= 1e-12

    # dense 1e-6-resolution oracle, vectorized over the whole grid
    h2 = shannon_entropy(p2)
    qs = np.arange(0.0, 1.0 + 5e-7, 1e-6)
    conv = np.outer(1.0 - qs, p2.probs) + np.outer(qs, np.roll(p2.probs, 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        h3 = -np.nansum(np.where(conv > 0, conv * np.log(conv), 0.0), axis=1)
    best = float(h3.max() - h2)
    assert report.c2 == pytest.approx(best, abs=1e-6)

    uniform = discrete_corner(Pmf.uniform(3))
    assert (uniform.c2, uniform.c1_prime) == (0.0, pytest.approx(LN2))


@criterion(12, 60.0, "byte-identical verify reports and region CSVs for a fixed seed")
def test_criterion_12_determinism(tmp_path):
    r1, r2 = tmp_path / "v1.json", tmp_path / "v2.json"
    vargs = ["verify", "--family", "marton_chain", "--trials", "25", "--seed", "12", "--quiet"]
    assert main(vargs + ["--out", str(r1)]) == 0
    assert main(vargs + ["--out", str(r2)]) == 0
    assert r1.read_bytes() == r2.read_bytes()

    c1, c2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
    rargs = ["region", "gic", "--a", "0.8", "--b", "0", "--p1", "6", "--p2", "6",
             "--grid", "64", "--quiet"]
    assert main(rargs + ["--out", str(c1)]) == 0
    assert main(rargs + ["--out", str(c2)]) == 0
    assert c1.read_bytes() == c2.read_bytes()

    report = json.loads(r1.read_text())
    assert not report["failures"]
