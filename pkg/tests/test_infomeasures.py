import math

import numpy as np
import pytest

from oracles import mixture_entropy_riemann
from wbounds.core import Channel, GaussianMixture1D, InvariantError, Pmf
from wbounds.infomeasures import (
    QuadratureSpec,
    capacity_1d_concave,
    convolve_with_gaussian,
    diff_entropy_1d,
    entropy_of_probs,
    gaussian_entropy,
    gaussian_kl,
    kl_1d,
    kl_discrete,
    mutual_info_discrete,
    shannon_entropy,
)
from wbounds.transport import tv

LN2 = math.log(2.0)


def _binary_entropy_nats(p: float) -> float:
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def test_shannon_entropy_examples():
    assert shannon_entropy(Pmf.point_mass(4, 1, 2)) == 0.0
    assert shannon_entropy(Pmf.uniform(7)) == pytest.approx(math.log(7))
    assert shannon_entropy(Pmf.from_probs([0.5, 0.25, 0.25])) == pytest.approx(1.5 * LN2)


def test_kl_discrete_examples():
    p = Pmf.from_probs([0.3, 0.7])
    assert kl_discrete(p, p) == 0.0
    assert kl_discrete(Pmf.from_probs([1.0, 0.0]), Pmf.uniform(2)) == pytest.approx(LN2)
    assert kl_discrete(Pmf.from_probs([0.3, 0.7]), Pmf.from_probs([1.0, 0.0])) == math.inf
    with pytest.raises(InvariantError):
        kl_discrete(Pmf.uniform(2), Pmf.uniform(3))


def test_pinsker_inequality_randomized():
    rng = np.random.default_rng(4)
    for _ in range(300):
        k = int(rng.integers(2, 6))
        p = Pmf.from_probs(rng.dirichlet(np.ones(k)))
        q = Pmf.from_probs(rng.dirichlet(np.ones(k)))
        assert kl_discrete(p, q) >= 2.0 * tv(p, q) ** 2 - 1e-12


def test_mutual_info_examples():
    flat = Channel(2, 2, [[0.3, 0.7], [0.3, 0.7]])
    assert mutual_info_discrete(Pmf.uniform(2), flat) == pytest.approx(0.0, abs=1e-15)
    assert mutual_info_discrete(Pmf.uniform(4), Channel.identity(4)) == pytest.approx(
        math.log(4)
    )
    bsc = Channel.bsc(0.11)
    assert mutual_info_discrete(Pmf.uniform(2), bsc) == pytest.approx(
        LN2 - _binary_entropy_nats(0.11)
    )


def test_mutual_info_joint_decomposition():
    rng = np.random.default_rng(8)
    for _ in range(50):
        kx, ky = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        px = Pmf.from_probs(rng.dirichlet(np.ones(kx)))
        ch = Channel(kx, ky, rng.dirichlet(np.ones(ky), size=kx))
        joint = px.probs[:, None] * ch.rows
        h_joint = entropy_of_probs(joint.ravel())
        hx = shannon_entropy(px)
        hy = entropy_of_probs(joint.sum(axis=0))
        assert mutual_info_discrete(px, ch) == pytest.approx(hx + hy - h_joint, abs=1e-12)


def test_diff_entropy_gaussian_closed_forms():
    for var in (0.25, 1.0, 4.0):
        res = diff_entropy_1d(GaussianMixture1D.single(0.7, var))
        assert res.certified
        assert res.value == pytest.approx(gaussian_entropy(var), abs=1e-9)


def test_diff_entropy_collapse_limit():
    mix = GaussianMixture1D.from_components([(0.5, -1e-9, 1.0), (0.5, 1e-9, 1.0)])
    assert diff_entropy_1d(mix).value == pytest.approx(gaussian_entropy(1.0), abs=1e-9)


def test_diff_entropy_mixture_vs_riemann_oracle():
    mix = GaussianMixture1D.from_components([(0.5, 0.0, 1.0), (0.5, 0.0, 2.0)])
    oracle = mixture_entropy_riemann(mix, step=1e-4)
    res = diff_entropy_1d(mix)
    assert res.value == pytest.approx(oracle, abs=1e-6)


def test_diff_entropy_rejects_atoms():
    with pytest.raises(InvariantError):
        diff_entropy_1d(GaussianMixture1D.atoms([0.0], [1.0]))


def test_quadrature_spec_invariants():
    with pytest.raises(InvariantError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(InvariantError):
        QuadratureSpec(tail_sigma=5.0)


def test_kl_1d_examples():
    g2 = GaussianMixture1D.single(0.0, 2.0)
    assert kl_1d(g2, g2).value == pytest.approx(0.0, abs=1e-9)
    mix = GaussianMixture1D.from_components([(0.5, 0.0, 1.0), (0.5, 0.0, 2.0)])
    counterexample = kl_1d(g2, mix).value
    assert counterexample <= LN2 + 1e-9
    assert kl_1d(GaussianMixture1D.single(0, 1.0), g2).value == pytest.approx(
        gaussian_kl(1.0, 2.0), abs=1e-9
    )
    assert gaussian_kl(1.0, 2.0) == pytest.approx(0.5 * (LN2 - 0.5))


def test_kl_1d_nonnegative():
    rng = np.random.default_rng(12)
    for _ in range(20):
        k = int(rng.integers(2, 4))
        p = GaussianMixture1D(
            rng.dirichlet(np.ones(k)), rng.uniform(-2, 2, k), rng.uniform(0.5, 2, k)
        )
        q = GaussianMixture1D.single(float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 2)))
        res = kl_1d(p, q)
        assert res.value >= -res.error - 1e-12


def test_convolution_examples():
    atom = GaussianMixture1D.atoms([0.0], [1.0])
    smoothed = convolve_with_gaussian(atom, 1.0)
    assert smoothed.variances == pytest.approx([1.0])
    g = convolve_with_gaussian(GaussianMixture1D.single(0.0, 1.0), 1.0)
    assert g.variances == pytest.approx([2.0])
    two = convolve_with_gaussian(GaussianMixture1D.atoms([-1, 1], [0.4, 0.6]), 0.7)
    assert two.variances == pytest.approx([0.7, 0.7])
    assert two.weights == pytest.approx([0.4, 0.6])
    with pytest.raises(InvariantError):
        convolve_with_gaussian(atom, 0.0)


def test_smoothing_increases_entropy():
    rng = np.random.default_rng(21)
    for _ in range(10):
        k = int(rng.integers(2, 4))
        mix = GaussianMixture1D(
            rng.dirichlet(np.ones(k)), rng.uniform(-2, 2, k), rng.uniform(0.3, 1.0, k)
        )
        h0 = diff_entropy_1d(mix).value
        h1 = diff_entropy_1d(convolve_with_gaussian(mix, 0.5)).value
        h2 = diff_entropy_1d(convolve_with_gaussian(mix, 1.5)).value
        assert h0 <= h1 + 1e-8
        assert h1 <= h2 + 1e-8


def test_capacity_concave_quadratic():
    res = capacity_1d_concave(lambda q: -((q - 0.3) ** 2), tol=1e-10)
    assert res.concave_certified
    assert res.argmax == pytest.approx(0.3, abs=1e-8)


def test_capacity_concave_symmetric():
    res = capacity_1d_concave(lambda q: -((q - 0.5) ** 4), tol=1e-9)
    assert res.argmax == pytest.approx(0.5, abs=1e-6)


def test_capacity_concave_channel_objective():
    p2 = np.array([0.8, 0.1, 0.1])

    def objective(q):
        conv = (1 - q) * p2 + q * np.roll(p2, 1)
        return entropy_of_probs(conv) - entropy_of_probs(p2)

    res = capacity_1d_concave(objective, tol=1e-9)
    assert res.concave_certified
    assert res.argmax == pytest.approx(0.5, abs=1e-6)


def test_capacity_nonconcave_falls_back_to_grid():
    res = capacity_1d_concave(lambda q: math.sin(12.0 * q), tol=1e-4)
    assert not res.concave_certified
    assert res.method == "grid_fallback"
    assert res.argmax == pytest.approx(math.pi / 24.0, abs=1e-3)
