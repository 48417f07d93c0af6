"""Randomized inequality verification with reproducible trials.

Each family draws instances from a documented generator, evaluates the exact
(or quadrature-certified) left side against the claimed bound, and records
slack = rhs - lhs - certified numeric error.  Trial t of a run with seed s
uses the counter-based stream Philox(key=[s, t]), so reports are bit-identical
across platforms and trial scheduling.  All randomness lives in
:func:`instance_generators`; the per-family evaluators are deterministic in
the drawn instance.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import discrete_ic, gic, regularity, transport
from .core import Channel, GaussianMixture1D, InvariantError, Pmf, TwoInputChannel
from .infomeasures import (
    QuadratureSpec,
    diff_entropy_1d,
    entropy_of_probs,
    kl_1d,
    kl_discrete,
    shannon_entropy,
)

FAMILIES = (
    "ppr",
    "w2lip",
    "best",
    "cor_best",
    "jpt",
    "dbar_props",
    "marton_chain",
    "fc",
    "gic_corner",
    "discrete_corner",
)

TOLERANCES = {
    "ppr": 1e-9,
    "w2lip": 1e-9,
    "best": 1e-9,
    "cor_best": 1e-9,
    "jpt": 1e-10,
    "dbar_props": 1e-10,
    "marton_chain": 1e-10,
    "fc": 1e-10,
    "gic_corner": 0.0,
    "discrete_corner": 0.0,
}

_CHANNEL_FLOOR = 0.02
_QUAD = QuadratureSpec(abs_tol=1e-9)
_W2_TOL = 1e-8


@dataclass(frozen=True)
class TrialConfig:
    seed: int
    trials: int
    family: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvariantError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.trials < 1:
            raise InvariantError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvariantError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    err: float = 0.0
    certified: bool = True

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs - self.err


@dataclass
class VerifyReport:
    family: str
    seed: int
    trials_run: int
    failures: list = field(default_factory=list)
    min_slack: float = math.inf
    certified: bool = True
    tolerance: float = 0.0

    def to_json(self) -> str:
        obj = {
            "family": self.family,
            "seed": self.seed,
            "trials_run": self.trials_run,
            "failures": self.failures,
            "min_slack": self.min_slack,
            "certified": self.certified,
            "tolerance": self.tolerance,
        }
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Per-trial stream: Philox keyed by (run seed, trial index)."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, trial], dtype=np.uint64)))


def _flatten_for_digest(value):
    if isinstance(value, GaussianMixture1D):
        return [value.weights, value.means, value.variances]
    if isinstance(value, Pmf):
        return [value.probs]
    if isinstance(value, Channel):
        return [value.rows]
    if isinstance(value, TwoInputChannel):
        return [value.entries]
    if isinstance(value, (list, tuple)):
        arrays = []
        for item in value:
            arrays.extend(_flatten_for_digest(item))
        return arrays
    return [np.atleast_1d(np.asarray(value, dtype=float))]


def instance_digest(family: str, trial: int, instance: dict) -> str:
    """Deterministic digest of a drawn instance (sorted-key canonical bytes)."""
    h = hashlib.sha256()
    h.update(family.encode())
    h.update(trial.to_bytes(8, "little"))
    for key in sorted(instance):
        h.update(key.encode())
        for arr in _flatten_for_digest(instance[key]):
            a = np.asarray(arr, dtype=float)
            h.update(repr(a.shape).encode())
            h.update(a.tobytes())
    return h.hexdigest()[:12]


# ---------------------------------------------------------------------------
# Instance generators (all randomness lives here)
# ---------------------------------------------------------------------------


def rand_atoms(rng) -> GaussianMixture1D:
    """2..4 atoms in [-2, 2] with Dirichlet-uniform weights (so E X^2 <= 4)."""
    k = int(rng.integers(2, 5))
    pos = rng.uniform(-2.0, 2.0, size=k)
    w = rng.dirichlet(np.ones(k))
    return GaussianMixture1D.atoms(pos, w)


def rand_pmf(rng, size: int, n: int = 1, alphabet_size: int | None = None) -> Pmf:
    probs = rng.dirichlet(np.ones(size))
    return Pmf(alphabet_size if alphabet_size else size, n, probs)


def _floored_row(rng, k: int) -> np.ndarray:
    # epsilon-mixing keeps every entry in [0.02, 1 - 0.02 (k-1)]
    return (1.0 - _CHANNEL_FLOOR * k) * rng.dirichlet(np.ones(k)) + _CHANNEL_FLOOR


def rand_channel(rng, k_in: int, k_out: int, floored: bool = False) -> Channel:
    if floored:
        rows = np.stack([_floored_row(rng, k_out) for _ in range(k_in)])
    else:
        rows = rng.dirichlet(np.ones(k_out), size=k_in)
    return Channel(k_in, k_out, rows)


def rand_two_input_channel(rng, kx: int, ka: int, ky: int) -> TwoInputChannel:
    """Floored rows keep the log-ratio constant c <= ln(0.98/0.02)."""
    w = np.stack([[_floored_row(rng, ky) for _ in range(ka)] for _ in range(kx)])
    return TwoInputChannel(kx, ka, ky, w)


def _gen_ppr(rng) -> dict:
    return {
        "sigma_u2": float(rng.uniform(0.5, 2.0)),
        "sigma_v2": float(rng.uniform(0.5, 2.0)),
        "b_u": rand_atoms(rng),
        "b_v": rand_atoms(rng),
    }


def _gen_w2lip(rng) -> dict:
    return {
        "sigma2": float(rng.uniform(0.5, 2.0)),
        "x": rand_atoms(rng),
        "xt": rand_atoms(rng),
    }


def _gen_best(rng) -> dict:
    return {
        "b": rand_atoms(rng),
        "u": rand_atoms(rng),
        "sigma_g2": float(rng.uniform(0.5, 2.0)),
        "sigma_u2": float(rng.uniform(0.5, 2.0)),
    }


def _gen_cor_best(rng) -> dict:
    return {
        "b": rand_atoms(rng),
        "a": rand_atoms(rng),
        "sigma_g2": float(rng.uniform(0.5, 2.0)),
        "sigma_z2": float(rng.uniform(0.5, 2.0)),
        "c": float(rng.uniform(0.3, 1.0)),
    }


def _gen_jpt(rng) -> dict:
    k = int(rng.choice([2, 3]))
    n = int(rng.integers(1, 4))
    return {
        "k": k,
        "n": n,
        "p": rand_pmf(rng, k**n, n=n, alphabet_size=k),
        "q": rand_pmf(rng, k**n, n=n, alphabet_size=k),
    }


def _gen_dbar_props(rng) -> dict:
    kx = int(rng.choice([2, 3]))
    ka = int(rng.choice([2, 3]))
    ky = int(rng.choice([2, 3]))
    n = int(rng.integers(1, 3))
    return {
        "n": n,
        "w": rand_two_input_channel(rng, kx, ka, ky),
        "px": rand_pmf(rng, kx**n, n=n, alphabet_size=kx),
        "pa": rand_pmf(rng, ka**n, n=n, alphabet_size=ka),
        "pat": rand_pmf(rng, ka**n, n=n, alphabet_size=ka),
    }


def _gen_marton_chain(rng) -> dict:
    k = int(rng.choice([2, 3]))
    n = int(rng.integers(1, 4))
    inst = {
        "k": k,
        "n": n,
        "p": rand_pmf(rng, k**n, n=n, alphabet_size=k),
        "q_letters": [rand_pmf(rng, k) for _ in range(n)],
        "p_letters": [rand_pmf(rng, k) for _ in range(n)],
        "r_letters": [rand_pmf(rng, k) for _ in range(n)],
    }
    nc = int(rng.integers(1, 3))
    inst["kernels"] = [rand_channel(rng, k, k) for _ in range(nc)]
    inst["px"] = rand_pmf(rng, k**nc, n=nc, alphabet_size=k)
    inst["qx"] = rand_pmf(rng, k**nc, n=nc, alphabet_size=k)
    kx, ka, ky = (int(rng.choice([2, 3])) for _ in range(3))
    nn = int(rng.integers(1, 3))
    inst["nn"] = nn
    inst["w"] = rand_two_input_channel(rng, kx, ka, ky)
    inst["px2"] = rand_pmf(rng, kx**nn, n=nn, alphabet_size=kx)
    inst["pa"] = rand_pmf(rng, ka**nn, n=nn, alphabet_size=ka)
    inst["p0"] = rand_pmf(rng, ka)
    return inst


def _gen_fc(rng) -> dict:
    kx = int(rng.choice([2, 3]))
    ka = int(rng.choice([2, 3]))
    kb = int(rng.choice([2, 3]))
    return {
        "chan_a": rand_channel(rng, kx, ka, floored=True),
        "chan_b": rand_channel(rng, ka, kb, floored=True),
        "joint": rand_pmf(rng, kx * kx, n=2, alphabet_size=kx),
    }


def _gen_gic_corner(rng) -> dict:
    return {
        "a": float(rng.uniform(1e-6, 1.0)),
        "p1": float(rng.uniform(0.1, 10.0)),
        "p2": float(rng.uniform(0.1, 10.0)),
    }


def _gen_discrete_corner(rng) -> dict:
    while True:
        probs = (1.0 - _CHANNEL_FLOOR * 3) * rng.dirichlet(np.ones(3)) + _CHANNEL_FLOOR
        if np.abs(probs - 1.0 / 3.0).max() > 1e-4:
            return {"p2": Pmf(3, 1, probs)}


_GENERATORS = {
    "ppr": _gen_ppr,
    "w2lip": _gen_w2lip,
    "best": _gen_best,
    "cor_best": _gen_cor_best,
    "jpt": _gen_jpt,
    "dbar_props": _gen_dbar_props,
    "marton_chain": _gen_marton_chain,
    "fc": _gen_fc,
    "gic_corner": _gen_gic_corner,
    "discrete_corner": _gen_discrete_corner,
}


def instance_generators(family: str, rng) -> dict:
    """Draw one verification instance for ``family`` from the given stream."""
    if family not in _GENERATORS:
        raise InvariantError(f"unknown family {family!r}")
    return _GENERATORS[family](rng)


# ---------------------------------------------------------------------------
# Family evaluators (deterministic in the instance)
# ---------------------------------------------------------------------------


def smooth(atoms: GaussianMixture1D, sigma_sq: float) -> GaussianMixture1D:
    return GaussianMixture1D(atoms.weights, atoms.means, atoms.variances + sigma_sq)


def _letter_kernel_power(kernel: np.ndarray, n: int) -> np.ndarray:
    """Memoryless n-letter extension of a per-letter kernel tensor (MSB first)."""
    out = kernel
    for _ in range(n - 1):
        kx, ka, ky = out.shape
        kx1, ka1, ky1 = kernel.shape
        out = (
            out[:, None, :, None, :, None] * kernel[None, :, None, :, None, :]
        ).reshape(kx * kx1, ka * ka1, ky * ky1)
    return out


def _measure_sum_atoms(a: GaussianMixture1D, b: GaussianMixture1D, var: float) -> GaussianMixture1D:
    """Law of A + B + N(0, var) for independent atomic A, B."""
    pos = (a.means[:, None] + b.means[None, :]).ravel()
    w = (a.weights[:, None] * b.weights[None, :]).ravel()
    return GaussianMixture1D(w, pos, np.full_like(pos, var))


def _eval_ppr(inst: dict, scale: float) -> list[Check]:
    sigma_u2, sigma_v2 = inst["sigma_u2"], inst["sigma_v2"]
    b_u, b_v = inst["b_u"], inst["b_v"]
    u = smooth(b_u, sigma_u2)
    v = smooth(b_v, sigma_v2)
    reg_u = regularity.gaussian_smoothing_regularity(sigma_u2, b_u.mean_abs())
    reg_v = regularity.gaussian_smoothing_regularity(sigma_v2, b_v.mean_abs())
    reg_both = reg_u.merge(reg_v)
    m2u, m2v = u.second_moment(), v.second_moment()
    w2 = transport.wp_quantile_1d(u, v, 2, abs_tol=_W2_TOL)
    hu = diff_entropy_1d(u, _QUAD)
    hv = diff_entropy_1d(v, _QUAD)
    kuv = kl_1d(u, v, _QUAD)
    kvu = kl_1d(v, u, _QUAD)

    def coef(reg):
        return 0.5 * reg.c1 * (math.sqrt(m2u) + math.sqrt(m2v)) + reg.c2

    h_err = hu.error + hv.error
    checks = [
        Check(
            "ppr2_one_sided",
            lhs=hu.value - hv.value,
            rhs=scale * regularity.delta_ppr(reg_v, m2u, m2v, w2.value),
            err=h_err + coef(reg_v) * w2.error,
            certified=hu.certified and hv.certified and w2.certified,
        ),
        Check(
            "ppr3_two_sided",
            lhs=abs(hu.value - hv.value),
            rhs=scale * regularity.delta_ppr(reg_both, m2u, m2v, w2.value),
            err=h_err + coef(reg_both) * w2.error,
            certified=hu.certified and hv.certified and w2.certified,
        ),
        Check(
            "ppr4_symmetric_kl",
            lhs=kuv.value + kvu.value,
            rhs=scale * regularity.symmetric_kl_bound(reg_both, m2u, m2v, w2.value),
            err=kuv.error + kvu.error + 2.0 * coef(reg_both) * w2.error,
            certified=kuv.certified and kvu.certified and w2.certified,
        ),
    ]
    for tag, mix, reg in (("u", u, reg_u), ("v", v, reg_v)):
        _, violation = regularity.regularity_certificate(mix, reg)
        checks.append(Check(f"regularity_certificate_{tag}", lhs=violation, rhs=0.0))
    return checks


def _eval_w2lip(inst: dict, scale: float) -> list[Check]:
    sigma2 = inst["sigma2"]
    p_cap = 4.0  # atoms live in [-2, 2], so E X^2 <= 4 by construction
    xz = smooth(inst["x"], sigma2)
    xtz = smooth(inst["xt"], sigma2)
    w2 = transport.wp_quantile_1d(xz, xtz, 2, abs_tol=_W2_TOL)
    h1 = diff_entropy_1d(xz, _QUAD)
    h2 = diff_entropy_1d(xtz, _QUAD)
    k12 = kl_1d(xz, xtz, _QUAD)
    k21 = kl_1d(xtz, xz, _QUAD)
    delta = regularity.w2lip_delta(sigma2, p_cap, 1, w2.value)
    coef = (3.0 * math.sqrt(sigma2 + p_cap) + 4.0 * math.sqrt(p_cap)) / sigma2
    reg = regularity.gaussian_smoothing_regularity(sigma2, math.sqrt(p_cap))
    checks = [
        Check(
            "w2lip_entropy_gap",
            lhs=abs(h1.value - h2.value),
            rhs=scale * delta,
            err=h1.error + h2.error + coef * w2.error,
            certified=h1.certified and h2.certified and w2.certified,
        ),
        Check(
            "w2lip_symmetric_kl",
            lhs=k12.value + k21.value,
            rhs=scale * 2.0 * delta,
            err=k12.error + k21.error + 2.0 * coef * w2.error,
            certified=k12.certified and k21.certified and w2.certified,
        ),
    ]
    for tag, mix in (("x", xz), ("xt", xtz)):
        _, violation = regularity.regularity_certificate(mix, reg)
        checks.append(Check(f"regularity_certificate_{tag}", lhs=violation, rhs=0.0))
    return checks


def _eval_best(inst: dict, scale: float) -> list[Check]:
    b_atoms, u_atoms = inst["b"], inst["u"]
    sigma_g2, sigma_u2 = inst["sigma_g2"], inst["sigma_u2"]
    sup_b = float(np.abs(b_atoms.means).max())
    v = smooth(b_atoms, sigma_g2)
    u = smooth(u_atoms, sigma_u2)
    w1 = transport.wp_quantile_1d(u, v, 1, abs_tol=_W2_TOL)
    hu = diff_entropy_1d(u, _QUAD)
    hv = diff_entropy_1d(v, _QUAD)
    rhs = regularity.best_bound(sigma_g2, sup_b, u.second_moment(), v.second_moment(), w1.value)
    reg_v = regularity.gaussian_smoothing_regularity(sigma_g2, b_atoms.mean_abs())
    _, violation = regularity.regularity_certificate(v, reg_v)
    return [
        Check(
            "best_one_sided",
            lhs=hu.value - hv.value,
            rhs=scale * rhs,
            err=hu.error + hv.error + (sup_b / sigma_g2) * w1.error,
            certified=hu.certified and hv.certified and w1.certified,
        ),
        Check("regularity_certificate_v", lhs=violation, rhs=0.0),
    ]


def _eval_cor_best(inst: dict, scale: float) -> list[Check]:
    b_atoms, a_atoms = inst["b"], inst["a"]
    sigma_g2, sigma_z2, c = inst["sigma_g2"], inst["sigma_z2"], inst["c"]
    sup_b = float(np.abs(b_atoms.means).max())

    baz = _measure_sum_atoms(b_atoms, a_atoms, sigma_z2)
    bgz = smooth(b_atoms, sigma_g2 + sigma_z2)
    acz = smooth(a_atoms, c * c * sigma_z2)
    gcz = GaussianMixture1D.single(0.0, sigma_g2 + c * c * sigma_z2)

    h1 = diff_entropy_1d(baz, _QUAD)
    h2 = diff_entropy_1d(bgz, _QUAD)
    kl = kl_1d(acz, gcz, _QUAD)
    kl_lo = max(kl.value - kl.error, 0.0)
    m2a = a_atoms.second_moment()
    mean_dot = a_atoms.mean() * b_atoms.mean()
    rhs = regularity.cor_best_bound(
        sigma_g2, sigma_z2, c, sup_b, m2a, mean_dot, sigma_g2, max(kl.value, 0.0)
    )
    rhs_lo = regularity.cor_best_bound(
        sigma_g2, sigma_z2, c, sup_b, m2a, mean_dot, sigma_g2, kl_lo
    )
    reg = regularity.gaussian_smoothing_regularity(sigma_g2 + sigma_z2, b_atoms.mean_abs())
    _, violation = regularity.regularity_certificate(bgz, reg)
    return [
        Check(
            "cor_best_one_sided",
            lhs=h1.value - h2.value,
            rhs=scale * rhs,
            err=h1.error + h2.error + (rhs - rhs_lo),
            certified=h1.certified and h2.certified and kl.certified,
        ),
        Check("regularity_certificate_bgz", lhs=violation, rhs=0.0),
    ]


def _eval_jpt(inst: dict, scale: float) -> list[Check]:
    p, q, k, n = inst["p"], inst["q"], inst["k"], inst["n"]
    lhs = abs(shannon_entropy(p) - shannon_entropy(q))
    rhs = n * discrete_ic.fano_fx(transport.dbar(p, q), k)
    return [Check("jpt_entropy_gap", lhs=lhs, rhs=scale * rhs)]


def _eval_dbar_props(inst: dict, scale: float) -> list[Check]:
    w, n = inst["w"], inst["n"]
    px, pa, pat = inst["px"], inst["pa"], inst["pat"]
    kx, ky = w.x_size, w.y_size

    kern = _letter_kernel_power(w.entries, n)
    cond_y = np.einsum("a,xay->xy", pa.probs, kern)
    cond_yt = np.einsum("a,xay->xy", pat.probs, kern)
    py = Pmf(ky, n, px.probs @ cond_y)
    pyt = Pmf(ky, n, px.probs @ cond_yt)

    d_y = transport.dbar(py, pyt)
    mean_cond = 0.0
    for xi in range(kx**n):
        mean_cond += px.probs[xi] * transport.dbar(
            Pmf(ky, n, cond_y[xi]), Pmf(ky, n, cond_yt[xi])
        )
    h_bound, d_bound, i_bound = discrete_ic.prop_dbar_bounds(w, py, pyt, d_y, mean_cond)

    hy, hyt = shannon_entropy(py), shannon_entropy(pyt)
    kl_sum = kl_discrete(py, pyt) + kl_discrete(pyt, py)
    iy = hy - float(px.probs @ [entropy_of_probs(row) for row in cond_y])
    iyt = hyt - float(px.probs @ [entropy_of_probs(row) for row in cond_yt])

    return [
        Check("dbarH", lhs=abs(hy - hyt), rhs=scale * h_bound),
        Check("dbarD", lhs=kl_sum, rhs=scale * d_bound),
        Check("dbarI", lhs=abs(iy - iyt), rhs=scale * i_bound),
        Check("dbar_convexity", lhs=d_y, rhs=scale * mean_cond),
    ]


def _eval_marton_chain(inst: dict, scale: float) -> list[Check]:
    k, n = inst["k"], inst["n"]
    p = inst["p"]
    q = Pmf.product(inst["q_letters"])
    checks = [
        Check(
            "marton1",
            lhs=transport.dbar(p, q),
            rhs=scale * transport.marton_dbar_ub(kl_discrete(p, q), n),
        ),
        Check(
            "tensorization",
            lhs=transport.dbar(
                Pmf.product(inst["p_letters"]), Pmf.product(inst["r_letters"])
            ),
            rhs=scale * transport.dbar_tensorize_ub(inst["p_letters"], inst["r_letters"]),
        ),
    ]
    kernels = inst["kernels"]
    px, qx = inst["px"], inst["qx"]
    kern = kernels[0].rows
    for ch in kernels[1:]:
        kern = np.kron(kern, ch.rows)
    nc = px.n
    py = Pmf(k, nc, px.probs @ kern)
    qy = Pmf(k, nc, qx.probs @ kern)
    checks.append(
        Check(
            "contraction",
            lhs=transport.dbar(py, qy),
            rhs=scale * transport.dbar_contraction_ub(transport.dbar(px, qx), kernels),
        )
    )
    w, nn = inst["w"], inst["nn"]
    px2, pa, p0 = inst["px2"], inst["pa"], inst["p0"]
    ky = w.y_size
    pat = Pmf.product([p0] * nn)
    kern2 = _letter_kernel_power(w.entries, nn)
    cond_y = np.einsum("a,xay->xy", pa.probs, kern2)
    cond_yt = np.einsum("a,xay->xy", pat.probs, kern2)
    py2 = Pmf(ky, nn, px2.probs @ cond_y)
    pyt2 = Pmf(ky, nn, px2.probs @ cond_yt)
    d_y = transport.dbar(py2, pyt2)
    mean_cond = sum(
        px2.probs[xi]
        * transport.dbar(Pmf(ky, nn, cond_y[xi]), Pmf(ky, nn, cond_yt[xi]))
        for xi in range(w.x_size**nn)
    )
    eta = discrete_ic.eta_tv_two_input(w)
    d_a = transport.dbar(pa, pat)
    kl_a = kl_discrete(pa, pat)
    checks += [
        Check("chain_gb1_convexity", lhs=d_y, rhs=scale * mean_cond),
        Check("chain_etatv", lhs=mean_cond, rhs=scale * eta * d_a),
        Check("chain_marton_a", lhs=eta * d_a, rhs=scale * eta * transport.marton_dbar_ub(kl_a, nn)),
        Check("chain_gb4_etakl_one", lhs=d_y, rhs=scale * transport.marton_dbar_ub(kl_a, nn)),
    ]
    return checks


def _eval_fc(inst: dict, scale: float) -> list[Check]:
    chan_a, chan_b, joint = inst["chan_a"], inst["chan_b"], inst["joint"]
    curve = discrete_ic.fc_envelope(chan_a, chan_b, 60)
    gcurve = discrete_ic.g_from_fc(curve)

    kern_a2 = np.kron(chan_a.rows, chan_a.rows)
    kern_ab = chan_a.rows @ chan_b.rows
    kern_b2 = np.kron(kern_ab, kern_ab)

    def cond_entropy(kern):
        j = joint.probs[:, None] * kern
        return entropy_of_probs(j.ravel()) - entropy_of_probs(j.sum(axis=0))

    h_xa = cond_entropy(kern_a2)
    h_xb = cond_entropy(kern_b2)
    return [
        Check(
            "fc_tensorization_n2",
            lhs=0.5 * h_xa,
            rhs=scale * (curve.value(0.5 * h_xb) + curve.grid_error),
        ),
        Check("g_zero", lhs=gcurve.value(0.0), rhs=0.0),
    ]


def _eval_gic_corner(inst: dict, scale: float) -> list[Check]:
    a, p1, p2 = inst["a"], inst["p1"], inst["p2"]
    target = 0.5 * math.log1p(a * a * p1 / (1.0 + p2))
    checks = []
    for constraint in (gic.PowerConstraint.ALMOST_SURE, gic.PowerConstraint.AVERAGE):
        params = gic.GicParams(a, 0.0, p1, p2, constraint)
        val = gic.outer_bound_r1(params, params.c2())
        checks.append(
            Check(f"corner_{constraint.value}", lhs=abs(val - target), rhs=scale * 1e-9)
        )
    return checks


def _eval_discrete_corner(inst: dict, scale: float) -> list[Check]:
    p2 = inst["p2"]
    report = discrete_ic.discrete_corner(p2)
    identity_gap = abs(
        (report.c1_prime + report.c2) - (math.log(3.0) - shannon_entropy(p2))
    )
    h2 = shannon_entropy(p2)
    grid_best = max(
        entropy_of_probs(discrete_ic.bernoulli_mod3_convolve(float(q), p2).probs) - h2
        for q in np.linspace(0.0, 1.0, 201)
    )
    return [
        Check("corner_identity", lhs=identity_gap, rhs=scale * 1e-12),
        Check("corner_vs_grid", lhs=grid_best - report.c2, rhs=scale * 1e-9),
    ]


_EVALUATORS = {
    "ppr": _eval_ppr,
    "w2lip": _eval_w2lip,
    "best": _eval_best,
    "cor_best": _eval_cor_best,
    "jpt": _eval_jpt,
    "dbar_props": _eval_dbar_props,
    "marton_chain": _eval_marton_chain,
    "fc": _eval_fc,
    "gic_corner": _eval_gic_corner,
    "discrete_corner": _eval_discrete_corner,
}

_CONTINUOUS = {"ppr", "w2lip", "best", "cor_best"}


def run_family(config: TrialConfig, rhs_scale: float = 1.0) -> VerifyReport:
    """Run all trials of one family and assemble the report.

    ``rhs_scale`` is a test-only hook that scales every right-hand side; the
    meta-test uses 0.5 to prove the harness can detect violated bounds.
    """
    tol = TOLERANCES[config.family]
    evaluator = _EVALUATORS[config.family]
    report = VerifyReport(
        family=config.family,
        seed=config.seed,
        trials_run=config.trials,
        tolerance=tol,
    )
    min_slack = math.inf
    total_err = 0.0
    all_certified = True
    failures = []
    for t in range(config.trials):
        instance = instance_generators(config.family, trial_rng(config.seed, t))
        digest = instance_digest(config.family, t, instance)
        for check in evaluator(instance, rhs_scale):
            slack = check.slack
            min_slack = min(min_slack, slack)
            total_err += check.err
            all_certified = all_certified and check.certified
            if slack < -tol:
                failures.append(
                    {
                        "trial": t,
                        "digest": f"{check.name}:{digest}",
                        "lhs": check.lhs,
                        "rhs": check.rhs,
                        "slack": slack,
                    }
                )
    report.failures = failures
    report.min_slack = min_slack
    certified = all_certified
    if config.family in _CONTINUOUS and total_err > 0.0:
        certified = certified and (min_slack > 0.0) and (total_err < 0.1 * min_slack)
    report.certified = certified
    return report
