"""Single command-line entry point for every module.

Exit codes: 0 success; 1 usage error; 2 numeric non-certification;
3 invariant violation in input files.  All errors print to stderr with a
machine-parsable ``E<code>:`` prefix.  Rates and entropies print in the unit
selected by --base (default bits); probabilities, distances, and contraction
coefficients are unitless and never converted.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import discrete_ic, gic, regularity, transport
from .core import (
    GaussianMixture1D,
    InvariantError,
    LogBase,
    format_float,
    load_channel,
    load_mixture,
    load_pmf,
    load_two_input_channel,
    save_region,
)
from .infomeasures import (
    QuadratureSpec,
    diff_entropy_1d,
    kl_discrete,
    mutual_info_discrete,
    shannon_entropy,
)
from .verify import TrialConfig, run_family


class UsageError(Exception):
    pass


class NonCertifiedError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; we reserve that code
        raise UsageError(message)


def _common_flags(sub):
    sub.add_argument("--base", choices=["nats", "bits"], default="bits",
                     help="display unit for rates and entropies (default bits)")
    sub.add_argument("--out", default=None, help="output path (default stdout)")
    sub.add_argument("--seed", type=int, default=0, help="seed for randomized verbs")
    sub.add_argument("--quiet", action="store_true", help="suppress status lines")


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
        if not args.quiet:
            print(f"wrote {args.out}")
    else:
        print(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _parse_atoms(spec: str) -> GaussianMixture1D:
    try:
        pairs = [tuple(float(v) for v in item.split(":")) for item in spec.split(",")]
        positions = [p[0] for p in pairs]
        weights = [p[1] for p in pairs]
    except (ValueError, IndexError):
        raise UsageError(f"cannot parse atom list {spec!r}; expected 'pos:w,pos:w,...'")
    return GaussianMixture1D.atoms(positions, weights)


# ---------------------------------------------------------------------------
# Verb handlers
# ---------------------------------------------------------------------------


def _cmd_region(args) -> int:
    if args.channel != "gic":
        raise UsageError(f"unknown region channel {args.channel!r}; only 'gic' is supported")
    if not 0.0 < args.a <= 1.0:
        raise UsageError("a must lie in (0,1]")
    if args.b < 0.0:
        raise UsageError("b must be >= 0")
    if args.p1 <= 0.0 or args.p2 <= 0.0:
        raise UsageError("p1 and p2 must be > 0")
    if args.grid < 2:
        raise UsageError("grid must be >= 2")
    constraint = (
        gic.PowerConstraint.ALMOST_SURE if args.constraint == "as" else gic.PowerConstraint.AVERAGE
    )
    params = gic.GicParams(args.a, args.b, args.p1, args.p2, constraint)
    outer = gic.outer_curve(params, args.grid)
    inner = gic.hk_inner_curve(params, args.grid)
    if not args.out:
        raise UsageError("region requires --out for the CSV artifact")
    save_region([outer, inner], args.out, LogBase.parse(args.base))
    if not args.quiet:
        print(f"wrote {args.out}")
    return 0


def _cmd_corners(args) -> int:
    if not 0.0 <= args.a <= 1.0:
        raise UsageError("a must lie in [0,1] for the corner tables")
    if args.b < 0.0:
        raise UsageError("b must be >= 0")
    if args.p1 <= 0.0 or args.p2 <= 0.0:
        raise UsageError("p1 and p2 must be > 0")
    base = LogBase.parse(args.base)
    report = gic.corner_report(gic.GicParams(args.a, args.b, args.p1, args.p2))
    obj = {
        "base": base.value,
        "c1": base.from_nats(report.c1),
        "c2": base.from_nats(report.c2),
        "c2_tilde": base.from_nats(report.c2_tilde),
        "c1_prime": base.from_nats(report.c1_prime),
        "c2_prime": base.from_nats(report.c2_prime),
        "case_label": report.case_label,
    }
    _emit(args, _json_dump(obj))
    return 0


def _cmd_fc(args) -> int:
    chan_a = load_channel(args.channel_a)
    chan_b = load_channel(args.channel_b)
    if args.grid < 1:
        raise UsageError("grid must be >= 1")
    base = LogBase.parse(args.base)
    curve = discrete_ic.fc_envelope(chan_a, chan_b, args.grid)
    lines = ["t,Fc,grid_err"]
    err = base.from_nats(curve.grid_error)
    for t, f in curve.knots:
        lines.append(
            f"{format_float(base.from_nats(t))},{format_float(base.from_nats(f))},{format_float(err)}"
        )
    _emit(args, "\n".join(lines))
    return 0


def _cmd_discrete_corner(args) -> int:
    p2 = load_pmf(args.p2)
    base = LogBase.parse(args.base)
    report = discrete_ic.discrete_corner(p2)
    obj = {
        "base": base.value,
        "c2": base.from_nats(report.c2),
        "c1_prime": base.from_nats(report.c1_prime),
        "q_star": report.q_star,
        "p3": report.p3.probs.tolist(),
        "case": report.case,
    }
    _emit(args, _json_dump(obj))
    return 0


def _cmd_verify(args) -> int:
    try:
        config = TrialConfig(seed=args.seed, trials=args.trials, family=args.family)
    except InvariantError as exc:  # bad flag values are usage errors
        raise UsageError(str(exc))
    report = run_family(config)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        if not args.quiet:
            print(f"wrote {args.out}")
    else:
        print(text, end="")
    if not args.quiet:
        print(
            f"family={report.family} trials={report.trials_run} "
            f"failures={len(report.failures)} min_slack={format_float(report.min_slack)} "
            f"certified={report.certified}"
        )
    if not report.certified:
        raise NonCertifiedError(f"verify family {report.family}: report not certified")
    return 0


def _cmd_w2(args) -> int:
    p = load_mixture(args.p)
    q = load_mixture(args.q)
    res = transport.wp_quantile_1d(p, q, args.p_order, abs_tol=args.abs_tol)
    _emit(args, format_float(res.value))
    if not res.certified:
        raise NonCertifiedError(
            f"w2 quadrature not certified (error estimate {format_float(res.error)})"
        )
    return 0


def _cmd_dbar(args) -> int:
    _emit(args, format_float(transport.dbar(load_pmf(args.p), load_pmf(args.q))))
    return 0


def _cmd_tv(args) -> int:
    _emit(args, format_float(transport.tv(load_pmf(args.p), load_pmf(args.q))))
    return 0


def _cmd_entropy(args) -> int:
    base = LogBase.parse(args.base)
    _emit(args, format_float(base.from_nats(shannon_entropy(load_pmf(args.pmf)))))
    return 0


def _cmd_kl(args) -> int:
    base = LogBase.parse(args.base)
    _emit(args, format_float(base.from_nats(kl_discrete(load_pmf(args.p), load_pmf(args.q)))))
    return 0


def _cmd_mi(args) -> int:
    base = LogBase.parse(args.base)
    value = mutual_info_discrete(load_pmf(args.pmf), load_channel(args.channel))
    _emit(args, format_float(base.from_nats(value)))
    return 0


def _cmd_dentropy(args) -> int:
    base = LogBase.parse(args.base)
    spec = QuadratureSpec(abs_tol=args.abs_tol)
    res = diff_entropy_1d(load_mixture(args.mixture), spec)
    _emit(args, format_float(base.from_nats(res.value)))
    if not res.certified:
        raise NonCertifiedError(
            f"dentropy quadrature not certified (error estimate {format_float(res.error)})"
        )
    return 0


def _cmd_eta(args) -> int:
    w = load_two_input_channel(args.two_input)
    if args.p0:
        p0 = load_pmf(args.p0)
    else:
        from .core import Pmf

        p0 = Pmf.uniform(w.a_size)
    est = discrete_ic.eta_kl_two_input(w, p0, grid_resolution=args.grid)
    obj = {
        "eta_tv": discrete_ic.eta_tv_two_input(w),
        "eta_kl_grid": est.value,
        "eta_kl_kind": est.kind,
    }
    _emit(args, _json_dump(obj))
    return 0


def _cmd_bounds(args) -> int:
    if args.what != "regularity":
        raise UsageError(f"unknown bounds family {args.what!r}; only 'regularity' is supported")
    if args.sigma_sq <= 0.0:
        raise UsageError("sigma-sq must be > 0")
    base = LogBase.parse(args.base)
    b_v = _parse_atoms(args.v_atoms)
    b_u = _parse_atoms(args.u_atoms) if args.u_atoms else b_v
    v = GaussianMixture1D(b_v.weights, b_v.means, b_v.variances + args.sigma_sq)
    u = GaussianMixture1D(b_u.weights, b_u.means, b_u.variances + args.sigma_sq)
    reg = regularity.gaussian_smoothing_regularity(args.sigma_sq, b_v.mean_abs())
    m2u, m2v = u.second_moment(), v.second_moment()
    w2 = transport.wp_quantile_1d(u, v, 2)
    w1 = transport.wp_quantile_1d(u, v, 1)
    p_cap = max(m2u, m2v)
    sup_b = float(np.abs(b_v.means).max())
    obj = {
        "base": base.value,
        "c1": base.from_nats(reg.c1),
        "c2": base.from_nats(reg.c2),
        "m2_u": m2u,
        "m2_v": m2v,
        "w2": w2.value,
        "w1": w1.value,
        "delta_ppr": base.from_nats(regularity.delta_ppr(reg, m2u, m2v, w2.value)),
        "w2lip_delta": base.from_nats(regularity.w2lip_delta(args.sigma_sq, p_cap, 1, w2.value)),
        "best_bound": base.from_nats(
            regularity.best_bound(args.sigma_sq, sup_b, m2u, m2v, w1.value)
        ),
        "symmetric_kl_bound": base.from_nats(
            regularity.symmetric_kl_bound(reg, m2u, m2v, w2.value)
        ),
    }
    _emit(args, _json_dump(obj))
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="wbounds", description=__doc__)
    subs = parser.add_subparsers(dest="verb", required=True)

    region = subs.add_parser("region", help="sample outer + inner region curves to CSV")
    region.add_argument("channel", choices=["gic"])
    region.add_argument("--a", type=float, required=True)
    region.add_argument("--b", type=float, default=0.0)
    region.add_argument("--p1", type=float, required=True)
    region.add_argument("--p2", type=float, required=True)
    region.add_argument("--constraint", choices=["as", "avg"], default="as")
    region.add_argument("--grid", type=int, default=50)
    _common_flags(region)
    region.set_defaults(func=_cmd_region)

    corners = subs.add_parser("corners", help="corner-point report as JSON")
    corners.add_argument("--a", type=float, required=True)
    corners.add_argument("--b", type=float, required=True)
    corners.add_argument("--p1", type=float, required=True)
    corners.add_argument("--p2", type=float, required=True)
    _common_flags(corners)
    corners.set_defaults(func=_cmd_corners)

    fc = subs.add_parser("fc", help="concave envelope knots as CSV (t,Fc,grid_err)")
    fc.add_argument("--channel-a", dest="channel_a", required=True)
    fc.add_argument("--channel-b", dest="channel_b", required=True)
    fc.add_argument("--grid", type=int, default=200)
    _common_flags(fc)
    fc.set_defaults(func=_cmd_fc)

    dcorner = subs.add_parser("discrete-corner", help="mod-3 corner report as JSON")
    dcorner.add_argument("--p2", required=True)
    _common_flags(dcorner)
    dcorner.set_defaults(func=_cmd_discrete_corner)

    verify = subs.add_parser("verify", help="run one randomized verification family")
    verify.add_argument("--family", required=True)
    verify.add_argument("--trials", type=int, required=True)
    _common_flags(verify)
    verify.set_defaults(func=_cmd_verify)

    w2 = subs.add_parser("w2", help="1-D Wasserstein distance between mixtures")
    w2.add_argument("--p", required=True)
    w2.add_argument("--q", required=True)
    w2.add_argument("--p-order", dest="p_order", type=int, choices=[1, 2], default=2)
    w2.add_argument("--abs-tol", dest="abs_tol", type=float, default=1e-8)
    _common_flags(w2)
    w2.set_defaults(func=_cmd_w2)

    dbar = subs.add_parser("dbar", help="exact Ornstein distance between pmfs")
    dbar.add_argument("--p", required=True)
    dbar.add_argument("--q", required=True)
    _common_flags(dbar)
    dbar.set_defaults(func=_cmd_dbar)

    tv = subs.add_parser("tv", help="total variation between pmfs")
    tv.add_argument("--p", required=True)
    tv.add_argument("--q", required=True)
    _common_flags(tv)
    tv.set_defaults(func=_cmd_tv)

    entropy = subs.add_parser("entropy", help="Shannon entropy of a pmf")
    entropy.add_argument("--pmf", required=True)
    _common_flags(entropy)
    entropy.set_defaults(func=_cmd_entropy)

    kl = subs.add_parser("kl", help="KL divergence between pmfs")
    kl.add_argument("--p", required=True)
    kl.add_argument("--q", required=True)
    _common_flags(kl)
    kl.set_defaults(func=_cmd_kl)

    mi = subs.add_parser("mi", help="mutual information of a pmf through a channel")
    mi.add_argument("--pmf", required=True)
    mi.add_argument("--channel", required=True)
    _common_flags(mi)
    mi.set_defaults(func=_cmd_mi)

    dentropy = subs.add_parser("dentropy", help="differential entropy of a mixture")
    dentropy.add_argument("--mixture", required=True)
    dentropy.add_argument("--abs-tol", dest="abs_tol", type=float, default=1e-9)
    _common_flags(dentropy)
    dentropy.set_defaults(func=_cmd_dentropy)

    eta = subs.add_parser("eta", help="contraction coefficients of a two-input channel")
    eta.add_argument("--two-input", dest="two_input", required=True)
    eta.add_argument("--p0", default=None)
    eta.add_argument("--grid", type=int, default=50)
    _common_flags(eta)
    eta.set_defaults(func=_cmd_eta)

    bounds = subs.add_parser("bounds", help="regularity constants and bound values")
    bounds.add_argument("what", choices=["regularity"])
    bounds.add_argument("--sigma-sq", dest="sigma_sq", type=float, required=True)
    bounds.add_argument("--v-atoms", dest="v_atoms", required=True,
                        help="atoms of B as 'pos:w,pos:w,...'; V = B + N(0, sigma_sq)")
    bounds.add_argument("--u-atoms", dest="u_atoms", default=None,
                        help="atoms of the comparison law U (defaults to V)")
    bounds.add_argument("--json", action="store_true",
                        help="accepted for compatibility; output is always JSON")
    _common_flags(bounds)
    bounds.set_defaults(func=_cmd_bounds)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args) or 0
    except UsageError as exc:
        print(f"E1: {exc}", file=sys.stderr)
        return 1
    except NonCertifiedError as exc:
        print(f"E2: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"E3: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
