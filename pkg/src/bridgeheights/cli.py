"""Command-line front end.

Every subcommand prints a table of rows as CSV or JSON. Errors raised by the
library are reported on stderr as ``{"kind", "message", "context"}`` with
exit status 1; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from . import height_law, lattice_series, moments, special_fn, walkers
from .errors import BridgeHeightsError, DomainError

# Published moment table, s = 0..5 (six printed decimals).
TABLE1_H1 = (1.0, 1.253314, 1.644934, 2.259832, 3.246969, 4.873485)
TABLE1_H2 = (1.0, 1.822625, 3.395156, 6.463823, 12.576665, 25.005999)
WATERMELON_C2 = 2.57758


class OutputSpec:
    def __init__(self, fmt="csv", path=None, precision=10):
        if fmt not in ("csv", "json"):
            raise DomainError("format must be csv or json", format=fmt)
        if not 1 <= precision <= 17:
            raise DomainError("precision must lie in [1, 17]", precision=precision)
        self.format = fmt
        self.path = path
        self.precision = precision

    def text(self, v):
        if isinstance(v, Fraction):
            v = float(v)
        if isinstance(v, float):
            if math.isnan(v) or math.isinf(v):
                return str(v)
            return format(v, f".{self.precision}g")
        return str(v)

    def json_value(self, v):
        if isinstance(v, (float, Fraction)):
            t = self.text(v)
            f = float(t)
            return f if math.isfinite(f) else t
        return v

    def render(self, rows):
        if self.format == "json":
            out = [{k: self.json_value(v) for k, v in r.items()} for r in rows]
            return json.dumps(out, indent=None) + "\n"
        buf = io.StringIO()
        if rows:
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(list(rows[0]))
            for r in rows:
                w.writerow([self.text(v) for v in r.values()])
        return buf.getvalue()


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _policy(args, default):
    if args.tol is None and args.max_terms is None:
        return default
    return special_fn.TruncationPolicy(
        args.tol if args.tol is not None else default.abs_tol,
        args.max_terms if args.max_terms is not None else default.max_terms,
    )


# ---------------------------------------------------------------------------
# Subcommands; each returns a list of row dicts.


def cmd_theta(args):
    pol = _policy(args, special_fn.DEFAULT_POLICY)
    rows = []
    for u in args.u:
        r = special_fn.theta(u, args.order, pol)
        rows.append({"u": u, "order": args.order, "value": r.value, "err_bound": r.err_bound})
    return rows


def cmd_xi(args):
    pol = _policy(args, special_fn.DEFAULT_POLICY)
    rows = []
    for s in args.s:
        r = special_fn.xi_riemann(s, pol)
        rows.append({"s": s, "value": r.value, "err_bound": r.err_bound})
    return rows


def cmd_zseries(args):
    if args.a is not None:
        pol = _policy(args, lattice_series.ACCEL_POLICY if args.method != "direct" else lattice_series.LATTICE_POLICY)
        r = lattice_series.z_tilde(args.a, args.b, args.method, pol)
        return [{"a": args.a, "b": args.b, "value": r.value, "err_bound": r.err_bound, "method": r.method}]
    if args.gamma is None:
        raise DomainError("zseries needs either --a/--b or --alpha/--beta/--gamma")
    pol = _policy(args, lattice_series.LATTICE_POLICY)
    p = lattice_series.DoubleSeriesParams(args.alpha, args.beta, args.gamma)
    r = lattice_series.z_direct(p, pol)
    return [
        {"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma, "value": r.value,
         "err_bound": r.err_bound, "method": r.method}
    ]


def cmd_moments(args):
    default = special_fn.DEFAULT_POLICY if args.n == 1 else lattice_series.ACCEL_POLICY
    pol = _policy(args, default)
    rows = []
    for s in args.s:
        r = moments.moment(moments.MomentQuery(args.n, s, args.method), pol)
        rows.append({"s": s, "value": r.value, "err_bound": r.err_bound, "method": r.method})
    return rows


def cmd_table1(args):
    rows = []
    for s in range(6):
        e1 = moments.moment_h1(float(s)).value
        e2 = moments.moment_h2_theta(float(s)).value
        dev = max(abs(e1 - TABLE1_H1[s]), abs(e2 - TABLE1_H2[s]))
        rows.append(
            {"s": s, "E_H1_paper": TABLE1_H1[s], "E_H1_computed": e1,
             "E_H2_paper": TABLE1_H2[s], "E_H2_computed": e2, "abs_dev": dev}
        )
    return rows


def cmd_watermelon_constant(args):
    c2 = math.sqrt(2.0) * moments.moment_h2_theta(1.0).value
    return [{"c2_computed": c2, "c2_published": WATERMELON_C2, "deviation": abs(c2 - WATERMELON_C2)}]


def _law_rows(args, key):
    pol = _policy(args, special_fn.DEFAULT_POLICY)
    fn = {1: height_law.cdf_h1, 2: height_law.cdf_h2}[args.n]
    rows = []
    for h in args.h:
        p = fn(h, pol)
        rows.append({"h": h, "value": getattr(p, key), "err_bound": p.err_bound})
    return rows


def cmd_cdf(args):
    return _law_rows(args, "cdf")


def cmd_density(args):
    return _law_rows(args, "density")


def cmd_kmcheck(args):
    pol = _policy(args, special_fn.DEFAULT_POLICY)
    target = height_law.cdf_h2(args.h, pol).cdf
    if args.eps is None:
        val, raw = height_law.km_limit(args.h, policy=pol)
        eps_label = ",".join(format(e, "g") for e in height_law.KM_EPS)
    else:
        val = height_law.km_ratio(args.h, args.eps, policy=pol)
        eps_label = format(args.eps, "g")
    return [{"h": args.h, "eps": eps_label, "km_ratio": val, "cdf_h2": target,
             "residual": abs(val - target)}]


def _walk_config(args, mode, samples=1):
    return walkers.WalkEnsembleConfig(args.walkers, args.n, mode, samples, args.seed, args.engine)


def cmd_walk_enumerate(args):
    hist = walkers.enumerate_heights(_walk_config(args, "exact"))
    rows = [{"height": h, "count": c, "probability": Fraction(c, hist.total)}
            for h, c in sorted(hist.counts.items())]
    return rows


def cmd_walk_sample(args):
    hist = walkers.sample_heights(_walk_config(args, "sample", args.samples))
    rows = []
    for h, c in sorted(hist.counts.items()):
        p = c / hist.total
        rows.append({"height": h, "count": c, "frequency": p,
                     "std_error": math.sqrt(p * (1.0 - p) / hist.total)})
    return rows


def cmd_walk_scaling(args):
    mode = "sample" if args.samples else "exact"
    reports = walkers.scaling_report(
        args.n, args.s, args.walkers, mode, args.samples or 1, args.seed
    )
    return [
        {"n": r.n, "s": r.s, "scaled_moment": r.scaled_moment,
         "continuum_target": r.continuum_target, "deviation": r.deviation,
         "std_error": r.std_error}
        for r in reports
    ]


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(
        prog="bridgeheights",
        description="Heights of noncolliding Bessel bridges and their lattice-walk analogues.",
    )
    ap.add_argument("--tol", type=float, default=None, help="series truncation tolerance")
    ap.add_argument("--max-terms", type=int, default=None, help="series term cap")
    ap.add_argument("--seed", type=int, default=0, help="RNG seed for sampling")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--precision", type=int, default=10, help="significant digits (1-17)")
    ap.add_argument("--output", default=None, help="write here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", help="Jacobi theta function and derivatives")
    p.add_argument("--u", type=_floats, required=True)
    p.add_argument("--order", type=int, choices=(0, 1, 2), default=0)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("xi", help="Riemann xi function")
    p.add_argument("--s", type=_floats, required=True)
    p.set_defaults(func=cmd_xi)

    p = sub.add_parser("zseries", help="double Dirichlet lattice sums")
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--beta", type=int, default=0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--a", type=float, default=None, help="evaluate Z~_a(b) instead")
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--method", choices=("gamma_accelerated", "direct"), default="gamma_accelerated")
    p.set_defaults(func=cmd_zseries)

    p = sub.add_parser("moments", help="moments E[H_N^s]")
    p.add_argument("--n", type=int, choices=(1, 2), required=True)
    p.add_argument("--s", type=_floats, required=True)
    p.add_argument("--method", choices=moments.METHODS, default="theta_integral")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("table1", help="published moment table beside computed values")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("fulmek", help="sqrt(2) E[H_2] against 2.57758")
    p.set_defaults(func=cmd_watermelon_constant)

    for name, fn in (("cdf", cmd_cdf), ("density", cmd_density)):
        p = sub.add_parser(name, help=f"{name} of the maximum height")
        p.add_argument("--n", type=int, choices=(1, 2), required=True)
        p.add_argument("--h", type=_floats, required=True)
        p.set_defaults(func=fn)

    p = sub.add_parser("kmcheck", help="Karlin-McGregor ratio against the series CDF")
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--eps", type=float, default=None, help="single eps; default extrapolates")
    p.set_defaults(func=cmd_kmcheck)

    walk = sub.add_parser("walk", help="Dyck paths and 2-watermelons")
    wsub = walk.add_subparsers(dest="walk_command", required=True)
    for name, fn in (("enumerate", cmd_walk_enumerate), ("sample", cmd_walk_sample)):
        p = wsub.add_parser(name)
        p.add_argument("--walkers", type=int, choices=(1, 2), required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--engine", choices=("auto", "path", "marginal"), default="auto")
        if name == "sample":
            p.add_argument("--samples", type=int, required=True)
        p.set_defaults(func=fn)
    p = wsub.add_parser("scaling")
    p.add_argument("--walkers", type=int, choices=(1, 2), required=True)
    p.add_argument("--n", type=_ints, required=True)
    p.add_argument("--s", type=_floats, required=True)
    p.add_argument("--samples", type=int, default=0, help="sample instead of exact enumeration")
    p.set_defaults(func=cmd_walk_scaling)
    return ap


def _report(err, stream):
    payload = {
        "kind": getattr(err, "kind", "domain"),
        "message": str(err),
        "context": {k: (v if isinstance(v, (int, float, str, bool)) or v is None else repr(v))
                    for k, v in getattr(err, "context", {}).items()},
    }
    stream.write(json.dumps(payload) + "\n")


def run(argv=None, stdout=None, stderr=None):
    """Execute one command line; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = OutputSpec(args.format, args.output, args.precision)
        rows = args.func(args)
    except BridgeHeightsError as err:
        _report(err, stderr)
        return 1
    text = spec.render(rows)
    if spec.path:
        with open(spec.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
