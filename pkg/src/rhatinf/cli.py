"""Command-line front end.

Subcommands: diagnose, curve, threshold, simulate, counterexample, mvdiag.
Delimited outputs (CSV/JSON) are pure functions of the arguments; when an
output directory is given, report-style commands also render PNG figures
alongside the data files.  Exit codes: 0 success/converged, 2 diagnosed
not-converged, 1 usage or data error.
"""

import argparse
import json
import sys
from pathlib import Path
from types import SimpleNamespace

from . import counterexamples as cex
from . import plots, simulate
from .chains import load_chains
from .diagnostics import diagnose, rhat_curve
from .multivariate import two_step_diagnosis
from .population import PopulationModel, population_local_r
from .statdist import DistributionSpec, gpd, laplace, uniform
from .thresholds import (
    DEFAULT_SEED,
    ThresholdSpec,
    mc_null_quantile,
    mv_thresholds,
    r_lim,
    type1_error,
)

__all__ = ["main"]

_T1_LEFT_ESS = (50, 100, 200, 400, 800, 1500)
_T1_RIGHT_MS = (2, 4, 8, 15, 50, 100)
_T2_MS = (2, 3, 4, 8, 10, 20)
_T2_ALPHAS = (0.005, 0.01, 0.05, 0.1)
_B1_MS = (4, 8)
_B1_DS = (2, 3, 4, 5, 6)


class _Parser(argparse.ArgumentParser):
    # Usage problems exit with 1; code 2 is reserved for "not converged".
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return str(value)


def _kv_csv(d):
    lines = ["key,value"]
    lines += [f"{k},{_fmt(v)}" for k, v in d.items()]
    return "\n".join(lines) + "\n"


def _rows_csv(header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _emit(args, text, filename):
    """Write to <out>/<filename> when an output directory is set, else stdout."""
    if args.out is None:
        sys.stdout.write(text)
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / filename
    target.write_text(text)
    return target


def _figure_dir(args):
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report_payload(args, payload, stem):
    if args.format == "json":
        return _emit(args, json.dumps(payload, indent=2) + "\n", f"{stem}.json")
    return _emit(args, _kv_csv(payload), f"{stem}.csv")


# ---------------------------------------------------------------------------


def _cmd_diagnose(args):
    cs = load_chains(args.input, layout=args.layout)
    if cs.d > 1:
        if args.threshold is not None:
            raise ValueError("d > 1 takes two cutoffs; use mvdiag --threshold M C")
        report = two_step_diagnosis(
            cs, alpha=args.alpha, target_ess=args.ess,
            reps=args.reps, seed=args.seed,
        )
        _report_payload(args, report.to_dict(), "report")
        fig_dir = _figure_dir(args)
        if fig_dir is not None:
            plots.save_mv_figure(fig_dir / "report.png", report)
        return 0 if report.verdict == "converged" else 2
    report = diagnose(
        cs, alpha=args.alpha, threshold=args.threshold,
        grid=args.stride, mc_reps=args.reps, seed=args.seed,
    )
    _report_payload(args, report.to_dict(), "report")
    fig_dir = _figure_dir(args)
    if fig_dir is not None:
        curve = rhat_curve(cs, grid=args.stride, with_ess=True)
        with open(fig_dir / "curve.csv", "w") as fh:
            curve.to_csv(fh)
        plots.save_curve_figure(
            fig_dir / "curve.png", curve, threshold=report.threshold_used
        )
    return 0 if report.verdict == "converged" else 2


def _load_model(path):
    with open(path) as fh:
        payload = json.load(fh)
    specs = [DistributionSpec.from_dict(s) for s in payload["chains"]]
    return PopulationModel(tuple(specs))


def _cmd_curve(args):
    cs = load_chains(args.input, layout=args.layout)
    if cs.d != 1:
        raise ValueError("curve requires univariate chains (d = 1)")
    curve = rhat_curve(cs, grid=args.stride, with_ess=True)
    model = _load_model(args.model) if args.model else None
    overlay = None
    if model is not None:
        values = population_local_r(model, curve.xs)
        overlay = (curve.xs, values, "population")
        rows = [
            (float(x), float(r), None if e != e else float(e), float(v))
            for x, r, e, v in zip(curve.xs, curve.rhat, curve.ess, values)
        ]
        text = _rows_csv(("x", "rhat", "ess", "model_r"), rows)
    else:
        import io

        buf = io.StringIO()
        curve.to_csv(buf)
        text = buf.getvalue()
    _emit(args, text, "curve.csv")
    fig_dir = _figure_dir(args)
    if fig_dir is not None:
        plots.save_curve_figure(fig_dir / "curve.png", curve, overlay=overlay)
    return 0


def _threshold_rows(args):
    if args.table is None:
        if args.m is None:
            raise ValueError("threshold needs --m (or --table)")
        if args.d > 1:
            margin, copula = mv_thresholds(
                args.m, args.d, args.alpha, target_ess=args.ess,
                reps=args.reps, seed=args.seed, recompute=args.recompute,
            )
            return (
                ("m", "d", "alpha", "target_ess", "margin_threshold", "copula_threshold"),
                [(args.m, args.d, args.alpha, args.ess, margin, copula)],
            )
        spec = ThresholdSpec(m=args.m, alpha=args.alpha, target_ess=args.ess,
                             reps=args.reps, seed=args.seed)
        q = mc_null_quantile(spec, recompute=args.recompute)
        asym = r_lim(args.m, args.alpha, args.ess)
        return (
            ("m", "alpha", "target_ess", "r_lim", "mc_quantile"),
            [(args.m, args.alpha, args.ess, asym, q)],
        )
    if args.table == "1-left":
        cut = args.threshold if args.threshold is not None else 1.01
        m = args.m if args.m is not None else 4
        return (
            ("m", "r_lim", "ess", "type1_error"),
            [(m, cut, e, type1_error(m, cut, e)) for e in _T1_LEFT_ESS],
        )
    if args.table == "1-right":
        return (
            ("m", "alpha", "target_ess", "r_lim"),
            [(m, args.alpha, args.ess, r_lim(m, args.alpha, args.ess))
             for m in _T1_RIGHT_MS],
        )
    if args.table == "2":
        rows = []
        for m in _T2_MS:
            for alpha in _T2_ALPHAS:
                spec = ThresholdSpec(m=m, alpha=alpha, target_ess=args.ess,
                                     reps=args.reps, seed=args.seed)
                rows.append((m, alpha, args.ess,
                             mc_null_quantile(spec, recompute=args.recompute)))
        return ("m", "alpha", "target_ess", "mc_quantile"), rows
    if args.table == "B1":
        rows = []
        for m in _B1_MS:
            for d in _B1_DS:
                for alpha in _T2_ALPHAS:
                    margin, copula = mv_thresholds(
                        m, d, alpha, target_ess=args.ess, reps=args.reps,
                        seed=args.seed, recompute=args.recompute,
                    )
                    rows.append((m, d, alpha, args.ess, margin, copula))
        return ("m", "d", "alpha", "target_ess",
                "margin_threshold", "copula_threshold"), rows
    raise ValueError(f"unknown table {args.table!r}")


def _cmd_threshold(args):
    header, rows = _threshold_rows(args)
    if args.format == "json":
        payload = [dict(zip(header, row)) for row in rows]
        _emit(args, json.dumps(payload, indent=2) + "\n", "thresholds.json")
    else:
        _emit(args, _rows_csv(header, rows), "thresholds.csv")
    return 0


def _load_custom_spec(path):
    with open(path) as fh:
        payload = json.load(fh)
    specs = [DistributionSpec.from_dict(s) for s in payload["chains"]]
    return specs, int(payload["n"])


def _cmd_simulate(args):
    if (args.example is None) == (args.spec is None):
        raise ValueError("simulate takes exactly one of --example or a spec file")
    if args.example is not None:
        result = simulate.run_experiment(
            args.example, reps=args.reps, seed=args.seed, d=args.d
        )
    else:
        specs, n = _load_custom_spec(args.spec)
        result = simulate.run_custom(
            specs, n, reps=args.reps if args.reps is not None else 500,
            seed=args.seed,
        )
    text = _rows_csv(("rep", "stat", "value"), result.to_rows())
    _emit(args, text, "simulate.csv")
    fig_dir = _figure_dir(args)
    if fig_dir is not None:
        plots.save_histogram_figure(fig_dir / "simulate.png", result,
                                    title=result.name)
    return 0


_COUNTEREXAMPLE_PRESETS = ("gpd", "laplace-uniform", "null")


def _counterexample_setup(name):
    if name == "gpd":
        pair = cex.solve_counterexample(0.0, -1.0, 1.0, 0.0)
        return pair, 4, 200
    if name == "laplace-uniform":
        return (laplace(0.0, 1.0), uniform(-2.0, 2.0)), 2, 500
    if name == "null":
        spec = gpd(0.0, 1.0, 0.0)
        return (spec, spec), 4, 200
    raise ValueError(
        f"unknown counterexample {name!r}; choose from {_COUNTEREXAMPLE_PRESETS}"
    )


def _cmd_counterexample(args):
    pair, m, n = _counterexample_setup(args.example)
    if args.m is not None:
        m = args.m
    summary = cex.demo_false_negative(pair, m=m, n=n, reps=args.reps, seed=args.seed)
    if isinstance(pair, cex.GpdPair):
        pair_payload = {
            "spec1": pair.spec1.to_dict(),
            "spec2": pair.spec2.to_dict(),
            "lam": pair.lam,
        }
    else:
        pair_payload = {
            "spec1": pair[0].to_dict(),
            "spec2": pair[1].to_dict(),
            "lam": None,
        }
    _emit(args, json.dumps(pair_payload, indent=2) + "\n", "counterexample.json")
    rows = [
        ("split_rhat", 1.01, summary["detect_split_rhat"]),
        ("rank_rhat", 1.01, summary["detect_rank_rhat"]),
        ("rhat_inf", summary["threshold_rhat_inf"], summary["detect_rhat_inf"]),
    ]
    text = _rows_csv(("stat", "cutoff", "detection"), rows)
    _emit(args, text, "counterexample.csv")
    fig_dir = _figure_dir(args)
    if fig_dir is not None:
        shim = SimpleNamespace(
            stat_names=("split_rhat", "rank_rhat", "rhat_inf"),
            values={k: summary[k] for k in ("split_rhat", "rank_rhat", "rhat_inf")},
        )
        plots.save_histogram_figure(
            fig_dir / "counterexample.png", shim,
            cutoffs={"split_rhat": 1.01, "rank_rhat": 1.01,
                     "rhat_inf": summary["threshold_rhat_inf"]},
            title=f"{args.example} (m={m}, n={n})",
        )
    return 0


def _cmd_mvdiag(args):
    cs = load_chains(args.input, layout=args.layout)
    thresholds = tuple(args.threshold) if args.threshold is not None else None
    report = two_step_diagnosis(
        cs, alpha=args.alpha, thresholds=thresholds,
        target_ess=args.ess, reps=args.reps, seed=args.seed,
    )
    _report_payload(args, report.to_dict(), "report")
    fig_dir = _figure_dir(args)
    if fig_dir is not None:
        plots.save_mv_figure(fig_dir / "report.png", report)
    return 0 if report.verdict == "converged" else 2


# ---------------------------------------------------------------------------


def _add_common(sub, *, layout=False, seed_default=DEFAULT_SEED):
    sub.add_argument("--seed", type=int, default=seed_default,
                     help="base seed for all Monte Carlo substreams")
    sub.add_argument("--out", default=None,
                     help="output directory (default: print to stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default=None)
    if layout:
        sub.add_argument("--layout", choices=("wide", "long"), default="wide")


def build_parser():
    parser = _Parser(prog="rhatinf",
                     description="Quantile-resolved MCMC convergence diagnostics")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("diagnose", parents=[], help="full convergence report")
    p.add_argument("input", help="chains CSV file")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--threshold", type=float, default=None,
                   help="cutoff override (skips Monte Carlo calibration)")
    p.add_argument("--stride", type=int, default=None,
                   help="evaluate every k-th pooled draw")
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--ess", type=float, default=400.0,
                   help="target ESS for the d>1 cutoffs")
    _add_common(p, layout=True)
    p.set_defaults(func=_cmd_diagnose, format_default="json")

    p = subs.add_parser("curve", help="diagnostic-vs-threshold curve CSV")
    p.add_argument("input")
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--model", default=None,
                   help="JSON file with per-chain distributions to overlay")
    _add_common(p, layout=True)
    p.set_defaults(func=_cmd_curve, format_default="csv")

    p = subs.add_parser("threshold", help="cutoff tables")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--ess", type=float, default=400.0)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--threshold", type=float, default=None,
                   help="pointwise cutoff for the false-alarm table")
    p.add_argument("--table", choices=("1-left", "1-right", "2", "B1"), default=None)
    p.add_argument("--recompute", action="store_true",
                   help="ignore the packaged null table")
    _add_common(p)
    p.set_defaults(func=_cmd_threshold, format_default="csv")

    p = subs.add_parser("simulate", help="replication study of a built-in design")
    p.add_argument("spec", nargs="?", default=None,
                   help="custom design JSON: {chains: [...], n: int}")
    p.add_argument("--example", type=int, default=None, choices=simulate.EXAMPLE_IDS)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--d", type=int, default=2, help="dimension for example 5")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate, format_default="csv")

    p = subs.add_parser("counterexample",
                        help="rank-diagnostic false negatives, solved and measured")
    p.add_argument("--example", choices=_COUNTEREXAMPLE_PRESETS, default="gpd")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--reps", type=int, default=500)
    _add_common(p)
    p.set_defaults(func=_cmd_counterexample, format_default="csv")

    p = subs.add_parser("mvdiag", help="two-step multivariate diagnosis")
    p.add_argument("input")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--threshold", type=float, nargs=2, default=None,
                   metavar=("MARGIN", "COPULA"))
    p.add_argument("--ess", type=float, default=400.0)
    p.add_argument("--reps", type=int, default=2000)
    _add_common(p, layout=True)
    p.set_defaults(func=_cmd_mvdiag, format_default="json")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.format_default
    try:
        return args.func(args)
    except (ValueError, TypeError, KeyError, OSError, RuntimeError) as exc:
        print(f"rhatinf: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
