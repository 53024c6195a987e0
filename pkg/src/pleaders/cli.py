"""Command-line interface.

Subcommands: ``analyze`` (file -> estimates + report), ``synth`` (process ->
signal file + oracle sidecar), ``mc`` (config -> Monte Carlo ResultSet),
``compare`` (paired rmse table for two estimators).  Exit codes: 2 usage,
3 bad input data, 4 numerical/estimation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import synth
from .errors import NumericalError, PleadersError
from .harness import (
    DEFAULT_P_VALUES,
    ExperimentConfig,
    analyze_file,
    compare_rmse,
    p_tag,
    run_experiment,
)
from .io import write_signal
from .leaders import P0_DEFAULT_GRID
from .pipeline import AnalysisOptions


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return math.inf if text == "inf" else text


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise argparse.ArgumentTypeError(f"expected key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        out[key] = _parse_value(value)
    return out


def _p_list(values) -> tuple:
    return tuple(math.inf if v == "inf" else float(v) for v in values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pleaders",
        description="p-leader multifractal analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="analyze a signal or field file")
    pa.add_argument("input", help=".csv, .bin or .json-header input")
    pa.add_argument("--p", nargs="+", default=["2"],
                    help="p values (numbers or 'inf')")
    pa.add_argument("--j1", type=int, default=4)
    pa.add_argument("--j2", type=int, default=None)
    pa.add_argument("--nv", type=int, default=2,
                    help="vanishing moments of the analyzing wavelet")
    pa.add_argument("--uncorrected", action="store_true",
                    help="skip the finite-size correction")
    pa.add_argument("--mfdfa", action="store_true",
                    help="also run MFDFA on the same series")
    pa.add_argument("--mfdfa-degree", type=int, default=1)
    pa.add_argument("--raw-mfdfa", action="store_true",
                    help="skip MFDFA's profile integration")
    pa.add_argument("--out", default=None, help="report directory")
    pa.add_argument("--no-figures", action="store_true")

    ps = sub.add_parser("synth", help="synthesize a process realization")
    ps.add_argument("process",
                    choices=["mrw", "lws", "cmc-ln", "cmc-lp"])
    ps.add_argument("--param", action="append", metavar="KEY=VALUE",
                    help="process parameter override")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True,
                    help="output path (.csv or .bin)")

    pm = sub.add_parser("mc", help="run a Monte Carlo experiment")
    pm.add_argument("config", help="ExperimentConfig JSON file")
    pm.add_argument("--set", action="append", metavar="KEY=VALUE",
                    dest="overrides", help="config override")
    pm.add_argument("--out", default=None, help="output directory override")
    pm.add_argument("--figures", action="store_true",
                    help="render rmse figures alongside the CSV output")

    pc = sub.add_parser("compare",
                        help="paired rmse table for two estimators")
    pc.add_argument("config", help="ExperimentConfig JSON file")
    pc.add_argument("--a", required=True,
                    help="first estimator tag, e.g. pleader_p0.5")
    pc.add_argument("--b", required=True,
                    help="second estimator tag, e.g. mfdfa")
    pc.add_argument("--out", default=None, help="output directory override")
    return parser


def _cmd_analyze(args) -> int:
    opts = AnalysisOptions(
        p_values=_p_list(args.p),
        j1=args.j1,
        j2=args.j2,
        n_vanishing_moments=args.nv,
        corrected=not args.uncorrected,
        mfdfa_degree=args.mfdfa_degree if args.mfdfa else None,
        mfdfa_integrate=not args.raw_mfdfa,
    )
    out_dir = Path(args.out) if args.out else Path(args.input).with_suffix("")
    bundle = analyze_file(args.input, opts, out_dir,
                          render_figures=not args.no_figures)
    print(f"hmin = {bundle.hmin:.4f}")
    if bundle.p0 is not None:
        print(f"p0_hat = {p_tag(bundle.p0)}")
    for p, res in bundle.results.items():
        cm = res.estimates.cm
        print(f"p = {p_tag(p):>4}: c1 = {cm[0]:+.4f}  c2 = {cm[1]:+.4f}  "
              f"c3 = {cm[2]:+.4f}  (corrected: {res.correction_applied})")
    if bundle.mfdfa is not None:
        cm = bundle.mfdfa[0].cm
        print(f"mfdfa   : c1 = {cm[0]:+.4f}  c2 = {cm[1]:+.4f}  "
              f"c3 = {cm[2]:+.4f}")
    for w in bundle.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"report written to {out_dir}")
    return 0


def _cmd_synth(args) -> int:
    params = _parse_params(args.param)
    sidecar: dict = {"process": args.process, "seed": args.seed,
                     "params": params}
    if args.process == "mrw":
        mp = synth.MrwParams(seed=args.seed, **params)
        data = synth.gen_mrw(mp)
        c1, c2 = synth.mrw_cumulants(mp)
        p0 = synth.mrw_p0(mp)
        sidecar["oracle"] = {
            "c1": c1, "c2": c2, "c3": 0.0, "c4": 0.0,
            "p0": "inf" if math.isinf(p0) else p0,
            "eta": {p_tag(p): synth.mrw_eta(p, mp) for p in P0_DEFAULT_GRID},
        }
    elif args.process == "lws":
        nv = int(params.pop("n_vanishing_moments", 2))
        lp = synth.LwsParams(seed=args.seed, **params)
        data = synth.gen_lws(lp, synth.daubechies_filter(nv))
        sidecar["oracle"] = {
            "spectrum_support": {p_tag(p): synth.lws_support(lp, p)
                                 for p in DEFAULT_P_VALUES},
        }
    else:
        kind = "log-normal" if args.process == "cmc-ln" else "log-poisson"
        cp = synth.CmcParams(kind=kind, seed=args.seed, **params)
        data = synth.gen_cmc2d(cp)
        c = synth.cmc_cumulants(cp)
        h, D = synth.cmc_spectrum(cp)
        sidecar["oracle"] = {
            "c1": c[0], "c2": c[1], "c3": c[2], "c4": c[3],
            "spectrum_h": list(h), "spectrum_D": list(D),
        }
    path = write_signal(data, args.out, sidecar)
    print(f"wrote {path}")
    return 0


def _cmd_mc(args) -> int:
    overrides = _parse_params(args.overrides)
    if args.out:
        overrides["out_dir"] = args.out
    config = ExperimentConfig.from_json(Path(args.config).read_text(),
                                        **overrides)
    result = run_experiment(config, render_figures=args.figures)
    n_fail = result.n_failed
    print(f"{config.n_realizations} realizations, {n_fail} with recorded "
          f"failures")
    for key, entry in sorted(result.aggregates.items()):
        if "rmse" in entry:
            print(f"{key:>28}: mean {entry['mean']:+.4f}  "
                  f"sd {entry['sd']:.4f}  rmse {entry['rmse']:.4f}  "
                  f"(truth {entry['truth']:+.4f})")
    if config.out_dir:
        print(f"results in {config.out_dir}")
    return 0


def _cmd_compare(args) -> int:
    overrides = {"out_dir": args.out} if args.out else {}
    config = ExperimentConfig.from_json(Path(args.config).read_text(),
                                        **overrides)
    result = run_experiment(config)
    rows = compare_rmse(result, args.a, args.b)
    if not rows:
        print("no overlapping rmse targets for the requested estimators",
              file=sys.stderr)
        return 4
    print(f"{'target':>8} {args.a:>16} {args.b:>16} {'ratio b/a':>10}")
    lines = ["target,%s,%s,ratio" % (args.a, args.b)]
    for row in rows:
        print(f"{row['target']:>8} {row[args.a]:16.5f} "
              f"{row[args.b]:16.5f} {row['ratio']:10.3f}")
        lines.append(f"{row['target']},{row[args.a]!r},{row[args.b]!r},"
                     f"{row['ratio']!r}")
    if config.out_dir:
        path = Path(config.out_dir) / "compare.csv"
        path.write_text("\n".join(lines) + "\n")
        print(f"table written to {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"analyze": _cmd_analyze, "synth": _cmd_synth,
                "mc": _cmd_mc, "compare": _cmd_compare}
    try:
        return handlers[args.command](args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except (PleadersError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
