"""Command-line entry point: ``hillgaps {gaps,bands,estimate,kp,fit}``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .errors import NumericalFailure
from .experiment import PRESETS, ExperimentConfig, emit_report, fit_decay_rate, run_gap_experiment
from .galerkin import ANTIPERIODIC, PERIODIC, GalerkinConfig, band_structure, default_M
from .kronig_penney import kp_derived, kp_gap_leading, kp_make, kp_qk, kp_rate_classify, parse_rational
from .potential import derived_coeffs, fourier_table, support_degree


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_potential(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("potential")
    g.add_argument("--preset", choices=PRESETS, default="free")
    g.add_argument("--potential", metavar="FILE", help="JSON potential description")
    g.add_argument("--a", type=float, help="mathieu amplitude (q = 2a cos 2 pi x)")
    g.add_argument("--b", type=float, help="Kronig-Penney value on (c, 1]")
    g.add_argument("--c", help="Kronig-Penney breakpoint, e.g. 1/2")
    g.add_argument("--seed", type=int)
    g.add_argument("--degree", type=int)


def _potential_source(args) -> tuple[object, dict]:
    if args.potential:
        return json.loads(Path(args.potential).read_text(encoding="utf-8")), {}
    params = {k: getattr(args, k) for k in ("a", "b", "c", "seed", "degree")
              if getattr(args, k) is not None}
    return args.preset, params


def _orders(text: str) -> tuple:
    try:
        return tuple(int(s) for s in text.split(",") if s)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad order list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hillgaps", description="Spectral gaps of Hill operators.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gaps", help="oracle gaps against asymptotic estimates")
    _add_potential(g)
    g.add_argument("--config", metavar="FILE", help="JSON experiment config (flags are ignored)")
    g.add_argument("--parity", choices=(PERIODIC, ANTIPERIODIC, "both"), default="both")
    g.add_argument("--n-min", type=int, default=1)
    g.add_argument("--n-max", type=int, default=10)
    g.add_argument("--M", type=int)
    g.add_argument("--orders", type=_orders, default=(1, 2))
    g.add_argument("--m", type=int, help="add the order-m recursion (m >= 2)")
    g.add_argument("--K", type=int, help="series truncation per index")
    g.add_argument("--guard", type=float, default=1e-8)
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--output", "-o")

    b = sub.add_parser("bands", help="band edges over a quasimomentum grid")
    _add_potential(b)
    b.add_argument("--M", type=int, default=32)
    b.add_argument("--n-bands", type=int, default=8)
    b.add_argument("--t-points", type=int, default=65)

    e = sub.add_parser("estimate", help="estimator values at a single n")
    _add_potential(e)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--parity", choices=(PERIODIC, ANTIPERIODIC), default=PERIODIC)
    e.add_argument("--m", type=int, default=2)
    e.add_argument("--K", type=int)

    k = sub.add_parser("kp", help="Kronig-Penney closed forms")
    k.add_argument("--b", type=float, required=True)
    k.add_argument("--c", required=True)
    k.add_argument("--k", type=int, required=True)

    f = sub.add_parser("fit", help="log-log decay fit of a report column")
    f.add_argument("file")
    f.add_argument("--column", default="err_o1")
    f.add_argument("--parity", choices=(PERIODIC, ANTIPERIODIC))
    f.add_argument("--n-min", type=int, default=1)
    return parser


def _cmd_gaps(args, out) -> int:
    if args.config:
        cfg = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    else:
        source, params = _potential_source(args)
        sp = asy.SeriesParams(args.K, args.guard)
        cfg = ExperimentConfig(source, params, args.parity, args.n_min, args.n_max, args.M,
                               args.orders, args.m, sp, args.format, args.output)
    text = emit_report(run_gap_experiment(cfg), cfg.format, cfg.output)
    if cfg.output is None:
        out.write(text)
    return 0


def _experiment_potential(args):
    source, params = _potential_source(args)
    return ExperimentConfig(source, params).build_potential()


def _cmd_bands(args, out) -> int:
    p = _experiment_potential(args)
    edges = band_structure(p, np.linspace(0.0, math.pi, args.t_points), GalerkinConfig(0.0, args.M),
                           args.n_bands)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("band", "lower", "upper", "gap_above"))
    for i, (lo, hi) in enumerate(edges):
        gap = max(edges[i + 1][0] - hi, 0.0) if i + 1 < len(edges) else ""
        w.writerow((i, repr(lo), repr(hi), repr(gap) if gap != "" else ""))
    return 0


def _cmd_estimate(args, out) -> int:
    p = _experiment_potential(args)
    n, parity = args.n, args.parity
    deg = support_degree(p)
    K = args.K or default_M(n) * 4
    table = fourier_table(p, K if deg is None else max(1, min(K, deg)))
    d = derived_coeffs(table)
    sp = asy.SeriesParams(args.K)
    kappa = asy.coupling_index(n, parity)
    report = {
        "n": n, "parity": parity, "kappa": kappa,
        "gap_o1": asy.gap_first_order(table, kappa),
        "gap_o2": asy.gap_second_order(table, d, kappa),
        "a1_closed": asy.a1_closed(table, n, parity),
    }
    for j in (1, 2):
        report[f"eig_o1_j{j}"] = asy.eig_first_order(table, n, j, parity)
        report[f"eig_o2_j{j}"] = asy.eig_second_order(table, d, n, j, parity, sp)
        est = asy.e_recursion(table, n, j, args.m, sp, parity)
        report[f"E_trace_j{j}"] = list(est.trace)
    if args.m >= 2:
        report[f"gap_o{args.m}"] = asy.gap_order_m(table, n, args.m, parity, sp)
    out.write(json.dumps(report, indent=2) + "\n")
    return 0


def _cmd_kp(args, out) -> int:
    params = kp_make(args.b, parse_rational(args.c))
    k = args.k
    qk = kp_qk(params, k)
    Q0, Qk, Sk = kp_derived(params, k)
    try:
        rate = kp_rate_classify(params, k)
    except ValueError:
        rate = "unavailable (c is not an exact rational)"
    lines = [
        f"a = {params.a!r}, b = {params.b!r}, c = {params.c}",
        f"q_{k} = {qk.real:.12g}{qk.imag:+.12g}i  (= {qk.real * math.pi:.12g}{qk.imag * math.pi:+.12g}i/pi)",
        f"Q_0 = {Q0!r}",
        f"Q_{k} = {Qk.real:.12g}{Qk.imag:+.12g}i",
        f"S_{k} (leading) = {Sk.real:.12g}{Sk.imag:+.12g}i",
        f"gap_leading = {kp_gap_leading(params, k)!r}",
        f"classification: {rate}",
    ]
    out.write("\n".join(lines) + "\n")
    return 0


def _cmd_fit(args, out) -> int:
    with open(args.file, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if args.column not in (reader.fieldnames or ()):
            raise UsageError(f"column {args.column!r} not in {args.file}")
        pts = [(int(r["n"]), float(r[args.column])) for r in reader
               if r[args.column] != "" and int(r["n"]) >= args.n_min
               and (args.parity is None or r.get("parity") == args.parity)]
    fit = fit_decay_rate(pts)
    out.write(f"slope={fit.slope!r} intercept={fit.intercept!r} r2={fit.r2!r} "
              f"used={fit.used} dropped={fit.dropped}\n")
    return 0


COMMANDS = {"gaps": _cmd_gaps, "bands": _cmd_bands, "estimate": _cmd_estimate,
            "kp": _cmd_kp, "fit": _cmd_fit}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"hillgaps: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"hillgaps: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
