"""Command-line interface.

Subcommands: ``estimate`` (fit a CSV dataset), ``frt`` (randomization
test), ``simulate`` (write a seeded dataset), ``oracle-check`` (verify
closed-form estimands against enumeration), ``mc-est`` / ``mc-frt``
(Monte Carlo tables), and ``table1`` (pair-model spurious-detection
summary).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import io
from .data import ExposureMap
from .dgp import NetworkDgpConfig, PairDgpConfig, gen_network, gen_pair
from .errors import SpillnetError
from .estimators import ols_fit, tsls_fit, wls_fit
from .harness import (
    format_mc_est_table,
    format_mc_frt_table,
    load_grid,
    mc_estimation,
    mc_frt,
    table1_replication,
    write_report_csv,
)
from .oracle import (
    NetworkPopulationSpec,
    network_enumerate,
    network_theorem_values,
    pair_closed_forms,
    pair_enumerate,
    random_network_spec,
    random_pair_spec,
)
from .randomization import frt

PAIR_GAP_TOL = 1e-10
NETWORK_GAP_TOL = 1e-9


def _add_exposure_arg(parser):
    parser.add_argument(
        "--exposure",
        default="identity",
        choices=[m.value for m in ExposureMap],
        help="exposure map applied to the treated-peer count",
    )


def _cmd_estimate(args) -> int:
    ds = io.read_network_csv(args.input)
    exposure_map = ExposureMap.parse(args.exposure)
    m = ds.exposure_values(exposure_map)
    if args.method == "ols":
        fit = ols_fit(ds.y, ds.d, m, se_kind_for_t=args.se)
    elif args.method == "tsls":
        fit = tsls_fit(ds.y, ds.d, m, ds.d1, se_kind_for_t=args.se)
    else:
        if ds.a1 is None:
            raise SpillnetError("wls needs the a1 column")
        fit = wls_fit(ds.y, ds.d, m, ds.d1, ds.a1, se_kind_for_t=args.se)
    io.write_fit_csv(fit, args.out)
    print(f"{fit.method} fit on n_used={fit.n_used}")
    for term, coef, t in zip(("const", "d", "m"), fit.coefficients, fit.t_values):
        print(f"  {term:>6}  coef={coef: .6f}  t={t: .3f}")
    print(f"wrote {args.out}")
    return 0


def _cmd_frt(args) -> int:
    ds = io.read_network_csv(args.input)
    result = frt(
        ds,
        ExposureMap.parse(args.exposure),
        statistic=args.stat,
        b=args.b,
        p1j=args.p1j,
        seed=args.seed,
        sidedness=args.sided,
        exact=args.exact,
    )
    if args.json:
        print(json.dumps(dataclasses.asdict(result)))
    else:
        print(f"statistic={result.statistic_kind} observed={result.observed:.6f}")
        print(f"p_value={result.p_value:.6g} (b={result.b}, {result.sidedness})")
    return 0


def _cmd_simulate(args) -> int:
    if args.model == "pair":
        ds = gen_pair(
            PairDgpConfig(n=args.n, seed=args.seed)
        ).as_network()
    else:
        ds = gen_network(NetworkDgpConfig(n=args.n, h=args.h, c=args.c, seed=args.seed))
    io.write_network_csv(ds, args.out)
    print(f"wrote {ds.n} rows to {args.out}")
    return 0


def _check_spec(spec, exposure_maps) -> float:
    if isinstance(spec, NetworkPopulationSpec):
        worst = 0.0
        for em in exposure_maps:
            reports = network_theorem_values(spec, em)
            worst = max(worst, *(r.max_abs_gap for r in reports.values()))
            enum = network_enumerate(spec, em)
            worst = max(worst, abs(enum[1][2] - enum[2][2]))  # tsls vs wls spillover
        return worst
    reports = pair_closed_forms(spec)
    return max(r.max_abs_gap for r in reports.values())


def _cmd_oracle_check(args) -> int:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    failures = 0
    if args.spec_file:
        spec = io.load_population_spec(args.spec_file)
        tol = PAIR_GAP_TOL if not isinstance(spec, NetworkPopulationSpec) else NETWORK_GAP_TOL
        gap = _check_spec(spec, list(ExposureMap))
        status = "ok" if gap <= tol else "FAIL"
        print(f"spec file {args.spec_file}: max gap {gap:.3e} [{status}]")
        return 0 if gap <= tol else 1
    for k in range(args.specs):
        if args.model == "pair":
            spec = random_pair_spec(rng)
            gap = _check_spec(spec, [])
            tol = PAIR_GAP_TOL
        else:
            spec = random_network_spec(rng)
            gap = _check_spec(spec, list(ExposureMap))
            tol = NETWORK_GAP_TOL
        if gap > tol:
            failures += 1
            print(f"spec {k}: max gap {gap:.3e} exceeds {tol:g}")
    print(
        f"checked {args.specs} random {args.model} specs: "
        f"{args.specs - failures} ok, {failures} failed"
    )
    return 1 if failures else 0


def _cmd_mc_est(args) -> int:
    grid, exposure_map = load_grid(args.grid)
    report = mc_estimation(grid, reps=args.reps, exposure_map=exposure_map, master_seed=args.seed)
    write_report_csv(report, args.out)
    print(format_mc_est_table(report))
    print(f"wrote {args.out}")
    return 0


def _cmd_mc_frt(args) -> int:
    grid, exposure_map = load_grid(args.grid)
    report = mc_frt(
        grid, reps=args.reps, b=args.b, master_seed=args.seed, exposure_map=exposure_map
    )
    write_report_csv(report, args.out)
    print(format_mc_frt_table(report))
    print(f"wrote {args.out}")
    return 0


def _cmd_table1(args) -> int:
    summary = table1_replication(reps=args.reps, n=args.n, master_seed=args.seed)
    print(f"pair-model replication: n={summary.n}, reps={summary.reps}")
    print(f"{'method':>6} {'detect@5%':>10} {'mean b_d':>10} {'mean b_s':>10}")
    for m in ("ols", "tsls", "wls"):
        print(
            f"{m:>6} {summary.detect_rate[m]:>10.3f} "
            f"{summary.mean_beta_d[m]:>10.4f} {summary.mean_beta_s[m]:>10.4f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spillnet",
        description="Treatment spillover estimation on endogenous networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="fit a dataset from CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--method", required=True, choices=["ols", "tsls", "wls"])
    _add_exposure_arg(p)
    p.add_argument("--se", default="classical", choices=["classical", "robust"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("frt", help="randomization test of the no-spillover null")
    p.add_argument("--input", required=True)
    p.add_argument("--stat", required=True, choices=["tsls", "wls", "itt", "ittc"])
    p.add_argument("--b", type=int, default=500)
    p.add_argument("--p1j", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sided", default="upper", choices=["upper", "abs"])
    p.add_argument("--exact", action="store_true", help="use (1+hits)/(1+B)")
    _add_exposure_arg(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_frt)

    p = sub.add_parser("simulate", help="write a seeded synthetic dataset")
    p.add_argument("--model", required=True, choices=["pair", "network"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("oracle-check", help="verify closed forms against enumeration")
    p.add_argument("--model", default="pair", choices=["pair", "network"])
    p.add_argument("--specs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec-file", default=None)
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("mc-est", help="estimator bias/RMSE/coverage table")
    p.add_argument("--grid", required=True)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mc_est)

    p = sub.add_parser("mc-frt", help="randomization-test rejection table")
    p.add_argument("--grid", required=True)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--b", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mc_frt)

    p = sub.add_parser("table1", help="pair-model spurious-detection summary")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_table1)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpillnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
