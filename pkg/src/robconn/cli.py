"""Command-line front end.

Exit codes: 0 success, 1 constraint/verification/connectivity failure,
2 usage or parse error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings

import numpy as np

from . import simulator, verifier
from .config import SEED_ENV, load_scenario
from .controllers import ConstraintCheck, ParamReport, validate_params
from .errors import ConfigInvalid, DisconnectedError, OutOfDomainError
from .graph import edge_lengths

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _err(msg: str) -> None:
    print(f"robconn: {msg}", file=sys.stderr)


def _state_checks(cfg: simulator.SimConfig) -> ParamReport:
    report = ParamReport()
    cp = cfg.params
    lengths = edge_lengths(cfg.net, cfg.x0)
    longest = float(lengths.max()) if lengths.size else 0.0
    slack = cp.R_tilde * simulator.ICH_RTOL
    report.append(ConstraintCheck("initial_connectivity", cp.R_tilde, longest, cp.R_tilde - longest,
                                  cp.R_tilde - longest >= -slack))
    if cfg.domain is not None:
        inner = cfg.domain.inner_radius
        far = float(np.linalg.norm(cfg.x0, axis=1).max())
        report.append(ConstraintCheck("initial_in_inner_ball", inner, far, inner - far,
                                      inner - far >= -inner * simulator.ICH_RTOL))
    limit = cfg.max_dt()
    report.append(ConstraintCheck("step_size", limit, cfg.step_size, limit - cfg.step_size,
                                  cfg.step_size <= limit * (1 + 1e-12)))
    mag = cp.delta if cfg.disturbance.magnitude is None else cfg.disturbance.magnitude
    report.append(ConstraintCheck("disturbance_magnitude", cp.delta, mag, cp.delta - mag,
                                  0 <= mag <= cp.delta * (1 + 1e-12)))
    return report


def cmd_check(args) -> int:
    try:
        scenario = load_scenario(args.config)
        if args.dump_normalized:
            text = scenario.dump()
            if args.dump_normalized == "-":
                sys.stdout.write(text)
            else:
                with open(args.dump_normalized, "w") as fh:
                    fh.write(text)
        cfg = scenario.build()
    except DisconnectedError as exc:
        print(ConstraintCheck("graph_connected", 0.0, 0.0, 0.0, False).line())
        _err(str(exc))
        return EXIT_FAIL
    except (ConfigInvalid, ValueError, OutOfDomainError) as exc:
        _err(f"config error: {exc}")
        return EXIT_USAGE
    report = validate_params(cfg.net, cfg.pot, cfg.params, cfg.domain)
    report.extend(_state_checks(cfg))
    print(f"N={cfg.net.n_agents} M={cfg.net.n_edges} K={cfg.params.K:.15g} R={cfg.params.R:.15g} "
          f"R_tilde={cfg.params.R_tilde:.15g} delta={cfg.params.delta:.15g}")
    print(report)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    try:
        scenario = load_scenario(args.config)
        cfg = scenario.build()
        cfg.validate()
    except (ConfigInvalid, ValueError, DisconnectedError, OutOfDomainError) as exc:
        _err(f"config error: {exc}")
        return EXIT_USAGE
    report = validate_params(cfg.net, cfg.pot, cfg.params, cfg.domain)
    for c in report.failures():
        _err(f"warning: parameter constraint {c.name} fails (margin {c.margin:+.3e}); guarantees do not apply")
    trace = simulator.run(cfg)
    out = args.output or scenario.output
    trace.to_csv(out)
    summary = trace.summary()
    print(f"wrote {summary['rows']} rows to {out}")
    print(f"final_V={summary['final_V']:.17g} max_dx_inf={summary['max_dx_inf']:.17g} (R={cfg.params.R:.17g}) "
          f"max_m={summary['max_m']:.17g} violations={summary['violations']} status={summary['status']}")
    return EXIT_OK if summary["violations"] == 0 else EXIT_FAIL


def cmd_verify(args) -> int:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get(SEED_ENV, 42))
    if args.budget < 0:
        _err("budget must be >= 0")
        return EXIT_USAGE
    threshold = verifier.PASS_TOL if args.inject_tolerance is None else args.inject_tolerance
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        reports = verifier.run_all(seed, args.budget, threshold)
    for w in caught:
        print(f"warning: {w.message}")
    for r in reports:
        print(r.line())
    if args.output:
        with open(args.output, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fact", "samples", "worst_margin", "pass"])
            w.writerows(r.csv_row() for r in reports)
    ok = all(r.passed for r in reports)
    print("all checks PASS" if ok else "some checks FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ratio(args) -> int:
    if args.max < 1:
        _err("--max must be >= 1")
        return EXIT_USAGE
    table = verifier.rat_table(args.max)
    with open(args.output, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["M", "Rat"])
        w.writerows([m, f"{v:.17g}"] for m, v in table)
    values = np.array([v for _, v in table])
    decreasing = bool(np.all(np.diff(values) < 0))
    below_one = bool(np.all(values[1:] < 1))
    print(f"Rat(1..{args.max}) written to {args.output}; Rat({args.max}) = {values[-1]:.12g}")
    print(f"strictly decreasing: {'yes' if decreasing else 'no'}; below 1 for M >= 2: {'yes' if below_one else 'no'}")
    return EXIT_OK if decreasing and below_one else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robconn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a scenario's parameters")
    p.add_argument("config")
    p.add_argument("--dump-normalized", metavar="PATH",
                   help="write the normalized scenario ('-' for stdout)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="run a scenario and write its trace CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="trace CSV (default: [sim] output)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="Monte-Carlo checks of the supporting inequalities")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or 42)")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("-o", "--output", help="CSV summary, one row per check")
    p.add_argument("--inject-tolerance", type=float, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ratio", help="tabulate the linear/nonlinear initial-radius ratio")
    p.add_argument("--max", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_ratio)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
