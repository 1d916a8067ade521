"""Command line entry point.

    cmvlab <command> --config <path> [--seed S] [--out DIR]

Commands: verify, moments, dynamics, aizenman, decay, run.  All outputs
are byte-deterministic given the configuration; timings are written to a
separate sidecar file.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import ensembles, estimators, reporting, verify
from .config import COMMANDS, ConfigError, emit_config, parse_config
from .spectral import QuadratureSpec


def _load_config(args):
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    config = parse_config(text, command=args.command)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if overrides:
        raw = json.loads(text) if text.strip() else {}
        raw.update(overrides)
        config = parse_config(json.dumps(raw), command=args.command)
    return config


def _quad(config):
    return config.quadrature if config.quadrature else QuadratureSpec()


def cmd_verify(config, out):
    results = verify.run_suite(config.seed, dims=config.dims)
    rows = [{"name": r.name, "max_residual": r.max_residual,
             "threshold": r.threshold, "passed": r.passed} for r in results]
    reporting.write_report(os.path.join(out, "report.json"),
                           emit_config(config), {"checks": rows})
    reporting.write_generic_csv(
        os.path.join(out, "verify.csv"),
        ("name", "max_residual", "threshold", "passed"),
        [{**r, "passed": int(r["passed"])} for r in rows])
    if config.figures:
        reporting.render_residual_figure(os.path.join(out, "residuals.png"),
                                         results)
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{status:4s}  {r.name:32s} residual {r.max_residual:.3e} "
              f"(threshold {r.threshold:.1e})")
    return 0 if all(r.passed for r in results) else 1


def cmd_moments(config, out):
    rows = []
    for k, l in config.pairs:
        est = estimators.fractional_moment_expectation(
            config.ensemble, k, l, config.p, config.n_samples, _quad(config))
        rows.append({"pair_k": k, "pair_l": l, "distance": abs(l - k),
                     "estimate": est.value, "std_error": est.std_error,
                     "n_samples": est.n_samples})
    reporting.write_table(os.path.join(out, "moments.csv"), rows)
    reporting.write_report(os.path.join(out, "report.json"),
                           emit_config(config), {"moments": rows})
    if config.figures:
        d = [r["distance"] for r in rows]
        reporting.render_decay_figure(
            os.path.join(out, "moments.png"),
            {"fractional moment": (d, [r["estimate"] for r in rows],
                                   [r["std_error"] for r in rows])},
            title="fractional moment vs distance")
    return 0


def cmd_dynamics(config, out):
    sup_rows, bound_rows = [], []
    for k, l in config.pairs:
        est = estimators.dynamical_localization_expectation(
            config.ensemble, k, l, config.n_window, config.n_samples)
        base = {"pair_k": k, "pair_l": l, "distance": abs(l - k),
                "n_samples": est.n_samples}
        sup_rows.append({**base, "estimate": est.windowed_sup_mean,
                         "std_error": est.windowed_sup_std_error})
        bound_rows.append({**base, "estimate": est.rigorous_bound_mean,
                           "std_error": est.rigorous_bound_std_error})
    reporting.write_table(os.path.join(out, "dynamics_sup.csv"), sup_rows)
    reporting.write_table(os.path.join(out, "dynamics_bound.csv"), bound_rows)
    reporting.write_report(
        os.path.join(out, "report.json"), emit_config(config),
        {"windowed_sup": sup_rows, "rigorous_bound": bound_rows})
    if config.figures:
        d = [r["distance"] for r in sup_rows]
        reporting.render_decay_figure(
            os.path.join(out, "dynamics.png"),
            {"windowed sup": (d, [r["estimate"] for r in sup_rows],
                              [r["std_error"] for r in sup_rows]),
             "rigorous bound": (d, [r["estimate"] for r in bound_rows],
                                [r["std_error"] for r in bound_rows])},
            title="dynamical decay vs distance")
    return 0


def cmd_aizenman(config, out):
    rows = []
    violations = 0
    for i in range(config.n_samples):
        seq = ensembles.sample(config.ensemble, i)
        for k, m in config.pairs:
            rec = estimators.aizenman_inequality_check(
                seq, k, m, config.p, config.lambda_grid, _quad(config),
                n_window=config.n_window)
            rows.append({"sample_index": i, "pair_k": k, "pair_l": m,
                         "p": config.p, **rec})
            if rec["margin"] < -1e-8:
                violations += 1
    reporting.write_generic_csv(
        os.path.join(out, "aizenman.csv"),
        ("sample_index", "pair_k", "pair_l", "p", "lhs", "rhs", "margin"),
        rows)
    reporting.write_report(
        os.path.join(out, "report.json"), emit_config(config),
        {"aizenman": rows, "violations": violations})
    if config.figures:
        reporting.render_margin_figure(
            os.path.join(out, "aizenman.png"),
            [r["lhs"] for r in rows], [r["rhs"] for r in rows],
            title="averaged sup vs fractional-moment bound")
    print(f"{len(rows)} checks, {violations} violations beyond -1e-8")
    return 0 if violations == 0 else 1


def cmd_decay(config, out):
    if not config.input_csv:
        raise ConfigError("$.input_csv: required for the decay command")
    d, v, se = [], [], []
    with open(config.input_csv) as fh:
        header = fh.readline().strip().split(",")
        idx = {name: header.index(name) for name in
               ("distance", "estimate", "std_error")}
        for line in fh:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            d.append(float(parts[idx["distance"]]))
            v.append(float(parts[idx["estimate"]]))
            se.append(float(parts[idx["std_error"]]))
    weights = estimators._fit_weights(v, se)
    fit = estimators.fit_decay(d, v, weights)
    reporting.write_report(os.path.join(out, "report.json"),
                           emit_config(config), {"fit": fit})
    if config.figures:
        reporting.render_decay_figure(
            os.path.join(out, "decay.png"),
            {"input": (d, v, se)}, fits={"fit": fit},
            title="decay fit")
    print(f"rate {fit.rate:.6f}  prefactor {fit.prefactor:.6f}  "
          f"R2 {fit.r_squared:.4f}")
    return 0


def cmd_run(config, out):
    result = estimators.run_theorem11_experiment(
        config.ensemble, config.p, config.pairs, config.n_samples,
        n_window=config.n_window, quad=_quad(config))
    rows = result["rows"]
    reporting.write_table(
        os.path.join(out, "moments.csv"),
        reporting.estimate_rows(rows, "moment", "moment_std_error"))
    reporting.write_table(
        os.path.join(out, "dynamics_sup.csv"),
        reporting.estimate_rows(rows, "windowed_sup",
                                "windowed_sup_std_error"))
    reporting.write_table(
        os.path.join(out, "dynamics_bound.csv"),
        reporting.estimate_rows(rows, "rigorous_bound",
                                "rigorous_bound_std_error"))
    reporting.write_report(os.path.join(out, "report.json"),
                           emit_config(config), result)
    if config.figures:
        d = [r["distance"] for r in rows]
        reporting.render_decay_figure(
            os.path.join(out, "decay.png"),
            {"fractional moment": (d, [r["moment"] for r in rows],
                                   [r["moment_std_error"] for r in rows]),
             "windowed sup": (d, [r["windowed_sup"] for r in rows],
                              [r["windowed_sup_std_error"] for r in rows]),
             "rigorous bound": (d, [r["rigorous_bound"] for r in rows],
                                [r["rigorous_bound_std_error"] for r in rows])},
            fits={"moment": result["moment_fit"],
                  "bound": result["dynloc_fit"]},
            title="moment and dynamical decay")
    for name in ("moment_fit", "dynloc_fit"):
        fit = result[name]
        if fit is not None:
            print(f"{name}: rate {fit.rate:.4f}  R2 {fit.r_squared:.4f}")
        else:
            print(f"{name}: too few usable points")
    return 0


_DISPATCH = {
    "verify": cmd_verify,
    "moments": cmd_moments,
    "dynamics": cmd_dynamics,
    "aizenman": cmd_aizenman,
    "decay": cmd_decay,
    "run": cmd_run,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cmvlab",
        description="Finite CMV matrices, rank-one perturbation identities, "
                    "and localization experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--out", help="override the output directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    threads = os.environ.get("CMVLAB_NUM_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    try:
        config = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = reporting.ensure_outdir(config.out)
    t0 = time.perf_counter()
    try:
        code = _DISPATCH[config.command](config, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    reporting.write_timings(
        os.path.join(out, "timings.json"),
        {"command": config.command,
         "wall_seconds": time.perf_counter() - t0})
    return code


if __name__ == "__main__":
    sys.exit(main())
