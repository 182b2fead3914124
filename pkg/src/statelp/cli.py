"""Command line entry point.

Subcommands:

* ``simulate``   draw a panel from a configured process and write it as CSV;
* ``estimate``   run a projection (or IV projection) on a panel CSV;
* ``experiment`` run a named experiment, writing CSV artifacts and a JSON
  summary with per-metric pass/fail flags.

Exit codes: 0 on success, 1 when an experiment criterion fails, 2 on usage
errors.  Identical (config, seed) produce byte-identical outputs regardless
of ``--workers``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dgp import (
    DsgeConfig,
    GovSpendConfig,
    SeriesPanel,
    StvarConfig,
    default_stvar_config,
    simulate_arma,
    simulate_dsge,
    simulate_govspend,
    simulate_late,
    simulate_simplified_income,
    simulate_stvar,
)
from .estimators import InteractionSpec, lp_iv_state, lp_linear, lp_state, lp_results_to_csv
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _build_panel(config: dict, T: int, seed: int) -> SeriesPanel:
    kind = config.get("dgp")
    params = dict(config.get("params", {}))
    if kind == "arma":
        return simulate_arma(params.get("rho", 0.5), params.get("gamma", 0.2), T, seed)
    if kind == "dsge":
        return simulate_dsge(DsgeConfig(**params), T, seed)
    if kind == "simplified_income":
        phi0 = params.pop("phi0", 0.86)
        phi1 = params.pop("phi1", 0.77)
        mode = params.pop("mode", "ar")
        return simulate_simplified_income(
            DsgeConfig(**params), phi0, phi1, T, seed, mode=mode
        )
    if kind == "stvar":
        if params:
            cfg = StvarConfig(
                lags_expansion=[np.asarray(m) for m in params["lags_expansion"]],
                lags_recession=[np.asarray(m) for m in params["lags_recession"]],
                cov_expansion=np.asarray(params["cov_expansion"]),
                cov_recession=np.asarray(params["cov_recession"]),
                steepness=params.get("steepness", 1.5),
                state_window=params.get("state_window", 7),
            )
        else:
            cfg = default_stvar_config()
        return simulate_stvar(cfg, T, seed)
    if kind == "govspend":
        return simulate_govspend(GovSpendConfig(**params), T, seed)
    if kind == "late":
        return simulate_late(
            params.get("p_complier", 0.5),
            params.get("p_always", 0.25),
            params.get("p_never", 0.25),
            params.get(
                "effect_means", {"complier": 1.0, "always": 0.5, "never": 0.0}
            ),
            T,
            seed,
        )
    raise KeyError(f"unknown dgp {kind!r}")


def _build_spec(spec_config: dict) -> InteractionSpec:
    kind = spec_config.get("kind", "binary")
    kwargs = {k: v for k, v in spec_config.items() if k != "kind"}
    table = {
        "linear": InteractionSpec.linear,
        "binary": InteractionSpec.binary,
        "logistic": InteractionSpec.logistic,
        "polynomial": InteractionSpec.polynomial,
        "kernel": InteractionSpec.kernel_weight,
        "custom": InteractionSpec.custom_grid,
    }
    if kind not in table:
        raise KeyError(f"unknown interaction kind {kind!r}")
    return table[kind](**kwargs)


def _cmd_simulate(args) -> int:
    config = _load_json(args.config)
    T = args.T or int(config.get("T", 10_000))
    panel = _build_panel(config, T, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    panel.to_csv(out / "panel.csv")
    return 0


def _cmd_estimate(args) -> int:
    config = _load_json(args.config)
    panel = SeriesPanel.from_csv(config["panel"])
    H = int(config.get("H", 4))
    estimator = config.get("estimator", "lp")
    states = config.get("states", [0.0, 1.0])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if estimator == "lp" and "spec" not in config:
        results = lp_linear(panel, H)
        label = "LP"
    elif estimator == "lp":
        results = lp_state(panel, _build_spec(config["spec"]), H)
        label = "LP"
    elif estimator == "lp_iv":
        results = lp_iv_state(panel, _build_spec(config.get("spec", {})), H)
        label = "LP_IV"
    else:
        raise KeyError(f"unknown estimator {estimator!r}")
    lp_results_to_csv(results, out / "lp.csv", states=states, estimator=label)
    return 0


def _cmd_experiment(args) -> int:
    config = _load_json(args.config) if args.config else {}
    cfg = ExperimentConfig.from_dict(config, experiment=args.name)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.outdir = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    summary = run_experiment(cfg)
    for name in sorted(summary.metrics):
        metric = summary.metrics[name]
        flag = "PASS" if metric.passed else "FAIL"
        print(f"[{flag}] {summary.experiment}: {name} "
              f"(value={metric.value:.6g}, mc_se={metric.mc_se:.3g}; {metric.criterion})")
    return 0 if summary.all_passed() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statelp",
        description="Simulation lab for state-dependent projection estimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a panel and write panel.csv")
    sim.add_argument("--config", required=True, help="JSON file: {dgp, params, T}")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--T", type=int, default=None)
    sim.add_argument("--out", required=True)

    fit = sub.add_parser("estimate", help="estimate projections on a panel CSV")
    fit.add_argument("--config", required=True,
                     help="JSON file: {panel, estimator, spec, H, states}")
    fit.add_argument("--out", required=True)

    exp = sub.add_parser("experiment", help="run a named experiment")
    exp.add_argument("name", choices=sorted(EXPERIMENTS))
    exp.add_argument("--config", default=None)
    exp.add_argument("--seed", type=int, default=None)
    exp.add_argument("--out", default=None)
    exp.add_argument("--workers", type=int, default=None)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code) if err.code else 0
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        return _cmd_experiment(args)
    except (KeyError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
