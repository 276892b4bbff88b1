"""Command-line front end: fit, simulate, ci, general, thin.

Every command is deterministic given its full flag set (including --seed) and
echoes its effective configuration into run.json in the output directory.
Flag values take precedence over config-file entries, which take precedence
over built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bounds import ChiSquare, CiConfig, LogPower, ci_bounds, deviance, threshold
from .em import EmConfig
from .errors import EstimationError, InputError, ZeroLikelihoodRow
from .estimators import fit_report
from .simulate import PRESETS, run_replications, thin_dataset
from .thresholds import build_threshold_plan, threshold_curve
from .types import BinomialSampleSize, GridSpec, OutcomeTable, PoissonSampleSize
from . import io

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ZERO_LIKELIHOOD = 3


def _add_shared(parser: argparse.ArgumentParser, needs_scenario: bool = True) -> None:
    if needs_scenario:
        parser.add_argument("--scenario", choices=["binomial", "poisson"])
        parser.add_argument("--kappa", type=int, help="planned sample size (binomial only)")
    parser.add_argument("--grid", help="grid shape N1xN2 (default 40x40)")
    parser.add_argument(
        "--grid-range",
        help="t1min,t1max,t2min,t2max overriding the default coordinate ranges",
    )
    parser.add_argument("--iters", type=int, help="EM iterations (default 1000)")
    parser.add_argument("--seed", type=int, help="master seed (default 0)")
    parser.add_argument("--out", help="output directory (default .)")
    parser.add_argument("--threads", type=int, help="worker threads (default all cores)")
    parser.add_argument("--config", help="JSON config file; flags override its entries")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strata-gmle",
        description="Estimate a mean over strata when many have no observations, "
        "by fitting a grid mixture of the latent per-stratum parameters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the mixture and report all estimators")
    p_fit.add_argument("input", help="observation CSV with header x,k")
    _add_shared(p_fit)

    p_sim = sub.add_parser("simulate", help="replicated estimator comparison")
    p_sim.add_argument("--preset", help="built-in design name")
    p_sim.add_argument("--design", help="design JSON file")
    p_sim.add_argument("--reps", type=int, help="replications (default 50)")
    _add_shared(p_sim, needs_scenario=False)

    p_ci = sub.add_parser("ci", help="likelihood-ratio confidence bounds")
    p_ci.add_argument("input", help="observation CSV with header x,k")
    p_ci.add_argument("--alpha", type=float, help="level (default 0.05)")
    p_ci.add_argument("--mode", choices=["chi2", "logpower"], help="threshold rule")
    p_ci.add_argument("--alpha-exp", type=float, help="exponent for logpower mode")
    _add_shared(p_ci)

    p_gen = sub.add_parser("general", help="weighted nonnegative outcomes")
    p_gen.add_argument("input", help="long CSV with header stratum,a,value")
    p_gen.add_argument("--strata", help="side CSV stratum,a declaring empty strata")
    p_gen.add_argument("--max-thresholds", type=int, help="threshold cap (default 100)")
    _add_shared(p_gen)

    p_thin = sub.add_parser("thin", help="subsample each observed unit independently")
    p_thin.add_argument("input", help="observation CSV with header x,k")
    p_thin.add_argument("--gamma", type=float, required=True, help="retention probability")
    _add_shared(p_thin, needs_scenario=False)

    return parser


class _Config:
    """Flag > config file > default resolution."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file: dict = {}
        if getattr(args, "config", None):
            try:
                self.file = json.loads(Path(args.config).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as e:
                raise InputError(f"{args.config}: {e}") from None

    def get(self, name: str, default=None, section: str | None = None):
        flag = getattr(self.args, name.replace("-", "_"), None)
        if flag is not None:
            return flag
        source = self.file.get(section, {}) if section else self.file
        if isinstance(source, dict) and name in source:
            return source[name]
        return default


def _parse_grid_shape(text: str) -> tuple[int, int]:
    try:
        n1, _, n2 = text.lower().partition("x")
        return int(n1), int(n2)
    except ValueError:
        raise InputError(f"--grid expects N1xN2, got {text!r}") from None


def _parse_grid_range(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise InputError(f"--grid-range expects 4 comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise InputError(f"--grid-range expects numbers, got {text!r}") from None


def _grid_spec(cfg: _Config) -> GridSpec:
    shape = cfg.get("grid")
    if isinstance(shape, str):
        n1, n2 = _parse_grid_shape(shape)
    else:
        n1 = int(cfg.get("n1", 40, section="grid"))
        n2 = int(cfg.get("n2", 40, section="grid"))
    rng = cfg.get("grid_range")
    if rng is not None:
        t1min, t1max, t2min, t2max = _parse_grid_range(rng)
    else:
        t1min = cfg.get("t1min", section="grid")
        t1max = cfg.get("t1max", section="grid")
        t2min = cfg.get("t2min", section="grid")
        t2max = cfg.get("t2max", section="grid")
    return GridSpec(n1, n2, t1min, t1max, t2min, t2max)


def _scenario(cfg: _Config):
    name = cfg.get("scenario")
    if name == "binomial":
        kappa = cfg.get("kappa")
        if kappa is None:
            raise InputError("binomial sampling needs --kappa")
        return BinomialSampleSize(int(kappa))
    if name == "poisson":
        return PoissonSampleSize()
    raise InputError("--scenario must be given as 'binomial' or 'poisson'")


def _common(cfg: _Config) -> dict:
    out = {
        "seed": int(cfg.get("seed", 0)),
        "out": str(cfg.get("out", ".")),
        "threads": int(cfg.get("threads", os.cpu_count() or 1)),
        "iters": int(cfg.get("iters", 1000)),
    }
    if out["threads"] < 1:
        raise InputError("--threads must be positive")
    return out


def _outdir(common: dict) -> Path:
    out = Path(common["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid_json(spec: GridSpec) -> dict:
    return {
        "n1": spec.n1,
        "n2": spec.n2,
        "t1min": spec.t1min,
        "t1max": spec.t1max,
        "t2min": spec.t2min,
        "t2max": spec.t2max,
    }


def _scenario_json(scenario) -> dict:
    if isinstance(scenario, BinomialSampleSize):
        return {"scenario": "binomial", "kappa": scenario.kappa}
    return {"scenario": "poisson"}


def cmd_fit(cfg: _Config) -> int:
    common = _common(cfg)
    scenario = _scenario(cfg)
    spec = _grid_spec(cfg)
    obs = io.read_observations_csv(cfg.args.input)
    em_cfg = EmConfig(max_iter=common["iters"])
    result = fit_report(obs, scenario, grid_spec=spec, em_cfg=em_cfg)
    out = _outdir(common)
    io.write_weights_tsv(out / "weights.tsv", result.grid, result.em.weights.w)
    io.write_trace_tsv(out / "trace.tsv", result.em)
    io.write_estimates_tsv(out / "estimates.tsv", result.report)
    io.write_posteriors_tsv(out / "posteriors.tsv", obs, result.report.posterior_means)
    io.write_run_json(
        out / "run.json",
        {
            "command": "fit",
            "input": str(cfg.args.input),
            **common,
            **_scenario_json(scenario),
            "grid": _grid_json(spec),
        },
    )
    return EXIT_OK


def cmd_simulate(cfg: _Config) -> int:
    common = _common(cfg)
    preset = cfg.get("preset")
    design_path = cfg.get("design")
    if preset is not None:
        if preset not in PRESETS:
            names = ", ".join(sorted(PRESETS))
            raise InputError(f"unknown preset {preset!r}; available: {names}")
        design = PRESETS[preset]
    elif design_path is not None:
        design = io.read_design_json(design_path)
    else:
        raise InputError("simulate needs --preset or --design")
    reps = int(cfg.get("reps", 50))
    spec = _grid_spec(cfg)
    em_cfg = EmConfig(max_iter=common["iters"])
    summary = run_replications(
        design,
        reps,
        em_cfg=em_cfg,
        grid_spec=spec,
        seed=common["seed"],
        threads=common["threads"],
    )
    out = _outdir(common)
    io.write_summary_tsv(out / "summary.tsv", summary)
    io.write_run_json(
        out / "run.json",
        {
            "command": "simulate",
            "preset": preset,
            "design": design_path,
            "reps": reps,
            **common,
            **_scenario_json(design.scenario),
            "grid": _grid_json(spec),
        },
    )
    return EXIT_OK


def cmd_ci(cfg: _Config) -> int:
    common = _common(cfg)
    scenario = _scenario(cfg)
    spec = _grid_spec(cfg)
    obs = io.read_observations_csv(cfg.args.input)
    mode_name = cfg.get("mode", "chi2")
    if mode_name == "logpower":
        mode = LogPower(float(cfg.get("alpha_exp", 0.1)))
    elif mode_name == "chi2":
        mode = ChiSquare()
    else:
        raise InputError(f"--mode must be chi2 or logpower, got {mode_name!r}")
    ci_cfg = CiConfig(alpha=float(cfg.get("alpha", 0.05)), mode=mode)
    em_cfg = EmConfig(max_iter=common["iters"])

    result = fit_report(obs, scenario, grid_spec=spec, em_cfg=em_cfg)
    table = OutcomeTable.from_observations(obs)
    dev = deviance(table, result.grid, result.em.weights)
    lower, upper = ci_bounds(
        table, result.grid, ci_cfg, em_cfg=em_cfg, gmle=result.em.weights
    )
    out = _outdir(common)
    io.write_ci_tsv(out / "ci.tsv", lower, upper, ci_cfg.alpha, mode_name, dev)
    io.write_run_json(
        out / "run.json",
        {
            "command": "ci",
            "input": str(cfg.args.input),
            "alpha": ci_cfg.alpha,
            "mode": mode_name,
            "alpha_exp": getattr(mode, "alpha_exp", None),
            **common,
            **_scenario_json(scenario),
            "grid": _grid_json(spec),
        },
    )
    return EXIT_OK


def cmd_general(cfg: _Config) -> int:
    common = _common(cfg)
    scenario = _scenario(cfg)
    spec = _grid_spec(cfg)
    strata = io.read_general_csv(cfg.args.input, cfg.get("strata"))
    cap = int(cfg.get("max_thresholds", 100))
    em_cfg = EmConfig(max_iter=common["iters"])
    plan = build_threshold_plan(strata, cap)
    curve = threshold_curve(strata, scenario, grid_spec=spec, em_cfg=em_cfg, plan=plan)
    out = _outdir(common)
    io.write_general_tsv(out / "general.tsv", curve)
    io.write_general_estimate_tsv(out / "estimates.tsv", curve.integrate())
    io.write_run_json(
        out / "run.json",
        {
            "command": "general",
            "input": str(cfg.args.input),
            "strata": cfg.get("strata"),
            "max_thresholds": cap,
            **common,
            **_scenario_json(scenario),
            "grid": _grid_json(spec),
        },
    )
    return EXIT_OK


def cmd_thin(cfg: _Config) -> int:
    common = _common(cfg)
    gamma = float(cfg.args.gamma)
    obs = io.read_observations_csv(cfg.args.input)
    thinned = thin_dataset(obs, gamma, seed=common["seed"])
    out = _outdir(common)
    io.write_observations_csv(out / "thinned.csv", thinned)
    io.write_run_json(
        out / "run.json",
        {"command": "thin", "input": str(cfg.args.input), "gamma": gamma, **common},
    )
    return EXIT_OK


_COMMANDS = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "ci": cmd_ci,
    "general": cmd_general,
    "thin": cmd_thin,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _Config(args)
        return _COMMANDS[args.command](cfg)
    except ZeroLikelihoodRow as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ZERO_LIKELIHOOD
    except (InputError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except EstimationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
