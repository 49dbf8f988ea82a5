"""Command-line entry point.

Each subcommand reads one JSON config (``--config``); the shared flags
override the matching config keys.  Exit status is 0 on success, 2 on invalid
input and 3 when a request exceeds a capacity limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import lab
from .equilibrium import equilibrium2, equilibrium_k, surviving_set, threshold_classify
from .errors import CapacityError, InvalidInputError
from .graph import jumbledness_alpha, read_edge_list

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAPACITY = 3

# flag name -> config key
_OVERRIDES = {
    "seed": "base_seed",
    "out": "out",
    "replicates": "replicates",
    "t_max": "t_max",
    "max_events": "max_events",
    "jobs": "jobs",
}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="JSON config file")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--replicates", type=int)
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--max-events", dest="max_events", type=int)
    common.add_argument("--jobs", type=int, help="worker processes")

    parser = argparse.ArgumentParser(prog="irir", description="Competing-infection simulator and drift toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "run replicates and write trajectories plus stats.json"),
        ("sweep", "survival statistics over a grid of one rate knob"),
        ("ksim", "k-infection extinction order and coexistence"),
        ("equilibrium", "equilibrium values and threshold regime"),
        ("drift-check", "exact drift vs derivative over rate on band states"),
        ("jumbled", "jumbledness certificate for an edge-list graph"),
        ("report-constants", "band constants and measured drift"),
    ]:
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def _overrides(args) -> dict:
    return {key: getattr(args, flag) for flag, key in _OVERRIDES.items() if getattr(args, flag) is not None}


def _merge(config: dict, overrides: dict, allowed: set, command: str) -> dict:
    for key, value in overrides.items():
        if key not in allowed:
            flag = next(f for f, k in _OVERRIDES.items() if k == key).replace("_", "-")
            raise InvalidInputError(f"--{flag} does not apply to {command}")
        config[key] = value
    return config


def _print_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _simulate(config, ov):
    cfg = lab.ExperimentConfig.from_dict(_merge(config, ov, set(lab.ExperimentConfig.__dataclass_fields__), "simulate"))
    stats, _ = lab.simulate(cfg)
    _print_json(stats.to_dict())


def _sweep(config, ov):
    cfg = lab.ExperimentConfig.from_dict(_merge(config, ov, set(lab.ExperimentConfig.__dataclass_fields__), "sweep"))
    rows = lab.sweep(cfg)
    if not cfg.out:
        lab.write_rows_to(sys.stdout, lab.SWEEP_COLUMNS, rows)


def _ksim(config, ov):
    cfg = lab.KConfig.from_dict(_merge(config, ov, set(lab.KConfig.__dataclass_fields__), "ksim"))
    result = lab.ksim(cfg)
    if not cfg.out:
        _print_json({k: v for k, v in result.items() if k != "replicates"})


def _equilibrium(config, ov):
    _merge(config, ov, {"out"}, "equilibrium")
    out = config.pop("out", None)
    margin = float(config.pop("margin", 0.25))
    if "model" in config:
        model = lab.build_model(config["model"])
        params = lab.build_rates(config["rates"], model)
        eq = equilibrium2(params, model.n)
        th = threshold_classify(params, model.n, margin)
        result = {
            "n": model.n,
            "params": params.to_dict(),
            "equilibrium": eq.to_dict(),
            "S": th.S,
            "S_over_n": th.S_over_n,
            "margin": margin,
            "regime": th.regime.value,
        }
    else:
        kcfg = lab.KConfig.from_dict({"initial": {"eps": 0.0}, **config})
        kp = kcfg.kparams()
        best = surviving_set(kp, kcfg.n, method="brute" if kcfg.k <= 20 else "greedy")
        result = {
            "n": kcfg.n,
            "k": kcfg.k,
            "equilibrium": equilibrium_k(kp, kcfg.n).to_dict(),
            "surviving_set": None if best.members is None else list(best.members),
            "objective": best.objective,
            "heuristic": best.heuristic,
        }
    if out:
        os.makedirs(out, exist_ok=True)
        lab.write_json(os.path.join(out, "equilibrium.json"), result)
    _print_json(result)


def _drift_check(config, ov):
    cfg = lab.AuditConfig.from_dict(_seed_key(_merge(config, ov, {"base_seed", "out"}, "drift-check")))
    result = lab.drift_audit(cfg)
    if not cfg.out:
        lab.write_rows_to(sys.stdout, lab.DRIFT_COLUMNS, result["rows"])
    print(json.dumps(result["summary"], sort_keys=True), file=sys.stderr)


def _seed_key(config: dict) -> dict:
    if "base_seed" in config:
        config["seed"] = config.pop("base_seed")
    return config


def _jumbled(config, ov):
    _merge(config, ov, {"base_seed", "out"}, "jumbled")
    _seed_key(config)
    out = config.pop("out", None)
    try:
        graph = config.pop("graph")
    except KeyError:
        raise InvalidInputError("jumbled config needs 'graph' (edge-list path or model descriptor)") from None
    if isinstance(graph, dict):
        g = lab.build_model(graph)
    else:
        g = read_edge_list(graph, config.pop("n", None))
    report = jumbledness_alpha(
        g,
        p=config.pop("p", None),
        mode=config.pop("mode", "exhaustive"),
        sample_budget=int(config.pop("sample_budget", 10_000)),
        seed=int(config.pop("seed", 0)),
    )
    if config:
        raise InvalidInputError(f"unknown jumbled keys: {sorted(config)}")
    result = report.to_dict()
    if out:
        os.makedirs(out, exist_ok=True)
        lab.write_json(os.path.join(out, "jumbled.json"), result)
    _print_json(result)


def _report_constants(config, ov):
    cfg = lab.AuditConfig.from_dict(_seed_key(_merge(config, ov, {"base_seed", "out"}, "report-constants")))
    _print_json(lab.report_theorem_constants(cfg))


_COMMANDS = {
    "simulate": _simulate,
    "sweep": _sweep,
    "ksim": _ksim,
    "equilibrium": _equilibrium,
    "drift-check": _drift_check,
    "jumbled": _jumbled,
    "report-constants": _report_constants,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = lab.load_json(args.config)
        _COMMANDS[args.command](config, _overrides(args))
    except CapacityError as exc:
        print(f"irir: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (InvalidInputError, ValueError, TypeError, KeyError) as exc:
        print(f"irir: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
