"""bandswitch-sim command line: scenario runs and sensitivity sweeps.

Precedence for settings: built-in defaults, then the --config JSON file
(flat keys; scene_*/sub6_*/mmwave_* prefixes reach the nested configs),
then explicit command-line flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .dataset import SyntheticSceneConfig, load_channel_file
from .reporting import write_run_outputs, write_sweep_outputs
from .simrunner import (
    POLICY_ORDER,
    ScenarioConfig,
    default_mmwave,
    default_sub6,
    run_blockage_sweep,
    run_scenario,
    run_threshold_sweep,
)

_SCENARIO_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}
_SCENE_FIELDS = {f.name for f in dataclasses.fields(SyntheticSceneConfig)}
_BAND_FIELDS = {
    "center_frequency", "bandwidth", "antennas_y", "antennas_z",
    "tx_energy_per_hz", "noise_figure_db", "codebook_size",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", choices=["A", "B", "C", "custom"])
    common.add_argument("--config", type=Path, help="flat JSON config file")
    common.add_argument("--data", default="synthetic",
                        help="'synthetic' or a channels .jsonl file")
    common.add_argument("--out", type=Path, required=True, help="output directory")
    common.add_argument("--policy", nargs="+",
                        choices=list(POLICY_ORDER) + ["all"],
                        help="policies to report (default: all)")
    common.add_argument("--classifier", choices=["mlp", "gbt"])
    common.add_argument("--feature-mode", choices=["full", "deployable"])
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--scale", type=float,
                        help="population scale factor (1.0 = ~54k UEs)")
    common.add_argument("--grid-mode", choices=["small", "full"])
    common.add_argument("--no-figures", action="store_true")

    parser = argparse.ArgumentParser(
        prog="bandswitch-sim",
        description="Dual-band base station band-switch policy simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one scenario run")
    p_thr = sub.add_parser("sweep-threshold", parents=[common],
                           help="rerun over band-switch thresholds")
    p_thr.add_argument("--thresholds", nargs="+", type=float, required=True,
                       help="threshold rates in bit/s")
    p_thr.add_argument("--band", choices=["sub6", "mmwave", "both"],
                       help="which threshold to sweep (default: scenario's start band)")
    p_blk = sub.add_parser("sweep-blockage", parents=[common],
                           help="rerun over exploitation blockage probabilities")
    p_blk.add_argument("--p", nargs="+", type=float,
                       help="blockage probabilities (default: config sweep list)")
    return parser


def _load_config_file(path: Path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise SystemExit(f"config file {path} must hold a JSON object")
    return data


def make_config(args: argparse.Namespace) -> tuple[ScenarioConfig, dict]:
    """Merge defaults, config file and CLI flags into a ScenarioConfig."""
    file_cfg = _load_config_file(args.config) if args.config else {}
    scenario_kw: dict = {}
    scene_kw: dict = {}
    band_kw = {"sub6": {}, "mmwave": {}}
    for key, value in file_cfg.items():
        if key in _SCENARIO_FIELDS and key not in ("sub6", "mmwave", "scene"):
            scenario_kw[key] = tuple(value) if isinstance(value, list) else value
        elif key.startswith("scene_") and key[len("scene_"):] in _SCENE_FIELDS:
            scene_kw[key[len("scene_"):]] = tuple(value) if isinstance(value, list) else value
        elif key.startswith(("sub6_", "mmwave_")):
            band, field = key.split("_", 1)
            if field not in _BAND_FIELDS:
                raise SystemExit(f"unknown config key {key!r}")
            band_kw[band][field] = value
        else:
            raise SystemExit(f"unknown config key {key!r}")

    overrides = {
        "scenario": args.scenario,
        "classifier": args.classifier,
        "feature_mode": getattr(args, "feature_mode", None),
        "master_seed": args.seed,
        "scale": args.scale,
        "grid_mode": getattr(args, "grid_mode", None),
    }
    for key, value in overrides.items():
        if value is not None:
            scenario_kw[key] = value
    if args.policy:
        names = list(POLICY_ORDER) if "all" in args.policy else args.policy
        scenario_kw["policies"] = tuple(dict.fromkeys(names))

    for band, kw in band_kw.items():
        if kw:
            base = dataclasses.asdict(default_sub6() if band == "sub6" else default_mmwave())
            base.update(kw)
            if "codebook_size" not in kw and "antennas_y" in kw:
                base["codebook_size"] = kw["antennas_y"]
            scenario_kw[band] = type(default_sub6())(**base)
    if scene_kw:
        scenario_kw["scene"] = SyntheticSceneConfig(**scene_kw)

    try:
        cfg = ScenarioConfig(**scenario_kw)
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"invalid configuration: {exc}") from exc
    return cfg, file_cfg


def _load_samples(args: argparse.Namespace, cfg: ScenarioConfig):
    if args.data == "synthetic":
        return None
    return load_channel_file(args.data, cfg.sub6, cfg.mmwave)


def _print_report(report) -> None:
    print(f"scenario {report.scenario}: "
          f"T_C sub-6 {report.t_c_sub6 * 1e3:.2f} ms, "
          f"T_C mmWave {report.t_c_mmwave * 1e3:.2f} ms")
    for name, stats in report.policies.items():
        print(f"  {name:<9} mean {stats.mean / 1e6:7.3f} Mbit/s  "
              f"normalized {stats.normalized_mean:5.2f}  "
              f"requests {stats.requests}  grants {stats.grants}")
    if report.classifier is not None:
        c = report.classifier
        roc = "n/a" if c.roc_area is None else f"{c.roc_area:.4f}"
        print(f"  classifier {c.kind} ({c.feature_mode}): "
              f"mu {c.error_rate:.4%}, roc area {roc}, trained on {c.n_training} rows")
    for warning in report.warnings:
        print(f"  warning: {warning}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg, file_cfg = make_config(args)
    samples = _load_samples(args, cfg)
    figures = not args.no_figures

    if args.command == "run":
        report = run_scenario(cfg, samples=samples)
        report.config["config_file"] = file_cfg
        paths = write_run_outputs(report, args.out, figures=figures)
        _print_report(report)
    elif args.command == "sweep-threshold":
        results = run_threshold_sweep(cfg, args.thresholds, band=args.band, samples=samples)
        for _, report in results:
            report.config["config_file"] = file_cfg
        paths = write_sweep_outputs("threshold", "threshold_bps", results, args.out,
                                    figures=figures)
        for value, report in results:
            print(f"--- threshold {value / 1e6:.2f} Mbit/s ---")
            _print_report(report)
    else:
        results = run_blockage_sweep(cfg, args.p, samples=samples)
        for _, report in results:
            report.config["config_file"] = file_cfg
        paths = write_sweep_outputs("blockage", "p_exploitation", results, args.out,
                                    figures=figures)
        for value, report in results:
            print(f"--- exploitation blockage p = {value:.2f} ---")
            _print_report(report)

    print("wrote: " + ", ".join(str(p) for p in sorted(set(paths.values()))))
    return 0


if __name__ == "__main__":
    sys.exit(main())
