import argparse
import importlib
import logging
import sys
from pathlib import Path

import yaml

from pkg.utils.errors import ConfigError, DepthViolationError, GateError, NumericalAbortError
from pkg.workflows.config import default_config_path, load_config, output_directory

REGISTRY = Path(__file__).resolve().parent.parent / "config" / "experiments.yaml"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_GATE = 2
EXIT_ABORT = 3

logger = logging.getLogger(__name__)


# Load available experiments dynamically
def get_available_experiments(path=REGISTRY):
    with open(path) as f:
        experiments = yaml.safe_load(f)["experiments"]
    return {e["name"]: e for e in experiments}


def resolve_runner(entry):
    module = importlib.import_module(entry["module"])
    return getattr(module, entry["runner"])


def build_parser(experiments):
    parser = argparse.ArgumentParser(description="Three-wave modulation experiments for finite-depth water waves")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, entry in experiments.items():
        p = sub.add_parser(name, help=entry.get("help", ""))
        p.add_argument(
            "--config",
            type=str,
            default=None,
            help=f"Path to the experiment YAML file (default: $MODULATION_CONFIG or {default_config_path()})",
        )
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="Override a config key, e.g. --set scale.M=[8,16,32] (repeatable)",
        )
        p.add_argument(
            "--output",
            type=str,
            default=None,
            help="Directory for CSV and summaries (default: $MODULATION_OUTPUT or output.directory)",
        )
        p.add_argument("--verbose", action="store_true", help="Debug logging")
    return parser


def main(argv=None):
    experiments = get_available_experiments()
    args = build_parser(experiments).parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )

    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as e:
        print(f"[ERROR] Invalid configuration: {e}")
        return EXIT_CONFIG

    out_dir = output_directory(cfg, args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"[INFO] Running experiment: {args.command}")
    print(f"[INFO] Config: {args.config or default_config_path()}")
    print(f"[INFO] Saving to: {out_dir}")

    runner = resolve_runner(experiments[args.command])
    try:
        summary = runner(cfg, out_dir)
    except ConfigError as e:
        print(f"[ERROR] Invalid configuration: {e}")
        return EXIT_CONFIG
    except (GateError, DepthViolationError) as e:
        print(f"[ERROR] Hypothesis check failed: {e}")
        return EXIT_GATE
    except NumericalAbortError as e:
        print(f"[ERROR] Numerical abort: {e}")
        return EXIT_ABORT

    for key in ("fits", "gates"):
        if key in summary:
            print(f"[INFO] {key}: {summary[key]}")
    print(f"[INFO] {args.command} finished")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
