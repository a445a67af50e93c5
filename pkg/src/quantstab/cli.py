"""Command line interface: `quantstab run <config>` and
`quantstab describe <config>`."""

import argparse
import sys

from .config import describe, load_config
from .errors import ConfigError, QuantstabError
from .experiments import run_experiment


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quantstab",
        description="Adaptive-quantization stability experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("config")
    run_p.add_argument("--out-dir", default=None, help="override output directory")
    run_p.add_argument("--threads", type=int, default=1)
    run_p.add_argument("--seed", type=int, default=None, help="override master seed")

    desc_p = sub.add_parser("describe", help="print the resolved plan without running")
    desc_p.add_argument("config")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "describe":
            print(describe(config))
            return 0
        if args.seed is not None:
            config.seed = args.seed
        report, code = run_experiment(config, out_dir=args.out_dir,
                                      threads=args.threads)
        for name, verdict in sorted(report.verdicts.items()):
            print(f"verdicts.{name} = {verdict.status} "
                  f"(statistic {verdict.statistic:.6g}, tolerance {verdict.tolerance:.6g})")
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, QuantstabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
