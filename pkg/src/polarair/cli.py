"""Command line entry point: ``polarair run --config FILE --out DIR``."""

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigNotFoundError, ConfigParseError, load_config
from .errors import ConfigurationError
from .fl_sim import run_experiment
from .metrics import emit_records


def _parser():
    p = argparse.ArgumentParser(prog="polarair", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one federated training experiment")
    run.add_argument("--config", required=True, type=Path, help="flat TOML config file")
    run.add_argument("--out", required=True, type=Path, help="output directory for the CSVs")
    run.add_argument("--mode", choices=("polarair", "dense"))
    run.add_argument("--seed", type=int)
    run.add_argument("--noise-std", type=float, dest="noise_std")
    run.add_argument("--epochs", type=int)
    run.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, mode=args.mode, seed=args.seed,
                          noise_std=args.noise_std, epochs=args.epochs)
    except (ConfigNotFoundError, ConfigParseError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    result = run_experiment(cfg)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        emit_records(result.rounds, args.out / "rounds.csv", result.epochs, args.out / "epochs.csv")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    uses = result.uses_to_target(cfg.target_accuracy)
    final = result.epochs[-1].test_accuracy if result.epochs else float("nan")
    print(f"mode={cfg.mode} final_accuracy={final:.4f} "
          f"uses_to_{cfg.target_accuracy:g}={uses if uses is not None else 'not reached'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
