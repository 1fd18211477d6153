"""
Command line entry point.

    python run.py run <config.toml> [--out DIR] [--seed N] [--workers N] [--nmax N]
    python run.py reproduce <id> [...]
    python run.py list-scenarios

Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 configuration error.
"""
import argparse
import logging
import sys
from typing import List, Optional

from . import scenarios
from .config import settings
from .errors import ConfigurationError

logger = logging.getLogger("speclab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="speclab", description="Spectral distribution laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_options(p):
        p.add_argument("--out", default=None, help=f"output directory (default: {settings.OUT_DIR})")
        p.add_argument("--seed", type=int, default=None, help="override every scenario seed")
        p.add_argument("--workers", type=int, default=None, help="concurrent cells")
        p.add_argument("--nmax", type=int, default=None, help="skip sizes above this")

    run_p = sub.add_parser("run", help="run a scenario config file")
    run_p.add_argument("config")
    add_run_options(run_p)

    repro_p = sub.add_parser("reproduce", help="run a bundled scenario")
    repro_p.add_argument("id")
    add_run_options(repro_p)

    sub.add_parser("list-scenarios", help="list bundled scenarios")
    return parser


def configure_logging():
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()

    try:
        if args.command == "list-scenarios":
            for bundle_id, description, anchor in scenarios.list_scenarios():
                print(f"{bundle_id:<24} {description}  [{anchor}]")
            return EXIT_OK

        options = dict(out_dir=args.out, seed=args.seed, workers=args.workers, nmax=args.nmax)
        if args.command == "run":
            outcome = scenarios.run(args.config, **options)
        else:
            outcome = scenarios.reproduce(args.id, **options)
    except ConfigurationError as exc:
        logger.error("--- Configuration error: %s ---", exc)
        return EXIT_CONFIG

    counts = outcome.summary["counts"]
    status = "PASS" if outcome.exit_code == EXIT_OK else "FAIL"
    print(f"{status} {outcome.bundle.id}: {counts['pass']} pass, {counts['fail']} fail, "
          f"{counts['error']} error, {counts['n/a']} n/a")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
