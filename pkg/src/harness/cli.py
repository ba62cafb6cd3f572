"""
Command line interface

    memdrift run <config>... [--jobs N]
    memdrift check <config>
    memdrift converge <config> --levels N
    memdrift exponents --alpha 5/3,1.25

Exit codes: 0 success, 2 configuration or parameter error, 3 numerical
failure or a failing invariant monitor.
"""

import argparse
import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from src.model.errors import ConfigurationError, DataError, NumericalError, ParameterError

from .config import build_problem, load_config, resolve_output_dir
from .convergence import convergence_study
from .runner import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, run_many
from .tables import exponent_table

logger = logging.getLogger(__name__)


def configure_logging() -> None:
    level = os.getenv("MEMDRIFT_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)-7s %(name)s: %(message)s",
    )


def parse_alphas(text: str) -> List[Fraction]:
    """Comma-separated exponents; rationals such as 5/3 and decimals are both exact."""
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(Fraction(item))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"Cannot parse exponent '{item}'", name="alpha", value=item) from exc
    if not values:
        raise ParameterError("No exponents given", name="alpha")
    return values


def _cmd_run(args) -> int:
    configs = [load_config(path) for path in args.configs]
    results = run_many(configs, jobs=args.jobs)
    worst = EXIT_OK
    for result in results:
        if result.exit_code == EXIT_OK:
            print(f"✓ {result.name}: completed, results in {result.output_dir}")
        else:
            print(f"❌ {result.name}: exit {result.exit_code} {result.message}".rstrip())
        if result.hysteresis is not None:
            print(f"  Hysteresis area: {result.hysteresis:.6e}")
        worst = max(worst, result.exit_code)
    return worst


def _cmd_check(args) -> int:
    config = load_config(args.config)
    if config.kind != "convergence":
        problem = build_problem(config)
        print(f"✓ Config valid: {config.name} ({config.kind})")
        print(f"  Mesh: {problem.mesh.dim}D, {problem.mesh.num_cells} cells")
        print(f"  Contacts: {', '.join(problem.bc.contacts) or '(none, gauge mode)'}")
    else:
        print(f"✓ Config valid: {config.name} (convergence, case {config.convergence.case})")
    return EXIT_OK


def _cmd_converge(args) -> int:
    config = load_config(args.config)
    table = convergence_study(config, args.levels)
    print(table.to_text())
    directory = resolve_output_dir(config)
    directory.mkdir(parents=True, exist_ok=True)
    table.write_csv(directory / "convergence.csv")
    print(f"\n✓ Table written to {directory / 'convergence.csv'}")
    return EXIT_OK


def _cmd_exponents(args) -> int:
    print(exponent_table(parse_alphas(args.alpha)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memdrift", description="Degenerate drift-diffusion memristor simulator")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one or more scenarios")
    run.add_argument("configs", nargs="+", type=Path)
    run.add_argument("--jobs", type=int, default=1, help="Parallel scenario processes")
    run.set_defaults(handler=_cmd_run)

    check = commands.add_parser("check", help="Validate a scenario without running it")
    check.add_argument("config", type=Path)
    check.set_defaults(handler=_cmd_check)

    converge = commands.add_parser("converge", help="Run a convergence study")
    converge.add_argument("config", type=Path)
    converge.add_argument("--levels", type=int, default=None)
    converge.set_defaults(handler=_cmd_converge)

    exponents = commands.add_parser("exponents", help="Print the exponent table")
    exponents.add_argument("--alpha", required=True, help="Comma-separated exponents, e.g. 5/3,1.25")
    exponents.set_defaults(handler=_cmd_exponents)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        return args.handler(args)
    except (ConfigurationError, DataError, ParameterError) as exc:
        print(f"❌ {exc}")
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"❌ Numerical failure: {exc}")
        return EXIT_NUMERICAL
