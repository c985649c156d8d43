"""Command-line front end.

Exit codes: 0 ok, 2 usage, 3 validation, 4 verdict failure (with --strict),
5 budget exceeded.
"""
import json
import sys

import click

from .errors import BudgetExceeded, ParseError, UsageError, ValidationError
from .io import parse_input
from .scenarios import CATALOG, Flags, run_scenario

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_VERDICT, EXIT_BUDGET = 0, 2, 3, 4, 5


@click.group()
def main():
    """Joint spectra of finite matrix sets."""


@main.command("list")
def list_cmd():
    """List the built-in scenarios."""
    for name in sorted(CATALOG):
        click.echo(name)


@main.command("run")
@click.argument("name", required=False)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON input document.")
@click.option("--level", type=int, default=None, help="Word length (default: per scenario).")
@click.option("--budget", type=int, default=10 ** 8, show_default=True,
              help="Maximum number of matrix multiplications per enumeration.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="out", show_default=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "svg", "both"]), default="both",
              show_default=True)
@click.option("--tol", type=float, default=None, help="Override the scenario tolerance.")
@click.option("--strict", is_flag=True, help="Exit with code 4 when a verdict fails.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--cache", "cache_dir", default=None, type=click.Path(file_okay=False))
@click.option("--verify-cache", is_flag=True,
              help="Recompute one cached level and compare bytes.")
def run_cmd(name, input_path, level, budget, seed, out, fmt, tol, strict, threads, cache_dir,
            verify_cache):
    """Run a scenario from the catalog or an input document."""
    flags = Flags(level, budget, seed, out, fmt, tol, strict, threads, cache_dir, verify_cache)
    try:
        doc = None
        if input_path:
            with open(input_path, encoding="utf-8") as fh:
                doc = parse_input(fh.read())
            name = name or doc.scenario or "input"
        if not name:
            raise UsageError("give a scenario name or --input")
        res = run_scenario(name, flags, doc)
    except UsageError as exc:
        click.echo(f"usage error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except ParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except ValidationError as exc:
        click.echo(f"validation error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except BudgetExceeded as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        sys.exit(EXIT_BUDGET)
    click.echo(json.dumps(res.to_dict(), indent=2, sort_keys=True, default=str))
    if strict and not res.verdict:
        sys.exit(EXIT_VERDICT)


if __name__ == "__main__":  # pragma: no cover
    main()
