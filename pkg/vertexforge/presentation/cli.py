"""
Presentation Layer - CLI
Командная строка: vertexforge run <scenario.json> [--out report.jsonl] [--max-cells N]

Роут делает ТОЛЬКО:
- Чтение аргументов
- Делегирование в ScenarioService
- Вывод отчёта и код возврата
"""

import logging
import sys
from typing import List, Optional, Tuple

import click

from vertexforge.application.dto import COMMANDS
from vertexforge.application.factories import get_scenario_service
from vertexforge.config import configure_logging, get_settings
from vertexforge.domain.exceptions import ScenarioError
from vertexforge.infrastructure.loader import load_scenario
from vertexforge.infrastructure.reports import format_report, write_report

logger = logging.getLogger("vertexforge.cli")

EXIT_PASS = 0
EXIT_SCHEMA = 2


def _schema_error(path: str, exc: ScenarioError) -> None:
    pointer = exc.pointer or "/"
    click.echo(f"{path}: {pointer}: {exc}", err=True)


@click.group()
@click.version_option(package_name="vertexforge")
def main():
    """Exact formal-series engine for vertex algebra identities"""


@main.command()
@click.argument("scenarios", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Write the JSONL report here instead of stdout")
@click.option("--max-cells", type=click.IntRange(min=1), default=None,
              help="Resource guard; overrides VERTEXFORGE_MAX_CELLS")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging on stderr")
def run(scenarios: Tuple[str, ...], out: Optional[str], max_cells: Optional[int], verbose: bool):
    """
    Run scenario files and print one JSON line per check

    Exit code: 0 all checks pass, 1 a check failed, 2 schema or parse error
    """
    settings = get_settings()
    configure_logging("DEBUG" if verbose else settings.log_level)
    service = get_scenario_service(settings, max_cells)

    lines: List[dict] = []
    exit_code = EXIT_PASS
    for path in scenarios:
        try:
            result = service.run(load_scenario(path))
        except ScenarioError as exc:
            _schema_error(path, exc)
            exit_code = max(exit_code, EXIT_SCHEMA)
            continue
        lines.extend(result.lines)
        exit_code = max(exit_code, result.exit_code)

    if out:
        write_report(lines, out)
    else:
        click.echo(format_report(lines), nl=False)
    logger.info("%d scenario(s), %d lines, exit %d", len(scenarios), len(lines), exit_code)
    sys.exit(exit_code)


@main.command()
def commands():
    """List scenario commands"""
    for name in COMMANDS:
        click.echo(name)


if __name__ == "__main__":
    main()
