# vibromirror/cli/main.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
`simulate` command.

Configuration is layered: preset, then config file, then --set overrides, then
the METHOD argument and the --out / --format options.
"""

from __future__ import annotations

import logging
import sys
from typing import Dict, Optional, Tuple

import click

from vibromirror.cli.config import (
    ConfigEntry,
    ExperimentConfig,
    Method,
    OutputFormat,
    build_config,
    parse_config_file,
    parse_overrides,
)
from vibromirror.cli.presets import get_preset, presets
from vibromirror.cli.runner import EXIT_CONFIG, run
from vibromirror.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)8s] %(message)s (%(filename)s:%(lineno)s)"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def configure_logging(verbosity: int) -> None:
    """Root logger on stderr, laid out like the test log: WARNING by default, -v INFO, -vv DEBUG."""
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT, stream=sys.stderr)


def resolve_config(
    method: Optional[str],
    preset: Optional[str],
    config_file: Optional[str],
    overrides: Tuple[str, ...],
    out: Optional[str],
    fmt: Optional[str],
) -> ExperimentConfig:
    """
    Layer the configuration sources into one validated config.

    :raises ConfigurationError: For unknown presets, unreadable files or invalid values.
    """
    base = get_preset(preset) if preset else None
    entries: Dict[str, ConfigEntry] = {}
    if config_file:
        entries.update(parse_config_file(config_file))
    entries.update(parse_overrides(overrides))
    for key, value in (("out", out), ("format", fmt)):
        if value is not None:
            entries[key] = ConfigEntry(key=key, value=value, source=f"--{key}", line=1)
    if method is None and base is None and "method" not in entries:
        raise ConfigurationError("no method given; pass METHOD, --preset or set 'method' in the config file")
    return build_config(entries, base=base, method=method)


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("method", required=False, type=click.Choice([m.value for m in Method]))
@click.option("--preset", "-p", help="Start from a named preset.")
@click.option("--config", "-c", "config_file", type=click.Path(dir_okay=False), help="Flat key = value config file.")
@click.option("--set", "-s", "overrides", multiple=True, metavar="KEY=VALUE", help="Override one config key.")
@click.option("--out", "-o", help="Output file.")
@click.option("--format", "-f", "fmt", type=click.Choice([f.value for f in OutputFormat]), help="Output format.")
@click.option("--jobs", "-j", type=click.IntRange(min=1), help="Worker processes for sweeps.")
@click.option("--verbose", "-v", count=True, help="-v for progress, -vv for solver detail.")
@click.option("--list-presets", is_flag=True, help="List presets and exit.")
@click.option("--show-config", is_flag=True, help="Print the resolved config and exit.")
def simulate(
    method: Optional[str],
    preset: Optional[str],
    config_file: Optional[str],
    overrides: Tuple[str, ...],
    out: Optional[str],
    fmt: Optional[str],
    jobs: Optional[int],
    verbose: int,
    list_presets: bool,
    show_config: bool,
) -> None:
    """Simulate atoms reflecting off a modulated evanescent-wave mirror."""
    configure_logging(verbose)
    if list_presets:
        for item in presets():
            click.echo(f"{item.name:<18} {item.description}")
        return

    try:
        config = resolve_config(method, preset, config_file, overrides, out, fmt)
    except ConfigurationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    logger.debug(f"Resolved config: {config.to_flat()}")

    if show_config:
        for key, value in config.to_flat().items():
            click.echo(f"{key} = {value}")
        return

    report = run(config, jobs)
    if not report.ok:
        click.echo(f"error: {report.message}", err=True)
        sys.exit(report.exit_code)
    for path in report.files:
        click.echo(str(path))


def main() -> None:
    simulate()


if __name__ == "__main__":
    main()
