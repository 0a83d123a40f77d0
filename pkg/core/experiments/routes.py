from typing import get_args

import click

from core.errors import CskError
from core.experiments.schema import ReproduceTarget
from core.experiments.services import build_run_config
from dependencies import get_experiment_service


def run_options(command):
    """Flags shared by every command; each one overrides the config file key it names."""
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="key = value configuration file"),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Master seed"),
        click.option("--restarts", type=click.IntRange(min=1), default=None, help="SCA random restarts"),
        click.option("--epsilon", "crosstalk_eps", type=float, default=None, help="Cross-talk epsilon"),
        click.option("--papr", "papr_alpha", type=float, default=None, help="Per-LED PAPR cap"),
        click.option("--osnr", "osnr_db_grid", type=str, default=None, help='OSNR grid in dB, e.g. "0,5,10"'),
        click.option("--bits", "n_bits", type=click.IntRange(min=1), default=None, help="Bits per OSNR point"),
        click.option("--equalizer", type=click.Choice(["none", "svd-pre", "zf", "lmmse"]), default=None),
        click.option("--profile", type=click.Choice(["balanced", "unbalanced", "extreme"]), default=None,
                     help="Named color profile"),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _run(config_path, overrides: dict, action) -> None:
    try:
        config = build_run_config(config_path, overrides)
        service = get_experiment_service(config)
        for path in action(service, config):
            click.echo(str(path))
    except CskError as e:
        raise click.ClickException(e.detail)


@click.command()
@run_options
def design(config_path, **overrides):
    """Design a max-min MED constellation."""
    _run(config_path, overrides, lambda service, config: service.cmd_design(config))


@click.command()
@click.option("--constellation", "constellation_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="constellation.json from the design command")
@run_options
def label(constellation_path, config_path, **overrides):
    """Optimize the bit-to-symbol labeling of a saved constellation with BSA."""
    _run(config_path, overrides, lambda service, config: service.cmd_label(config, constellation_path))


@click.command()
@click.option("--constellation", "constellation_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="constellation.json from the design command")
@click.option("--labeling", "labeling_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="labeling.json from the label command")
@run_options
def simulate(constellation_path, labeling_path, config_path, **overrides):
    """Simulate the BER of a labeled constellation over the OSNR grid."""
    _run(config_path, overrides,
         lambda service, config: service.cmd_simulate(config, constellation_path, labeling_path))


@click.command()
@click.argument("target", type=click.Choice(get_args(ReproduceTarget)))
@run_options
def reproduce(target, config_path, **overrides):
    """Re-run a published table or figure and diff it against the reference values."""
    _run(config_path, overrides, lambda service, config: service.cmd_reproduce(config, target))
