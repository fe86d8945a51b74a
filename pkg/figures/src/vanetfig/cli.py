"""Command-line entry point: render one figure from run directories."""

import click

from . import __version__
from .data import SchemaError
from .plots import KINDS, render


def _parse_inputs(pairs):
    inputs = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.BadParameter(
                f"expected mode=path, got {pair!r}", param_hint="--inputs")
        mode, path = pair.split("=", 1)
        if mode in inputs:
            raise click.BadParameter(
                f"duplicate mode {mode!r}", param_hint="--inputs")
        inputs[mode] = path
    return inputs


@click.group()
@click.version_option(__version__)
def main():
    """Render comparison figures from simulator run directories."""


@main.command("render")
@click.option("--kind", required=True, type=click.Choice(KINDS))
@click.option("--inputs", "input_pairs", multiple=True, required=True,
              help="mode=run_dir, repeatable; one line/bar group per mode.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output image file (format from extension).")
def render_cmd(kind, input_pairs, out_path):
    """Render one figure kind to an image file."""
    inputs = _parse_inputs(input_pairs)
    try:
        render(kind, inputs, out_path)
    except SchemaError as exc:
        raise click.ClickException(f"schema error: {exc}")
    except OSError as exc:
        raise click.ClickException(f"I/O error: {exc}")
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
