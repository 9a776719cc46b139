# Application
#> Only wiring lives here: the shared options, then one sub-application per
#> command group, included the way routers are included in a bigger app.

from typing import Annotated

import typer

from tuniv import __version__
from tuniv.commands import build, decompose, demo, enum, family, verify
from tuniv.logs import setup_logging

app = typer.Typer(
    name="tuniv",
    help="Build and certify universal power series with prescribed approximation curves.",
    no_args_is_help=True,
    add_completion=False,
)

#> groups with their own sub-commands
app.add_typer(family.app, name="family")
app.add_typer(enum.app, name="enum")

#> single commands, registered directly
for module in (build, verify, decompose, demo):
    app.registered_commands.extend(module.app.registered_commands)


def show_version(value: bool) -> None:
    if value:
        typer.echo(f"tuniv {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    log_level: Annotated[
        str | None, typer.Option(help="DEBUG, INFO, WARNING or ERROR; TUNIV_LOG_LEVEL otherwise")
    ] = None,
    version: Annotated[
        bool, typer.Option("--version", callback=show_version, is_eager=True, help="Print the version")
    ] = False,
):
    setup_logging(log_level)


def run() -> None:
    app()
