# Shared command helpers
#> Exceptions are turned into exit codes in one place: handlers are registered
#> per exception class, and every command is wrapped with @guarded.

import functools
import logging
from collections.abc import Callable, Sequence

import typer
import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from tuniv.errors import EXIT_FAILED, EXIT_INVALID, TunivError
from tuniv.verify import Certificate, NotFound

log = logging.getLogger(__name__)

#> tables and messages go to stderr; stdout stays machine-readable
console = Console(stderr=True)

Handler = Callable[[Exception], int]
_handlers: dict[type[Exception], Handler] = {}


def exception_handler(kind: type[Exception]):
    def register(handler: Handler) -> Handler:
        _handlers[kind] = handler
        return handler

    return register


@exception_handler(TunivError)
def tuniv_error_handler(exc: TunivError) -> int:
    console.print(f"[bold red]error[/bold red] ({type(exc).__name__}): {exc.detail}")
    return exc.exit_code


@exception_handler(ValidationError)
def validation_error_handler(exc: ValidationError) -> int:
    console.print(f"[bold red]invalid input[/bold red]: {exc.error_count()} problem(s)")
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        log.debug("%s: %s", location, error["type"])
        console.print(f"  {location}: {error['msg']}")
    return EXIT_INVALID


@exception_handler(yaml.YAMLError)
def yaml_error_handler(exc: yaml.YAMLError) -> int:
    console.print(f"[bold red]invalid configuration[/bold red]: {exc}")
    return EXIT_INVALID


@exception_handler(OSError)
def os_error_handler(exc: OSError) -> int:
    console.print(f"[bold red]file error[/bold red]: {exc}")
    return EXIT_INVALID


def handle(exc: Exception) -> int | None:
    for kind in type(exc).__mro__:
        if kind in _handlers:
            return _handlers[kind](exc)
    return None


def guarded(command: Callable) -> Callable:
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except typer.Exit:
            raise
        except Exception as exc:
            code = handle(exc)
            if code is None:
                raise
            raise typer.Exit(code) from exc

    return wrapper


def finish(passed: bool) -> None:
    if not passed:
        raise typer.Exit(EXIT_FAILED)


def certificate_table(title: str, results: Sequence[Certificate | NotFound]) -> Table:
    table = Table(title=title)
    for column in ("task", "k", "n", "|b-zeta|", "error", "1/s", "margin", "verdict"):
        table.add_column(column, justify="right" if column != "verdict" else "left")
    for result in results:
        if isinstance(result, NotFound):
            margin = "-" if result.best_margin is None else f"{result.best_margin:.3e}"
            table.add_row(str(result.task), "-", "-", "-", "-", "-", margin, "[red]not found[/red]")
            continue
        label = str(result.task) if result.stream is None else f"{result.stream}{result.task}"
        table.add_row(
            label,
            str(result.k),
            str(result.n),
            f"{result.anchor_distance:.3e}",
            "-" if result.error is None else f"{result.error:.3e}",
            f"{1.0 / result.s:.3e}",
            "-" if result.margin is None else f"{result.margin:.3e}",
            "[green]pass[/green]" if result.passed else f"[red]fail[/red] {result.reason or ''}",
        )
    return table
