# enum show
#> Decode one entry of a canonical enumeration and print it as JSON.

from typing import Annotated

import typer

from tuniv.config import canonical_json
from tuniv.enumeration import boundary_point, poly, rational_at, scale_fraction, tuple_at
from tuniv.dependencies import guarded
from tuniv.errors import UsageError
from tuniv.types import complex_pair

app = typer.Typer(help="Canonical enumerations.", no_args_is_help=True)

KINDS = ("scale", "boundary", "poly", "rational", "tuple")


def decode(kind: str, index: int) -> dict:
    if kind == "scale":
        value = scale_fraction(index)
        return {"kind": kind, "index": index, "value": str(value), "float": float(value)}
    if kind == "boundary":
        return {"kind": kind, "index": index, "value": complex_pair(boundary_point(index))}
    if kind == "poly":
        polynomial = poly(index)
        return {
            "kind": kind,
            "index": index,
            "coefficients": polynomial.model_dump(mode="json")["coefficients"],
            "text": str(polynomial),
        }
    if kind == "rational":
        return {"kind": kind, "index": index, "value": str(rational_at(index))}
    if kind == "tuple":
        return {"kind": kind, "index": index, "value": list(tuple_at(index))}
    raise UsageError(f"unknown enumeration {kind!r}; choose one of {', '.join(KINDS)}")


@app.command("show")
@guarded
def show(
    kind: Annotated[str, typer.Option(help="scale, boundary, poly, rational or tuple")],
    index: Annotated[int, typer.Option(help="1-based index")],
):
    """Print the index-th element of an enumeration."""
    typer.echo(canonical_json(decode(kind, index)), nl=False)
