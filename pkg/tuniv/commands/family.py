# family certify
#> Sampled continuity certificate for a curve family.

from pathlib import Path
from typing import Annotated

import numpy as np
import typer

from tuniv.curves import CurveFamily, certify_continuous
from tuniv.dependencies import console, finish, guarded
from tuniv.files import ContinuityFile, FamilySpec, load_config, write_document

app = typer.Typer(help="Curve families.", no_args_is_help=True)


def alpha_grid(family: CurveFamily, samples: int) -> np.ndarray:
    """Equispaced parameters of J; open ends are never sampled."""
    J = family.param_interval
    if J.bounded:
        step = (J.hi - J.lo) / samples
        start = J.lo if J.lo_closed else J.lo + step / 2
        return start + step * np.arange(samples)
    return J.sigma((np.arange(samples) + 0.5) / samples)


@app.command("certify")
@guarded
def certify(
    kind: Annotated[str | None, typer.Option(help="Built-in family name")] = None,
    config: Annotated[Path | None, typer.Option(help="YAML/JSON file with a family section")] = None,
    delta: Annotated[float, typer.Option(min=0.0)] = 0.05,
    j: Annotated[int, typer.Option(min=1, help="Truncation radius for zero-to-infinity families")] = 1,
    samples: Annotated[int, typer.Option(min=1, help="Number of alpha samples")] = 64,
    report: Annotated[Path | None, typer.Option(help="Where to write the report")] = None,
):
    """Find a countable-subfamily witness for every sampled alpha."""
    settings = load_config(config)
    if kind is not None:
        settings = settings.model_copy(update={"family": FamilySpec(kind=kind)})
    spec = settings.family
    family = spec.resolve()
    result = certify_continuous(family, delta, j, alpha_grid(family, samples), settings.search)
    console.print(
        f"{family.kind}: {len(result.witnesses)}/{len(result.entries)} parameters certified "
        f"at delta={delta:g}, j={j}"
    )
    for entry in result.entries:
        if not entry.passed:
            console.print(f"  alpha={entry.alpha:.17g}: {entry.reason}")
    if report is not None:
        write_document(
            report,
            ContinuityFile(config_hash=settings.hash, passed=result.passed, report=result),
        )
    finish(result.passed)
