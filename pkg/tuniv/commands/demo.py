# demo
#> Three tasks on the radii family, then verification and a decomposition.

from pathlib import Path
from typing import Annotated, Any

import typer
import yaml

from tuniv.commands.build import run_build
from tuniv.commands.decompose import run_decompose
from tuniv.dependencies import console, finish, guarded
from tuniv.files import load_config

app = typer.Typer()


def demo_config() -> dict[str, Any]:
    """Targets 1, -1 and i (p_2, p_7, p_4) at accuracy 1/2, 1/4, 1/8 near
    zeta_1, zeta_2, zeta_3, plus f = 1 split over one task per stream."""
    return {
        "family": {"kind": "radii"},
        "tasks": [
            {"j": 2, "p": 1, "l": 1, "s": 2, "t": 8, "label": "one"},
            {"j": 7, "p": 2, "l": 16, "s": 4, "t": 8, "label": "minus one"},
            {"j": 4, "p": 3, "l": 16, "s": 8, "t": 8, "label": "i"},
        ],
        "decompose": {
            "f": [[1.0, 0.0]],
            "g_tasks": [{"j": 2, "p": 1, "l": 1, "s": 2, "t": 8}],
            "h_tasks": [{"j": 7, "p": 2, "l": 16, "s": 2, "t": 8}],
        },
        "search": {"k_max": 256, "n_max": 1024},
        "verify": {"control_samples": 1024},
    }


@app.command("demo")
@guarded
def demo(
    out: Annotated[Path, typer.Option(help="Directory for every demo artifact")] = Path("demo"),
):
    """Write the demo configuration, build, certify and decompose."""
    out.mkdir(parents=True, exist_ok=True)
    path = out / "config.yaml"
    path.write_text(yaml.safe_dump(demo_config(), sort_keys=True), encoding="utf-8")
    console.print(f"configuration written to {path}")

    config = load_config(path)
    built = run_build(config, out / "series.json", out / "certificates.json")
    split = run_decompose(config, out / "decomposition", out / "decomposition" / "certificates.json")
    finish(built.passed and split.passed)
