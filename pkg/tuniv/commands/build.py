# build
#> Construct a universal series for the configured tasks, then re-verify
#> every recorded witness on fresh control grids.

import logging
from pathlib import Path
from typing import Annotated, Any

import typer

from tuniv.builder import UniversalSeries, build_universal
from tuniv.dependencies import certificate_table, console, finish, guarded
from tuniv.errors import BuildAborted
from tuniv.files import BuildConfig, CertificateFile, SeriesFile, load_config, write_document
from tuniv.verify import certify_series

log = logging.getLogger(__name__)

app = typer.Typer()


def cli_overrides(
    max_degree: int | None = None, control_samples: int | None = None, seed: int | None = None
) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    if max_degree is not None:
        overrides["fit"] = {"max_degree": max_degree}
    if control_samples is not None:
        overrides["verify"] = {"control_samples": control_samples}
    if seed is not None:
        overrides["seed"] = seed
    return overrides


def certify_and_write(
    series: UniversalSeries, config: BuildConfig, out: Path, report: Path
) -> CertificateFile:
    certificates = CertificateFile(
        config_hash=config.hash, certificates=certify_series(series, settings=config.settings)
    )
    log.info("term degrees %s", series.degrees)
    write_document(out, SeriesFile.of(series, config.hash))
    write_document(report, certificates)
    return certificates


def run_build(config: BuildConfig, out: Path, report: Path) -> CertificateFile:
    """Build and self-verify. On an aborted build the partial series and its
    certificates are written before the error propagates."""
    family = config.family.resolve()
    try:
        series = build_universal(config.tasks, family, config.settings)
    except BuildAborted as exc:
        if isinstance(exc.partial, UniversalSeries):
            certify_and_write(exc.partial, config, out, report)
            log.warning("partial series with %d terms written to %s", len(exc.partial.terms), out)
        raise
    certificates = certify_and_write(series, config, out, report)
    console.print(certificate_table(f"build {config.hash[:12]}", certificates.certificates))
    return certificates


@app.command("build")
@guarded
def build(
    config: Annotated[Path, typer.Option(help="YAML/JSON build configuration")],
    out: Annotated[Path | None, typer.Option(help="Series file")] = None,
    report: Annotated[Path | None, typer.Option(help="Certificate file")] = None,
    max_degree: Annotated[int | None, typer.Option(help="Largest correction degree")] = None,
    control_samples: Annotated[int | None, typer.Option(help="Verification samples per circle")] = None,
    seed: Annotated[
        int | None, typer.Option(help="Accepted but ignored: runs are deterministic and the seed is not recorded")
    ] = None,
):
    """Build a universal series and certify its witnesses."""
    settings = load_config(config, cli_overrides(max_degree, control_samples, seed))
    out = out or settings.outputs.out or Path("series.json")
    report = report or settings.outputs.report or Path("certificates.json")
    certificates = run_build(settings, out, report)
    finish(certificates.passed)
