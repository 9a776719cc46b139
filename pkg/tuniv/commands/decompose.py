# decompose
#> f = g - h with g and h universal for their own task lists.

import logging
from pathlib import Path
from typing import Annotated

import numpy as np
import typer

from tuniv.builder import UniversalSeries, decompose, termwise_gap
from tuniv.dependencies import certificate_table, console, finish, guarded
from tuniv.errors import BuildAborted, CertificationError, UsageError
from tuniv.files import BuildConfig, CertificateFile, SeriesFile, load_config, write_document
from tuniv.polynomials import Polynomial
from tuniv.verify import certify_series

log = logging.getLogger(__name__)

app = typer.Typer()

IDENTITY_POINTS = 1000
IDENTITY_RADIUS = 0.99
IDENTITY_TOL = 1e-12


def identity_points(seed: int = 0) -> np.ndarray:
    """Uniform random points of |z| <= 0.99."""
    rng = np.random.default_rng(seed)
    radius = IDENTITY_RADIUS * np.sqrt(rng.uniform(size=IDENTITY_POINTS))
    return radius * np.exp(2j * np.pi * rng.uniform(size=IDENTITY_POINTS))


def write_streams(
    g: UniversalSeries, h: UniversalSeries, config: BuildConfig, out: Path, report: Path
) -> CertificateFile:
    out.mkdir(parents=True, exist_ok=True)
    write_document(out / "g.json", SeriesFile.of(g, config.hash, stream="g"))
    write_document(out / "h.json", SeriesFile.of(h, config.hash, stream="h"))
    certificates = CertificateFile(
        config_hash=config.hash,
        certificates=[
            *certify_series(g, settings=config.settings),
            *certify_series(h, settings=config.settings),
        ],
    )
    write_document(report, certificates)
    return certificates


def run_decompose(config: BuildConfig, out: Path, report: Path) -> CertificateFile:
    if config.decompose is None:
        raise UsageError("the configuration has no decompose section")
    spec = config.decompose
    f = Polynomial(spec.f)
    family = config.family.resolve()
    try:
        g, h = decompose(f, spec.g_tasks, spec.h_tasks, family, config.settings)
    except BuildAborted as exc:
        if isinstance(exc.partial, tuple):
            write_streams(*exc.partial, config, out, report)
            log.warning("partial g and h written to %s", out)
        raise
    log.info("g has %d terms, h has %d", len(g.terms), len(h.terms))
    certificates = write_streams(g, h, config, out, report)
    console.print(certificate_table(f"decompose {config.hash[:12]}", certificates.certificates))

    gap = termwise_gap(f, g, h, identity_points())
    if not gap <= IDENTITY_TOL:
        raise CertificationError(f"g - h differs from f by {gap:.3e} on |z| <= {IDENTITY_RADIUS}")
    console.print(f"g - h = f to {gap:.1e} on {IDENTITY_POINTS} points")
    return certificates


@app.command("decompose")
@guarded
def decompose_command(
    config: Annotated[Path, typer.Option(help="Configuration with a decompose section")],
    out: Annotated[Path, typer.Option(help="Directory for g.json and h.json")] = Path("decomposition"),
    report: Annotated[Path | None, typer.Option(help="Certificate file")] = None,
):
    """Split f into a difference of two universal series."""
    settings = load_config(config)
    certificates = run_decompose(settings, out, report or out / "certificates.json")
    finish(certificates.passed)
