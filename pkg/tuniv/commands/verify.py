# verify
#> Independent certification of a series file: either of one explicit index
#> tuple, or a k-major search for each task.

import logging
from pathlib import Path
from typing import Annotated

import typer

from tuniv import __version__
from tuniv.dependencies import certificate_table, console, finish, guarded
from tuniv.errors import UsageError
from tuniv.files import CertificateFile, SeriesFile, TaskFile, load_config, read_document, write_document
from tuniv.verify import MembershipIndices, NotFound, certify_indices, verify_target

log = logging.getLogger(__name__)

app = typer.Typer()


@app.command("verify")
@guarded
def verify(
    series: Annotated[Path, typer.Option(help="Series file written by build")],
    task: Annotated[Path | None, typer.Option(help="Task file; defaults to the tasks in the series")] = None,
    indices: Annotated[str | None, typer.Option(help="Check one tuple m,j,p,s,t,l,k,n")] = None,
    report: Annotated[Path, typer.Option(help="Certificate file")] = Path("verify.json"),
    config: Annotated[Path | None, typer.Option(help="Settings file (search limits, grids)")] = None,
    control_samples: Annotated[int | None, typer.Option(help="Samples per control circle")] = None,
    allow_version_mismatch: Annotated[
        bool, typer.Option(help="Accept series written by another tool version")
    ] = False,
):
    """Search for certificates of every task, or check one index tuple."""
    settings = load_config(config).settings
    document = read_document(series, SeriesFile)
    if document.tool_version != __version__:
        if not allow_version_mismatch:
            raise UsageError(
                f"{series} was written by tuniv {document.tool_version}, this is {__version__}; "
                "pass --allow-version-mismatch to verify it anyway"
            )
        log.warning("verifying a series from tuniv %s", document.tool_version)
    f = document.series()

    tasks, family = document.tasks, document.family
    if task is not None:
        task_file = read_document(task, TaskFile)
        tasks = task_file.tasks
        family = task_file.family.resolve() if task_file.family is not None else family
    if family is None:
        raise UsageError("no curve family: the series does not record one and the task file names none")

    results = CertificateFile(config_hash=document.config_hash)
    if indices is not None:
        idx = MembershipIndices.parse(indices)
        results.certificates.append(certify_indices(f, idx, family, control_samples, settings))
    else:
        for index, item in enumerate(tasks):
            outcome = verify_target(
                f, item, family, n_control=control_samples, settings=settings, task_index=index
            )
            if isinstance(outcome, NotFound):
                results.not_found.append(outcome)
            else:
                results.certificates.append(outcome)

    write_document(report, results)
    console.print(certificate_table(f"verify {series.name}", [*results.certificates, *results.not_found]))
    finish(results.passed)
