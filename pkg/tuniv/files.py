# Documents
#> Build configurations in, series and certificates out. Every output is a
#> pydantic model written as canonical JSON and carries the format version,
#> the tool version and the hash of the configuration that produced it.

import json
import logging
from pathlib import Path
from typing import Any, Literal, TypeVar

from typing_extensions import Self

from pydantic import BaseModel, Field, ValidationError, model_validator

from tuniv import __version__
from tuniv.approx import FittedPolynomial, FittedRecord
from tuniv.builder import Ledger, Task, Term, UniversalSeries, Witness
from tuniv.config import Settings, canonical_json, config_hash, env_overrides, merge, read_structured
from tuniv.curves import ContinuityReport, CurveFamily, FamilyKind, builtin_family, polyline_fan
from tuniv.errors import UsageError
from tuniv.polynomials import Polynomial
from tuniv.types import ComplexValue
from tuniv.verify import Certificate, NotFound

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

Document = TypeVar("Document", bound=BaseModel)


#!------------------ Configuration ------------------!#


class FamilySpec(BaseModel):
    """A built-in family by name, or a fan of rotated copies of one path."""

    kind: FamilyKind = FamilyKind.RADII
    knots: list[float] = []
    points: list[ComplexValue] = []

    @model_validator(mode="after")
    def check_fan(self) -> Self:
        if self.kind is FamilyKind.POLYLINE_FAN and len(self.knots) < 2:
            raise ValueError("a polyline fan needs knots and points")
        return self

    def resolve(self) -> CurveFamily:
        if self.kind is FamilyKind.POLYLINE_FAN:
            return polyline_fan(self.knots, self.points)
        return builtin_family(self.kind)


class DecomposeSpec(BaseModel):
    f: list[ComplexValue] = Field(default=[], description="coefficients of f, constant term first")
    g_tasks: list[Task] = []
    h_tasks: list[Task] = []


class OutputPaths(BaseModel):
    out: Path | None = None
    report: Path | None = None


class BuildConfig(Settings):
    family: FamilySpec = FamilySpec()
    tasks: list[Task] = []
    decompose: DecomposeSpec | None = None
    deterministic: bool = True
    seed: int | None = Field(default=None, exclude=True, description="reserved; unused while deterministic")
    outputs: OutputPaths = Field(default=OutputPaths(), exclude=True)

    @property
    def settings(self) -> Settings:
        return Settings(fit=self.fit, search=self.search, build=self.build, verify=self.verify)

    @property
    def hash(self) -> str:
        return config_hash(self)


def load_config(path: Path | None = None, overrides: dict[str, Any] | None = None) -> BuildConfig:
    """Environment defaults, then the file, then command-line overrides."""
    data = env_overrides()
    if path is not None:
        data = merge(data, read_structured(path))
    if overrides:
        data = merge(data, overrides)
    config = BuildConfig.model_validate(data)
    log.debug("configuration %s", config.hash[:12])
    return config


class TaskFile(BaseModel):
    tasks: list[Task]
    family: FamilySpec | None = None


#!------------------ Series ------------------!#


class TermRecord(BaseModel):
    kind: Literal["fitted", "monomial"]
    authority: Literal["recurrence", "monomial"] = Field(
        description="representation used for evaluation"
    )
    fitted: FittedRecord | None = None
    coefficients: list[ComplexValue] | None = None

    @model_validator(mode="after")
    def check_payload(self) -> Self:
        if (self.kind == "fitted") != (self.fitted is not None):
            raise ValueError("fitted terms carry a fitted record and nothing else")
        if (self.kind == "monomial") != (self.coefficients is not None):
            raise ValueError("monomial terms carry coefficients")
        return self

    @classmethod
    def of(cls, term: Term) -> "TermRecord":
        if isinstance(term, FittedPolynomial):
            return cls(kind="fitted", authority="recurrence", fitted=term.to_record())
        return cls(kind="monomial", authority="monomial", coefficients=term.to_record().coefficients)

    def term(self) -> Term:
        if self.kind == "fitted":
            return FittedPolynomial.from_record(self.fitted)
        return Polynomial(self.coefficients)


class SeriesFile(BaseModel):
    format_version: int = FORMAT_VERSION
    tool_version: str = __version__
    config_hash: str
    stream: Literal["g", "h"] | None = None
    family: CurveFamily | None = None
    tasks: list[Task] = []
    terms: list[TermRecord] = []
    witnesses: list[Witness] = []
    ledger: Ledger = Ledger()

    @classmethod
    def of(cls, series: UniversalSeries, config_hash: str, stream: str | None = None) -> "SeriesFile":
        return cls(
            config_hash=config_hash,
            stream=stream,
            family=series.family,
            tasks=series.tasks,
            terms=[TermRecord.of(term) for term in series.terms],
            witnesses=series.witnesses,
            ledger=series.ledger,
        )

    def series(self) -> UniversalSeries:
        return UniversalSeries(
            terms=[record.term() for record in self.terms],
            witnesses=self.witnesses,
            ledger=self.ledger,
            family=self.family,
            tasks=self.tasks,
        )


class CertificateFile(BaseModel):
    format_version: int = FORMAT_VERSION
    tool_version: str = __version__
    config_hash: str
    certificates: list[Certificate] = []
    not_found: list[NotFound] = []

    @property
    def passed(self) -> bool:
        return not self.not_found and all(c.passed for c in self.certificates)


class ContinuityFile(BaseModel):
    format_version: int = FORMAT_VERSION
    tool_version: str = __version__
    config_hash: str
    passed: bool
    report: ContinuityReport


#!------------------ Reading and writing ------------------!#


def dump_document(document: BaseModel) -> str:
    return canonical_json(document.model_dump(mode="json"))


def write_document(path: Path, document: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_document(document), encoding="utf-8")
    log.info("wrote %s", path)
    return path


def read_document(path: Path, kind: type[Document]) -> Document:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not a JSON document: {exc}") from exc
    try:
        document = kind.model_validate(data)
    except ValidationError as exc:
        raise UsageError(f"{path} is not a valid {kind.__name__}: {exc}") from exc
    if getattr(document, "format_version", FORMAT_VERSION) != FORMAT_VERSION:
        raise UsageError(f"{path} has format version {document.format_version}, expected {FORMAT_VERSION}")
    return document
