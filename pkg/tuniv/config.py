# Settings
#> Plain pydantic models with validated defaults. A YAML/JSON file fills
#> them, environment variables (optionally from a .env file) provide the
#> defaults a file does not set, and command-line flags win over both.

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Literal

from typing_extensions import Self

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, model_validator

from tuniv.errors import UsageError


class FitSettings(BaseModel):
    max_degree: int = Field(default=512, ge=1, description="Largest polynomial degree tried")
    schedule: list[int] | None = Field(
        default=None, description="Explicit degree list; doubling from 8 when unset"
    )
    fit_samples: int = Field(default=64, ge=8, description="Boundary samples per fit disk")
    control_samples: int = Field(default=128, ge=16, description="Boundary samples per control disk")
    fit_fraction: float = Field(
        default=0.5, gt=0, le=1, description="Share of a tolerance the fit must reach"
    )
    monomial_threshold: float = Field(
        default=1e-8, gt=0, description="Relative mismatch above which monomial form is unreliable"
    )

    @model_validator(mode="after")
    def check_grids(self) -> Self:
        if self.control_samples < 2 * self.fit_samples:
            raise ValueError("control_samples must be at least twice fit_samples")
        return self

    def degree_schedule(self, max_degree: int | None = None) -> list[int]:
        top = max_degree if max_degree is not None else self.max_degree
        if self.schedule:
            return sorted({d for d in self.schedule if 0 <= d <= top})
        degrees, d = [], 8
        while d < top:
            degrees.append(d)
            d *= 2
        degrees.append(top)
        return degrees


class SearchSettings(BaseModel):
    k_max: int = Field(default=4096, ge=1, description="Scale indices scanned")
    n_max: int = Field(default=4096, ge=1, description="Anchor indices scanned")
    subfamily_depth: int = Field(default=12, ge=0, le=24, description="Dyadic levels of the subfamily")
    continuity_depth: int = Field(default=20, ge=0, le=48, description="Dyadic depth for continuity witnesses")
    curve_samples: int = Field(default=256, ge=8, description="Parameter samples per curve")
    endpoint_tol: float = Field(default=1e-12, gt=0)
    endpoint_steps: int = Field(default=60, ge=4, le=1000)


class BuildSettings(BaseModel):
    frozen_policy: Literal["windows", "disk"] = "windows"
    initial_frozen_radius: float = Field(default=0.5, ge=0, lt=1)


class VerifySettings(BaseModel):
    control_samples: int = Field(default=1024, ge=64)
    control_phase: float = Field(
        default=0.5, ge=0, lt=1, description="Grid offset as a fraction of the sample step"
    )


class Settings(BaseModel):
    fit: FitSettings = FitSettings()
    search: SearchSettings = SearchSettings()
    build: BuildSettings = BuildSettings()
    verify: VerifySettings = VerifySettings()


def env_overrides() -> dict[str, Any]:
    """Settings fragments taken from TUNIV_* variables."""
    load_dotenv()
    data: dict[str, Any] = {}
    if value := os.environ.get("TUNIV_MAX_DEGREE"):
        data.setdefault("fit", {})["max_degree"] = int(value)
    if value := os.environ.get("TUNIV_CONTROL_SAMPLES"):
        data.setdefault("verify", {})["control_samples"] = int(value)
    return data


def merge(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_structured(path: Path) -> dict[str, Any]:
    """Read a YAML or JSON mapping."""
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise UsageError(f"{path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path} must contain a mapping at top level")
    return data


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def config_hash(model: BaseModel) -> str:
    payload = canonical_json(model.model_dump(mode="json"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
