# Simultaneous polynomial approximation on disjoint disks
#> One polynomial is fitted to prescribed targets on finitely many pairwise
#> disjoint closed disks. Complements of such unions are connected, so a
#> polynomial approximant exists; the work here is finding it stably.
#>
#> Least squares runs in a basis orthonormalised against the weighted sample
#> inner product (Vandermonde with Arnoldi). The basis satisfies
#>     q_{k+1}(z) = (z q_k(z) - sum_{j<=k} H[j,k] q_j(z)) / H[k+1,k]
#> so a fit is stored as the Hessenberg matrix H, the constant q_0 and the
#> expansion coefficients, and evaluated through the same recurrence anywhere.
#> Errors are measured on boundary control grids that interleave with the fit
#> grids; by the maximum modulus principle the boundary sup bounds the disk.

import logging
import math
from collections.abc import Callable, Sequence
from typing import Any

from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from tuniv.config import FitSettings
from tuniv.errors import PreconditionError, UsageError
from tuniv.types import ComplexValue, PositiveFloat

log = logging.getLogger(__name__)

#> points per block when evaluating through the recurrence
EVAL_BLOCK = 4096


#!------------------ Regions and pieces ------------------!#


class Disk(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: ComplexValue = 0j
    radius: PositiveFloat

    def separation(self, other: "Disk") -> float:
        """Gap between the two closed disks; <= 0 when they meet."""
        return abs(self.center - other.center) - self.radius - other.radius

    def distance_to(self, z: complex) -> float:
        return abs(z - self.center) - self.radius

    def enlarged(self, margin: float) -> "Disk":
        return Disk(center=self.center, radius=self.radius + margin)


class PieceTarget(BaseModel):
    """A region, the function wanted there and the accuracy it must reach."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    region: Disk
    target: Callable[[np.ndarray], Any]
    tolerance: PositiveFloat
    fit_samples: int = Field(default=64, ge=8)
    control_samples: int = Field(default=128, ge=16)
    label: str = ""

    @model_validator(mode="after")
    def check_grids(self) -> Self:
        if self.control_samples < 2 * self.fit_samples:
            raise ValueError("control_samples must be at least twice fit_samples")
        return self

    def values(self, z: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.target(z), dtype=complex), z.shape)


def zero_target(z: np.ndarray) -> np.ndarray:
    return np.zeros_like(z)


def sample_disk_boundary(disk: Disk, n: int, phase: float = 0.0) -> np.ndarray:
    """n equispaced points center + radius * e^{i(2 pi k / n + phase)}."""
    if n < 1:
        raise UsageError("at least one boundary sample is needed")
    angles = 2.0 * math.pi * np.arange(n) / n + phase
    return disk.center + disk.radius * np.exp(1j * angles)


def check_disjoint(regions: Sequence[Disk]) -> None:
    for i, first in enumerate(regions):
        for second in regions[i + 1 :]:
            if first.separation(second) <= 0:
                raise PreconditionError(
                    f"fit regions {first} and {second} are not separated"
                )


#!------------------ Fitted polynomials ------------------!#


class FittedRecord(BaseModel):
    """Serialized fit: H columns, q_0, coefficients and the monomial form."""

    degree: int = Field(ge=0)
    q0: float
    hessenberg: list[list[ComplexValue]] = Field(description="column k holds H[0:k+2, k]")
    coefficients: list[ComplexValue]
    monomial: list[ComplexValue] | None = None
    reliable: bool = False


class FittedPolynomial:
    """A polynomial held in its recurrence (Arnoldi) representation."""

    __slots__ = ("hessenberg", "q0", "coefficients", "monomial", "reliable")

    def __init__(self, hessenberg, q0: float, coefficients, monomial=None, reliable: bool = False):
        self.hessenberg = np.asarray(hessenberg, dtype=complex)
        self.q0 = float(q0)
        self.coefficients = np.asarray(coefficients, dtype=complex)
        self.monomial = None if monomial is None else np.asarray(monomial, dtype=complex)
        self.reliable = bool(reliable) and self.monomial is not None
        degree = self.coefficients.size - 1
        if self.hessenberg.shape != (degree + 1, degree):
            raise ValueError(f"Hessenberg shape {self.hessenberg.shape} does not match degree {degree}")

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def basis(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex).ravel()
        H = self.hessenberg
        Q = np.empty((z.size, self.degree + 1), dtype=complex)
        Q[:, 0] = self.q0
        for k in range(self.degree):
            Q[:, k + 1] = (z * Q[:, k] - Q[:, : k + 1] @ H[: k + 1, k]) / H[k + 1, k]
        return Q

    def _blockwise(self, z, kernel):
        shape = np.shape(z)
        z = np.asarray(z, dtype=complex).ravel()
        values = np.empty(z.size, dtype=complex)
        for start in range(0, z.size, EVAL_BLOCK):
            block = slice(start, start + EVAL_BLOCK)
            values[block] = kernel(z[block])
        values = values.reshape(shape)
        return complex(values) if values.ndim == 0 else values

    def __call__(self, z):
        return self._blockwise(z, lambda block: self.basis(block) @ self.coefficients)

    def _derivative_block(self, z: np.ndarray) -> np.ndarray:
        H = self.hessenberg
        Q = self.basis(z)
        dQ = np.zeros_like(Q)
        for k in range(self.degree):
            dQ[:, k + 1] = (Q[:, k] + z * dQ[:, k] - dQ[:, : k + 1] @ H[: k + 1, k]) / H[k + 1, k]
        return dQ @ self.coefficients

    def derivative(self, z):
        """f'(z) by differentiating the recurrence."""
        return self._blockwise(z, self._derivative_block)

    def negated(self) -> "FittedPolynomial":
        monomial = None if self.monomial is None else -self.monomial
        return FittedPolynomial(self.hessenberg, self.q0, -self.coefficients, monomial, self.reliable)

    def monomial_form(self) -> np.ndarray:
        """Coefficients in the monomial basis; may overflow for high degree."""
        H = self.hessenberg
        size = self.degree + 1
        with np.errstate(all="ignore"):
            basis = np.zeros((size, size), dtype=complex)
            basis[0, 0] = self.q0
            for k in range(self.degree):
                shifted = np.zeros(size, dtype=complex)
                shifted[1:] = basis[k, :-1]
                basis[k + 1] = (shifted - H[: k + 1, k] @ basis[: k + 1]) / H[k + 1, k]
            return self.coefficients @ basis

    def attach_monomial(self, points: np.ndarray, threshold: float) -> None:
        """Store the monomial form and flag whether it reproduces the fit."""
        monomial = self.monomial_form()
        if not np.all(np.isfinite(monomial)):
            self.monomial, self.reliable = None, False
            return
        stable = self(points)
        with np.errstate(all="ignore"):
            raw = np.polynomial.polynomial.polyval(points, monomial)
            scale = max(float(np.max(np.abs(stable), initial=0.0)), 1.0)
            mismatch = float(np.max(np.abs(raw - stable), initial=0.0)) / scale
        self.monomial = monomial
        self.reliable = bool(np.isfinite(mismatch) and mismatch <= threshold)

    def to_record(self) -> FittedRecord:
        H = self.hessenberg
        return FittedRecord(
            degree=self.degree,
            q0=self.q0,
            hessenberg=[[complex(h) for h in H[: k + 2, k]] for k in range(self.degree)],
            coefficients=[complex(c) for c in self.coefficients],
            monomial=None if self.monomial is None else [complex(c) for c in self.monomial],
            reliable=self.reliable,
        )

    @classmethod
    def from_record(cls, record: FittedRecord) -> "FittedPolynomial":
        H = np.zeros((record.degree + 1, record.degree), dtype=complex)
        for k, column in enumerate(record.hessenberg):
            H[: len(column), k] = column
        return cls(H, record.q0, record.coefficients, record.monomial, record.reliable)


#!------------------ Reports ------------------!#


class DegreeStep(BaseModel):
    degree: int
    residual: float = Field(description="weighted least-squares residual norm")
    max_ratio: float = Field(description="largest control error / tolerance over the pieces")


class FitReport(BaseModel):
    degree: int
    success: bool
    piece_errors: list[float] = Field(description="control-grid sup error per piece")
    fit_errors: list[float] = Field(description="fit-grid sup error per piece")
    grid_gap: list[float] = Field(
        description="largest change of the error between a fit sample and its control neighbour"
    )
    tolerances: list[float]
    history: list[DegreeStep]
    fit_samples: list[int]
    control_samples: list[int]


#!------------------ Fitting ------------------!#


class _WeightedArnoldi:
    """Columns V[:, k] = w * q_k(z), orthonormal, grown one degree at a time."""

    def __init__(self, z: np.ndarray, w: np.ndarray, capacity: int):
        self.z = z
        self.V = np.zeros((z.size, capacity + 1), dtype=complex)
        self.H = np.zeros((capacity + 1, capacity), dtype=complex)
        self.q0 = 1.0 / float(np.linalg.norm(w))
        self.V[:, 0] = w * self.q0
        self.degree = 0

    def extend(self, degree: int) -> int:
        while self.degree < degree:
            k = self.degree
            basis = self.V[:, : k + 1]
            v = self.z * self.V[:, k]
            # classical Gram-Schmidt, applied twice
            for _ in range(2):
                h = basis.conj().T @ v
                v = v - basis @ h
                self.H[: k + 1, k] += h
            beta = float(np.linalg.norm(v))
            if not beta > 0:
                log.warning("Arnoldi breakdown at degree %d", k + 1)
                break
            self.H[k + 1, k] = beta
            self.V[:, k + 1] = v / beta
            self.degree += 1
        return self.degree


def _grid_sizes(piece: PieceTarget, top: int) -> tuple[int, int]:
    n_fit = max(piece.fit_samples, 2 * (top + 1))
    n_control = n_fit * max(2, math.ceil(piece.control_samples / n_fit))
    return n_fit, n_control


def fit_simultaneous(
    pieces: Sequence[PieceTarget],
    max_degree: int | None = None,
    schedule: Sequence[int] | None = None,
    settings: FitSettings | None = None,
) -> tuple[FittedPolynomial, FitReport]:
    """Fit one polynomial to every piece, escalating along the degree schedule.

    Accepts the first degree at which every piece's control error is below
    fit_fraction * tolerance. Otherwise returns the best iterate with
    success=False in the report.
    """
    settings = settings or FitSettings()
    if not pieces:
        raise UsageError("nothing to fit: no pieces given")
    check_disjoint([piece.region for piece in pieces])
    if schedule:
        top = max_degree if max_degree is not None else max(schedule)
        degrees = sorted({d for d in schedule if 0 <= d <= top})
    else:
        degrees = settings.degree_schedule(max_degree)
    if not degrees:
        raise UsageError("the degree schedule is empty")
    top = degrees[-1]

    fit_points, fit_weights, fit_values, control_points, control_values = [], [], [], [], []
    fit_sizes, control_sizes = [], []
    for piece in pieces:
        n_fit, n_control = _grid_sizes(piece, top)
        z_fit = sample_disk_boundary(piece.region, n_fit)
        z_control = sample_disk_boundary(piece.region, n_control, math.pi / n_control)
        fit_points.append(z_fit)
        fit_weights.append(np.full(n_fit, 1.0 / (piece.tolerance * math.sqrt(n_fit))))
        fit_values.append(piece.values(z_fit))
        control_points.append(z_control)
        control_values.append(piece.values(z_control))
        fit_sizes.append(n_fit)
        control_sizes.append(n_control)

    z = np.concatenate(fit_points)
    w = np.concatenate(fit_weights)
    rhs = w * np.concatenate(fit_values)
    z_control = np.concatenate(control_points)
    fit_cuts = np.cumsum(fit_sizes)[:-1]
    control_cuts = np.cumsum(control_sizes)[:-1]
    tolerances = np.array([piece.tolerance for piece in pieces])

    arnoldi = _WeightedArnoldi(z, w, top)
    control_basis = np.zeros((z_control.size, top + 1), dtype=complex)
    control_basis[:, 0] = arnoldi.q0
    built = 0

    history: list[DegreeStep] = []
    best = None
    for requested in degrees:
        degree = arnoldi.extend(requested)
        H = arnoldi.H
        for k in range(built, degree):
            control_basis[:, k + 1] = (
                z_control * control_basis[:, k] - control_basis[:, : k + 1] @ H[: k + 1, k]
            ) / H[k + 1, k]
        built = degree

        V = arnoldi.V[:, : degree + 1]
        coefficients = V.conj().T @ rhs
        residual = float(np.linalg.norm(rhs - V @ coefficients))
        control_error = control_basis[:, : degree + 1] @ coefficients - np.concatenate(control_values)
        control_sup = np.array([np.max(np.abs(e)) for e in np.split(control_error, control_cuts)])
        ratio = float(np.max(control_sup / tolerances))
        history.append(DegreeStep(degree=degree, residual=residual, max_ratio=ratio))
        log.debug("degree %d: residual %.3e, worst control error %.3e of tolerance", degree, residual, ratio)

        if best is None or ratio < best[2]:
            best = (degree, coefficients, ratio, control_error)
        if np.all(control_sup < settings.fit_fraction * tolerances):
            break
        if degree < requested:
            break

    degree, coefficients, ratio, control_error = best
    fitted = FittedPolynomial(arnoldi.H[: degree + 1, :degree], arnoldi.q0, coefficients)

    fit_error = fitted(z) - np.concatenate(fit_values)
    piece_errors, fit_errors, gaps = [], [], []
    for e_fit, e_control, n_fit, n_control in zip(
        np.split(fit_error, fit_cuts),
        np.split(control_error, control_cuts),
        fit_sizes,
        control_sizes,
    ):
        neighbours = e_control[np.arange(n_fit) * (n_control // n_fit)]
        piece_errors.append(float(np.max(np.abs(e_control))))
        fit_errors.append(float(np.max(np.abs(e_fit))))
        gaps.append(float(np.max(np.abs(e_fit - neighbours))))
    success = bool(np.all(np.array(piece_errors) < settings.fit_fraction * tolerances))
    fitted.attach_monomial(z, settings.monomial_threshold)

    report = FitReport(
        degree=degree,
        success=success,
        piece_errors=piece_errors,
        fit_errors=fit_errors,
        grid_gap=gaps,
        tolerances=tolerances.tolist(),
        history=history,
        fit_samples=fit_sizes,
        control_samples=control_sizes,
    )
    if success:
        log.info("fit accepted at degree %d (worst error %.2f of tolerance)", degree, ratio)
    else:
        log.warning("fit failed: best degree %d reaches %.2f of tolerance", degree, ratio)
    return fitted, report


#!------------------ Measurement ------------------!#


def sup_error(
    f: Callable,
    target: Callable,
    disk: Disk,
    n_control: int = 1024,
    phase: float = 0.5,
) -> float:
    """Max of |f - target| over n_control boundary samples of the disk.

    phase shifts the grid by that fraction of one sample step.
    """
    if n_control < 64:
        raise UsageError("sup errors are measured on at least 64 control samples")
    z = sample_disk_boundary(disk, n_control, 2.0 * math.pi * phase / n_control)
    difference = np.asarray(f(z), dtype=complex) - np.asarray(target(z), dtype=complex)
    return float(np.max(np.abs(np.broadcast_to(difference, z.shape))))


def evaluate(f: Callable, z):
    """Evaluate a fitted polynomial, monomial polynomial or series at z."""
    return f(z)
