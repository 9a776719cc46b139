# Families of curves
#> A family is a map alpha -> z_alpha on a shared parameter interval I, with
#> alpha running over J. Unit-disc families start at a fixed interior base
#> point and run out to the unit circle; zero-to-infinity families start at 0
#> and leave every disk. Everything here is sampled numerics: limits,
#> distances and continuity are certified on finite grids.

import logging
import math
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

from fractions import Fraction
from typing import Literal

from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from tuniv.config import SearchSettings
from tuniv.errors import CertificationError, DomainError, UsageError
from tuniv.types import ComplexValue, ExtendedReal, PositiveFloat, RationalValue

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
#> distance from the unit circle still accepted as "on the circle"
CIRCLE_SLACK = 1e-6


#!------------------ Intervals ------------------!#


class Interval(BaseModel):
    model_config = ConfigDict(frozen=True)

    lo: ExtendedReal
    hi: ExtendedReal
    lo_closed: bool = True
    hi_closed: bool = False

    @model_validator(mode="after")
    def check_bounds(self) -> Self:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval bounds must be numbers")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval: lo={self.lo} is not below hi={self.hi}")
        if (math.isinf(self.lo) and self.lo_closed) or (math.isinf(self.hi) and self.hi_closed):
            raise ValueError("infinite endpoints must be open")
        return self

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def closed_endpoints(self) -> list[float]:
        """Boundary points that belong to the interval."""
        points = []
        if self.lo_closed:
            points.append(self.lo)
        if self.hi_closed:
            points.append(self.hi)
        return points

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        inside = above & below
        return bool(inside) if inside.ndim == 0 else inside

    def sigma(self, u):
        """Monotone map from (0, 1) onto the interior of the interval."""
        u = np.asarray(u, dtype=float)
        lo, hi = self.lo, self.hi
        if self.bounded:
            return lo + u * (hi - lo)
        if math.isfinite(lo):
            return lo - np.log1p(-u)
        if math.isfinite(hi):
            return hi + np.log(u)
        return np.tan(math.pi * (u - 0.5))

    def tail(self, q):
        """sigma(1 - 2**-q), evaluated without cancellation."""
        q = np.asarray(q, dtype=float)
        eps = np.exp2(-q)
        lo, hi = self.lo, self.hi
        if self.bounded:
            return hi - eps * (hi - lo)
        if math.isfinite(lo):
            return lo + q * math.log(2.0)
        if math.isfinite(hi):
            return hi + np.log1p(-eps)
        return 1.0 / np.tan(math.pi * eps)


#!------------------ Single curves ------------------!#


class CurveKind(StrEnum):
    RADIUS = "radius"
    LOG_SPIRAL = "log_spiral"
    SINGLE_SPIRAL = "single_spiral"
    POLYLINE = "polyline"


def _values(kind: CurveKind, param, t, knots=(), points=()) -> np.ndarray:
    """Broadcast evaluation; param is the angle, slope or rotation."""
    param = np.asarray(param, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(param.shape, t.shape)
    with np.errstate(over="ignore", invalid="ignore"):
        if kind is CurveKind.RADIUS:
            values = t * np.exp(1j * param)
        elif kind is CurveKind.LOG_SPIRAL:
            values = np.exp((1.0 + 1j * param) * t)
        elif kind is CurveKind.SINGLE_SPIRAL:
            values = -np.expm1(-t) * np.exp(1j * t)
        else:
            nodes = np.asarray(points, dtype=complex)
            values = np.interp(t, knots, nodes.real) + 1j * np.interp(t, knots, nodes.imag)
            values = values * np.exp(1j * param)
    return np.broadcast_to(values, shape).astype(complex)


class CurveSpec(BaseModel):
    """One curve: radius t*e^{i angle}, spiral e^{(1+i slope)t},
    the single spiral (1-e^{-t})e^{it}, or a piecewise-linear path."""

    model_config = ConfigDict(frozen=True)

    kind: CurveKind
    domain: Interval
    angle: float = 0.0
    slope: float = 0.0
    knots: tuple[float, ...] = ()
    points: tuple[ComplexValue, ...] = ()

    @model_validator(mode="after")
    def check_polyline(self) -> Self:
        if self.kind is CurveKind.POLYLINE:
            if len(self.knots) < 2 or len(self.knots) != len(self.points):
                raise ValueError("a polyline needs matching knots and points, at least two")
            if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
                raise ValueError("polyline knots must be strictly increasing")
        return self

    @property
    def parameter(self) -> float:
        return self.slope if self.kind is CurveKind.LOG_SPIRAL else self.angle

    def values(self, t) -> np.ndarray:
        return _values(self.kind, self.parameter, t, self.knots, self.points)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if not np.all(self.domain.contains(t)):
            raise DomainError(f"parameter outside the curve domain {self.domain}")
        values = self.values(t)
        return complex(values) if values.ndim == 0 else values

    def point_at(self, u):
        u = np.asarray(u, dtype=float)
        if not np.all((u > 0) & (u < 1)):
            raise DomainError("curve position u must lie in (0, 1)")
        values = self.values(self.domain.sigma(u))
        return complex(values) if values.ndim == 0 else values

    def tail_pass(self, theta: float, n: int) -> complex:
        """n-th pass of an accumulating curve through the ray of angle theta."""
        if self.kind is not CurveKind.SINGLE_SPIRAL:
            raise UsageError(f"{self.kind} curves have no tail passes")
        return complex(self.values(theta + TWO_PI * n))


#!------------------ Families ------------------!#


class FamilyKind(StrEnum):
    RADII = "radii"
    RAYS = "rays"
    LOG_SPIRALS = "log_spirals"
    LOG_SPIRALS_PLANE = "log_spirals_plane"
    SINGLE_SPIRAL = "single_spiral"
    POLYLINE_FAN = "polyline_fan"


class Coverage(StrEnum):
    FULL = "full"
    PARTIAL = "partial"
    ACCUMULATING = "accumulating"


_CURVE_OF = {
    FamilyKind.RADII: CurveKind.RADIUS,
    FamilyKind.RAYS: CurveKind.RADIUS,
    FamilyKind.LOG_SPIRALS: CurveKind.LOG_SPIRAL,
    FamilyKind.LOG_SPIRALS_PLANE: CurveKind.LOG_SPIRAL,
    FamilyKind.SINGLE_SPIRAL: CurveKind.SINGLE_SPIRAL,
    FamilyKind.POLYLINE_FAN: CurveKind.POLYLINE,
}


class CurveFamily(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: FamilyKind
    param_interval: Interval = Field(description="J, the parameter interval")
    curve_interval: Interval = Field(description="I, shared by every curve")
    geometry: Literal["unit_disc", "zero_to_infinity"] = "unit_disc"
    base_point: ComplexValue = 0j
    coverage: Coverage = Coverage.FULL
    single: bool = Field(default=False, description="every alpha names the same curve")
    knots: tuple[float, ...] = ()
    points: tuple[ComplexValue, ...] = ()

    @model_validator(mode="after")
    def check_family(self) -> Self:
        if self.geometry == "zero_to_infinity" and self.base_point != 0:
            raise ValueError("zero-to-infinity families start at 0")
        if self.geometry == "unit_disc" and abs(self.base_point) >= 1:
            raise ValueError("the base point must lie in the open unit disc")
        if self.kind is FamilyKind.POLYLINE_FAN:
            if len(self.points) < 2 or self.points[0] != 0:
                raise ValueError("a polyline fan rotates a path that starts at 0")
        if self.single and not self.param_interval.lo_closed:
            raise ValueError("a single-curve family names its curve by the closed lower endpoint")
        return self

    @property
    def curve_kind(self) -> CurveKind:
        return _CURVE_OF[self.kind]

    def evaluate(self, alpha, t) -> np.ndarray:
        """z_alpha(t) with numpy broadcasting and no domain checks."""
        return _values(self.curve_kind, alpha, t, self.knots, self.points)

    def generator(self, alpha: float) -> CurveSpec:
        alpha = float(alpha)
        if not self.param_interval.contains(alpha):
            raise DomainError(f"alpha={alpha} outside the parameter interval {self.param_interval}")
        kind = self.curve_kind
        if kind is CurveKind.RADIUS:
            return CurveSpec(kind=kind, domain=self.curve_interval, angle=alpha)
        if kind is CurveKind.LOG_SPIRAL:
            return CurveSpec(kind=kind, domain=self.curve_interval, slope=alpha)
        if kind is CurveKind.SINGLE_SPIRAL:
            return CurveSpec(kind=kind, domain=self.curve_interval)
        rotation = complex(np.exp(1j * alpha))
        return CurveSpec(
            kind=kind,
            domain=self.curve_interval,
            knots=self.knots,
            points=tuple(complex(p) * rotation for p in self.points),
        )


def radii() -> CurveFamily:
    """All radii t*e^{i alpha}, t in [0, 1), alpha in [0, 2pi)."""
    return CurveFamily(
        kind=FamilyKind.RADII,
        param_interval=Interval(lo=0.0, hi=TWO_PI),
        curve_interval=Interval(lo=0.0, hi=1.0),
    )


def rays() -> CurveFamily:
    return CurveFamily(
        kind=FamilyKind.RAYS,
        param_interval=Interval(lo=0.0, hi=TWO_PI),
        curve_interval=Interval(lo=0.0, hi=math.inf),
        geometry="zero_to_infinity",
    )


def log_spirals() -> CurveFamily:
    """Logarithmic spirals restricted to the disc. Every member ends at 1."""
    return CurveFamily(
        kind=FamilyKind.LOG_SPIRALS,
        param_interval=Interval(lo=-math.inf, hi=math.inf, lo_closed=False),
        curve_interval=Interval(lo=-math.inf, hi=0.0, lo_closed=False),
        coverage=Coverage.PARTIAL,
    )


def log_spirals_plane() -> CurveFamily:
    return CurveFamily(
        kind=FamilyKind.LOG_SPIRALS_PLANE,
        param_interval=Interval(lo=-math.inf, hi=math.inf, lo_closed=False),
        curve_interval=Interval(lo=-math.inf, hi=math.inf, lo_closed=False),
        geometry="zero_to_infinity",
    )


def single_spiral() -> CurveFamily:
    return CurveFamily(
        kind=FamilyKind.SINGLE_SPIRAL,
        param_interval=Interval(lo=0.0, hi=1.0, hi_closed=True),
        curve_interval=Interval(lo=0.0, hi=math.inf, lo_closed=False),
        coverage=Coverage.ACCUMULATING,
        single=True,
    )


def polyline_fan(knots, points) -> CurveFamily:
    """Rotations e^{i alpha} * P of one path P from 0 to the unit circle."""
    knots = tuple(float(k) for k in knots)
    points = tuple(complex(p) for p in points)
    if any(abs(p) >= 1 for p in points[:-1]) or abs(abs(points[-1]) - 1) > 1e-12:
        raise UsageError("a fan path stays inside the disc and ends on the unit circle")
    return CurveFamily(
        kind=FamilyKind.POLYLINE_FAN,
        param_interval=Interval(lo=0.0, hi=TWO_PI),
        curve_interval=Interval(lo=knots[0], hi=knots[-1]),
        knots=knots,
        points=points,
    )


BUILTIN_FAMILIES = {
    FamilyKind.RADII: radii,
    FamilyKind.RAYS: rays,
    FamilyKind.LOG_SPIRALS: log_spirals,
    FamilyKind.LOG_SPIRALS_PLANE: log_spirals_plane,
    FamilyKind.SINGLE_SPIRAL: single_spiral,
}


def builtin_family(kind: str) -> CurveFamily:
    try:
        return BUILTIN_FAMILIES[FamilyKind(kind)]()
    except (ValueError, KeyError) as exc:
        raise UsageError(f"unknown built-in family {kind!r}") from exc


#!------------------ Point evaluation ------------------!#


def _check_alpha(family: CurveFamily, alpha: float) -> None:
    if not family.param_interval.contains(alpha):
        raise DomainError(f"alpha={alpha} outside the parameter interval {family.param_interval}")


def eval_curve(family: CurveFamily, alpha: float, t: float) -> complex:
    _check_alpha(family, alpha)
    if not family.curve_interval.contains(t):
        raise DomainError(f"t={t} outside the curve interval {family.curve_interval}")
    return complex(family.evaluate(alpha, t))


def curve_point(family: CurveFamily, alpha: float, u: float) -> complex:
    """z_alpha(sigma_I(u)) for u in (0, 1)."""
    _check_alpha(family, alpha)
    if not 0.0 < u < 1.0:
        raise DomainError(f"u={u} outside (0, 1)")
    return complex(family.evaluate(alpha, family.curve_interval.sigma(u)))


#!------------------ Boundary limits ------------------!#


class Tail(StrEnum):
    ACCUMULATING = "accumulating"


ACCUMULATING = Tail.ACCUMULATING


def endpoints(family: CurveFamily, alphas, *, tol: float = 1e-12, steps: int = 60) -> np.ndarray:
    """Boundary limits of many curves at once; NaN where none was found.

    Each curve is followed along t_q = sigma_I(1 - 2^-q) until two successive
    values differ by less than tol. The limit must sit on the unit circle and
    is returned normalised to modulus 1.
    """
    if family.geometry != "unit_disc":
        raise UsageError("boundary limits are defined for unit-disc families only")
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    limits = np.full(alphas.shape, np.nan, dtype=complex)
    pending = np.ones(alphas.shape, dtype=bool)
    previous = family.evaluate(alphas, family.curve_interval.tail(1))
    for q in range(2, steps + 1):
        current = family.evaluate(alphas, family.curve_interval.tail(q))
        settled = pending & (np.abs(current - previous) < tol)
        limits[settled] = current[settled]
        pending &= ~settled
        if not pending.any():
            break
        previous = current
    modulus = np.abs(limits)
    with np.errstate(invalid="ignore", divide="ignore"):
        on_circle = np.abs(modulus - 1.0) <= CIRCLE_SLACK
        return np.where(on_circle, limits / modulus, np.nan + 0j)


def endpoint(
    family: CurveFamily,
    alpha: float,
    tol: float | None = None,
    settings: SearchSettings | None = None,
) -> complex | Tail:
    settings = settings or SearchSettings()
    _check_alpha(family, alpha)
    limit = endpoints(
        family, [alpha], tol=tol or settings.endpoint_tol, steps=settings.endpoint_steps
    )[0]
    if np.isnan(limit):
        if family.coverage is Coverage.ACCUMULATING:
            return ACCUMULATING
        raise CertificationError(
            f"curve alpha={alpha} has no boundary limit within {settings.endpoint_steps} steps"
        )
    return complex(limit)


#!------------------ Sampled curves and r-distance ------------------!#


class SampledCurve(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    parameters: np.ndarray
    points: np.ndarray

    @field_validator("parameters", mode="before")
    @classmethod
    def as_float_array(cls, value):
        return np.asarray(value, dtype=float)

    @field_validator("points", mode="before")
    @classmethod
    def as_complex_array(cls, value):
        return np.asarray(value, dtype=complex)

    @model_validator(mode="after")
    def check_grid(self) -> Self:
        if self.parameters.ndim != 1 or self.parameters.shape != self.points.shape:
            raise ValueError("parameters and points must be matching 1-D arrays")
        if np.any(np.diff(self.parameters) <= 0):
            raise ValueError("parameters must be strictly increasing")
        return self


def sample_spec(spec: CurveSpec, parameters) -> SampledCurve:
    parameters = np.asarray(parameters, dtype=float)
    if not np.all(spec.domain.contains(parameters)):
        raise DomainError("sample parameters must lie in the curve interval")
    return SampledCurve(parameters=parameters, points=spec.values(parameters))


def sample_curve(family: CurveFamily, alpha: float, parameters) -> SampledCurve:
    return sample_spec(family.generator(alpha), parameters)


def parameter_grid(interval: Interval, n: int, tail_depth: int = 40) -> np.ndarray:
    """n interior points of I plus a geometric tail toward sup(I)."""
    interior = interval.sigma(np.arange(1, n) / n)
    first_tail = int(math.ceil(math.log2(n))) + 1
    tail = interval.tail(np.arange(first_tail, max(first_tail, tail_depth) + 1))
    grid = np.concatenate([interval.closed_endpoints, interior, tail])
    grid = grid[np.isfinite(grid) & interval.contains(grid)]
    return np.unique(grid)


GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
REFINE_ROUNDS = 80
REFINE_CANDIDATES = 4


def _refine(gap, lo: float, hi: float) -> float:
    """Golden-section minimum of gap on [lo, hi]."""
    x1, x2 = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
    f1, f2 = gap(x1), gap(x2)
    for _ in range(REFINE_ROUNDS):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = gap(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = gap(x2)
    return min(f1, f2, gap(lo), gap(hi))


def distance_to_curve(family: CurveFamily, alpha: float, point: complex, parameters) -> float:
    """Distance from point to z_alpha.

    The samples at parameters locate the closest stretches of the curve; each
    is refined over the two intervals around its node.
    """
    spec = family.generator(alpha)
    grid = np.unique(np.asarray(parameters, dtype=float))
    grid = grid[spec.domain.contains(grid)]
    if grid.size == 0:
        raise UsageError("no curve parameters to measure against")
    gaps = np.abs(spec.values(grid) - point)
    gaps = np.where(np.isfinite(gaps), gaps, np.inf)
    best = float(gaps.min())

    def gap(t: float) -> float:
        value = abs(complex(spec.values(t)) - point)
        return value if math.isfinite(value) else math.inf

    for i in np.argsort(gaps)[:REFINE_CANDIDATES]:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        if hi > lo:
            best = min(best, _refine(gap, float(lo), float(hi)))
    return best


def _check_grids(c1: SampledCurve, c2: SampledCurve) -> None:
    if not np.array_equal(c1.parameters, c2.parameters):
        raise UsageError("r-distance needs both curves sampled on the same parameter grid")


def r_distance(c1: SampledCurve, c2: SampledCurve) -> float:
    _check_grids(c1, c2)
    if c1.points.size == 0:
        return 0.0
    return float(np.max(np.abs(c1.points - c2.points)))


def truncated_r_distance(c1: SampledCurve, c2: SampledCurve, j: int) -> float:
    """r-distance over the samples where either curve lies in |z| <= j."""
    _check_grids(c1, c2)
    inside = (np.abs(c1.points) <= j) | (np.abs(c2.points) <= j)
    if not inside.any():
        return 0.0
    return float(np.max(np.abs(c1.points[inside] - c2.points[inside])))


def _family_distance(family: CurveFamily, reference: np.ndarray, other: np.ndarray, j: int) -> float:
    gap = np.abs(reference - other)
    if family.geometry == "zero_to_infinity":
        inside = (np.abs(reference) <= j) | (np.abs(other) <= j)
        gap = gap[inside]
    gap = gap[np.isfinite(gap)]
    return float(gap.max()) if gap.size else 0.0


#!------------------ Continuity certification ------------------!#


def _dyadic_neighbours(alpha: float, depth: int) -> list[Fraction]:
    scale = 2**depth
    below = math.floor(alpha * scale)
    candidates = {Fraction(below, scale), Fraction(below + 1, scale)}
    return sorted(candidates, key=lambda c: (abs(float(c) - alpha), c))


def nearest_subfamily_member(
    family: CurveFamily,
    alpha: float,
    delta: float,
    j: int = 1,
    settings: SearchSettings | None = None,
) -> Fraction:
    """A member of the countable subfamily (rationals of J plus the endpoints
    of J that belong to J) whose curve is within delta of z_alpha.

    Unit-disc families use the full r-distance; zero-to-infinity families the
    distance restricted to |z| <= j. Candidates are the dyadic neighbours of
    alpha at increasing depth.
    """
    settings = settings or SearchSettings()
    if delta <= 0:
        raise UsageError("delta must be positive")
    _check_alpha(family, alpha)
    J = family.param_interval
    if family.single:
        return Fraction(J.lo)
    if alpha in J.closed_endpoints:
        return Fraction(alpha)

    grid = parameter_grid(family.curve_interval, settings.curve_samples)
    reference = family.evaluate(alpha, grid)
    candidates = [Fraction(e) for e in J.closed_endpoints]
    for depth in range(settings.continuity_depth + 1):
        candidates.extend(c for c in _dyadic_neighbours(alpha, depth) if J.contains(float(c)))

    seen: set[Fraction] = set()
    for candidate in candidates:
        if candidate in seen:
            continue
        seen.add(candidate)
        other = family.evaluate(float(candidate), grid)
        if _family_distance(family, reference, other, j) < delta:
            return candidate
    raise CertificationError(
        f"no subfamily member within {delta:g} of alpha={alpha!r} "
        f"up to dyadic depth {settings.continuity_depth}"
    )


class ContinuityEntry(BaseModel):
    alpha: float
    passed: bool
    witness: RationalValue | None = None
    distance: float | None = None
    reason: str | None = None


class ContinuityReport(BaseModel):
    family: CurveFamily
    delta: PositiveFloat
    j: int
    entries: list[ContinuityEntry]

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def witnesses(self) -> list[Fraction]:
        return [e.witness for e in self.entries if e.witness is not None]


def certify_continuous(
    family: CurveFamily,
    delta: float,
    j: int,
    alphas,
    settings: SearchSettings | None = None,
) -> ContinuityReport:
    settings = settings or SearchSettings()
    grid = parameter_grid(family.curve_interval, settings.curve_samples)
    entries = []
    for alpha in alphas:
        alpha = float(alpha)
        try:
            witness = nearest_subfamily_member(family, alpha, delta, j, settings)
        except (CertificationError, DomainError) as exc:
            log.warning("continuity not certified at alpha=%r: %s", alpha, exc.detail)
            entries.append(ContinuityEntry(alpha=alpha, passed=False, reason=exc.detail))
            continue
        distance = _family_distance(
            family, family.evaluate(alpha, grid), family.evaluate(float(witness), grid), j
        )
        entries.append(ContinuityEntry(alpha=alpha, passed=True, witness=witness, distance=distance))
    report = ContinuityReport(family=family, delta=delta, j=j, entries=entries)
    log.info("continuity of %s at delta=%g: %d/%d certified",
             family.kind, delta, len(report.witnesses), len(entries))
    return report
