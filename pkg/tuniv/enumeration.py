# Canonical enumerations
#> Deterministic index maps for the dense sequences of the construction:
#>   a_k      dyadic scales in (0, 1)
#>   zeta_p   boundary points e^{2 pi i d_{p-1}}
#>   p_j      polynomials with Gaussian-rational coefficients
#>   C_pl     subfamily curves ending near zeta_p
#>   b_nlp    anchors, dense on C_pl
#> plus the diagonal schedule of index tuples.

import logging
import math
from collections.abc import Iterator, Sequence
from fractions import Fraction
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from tuniv.config import SearchSettings
from tuniv.curves import TWO_PI, Coverage, CurveFamily, CurveSpec, endpoints
from tuniv.errors import CertificationError, UsageError
from tuniv.polynomials import Polynomial
from tuniv.types import RationalValue

log = logging.getLogger(__name__)


def _check_natural(name: str, value: int) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise UsageError(f"{name} must be a natural number >= 1, got {value!r}")


#!------------------ Dyadic scales and boundary points ------------------!#


def scale_fraction(k: int) -> Fraction:
    """d_k = (2b+1) / 2^(a+1) where k = 2^a + b, 0 <= b < 2^a."""
    _check_natural("k", k)
    a = int(k).bit_length() - 1
    b = int(k) - (1 << a)
    return Fraction(2 * b + 1, 1 << (a + 1))


def scale(k: int) -> float:
    return float(scale_fraction(k))


def scale_index(x: Fraction | float) -> int:
    """Inverse of scale on the dyadic rationals of (0, 1)."""
    x = Fraction(x)
    den = x.denominator
    if not 0 < x < 1 or den & (den - 1):
        raise UsageError(f"{x} is not a dyadic rational in (0, 1)")
    a = den.bit_length() - 2
    return (1 << a) + (x.numerator - 1) // 2


def scales(count: int) -> np.ndarray:
    """d_1 .. d_count as a float array."""
    k = np.arange(1, count + 1, dtype=np.int64)
    _, exponent = np.frexp(k.astype(float))
    a = exponent - 1
    b = k - (np.int64(1) << a)
    return (2 * b + 1) / np.exp2(a + 1)


def boundary_point(p: int) -> complex:
    _check_natural("p", p)
    if p == 1:
        return 1 + 0j
    theta = TWO_PI * scale(p - 1)
    return complex(math.cos(theta), math.sin(theta))


#!------------------ Rationals and pairing ------------------!#


def calkin_wilf(n: int) -> Fraction:
    """n-th term of the breadth-first Calkin-Wilf sequence, c_1 = 1."""
    _check_natural("n", n)
    a, b = 1, 1
    for bit in bin(n)[3:]:
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


def calkin_wilf_index(x: Fraction) -> int:
    x = Fraction(x)
    if x <= 0:
        raise UsageError("the Calkin-Wilf tree holds positive rationals only")
    a, b = x.numerator, x.denominator
    runs: list[tuple[int, int]] = []
    while a != b:
        if a < b:
            q = (b - 1) // a
            b -= q * a
            runs.append((0, q))
        else:
            q = (a - 1) // b
            a -= q * b
            runs.append((1, q))
    n = 1
    for bit, length in reversed(runs):
        n = (n << length) | (((1 << length) - 1) if bit else 0)
    return n


def rational_at(i: int) -> Fraction:
    """r_1 = 0, r_2n = c_n, r_2n+1 = -c_n."""
    _check_natural("i", i)
    if i == 1:
        return Fraction(0)
    c = calkin_wilf(i // 2)
    return c if i % 2 == 0 else -c


def rational_index(x: Fraction | int) -> int:
    x = Fraction(x)
    if x == 0:
        return 1
    if x > 0:
        return 2 * calkin_wilf_index(x)
    return 2 * calkin_wilf_index(-x) + 1


def pair(x: int, y: int) -> int:
    """Cantor pairing of two non-negative integers."""
    if x < 0 or y < 0:
        raise UsageError("pairing is defined on non-negative integers")
    w = x + y
    return w * (w + 1) // 2 + y


def unpair(z: int) -> tuple[int, int]:
    if z < 0:
        raise UsageError("pairing is defined on non-negative integers")
    w = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


def _unpack(code: int, count: int) -> list[int]:
    values = []
    for _ in range(count - 1):
        head, code = unpair(code)
        values.append(head)
    values.append(code)
    return values


def _pack(values: Sequence[int]) -> int:
    code = values[-1]
    for head in reversed(values[:-1]):
        code = pair(head, code)
    return code


#!------------------ Polynomials with Gaussian-rational coefficients ------------------!#


GaussianRational = tuple[RationalValue, RationalValue]


class GaussianPolynomial(BaseModel):
    """Exact polynomial, coefficients (re, im) from the constant term up."""

    model_config = ConfigDict(frozen=True)

    coefficients: tuple[GaussianRational, ...] = ()

    def __init__(self, coefficients=(), **data):
        super().__init__(coefficients=coefficients, **data)

    @field_validator("coefficients", mode="after")
    @classmethod
    def trim(cls, coefficients):
        trimmed = list(coefficients)
        while trimmed and trimmed[-1] == (0, 0):
            trimmed.pop()
        return tuple(trimmed)

    @property
    def degree(self) -> int:
        return max(len(self.coefficients) - 1, 0)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def to_polynomial(self) -> Polynomial:
        return Polynomial([complex(float(re), float(im)) for re, im in self.coefficients])

    @classmethod
    def from_complex(cls, values) -> "GaussianPolynomial":
        """Read float coefficients that are short rationals in disguise."""
        return cls([(_as_rational(complex(v).real), _as_rational(complex(v).imag)) for v in values])

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for power, (re, im) in enumerate(self.coefficients):
            if re == 0 and im == 0:
                continue
            coefficient = f"({re}{'+' if im >= 0 else '-'}{abs(im)}i)"
            terms.append(coefficient if power == 0 else f"{coefficient}z^{power}")
        return " + ".join(terms)


def _as_rational(x: float) -> Fraction:
    if not math.isfinite(x):
        raise UsageError(f"coefficient {x!r} is not a rational number")
    candidate = Fraction(x).limit_denominator(10**6)
    if float(candidate) != x:
        raise UsageError(f"coefficient {x!r} is not a rational with denominator <= 10^6")
    return candidate


def gaussian_at(g: int) -> GaussianRational:
    _check_natural("g", g)
    re_index, im_index = unpair(g - 1)
    return rational_at(re_index + 1), rational_at(im_index + 1)


def gaussian_index(value: GaussianRational) -> int:
    re, im = value
    return pair(rational_index(re) - 1, rational_index(im) - 1) + 1


def poly(j: int) -> GaussianPolynomial:
    """j = 1 is the zero polynomial; j >= 2 unpairs (degree, coefficient code).

    The coefficient code unpacks into degree + 1 indices by iterated Cantor
    unpairing; the leading index is shifted by one so it never names zero.
    """
    _check_natural("j", j)
    if j == 1:
        return GaussianPolynomial()
    degree, code = unpair(j - 2)
    indices = _unpack(code, degree + 1)
    indices = [x + 1 for x in indices[:-1]] + [indices[-1] + 2]
    return GaussianPolynomial([gaussian_at(g) for g in indices])


def poly_index(q: GaussianPolynomial | Polynomial | Sequence[complex]) -> int:
    if isinstance(q, Polynomial):
        q = GaussianPolynomial.from_complex(q.coefficients)
    elif not isinstance(q, GaussianPolynomial):
        q = GaussianPolynomial.from_complex(q)
    if q.is_zero:
        return 1
    indices = [gaussian_index(c) for c in q.coefficients]
    codes = [g - 1 for g in indices[:-1]] + [indices[-1] - 2]
    return pair(q.degree, _pack(codes)) + 2


#!------------------ Index tuples ------------------!#


def tuple_at(i: int, width: int = 6) -> tuple[int, ...]:
    """Tuples of naturals ordered by coordinate sum, then lexicographically."""
    _check_natural("i", i)
    _check_natural("width", width)
    rest = i - 1
    total = width
    while math.comb(total, width) <= rest:
        total += 1
    rest -= math.comb(total - 1, width)
    values = []
    remaining = total
    for slot in range(width - 1):
        free = width - slot - 1
        value = 1
        while True:
            completions = math.comb(remaining - value - 1, free - 1)
            if rest < completions:
                break
            rest -= completions
            value += 1
        values.append(value)
        remaining -= value
    values.append(remaining)
    return tuple(values)


def tuple_index(values: Sequence[int]) -> int:
    width = len(values)
    if width == 0 or any(isinstance(v, bool) or v < 1 for v in values):
        raise UsageError("tuple entries must be natural numbers")
    total = sum(values)
    index = math.comb(total - 1, width)
    remaining = total
    for slot, value in enumerate(values[:-1]):
        free = width - slot - 1
        index += sum(math.comb(remaining - v - 1, free - 1) for v in range(1, value))
        remaining -= value
    return index + 1


#!------------------ Countable subfamily ------------------!#


def _level_members(family: CurveFamily, depth: int) -> np.ndarray:
    """Numerators c of the members c / 2^depth that enter at this level.

    A dyadic x enters at level max(its reduced binary depth, L) where L is the
    smallest integer >= 0 with |x| <= L + 1.
    """
    J = family.param_interval
    unit = 1 << depth
    bound = (depth + 1) * unit
    lo = max(-bound, math.ceil(J.lo * unit) if math.isfinite(J.lo) else -bound)
    hi = min(bound, math.floor(J.hi * unit) if math.isfinite(J.hi) else bound)
    if hi < lo:
        return np.empty(0, dtype=np.int64)
    c = np.arange(lo, hi + 1, dtype=np.int64)
    lowbit = c & -c
    _, exponent = np.frexp(np.where(c == 0, unit, lowbit).astype(float))
    reduced_depth = depth - (exponent - 1)
    height = np.maximum(0, -(-np.abs(c) // unit) - 1)
    keep = (np.maximum(reduced_depth, height) == depth) & J.contains(c / unit)
    return c[keep]


def subfamily_members(family: CurveFamily, depth: int) -> Iterator[Fraction]:
    """Canonical enumeration of the countable subfamily up to a dyadic depth:
    endpoints of J that belong to J, then each dyadic level in ascending order."""
    emitted = set()
    for e in family.param_interval.closed_endpoints:
        emitted.add(Fraction(e))
        yield Fraction(e)
    for level in range(depth + 1):
        unit = 1 << level
        for c in _level_members(family, level).tolist():
            member = Fraction(c, unit)
            if member not in emitted:
                yield member


class SubfamilyTable(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    members: tuple[Fraction, ...]
    endpoints: np.ndarray


@lru_cache(maxsize=32)
def subfamily_table(family: CurveFamily, depth: int, tol: float, steps: int) -> SubfamilyTable:
    members = tuple(subfamily_members(family, depth))
    limits = endpoints(family, [float(m) for m in members], tol=tol, steps=steps)
    log.debug("subfamily of %s to depth %d: %d members", family.kind, depth, len(members))
    return SubfamilyTable(members=members, endpoints=limits)


@lru_cache(maxsize=1024)
def _subfamily_parameter(family: CurveFamily, p: int, l: int, depth: int, tol: float, steps: int) -> Fraction:
    J = family.param_interval
    if family.single or family.coverage is Coverage.ACCUMULATING:
        return Fraction(J.lo)
    if family.geometry != "unit_disc":
        raise UsageError("subfamily curves C_pl are defined for unit-disc families")
    table = subfamily_table(family, depth, tol, steps)
    zeta = boundary_point(p)
    gap = np.abs(table.endpoints - zeta)
    gap = np.where(np.isnan(gap), np.inf, gap)
    hits = np.flatnonzero(gap < 1.0 / l)
    if hits.size >= l:
        return table.members[hits[l - 1]]
    if not np.isfinite(gap).any():
        raise CertificationError(f"no subfamily curve of {family.kind} has a boundary limit")
    nearest = int(np.argmin(gap))
    log.info("only %d subfamily curves end within 1/%d of zeta_%d; using the nearest", hits.size, l, p)
    return table.members[nearest]


def subfamily_parameter(
    family: CurveFamily, p: int, l: int, settings: SearchSettings | None = None
) -> Fraction:
    """Parameter of C_pl: the l-th subfamily member whose endpoint lies within
    1/l of zeta_p, or the member ending nearest zeta_p when fewer exist."""
    settings = settings or SearchSettings()
    _check_natural("p", p)
    _check_natural("l", l)
    return _subfamily_parameter(
        family, p, l, settings.subfamily_depth, settings.endpoint_tol, settings.endpoint_steps
    )


def subfamily_curve(
    family: CurveFamily, p: int, l: int, settings: SearchSettings | None = None
) -> CurveSpec:
    return family.generator(float(subfamily_parameter(family, p, l, settings)))


#!------------------ Anchors ------------------!#


def _ray_angle(zeta: complex) -> float:
    return math.atan2(zeta.imag, zeta.real) % TWO_PI


def anchor_points(family: CurveFamily, alpha: float, zeta: complex, count: int) -> np.ndarray:
    """b_1 .. b_count on the curve z_alpha.

    Ordinary curves use curve_point(z_alpha, d_n). An accumulating curve uses
    its n-th pass through the ray towards zeta, t = arg(zeta) + 2 pi n.
    """
    spec = family.generator(alpha)
    n = np.arange(1, count + 1)
    if family.coverage is Coverage.ACCUMULATING:
        return spec.values(_ray_angle(zeta) + TWO_PI * n)
    return spec.values(spec.domain.sigma(scales(count)))


def anchor_point(family: CurveFamily, alpha: float, zeta: complex, n: int) -> complex:
    _check_natural("n", n)
    spec = family.generator(alpha)
    if family.coverage is Coverage.ACCUMULATING:
        return spec.tail_pass(_ray_angle(zeta), n)
    return spec.point_at(scale(n))


def curve_anchor(
    family: CurveFamily, p: int, l: int, n: int, settings: SearchSettings | None = None
) -> complex:
    alpha = float(subfamily_parameter(family, p, l, settings))
    return anchor_point(family, alpha, boundary_point(p), n)
