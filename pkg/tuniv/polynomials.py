# Monomial-form polynomials
#> Targets p_j and explicit correction terms such as -f in a decomposition.
#> Fitted corrections live in tuniv.approx and never go through this class.

import numpy as np
from numpy.polynomial import Polynomial as NumpyPolynomial
from numpy.polynomial import polynomial as P
from pydantic import BaseModel

from tuniv.types import ComplexValue


class PolynomialRecord(BaseModel):
    """Serialized form: coefficients from the constant term upwards."""

    coefficients: list[ComplexValue] = []


class Polynomial:
    __slots__ = ("coefficients",)

    def __init__(self, coefficients=()):
        coefficients = np.atleast_1d(np.asarray(coefficients, dtype=complex)).ravel()
        coefficients = np.trim_zeros(coefficients, "b")
        coefficients.setflags(write=False)
        self.coefficients = coefficients

    @classmethod
    def constant(cls, value: complex) -> "Polynomial":
        return cls([value])

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    @property
    def is_zero(self) -> bool:
        return self.coefficients.size == 0

    @property
    def degree(self) -> int:
        return max(self.coefficients.size - 1, 0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.is_zero:
            values = np.zeros_like(z)
        else:
            values = P.polyval(z, self.coefficients)
        return complex(values) if values.ndim == 0 else values

    def derivative(self) -> "Polynomial":
        if self.coefficients.size <= 1:
            return Polynomial()
        return Polynomial(P.polyder(self.coefficients))

    def negated(self) -> "Polynomial":
        return Polynomial(-self.coefficients)

    def pullback(self, a: float, b: complex) -> "Polynomial":
        """The polynomial z -> self((z - b) / a)."""
        if a == 0:
            raise ValueError("pullback scale must be nonzero")
        if self.is_zero:
            return Polynomial()
        inner = NumpyPolynomial([-b / a, 1 / a])
        return Polynomial(NumpyPolynomial(self.coefficients)(inner).coef)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coefficients, other.coefficients)

    def __hash__(self) -> int:
        return hash(self.coefficients.tobytes())

    def __repr__(self) -> str:
        return f"Polynomial({self.coefficients.tolist()!r})"

    def to_record(self) -> PolynomialRecord:
        return PolynomialRecord(coefficients=[complex(c) for c in self.coefficients])

    @classmethod
    def from_record(cls, record: PolynomialRecord) -> "Polynomial":
        return cls(record.coefficients)
