# Reusable field types
#> Declared once with Annotated and used by every model in the package.

import math
from fractions import Fraction
from typing import Annotated, Any

from pydantic import Field, PlainSerializer, PlainValidator


def to_complex(value: Any) -> complex:
    """Accept complex, real, "1+2j" strings and [re, im] pairs."""
    if isinstance(value, bool):
        raise ValueError("booleans are not complex numbers")
    if isinstance(value, (complex, int, float)):
        return complex(value)
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot read {value!r} as a complex number")


def to_fraction(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, (Fraction, int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise ValueError(f"cannot read {value!r} as a rational number")


def complex_pair(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


#> complex numbers travel as [re, im] pairs
ComplexValue = Annotated[
    complex,
    PlainValidator(to_complex),
    PlainSerializer(complex_pair, return_type=list[float]),
]

#> exact rationals travel as "num/den" strings
RationalValue = Annotated[
    Fraction,
    PlainValidator(to_fraction),
    PlainSerializer(str, return_type=str),
]

Natural = Annotated[int, Field(ge=1)]
PositiveFloat = Annotated[float, Field(gt=0)]


def to_extended(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    return float(value)


def extended_out(value: float) -> float | str:
    return value if math.isfinite(value) else repr(value)


#> infinite bounds travel as "inf" / "-inf"
ExtendedReal = Annotated[
    float,
    PlainValidator(to_extended),
    PlainSerializer(extended_out, when_used="json"),
]
