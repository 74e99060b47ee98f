"""Exact arithmetic over Z_d and the d-th roots of unity.

Everything that can stay an integer exponent stays one; complex numbers only
appear when a phase is handed to the state-vector engine.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union


class QuditError(ValueError):
    """Base class for contract violations raised by this package."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for f in range(2, math.isqrt(n) + 1):
        if n % f == 0:
            return False
    return True


@dataclass(frozen=True)
class PrimeDim:
    """Qudit dimension, checked to be prime on construction."""

    d: int

    def __post_init__(self):
        if not isinstance(self.d, (int,)) or isinstance(self.d, bool):
            raise QuditError(f"dimension must be an integer, got {self.d!r}")
        if not is_prime(self.d):
            raise QuditError(f"dimension {self.d} is not prime")

    @property
    def odd(self) -> bool:
        return self.d > 2

    @property
    def omega(self) -> complex:
        return cmath.exp(2j * math.pi / self.d)

    def require_odd(self, what: str = "this operation") -> None:
        if not self.odd:
            raise QuditError(f"{what} requires an odd prime dimension (2^-1 mod d), got d=2")

    def __int__(self) -> int:
        return self.d

    def __index__(self) -> int:
        return self.d


DimLike = Union[PrimeDim, int]


def as_dim(d: DimLike) -> PrimeDim:
    return d if isinstance(d, PrimeDim) else PrimeDim(int(d))


@dataclass(frozen=True)
class ZdElem:
    """An element of Z_d; arithmetic never leaves [0, d)."""

    value: int
    dim: PrimeDim

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % self.dim.d)

    @classmethod
    def of(cls, value: int, d: DimLike) -> "ZdElem":
        return cls(value, as_dim(d))

    def _coerce(self, other) -> int:
        if isinstance(other, ZdElem):
            if other.dim != self.dim:
                raise QuditError("mixing elements of different Z_d")
            return other.value
        return int(other)

    def __add__(self, other):
        return ZdElem(self.value + self._coerce(other), self.dim)

    __radd__ = __add__

    def __sub__(self, other):
        return ZdElem(self.value - self._coerce(other), self.dim)

    def __rsub__(self, other):
        return ZdElem(self._coerce(other) - self.value, self.dim)

    def __mul__(self, other):
        return ZdElem(self.value * self._coerce(other), self.dim)

    __rmul__ = __mul__

    def __neg__(self):
        return ZdElem(-self.value, self.dim)

    def __pow__(self, e: int):
        if e < 0:
            return mod_inverse(self) ** (-e)
        return ZdElem(pow(self.value, e, self.dim.d), self.dim)

    def __eq__(self, other):
        if isinstance(other, ZdElem):
            return self.dim == other.dim and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.dim.d
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.dim.d))

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"ZdElem({self.value} mod {self.dim.d})"

    def inverse(self) -> "ZdElem":
        return mod_inverse(self)

    def half(self) -> "ZdElem":
        return half_times(self)


@dataclass(frozen=True)
class PhaseExp:
    """The root of unity omega**exponent, kept as an exponent."""

    exponent: ZdElem

    def __mul__(self, other: "PhaseExp") -> "PhaseExp":
        return PhaseExp(self.exponent + other.exponent)

    def conj(self) -> "PhaseExp":
        return PhaseExp(-self.exponent)

    def __complex__(self) -> complex:
        return omega_complex(self)


def _split(a, d: DimLike | None) -> tuple[int, PrimeDim]:
    if isinstance(a, ZdElem):
        return a.value, a.dim
    if d is None:
        raise QuditError("a bare integer needs an explicit dimension")
    dim = as_dim(d)
    return int(a) % dim.d, dim


def mod_inverse(a, d: DimLike | None = None):
    """Multiplicative inverse in Z_d.

    Accepts a ZdElem (returns a ZdElem) or an int together with ``d``
    (returns an int).
    """
    value, dim = _split(a, d)
    if value == 0:
        raise QuditError("no inverse: 0 is not invertible mod d")
    inv = pow(value, -1, dim.d)
    return ZdElem(inv, dim) if isinstance(a, ZdElem) else inv


def half_times(k, d: DimLike | None = None):
    """k * 2^-1 mod d; only defined for odd d."""
    value, dim = _split(k, d)
    if not dim.odd:
        raise QuditError("half undefined for d=2")
    out = value * pow(2, -1, dim.d) % dim.d
    return ZdElem(out, dim) if isinstance(k, ZdElem) else out


def omega_complex(e, d: DimLike | None = None) -> complex:
    """exp(2 pi i e / d) for an exponent given as PhaseExp, ZdElem or int."""
    if isinstance(e, PhaseExp):
        e = e.exponent
    value, dim = _split(e, d)
    return cmath.exp(2j * math.pi * value / dim.d)
