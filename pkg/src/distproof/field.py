"""Prime-field arithmetic with a canonical little-endian byte encoding.

A :class:`FieldConfig` describes one prime field; elements are created by
calling the config::

    >>> F = FieldConfig(97, "toy97", toy=True)
    >>> F(50) + F(60)
    FieldElement(13, toy97)

Hot loops elsewhere in the package work on plain ``int`` residues and only
wrap results in :class:`FieldElement` at API boundaries.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import gmpy2


class FieldError(ValueError):
    """Raised for invalid field operations (mismatched configs, bad encodings)."""


@dataclass(frozen=True)
class FieldConfig:
    modulus: int
    name: str = ""
    toy: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise FieldError("modulus must be >= 2")
        if not self.toy and self.modulus <= 1 << 16:
            raise FieldError(f"modulus {self.modulus} too small (pass toy=True for test fields)")
        # BPSW; probabilistic for large inputs, no known counterexamples
        if not gmpy2.is_prime(self.modulus, 30):
            raise FieldError(f"modulus {self.modulus} is not prime")

    @property
    def bits(self) -> int:
        return self.modulus.bit_length()

    @property
    def byte_len(self) -> int:
        return (self.bits + 7) // 8

    def __call__(self, value: Union[int, "FieldElement"]) -> "FieldElement":
        if isinstance(value, FieldElement):
            self._check(value.config)
            return value
        return FieldElement(value % self.modulus, self)

    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def random(self, rng: random.Random) -> "FieldElement":
        return FieldElement(rng.randrange(self.modulus), self)

    def coerce(self, value: Union[int, "FieldElement"]) -> int:
        """Return the canonical residue of ``value`` as a plain int."""
        if isinstance(value, FieldElement):
            self._check(value.config)
            return value.value
        return int(value) % self.modulus

    def coerce_all(self, values: Iterable[Union[int, "FieldElement"]]) -> list[int]:
        return [self.coerce(v) for v in values]

    def encode(self, value: int) -> bytes:
        return value.to_bytes(self.byte_len, "little")

    def encode_all(self, values: Iterable[int]) -> bytes:
        n = self.byte_len
        return b"".join(v.to_bytes(n, "little") for v in values)

    def decode(self, data: bytes) -> int:
        if len(data) != self.byte_len:
            raise FieldError(f"expected {self.byte_len} bytes, got {len(data)}")
        v = int.from_bytes(data, "little")
        if v >= self.modulus:
            raise FieldError("non-canonical encoding (value >= modulus)")
        return v

    def decode_all(self, data: bytes) -> list[int]:
        n = self.byte_len
        if len(data) % n:
            raise FieldError("byte string is not a whole number of elements")
        return [self.decode(data[i:i + n]) for i in range(0, len(data), n)]

    def from_bytes(self, data: bytes) -> "FieldElement":
        return FieldElement(self.decode(data), self)

    def _check(self, other: "FieldConfig") -> None:
        if other is not self and other.modulus != self.modulus:
            raise FieldError(f"field mismatch: {self.name or self.modulus} vs {other.name or other.modulus}")


class FieldElement:
    """Immutable element of a prime field."""

    __slots__ = ("value", "config")

    def __init__(self, value: int, config: FieldConfig):
        if not 0 <= value < config.modulus:
            raise FieldError("value out of range; construct via FieldConfig(...)")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "config", config)

    def __setattr__(self, key, value):
        raise AttributeError("FieldElement is immutable")

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            self.config._check(other.config)
            return other.value
        if isinstance(other, int):
            return other % self.config.modulus
        return NotImplemented

    def _wrap(self, v: int) -> "FieldElement":
        return FieldElement(v % self.config.modulus, self.config)

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(o - self.value)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.value)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(pow(self.value, e, self.config.modulus), self.config)

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return NotImplemented
        return self * self._wrap(o).inverse()

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero")
        return FieldElement(pow(self.value, -1, self.config.modulus), self.config)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.value == other.value and self.config.modulus == other.config.modulus
        if isinstance(other, int):
            return self.value == other % self.config.modulus
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.config.modulus))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"FieldElement({self.value}, {self.config.name or self.config.modulus})"

    def to_bytes(self) -> bytes:
        return self.config.encode(self.value)


def arith(a: FieldElement, b: FieldElement, kind: str) -> FieldElement:
    if not isinstance(a, FieldElement) or not isinstance(b, FieldElement):
        raise TypeError("arith expects FieldElements")
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown op {kind!r}")


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def to_bytes(a: FieldElement) -> bytes:
    return a.to_bytes()


def from_bytes(data: bytes, config: FieldConfig) -> FieldElement:
    return config.from_bytes(data)


BN254 = FieldConfig(
    21888242871839275222246405745257275088548364400416034343698204186575808495617, "bn254"
)
GOLDILOCKS = FieldConfig((1 << 64) - (1 << 32) + 1, "goldilocks")
TOY97 = FieldConfig(97, "toy97", toy=True)

FIELDS = {f.name: f for f in (BN254, GOLDILOCKS, TOY97)}


def get_field(name: str) -> FieldConfig:
    try:
        return FIELDS[name.lower()]
    except KeyError:
        raise FieldError(f"unknown field {name!r}; choose from {sorted(FIELDS)}") from None


def elements(config: FieldConfig, values: Sequence[int]) -> list[FieldElement]:
    return [config(v) for v in values]
