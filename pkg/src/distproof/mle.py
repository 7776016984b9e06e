"""Dense multilinear tables over the boolean hypercube.

Index convention, shared by every module: entry ``b`` holds the value at
``x`` with ``b = sum(x_k << (k - 1))``, so ``x_1`` is the least significant
bit and fixing the first variable pairs entries ``(2b, 2b + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .counters import OpCounter, tick
from .field import FieldConfig, FieldElement

Scalar = Union[int, FieldElement]


def log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"{n} is not a power of two")
    return n.bit_length() - 1


def next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class MultilinearTable:
    field: FieldConfig
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        log2_exact(len(self.values))

    @classmethod
    def from_values(cls, field: FieldConfig, values: Sequence[Scalar]) -> "MultilinearTable":
        return cls(field, tuple(field.coerce_all(values)))

    @classmethod
    def zeros(cls, field: FieldConfig, num_vars: int) -> "MultilinearTable":
        return cls(field, (0,) * (1 << num_vars))

    @property
    def num_vars(self) -> int:
        return len(self.values).bit_length() - 1

    @property
    def evals(self) -> list[FieldElement]:
        return [FieldElement(v, self.field) for v in self.values]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, b: int) -> FieldElement:
        return FieldElement(self.values[b], self.field)

    def fix_first_variable(self, r: Scalar) -> "MultilinearTable":
        return fix_first_variable(self, r)

    def evaluate(self, point: Sequence[Scalar]) -> FieldElement:
        return mle_eval(self, point)


def fold_values(values: Sequence[int], r: int, p: int) -> list[int]:
    """One bookkeeping-table halving on raw residues."""
    return [(values[i] + r * (values[i + 1] - values[i])) % p for i in range(0, len(values), 2)]


def fix_first_variable(t: MultilinearTable, r: Scalar, counter: OpCounter | None = None) -> MultilinearTable:
    if t.num_vars == 0:
        raise ValueError("cannot fix a variable of a 0-variable table")
    tick(counter, "table_touch", len(t.values))
    return MultilinearTable(t.field, tuple(fold_values(t.values, t.field.coerce(r), t.field.modulus)))


def eval_values(values: Sequence[int], point: Sequence[int], p: int) -> int:
    """Evaluate the multilinear extension of raw ``values`` at raw ``point``."""
    if len(values) != 1 << len(point):
        raise ValueError(f"point has {len(point)} coordinates, table needs {len(values).bit_length() - 1}")
    cur = list(values)
    for r in point:
        cur = [(cur[i] + r * (cur[i + 1] - cur[i])) % p for i in range(0, len(cur), 2)]
    return cur[0] % p


def mle_eval(t: MultilinearTable, point: Sequence[Scalar]) -> FieldElement:
    pt = t.field.coerce_all(point)
    return FieldElement(eval_values(t.values, pt, t.field.modulus), t.field)


def eq_table(point: Sequence[int], p: int) -> list[int]:
    """Table of beta(point, b) for every boolean b, in O(2^n)."""
    table = [1]
    for k, r in enumerate(point):
        one_minus = (1 - r) % p
        # new bit k is the most significant so far
        table = [v * one_minus % p for v in table] + [v * r % p for v in table]
    return table


def beta_values(x: Sequence[int], y: Sequence[int], p: int) -> int:
    if len(x) != len(y):
        raise ValueError("beta arguments differ in length")
    acc = 1
    for a, b in zip(x, y):
        acc = acc * ((1 - a) * (1 - b) + a * b) % p
    return acc


def beta_bits(x: Sequence[int], index: int, p: int) -> int:
    """beta(x, bits(index)) with bits little-endian."""
    acc = 1
    for k, a in enumerate(x):
        acc = acc * (a if (index >> k) & 1 else 1 - a) % p
    return acc


def beta_eval(field: FieldConfig, x: Sequence[Scalar], y: Sequence[Scalar]) -> FieldElement:
    return FieldElement(beta_values(field.coerce_all(x), field.coerce_all(y), field.modulus), field)


def bits_of(index: int, n: int) -> list[int]:
    return [(index >> k) & 1 for k in range(n)]
