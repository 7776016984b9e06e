"""Permutation-invariant array hashing and the linear-time distinctness check."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .counters import OpCounter, tick
from .field import BN254, FieldConfig, FieldElement

HASH_OFFSET = 4294967295
HASH_ROUNDS = 3
CSV_NAME = "index-bit_change.csv"


def f_hash_int(e: int, p: int) -> int:
    r = 0
    for _ in range(HASH_ROUNDS):
        r = pow(r + e + HASH_OFFSET, 3, p)
    return r


def f_hash(e: int | FieldElement, field: FieldConfig = BN254) -> FieldElement:
    """Hash one element: three rounds of ``r <- (r + e + 2^32 - 1)^3`` starting at 0."""
    return field(f_hash_int(field.coerce(e), field.modulus))


def ah(values: Iterable[int | FieldElement], field: FieldConfig = BN254) -> FieldElement:
    """Array hash: the field sum of ``f_hash`` over the elements, so order never matters."""
    p = field.modulus
    total = 0
    for e in values:
        total += f_hash_int(field.coerce(e), p)
    return field(total % p)


@dataclass(frozen=True)
class IndexList:
    """Validator indexes together with the active-count bound they must respect."""

    indexes: tuple[int, ...]
    n_max: int

    def __post_init__(self) -> None:
        bad = [e for e in self.indexes if not 0 <= e <= self.n_max]
        if bad:
            raise ValueError(f"index {bad[0]} outside [0, {self.n_max}]")

    def __len__(self) -> int:
        return len(self.indexes)

    def __iter__(self):
        return iter(self.indexes)


def pairwise_distinct_check(a: Sequence[int | FieldElement], a_sorted: Sequence[int | FieldElement],
                            field: FieldConfig = BN254, counter: OpCounter | None = None) -> int:
    """Return 1 iff ``a_sorted`` is a strictly ascending permutation of ``a``.

    The permutation half is tested only through the array hash, and the
    ordering half with a single linear scan, so the work is O(n).
    """
    a = field.coerce_all(a)
    s = field.coerce_all(a_sorted)
    tick(counter, "compare")
    if len(a) != len(s):
        return 0
    if ah(a, field) != ah(s, field):
        return 0
    for prev, cur in zip(s, s[1:]):
        tick(counter, "compare")
        if not prev < cur:
            return 0
    return 1


def has_duplicates_naive(values: Sequence[int]) -> bool:
    """All-pairs reference scan."""
    n = len(values)
    return any(values[i] == values[j] for i in range(n) for j in range(i + 1, n))


@dataclass(frozen=True)
class ChainState:
    """Running array hash over every index of the blocks absorbed so far."""

    h: int
    field: FieldConfig = BN254

    @classmethod
    def empty(cls, field: FieldConfig = BN254) -> "ChainState":
        return cls(0, field)

    @property
    def value(self) -> FieldElement:
        return self.field(self.h)

    def to_hex(self) -> str:
        return self.field.encode(self.h).hex()

    @classmethod
    def from_hex(cls, text: str, field: FieldConfig = BN254) -> "ChainState":
        return cls(field.decode(bytes.fromhex(text.strip())), field)

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.to_hex() + "\n")

    @classmethod
    def load(cls, path: str | os.PathLike, field: FieldConfig = BN254) -> "ChainState":
        return cls.from_hex(Path(path).read_text(), field)


def chain_update(state: ChainState, block: IndexList | Sequence[int], n_max: int | None = None) -> ChainState:
    if not isinstance(block, IndexList):
        if n_max is None:
            raise ValueError("n_max is required for a plain index sequence")
        block = IndexList(tuple(block), n_max)
    elif n_max is not None and any(e > n_max for e in block):
        raise ValueError(f"index outside [0, {n_max}]")
    f = state.field
    return ChainState((state.h + ah(block, f).value) % f.modulus, f)


# -- avalanche experiment ---------------------------------------------------------

@dataclass
class BitChangeResult:
    count: int
    bits: int
    flips: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return self.flips / self.count

    def write_csv(self, path: str | os.PathLike) -> Path:
        path = Path(path)
        if path.is_dir():
            path = path / CSV_NAME
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "bit_change"])
            for i, prob in enumerate(self.probabilities):
                w.writerow([i, f"{prob:.6f}"])
        return path


def bitchange_experiment(count: int, field: FieldConfig = BN254, f: Callable[[int, int], int] | None = None,
                         chunk: int = 1 << 16, out: str | os.PathLike | None = None) -> BitChangeResult:
    """Per-bit probability that ``F(x+1) - F(x)`` has that bit set, for x in 1..count.

    Bits are taken little-endian from the canonical encoding of the
    difference. ``f`` replaces the hash (takes ``(x, p)``), for tests.
    """
    if count < 1:
        raise ValueError("count must be positive")
    f = f or f_hash_int
    p, width = field.modulus, field.byte_len
    flips = np.zeros(width * 8, dtype=np.int64)
    prev = f(1, p)
    x = 1
    while x <= count:
        n = min(chunk, count - x + 1)
        buf = bytearray()
        for _ in range(n):
            cur = f(x + 1, p)
            buf += ((cur - prev) % p).to_bytes(width, "little")
            prev = cur
            x += 1
        rows = np.frombuffer(bytes(buf), dtype=np.uint8).reshape(n, width)
        flips += np.unpackbits(rows, axis=1, bitorder="little").sum(axis=0, dtype=np.int64)
    result = BitChangeResult(count, field.bits, flips[: field.bits])
    if out is not None:
        result.write_csv(out)
    return result
