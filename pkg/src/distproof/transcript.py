"""Fiat-Shamir transcript over a running SHA-256 state."""

from __future__ import annotations

import hashlib
from typing import Iterable

from .field import FieldConfig, FieldElement


class Transcript:
    """Absorbs labelled byte strings and squeezes field challenges.

    Challenges are derived by rejection sampling: each attempt hashes the
    current state with an attempt counter, masks the 32-byte block to the
    modulus bit length, and retries while the value is out of range. The
    accepted challenge is absorbed back, so later challenges depend on it.
    """

    def __init__(self, field: FieldConfig, label: bytes | str = b"distproof") -> None:
        if isinstance(label, str):
            label = label.encode()
        self.field = field
        self._state = hashlib.sha256()
        self._squeezes = 0
        self.absorb(b"domain", label)
        self.absorb(b"modulus", field.modulus.to_bytes(field.byte_len, "little"))

    def absorb(self, label: bytes, data: bytes) -> None:
        self._state.update(len(label).to_bytes(4, "little") + label)
        self._state.update(len(data).to_bytes(8, "little") + data)

    def absorb_ints(self, label: bytes, values: Iterable[int]) -> None:
        self.absorb(label, self.field.encode_all(values))

    def absorb_element(self, label: bytes, value: int | FieldElement) -> None:
        self.absorb(label, self.field.encode(self.field.coerce(value)))

    def _block(self) -> bytes:
        h = self._state.copy()
        h.update(b"squeeze" + self._squeezes.to_bytes(8, "little"))
        self._squeezes += 1
        return h.digest()

    def challenge(self, label: bytes = b"challenge") -> int:
        p = self.field.modulus
        mask = (1 << p.bit_length()) - 1
        while True:
            v = int.from_bytes(self._block(), "little") & mask
            if v < p:
                break
        self.absorb(label, self.field.encode(v))
        return v

    def challenges(self, n: int, label: bytes = b"challenge") -> list[int]:
        return [self.challenge(label) for _ in range(n)]

    def challenge_indices(self, count: int, bound: int, label: bytes = b"indices") -> list[int]:
        """``min(count, bound)`` distinct indices in ``[0, bound)``, order of draw."""
        if bound < 1:
            raise ValueError("bound must be positive")
        mask = (1 << max(bound - 1, 1).bit_length()) - 1
        out: list[int] = []
        seen: set[int] = set()
        while len(out) < min(count, bound):
            v = int.from_bytes(self._block(), "little") & mask
            if v < bound and v not in seen:
                seen.add(v)
                out.append(v)
        self.absorb(label, b"".join(i.to_bytes(8, "little") for i in out))
        return out

    def fork(self, label: bytes | str) -> "Transcript":
        if isinstance(label, str):
            label = label.encode()
        t = Transcript.__new__(Transcript)
        t.field = self.field
        t._state = self._state.copy()
        t._squeezes = self._squeezes
        t.absorb(b"fork", label)
        return t

    def digest(self) -> bytes:
        return self._state.copy().digest()
