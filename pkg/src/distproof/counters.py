"""Operation counters used to assert asymptotic cost bounds in tests."""

from __future__ import annotations

from collections import Counter


class OpCounter:
    """Tally of named operations. Pass ``None`` where a counter is optional."""

    def __init__(self) -> None:
        self.counts: Counter[str] = Counter()

    def add(self, name: str, n: int = 1) -> None:
        self.counts[name] += n

    def __getitem__(self, name: str) -> int:
        return self.counts[name]

    def total(self) -> int:
        return sum(self.counts.values())

    def __repr__(self) -> str:
        return f"OpCounter({dict(self.counts)})"


def tick(counter: OpCounter | None, name: str, n: int = 1) -> None:
    if counter is not None:
        counter.counts[name] += n
