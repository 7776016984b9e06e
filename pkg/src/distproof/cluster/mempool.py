from __future__ import annotations

import threading
from typing import Sequence

from .transport import MEMPOOL, TrafficStats


class MempoolError(RuntimeError):
    pass


class SharedMempool:
    """Shared byte array with one fixed region per cluster member.

    Members write only inside their own region and then raise a completion
    flag; the leader reads after every flag is up. That barrier is the only
    synchronisation point.
    """

    def __init__(self, members: Sequence[int], region_size: int, stats: TrafficStats | None = None,
                 phase: str = "mempool") -> None:
        if region_size < 1:
            raise ValueError("region size must be positive")
        self.members = list(members)
        self._slot = {w: k for k, w in enumerate(self.members)}
        self.region_size = region_size
        self.data = bytearray(len(self.members) * region_size)
        self._done = [False] * len(self.members)
        self._cond = threading.Condition()
        self.stats = stats
        self.phase = phase

    def region(self, worker: int) -> tuple[int, int]:
        k = self._slot_of(worker)
        return k * self.region_size, (k + 1) * self.region_size

    def _slot_of(self, worker: int) -> int:
        try:
            return self._slot[worker]
        except KeyError:
            raise MempoolError(f"worker {worker} has no region in this mempool") from None

    def write(self, worker: int, offset: int, data: bytes) -> None:
        start, end = self.region(worker)
        if offset < start or offset + len(data) > end:
            raise MempoolError(f"region violation: worker {worker} wrote [{offset}, {offset + len(data)}) "
                               f"outside [{start}, {end})")
        with self._cond:
            if self._done[self._slot_of(worker)]:
                raise MempoolError(f"worker {worker} wrote after signalling completion")
            self.data[offset:offset + len(data)] = data
        if self.stats is not None:
            self.stats.record(MEMPOOL, len(data), self.phase)

    def complete(self, worker: int) -> None:
        k = self._slot_of(worker)
        with self._cond:
            if self._done[k]:
                raise MempoolError(f"worker {worker} signalled completion twice")
            self._done[k] = True
            self._cond.notify_all()

    def all_complete(self) -> bool:
        with self._cond:
            return all(self._done)

    def wait_all(self, timeout: float | None = None) -> None:
        with self._cond:
            if not self._cond.wait_for(lambda: all(self._done), timeout=timeout):
                missing = [w for w, d in zip(self.members, self._done) if not d]
                raise MempoolError(f"barrier not reached; waiting on {missing}")

    def read_region(self, worker: int) -> bytes:
        if not self.all_complete():
            raise MempoolError("leader read before every member completed")
        start, end = self.region(worker)
        return bytes(self.data[start:end])

    def read_all(self, timeout: float | None = 0.0) -> list[bytes]:
        self.wait_all(timeout)
        return [bytes(self.data[k * self.region_size:(k + 1) * self.region_size]) for k in range(len(self.members))]

    def reset(self) -> None:
        """Start a new phase: clear flags, keep contents."""
        with self._cond:
            self._done = [False] * len(self.members)

    def corrupt(self, offset: int, data: bytes) -> None:
        """Overwrite bytes behind the members' backs (fault injection only)."""
        self.data[offset:offset + len(data)] = data


def mempool_write(pool: SharedMempool, worker: int, offset: int, data: bytes) -> None:
    pool.write(worker, offset, data)
