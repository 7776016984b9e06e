from __future__ import annotations

import threading
from collections import defaultdict, deque
from dataclasses import dataclass, field

from .topology import ClusterTopology

W2W = "w2w"
W2M = "w2m"
M2W = "m2w"
MEMPOOL = "mempool"
KINDS = (W2W, W2M, M2W, MEMPOOL)


@dataclass
class TrafficStats:
    """Byte counters. Self-addressed messages (worker 0 talking to itself as master) are not traffic."""

    worker_to_worker_bytes: int = 0
    worker_to_master_bytes: int = 0
    master_to_worker_bytes: int = 0
    mempool_bytes_written: int = 0
    phases: dict[str, dict[str, int]] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    _ATTR = {W2W: "worker_to_worker_bytes", W2M: "worker_to_master_bytes",
             M2W: "master_to_worker_bytes", MEMPOOL: "mempool_bytes_written"}

    def record(self, kind: str, nbytes: int, phase: str) -> None:
        if nbytes < 0:
            raise ValueError("negative byte count")
        attr = self._ATTR[kind]
        with self._lock:
            setattr(self, attr, getattr(self, attr) + nbytes)
            bucket = self.phases.setdefault(phase, dict.fromkeys(KINDS, 0))
            bucket[kind] += nbytes

    @property
    def message_bytes(self) -> int:
        return self.worker_to_worker_bytes + self.worker_to_master_bytes + self.master_to_worker_bytes

    def to_report(self) -> dict:
        return {
            W2W: self.worker_to_worker_bytes,
            W2M: self.worker_to_master_bytes,
            M2W: self.master_to_worker_bytes,
            MEMPOOL: self.mempool_bytes_written,
            "phases": {k: dict(v) for k, v in sorted(self.phases.items())},
        }


class Transport:
    """In-process message passing; every payload between distinct nodes goes through the meter."""

    def __init__(self, topology: ClusterTopology, stats: TrafficStats | None = None) -> None:
        self.topology = topology
        self.stats = stats if stats is not None else TrafficStats()
        self._queues: dict[int, deque[tuple[int, bytes]]] = defaultdict(deque)
        self._lock = threading.Lock()

    def classify(self, sender: int, receiver: int) -> str | None:
        if sender == receiver:
            return None
        if receiver == self.topology.master:
            return W2M
        if sender == self.topology.master:
            return M2W
        return W2W

    def send(self, sender: int, receiver: int, payload: bytes, phase: str) -> None:
        n = self.topology.n_workers
        if not (0 <= sender < n and 0 <= receiver < n):
            raise ValueError(f"unknown node in message {sender} -> {receiver}")
        kind = self.classify(sender, receiver)
        if kind is not None:
            self.stats.record(kind, len(payload), phase)
        with self._lock:
            self._queues[receiver].append((sender, bytes(payload)))

    def recv_from(self, receiver: int, sender: int) -> bytes:
        with self._lock:
            q = self._queues[receiver]
            for i, (s, data) in enumerate(q):
                if s == sender:
                    del q[i]
                    return data
        raise LookupError(f"no message from {sender} for {receiver}")

    def collect(self, receiver: int, senders: list[int]) -> list[bytes]:
        """One message from each sender, in the given sender order."""
        return [self.recv_from(receiver, s) for s in senders]

    def pending(self, receiver: int) -> int:
        with self._lock:
            return len(self._queues[receiver])
