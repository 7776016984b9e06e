from __future__ import annotations

import math
from dataclasses import dataclass


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterTopology:
    """``n_workers`` split into ``n_clusters`` contiguous clusters of ``cluster_size``.

    Worker ``i`` belongs to cluster ``i // cluster_size``; the first worker of
    each cluster is its leader, and worker 0 doubles as the master.
    """

    n_workers: int
    n_clusters: int

    def __post_init__(self) -> None:
        if self.n_workers < 1 or self.n_workers & (self.n_workers - 1):
            raise TopologyError(f"worker count {self.n_workers} is not a power of two")
        if not 1 <= self.n_clusters <= self.n_workers or self.n_workers % self.n_clusters:
            raise TopologyError(f"{self.n_clusters} clusters do not divide {self.n_workers} workers")

    @property
    def cluster_size(self) -> int:
        return self.n_workers // self.n_clusters

    @property
    def master(self) -> int:
        return 0

    @property
    def worker_vars(self) -> int:
        return self.n_workers.bit_length() - 1

    def cluster_of(self, worker: int) -> int:
        return worker // self.cluster_size

    def leader(self, cluster: int) -> int:
        return cluster * self.cluster_size

    def members(self, cluster: int) -> list[int]:
        start = self.leader(cluster)
        return list(range(start, start + self.cluster_size))

    def is_recommended(self) -> bool:
        n = self.n_workers
        return n < 4 or math.log2(n) <= self.n_clusters <= math.isqrt(n)


def plan_topology(n_workers: int, n_clusters: int | None = None) -> ClusterTopology:
    """Build a topology; without ``n_clusters`` pick the smallest power of two >= log2(N), capped at sqrt(N)."""
    if n_workers < 1 or n_workers & (n_workers - 1):
        raise TopologyError(f"worker count {n_workers} is not a power of two")
    if n_clusters is None:
        lo = max(1, n_workers.bit_length() - 1)
        k = 1 << (lo - 1).bit_length()
        cap = 1 << (math.isqrt(n_workers).bit_length() - 1)
        n_clusters = max(1, min(k, cap))
    return ClusterTopology(n_workers, n_clusters)
