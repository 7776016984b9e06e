"""Simulated worker/cluster runtime with byte-accurate traffic accounting."""

from .mempool import MempoolError, SharedMempool, mempool_write
from .runtime import (
    ClusterState,
    DistCommitResult,
    DistOpenResult,
    DistSumcheckResult,
    WorkerShare,
    dist_commit,
    dist_open,
    dist_sumcheck,
    split_pairs,
    verify_dist_open,
)
from .topology import ClusterTopology, TopologyError, plan_topology
from .transport import TrafficStats, Transport

__all__ = [
    "ClusterState", "ClusterTopology", "DistCommitResult", "DistOpenResult", "DistSumcheckResult",
    "MempoolError", "SharedMempool", "TopologyError", "TrafficStats", "Transport", "WorkerShare",
    "dist_commit", "dist_open", "dist_sumcheck", "mempool_write", "plan_topology", "split_pairs",
    "verify_dist_open",
]
