"""Distributed sumcheck and cluster commitments over simulated workers.

Workers never address each other. In the sumcheck they talk only to the
master; for commitments they write rows into their cluster's shared
mempool and the cluster leader assembles them after the barrier.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..field import FieldConfig, FieldElement
from ..merkle import MerkleTree
from ..mle import MultilinearTable, eq_table, log2_exact
from ..pcs import DEFAULT_QUERIES, Commitment, EvalMatrix, Opening, _tree, open_at, verify_open
from ..sumcheck import ProductProver, RoundPolynomial, SumcheckError, SumcheckProof, run_rounds
from ..transcript import Transcript
from .mempool import SharedMempool
from .topology import ClusterTopology
from .transport import TrafficStats, Transport


@dataclass(frozen=True)
class WorkerShare:
    """Worker ``index``'s slice of every factor: ``f_k^(i)(x) = f_k(x, bits(i))``."""

    index: int
    pairs: tuple[tuple[MultilinearTable, MultilinearTable], ...]


def split_pairs(pairs: Sequence[tuple[MultilinearTable, MultilinearTable]], n_workers: int) -> list[WorkerShare]:
    """Cut full tables into per-worker shares along the high variables."""
    log2_exact(n_workers)
    shares = []
    for i in range(n_workers):
        cut = []
        for f, g in pairs:
            size = len(f) // n_workers
            if size < 1:
                raise SumcheckError("more workers than table entries")
            cut.append((MultilinearTable(f.field, f.values[i * size:(i + 1) * size]),
                        MultilinearTable(g.field, g.values[i * size:(i + 1) * size])))
        shares.append(WorkerShare(i, tuple(cut)))
    return shares


def _run(workers, fn, parallel: bool) -> None:
    if parallel and len(workers) > 1:
        with ThreadPoolExecutor(max_workers=len(workers)) as pool:
            list(pool.map(fn, workers))
    else:
        for w in workers:
            fn(w)


class _SumcheckWorker:
    def __init__(self, share: WorkerShare, field: FieldConfig, transport: Transport) -> None:
        self.id = share.index
        self.field = field
        self.transport = transport
        self.master = transport.topology.master
        self.prover = ProductProver([(f.values, g.values) for f, g in share.pairs], field.modulus)

    def send_total(self) -> None:
        self.transport.send(self.id, self.master, self.field.encode(self.prover.total()), "sumcheck")

    def send_round(self) -> None:
        self.transport.send(self.id, self.master, self.prover.round_poly().to_bytes(self.field), "sumcheck")

    def apply_challenge(self) -> None:
        r = self.field.decode(self.transport.recv_from(self.id, self.master))
        self.prover.fix(r)

    def send_finals(self) -> None:
        self.transport.send(self.id, self.master, self.field.encode_all(self.prover.finals()), "sumcheck")


@dataclass
class DistSumcheckResult:
    proof: SumcheckProof
    stats: TrafficStats
    point: list[int]


def dist_sumcheck(topology: ClusterTopology, shares: Sequence[WorkerShare], transcript: Transcript,
                  stats: TrafficStats | None = None, parallel: bool = False) -> DistSumcheckResult:
    """Product sumcheck over shares held by ``topology.n_workers`` workers.

    Produces exactly the proof a single machine would produce on the
    concatenated tables with the same transcript.
    """
    field = transcript.field
    p = field.modulus
    n = topology.n_workers
    if len(shares) != n or sorted(s.index for s in shares) != list(range(n)):
        raise SumcheckError("need exactly one share per worker")
    shares = sorted(shares, key=lambda s: s.index)
    shape = [(len(f), len(g)) for f, g in shares[0].pairs]
    if any([(len(f), len(g)) for f, g in s.pairs] != shape for s in shares):
        raise SumcheckError("inconsistent share dimensions")
    transport = Transport(topology, stats)
    workers = [_SumcheckWorker(s, field, transport) for s in shares]
    ids = [w.id for w in workers]
    master = topology.master
    local_vars = shares[0].pairs[0][0].num_vars

    _run(workers, _SumcheckWorker.send_total, parallel)
    claimed = sum(field.decode(m) for m in transport.collect(master, ids)) % p
    transcript.absorb_element(b"claim", claimed)

    rounds: list[RoundPolynomial] = []
    point: list[int] = []
    for _ in range(local_vars):
        _run(workers, _SumcheckWorker.send_round, parallel)
        coeffs = [0, 0, 0, 0]
        for msg in transport.collect(master, ids):
            for k, c in enumerate(field.decode_all(msg)):
                coeffs[k] += c
        poly = RoundPolynomial(tuple(c % p for c in coeffs))
        transcript.absorb(b"round", poly.to_bytes(field))
        r = transcript.challenge()
        rounds.append(poly)
        point.append(r)
        for w in ids:
            transport.send(master, w, field.encode(r), "sumcheck")
        _run(workers, _SumcheckWorker.apply_challenge, parallel)

    _run(workers, _SumcheckWorker.send_finals, parallel)
    finals = [field.decode_all(m) for m in transport.collect(master, ids)]
    n_pairs = len(shape)
    rebuilt = [([fin[2 * k] for fin in finals], [fin[2 * k + 1] for fin in finals]) for k in range(n_pairs)]
    tail = ProductProver(rebuilt, p)
    run_rounds(tail, topology.worker_vars, transcript, rounds, point)
    final_evals = tail.finals()
    transcript.absorb_ints(b"finals", final_evals)
    proof = SumcheckProof(field, claimed, tuple(rounds), tuple(final_evals))
    return DistSumcheckResult(proof, transport.stats, point)


# -- cluster commitments ---------------------------------------------------------

@dataclass
class ClusterState:
    """What a leader holds after assembling its cluster's mempool."""

    cluster: int
    matrix: EvalMatrix
    tree: MerkleTree
    commitment: Commitment
    mempool: SharedMempool


@dataclass
class DistCommitResult:
    topology: ClusterTopology
    commitments: list[Commitment]
    clusters: list[ClusterState]
    stats: TrafficStats

    @property
    def payload_bytes(self) -> int:
        return sum(len(c.to_bytes()) for c in self.commitments)


def _as_rows(field: FieldConfig, rows) -> list[tuple[int, ...]]:
    out = []
    for r in rows:
        if isinstance(r, MultilinearTable):
            out.append(r.values)
        elif isinstance(r, WorkerShare):
            out.append(r.pairs[0][0].values)
        else:
            out.append(tuple(field.coerce_all(r)))
    return out


def dist_commit(topology: ClusterTopology, rows, field: FieldConfig, stats: TrafficStats | None = None,
                before_assembly: Callable[[SharedMempool, int], None] | None = None,
                parallel: bool = False) -> DistCommitResult:
    """Each worker writes its evaluation row into its cluster mempool; each leader commits.

    ``rows[i]`` is worker ``i``'s row (a table, a share whose first factor is
    committed, or a plain sequence). ``before_assembly(pool, cluster)`` runs
    after the barrier and before the leader reads, for fault injection.
    """
    raw = _as_rows(field, rows)
    if len(raw) != topology.n_workers:
        raise ValueError("need exactly one row per worker")
    width = len(raw[0])
    if any(len(r) != width for r in raw):
        raise ValueError("ragged rows")
    transport = Transport(topology, stats)
    region = width * field.byte_len
    states = []
    for c in range(topology.n_clusters):
        members = topology.members(c)
        pool = SharedMempool(members, region, transport.stats, phase="commit")

        def write(w: int, pool=pool) -> None:
            start, _ = pool.region(w)
            pool.write(w, start, field.encode_all(raw[w]))
            pool.complete(w)

        _run(members, write, parallel)
        if before_assembly is not None:
            before_assembly(pool, c)
        leader = topology.leader(c)
        regions = pool.read_all(timeout=None if parallel else 0.0)
        matrix = EvalMatrix(field, tuple(tuple(field.decode_all(b)) for b in regions))
        tree = _tree(matrix)
        com = Commitment(tree.root, matrix.num_rows, matrix.row_len, field.name)
        transport.send(leader, topology.master, com.to_bytes(), "commit")
        states.append(ClusterState(c, matrix, tree, com, pool))
    roots = transport.collect(topology.master, [topology.leader(c) for c in range(topology.n_clusters)])
    commitments = [Commitment(r, s.commitment.num_rows, s.commitment.row_len, field.name) for r, s in zip(roots, states)]
    return DistCommitResult(topology, commitments, states, transport.stats)


@dataclass
class DistOpenResult:
    openings: list[Opening]
    cluster_values: list[int]
    combined_value: int
    stats: TrafficStats

    def payload_bytes(self, field: FieldConfig) -> int:
        return sum(len(o.to_bytes(field)) for o in self.openings)


def _split_for_clusters(topology: ClusterTopology, r: Sequence[int]) -> tuple[list[int], list[int]]:
    k_vars = topology.n_clusters.bit_length() - 1
    if k_vars == 0:
        return list(r), []
    return list(r[:-k_vars]), list(r[-k_vars:])


def dist_open(topology: ClusterTopology, committed: DistCommitResult, r: Sequence[int | FieldElement],
              transcript: Transcript, queries: int = DEFAULT_QUERIES,
              stats: TrafficStats | None = None) -> DistOpenResult:
    """Open the full polynomial at ``r``: K cluster openings plus a master-side beta combination."""
    field = transcript.field
    p = field.modulus
    point = field.coerce_all(r)
    width = committed.clusters[0].matrix.row_len
    expected = (width.bit_length() - 1) + topology.worker_vars
    if len(point) != expected:
        raise ValueError(f"point has {len(point)} coordinates, expected {expected}")
    transport = Transport(topology, stats if stats is not None else committed.stats)
    inner, outer = _split_for_clusters(topology, point)
    leaders = [topology.leader(c) for c in range(topology.n_clusters)]
    forks = [transcript.fork(f"cluster-{c}") for c in range(topology.n_clusters)]
    for lead in leaders:
        transport.send(topology.master, lead, field.encode_all(point), "open")
    openings = []
    for state, lead, fork in zip(committed.clusters, leaders, forks):
        at = field.decode_all(transport.recv_from(lead, topology.master))
        inner_at, _ = _split_for_clusters(topology, at)
        opening = open_at(state.matrix, inner_at, fork, queries, state.tree)
        transport.send(lead, topology.master, opening.to_bytes(field), "open")
        openings.append(opening)
    transport.collect(topology.master, leaders)
    values = [o.value for o in openings]
    beta = eq_table(outer, p)
    combined = sum(b * v for b, v in zip(beta, values)) % p
    transcript.absorb_ints(b"cluster-values", values)
    return DistOpenResult(openings, values, combined, transport.stats)


def verify_dist_open(topology: ClusterTopology, commitments: Sequence[Commitment], r: Sequence[int | FieldElement],
                     result: DistOpenResult, transcript: Transcript, queries: int = DEFAULT_QUERIES) -> bool:
    field = transcript.field
    p = field.modulus
    if len(commitments) != topology.n_clusters or len(result.openings) != topology.n_clusters:
        return False
    point = field.coerce_all(r)
    inner, outer = _split_for_clusters(topology, point)
    forks = [transcript.fork(f"cluster-{c}") for c in range(topology.n_clusters)]
    for com, opening, fork in zip(commitments, result.openings, forks):
        if not verify_open(com, inner, opening, fork, queries):
            return False
    values = [o.value for o in result.openings]
    if values != list(result.cluster_values):
        return False
    if sum(b * v for b, v in zip(eq_table(outer, p), values)) % p != result.combined_value:
        return False
    transcript.absorb_ints(b"cluster-values", values)
    return True
