"""One synthetic epoch end to end: beacon state, per-block checks and distributed proofs."""

from __future__ import annotations

import json
import os
import random
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import beacon, distinct
from .circuit import accumulation_adder
from .cluster import (
    ClusterTopology,
    TrafficStats,
    dist_commit,
    dist_open,
    dist_sumcheck,
    plan_topology,
    split_pairs,
    verify_dist_open,
)
from .field import FieldConfig, get_field
from .gkr import gkr_prove, gkr_verify
from .mle import MultilinearTable, beta_values, eq_table, next_pow2
from .pcs import DEFAULT_QUERIES
from .sumcheck import RoundPolynomial, verify_product_sum
from .transcript import Transcript

FLAGS = ("distinct", "membership", "aggregation", "gkr", "sumcheck", "pcs")
HOOKS = ("dup-index", "flip-sibling", "perturb-round-poly", "mempool-overwrite")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """``validators`` is the number of validators signing each block."""

    field: str = "bn254"
    validators: int = 32
    blocks: int = 4
    depth: int = beacon.DEFAULT_DEPTH
    workers: int = 4
    clusters: int | None = None
    seed: int = 0
    queries: int = DEFAULT_QUERIES
    tamper: tuple[str, ...] = ()
    timings: bool = False
    report: str | None = None
    state_file: str | None = None

    def __post_init__(self) -> None:
        self.tamper = tuple(self.tamper)

    def validate(self) -> "RunConfig":
        try:
            get_field(self.field)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.validators < 1:
            raise ConfigError("validators must be >= 1")
        if self.blocks < 1:
            raise ConfigError("blocks must be >= 1")
        if self.validators * self.blocks > (1 << self.depth):
            raise ConfigError("validator set does not fit the tree depth")
        if self.queries < 1:
            raise ConfigError("queries must be >= 1")
        try:
            self.topology()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for hook in self.tamper:
            parse_hook(hook)
        return self

    def topology(self) -> ClusterTopology:
        return plan_topology(self.workers, self.clusters)

    def hooks_for(self, block: int) -> set[str]:
        out = set()
        for h in self.tamper:
            name, target = parse_hook(h)
            if target is None or target == block:
                out.add(name)
        return out


def parse_hook(text: str) -> tuple[str, int | None]:
    """``"name"`` hits every block, ``"name@b"`` only block ``b``."""
    name, _, at = text.partition("@")
    if name not in HOOKS:
        raise ConfigError(f"unknown tamper hook {name!r}; known: {', '.join(HOOKS)}")
    if not at:
        return name, None
    try:
        return name, int(at)
    except ValueError as exc:
        raise ConfigError(f"bad block number in hook {text!r}") from exc


@dataclass
class BlockWitness:
    block: int
    indexes: list[int]
    paths: list[beacon.MembershipPath]
    chain: list[beacon.AggStep]
    h_pre: int


@dataclass
class BlockResult:
    block: int
    accept: dict[str, bool]
    h_cur: str
    notes: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return all(self.accept.values())


@dataclass
class EpochReport:
    accept_flags: list[dict]
    final_h_cur: str
    traffic: dict
    proof_sizes: dict
    timings: dict

    @property
    def all_accepted(self) -> bool:
        return all(all(b["accept"].values()) for b in self.accept_flags)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def write(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.to_json() + "\n")


def _shares_rows(values: list[int], n: int, width: int) -> list[list[int]]:
    return [values[i * width:(i + 1) * width] for i in range(n)]


class _Epoch:
    def __init__(self, cfg: RunConfig) -> None:
        self.cfg = cfg.validate()
        self.field: FieldConfig = get_field(cfg.field)
        self.topo = cfg.topology()
        self.stats = TrafficStats()
        self.sizes = {"commitment": 0, "openings": 0, "sumcheck": 0, "gkr": 0}
        self.times: dict[str, float] = {}

    def _timed(self, name: str, fn, *args):
        t0 = time.perf_counter()
        out = fn(*args)
        self.times[name] = self.times.get(name, 0.0) + time.perf_counter() - t0
        return out

    def blocks(self, validators: list[beacon.ValidatorRecord]) -> list[list[int]]:
        order = list(range(len(validators)))
        random.Random(self.cfg.seed + 1).shuffle(order)
        v = self.cfg.validators
        return [order[b * v:(b + 1) * v] for b in range(self.cfg.blocks)]

    # -- per-block checks ----------------------------------------------------------

    def check_distinct(self, block: list[int], hooks: set[str], accepted: list[int], h_pre: int, n_max: int) -> bool:
        if "dup-index" in hooks and len(block) > 1:
            block = block[:]
            block[1] = block[0]
        elif "dup-index" in hooks and accepted:
            block = [accepted[0]]
        f = self.field
        if distinct.ah(accepted, f).value != h_pre:
            return False
        if any(not 0 <= e <= n_max for e in block):
            return False
        combined = accepted + block
        return distinct.pairwise_distinct_check(combined, sorted(combined), f) == 1

    def check_membership(self, tree, validators, indexes, hooks) -> tuple[bool, list]:
        paths = [beacon.prove_membership(tree, i) for i in indexes]
        if "flip-sibling" in hooks and paths and paths[0].siblings:
            s = bytearray(paths[0].siblings[0])
            s[0] ^= 1
            paths[0] = paths[0].with_sibling(0, bytes(s))
        ok = all(beacon.verify_membership(tree.root, validators[p.index], p) for p in paths)
        return ok, paths

    # -- distributed proofs ------------------------------------------------------

    def prove_block(self, b: int, keys: list[int], hooks: set[str]) -> dict[str, bool]:
        f, topo, q = self.field, self.topo, self.cfg.queries
        n = topo.n_workers
        width = max(2, next_pow2(-(-len(keys) // n)))
        table = keys + [0] * (n * width - len(keys))
        rows = _shares_rows(table, n, width)
        overwrite = None
        if "mempool-overwrite" in hooks:
            def overwrite(pool, c):
                if c == 0:
                    start, _ = pool.region(pool.members[-1])
                    pool.corrupt(start, f.encode((f.decode(pool.read_region(pool.members[-1])[:f.byte_len]) + 1) % f.modulus))
        committed = self._timed("commit", dist_commit, topo, rows, f, self.stats, overwrite)
        self.sizes["commitment"] += committed.payload_bytes
        label = f"block-{b}"
        prover, verifier = Transcript(f, label), Transcript(f, label)
        for t in (prover, verifier):
            for com in committed.commitments:
                t.absorb(b"commitment", com.to_bytes())

        # GKR over an adder whose inputs are exactly the committed table
        circuit = accumulation_adder(len(table))
        gkr_proof = self._timed("gkr", gkr_prove, circuit, table, prover)
        self.sizes["gkr"] += len(gkr_proof.to_bytes())
        total = sum(keys) % f.modulus
        verdict = gkr_verify(circuit, [total], gkr_proof, verifier)
        gkr_ok = verdict.accept
        pcs_ok = True
        if gkr_ok:
            for claim in verdict.input_claims:
                acc = 0
                for coeff, point in zip(claim.coeffs, claim.points):
                    opened = dist_open(topo, committed, point, prover, q, self.stats)
                    self.sizes["openings"] += opened.payload_bytes(f)
                    if not verify_dist_open(topo, committed.commitments, point, opened, verifier, q):
                        pcs_ok = False
                    acc += coeff * opened.combined_value
                if acc % f.modulus != claim.value:
                    pcs_ok = False

        # sumcheck of V(x) * eq(z, x), whose sum is V(z)
        l = (len(table)).bit_length() - 1
        z_p, z_v = prover.challenges(l), verifier.challenges(l)
        at_z = dist_open(topo, committed, z_p, prover, q, self.stats)
        self.sizes["openings"] += at_z.payload_bytes(f)
        pcs_ok &= verify_dist_open(topo, committed.commitments, z_v, at_z, verifier, q)
        p = f.modulus
        v_table = MultilinearTable(f, tuple(table))
        eq_z = MultilinearTable(f, tuple(eq_table(z_p, p)))
        shares = split_pairs([(v_table, eq_z)], n)
        result = self._timed("sumcheck", dist_sumcheck, topo, shares, prover, self.stats)
        proof = result.proof
        if "perturb-round-poly" in hooks and proof.rounds:
            c = list(proof.rounds[0].coeffs)
            c[1] = (c[1] + 1) % p
            proof = proof.replace(rounds=(RoundPolynomial(tuple(c)),) + proof.rounds[1:])
        self.sizes["sumcheck"] += len(proof.to_bytes())
        # the claim is bound to the commitment by the opening at z
        pcs_ok &= at_z.combined_value == proof.claimed_sum
        sc = verify_product_sum(proof.claimed_sum, proof, verifier, num_vars=l)
        sc_ok = sc.accept
        if sc_ok:
            v_r, eq_r = sc.expected
            sc_ok = eq_r == beta_values(z_v, sc.final_point, p)
            at_r = dist_open(topo, committed, result.point, prover, q, self.stats)
            self.sizes["openings"] += at_r.payload_bytes(f)
            pcs_ok &= verify_dist_open(topo, committed.commitments, sc.final_point, at_r, verifier, q)
            pcs_ok &= at_r.combined_value == v_r
        return {"gkr": gkr_ok, "sumcheck": sc_ok, "pcs": bool(pcs_ok)}

    def run(self) -> EpochReport:
        cfg, f = self.cfg, self.field
        t0 = time.perf_counter()
        validators = beacon.gen_validators(cfg.validators * cfg.blocks, cfg.seed)
        tree = self._timed("tree", beacon.build_tree, validators, cfg.depth)
        n_max = len(validators)
        state = distinct.ChainState.empty(f)
        if cfg.state_file and Path(cfg.state_file).exists():
            state = distinct.ChainState.load(cfg.state_file, f)
        start = state
        accepted: list[int] = []
        results = []
        for b, block in enumerate(self.blocks(validators)):
            hooks = cfg.hooks_for(b)
            # the running hash covers earlier epochs too; only this epoch's part is re-derived
            h_pre = (state.h - start.h) % f.modulus
            flags = dict.fromkeys(FLAGS, True)
            flags["distinct"] = self.check_distinct(block, hooks, accepted, h_pre, n_max)
            indexes = sorted(block)
            flags["membership"], _ = self.check_membership(tree, validators, indexes, hooks)
            chain = beacon.aggregate_chain([validators[i] for i in indexes], f)
            flags["aggregation"] = beacon.check_chain_links(chain, f)
            keys = [s.key for s in chain]
            flags.update(self.prove_block(b, keys, hooks))
            if chain and flags["gkr"]:
                flags["aggregation"] &= chain[-1].out == sum(keys) % f.modulus
            res = BlockResult(b, flags, "")
            if res.accepted:
                state = distinct.chain_update(state, distinct.IndexList(tuple(indexes), n_max))
                accepted.extend(indexes)
            res.h_cur = state.to_hex()
            results.append(res)
        if cfg.state_file:
            state.save(cfg.state_file)
        if cfg.timings:
            self.times["total"] = time.perf_counter() - t0
        timings = {k: round(v, 6) for k, v in sorted(self.times.items())} if cfg.timings else {}
        report = EpochReport(
            accept_flags=[{"block": r.block, "accept": r.accept} for r in results],
            final_h_cur=state.to_hex(),
            traffic=self.stats.to_report(),
            proof_sizes={str(self.topo.n_clusters): dict(self.sizes)},
            timings=timings,
        )
        if cfg.report:
            report.write(cfg.report)
        return report


def run_epoch(cfg: RunConfig) -> EpochReport:
    return _Epoch(cfg).run()
