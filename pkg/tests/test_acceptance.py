"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""

import random
import time

import numpy as np
import pytest

from conftest import record_criterion
from distproof.beacon import build_tree, gen_validators, naive_root, prove_membership, verify_membership
from distproof.circuit import accumulation_adder, expand_accumulations, outputs, random_circuit
from distproof.cluster import (
    ClusterTopology,
    dist_commit,
    dist_open,
    dist_sumcheck,
    split_pairs,
    verify_dist_open,
)
from distproof.counters import OpCounter
from distproof.distinct import ChainState, IndexList, ah, bitchange_experiment, chain_update, pairwise_distinct_check
from distproof.field import BN254
from distproof.gkr import check_input_claims, gkr_prove, gkr_verify
from distproof.mle import MultilinearTable, mle_eval
from distproof.pcs import EvalMatrix
from distproof.pipeline import RunConfig, run_epoch
from distproof.sumcheck import RoundPolynomial, prove_product_sum, verify_product_sum
from distproof.transcript import Transcript

P = BN254.modulus


def rand_table(rng, l):
    return MultilinearTable(BN254, tuple(rng.randrange(P) for _ in range(1 << l)))


def test_criterion_01_zero_worker_to_worker_traffic():
    t0 = time.perf_counter()
    combos = [(n, k) for n in (2, 4, 8) for k in (1, 2, 4) if k <= n]
    w2w = {}
    accepted = True
    for n, k in combos:
        report = run_epoch(RunConfig(validators=32, blocks=4, workers=n, clusters=k, seed=n * 10 + k))
        w2w[(n, k)] = report.traffic["w2w"]
        accepted &= report.all_accepted
    elapsed = time.perf_counter() - t0
    ok = all(v == 0 for v in w2w.values()) and accepted and elapsed < 60
    record_criterion(1, "zero worker-to-worker bytes", ok,
                     f"{len(combos)} (N,K) runs, max w2w {max(w2w.values())}, all accepted {accepted}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_distributed_equals_local():
    rng = random.Random(2)
    same = 0
    for _ in range(20):
        l = rng.randint(3, 12)
        n = rng.choice([1, 2, 4, 8])
        pairs = [(rand_table(rng, l), rand_table(rng, l)) for _ in range(rng.randint(1, 2))]
        lt, dt = Transcript(BN254, "eq"), Transcript(BN254, "eq")
        local = prove_product_sum(pairs, lt)
        dist = dist_sumcheck(ClusterTopology(n, 1), split_pairs(pairs, n), dt)
        same += local.to_bytes() == dist.proof.to_bytes() and lt.digest() == dt.digest()
    record_criterion(2, "distributed sumcheck byte-identical to local", same == 20, f"{same}/20 identical")
    assert same == 20


def test_criterion_03_proof_size_grows_with_clusters():
    rng = random.Random(3)
    rows = [[rng.randrange(P) for _ in range(16)] for _ in range(8)]
    sizes = {k: dist_commit(ClusterTopology(8, k), rows, BN254).payload_bytes for k in (1, 2, 4)}
    ok = sizes[2] == 2 * sizes[1] and sizes[4] == 4 * sizes[1]
    record_criterion(3, "commitment payload scales with K", ok, f"bytes K=1/2/4: {sizes[1]}/{sizes[2]}/{sizes[4]}")
    assert ok


def test_criterion_04_combined_opening_equals_full_mle():
    rng = random.Random(4)
    results = {}
    for n in (1, 2, 4, 8):
        good = 0
        for _ in range(100):
            k = rng.choice([c for c in (1, 2, 4, 8) if c <= n])
            topo = ClusterTopology(n, k)
            width = rng.choice([1, 2, 4, 8])
            rows = [[rng.randrange(P) for _ in range(width)] for _ in range(n)]
            committed = dist_commit(topo, rows, BN254)
            r = [rng.randrange(P) for _ in range((width.bit_length() - 1) + topo.worker_vars)]
            res = dist_open(topo, committed, r, Transcript(BN254), queries=4)
            full = mle_eval(EvalMatrix.from_rows(BN254, rows).flat(), r).value
            good += res.combined_value == full and verify_dist_open(topo, committed.commitments, r, res,
                                                                    Transcript(BN254), queries=4)
        results[n] = good
    ok = all(v == 100 for v in results.values())
    record_criterion(4, "distributed opening equals full-table MLE", ok,
                     ", ".join(f"N={n}: {v}/100" for n, v in results.items()))
    assert ok


def mutate(proof, rng):
    """Change exactly one field element of the proof by a nonzero amount."""
    delta = rng.randrange(1, P)
    slots = ["claim"] + [("round", j, k) for j in range(len(proof.rounds)) for k in range(4)] + \
            [("final", i) for i in range(len(proof.final_evals))]
    slot = rng.choice(slots)
    if slot == "claim":
        return proof.replace(claimed_sum=(proof.claimed_sum + delta) % P)
    if slot[0] == "round":
        _, j, k = slot
        c = list(proof.rounds[j].coeffs)
        c[k] = (c[k] + delta) % P
        rounds = list(proof.rounds)
        rounds[j] = RoundPolynomial(tuple(c))
        return proof.replace(rounds=tuple(rounds))
    finals = list(proof.final_evals)
    finals[slot[1]] = (finals[slot[1]] + delta) % P
    return proof.replace(final_evals=tuple(finals))


def oracle_accepts(pairs, proof, claim):
    verdict = verify_product_sum(claim, proof, Transcript(BN254, "snd"))
    if not verdict.accept:
        return False
    flat = [t for pair in pairs for t in pair]
    return list(verdict.expected) == [mle_eval(t, verdict.final_point).value for t in flat]


def test_criterion_05_sumcheck_soundness_suite():
    rng = random.Random(5)
    t0 = time.perf_counter()
    honest = 0
    for _ in range(1000):
        l = rng.randint(1, 6)
        pairs = [(rand_table(rng, l), rand_table(rng, l))]
        proof = prove_product_sum(pairs, Transcript(BN254, "snd"))
        honest += oracle_accepts(pairs, proof, proof.claimed_sum)
    rejected = 0
    for _ in range(200):
        l = rng.randint(1, 6)
        pairs = [(rand_table(rng, l), rand_table(rng, l))]
        proof = prove_product_sum(pairs, Transcript(BN254, "snd"))
        rejected += not oracle_accepts(pairs, mutate(proof, rng), proof.claimed_sum)
    elapsed = time.perf_counter() - t0
    ok = honest == 1000 and rejected == 200 and elapsed < 120
    record_criterion(5, "sumcheck soundness and completeness", ok,
                     f"honest {honest}/1000 accepted, mutated {rejected}/200 rejected, {elapsed:.1f}s")
    assert ok


def test_criterion_06_gkr_completeness():
    rng = random.Random(6)
    verified = 0
    for _ in range(100):
        c = random_circuit(rng, rng.randint(1, 4), 256, max_nested=4)
        xs = [rng.randrange(P) for _ in range(c.input_size)]
        proof = gkr_prove(c, xs, Transcript(BN254))
        verdict = gkr_verify(c, outputs(c, xs, BN254), proof, Transcript(BN254))
        verified += verdict.accept and check_input_claims(c, verdict.input_claims, xs, BN254)
    adder = accumulation_adder(4)
    proof = gkr_prove(adder, [1, 2, 3, 4], Transcript(BN254))
    adder_ok = proof.outputs == (10,) and gkr_verify(adder, [10], proof, Transcript(BN254)).accept
    expanded = expand_accumulations(adder)
    expand_ok = expanded.depth == 2 and outputs(expanded, [1, 2, 3, 4], BN254) == [10]
    for _ in range(20):
        xs = [rng.randrange(P) for _ in range(4)]
        expand_ok &= outputs(expanded, xs, BN254) == outputs(adder, xs, BN254)
    ok = verified == 100 and adder_ok and expand_ok
    record_criterion(6, "GKR completeness on general circuits", ok,
                     f"{verified}/100 random circuits, four-number adder {adder_ok}, expansion {expand_ok}")
    assert ok


def test_criterion_07_avalanche():
    t0 = time.perf_counter()
    res = bitchange_experiment(1_000_000, BN254)
    elapsed = time.perf_counter() - t0
    body = res.probabilities[:-2]
    ok = bool(((body >= 0.4) & (body <= 0.6)).all()) and elapsed < 300
    record_criterion(7, "bit-change probability near one half", ok,
                     f"bits 0..{len(body) - 1} in [{body.min():.4f}, {body.max():.4f}], "
                     f"top two {res.probabilities[-2]:.4f}/{res.probabilities[-1]:.4f}, {elapsed:.1f}s")
    assert ok


def naive_has_duplicate(values):
    a = np.array(values, dtype=object)
    eq = a[:, None] == a[None, :]
    return bool(np.triu(eq, k=1).any())


def test_criterion_08_distinct_check_oracle():
    rng = random.Random(8)
    agree = 0
    within = 0
    for _ in range(1000):
        n = rng.randint(1, 1 << 10)
        xs = [rng.randrange(10 ** 6) for _ in range(n)]
        if rng.random() < 0.5 and n > 1:
            xs[rng.randrange(n)] = xs[rng.randrange(n)]
        c = OpCounter()
        verdict = pairwise_distinct_check(xs, sorted(xs), counter=c)
        agree += verdict == (0 if naive_has_duplicate(xs) else 1)
        within += c["compare"] <= 3 * n
    ok = agree == 1000 and within == 1000
    record_criterion(8, "distinct check agrees with all-pairs scan", ok,
                     f"{agree}/1000 agree, {within}/1000 within 3n comparisons")
    assert ok


def test_criterion_09_chaining_associativity():
    rng = random.Random(9)
    report = run_epoch(RunConfig(validators=32, blocks=32, workers=4, clusters=2, seed=9))
    pipeline_ok = report.all_accepted and report.final_h_cur == ChainState(ah(range(1024)).value).to_hex()
    n_max = 10 ** 6
    blocks = [[rng.randrange(n_max) for _ in range(32)] for _ in range(32)]
    one_shot = ah([e for b in blocks for e in b]).value
    perm_ok = True
    for _ in range(10):
        state = ChainState.empty()
        for b in rng.sample(blocks, len(blocks)):
            state = chain_update(state, IndexList(tuple(b), n_max))
        perm_ok &= state.h == one_shot
    ok = pipeline_ok and perm_ok
    record_criterion(9, "chained hash equals one-shot hash", ok,
                     f"32-block pipeline {pipeline_ok}, 10 block orders {perm_ok}")
    assert ok


def test_criterion_10_merkle_path_shortening():
    vals = gen_validators(1 << 16, 10)
    tree = build_tree(vals, 50)
    path = prove_membership(tree, 12345)
    length_ok = path.length == 16 and verify_membership(tree.root, vals[12345], path)
    pool = gen_validators(256, 11)
    checked = 0
    naive_ok = True
    for depth in range(0, 9):
        for n in range(0, (1 << depth) + 1):
            naive_ok &= build_tree(pool[:n], depth).root == naive_root(pool[:n], depth)
            checked += 1
    ok = length_ok and naive_ok
    record_criterion(10, "short membership paths, optimized root equals naive", ok,
                     f"path length {path.length} at depth 50, {checked} small trees match {naive_ok}")
    assert ok
