import random

import numpy as np
import pytest

from distproof.counters import OpCounter
from distproof.distinct import (
    ChainState,
    IndexList,
    ah,
    bitchange_experiment,
    chain_update,
    f_hash,
    has_duplicates_naive,
    pairwise_distinct_check,
)
from distproof.field import BN254, GOLDILOCKS, TOY97

# frozen from an arbitrary-precision oracle: ((c^3 + c)^3 + c)^3 mod p with c = e + 2^32 - 1
F0_BN254 = 1073523316353959767041899164559407182558796233967617010940674283753464237929


def oracle(e, p):
    c = e + 4294967295
    return ((((c ** 3) + c) ** 3 + c) ** 3) % p


def test_f_hash_frozen_values():
    assert f_hash(0).value == F0_BN254
    assert [f_hash(e, TOY97).value for e in (1, 2, 3)] == [19, 19, 69]


def test_f_hash_matches_oracle(rng):
    for _ in range(50):
        e = rng.randrange(1 << 40)
        assert f_hash(e).value == oracle(e, BN254.modulus)
        assert f_hash(e, GOLDILOCKS).value == oracle(e, GOLDILOCKS.modulus)


def test_ah_basics(rng):
    assert ah([]).value == 0
    assert ah([3, 9]) == ah([9, 3])
    a, b, c = (rng.randrange(10 ** 6) for _ in range(3))
    assert ah([a, b, c]) == ah([a]) + ah([b, c])


def test_ah_permutation_invariance(rng):
    xs = [rng.randrange(10 ** 6) for _ in range(40)]
    target = ah(xs)
    for _ in range(1000):
        rng.shuffle(xs)
        assert ah(xs) == target


def test_distinct_check_examples():
    assert pairwise_distinct_check([2, 1], [1, 2]) == 1
    assert pairwise_distinct_check([1, 1], [1, 1]) == 0
    assert f_hash(2) != f_hash(3)
    assert pairwise_distinct_check([1, 2], [1, 3]) == 0
    assert pairwise_distinct_check([], []) == 1
    assert pairwise_distinct_check([5], [5]) == 1
    assert pairwise_distinct_check([1, 2], [1, 2, 3]) == 0


def test_distinct_check_uses_integer_order():
    # p - 1 is the largest residue, not "-1"
    big = BN254.modulus - 1
    assert pairwise_distinct_check([big, 0], [0, big]) == 1
    assert pairwise_distinct_check([big, 0], [big, 0]) == 0


def test_distinct_check_agrees_with_naive(rng):
    for _ in range(300):
        n = rng.randint(0, 64)
        xs = [rng.randrange(10 ** 6) for _ in range(n)]
        if n > 1 and rng.random() < 0.5:
            xs[rng.randrange(n)] = xs[rng.randrange(n)]
        c = OpCounter()
        verdict = pairwise_distinct_check(xs, sorted(xs), counter=c)
        assert verdict == (0 if has_duplicates_naive(xs) else 1)
        assert c["compare"] <= 3 * max(n, 1)


def test_second_preimage_smoke():
    rng = random.Random(42)
    n_max = 10 ** 6
    original = [rng.randrange(n_max + 1) for _ in range(8)]
    target = ah(original)
    key = sorted(original)
    for _ in range(100_000):
        other = [rng.randrange(n_max + 1) for _ in range(8)]
        if sorted(other) != key:
            assert ah(other) != target


def test_chain_associativity(rng):
    a, b = rng.randrange(100), rng.randrange(100)
    two = chain_update(chain_update(ChainState.empty(), [a], 100), [b], 100)
    assert two == chain_update(ChainState.empty(), [a, b], 100)
    s = chain_update(ChainState.empty(), [a], 100)
    assert chain_update(s, [], 100) == s


def test_chain_many_blocks(rng):
    n_max = 5000
    blocks = [[rng.randrange(n_max + 1) for _ in range(rng.randint(0, 40))] for _ in range(32)]
    state = ChainState.empty()
    for blk in blocks:
        state = chain_update(state, IndexList(tuple(blk), n_max))
    assert state.value == ah([e for blk in blocks for e in blk])


def test_chain_bound_enforced():
    with pytest.raises(ValueError):
        chain_update(ChainState.empty(), [11], 10)
    with pytest.raises(ValueError):
        IndexList((0, 11), 10)
    assert chain_update(ChainState.empty(), [10], 10).h == f_hash(10).value


def test_state_file_roundtrip(tmp_path):
    s = chain_update(ChainState.empty(), [1, 2, 3], 10)
    path = tmp_path / "state"
    s.save(path)
    assert ChainState.load(path) == s
    assert len(path.read_text().strip()) == 64


def test_bitchange_small_run(tmp_path):
    res = bitchange_experiment(10_000, out=tmp_path)
    probs = res.probabilities
    assert len(probs) == BN254.bits
    assert ((probs >= 0) & (probs <= 1)).all()
    assert ((probs[:-2] >= 0.35) & (probs[:-2] <= 0.65)).all()
    lines = (tmp_path / "index-bit_change.csv").read_text().splitlines()
    assert lines[0] == "index,bit_change"
    assert len(lines) == BN254.bits + 1
    assert lines[1].startswith("0,")


def test_bitchange_constant_function():
    res = bitchange_experiment(100, f=lambda x, p: 7)
    assert res.probabilities[0] == 0
    assert not res.flips.any()


def test_bitchange_identity_function():
    # d = 1 every time: only bit 0 flips
    res = bitchange_experiment(100, GOLDILOCKS, f=lambda x, p: x)
    assert res.probabilities[0] == 1 and not res.flips[1:].any()


def test_bitchange_rejects_zero():
    with pytest.raises(ValueError):
        bitchange_experiment(0)
