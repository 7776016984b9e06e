import hashlib

import pytest

from distproof.beacon import (
    ZERO_LEAF,
    AggStep,
    BeaconError,
    ValidatorRecord,
    aggregate_chain,
    build_tree,
    check_chain_links,
    gen_validators,
    key_element,
    load_validators,
    naive_root,
    prove_membership,
    save_validators,
    verify_membership,
    zero_hash,
)
from distproof.counters import OpCounter
from distproof.field import BN254


def test_sha256_empty_string():
    assert hashlib.sha256(b"").hexdigest() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_zero_hash_recurrence():
    assert zero_hash(0) == hashlib.sha256(ZERO_LEAF).digest()
    for k in range(1, 60):
        assert zero_hash(k) == hashlib.sha256(zero_hash(k - 1) * 2).digest()


def test_gen_validators():
    assert gen_validators(16, 1) == gen_validators(16, 1)
    one = gen_validators(1, 5)
    assert len(one) == 1 and one[0].index == 0 and one[0].active
    a, b = gen_validators(1024, 1), gen_validators(1024, 2)
    assert len({v.pubkey for v in a}) == 1024
    assert {v.pubkey for v in a} != {v.pubkey for v in b}


def test_record_encoding():
    v = ValidatorRecord(3, bytes(range(48)))
    enc = v.encode()
    assert len(enc) == 64
    assert enc[48:56] == (3).to_bytes(8, "little") and enc[56] == 1 and enc[57:] == bytes(7)
    with pytest.raises(BeaconError):
        ValidatorRecord(0, b"short")


def test_empty_tree():
    assert build_tree([], 50).root == zero_hash(50)


def test_matches_naive_small():
    vals = gen_validators(3, 9)
    assert build_tree(vals, 4).root == naive_root(vals, 4)


def test_matches_naive_exhaustive():
    pool = gen_validators(256, 11)
    for depth in range(0, 9):
        for n in range(0, (1 << depth) + 1):
            assert build_tree(pool[:n], depth).root == naive_root(pool[:n], depth), (depth, n)


def test_overflow():
    with pytest.raises(BeaconError):
        build_tree(gen_validators(5, 1), 2)


def test_hash_count_bound():
    c = OpCounter()
    tree = build_tree(gen_validators(1 << 16, 1), 50, c)
    assert tree.hash_count <= (1 << 17) + 50
    assert tree.capacity == 1 << 16


def test_membership_small_tree():
    vals = gen_validators(20, 4)
    tree = build_tree(vals, 6)
    for v in vals:
        path = prove_membership(tree, v.index)
        assert path.length == 5
        assert verify_membership(tree.root, v, path)
    path = prove_membership(tree, 7)
    assert not verify_membership(tree.root, vals[8], path)
    for k in range(path.length):
        s = bytearray(path.siblings[k])
        s[0] ^= 0x80
        assert not verify_membership(tree.root, vals[7], path.with_sibling(k, bytes(s)))
    with pytest.raises(BeaconError):
        prove_membership(tree, 20)


@pytest.mark.parametrize("n,a", [(1 << 10, 10), (1 << 16, 16)])
def test_path_length(n, a):
    vals = gen_validators(n, 2)
    tree = build_tree(vals, 50)
    path = prove_membership(tree, n - 1)
    assert path.length == a
    assert verify_membership(tree.root, vals[-1], path)


def test_validator_file_roundtrip(tmp_path):
    vals = gen_validators(10, 3)
    save_validators(vals, tmp_path / "v.csv")
    assert load_validators(tmp_path / "v.csv") == vals


def test_aggregation_chain():
    vals = gen_validators(3, 8)
    one = aggregate_chain(vals[:1])
    assert one[-1].out == key_element(vals[0].pubkey)
    steps = aggregate_chain(vals)
    assert check_chain_links(steps)
    rev = sum(key_element(v.pubkey) for v in reversed(vals)) % BN254.modulus
    assert steps[-1].out == rev
    bad = list(steps)
    bad[1] = AggStep(bad[1].index, bad[1].prev, bad[1].key, (bad[1].out + 1) % BN254.modulus)
    assert not check_chain_links(bad)
    with pytest.raises(BeaconError):
        aggregate_chain([vals[1], vals[0]])
