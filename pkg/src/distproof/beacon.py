"""Synthetic beacon-state tree: validator leaves, zero-subtree caching and short paths."""

from __future__ import annotations

import csv
import os
import random
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .counters import OpCounter, tick
from .field import BN254, FieldConfig
from .merkle import sha256

PUBKEY_LEN = 48
LEAF_LEN = 64
ZERO_LEAF = bytes(LEAF_LEN)
DEFAULT_DEPTH = 50


class BeaconError(ValueError):
    pass


@dataclass(frozen=True)
class ValidatorRecord:
    index: int
    pubkey: bytes
    active: bool = True

    def __post_init__(self) -> None:
        if len(self.pubkey) != PUBKEY_LEN:
            raise BeaconError(f"pubkey must be {PUBKEY_LEN} bytes")
        if self.index < 0:
            raise BeaconError("negative validator index")

    def encode(self) -> bytes:
        """64 bytes: pubkey, 8-byte little-endian index, one flag byte, zero padding."""
        return self.pubkey + self.index.to_bytes(8, "little") + bytes([int(self.active)]) + bytes(7)

    def leaf(self) -> bytes:
        return sha256(self.encode())


@lru_cache(maxsize=None)
def zero_hash(k: int) -> bytes:
    """Root of an all-empty subtree of height ``k``."""
    if k == 0:
        return sha256(ZERO_LEAF)
    z = zero_hash(k - 1)
    return sha256(z + z)


def gen_validators(n: int, seed: int) -> list[ValidatorRecord]:
    if n < 1:
        raise BeaconError("need at least one validator")
    rng = random.Random(seed)
    keys: set[bytes] = set()
    out = []
    while len(out) < n:
        pk = rng.randbytes(PUBKEY_LEN)
        if pk in keys:
            continue
        keys.add(pk)
        out.append(ValidatorRecord(len(out), pk))
    return out


def save_validators(validators: Iterable[ValidatorRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "pubkey", "active"])
        for v in validators:
            w.writerow([v.index, v.pubkey.hex(), int(v.active)])


def load_validators(path: str | os.PathLike) -> list[ValidatorRecord]:
    with open(path, newline="") as fh:
        return [ValidatorRecord(int(row["index"]), bytes.fromhex(row["pubkey"]), row["active"] not in ("0", "false", "False"))
                for row in csv.DictReader(fh)]


def _ceil_log2(n: int) -> int:
    return max(0, (n - 1).bit_length())


@dataclass
class BeaconTree:
    """Tree of height ``depth`` whose leaves past the active region are all empty.

    Only the left-aligned active subtree of capacity ``2**active_height`` is
    materialised; everything above it folds in cached empty-subtree roots.
    """

    depth: int
    validators: tuple[ValidatorRecord, ...]
    levels: list[list[bytes]]
    root: bytes
    hash_count: int

    @property
    def active_height(self) -> int:
        return len(self.levels) - 1

    @property
    def capacity(self) -> int:
        return 1 << self.active_height

    @property
    def root_hex(self) -> str:
        return self.root.hex()


def build_tree(validators: Sequence[ValidatorRecord], depth: int = DEFAULT_DEPTH,
               counter: OpCounter | None = None) -> BeaconTree:
    n = len(validators)
    if any(v.index != i for i, v in enumerate(validators)):
        raise BeaconError("validator indexes must be dense and start at 0")
    if n > (1 << depth):
        raise BeaconError(f"{n} validators overflow a depth-{depth} tree")
    counter = counter if counter is not None else OpCounter()
    start = counter["hash"]
    if n == 0:
        return BeaconTree(depth, (), [[zero_hash(0)]], zero_hash(depth), 0)
    a = _ceil_log2(n)
    level = [v.leaf() for v in validators] + [zero_hash(0)] * ((1 << a) - n)
    tick(counter, "hash", n)
    levels = [level]
    for k in range(a):
        nxt = []
        for i in range(0, len(level), 2):
            left, right = level[i], level[i + 1]
            if left == right == zero_hash(k):
                nxt.append(zero_hash(k + 1))
            else:
                nxt.append(sha256(left + right))
                tick(counter, "hash")
        level = nxt
        levels.append(level)
    node = level[0]
    for k in range(a, depth):
        node = sha256(node + zero_hash(k))
        tick(counter, "hash")
    return BeaconTree(depth, tuple(validators), levels, node, counter["hash"] - start)


def naive_root(validators: Sequence[ValidatorRecord], depth: int) -> bytes:
    """Hash every one of the ``2**depth`` leaves; only feasible for small depth."""
    if depth > 20:
        raise BeaconError("naive build is only for small trees")
    leaves = [sha256(v.encode()) for v in validators] + [sha256(ZERO_LEAF)] * ((1 << depth) - len(validators))
    while len(leaves) > 1:
        leaves = [sha256(leaves[i] + leaves[i + 1]) for i in range(0, len(leaves), 2)]
    return leaves[0]


@dataclass(frozen=True)
class MembershipPath:
    index: int
    leaf: bytes
    siblings: tuple[bytes, ...]
    depth: int

    @property
    def length(self) -> int:
        """Digests actually carried; the upper part is implied by the zero cache."""
        return len(self.siblings)

    def with_sibling(self, k: int, digest: bytes) -> "MembershipPath":
        s = list(self.siblings)
        s[k] = digest
        return MembershipPath(self.index, self.leaf, tuple(s), self.depth)


def prove_membership(tree: BeaconTree, index: int) -> MembershipPath:
    if not 0 <= index < len(tree.validators) or not tree.validators[index].active:
        raise BeaconError(f"validator {index} is not active")
    siblings = []
    i = index
    for level in tree.levels[:-1]:
        siblings.append(level[i ^ 1])
        i >>= 1
    return MembershipPath(index, tree.levels[0][index], tuple(siblings), tree.depth)


def verify_membership(root: bytes, record: ValidatorRecord, path: MembershipPath) -> bool:
    if record.index != path.index or record.leaf() != path.leaf or not record.active:
        return False
    a = len(path.siblings)
    if a > path.depth or path.index >> a:
        return False
    node = path.leaf
    for k, sib in enumerate(path.siblings):
        node = sha256(sib + node) if (path.index >> k) & 1 else sha256(node + sib)
    for k in range(a, path.depth):
        node = sha256(node + zero_hash(k))
    return node == root


# -- key aggregation chain --------------------------------------------------------

def key_element(pubkey: bytes, field: FieldConfig = BN254) -> int:
    """Stand-in group element for a public key: its digest reduced into the field."""
    return int.from_bytes(sha256(pubkey), "little") % field.modulus


@dataclass(frozen=True)
class AggStep:
    index: int
    prev: int
    key: int
    out: int


def aggregate_chain(validators: Sequence[ValidatorRecord], field: FieldConfig = BN254) -> list[AggStep]:
    """Fold keys one per step in validator-index order, each step feeding the next."""
    if any(a.index >= b.index for a, b in zip(validators, validators[1:])):
        raise BeaconError("keys must be sorted by strictly increasing validator index")
    p = field.modulus
    steps = []
    agg = 0
    for v in validators:
        key = key_element(v.pubkey, field)
        out = (agg + key) % p
        steps.append(AggStep(v.index, agg, key, out))
        agg = out
    return steps


def check_chain_links(steps: Sequence[AggStep], field: FieldConfig = BN254) -> bool:
    p = field.modulus
    prev = 0
    for s in steps:
        if s.prev != prev or s.out != (s.prev + s.key) % p:
            return False
        prev = s.out
    return prev == sum(s.key for s in steps) % p
