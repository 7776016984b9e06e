"""Binary SHA-256 Merkle trees over a power-of-two number of leaf digests."""

from __future__ import annotations

import hashlib
from typing import Sequence


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def hash_pair(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(left + right).digest()


class MerkleTree:
    def __init__(self, leaves: Sequence[bytes]) -> None:
        n = len(leaves)
        if n < 1 or n & (n - 1):
            raise ValueError("leaf count must be a power of two")
        self.levels: list[list[bytes]] = [list(leaves)]
        while len(self.levels[-1]) > 1:
            prev = self.levels[-1]
            self.levels.append([hash_pair(prev[i], prev[i + 1]) for i in range(0, len(prev), 2)])

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    def path(self, index: int) -> list[bytes]:
        out = []
        for level in self.levels[:-1]:
            out.append(level[index ^ 1])
            index >>= 1
        return out


def root_from_path(leaf: bytes, index: int, path: Sequence[bytes]) -> bytes:
    node = leaf
    for sibling in path:
        node = hash_pair(sibling, node) if index & 1 else hash_pair(node, sibling)
        index >>= 1
    return node


def verify_path(root: bytes, leaf: bytes, index: int, path: Sequence[bytes]) -> bool:
    if index < 0 or index >> len(path):
        return False
    return root_from_path(leaf, index, path) == root
