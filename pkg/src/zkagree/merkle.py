"""Fixed-depth incremental Merkle tree over ``hash_fields``."""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .crypto import hash_fields

TREE_DEPTH = 20
ZERO_VALUE = 0


class TreeFull(Exception):
    pass


class UnknownLeaf(LookupError):
    pass


@lru_cache(maxsize=None)
def zero_hashes(depth: int = TREE_DEPTH) -> tuple[int, ...]:
    """``zeros[i]`` is the root of an empty subtree of height ``i``."""
    zeros = [ZERO_VALUE]
    for _ in range(depth):
        zeros.append(hash_fields([zeros[-1], zeros[-1]]))
    return tuple(zeros)


def root_from_path(leaf: int, siblings: Sequence[int], dirs: Sequence[int]) -> int:
    """Fold ``leaf`` up the tree; ``dirs[i] == 1`` means the node is a right child."""
    node = leaf
    for sibling, bit in zip(siblings, dirs):
        node = hash_fields([sibling, node]) if bit else hash_fields([node, sibling])
    return node


class MerkleTree:
    """Append-only tree keeping every populated node so any leaf can be proven."""

    def __init__(self, depth: int = TREE_DEPTH) -> None:
        self.depth = depth
        self.zeros = zero_hashes(depth)
        self.levels: list[list[int]] = [[] for _ in range(depth + 1)]
        self.next_index = 0

    @property
    def capacity(self) -> int:
        return 1 << self.depth

    @property
    def root(self) -> int:
        top = self.levels[self.depth]
        return top[0] if top else self.zeros[self.depth]

    @property
    def leaves(self) -> list[int]:
        return list(self.levels[0])

    def _node(self, level: int, index: int) -> int:
        row = self.levels[level]
        return row[index] if index < len(row) else self.zeros[level]

    def insert(self, leaf: int) -> tuple[int, int]:
        """Append ``leaf``; returns ``(index, new_root)``."""
        if self.next_index >= self.capacity:
            raise TreeFull(f"tree of depth {self.depth} is full")
        index = self.next_index
        self.levels[0].append(leaf)
        node, pos = leaf, index
        for level in range(self.depth):
            if pos & 1:
                node = hash_fields([self._node(level, pos - 1), node])
            else:
                node = hash_fields([node, self.zeros[level]])
            pos >>= 1
            row = self.levels[level + 1]
            if pos < len(row):
                row[pos] = node
            else:
                row.append(node)
        self.next_index += 1
        return index, self.root

    def proof(self, index: int) -> tuple[list[int], list[int], int]:
        """``(siblings, dirs, root)`` for the leaf at ``index`` against the current root."""
        if not 0 <= index < self.next_index:
            raise UnknownLeaf(f"no leaf at index {index}")
        siblings, dirs = [], []
        pos = index
        for level in range(self.depth):
            siblings.append(self._node(level, pos ^ 1))
            dirs.append(pos & 1)
            pos >>= 1
        return siblings, dirs, self.root

    def copy(self) -> "MerkleTree":
        clone = MerkleTree.__new__(MerkleTree)
        clone.depth = self.depth
        clone.zeros = self.zeros
        clone.levels = [list(row) for row in self.levels]
        clone.next_index = self.next_index
        return clone

    @classmethod
    def from_leaves(cls, leaves: Sequence[int], depth: int = TREE_DEPTH) -> "MerkleTree":
        tree = cls(depth)
        for leaf in leaves:
            tree.insert(leaf)
        return tree
