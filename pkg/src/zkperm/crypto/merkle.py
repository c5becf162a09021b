"""Fixed-depth binary Merkle trees over field-encoded digests.

Leaves and nodes are 32-byte big-endian field elements; a node is
``mimc_hash([left, right], iv=TAG_NODE)`` so paths can be recomputed
in-circuit. Unused leaves are padded with the all-zero digest.
"""

from __future__ import annotations

from dataclasses import dataclass

from zkperm.crypto.hashing import TAG_NODE, HashDigest, digest_as_field, field_to_digest, mimc_hash

ZERO_DIGEST = HashDigest(bytes(32))


class MerkleCapacityError(ValueError):
    pass


def node_hash(left: int, right: int) -> int:
    return mimc_hash([left, right], iv=TAG_NODE)


@dataclass(frozen=True)
class MerklePath:
    leaf_index: int
    # (sibling digest, sibling_is_left) from leaf level upwards
    siblings: tuple[tuple[HashDigest, bool], ...]

    def to_json(self) -> dict:
        return {
            "leaf_index": self.leaf_index,
            "siblings": [[s.hex(), int(left)] for s, left in self.siblings],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MerklePath":
        return cls(
            obj["leaf_index"],
            tuple((HashDigest(bytes.fromhex(s)), bool(left)) for s, left in obj["siblings"]),
        )


@dataclass(frozen=True)
class MerkleTree:
    depth: int
    leaves: tuple[HashDigest, ...]
    nodes: tuple[tuple[HashDigest, ...], ...]  # nodes[0] = leaves, nodes[depth] = (root,)

    @property
    def root(self) -> HashDigest:
        return self.nodes[-1][0]


def merkle_build(leaves: list[bytes], depth: int) -> MerkleTree:
    if depth < 1:
        raise ValueError("depth must be positive")
    if not 1 <= len(leaves) <= 1 << depth:
        raise MerkleCapacityError(f"{len(leaves)} leaves do not fit a depth-{depth} tree")
    level = [digest_as_field(leaf) for leaf in leaves]
    level += [0] * ((1 << depth) - len(level))
    levels = [level]
    for _ in range(depth):
        level = [node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        levels.append(level)
    nodes = tuple(tuple(field_to_digest(v) for v in lvl) for lvl in levels)
    return MerkleTree(depth, nodes[0], nodes)


def merkle_path(tree: MerkleTree, leaf_index: int) -> MerklePath:
    if not 0 <= leaf_index < 1 << tree.depth:
        raise IndexError(f"leaf index {leaf_index} out of range")
    siblings = []
    idx = leaf_index
    for level in tree.nodes[:-1]:
        sib = idx ^ 1
        siblings.append((level[sib], sib < idx))
        idx >>= 1
    return MerklePath(leaf_index, tuple(siblings))


def merkle_path_verify(root: bytes, leaf: bytes, path: MerklePath) -> int:
    try:
        cur = digest_as_field(leaf)
        for sib, sib_is_left in path.siblings:
            s = digest_as_field(sib)
            cur = node_hash(s, cur) if sib_is_left else node_hash(cur, s)
        return int(field_to_digest(cur) == bytes(root))
    except (ValueError, TypeError):
        return 0
