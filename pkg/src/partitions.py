"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

Block = Tuple[int, ...]
Joinable = Callable[[int, int], bool]


def catalan(n: int) -> int:
    """Return the n-th Catalan number."""
    if n < 0:
        raise ValueError(f"Catalan number needs n >= 0, got {n}")
    return comb(2 * n, n) // (n + 1)


@dataclass(frozen=True)
class Partition:
    """A set partition of [n] kept in canonical form.

    Blocks are sorted by their least leg and legs ascend inside every block, so two
    partitions are equal exactly when their ``blocks`` tuples are equal.
    """

    n: int
    blocks: Tuple[Block, ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"Ground set size must be >= 0, got {self.n}")
        if any(len(block) == 0 for block in self.blocks):
            raise ValueError("Partition blocks must be non-empty")
        canonical = tuple(sorted((tuple(sorted(block)) for block in self.blocks), key=min))
        seen = [leg for block in canonical for leg in block]
        if sorted(seen) != list(range(1, self.n + 1)):
            raise ValueError(
                f"Blocks {list(map(list, self.blocks))} do not cover [1..{self.n}] exactly once"
            )
        object.__setattr__(self, "blocks", canonical)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], n: Optional[int] = None) -> "Partition":
        """Build a partition from any block listing; n defaults to the largest leg."""
        listed = [tuple(block) for block in blocks]
        if n is None:
            n = max((max(block) for block in listed if block), default=0)
        return cls(n, tuple(listed))

    @classmethod
    def empty(cls) -> "Partition":
        return cls(0, ())

    def __len__(self) -> int:
        return len(self.blocks)

    @cached_property
    def block_of(self) -> Dict[int, int]:
        """Map every leg to the index of its block."""
        return {leg: index for index, block in enumerate(self.blocks) for leg in block}

    @property
    def is_pair(self) -> bool:
        return all(len(block) == 2 for block in self.blocks)

    def to_json(self) -> List[List[int]]:
        return [list(block) for block in self.blocks]


@dataclass(frozen=True)
class LabeledPartition:
    """A partition together with one positive integer label per block.

    ``labels[b]`` belongs to ``partition.blocks[b]``.
    """

    partition: Partition
    labels: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.partition.blocks):
            raise ValueError(
                f"Expected {len(self.partition.blocks)} labels, got {len(self.labels)}"
            )
        if any(label < 1 for label in self.labels):
            raise ValueError(f"Labels must be positive integers, got {self.labels}")

    @classmethod
    def from_blocks(
        cls, blocks: Iterable[Iterable[int]], labels: Sequence[int], n: Optional[int] = None
    ) -> "LabeledPartition":
        """Label blocks in the order they are listed, then canonicalize."""
        listed = [tuple(sorted(block)) for block in blocks]
        if len(listed) != len(labels):
            raise ValueError(f"Expected {len(listed)} labels, got {len(labels)}")
        by_block = dict(zip(listed, labels))
        partition = Partition.from_blocks(listed, n)
        return cls(partition, tuple(by_block[block] for block in partition.blocks))

    @property
    def is_ordered(self) -> bool:
        """True when the labels are a bijection onto [|pi|]."""
        return sorted(self.labels) == list(range(1, len(self.labels) + 1))

    def label_of(self, block: int) -> int:
        return self.labels[block]

    def induced_sequence(self) -> Tuple[int, ...]:
        """The unique index sequence adapted to this labeled partition."""
        block_of = self.partition.block_of
        return tuple(self.labels[block_of[leg]] for leg in range(1, self.partition.n + 1))

    def to_json(self) -> Dict[str, List]:
        return {"blocks": self.partition.to_json(), "labels": list(self.labels)}


@dataclass(frozen=True)
class NestingForest:
    """Nearest-outer-block structure of a non-crossing partition.

    ``parent[b]`` is the index of the nearest outer block of block ``b`` or None
    for outer blocks.
    """

    partition: Partition
    parent: Tuple[Optional[int], ...]

    @cached_property
    def children(self) -> Tuple[Tuple[int, ...], ...]:
        kids: List[List[int]] = [[] for _ in self.parent]
        for block, parent in enumerate(self.parent):
            if parent is not None:
                kids[parent].append(block)
        return tuple(tuple(k) for k in kids)

    @property
    def roots(self) -> Tuple[int, ...]:
        return tuple(b for b, parent in enumerate(self.parent) if parent is None)

    def depth(self, block: int) -> int:
        depth = 0
        parent = self.parent[block]
        while parent is not None:
            depth += 1
            parent = self.parent[parent]
        return depth

    def root_to_leaf_paths(self) -> List[Tuple[int, ...]]:
        """Every maximal chain of blocks, listed outermost first."""
        paths: List[Tuple[int, ...]] = []
        stack = [(root,) for root in reversed(self.roots)]
        while stack:
            path = stack.pop()
            kids = self.children[path[-1]]
            if not kids:
                paths.append(path)
            stack.extend(path + (kid,) for kid in reversed(kids))
        return paths


def is_non_crossing(p: Partition) -> bool:
    """Check that no two blocks interleave as l1 < l1' < l2 < l2'.

    Single left-to-right scan: a leg of an already open block must belong to the
    innermost open block.
    """
    open_blocks: List[int] = []
    for leg in range(1, p.n + 1):
        index = p.block_of[leg]
        block = p.blocks[index]
        if leg != block[0]:
            if not open_blocks or open_blocks[-1] != index:
                return False
            if leg == block[-1]:
                open_blocks.pop()
        elif len(block) > 1:
            open_blocks.append(index)
    return True


def nesting_forest(p: Partition) -> NestingForest:
    """Compute the nearest outer block of every block of a non-crossing partition."""
    if not is_non_crossing(p):
        raise ValueError(f"Nesting forest needs a non-crossing partition, got {p.to_json()}")
    parent: List[Optional[int]] = [None] * len(p.blocks)
    open_blocks: List[int] = []
    for leg in range(1, p.n + 1):
        index = p.block_of[leg]
        block = p.blocks[index]
        if leg == block[0]:
            parent[index] = open_blocks[-1] if open_blocks else None
            if len(block) > 1:
                open_blocks.append(index)
        elif leg == block[-1]:
            open_blocks.pop()
    return NestingForest(p, tuple(parent))


def _first_block_choices(
    positions: Tuple[int, ...], joinable: Optional[Joinable]
) -> Iterator[Tuple[Block, List[Tuple[int, ...]]]]:
    """Yield each admissible block through positions[0] with the gaps it leaves."""
    first = positions[0]

    def grow(legs: Block, last: int, gaps: List[Tuple[int, ...]]):
        yield legs, gaps + [positions[last + 1:]]
        for j in range(last + 1, len(positions)):
            if joinable is None or joinable(first, positions[j]):
                yield from grow(legs + (positions[j],), j, gaps + [positions[last + 1:j]])

    yield from grow((first,), 0, [])


def _nc_blocks(
    positions: Tuple[int, ...], joinable: Optional[Joinable] = None
) -> Iterator[Tuple[Block, ...]]:
    if not positions:
        yield ()
        return
    for legs, gaps in _first_block_choices(positions, joinable):
        pieces = [list(_nc_blocks(gap, joinable)) for gap in gaps if gap]
        for combo in itertools.product(*pieces):
            yield (legs,) + tuple(block for piece in combo for block in piece)


def enumerate_nc(n: int, joinable: Optional[Joinable] = None) -> Iterator[Partition]:
    """Yield every non-crossing partition of [n] once.

    ``joinable(p, q)`` restricts which legs may share a block with the least leg p;
    enumeration then walks only partitions refining that constraint.
    """
    if n < 0:
        raise ValueError(f"Ground set size must be >= 0, got {n}")
    for blocks in _nc_blocks(tuple(range(1, n + 1)), joinable):
        yield Partition(n, blocks)


def _nc_pair_blocks(positions: Tuple[int, ...]) -> Iterator[Tuple[Block, ...]]:
    if not positions:
        yield ()
        return
    for m in range(len(positions) // 2):
        head = (positions[0], positions[2 * m + 1])
        for inner in _nc_pair_blocks(positions[1:2 * m + 1]):
            for right in _nc_pair_blocks(positions[2 * m + 2:]):
                yield (head,) + inner + right


def enumerate_nc_pair(two_n: int) -> Iterator[Partition]:
    """Yield every non-crossing pair partition of [2n].

    Leg 1 is matched with leg 2m+2; the legs inside and to the right are paired
    recursively.
    """
    if two_n < 0 or two_n % 2:
        raise ValueError(f"Pair partitions need an even non-negative size, got {two_n}")
    for blocks in _nc_pair_blocks(tuple(range(1, two_n + 1))):
        yield Partition(two_n, blocks)


def _shifted(blocks: Iterable[Block], offset: int, n: int) -> Partition:
    return Partition(n, tuple(tuple(leg - offset for leg in block) for block in blocks))


def first_leg_split(pi: Partition) -> Tuple[Partition, Partition]:
    """Split a non-crossing pair partition as {1, 2m+2} + inner + right.

    Returns the inner part on [2m] and the right part on [n - 2m - 2], both relabeled
    to start at 1.
    """
    if not pi.is_pair or not is_non_crossing(pi):
        raise ValueError(f"Expected a non-crossing pair partition, got {pi.to_json()}")
    if pi.n == 0:
        raise ValueError("The empty partition has no first leg")
    close = pi.blocks[0][1]
    inner = [block for block in pi.blocks[1:] if block[0] < close]
    right = [block for block in pi.blocks[1:] if block[0] > close]
    return _shifted(inner, 1, close - 2), _shifted(right, close, pi.n - close)
