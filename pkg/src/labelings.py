"""
V-monotone Moments Engine
Copyright (c) 2024 Carlos Manzanedo Rueda (@cmanaha)

Licensed under the MIT License (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://opensource.org/licenses/MIT
"""

import itertools
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from partitions import (
    LabeledPartition,
    NestingForest,
    Partition,
    enumerate_nc,
    enumerate_nc_pair,
    is_non_crossing,
    nesting_forest,
)

IndexSequence = Sequence[int]

# (last label, already rising); None stands for the empty chain
ValleyState = Optional[Tuple[int, bool]]
_BROKEN = (-1, True)


def _push(state: ValleyState, label: int) -> Tuple[int, bool]:
    """Extend a valley by one label, returning _BROKEN when it stops being one."""
    if state is None:
        return (label, False)
    last, rising = state
    if label > last:
        return (label, True)
    if label < last and not rising:
        return (label, False)
    return _BROKEN


def _valley_state(seq: IndexSequence) -> ValleyState:
    state: ValleyState = None
    for label in seq:
        state = _push(state, label)
        if state is _BROKEN:
            break
    return state


def is_valley(seq: IndexSequence) -> bool:
    """True iff seq decreases strictly and then increases strictly."""
    return _valley_state(seq) is not _BROKEN


def extends_valley(seq: IndexSequence, i: int) -> bool:
    """True iff appending i to the valley seq still gives a valley."""
    state = _valley_state(seq)
    if state is _BROKEN:
        raise ValueError(f"{tuple(seq)} is not a valley sequence")
    return _push(state, i) is not _BROKEN


def cutoff(seq: IndexSequence) -> int:
    """Length of the longest valley prefix of seq."""
    if not seq:
        raise ValueError("cutoff needs a non-empty index sequence")
    if any(a == b for a, b in zip(seq, seq[1:])):
        raise ValueError(f"cutoff needs distinct neighbouring indices, got {tuple(seq)}")
    state: ValleyState = None
    for r, label in enumerate(seq):
        state = _push(state, label)
        if state is _BROKEN:
            return r
    return len(seq)


def is_adapted(lp: LabeledPartition, seq: IndexSequence) -> bool:
    """True iff seq is constant on every block and equals the block's label there."""
    if len(seq) != lp.partition.n:
        raise ValueError(
            f"Sequence of length {len(seq)} cannot be adapted to a partition of "
            f"[{lp.partition.n}]"
        )
    return all(
        seq[leg - 1] == label
        for block, label in zip(lp.partition.blocks, lp.labels)
        for leg in block
    )


def _forest(lp: LabeledPartition) -> NestingForest:
    if not is_non_crossing(lp.partition):
        raise ValueError(f"Labeling rules need a non-crossing partition, got {lp.to_json()}")
    return nesting_forest(lp.partition)


def _edges_satisfy(lp: LabeledPartition, ok: Callable[[int, int], bool]) -> bool:
    forest = _forest(lp)
    return all(
        ok(lp.labels[parent], lp.labels[child])
        for child, parent in enumerate(forest.parent)
        if parent is not None
    )


def is_v_monotone(lp: LabeledPartition) -> bool:
    """True iff the labels along every nesting chain form a valley.

    Maximal root-to-leaf chains suffice since valleys are closed under contiguous
    subsequences.
    """
    forest = _forest(lp)
    return all(
        is_valley([lp.labels[block] for block in path])
        for path in forest.root_to_leaf_paths()
    )


def is_monotone(lp: LabeledPartition) -> bool:
    """Each block carries a greater label than its nearest outer block."""
    return _edges_satisfy(lp, lambda parent, child: child > parent)


def is_anti_monotone(lp: LabeledPartition) -> bool:
    """Each block carries a smaller label than its nearest outer block."""
    return _edges_satisfy(lp, lambda parent, child: child < parent)


def is_free(lp: LabeledPartition) -> bool:
    """Each block carries a label different from its nearest outer block."""
    return _edges_satisfy(lp, lambda parent, child: child != parent)


class LabelingRule(str, Enum):
    """Labeling classes the combinatorial moment formula can sum over."""

    V_MONOTONE = "v-monotone"
    MONOTONE = "monotone"
    FREE = "free"

    def accepts(self, lp: LabeledPartition) -> bool:
        return _RULES[self](lp)


_RULES: Dict[LabelingRule, Callable[[LabeledPartition], bool]] = {
    LabelingRule.V_MONOTONE: is_v_monotone,
    LabelingRule.MONOTONE: is_monotone,
    LabelingRule.FREE: is_free,
}


def enumerate_adapted(
    seq: IndexSequence, rule: LabelingRule = LabelingRule.V_MONOTONE
) -> Iterator[LabeledPartition]:
    """Yield the non-crossing labeled partitions adapted to seq and accepted by rule.

    Adaptedness fixes every label, so only partitions whose blocks are constant on
    seq are walked. Equal neighbours may share a block or not.
    """
    values = tuple(seq)
    for partition in enumerate_nc(len(values), lambda p, q: values[p - 1] == values[q - 1]):
        lp = LabeledPartition(
            partition, tuple(values[block[0] - 1] for block in partition.blocks)
        )
        if rule.accepts(lp):
            yield lp


def enumerate_adapted_v(seq: IndexSequence) -> Iterator[LabeledPartition]:
    """Yield V(i_1, ..., i_n)."""
    return enumerate_adapted(seq, LabelingRule.V_MONOTONE)


def enumerate_onc(n: int) -> Iterator[LabeledPartition]:
    """Yield every ordered non-crossing partition of [n]."""
    for partition in enumerate_nc(n):
        for labels in itertools.permutations(range(1, len(partition) + 1)):
            yield LabeledPartition(partition, labels)


def enumerate_ov(n: int) -> Iterator[LabeledPartition]:
    """Yield OV(n), the V-monotone ordered non-crossing partitions."""
    return (lp for lp in enumerate_onc(n) if is_v_monotone(lp))


def count_ov(n: int) -> int:
    return sum(1 for _ in enumerate_ov(n))


def _ordered_valley_labelings(
    partition: Partition, enclosing: Optional[int] = None
) -> Iterator[Tuple[int, ...]]:
    """Depth-first search over bijective labelings keeping every chain a valley.

    Labels are doubled internally so that an enclosing half-integer label can be
    passed as the odd integer ``enclosing``.
    """
    forest = nesting_forest(partition)
    order: List[int] = []
    stack = list(reversed(forest.roots))
    while stack:
        block = stack.pop()
        order.append(block)
        stack.extend(reversed(forest.children[block]))

    size = len(partition)
    root_state: ValleyState = None if enclosing is None else _push(None, enclosing)
    states: List[ValleyState] = [None] * size
    labels = [0] * size
    used = [False] * (size + 1)

    def assign(position: int) -> Iterator[Tuple[int, ...]]:
        if position == size:
            yield tuple(labels)
            return
        block = order[position]
        parent = forest.parent[block]
        base = root_state if parent is None else states[parent]
        for label in range(1, size + 1):
            if used[label]:
                continue
            state = _push(base, 2 * label)
            if state is _BROKEN:
                continue
            used[label] = True
            states[block] = state
            labels[block] = label
            yield from assign(position + 1)
            used[label] = False

    yield from assign(0)


def _check_even(two_n: int) -> int:
    if two_n < 0 or two_n % 2:
        raise ValueError(f"Expected an even non-negative order, got {two_n}")
    return two_n // 2


def enumerate_ov2(two_n: int) -> Iterator[LabeledPartition]:
    """Yield OV²(2n), ordered V-monotone non-crossing pair partitions."""
    _check_even(two_n)
    for partition in enumerate_nc_pair(two_n):
        for labels in _ordered_valley_labelings(partition):
            yield LabeledPartition(partition, labels)


def count_ov2(two_n: int) -> int:
    return sum(1 for _ in enumerate_ov2(two_n))


def enumerate_ov2_k(two_n: int, k: int) -> Iterator[LabeledPartition]:
    """Yield the members of OV²(2n) that stay V-monotone under an enclosing block
    labeled k - 1/2."""
    n = _check_even(two_n)
    if not 1 <= k <= n + 1:
        raise ValueError(f"k must lie in [1, {n + 1}] for order {two_n}, got {k}")
    for partition in enumerate_nc_pair(two_n):
        for labels in _ordered_valley_labelings(partition, enclosing=2 * k - 1):
            yield LabeledPartition(partition, labels)


def count_ov2_k(two_n: int, k: int) -> int:
    return sum(1 for _ in enumerate_ov2_k(two_n, k))


def count_v_labelings(pi: Partition, N: int) -> int:
    """Number of V-monotone labelings of a non-crossing partition with labels in [N].

    Labels need not be distinct. Dynamic programme over the nesting forest keyed by
    the valley state reached at each block.
    """
    if N < 1:
        raise ValueError(f"Label range must be >= 1, got {N}")
    forest = nesting_forest(pi)

    @lru_cache(maxsize=None)
    def subtree(block: int, state: Tuple[int, bool]) -> int:
        total = 1
        for child in forest.children[block]:
            total *= below(child, state)
        return total

    @lru_cache(maxsize=None)
    def below(block: int, parent_state: ValleyState) -> int:
        count = 0
        for label in range(1, N + 1):
            state = _push(parent_state, label)
            if state is not _BROKEN:
                count += subtree(block, state)
        return count

    total = 1
    for root in forest.roots:
        total *= below(root, None)
    return total
