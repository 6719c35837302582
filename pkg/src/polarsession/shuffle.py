"""Shufflings: order-preserving interleavings of several blocks.

A shuffling is stored as the block index of every output position, so the
relative order inside each block is implied by occurrence order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SizeGuardError, ValidationError

ENUMERATE_LIMIT = 14


@dataclass(frozen=True)
class Shuffling:
    block_sizes: tuple[int, ...]
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(self.block_sizes))
        object.__setattr__(self, "assignment", tuple(self.assignment))
        counts = [0] * len(self.block_sizes)
        for b in self.assignment:
            if not 0 <= b < len(self.block_sizes):
                raise ValidationError(f"block index {b} out of range")
            counts[b] += 1
        if counts != list(self.block_sizes):
            raise ValidationError(
                f"assignment {list(self.assignment)} does not match block sizes {list(self.block_sizes)}")

    @property
    def size(self) -> int:
        return len(self.assignment)

    def positions(self) -> list[list[int]]:
        """For each block, the output positions of its elements in order."""
        out: list[list[int]] = [[] for _ in self.block_sizes]
        for pos, b in enumerate(self.assignment):
            out[b].append(pos)
        return out


def identity(n: int) -> Shuffling:
    return Shuffling((n,), (0,) * n)


def count(blocks) -> int:
    """Multinomial coefficient (sum p)! / prod p!."""
    blocks = list(blocks)
    if any(p < 0 for p in blocks):
        raise ValidationError("block sizes must be nonnegative")
    total = math.factorial(sum(blocks))
    for p in blocks:
        total //= math.factorial(p)
    return total


def enumerate_shufflings(blocks, limit: int = ENUMERATE_LIMIT) -> list[Shuffling]:
    """All shufflings of the given blocks, lexicographic by assignment."""
    blocks = tuple(blocks)
    if any(p < 0 for p in blocks):
        raise ValidationError("block sizes must be nonnegative")
    if sum(blocks) > limit:
        raise SizeGuardError(f"refusing to enumerate {sum(blocks)} > {limit} elements")
    remaining = list(blocks)
    prefix: list[int] = []
    out: list[Shuffling] = []
    total = sum(blocks)

    def rec():
        if len(prefix) == total:
            out.append(Shuffling(blocks, tuple(prefix)))
            return
        for b, left in enumerate(remaining):
            if left:
                remaining[b] -= 1
                prefix.append(b)
                rec()
                prefix.pop()
                remaining[b] += 1

    rec()
    return out


def compose(outer: Shuffling, position: int, inner: Shuffling) -> Shuffling:
    """Substitute `inner` for block `position` of `outer`."""
    if not 0 <= position < len(outer.block_sizes):
        raise ValidationError(f"position {position} out of range")
    if inner.size != outer.block_sizes[position]:
        raise ValidationError(
            f"inner shuffling has {inner.size} elements, block {position} has {outer.block_sizes[position]}")
    k = len(inner.block_sizes)
    feed = iter(inner.assignment)
    assignment = []
    for b in outer.assignment:
        if b < position:
            assignment.append(b)
        elif b == position:
            assignment.append(position + next(feed))
        else:
            assignment.append(b + k - 1)
    blocks = outer.block_sizes[:position] + inner.block_sizes + outer.block_sizes[position + 1:]
    return Shuffling(blocks, tuple(assignment))


def factor(s: Shuffling, start: int, stop: int) -> tuple[Shuffling, Shuffling]:
    """Split off the contiguous block range [start, stop).

    Returns the unique (outer, inner) with compose(outer, start, inner) == s.
    """
    n = len(s.block_sizes)
    if not 0 <= start < stop <= n:
        raise ValidationError(f"grouping [{start}, {stop}) is not a nonempty block range of {n}")
    inner = Shuffling(s.block_sizes[start:stop],
                      tuple(b - start for b in s.assignment if start <= b < stop))
    width = stop - start
    outer_assign = []
    for b in s.assignment:
        if b < start:
            outer_assign.append(b)
        elif b < stop:
            outer_assign.append(start)
        else:
            outer_assign.append(b - width + 1)
    outer_blocks = s.block_sizes[:start] + (sum(s.block_sizes[start:stop]),) + s.block_sizes[stop:]
    return Shuffling(outer_blocks, tuple(outer_assign)), inner
