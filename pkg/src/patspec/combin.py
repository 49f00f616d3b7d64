"""Set partitions of [k], canonical words, and the even/symmetric classes.

Partitions are stored as restricted-growth strings (RGS): rgs[i] is the
0-based block label of element i+1, labels appear in first-use order.  A
partition of [k] is identified with a length-k word over 'a', 'b', ... by
mapping label r to chr(ord('a') + r); the first occurrence of each letter is
then automatically in alphabetical order.

Two block-level classes drive the limit moments:

    even       every block has even size
    symmetric  every block contains equally many odd and even elements

Symmetric implies even.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import CapacityError

#: Default cap on the ground-set size for exhaustive enumeration.
#: Bell(10) = 115975; every unit above grows the work by roughly x4.
KCAP_DEFAULT = 10

_MAX_LETTERS = 26


@dataclass(frozen=True)
class Partition:
    """A set partition of {1, .., k} in restricted-growth form."""

    rgs: tuple[int, ...]

    def __post_init__(self):
        if not self.rgs:
            raise ValueError("empty ground set")
        seen = 0
        for r in self.rgs:
            if r > seen:
                raise ValueError(f"not a restricted growth string: {self.rgs}")
            seen = max(seen, r + 1)
        if self.rgs[0] != 0:
            raise ValueError(f"not a restricted growth string: {self.rgs}")

    @property
    def k(self) -> int:
        return len(self.rgs)

    @property
    def b(self) -> int:
        """Number of blocks."""
        return max(self.rgs) + 1

    def blocks(self) -> list[tuple[int, ...]]:
        """Blocks as sorted tuples of 1-based elements, in label order."""
        out: list[list[int]] = [[] for _ in range(self.b)]
        for pos, r in enumerate(self.rgs, start=1):
            out[r].append(pos)
        return [tuple(block) for block in out]

    def block_sizes(self) -> tuple[int, ...]:
        """Multiset of block sizes, sorted ascending."""
        counts = [0] * self.b
        for r in self.rgs:
            counts[r] += 1
        return tuple(sorted(counts))

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> "Partition":
        elems = sorted(x for blk in blocks for x in blk)
        k = len(elems)
        if elems != list(range(1, k + 1)):
            raise ValueError("blocks must partition {1..k} exactly")
        first_elem = sorted(range(len(blocks)), key=lambda idx: min(blocks[idx]))
        label = {}
        for new, idx in enumerate(first_elem):
            for x in blocks[idx]:
                label[x] = new
        return cls(tuple(label[x] for x in range(1, k + 1)))


def _partition_unchecked(rgs: tuple[int, ...]) -> Partition:
    # internal: skip __post_init__ validation for freshly generated strings
    p = object.__new__(Partition)
    object.__setattr__(p, "rgs", rgs)
    return p


def _iter_rgs(k: int, kcap: int) -> Iterator[tuple[int, ...]]:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > kcap:
        raise CapacityError(
            f"enumerate_partitions(k={k}) exceeds kcap={kcap}; "
            f"raise kcap explicitly to accept Bell({k}) work"
        )
    rgs = [0] * k
    maxes = [0] * k  # maxes[i] = 1 + max(rgs[:i+1])
    while True:
        yield tuple(rgs)
        # next RGS: rightmost position that can still grow
        i = k - 1
        while i > 0 and rgs[i] >= maxes[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        maxes[i] = max(maxes[i - 1], rgs[i])
        for j in range(i + 1, k):
            rgs[j] = 0
            maxes[j] = maxes[i]


def enumerate_partitions(k: int, kcap: int = KCAP_DEFAULT) -> Iterator[Partition]:
    """All partitions of [k] exactly once, in RGS (lexicographic) order."""
    for rgs in _iter_rgs(k, kcap):
        yield _partition_unchecked(rgs)


@dataclass(frozen=True)
class Classification:
    even: bool
    symmetric: bool


def classify(p: Partition) -> Classification:
    """Even/symmetric classification of a partition.

    A block is balanced when it holds as many odd as even elements; the
    partition is symmetric iff all blocks are balanced, even iff all block
    sizes are even.  Balanced blocks have even size, so symmetric => even.
    """
    b = p.b
    size = [0] * b
    odd = [0] * b
    for pos, r in enumerate(p.rgs, start=1):
        size[r] += 1
        odd[r] += pos & 1
    even = all(s % 2 == 0 for s in size)
    symmetric = all(2 * o == s for o, s in zip(odd, size))
    return Classification(even=even, symmetric=symmetric)


def word_of(p: Partition) -> str:
    """Canonical word of a partition (same letter = same block)."""
    if p.b > _MAX_LETTERS:
        raise ValueError(f"more than {_MAX_LETTERS} blocks")
    return "".join(chr(ord("a") + r) for r in p.rgs)


def is_canonical_word(w: str) -> bool:
    seen = 0
    for ch in w:
        r = ord(ch) - ord("a")
        if r < 0 or r > seen or r >= _MAX_LETTERS:
            return False
        seen = max(seen, r + 1)
    return bool(w)


def partition_of(w: str) -> Partition:
    """Partition encoded by a word; non-canonical words are normalised with a
    warning (letters relabelled in first-occurrence order), never silently."""
    if not w or not w.isalpha() or not w.islower():
        raise ValueError(f"word must be a nonempty lowercase letter string, got {w!r}")
    if not is_canonical_word(w):
        warnings.warn(f"word {w!r} is not canonical; normalising letter labels")
    label: dict[str, int] = {}
    rgs = []
    for ch in w:
        if ch not in label:
            label[ch] = len(label)
        rgs.append(label[ch])
    return Partition(tuple(rgs))


def multiplicative_extension(c: Sequence[float], p: Partition) -> float:
    """Product over blocks of c[|block|]; c is 1-indexed (c[0] unused)."""
    out = 1.0
    for size in p.block_sizes():
        if size >= len(c):
            raise IndexError(
                f"constant sequence defined up to order {len(c) - 1}, block of size {size} requested"
            )
        out *= c[size]
    return out


def a_coefficient(order: int) -> float:
    """Block weight for the symmetric-circulant limit: C(2n, n)/2 at order 2n.

    Computed from the exact integer binomial; the float result is exact for
    orders small enough that C(2n, n) fits in 53 bits (order <= 56).
    """
    if order < 2 or order % 2 != 0:
        raise ValueError(f"order must be a positive even integer, got {order}")
    return math.comb(order, order // 2) / 2.0


@dataclass(frozen=True)
class ClassCounts:
    k: int
    total: int
    even: int
    symmetric: int
    even_by_blocks: dict[int, int]
    symmetric_by_blocks: dict[int, int]

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "total_partitions": self.total,
            "even": self.even,
            "symmetric": self.symmetric,
            "even_by_blocks": {str(b): v for b, v in sorted(self.even_by_blocks.items())},
            "symmetric_by_blocks": {
                str(b): v for b, v in sorted(self.symmetric_by_blocks.items())
            },
        }


def class_counts(k: int, kcap: int = KCAP_DEFAULT) -> ClassCounts:
    """Exhaustive |P(k)|, |E(k)|, |S(k)| and the per-block-count tables."""
    total = 0
    even_by: dict[int, int] = {}
    sym_by: dict[int, int] = {}
    for rgs in _iter_rgs(k, kcap):
        total += 1
        b = max(rgs) + 1
        size = [0] * b
        odd = [0] * b
        for pos, r in enumerate(rgs, start=1):
            size[r] += 1
            odd[r] += pos & 1
        if all(s % 2 == 0 for s in size):
            even_by[b] = even_by.get(b, 0) + 1
            if all(2 * o == s for o, s in zip(odd, size)):
                sym_by[b] = sym_by.get(b, 0) + 1
    return ClassCounts(
        k=k,
        total=total,
        even=sum(even_by.values()),
        symmetric=sum(sym_by.values()),
        even_by_blocks=even_by,
        symmetric_by_blocks=sym_by,
    )
