"""Order parameters, bitmask set algebra and the shared domain types.

Numbers are 1-based everywhere: bit ``i - 1`` of a mask represents the
number ``i``.  All sets of numbers from ``{1..36}`` are carried around as
36-bit integer masks, which keeps subset tests, unions and minima cheap in
both pure-Python code and the compiled kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

VALID_ORDERS = (3, 4, 5, 6)

MASK_HEX_DIGITS = 9  # 36 bits


class HexacountError(Exception):
    """Base class for all errors raised by this package."""


class EmptySetError(HexacountError, ValueError):
    """An operation that needs a nonempty set received an empty one."""


class InvalidOrderError(HexacountError, ValueError):
    """Square order outside the supported range."""


class InternalInvariantError(HexacountError, RuntimeError):
    """A runtime self-check failed; results must not be trusted."""


def check_order(n: int, even_only: bool = False) -> int:
    if n not in VALID_ORDERS:
        raise InvalidOrderError(f"order must be one of {VALID_ORDERS}, got {n}")
    if even_only and n % 2:
        raise InvalidOrderError(f"order {n} is odd; this operation needs an even order")
    return n


@dataclass(frozen=True)
class OrderParams:
    """Derived constants for one square order."""

    n: int

    @property
    def magic_constant(self) -> int:
        return self.n * (self.n * self.n + 1) // 2

    @property
    def half_rows(self) -> int:
        return self.n // 2

    @property
    def cells(self) -> int:
        return self.n * self.n

    @property
    def universe(self) -> int:
        return (1 << self.cells) - 1

    @property
    def half_sum(self) -> int:
        return self.half_rows * self.magic_constant

    @classmethod
    def for_order(cls, n: int) -> "OrderParams":
        return cls(check_order(n))


def min_mask(s: int) -> int:
    """Mask holding only the lowest set bit of ``s``.

    Comparing two results orders the underlying sets by minimal element,
    because a < b iff 2**a < 2**b.
    """
    if s == 0:
        raise EmptySetError("empty set has no minimum")
    return (s & (s - 1)) ^ s


def min_element(s: int) -> int:
    """Smallest member of ``s`` (1-based)."""
    if s == 0:
        raise EmptySetError("empty set has no minimum")
    return (s & -s).bit_length()


def set_sum(s: int) -> int:
    """Sum of the members encoded in mask ``s``."""
    total = 0
    while s:
        low = s & -s
        total += low.bit_length()
        s ^= low
    return total


def set_cardinality(s: int) -> int:
    return s.bit_count()


def mask_of(numbers) -> int:
    """Mask for an iterable of 1-based numbers (duplicates rejected)."""
    m = 0
    for x in numbers:
        if not 1 <= x <= 36:
            raise ValueError(f"number {x} outside 1..36")
        bit = 1 << (x - 1)
        if m & bit:
            raise ValueError(f"duplicate number {x}")
        m |= bit
    return m


def members_of(s: int) -> tuple[int, ...]:
    """Ascending tuple of the members encoded in mask ``s``."""
    out = []
    while s:
        low = s & -s
        out.append(low.bit_length())
        s ^= low
    return tuple(out)


def mask_to_hex(s: int) -> str:
    """Canonical 9-digit lowercase hex form of a 36-bit mask."""
    if not 0 <= s < (1 << 36):
        raise ValueError(f"mask {s:#x} does not fit in 36 bits")
    return format(s, "09x")


def mask_from_hex(text: str) -> int:
    s = int(text, 16)
    if not 0 <= s < (1 << 36):
        raise ValueError(f"mask {text!r} does not fit in 36 bits")
    return s


def mask_to_braces(s: int) -> str:
    """Human-readable ``{1,2,3}`` list form."""
    return "{" + ",".join(str(x) for x in members_of(s)) + "}"


@dataclass(frozen=True, order=True)
class NumberSet:
    """Immutable subset of {1..36} backed by a 36-bit mask.

    Total ordering is by raw mask value, which gives catalogs a canonical
    sort order.
    """

    bits: int

    def __post_init__(self) -> None:
        if not 0 <= self.bits < (1 << 36):
            raise ValueError(f"mask {self.bits:#x} does not fit in 36 bits")

    @classmethod
    def from_members(cls, numbers) -> "NumberSet":
        return cls(mask_of(numbers))

    @classmethod
    def from_hex(cls, text: str) -> "NumberSet":
        return cls(mask_from_hex(text))

    def members(self) -> tuple[int, ...]:
        return members_of(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, x: int) -> bool:
        return 1 <= x <= 36 and bool(self.bits >> (x - 1) & 1)

    def __and__(self, other: "NumberSet") -> "NumberSet":
        return NumberSet(self.bits & other.bits)

    def __or__(self, other: "NumberSet") -> "NumberSet":
        return NumberSet(self.bits | other.bits)

    def __sub__(self, other: "NumberSet") -> "NumberSet":
        return NumberSet(self.bits & ~other.bits)

    def sum(self) -> int:
        return set_sum(self.bits)

    def min_mask(self) -> "NumberSet":
        return NumberSet(min_mask(self.bits))

    def min(self) -> int:
        return min_element(self.bits)

    def hex(self) -> str:
        return mask_to_hex(self.bits)

    def __str__(self) -> str:
        return mask_to_braces(self.bits)


@dataclass(frozen=True)
class Series:
    """An n-subset of the universe whose members sum to the magic constant."""

    members: int  # mask
    order: int

    def __post_init__(self) -> None:
        params = OrderParams.for_order(self.order)
        if set_cardinality(self.members) != self.order:
            raise ValueError(
                f"series must have exactly {self.order} members, got {mask_to_braces(self.members)}"
            )
        if set_sum(self.members) != params.magic_constant:
            raise ValueError(
                f"series must sum to {params.magic_constant}, got {set_sum(self.members)}"
            )


@dataclass(frozen=True)
class Partition:
    """Ordered split of a half-set into n/2 disjoint series.

    ``rows`` are ordered by strictly increasing row minima; for the upper
    side the last row minimum additionally precedes the minimum of the
    complementary half-set.
    """

    rows: tuple[int, ...]  # masks
    side: str  # "upper" | "lower"
    order: int

    def __post_init__(self) -> None:
        if self.side not in ("upper", "lower"):
            raise ValueError(f"side must be 'upper' or 'lower', got {self.side!r}")
        params = OrderParams.for_order(self.order)
        union = 0
        for r in self.rows:
            Series(r, self.order)  # validates cardinality and sum
            if union & r:
                raise ValueError("partition rows must be pairwise disjoint")
            union |= r
        if len(self.rows) != params.half_rows:
            raise ValueError(f"partition needs {params.half_rows} rows")
        minima = [min_element(r) for r in self.rows]
        if any(a >= b for a, b in zip(minima, minima[1:])):
            raise ValueError("row minima must be strictly increasing")

    def union(self) -> int:
        u = 0
        for r in self.rows:
            u |= r
        return u


class SquareGrid:
    """An n x n arrangement of 1..n**2, each number used exactly once."""

    __slots__ = ("n", "cells")

    def __init__(self, cells) -> None:
        rows = tuple(tuple(int(x) for x in row) for row in cells)
        n = len(rows)
        if n not in VALID_ORDERS or any(len(r) != n for r in rows):
            raise ValueError("grid must be square with order in 3..6")
        flat = [x for row in rows for x in row]
        if sorted(flat) != list(range(1, n * n + 1)):
            raise ValueError(f"grid must be a permutation of 1..{n * n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "cells", rows)

    def __setattr__(self, name, value):
        raise AttributeError("SquareGrid is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, SquareGrid) and self.cells == other.cells

    def __hash__(self) -> int:
        return hash(self.cells)

    def __repr__(self) -> str:
        return f"SquareGrid({self.cells!r})"

    def row(self, i: int) -> tuple[int, ...]:
        return self.cells[i]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(self.cells[i][j] for i in range(self.n))

    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(r) for r in self.cells)

    def column_sums(self) -> tuple[int, ...]:
        return tuple(sum(self.column(j)) for j in range(self.n))

    def upper_half_mask(self) -> int:
        """Mask of the numbers in the top n/2 rows."""
        m = 0
        for i in range(self.n // 2):
            for x in self.cells[i]:
                m |= 1 << (x - 1)
        return m

    def to_text(self) -> str:
        """n lines of n space-separated integers."""
        width = len(str(self.n * self.n))
        return "\n".join(" ".join(f"{x:>{width}}" for x in row) for row in self.cells)

    @classmethod
    def from_text(cls, text: str) -> "SquareGrid":
        rows = [line.split() for line in text.strip().splitlines() if line.strip()]
        return cls([[int(x) for x in row] for row in rows])


@lru_cache(maxsize=None)
def order_params(n: int) -> OrderParams:
    return OrderParams.for_order(n)
