"""Square predicates and transforms.

Covers the semi-magic / magic / panmagic predicates, the eight dihedral
symmetries, and the two normal forms used by the counting pipeline:

* canonical form: rows sorted by minimal element, then columns sorted by
  the sum of their upper half (ties broken by the top entry).  Defined for
  even orders; every canonical square stands for (n!)**2 squares.
* normalized form: 1 in the top-left corner, first row and first column
  ascending, transposed if needed so that cell (1,2) < cell (2,1).

``complement`` maps x to n**2+1-x; ``cn`` is normalize-after-complement,
an involution on normalized squares whose fixed points are the
self-complement squares.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import HexacountError, SquareGrid, order_params


class NotSemiMagicError(HexacountError, ValueError):
    """Canonical/normalized forms are defined only on semi-magic squares."""


def is_semi_magic(g: SquareGrid) -> bool:
    """True iff every row and column sums to the magic constant."""
    z = order_params(g.n).magic_constant
    return all(s == z for s in g.row_sums()) and all(s == z for s in g.column_sums())


def is_magic(g: SquareGrid) -> bool:
    """Semi-magic with both main diagonals summing to the magic constant."""
    if not is_semi_magic(g):
        return False
    n, z = g.n, order_params(g.n).magic_constant
    main = sum(g.cells[i][i] for i in range(n))
    anti = sum(g.cells[i][n - 1 - i] for i in range(n))
    return main == z and anti == z


def is_panmagic(g: SquareGrid) -> bool:
    """Magic with all 2(n-1) broken diagonals summing to the magic constant."""
    if not is_magic(g):
        return False
    n, z = g.n, order_params(g.n).magic_constant
    for k in range(1, n):
        down = sum(g.cells[i][(i + k) % n] for i in range(n))
        up = sum(g.cells[i][(k - i) % n] for i in range(n))
        if down != z or up != z:
            return False
    return True


@dataclass(frozen=True)
class DihedralElement:
    """One of the eight rotation/reflection symmetries of the square."""

    rotation: int  # quarter turns, 0..3
    reflect: bool  # transpose applied first

    def __post_init__(self) -> None:
        if self.rotation not in (0, 1, 2, 3):
            raise ValueError("rotation must be 0..3 quarter turns")

    def apply(self, g: SquareGrid) -> SquareGrid:
        cells = g.cells
        n = g.n
        if self.reflect:
            cells = tuple(tuple(cells[j][i] for j in range(n)) for i in range(n))
        for _ in range(self.rotation):
            # quarter turn clockwise
            cells = tuple(tuple(cells[n - 1 - j][i] for j in range(n)) for i in range(n))
        return SquareGrid(cells)


DIHEDRAL_ELEMENTS = tuple(
    DihedralElement(rotation=r, reflect=f) for f in (False, True) for r in range(4)
)


def dihedral_images(g: SquareGrid) -> list[SquareGrid]:
    return [sigma.apply(g) for sigma in DIHEDRAL_ELEMENTS]


def _require_semi_magic(g: SquareGrid, what: str) -> None:
    if not is_semi_magic(g):
        raise NotSemiMagicError(f"{what} is defined only on semi-magic squares")


def canonicalize(g: SquareGrid) -> SquareGrid:
    """Canonical form of a semi-magic square of even order.

    Rows are sorted ascending by their minimal element, then columns are
    sorted ascending by the sum of their upper n/2 entries, ties broken by
    the top entry.  Both sort keys are total, so the result is unique and
    the map is idempotent.
    """
    _require_semi_magic(g, "canonical form")
    n = g.n
    if n % 2:
        raise NotSemiMagicError("canonical form needs an even order (upper-half column sums)")
    h = n // 2
    rows = sorted(g.cells, key=min)
    cols = sorted(range(n), key=lambda j: (sum(rows[i][j] for i in range(h)), rows[0][j]))
    return SquareGrid(tuple(tuple(row[j] for j in cols) for row in rows))


def _normalize_pre_transpose(g: SquareGrid) -> SquareGrid:
    """Normalized form before the transpose rule is applied.

    1 is brought to the top-left corner, then rows are sorted by their
    first-column entry and columns by their first-row entry.
    """
    _require_semi_magic(g, "normalized form")
    n = g.n
    r1, c1 = next((i, j) for i in range(n) for j in range(n) if g.cells[i][j] == 1)
    row_order = sorted(range(n), key=lambda i: g.cells[i][c1])
    col_order = sorted(range(n), key=lambda j: g.cells[r1][j])
    return SquareGrid(tuple(tuple(g.cells[i][j] for j in col_order) for i in row_order))


def normalize(g: SquareGrid) -> SquareGrid:
    """Normalized form: 1 top-left, first row/column ascending, and the
    square transposed when the intermediate has cell (1,2) > cell (2,1)."""
    x = _normalize_pre_transpose(g)
    if x.cells[0][1] > x.cells[1][0]:
        x = DihedralElement(rotation=0, reflect=True).apply(x)
    return x


def complement(g: SquareGrid) -> SquareGrid:
    """Replace every number x with n**2+1-x; preserves semi-magicness."""
    k = g.n * g.n + 1
    return SquareGrid(tuple(tuple(k - x for x in row) for row in g.cells))


def cn(g: SquareGrid) -> SquareGrid:
    """Complement-and-normalize; an involution on normalized squares."""
    return normalize(complement(g))


def is_self_complement(g: SquareGrid) -> bool:
    """True for normalized squares fixed by ``cn``."""
    return cn(g) == g
