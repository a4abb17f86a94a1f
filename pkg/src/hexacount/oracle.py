"""Independent brute-force ground truth at orders 3 and 4.

Full enumeration by row-based backtracking: the first n-1 rows run over
all ordered arrangements of disjoint sum-Z subsets, the last row is forced
by the column sums.  Symmetry reduction counts lexicographically-least
orbit representatives under the eight dihedral images, which stays correct
even if a self-symmetric square ever showed up (none do at these orders).

None of this shares machinery with the profile-join counter, so agreement
between the two is a real check.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from . import _kernels
from .core import InvalidOrderError, SquareGrid, members_of, order_params
from .enumeration import generate_series
from .transform import DIHEDRAL_ELEMENTS


@dataclass(frozen=True)
class OracleCounts:
    semi_magic: int
    magic: int
    panmagic: int
    raw_semi_magic: int
    raw_magic: int
    raw_panmagic: int
    self_symmetric: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.semi_magic, self.magic, self.panmagic)


def _dihedral_index_maps(n: int) -> np.ndarray:
    """dmaps[t, p] = flat source index feeding target position p."""
    base = SquareGrid([[i * n + j + 1 for j in range(n)] for i in range(n)])
    maps = np.empty((8, n * n), dtype=np.int64)
    for t, sigma in enumerate(DIHEDRAL_ELEMENTS):
        img = sigma.apply(base)
        flat = [x - 1 for row in img.cells for x in row]
        maps[t] = flat
    return maps


def _series_arrays(order: int, shuffle_seed: int | None = None):
    series = generate_series(order)
    if shuffle_seed is not None:
        rng = np.random.default_rng(shuffle_seed)
        series = [series[i] for i in rng.permutation(len(series))]
    vals = np.array([members_of(s) for s in series], dtype=np.int64)
    masks = np.array(series, dtype=np.int64)
    return vals, masks


def _run_oracle(order: int, shuffle_seed: int | None = None):
    vals, masks = _series_arrays(order, shuffle_seed)
    dmaps = _dihedral_index_maps(order)
    if order == 4:
        canon_buf = np.empty(4096, dtype=np.int64)
        (raw, rm, rp, red, redm, redp, ssym, n_canon, err) = _kernels.oracle4(
            vals, masks, dmaps, canon_buf
        )
        if err:
            raise RuntimeError("canonical square buffer overflow")  # pragma: no cover
        return (raw, rm, rp, red, redm, redp, ssym), canon_buf[:n_canon]
    if order == 3:
        (raw, rm, rp, red, redm, redp, ssym) = _kernels.oracle3(vals, masks, dmaps)
        return (raw, rm, rp, red, redm, redp, ssym), np.empty(0, dtype=np.int64)
    raise InvalidOrderError(f"brute force is desk-scale only for orders 3 and 4, got {order}")


@lru_cache(maxsize=4)
def _oracle_cached(order: int):
    counts, canon_masks = _run_oracle(order)
    per_class: dict[int, int] = {}
    for m in canon_masks.tolist():
        per_class[m] = per_class.get(m, 0) + 1
    return counts, per_class


def brute_force_counts(order: int, shuffle_seed: int | None = None) -> OracleCounts:
    """Exact (semi-magic, magic, panmagic) counts up to dihedral symmetry.

    ``shuffle_seed`` permutes the candidate series order; counts must not
    depend on it.
    """
    if shuffle_seed is None:
        (raw, rm, rp, red, redm, redp, ssym), _ = _oracle_cached(order)
    else:
        (raw, rm, rp, red, redm, redp, ssym), _ = _run_oracle(order, shuffle_seed)
    return OracleCounts(
        semi_magic=red,
        magic=redm,
        panmagic=redp,
        raw_semi_magic=raw,
        raw_magic=rm,
        raw_panmagic=rp,
        self_symmetric=ssym,
    )


def brute_force_class_count(order: int, m: int) -> int:
    """Canonical squares whose upper half is exactly ``m`` (order 4 only),
    found by exhaustive enumeration plus a canonical-form filter."""
    if order != 4:
        raise InvalidOrderError("per-class brute force is desk-scale only at order 4")
    _, per_class = _oracle_cached(4)
    return per_class.get(m, 0)


def brute_force_class_table(order: int = 4) -> dict[int, int]:
    """Upper-half mask -> canonical square count, for every nonzero class."""
    if order != 4:
        raise InvalidOrderError("per-class brute force is desk-scale only at order 4")
    _, per_class = _oracle_cached(4)
    return dict(per_class)


def enumerate_all(order: int = 3) -> list[SquareGrid]:
    """All 72 order-3 semi-magic squares, as a property-test corpus.

    Pure-Python row backtracking, independent of the compiled counters.
    """
    if order != 3:
        raise InvalidOrderError("full materialization is supported at order 3 only")
    z = order_params(3).magic_constant
    series = [members_of(s) for s in generate_series(3)]
    out: list[SquareGrid] = []
    for s1 in series:
        for r1 in permutations(s1):
            used = set(r1)
            for s2 in series:
                if used & set(s2):
                    continue
                for r2 in permutations(s2):
                    r3 = tuple(z - a - b for a, b in zip(r1, r2))
                    if set(r3) | used | set(s2) != set(range(1, 10)):
                        continue
                    if len(set(r3)) != 3 or any(not 1 <= x <= 9 for x in r3):
                        continue
                    out.append(SquareGrid([r1, r2, r3]))
    return out
