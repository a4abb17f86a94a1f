"""Meet-in-the-middle counting of one class of canonical squares.

Per class m the pipeline is: enumerate upper partitions, histogram the
profiles of all their row arrangements, scale each histogram entry by the
profile's symmetry factor, then stream the lower arrangements of the
complement and sum the matched histogram values.  The result is the exact
number of canonical semi-magic squares with upper half m.

Profiles are the ascending tuples of upper-half column sums.  They are
packed into 32-bit keys with a mixed radix derived from the component
bounds ((56, 67, 84, 106, 106) at order 6) and counted in an
open-addressing hash table of 2**24 + 1024 slots hashed by the low 24
bits, probing linearly and never wrapping.
"""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .core import (
    InternalInvariantError,
    InvalidOrderError,
    mask_from_hex,
    mask_to_hex,
    members_of,
    order_params,
)
from .enumeration import partitions_of

SORT6_NETWORK = (
    (0, 5), (1, 3), (2, 4),
    (1, 2), (3, 4),
    (0, 3), (2, 5),
    (0, 1), (2, 3), (4, 5),
    (1, 2), (3, 4),
)

RESULTS_HEADER = ["class_id", "mask_hex", "count", "millis", "run_tag"]


class ProfileHistogramOverflow(InternalInvariantError):
    """Linear probing ran past the tail guard or a count left 32 bits."""


def sort6(values) -> tuple[int, ...]:
    """Ascending order of six small integers via a 12-comparator network."""
    v = list(values)
    if len(v) != 6:
        raise ValueError("sort6 takes exactly six values")
    for a, b in SORT6_NETWORK:
        if v[a] > v[b]:
            v[a], v[b] = v[b], v[a]
    return tuple(v)


@dataclass(frozen=True)
class ProfileCodec:
    """Mixed-radix packing of profiles for one order.

    Components 0..n-2 must stay below their radix; the last component is
    derived from the fixed total, so it is not stored.
    """

    order: int
    radices: tuple[int, ...]
    total: int

    @classmethod
    def for_order(cls, order: int) -> "ProfileCodec":
        if order == 6:
            return cls(order=6, radices=_kernels.RADIX6, total=333)
        if order == 4:
            return cls(order=4, radices=_kernels.RADIX4, total=68)
        raise InvalidOrderError(f"profiles exist for orders 4 and 6, got {order}")

    @property
    def width(self) -> int:
        return self.order

    def key_bound(self) -> int:
        return math.prod(self.radices)

    def encode(self, profile) -> int:
        p = tuple(profile)
        if len(p) != self.width:
            raise ValueError(f"profile needs {self.width} components, got {len(p)}")
        if any(a > b for a, b in zip(p, p[1:])):
            raise ValueError(f"profile must be ascending: {p}")
        if sum(p) != self.total:
            raise ValueError(f"profile must sum to {self.total}: {p}")
        key = 0
        for comp, radix in zip(reversed(p[:-1]), reversed(self.radices)):
            if not 0 <= comp < radix:
                raise ValueError(f"profile component {comp} outside 0..{radix - 1} in {p}")
            key = key * radix + comp
        return key

    def decode(self, key: int) -> tuple[int, ...]:
        if not 0 <= key < self.key_bound():
            raise ValueError(f"key {key} outside 0..{self.key_bound() - 1}")
        comps = []
        k = key
        for radix in self.radices:
            comps.append(k % radix)
            k //= radix
        comps.append(self.total - sum(comps))
        p = tuple(comps)
        if any(a > b for a, b in zip(p, p[1:])) or p[-1] < 0:
            raise ValueError(f"key {key} does not decode to a valid profile: {p}")
        return p

    def decode_batch(self, keys: np.ndarray) -> np.ndarray:
        """(len(keys), order) component matrix; no validity checks."""
        out = np.empty((keys.shape[0], self.width), dtype=np.int64)
        k = keys.astype(np.int64)
        for i, radix in enumerate(self.radices):
            out[:, i] = k % radix
            k //= radix
        out[:, -1] = self.total - out[:, :-1].sum(axis=1)
        return out


def symmetry_factor(profile) -> int:
    """Product of factorials of the multiplicities of equal entries."""
    f = 1
    run = 1
    p = tuple(profile)
    for a, b in zip(p, p[1:]):
        if a == b:
            run += 1
            f *= run
        else:
            run = 1
    return f


def profile_of_half(rows, side: str, order: int = 6):
    """Profile and column order of one half, expressed in upper-half terms.

    ``rows`` are the n/2 value rows of the half.  Upper halves sort columns
    ascending by column sum with ties broken by the top entry; lower halves
    sort so that (Z - column sum) ascends, ties broken by the first lower
    row's entry.  The returned profile is ascending either way.
    """
    params = order_params(order)
    n, h, z = params.n, params.half_rows, params.magic_constant
    rows = [tuple(r) for r in rows]
    if len(rows) != h or any(len(r) != n for r in rows):
        raise ValueError(f"expected {h} rows of {n} values")
    sums = [sum(rows[i][j] for i in range(h)) for j in range(n)]
    if side == "upper":
        cols = sorted(range(n), key=lambda j: (sums[j], rows[0][j]))
        profile = tuple(sums[j] for j in cols)
    elif side == "lower":
        cols = sorted(range(n), key=lambda j: (z - sums[j], rows[0][j]))
        profile = tuple(z - sums[j] for j in cols)
    else:
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    return profile, tuple(cols)


class ProfileHistogram:
    """Open-addressing profile counter: 2**24 + 1024 slots, linear probing.

    Keys hash to their low 24 bits; the 1024-slot tail lets probes run past
    the main region without wrapping, and running past the tail is a hard
    error.  Counts are unsigned 32-bit; ``scale_by_symmetry`` checks the
    products stay below 2**32 before committing them.
    """

    SIZE = _kernels.TABLE_SIZE
    MAIN = _kernels.TABLE_MAIN
    TAIL = _kernels.TABLE_TAIL

    def __init__(self) -> None:
        self.keys = np.zeros(self.SIZE, dtype=np.uint32)
        self.counts = np.zeros(self.SIZE, dtype=np.uint32)

    def clear(self) -> None:
        self.counts.fill(0)

    def insert_batch(self, keys: np.ndarray, n: int | None = None) -> None:
        n = keys.shape[0] if n is None else n
        if _kernels.hist_insert(keys, n, self.keys, self.counts) < 0:
            raise ProfileHistogramOverflow(
                "histogram probe ran past the tail guard; class too degenerate"
            )

    def insert(self, key: int, times: int = 1) -> None:
        arr = np.full(times, key, dtype=np.uint32)
        self.insert_batch(arr)

    def get(self, key: int) -> int:
        return int(_kernels.hist_probe_get(np.uint32(key), self.keys, self.counts))

    def lookup_sum(self, keys: np.ndarray, n: int | None = None) -> int:
        n = keys.shape[0] if n is None else n
        return int(_kernels.hist_lookup_sum(keys, n, self.keys, self.counts))

    def total(self) -> int:
        return int(self.counts.sum(dtype=np.int64))

    def occupied_slots(self) -> np.ndarray:
        return np.nonzero(self.counts)[0]

    def max_slot(self) -> int:
        return int(_kernels.hist_max_slot(self.counts))

    def scale_by_symmetry(self, codec: ProfileCodec) -> tuple[int, int]:
        """Multiply every count by its profile's symmetry factor.

        Returns (max value before, max value after); raises if any product
        would not fit the 32-bit value slots.
        """
        slots = self.occupied_slots()
        if slots.size == 0:
            return 0, 0
        comps = codec.decode_batch(self.keys[slots])
        f = np.ones(slots.shape[0], dtype=np.int64)
        run = np.ones(slots.shape[0], dtype=np.int64)
        for i in range(1, codec.width):
            eq = comps[:, i] == comps[:, i - 1]
            run = np.where(eq, run + 1, 1)
            f = np.where(eq, f * run, f)
        before = self.counts[slots].astype(np.int64)
        after = before * f
        max_after = int(after.max())
        if max_after >= 1 << 32:
            raise ProfileHistogramOverflow(
                f"symmetry scaling would overflow 32-bit counts (max {max_after})"
            )
        self.counts[slots] = after.astype(np.uint32)
        return int(before.max()), max_after


def batch_queries(keys: np.ndarray) -> np.ndarray:
    """Stable reorder of profile keys by the low 12 bits of their hash.

    A pure performance transform (cache locality of subsequent probes);
    histogram semantics do not change.  The hot path uses the compiled
    counting sort in ``_kernels``; this produces the identical order.
    """
    keys = np.asarray(keys, dtype=np.uint32)
    order = np.argsort(keys & np.uint32(0xFFF), kind="stable")
    return keys[order]


@dataclass(frozen=True)
class ClassResult:
    """Exact count of canonical squares for one class."""

    class_id: int
    mask: int
    count: int
    millis: int
    run_tag: str = ""

    def csv_row(self) -> list[str]:
        return [str(self.class_id), mask_to_hex(self.mask), str(self.count), str(self.millis), self.run_tag]


@dataclass
class ClassCountStats:
    """Per-run telemetry kept out of the result row."""

    upper_partitions: int = 0
    lower_partitions: int = 0
    inserted: int = 0
    max_value_before_scaling: int = 0
    max_value_after_scaling: int = 0
    max_slot: int = -1
    distinct_profiles: int = 0


@lru_cache(maxsize=8)
def _perm_table(width: int) -> np.ndarray:
    if width == 6:
        return _kernels.PERM720
    if width == 4:
        return _kernels.PERM24
    raise InvalidOrderError(f"no permutation table for width {width}")


def _row_values(mask: int) -> np.ndarray:
    return np.array(members_of(mask), dtype=np.int64)


def _arrangement_keys(
    fixed_row: int,
    free_rows: tuple[int, ...],
    side: str,
    order: int,
    keybuf: np.ndarray,
) -> int:
    """Fill ``keybuf`` with the encoded profiles of all arrangements of one
    partition; returns how many."""
    z = order_params(order).magic_constant
    perms = _perm_table(order)
    fixed = _row_values(fixed_row)
    if side == "upper":
        base = fixed
        sign = 1
    else:
        base = z - fixed
        sign = -1
    tables = [sign * _row_values(r)[perms] for r in free_rows]
    if order == 6:
        return int(_kernels.profile_keys6(base, tables[0], tables[1], keybuf))
    return int(_kernels.profile_keys4(base, tables[0], keybuf))


def count_class(
    m: int,
    order: int = 6,
    *,
    class_id: int = -1,
    run_tag: str = "",
    batching: bool = True,
    histogram: ProfileHistogram | None = None,
    stats: ClassCountStats | None = None,
) -> ClassResult:
    """Exact |C_m| for half-set ``m`` via the five-step profile join.

    1. upper partitions of m; 2. histogram the profiles of every upper
    arrangement (first row fixed ascending, remaining rows permuted);
    3. scale histogram values by the symmetry factor; 4. lower partitions
    of the complement; 5. sum matched histogram values over every lower
    arrangement.
    """
    t0 = time.perf_counter()
    params = order_params(order)
    codec = ProfileCodec.for_order(order)
    if m.bit_count() != params.cells // 2 or sum(members_of(m)) != params.half_sum:
        raise ValueError(
            f"not a valid order-{order} half-set: {params.cells // 2} members "
            f"summing to {params.half_sum} required"
        )
    upper = partitions_of(m, "upper", order)
    lower = partitions_of(params.universe & ~m, "lower", order)
    hist = histogram if histogram is not None else ProfileHistogram()
    hist.clear()
    if stats is None:
        stats = ClassCountStats()
    stats.upper_partitions = len(upper)
    stats.lower_partitions = len(lower)

    n_arr = math.factorial(order) ** (params.half_rows - 1)
    keybuf = np.empty(n_arr, dtype=np.uint32)
    sortbuf = np.empty(n_arr, dtype=np.uint32)
    sort_hist = np.empty(4096, dtype=np.int64)

    inserted = 0
    for part in upper:
        n = _arrangement_keys(part[0], part[1:], "upper", order, keybuf)
        buf = keybuf
        if batching:
            _kernels.counting_sort_low12(keybuf, n, sortbuf, sort_hist)
            buf = sortbuf
        hist.insert_batch(buf, n)
        inserted += n
    stats.inserted = inserted
    if hist.total() != inserted or inserted != len(upper) * n_arr:
        raise InternalInvariantError(
            f"histogram total {hist.total()} != inserted {inserted} "
            f"!= partitions*arrangements {len(upper) * n_arr}"
        )
    stats.distinct_profiles = int(hist.occupied_slots().size)
    stats.max_slot = hist.max_slot()

    before, after = hist.scale_by_symmetry(codec)
    stats.max_value_before_scaling = before
    stats.max_value_after_scaling = after

    total = 0
    for part in lower:
        n = _arrangement_keys(part[0], part[1:], "lower", order, keybuf)
        buf = keybuf
        if batching:
            _kernels.counting_sort_low12(keybuf, n, sortbuf, sort_hist)
            buf = sortbuf
        total += hist.lookup_sum(buf, n)

    millis = int((time.perf_counter() - t0) * 1000)
    return ClassResult(class_id=class_id, mask=m, count=total, millis=millis, run_tag=run_tag)


def materialize_squares(m: int, order: int = 6, limit: int = 10):
    """A few canonical squares of class m, built from matched half pairs.

    Used by spot checks: every returned grid must be semi-magic and equal
    to its own canonical form.
    """
    from .core import SquareGrid

    params = order_params(order)
    z = params.magic_constant
    upper = partitions_of(m, "upper", order)
    lower = partitions_of(params.universe & ~m, "lower", order)
    perms = _perm_table(order)
    out = []
    for upart in upper:
        urows_fixed = [list(members_of(upart[0]))]
        for lpart in lower:
            lrows_fixed = [list(members_of(lpart[0]))]
            for up in perms[:: max(1, len(perms) // 7)]:
                urows = urows_fixed + [
                    [members_of(r)[i] for i in up] for r in upart[1:]
                ]
                uprof, ucols = profile_of_half(urows, "upper", order)
                for lp in perms[:: max(1, len(perms) // 11)]:
                    lrows = lrows_fixed + [
                        [members_of(r)[i] for i in lp] for r in lpart[1:]
                    ]
                    lprof, lcols = profile_of_half(lrows, "lower", order)
                    if lprof != uprof:
                        continue
                    cells = [[row[j] for j in ucols] for row in urows]
                    cells += [[row[j] for j in lcols] for row in lrows]
                    out.append(SquareGrid(cells))
                    if len(out) >= limit:
                        return out
    return out


def append_results(path: str, results) -> None:
    """Append result rows, writing the header when the file is new."""
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(RESULTS_HEADER)
        for r in results:
            writer.writerow(r.csv_row())
            fh.flush()


def read_results(path: str) -> list[ClassResult]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER:
            raise ValueError(f"{path}: unexpected results header {header}")
        for row in reader:
            if not row:
                continue
            out.append(
                ClassResult(
                    class_id=int(row[0]),
                    mask=mask_from_hex(row[1]),
                    count=int(row[2]),
                    millis=int(row[3]),
                    run_tag=row[4] if len(row) > 4 else "",
                )
            )
    return out
