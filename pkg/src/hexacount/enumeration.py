"""Series generation, half-set counting, and the admissible class catalog.

A *series* is an n-subset of {1..n**2} summing to the magic constant; a
*class* is the 18-number (at order 6) upper half-set of a canonical square.
A half-set m is admissible when m splits into n/2 disjoint series with
strictly increasing minima whose last minimum precedes min(complement),
and the complement splits into n/2 series with increasing minima.

The catalog orders classes descending by sum(2**(n*n - i) for i in m),
which is the same as ascending lexicographic order of the sorted member
tuples; class ids are positions in that order and jobs are ids mod 100.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .core import (
    HexacountError,
    InvalidOrderError,
    mask_from_hex,
    mask_to_hex,
    members_of,
    min_element,
    order_params,
)

CATALOG_MAGIC = "hexacount-catalog"
CATALOG_VERSION = 1
JOB_MODULUS = 100


class CatalogError(HexacountError):
    """Catalog file or checkpoint is unusable."""


def generate_series(order: int) -> list[int]:
    """All n-subsets of {1..n**2} with sum Z, as masks sorted ascending.

    Straight backtracking over ascending members with partial-sum bounds;
    the output is deduplicated by construction.
    """
    params = order_params(order)
    n, z, top = params.n, params.magic_constant, params.cells
    out: list[int] = []

    def extend(start: int, left: int, need: int, mask: int) -> None:
        if left == 0:
            if need == 0:
                out.append(mask)
            return
        for x in range(start, top - left + 2):
            rest = left - 1
            tail = need - x
            if tail < rest * x + rest * (rest + 1) // 2:
                break  # larger x only overshoots further
            if tail > rest * top - rest * (rest - 1) // 2:
                continue
            extend(x + 1, rest, tail, mask | (1 << (x - 1)))

    extend(1, n, z, 0)
    out.sort()
    return out


@lru_cache(maxsize=None)
def _series_cache(order: int) -> tuple[int, ...]:
    return tuple(generate_series(order))


def count_half_sets(order: int) -> int:
    """Number of (n**2/2)-subsets of {1..n**2} summing to half_sum.

    Dynamic programming over (element, cardinality, sum); nothing is
    materialized.  Accepts any even order >= 2 (the class machinery itself
    starts at 4).
    """
    if order < 2 or order % 2:
        raise InvalidOrderError(f"half-set counting needs an even order, got {order}")
    cells = order * order
    size = cells // 2
    half_sum = (order // 2) * (order * (cells + 1) // 2)
    dp = np.zeros((size + 1, half_sum + 1), dtype=np.int64)
    dp[0, 0] = 1
    for x in range(1, cells + 1):
        dp[1 : min(x, size) + 1, x:] += dp[0 : min(x, size), : half_sum + 1 - x]
    return int(dp[size, half_sum])


def restrict_series(series: Sequence[int], m: int) -> list[int]:
    """The series fully contained in mask ``m``, order preserved."""
    return [s for s in series if not (s & ~m)]


def _split_rows(m: int, rows: int, bound_mask: int, restricted: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Yield splits of m into ``rows`` disjoint series with increasing minima.

    Each row after the first must contain the minimum of what is left, so
    every unordered split is produced exactly once, already ordered.  When
    ``bound_mask`` is nonzero the last row's minimum must precede it.
    """
    members = frozenset(restricted)

    def rec(remaining: int, depth: int, chosen: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if depth == rows - 1:
            if remaining not in members:
                return
            if bound_mask and not ((remaining & -remaining) < bound_mask):
                return
            yield chosen + (remaining,)
            return
        low = remaining & -remaining
        for s in restricted:
            if s & low and not (s & ~remaining):
                yield from rec(remaining & ~s, depth + 1, chosen + (s,))

    yield from rec(m, 0, ())


def partitions_of(
    m: int,
    side: str,
    order: int,
    series: Sequence[int] | None = None,
) -> list[tuple[int, ...]]:
    """All splits of half-set ``m`` into n/2 disjoint series, ordered by
    strictly increasing row minima.

    For ``side="upper"`` the last row's minimum must additionally precede
    the minimum of the complementary half-set.
    """
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    params = order_params(order)
    if order % 2:
        raise InvalidOrderError("partitions need an even order")
    if series is None:
        series = _series_cache(order)
    restricted = restrict_series(series, m)
    bound = 0
    if side == "upper":
        comp = params.universe & ~m
        bound = comp & -comp if comp else 0
    return list(_split_rows(m, params.half_rows, bound, restricted))


def is_admissible(m: int, order: int, series: Sequence[int] | None = None) -> bool:
    """True iff m has an upper split and its complement a lower split."""
    params = order_params(order)
    if series is None:
        series = _series_cache(order)
    comp = params.universe & ~m
    restricted = restrict_series(series, m)
    bound = comp & -comp if comp else 0
    if next(_split_rows(m, params.half_rows, bound, restricted), None) is None:
        return False
    restricted_c = restrict_series(series, comp)
    return next(_split_rows(comp, params.half_rows, 0, restricted_c), None) is not None


def catalog_sort_key(m: int, order: int) -> int:
    """Descending-order key from the class ordering rule."""
    cells = order * order
    return sum(1 << (cells - i) for i in members_of(m))


@dataclass(frozen=True)
class ClassCatalog:
    """Ordered list of admissible half-sets; ids are list positions."""

    order: int
    masks: np.ndarray  # uint64, catalog order

    def __len__(self) -> int:
        return int(self.masks.shape[0])

    def mask_of(self, class_id: int) -> int:
        if not 0 <= class_id < len(self):
            raise IndexError(f"class id {class_id} out of range 0..{len(self) - 1}")
        return int(self.masks[class_id])

    def job_of(self, class_id: int) -> int:
        if not 0 <= class_id < len(self):
            raise IndexError(f"class id {class_id} out of range 0..{len(self) - 1}")
        return class_id % JOB_MODULUS

    def job_ids(self, job: int) -> range:
        if not 0 <= job < JOB_MODULUS:
            raise ValueError(f"job must be 0..{JOB_MODULUS - 1}, got {job}")
        return range(job, len(self), JOB_MODULUS)


def _header_line(order: int, count: int) -> str:
    return f"{CATALOG_MAGIC} v{CATALOG_VERSION} order={order} count={count:012d}\n"


_HEADER_BYTES = len(_header_line(6, 0).encode())


def _parse_header(line: str) -> tuple[int, int]:
    parts = line.split()
    try:
        if parts[0] != CATALOG_MAGIC or parts[1] != f"v{CATALOG_VERSION}":
            raise ValueError
        order = int(parts[2].removeprefix("order="))
        count = int(parts[3].removeprefix("count="))
    except (IndexError, ValueError):
        raise CatalogError(f"not a catalog header: {line.strip()!r}") from None
    return order, count


def save_catalog(catalog: ClassCatalog, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(_header_line(catalog.order, len(catalog)))
        for m in catalog.masks:
            fh.write(mask_to_hex(int(m)))
            fh.write("\n")


def load_catalog(path: str) -> ClassCatalog:
    with open(path) as fh:
        order, count = _parse_header(fh.readline())
        masks = np.empty(count, dtype=np.uint64)
        i = 0
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if i >= count:
                raise CatalogError(f"{path}: more classes than the header's {count}")
            masks[i] = mask_from_hex(line)
            i += 1
    if i != count:
        raise CatalogError(f"{path}: header promises {count} classes, found {i}")
    return ClassCatalog(order=order, masks=masks)


def _admissible_order4() -> np.ndarray:
    from itertools import combinations

    series = _series_cache(4)
    out = []
    for combo in combinations(range(1, 17), 8):
        if sum(combo) != 68:
            continue
        m = 0
        for x in combo:
            m |= 1 << (x - 1)
        if is_admissible(m, 4, series):
            out.append(m)
    # combinations() emits ascending lex order, which is the catalog order
    return np.array(out, dtype=np.uint64)


def generate_classes(order: int, limit: int | None = None, progress=None) -> ClassCatalog:
    """Generate the class catalog in catalog order.

    ``limit`` stops after that many classes (used by the fast smoke check
    of the order-6 catalog; the full order-6 run takes a while).
    """
    if order == 4:
        masks = _admissible_order4()
        if limit is not None:
            masks = masks[:limit]
        return ClassCatalog(order=4, masks=masks)
    if order != 6:
        raise InvalidOrderError(f"class catalogs exist for orders 4 and 6, got {order}")
    chunks = []
    total = 0
    for shard_masks, _shard in iter_class_shards(limit=limit):
        chunks.append(shard_masks)
        total += len(shard_masks)
        if progress is not None:
            progress(total)
        if limit is not None and total >= limit:
            break
    masks = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.uint64)
    if limit is not None:
        masks = masks[:limit]
    return ClassCatalog(order=6, masks=masks)


def class_shards_order6() -> list[tuple[int, int]]:
    """Lexicographic shards of the order-6 search space.

    Admissible classes always contain {1,2,3}; a shard fixes the next two
    members (e4, e5), so shards enumerate in catalog order and are
    independent units of work and checkpointing.
    """
    shards = []
    for e4 in range(4, 37):
        for e5 in range(e4 + 1, 37):
            base = 6 + e4 + e5
            rest = 13
            # smallest/largest achievable sums for the remaining 13 members
            lo = sum(range(e5 + 1, e5 + 1 + rest))
            hi = sum(range(36, 36 - rest, -1))
            if base + lo <= 333 <= base + hi:
                shards.append((e4, e5))
    return shards


def iter_class_shards(
    start_shard: int = 0, limit: int | None = None
) -> Iterator[tuple[np.ndarray, int]]:
    """Yield (masks, shard_index) per shard of the order-6 catalog."""
    from . import _kernels

    series = _series_cache(6)
    tables = _kernels.series_tables(series)
    shards = class_shards_order6()
    emitted = 0
    buf = np.empty(4_000_000, dtype=np.uint64)
    for idx in range(start_shard, len(shards)):
        e4, e5 = shards[idx]
        n = _kernels.admissible_shard(e4, e5, tables.masks, tables.bucket_start, tables.bucket_end, buf)
        if n < 0:
            raise HexacountError("class shard buffer overflow")  # pragma: no cover
        yield buf[:n].copy(), idx
        emitted += n
        if limit is not None and emitted >= limit:
            return


def write_catalog_order6(
    path: str,
    resume: bool = False,
    checkpoint_path: str | None = None,
    progress=None,
) -> int:
    """Stream the full order-6 catalog to ``path`` with shard checkpoints.

    Returns the class count.  A crashed run restarts from the last
    completed shard; the header's count field is patched in at the end.
    """
    ckpt_path = checkpoint_path or path + ".ckpt"
    shards = class_shards_order6()
    start_shard = 0
    written = 0
    offset = _HEADER_BYTES

    if resume and os.path.exists(ckpt_path):
        try:
            with open(ckpt_path) as fh:
                state = json.load(fh)
            start_shard = int(state["next_shard"])
            written = int(state["classes_written"])
            offset = int(state["file_bytes"])
        except (OSError, ValueError, KeyError) as exc:
            raise CatalogError(f"unreadable checkpoint {ckpt_path}: {exc}") from exc
        if not os.path.exists(path) or os.path.getsize(path) < offset:
            raise CatalogError(
                f"checkpoint {ckpt_path} does not match {path}; delete both to restart"
            )
        with open(path, "r+") as fh:
            fh.truncate(offset)
    else:
        with open(path, "w") as fh:
            fh.write(_header_line(6, 0))

    with open(path, "a") as fh:
        for masks, shard in iter_class_shards(start_shard=start_shard):
            fh.write("".join(mask_to_hex(int(m)) + "\n" for m in masks))
            fh.flush()
            written += len(masks)
            offset += len(masks) * (9 + 1)
            with open(ckpt_path, "w") as ck:
                json.dump(
                    {"next_shard": shard + 1, "classes_written": written, "file_bytes": offset},
                    ck,
                )
            if progress is not None:
                progress(written, shard + 1, len(shards))

    with open(path, "r+") as fh:
        fh.write(_header_line(6, written))
    os.remove(ckpt_path)
    return written
