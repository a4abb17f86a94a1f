"""Compiled kernels for the hot loops.

Everything here is deterministic integer arithmetic; the Python modules
own all orchestration, I/O and error reporting.  Number-set masks travel
as int64 (36 bits used), profile keys as uint32, histogram counts as
uint32 with int64 accumulation.

The random stream of the estimator is Philox4x32-10, keyed by the user
seed, with the counter laid out as (block, prefix, sample_lo, sample_hi).
Every (sample, prefix) pair therefore owns an independent substream and
results cannot depend on scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from numba import njit, prange

UNIVERSE6 = (1 << 36) - 1

# bit index recovery for a single-bit mask: (1 << p) % 67 is unique for p < 66
_BIT67 = np.full(67, -1, dtype=np.int64)
for _p in range(64):
    _BIT67[(1 << _p) % 67] = _p

PERM720 = np.array(list(permutations(range(6))), dtype=np.int64)
PERM24 = np.array(list(permutations(range(4))), dtype=np.int64)
PERM6 = np.array(list(permutations(range(3))), dtype=np.int64)

# profile component radices: component i of a valid profile is < RADIX[i]
RADIX6 = (56, 67, 84, 106, 106)
RADIX4 = (18, 22, 32)

TABLE_MAIN = 1 << 24
TABLE_TAIL = 1024
TABLE_SIZE = TABLE_MAIN + TABLE_TAIL


@njit(cache=True, inline="always")
def _bit_index(single_bit):
    """0-based position of the only set bit."""
    return _BIT67[single_bit % 67]


# ---------------------------------------------------------------------------
# class catalog generation (order 6)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesTables:
    """Series masks grouped by minimal element for the split searches."""

    masks: np.ndarray  # int64, sorted by (min element, mask)
    bucket_start: np.ndarray  # int64[38]
    bucket_end: np.ndarray  # int64[38]


def series_tables(series) -> SeriesTables:
    ordered = sorted(series, key=lambda s: ((s & -s).bit_length(), s))
    masks = np.array(ordered, dtype=np.int64)
    start = np.zeros(38, dtype=np.int64)
    end = np.zeros(38, dtype=np.int64)
    i = 0
    for e in range(1, 38):
        start[e] = i
        while i < len(ordered) and (ordered[i] & -ordered[i]).bit_length() == e:
            i += 1
        end[e] = i
    return SeriesTables(masks=masks, bucket_start=start, bucket_end=end)


@njit(cache=True)
def _has_upper_split(m, smasks, bstart, bend):
    comp = UNIVERSE6 & ~m
    vbit = comp & -comp
    e1 = _bit_index(m & -m) + 1
    for i in range(bstart[e1], bend[e1]):
        s1 = smasks[i]
        if s1 & ~m:
            continue
        m2 = m & ~s1
        e2 = _bit_index(m2 & -m2) + 1
        for j in range(bstart[e2], bend[e2]):
            s2 = smasks[j]
            if s2 & ~m2:
                continue
            s3 = m2 & ~s2
            if (s3 & -s3) < vbit:
                return True
    return False


@njit(cache=True)
def _has_lower_split(comp, smasks, bstart, bend):
    e4 = _bit_index(comp & -comp) + 1
    for i in range(bstart[e4], bend[e4]):
        s4 = smasks[i]
        if s4 & ~comp:
            continue
        m5 = comp & ~s4
        e5 = _bit_index(m5 & -m5) + 1
        for j in range(bstart[e5], bend[e5]):
            s5 = smasks[j]
            if not (s5 & ~m5):
                return True
    return False


@njit(cache=True)
def admissible_shard(e4, e5, smasks, bstart, bend, out):
    """Admissible order-6 half-sets {1,2,3,e4,e5,...} in lexicographic order.

    Fills ``out`` and returns the count (negative on buffer overflow).
    Only sets containing {1,2,3} can be admissible: every number below
    min(complement) is a member and three distinct row minima must precede
    it.
    """
    base_mask = 0b111 | (1 << (e4 - 1)) | (1 << (e5 - 1))
    need = 333 - (6 + e4 + e5)
    chosen = np.empty(13, dtype=np.int64)
    count = 0
    depth = 0
    start = e5 + 1
    remaining = need
    mask = base_mask
    while True:
        # find the next feasible member at this depth
        found = False
        x = start
        while x <= 36:
            rest = 12 - depth
            tail = remaining - x
            min_tail = rest * x + rest * (rest + 1) // 2
            max_tail = rest * 36 - rest * (rest - 1) // 2
            if tail < min_tail:
                break  # larger x only makes it worse
            if tail <= max_tail:
                found = True
                break
            x += 1
        if found:
            chosen[depth] = x
            mask |= 1 << (x - 1)
            remaining -= x
            if depth == 12:
                if remaining == 0:
                    if _has_upper_split(mask, smasks, bstart, bend) and _has_lower_split(
                        UNIVERSE6 & ~mask, smasks, bstart, bend
                    ):
                        if count >= out.shape[0]:
                            return -1
                        out[count] = mask
                        count += 1
                mask &= ~(1 << (x - 1))
                remaining += x
                start = x + 1
            else:
                depth += 1
                start = x + 1
        else:
            if depth == 0:
                return count
            depth -= 1
            x = chosen[depth]
            mask &= ~(1 << (x - 1))
            remaining += x
            start = x + 1


# ---------------------------------------------------------------------------
# profile generation, batching, histogram
# ---------------------------------------------------------------------------


@njit(cache=True)
def profile_keys6(base, pa, pb, out):
    """Encoded profiles of all |pa| x |pb| half arrangements at order 6.

    ``base`` is the fixed row (negated-and-offset for lower halves), ``pa``
    and ``pb`` the value permutation tables of the two free rows.  Column
    sums are sorted by a 12-comparator network and packed with the
    (56, 67, 84, 106, 106) mixed radix.
    """
    na = pa.shape[0]
    nb = pb.shape[0]
    idx = 0
    for i in range(na):
        q0 = base[0] + pa[i, 0]
        q1 = base[1] + pa[i, 1]
        q2 = base[2] + pa[i, 2]
        q3 = base[3] + pa[i, 3]
        q4 = base[4] + pa[i, 4]
        q5 = base[5] + pa[i, 5]
        for j in range(nb):
            c0 = q0 + pb[j, 0]
            c1 = q1 + pb[j, 1]
            c2 = q2 + pb[j, 2]
            c3 = q3 + pb[j, 3]
            c4 = q4 + pb[j, 4]
            c5 = q5 + pb[j, 5]
            # branchless compare-exchange keeps the loop vectorizable
            t = min(c0, c5); c5 = max(c0, c5); c0 = t
            t = min(c1, c3); c3 = max(c1, c3); c1 = t
            t = min(c2, c4); c4 = max(c2, c4); c2 = t
            t = min(c1, c2); c2 = max(c1, c2); c1 = t
            t = min(c3, c4); c4 = max(c3, c4); c3 = t
            t = min(c0, c3); c3 = max(c0, c3); c0 = t
            t = min(c2, c5); c5 = max(c2, c5); c2 = t
            t = min(c0, c1); c1 = max(c0, c1); c0 = t
            t = min(c2, c3); c3 = max(c2, c3); c2 = t
            t = min(c4, c5); c5 = max(c4, c5); c4 = t
            t = min(c1, c2); c2 = max(c1, c2); c1 = t
            t = min(c3, c4); c4 = max(c3, c4); c3 = t
            out[idx] = c0 + 56 * (c1 + 67 * (c2 + 84 * (c3 + 106 * c4)))
            idx += 1
    return idx


@njit(cache=True)
def profile_keys4(base, pa, out):
    """Order-4 analogue of profile_keys6 (one free row, 4 columns)."""
    na = pa.shape[0]
    idx = 0
    for i in range(na):
        c0 = base[0] + pa[i, 0]
        c1 = base[1] + pa[i, 1]
        c2 = base[2] + pa[i, 2]
        c3 = base[3] + pa[i, 3]
        t = min(c0, c1); c1 = max(c0, c1); c0 = t
        t = min(c2, c3); c3 = max(c2, c3); c2 = t
        t = min(c0, c2); c2 = max(c0, c2); c0 = t
        t = min(c1, c3); c3 = max(c1, c3); c1 = t
        t = min(c1, c2); c2 = max(c1, c2); c1 = t
        out[idx] = c0 + 18 * (c1 + 22 * c2)
        idx += 1
    return idx


@njit(cache=True)
def counting_sort_low12(keys, n, out, hist):
    """Stable counting sort of keys[:n] by the low 12 bits of the hash."""
    for b in range(4096):
        hist[b] = 0
    for i in range(n):
        hist[keys[i] & np.uint32(0xFFF)] += 1
    total = 0
    for b in range(4096):
        c = hist[b]
        hist[b] = total
        total += c
    for i in range(n):
        b = keys[i] & np.uint32(0xFFF)
        out[hist[b]] = keys[i]
        hist[b] += 1
    return n


@njit(cache=True)
def hist_insert(keys, n, table_keys, table_counts):
    """Open-addressing insert with linear probing; returns -1 on overflow.

    The probe sequence never wraps: walking past the 1024-slot tail is a
    hard error surfaced to the caller.
    """
    for i in range(n):
        k = keys[i]
        idx = np.int64(k & np.uint32(0xFFFFFF))
        while True:
            if table_counts[idx] == 0:
                table_keys[idx] = k
                table_counts[idx] = 1
                break
            if table_keys[idx] == k:
                table_counts[idx] += 1
                break
            idx += 1
            if idx >= TABLE_SIZE:
                return -1
    return 0


@njit(cache=True)
def hist_lookup_sum(keys, n, table_keys, table_counts):
    """Sum of stored values for keys[:n]; missing keys contribute zero."""
    total = np.int64(0)
    for i in range(n):
        k = keys[i]
        idx = np.int64(k & np.uint32(0xFFFFFF))
        while idx < TABLE_SIZE and table_counts[idx] != 0:
            if table_keys[idx] == k:
                total += np.int64(table_counts[idx])
                break
            idx += 1
    return total


@njit(cache=True)
def hist_probe_get(key, table_keys, table_counts):
    idx = np.int64(key & np.uint32(0xFFFFFF))
    while idx < TABLE_SIZE and table_counts[idx] != 0:
        if table_keys[idx] == key:
            return np.int64(table_counts[idx])
        idx += 1
    return np.int64(0)


@njit(cache=True)
def hist_max_slot(table_counts):
    """Highest occupied slot index, -1 when empty (tail-guard telemetry)."""
    top = np.int64(-1)
    for idx in range(TABLE_SIZE):
        if table_counts[idx] != 0:
            top = idx
    return top


# ---------------------------------------------------------------------------
# brute-force oracle (orders 3 and 4)
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _orbit_flags(sq, n2, dmaps):
    """(is_lexmin, is_selfsym) of a flat square among its dihedral images."""
    is_min = True
    selfsym = False
    for t in range(1, 8):
        cmp = 0
        for p in range(n2):
            a = sq[dmaps[t, p]]
            b = sq[p]
            if a != b:
                cmp = -1 if a < b else 1
                break
        if cmp == -1:
            is_min = False
            break
        if cmp == 0:
            selfsym = True
    return is_min, selfsym


@njit(cache=True)
def oracle4(set_vals, set_masks, dmaps, canon_buf):
    """Exhaustive enumeration of all order-4 semi-magic squares.

    Returns (raw, raw_magic, raw_pan, reduced, reduced_magic, reduced_pan,
    selfsym, n_canonical, err).  Canonical squares (row minima ascending,
    column pair sums ascending with top-entry tie break) emit their
    upper-half mask into canon_buf for per-class ground truth.
    """
    S = set_masks.shape[0]
    raw = 0
    raw_magic = 0
    raw_pan = 0
    red = 0
    red_magic = 0
    red_pan = 0
    selfsym_n = 0
    n_canon = 0
    err = 0
    sq = np.empty(16, dtype=np.int64)
    for i1 in range(S):
        m1 = set_masks[i1]
        for i2 in range(S):
            m2 = set_masks[i2]
            if m1 & m2:
                continue
            m12 = m1 | m2
            for i3 in range(S):
                m3 = set_masks[i3]
                if m3 & m12:
                    continue
                rem = 0xFFFF & ~(m12 | m3)
                for p1 in range(24):
                    for t in range(4):
                        sq[t] = set_vals[i1, PERM24[p1, t]]
                    for p2 in range(24):
                        for t in range(4):
                            sq[4 + t] = set_vals[i2, PERM24[p2, t]]
                        for p3 in range(24):
                            for t in range(4):
                                sq[8 + t] = set_vals[i3, PERM24[p3, t]]
                            used = 0
                            ok = True
                            for c in range(4):
                                d = 34 - sq[c] - sq[4 + c] - sq[8 + c]
                                if d < 1 or d > 16:
                                    ok = False
                                    break
                                bit = 1 << (d - 1)
                                if not (rem & bit) or (used & bit):
                                    ok = False
                                    break
                                used |= bit
                                sq[12 + c] = d
                            if not ok:
                                continue
                            raw += 1
                            main = sq[0] + sq[5] + sq[10] + sq[15]
                            anti = sq[3] + sq[6] + sq[9] + sq[12]
                            m_ok = main == 34 and anti == 34
                            p_ok = False
                            if m_ok:
                                raw_magic += 1
                                p_ok = True
                                for k in range(1, 4):
                                    sd = 0
                                    su = 0
                                    for r in range(4):
                                        sd += sq[4 * r + ((r + k) % 4)]
                                        su += sq[4 * r + ((k - r) % 4)]
                                    if sd != 34 or su != 34:
                                        p_ok = False
                                        break
                                if p_ok:
                                    raw_pan += 1
                            is_min, ssym = _orbit_flags(sq, 16, dmaps)
                            if ssym:
                                selfsym_n += 1
                            if is_min:
                                red += 1
                                if m_ok:
                                    red_magic += 1
                                if p_ok:
                                    red_pan += 1
                            rmin1 = min(min(sq[0], sq[1]), min(sq[2], sq[3]))
                            rmin2 = min(min(sq[4], sq[5]), min(sq[6], sq[7]))
                            rmin3 = min(min(sq[8], sq[9]), min(sq[10], sq[11]))
                            rmin4 = min(min(sq[12], sq[13]), min(sq[14], sq[15]))
                            if rmin1 < rmin2 and rmin2 < rmin3 and rmin3 < rmin4:
                                canon = True
                                prev_s = -1
                                prev_t = -1
                                for c in range(4):
                                    s = sq[c] + sq[4 + c]
                                    if s < prev_s or (s == prev_s and sq[c] < prev_t):
                                        canon = False
                                        break
                                    prev_s = s
                                    prev_t = sq[c]
                                if canon:
                                    if n_canon >= canon_buf.shape[0]:
                                        err = 1
                                    else:
                                        canon_buf[n_canon] = m12
                                    n_canon += 1
    return raw, raw_magic, raw_pan, red, red_magic, red_pan, selfsym_n, n_canon, err


@njit(cache=True)
def oracle3(set_vals, set_masks, dmaps):
    """Exhaustive enumeration of all order-3 semi-magic squares."""
    S = set_masks.shape[0]
    raw = 0
    raw_magic = 0
    raw_pan = 0
    red = 0
    red_magic = 0
    red_pan = 0
    selfsym_n = 0
    sq = np.empty(9, dtype=np.int64)
    for i1 in range(S):
        m1 = set_masks[i1]
        for i2 in range(S):
            m2 = set_masks[i2]
            if m1 & m2:
                continue
            rem = 0x1FF & ~(m1 | m2)
            for p1 in range(6):
                for t in range(3):
                    sq[t] = set_vals[i1, PERM6[p1, t]]
                for p2 in range(6):
                    for t in range(3):
                        sq[3 + t] = set_vals[i2, PERM6[p2, t]]
                    used = 0
                    ok = True
                    for c in range(3):
                        d = 15 - sq[c] - sq[3 + c]
                        if d < 1 or d > 9:
                            ok = False
                            break
                        bit = 1 << (d - 1)
                        if not (rem & bit) or (used & bit):
                            ok = False
                            break
                        used |= bit
                        sq[6 + c] = d
                    if not ok:
                        continue
                    raw += 1
                    main = sq[0] + sq[4] + sq[8]
                    anti = sq[2] + sq[4] + sq[6]
                    m_ok = main == 15 and anti == 15
                    p_ok = False
                    if m_ok:
                        raw_magic += 1
                        p_ok = True
                        for k in range(1, 3):
                            sd = 0
                            su = 0
                            for r in range(3):
                                sd += sq[3 * r + ((r + k) % 3)]
                                su += sq[3 * r + ((k - r) % 3)]
                            if sd != 15 or su != 15:
                                p_ok = False
                                break
                        if p_ok:
                            raw_pan += 1
                    is_min, ssym = _orbit_flags(sq, 9, dmaps)
                    if ssym:
                        selfsym_n += 1
                    if is_min:
                        red += 1
                        if m_ok:
                            red_magic += 1
                        if p_ok:
                            red_pan += 1
    return raw, raw_magic, raw_pan, red, red_magic, red_pan, selfsym_n


# ---------------------------------------------------------------------------
# Philox4x32-10 and the Monte Carlo estimator
# ---------------------------------------------------------------------------

_U32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = np.uint64(0x9E3779B9)
_PHILOX_W1 = np.uint64(0xBB67AE85)


@njit(cache=True, inline="always")
def philox4x32(c0, c1, c2, c3, k0, k1):
    """One Philox4x32-10 block; arguments and results are 32-bit values
    carried in uint64."""
    for _ in range(10):
        p0 = _PHILOX_M0 * c0
        p1 = _PHILOX_M1 * c2
        n0 = (p1 >> _SH32) ^ c1 ^ k0
        n1 = p1 & _U32
        n2 = (p0 >> _SH32) ^ c3 ^ k1
        n3 = p0 & _U32
        c0, c1, c2, c3 = n0 & _U32, n1, n2 & _U32, n3
        k0 = (k0 + _PHILOX_W0) & _U32
        k1 = (k1 + _PHILOX_W1) & _U32
    return c0, c1, c2, c3


@njit(cache=True, inline="always")
def _draw(bound, mask, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1):
    """Unbiased draw in [0, bound) by masked rejection on the stream."""
    while True:
        if bpos == 4:
            blk += np.uint64(1)
            w0, w1, w2, w3 = philox4x32(blk, pid, slo, shi, k0, k1)
            bpos = 0
        if bpos == 0:
            v = w0
        elif bpos == 1:
            v = w1
        elif bpos == 2:
            v = w2
        else:
            v = w3
        bpos += 1
        vi = np.int64(v & mask)
        if vi < bound:
            return vi, blk, bpos, w0, w1, w2, w3


@njit
def _count_d_rec(col, vals, avail, r4, r5, r6, ct0, ct1, ct2, ct3):
    """Exact fillings of the 3x4 tail block given row/column deficits.

    vals holds the 12 unused numbers; avail is their value bitmask.  The
    three rows take one value per column; the last column is forced by the
    row deficits.
    """
    if col == 3:
        if r4 == r5 or r4 == r6 or r5 == r6:
            return 0
        if r4 < 1 or r4 > 36 or r5 < 1 or r5 > 36 or r6 < 1 or r6 > 36:
            return 0
        need = (1 << (r4 - 1)) | (1 << (r5 - 1)) | (1 << (r6 - 1))
        if avail & need == need and r4 + r5 + r6 == ct3:
            return 1
        return 0
    target = ct0 if col == 0 else (ct1 if col == 1 else ct2)
    total = 0
    for xi in range(12):
        x = vals[xi]
        xb = 1 << (x - 1)
        if not (avail & xb) or x >= r4:
            continue
        for yi in range(12):
            if yi == xi:
                continue
            y = vals[yi]
            yb = 1 << (y - 1)
            if not (avail & yb) or y >= r5:
                continue
            z = target - x - y
            if z < 1 or z > 36 or z == x or z == y or z >= r6:
                continue
            zb = 1 << (z - 1)
            if not (avail & zb):
                continue
            total += _count_d_rec(
                col + 1,
                vals,
                avail & ~(xb | yb | zb),
                r4 - x,
                r5 - y,
                r6 - z,
                ct0,
                ct1,
                ct2,
                ct3,
            )
    return total


@njit(cache=True, inline="always")
def _remove_value(rem, cnt, value):
    """Swap-remove ``value`` from rem[:cnt]; returns the new count."""
    for i in range(cnt):
        if rem[i] == value:
            rem[i] = rem[cnt - 1]
            return cnt - 1
    return -1


@njit
def _prefix_contribution(a_vals, b_vals, rem_masks, pidx, slo, shi, k0, k1, rem, dvals):
    avail = rem_masks[pidx]
    cnt = 0
    mm = avail
    while mm:
        low = mm & -mm
        rem[cnt] = _bit_index(low) + 1
        cnt += 1
        mm ^= low
    pid = np.uint64(pidx)
    blk = np.uint64(0)
    bpos = 4
    w0 = np.uint64(0)
    w1 = np.uint64(0)
    w2 = np.uint64(0)
    w3 = np.uint64(0)

    a2 = a_vals[pidx, 1]
    a3 = a_vals[pidx, 2]
    a4 = a_vals[pidx, 3]
    a5 = a_vals[pidx, 4]
    a6 = a_vals[pidx, 5]
    b1 = b_vals[pidx, 0]
    b2 = b_vals[pidx, 1]
    b3 = b_vals[pidx, 2]
    b4 = b_vals[pidx, 3]
    b5 = b_vals[pidx, 4]
    m31 = np.uint64(31)
    m15 = np.uint64(15)

    # row 2: four free cells, the fifth forced by the row sum
    i, blk, bpos, w0, w1, w2, w3 = _draw(25, m31, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c1 = rem[i]
    cnt = _remove_value(rem, cnt, c1)
    avail &= ~(1 << (c1 - 1))
    i, blk, bpos, w0, w1, w2, w3 = _draw(24, m31, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c2 = rem[i]
    cnt = _remove_value(rem, cnt, c2)
    avail &= ~(1 << (c2 - 1))
    i, blk, bpos, w0, w1, w2, w3 = _draw(23, m31, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c3 = rem[i]
    cnt = _remove_value(rem, cnt, c3)
    avail &= ~(1 << (c3 - 1))
    i, blk, bpos, w0, w1, w2, w3 = _draw(22, m31, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c4 = rem[i]
    cnt = _remove_value(rem, cnt, c4)
    avail &= ~(1 << (c4 - 1))
    c5 = 111 - b1 - c1 - c2 - c3 - c4
    if c5 < 1 or c5 > 36 or not (avail & (1 << (c5 - 1))):
        return np.int64(0)
    cnt = _remove_value(rem, cnt, c5)
    avail &= ~(1 << (c5 - 1))

    # column 2: three free cells, the fourth forced by the column sum
    i, blk, bpos, w0, w1, w2, w3 = _draw(20, m31, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c6 = rem[i]
    cnt = _remove_value(rem, cnt, c6)
    avail &= ~(1 << (c6 - 1))
    i, blk, bpos, w0, w1, w2, w3 = _draw(19, m31, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c7 = rem[i]
    cnt = _remove_value(rem, cnt, c7)
    avail &= ~(1 << (c7 - 1))
    i, blk, bpos, w0, w1, w2, w3 = _draw(18, m31, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c8 = rem[i]
    cnt = _remove_value(rem, cnt, c8)
    avail &= ~(1 << (c8 - 1))
    c9 = 111 - a2 - c1 - c6 - c7 - c8
    if c9 < 1 or c9 > 36 or not (avail & (1 << (c9 - 1))):
        return np.int64(0)
    cnt = _remove_value(rem, cnt, c9)
    avail &= ~(1 << (c9 - 1))

    # row 3: three free cells, the fourth forced by the row sum
    i, blk, bpos, w0, w1, w2, w3 = _draw(16, m15, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c10 = rem[i]
    cnt = _remove_value(rem, cnt, c10)
    avail &= ~(1 << (c10 - 1))
    i, blk, bpos, w0, w1, w2, w3 = _draw(15, m15, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c11 = rem[i]
    cnt = _remove_value(rem, cnt, c11)
    avail &= ~(1 << (c11 - 1))
    i, blk, bpos, w0, w1, w2, w3 = _draw(14, m15, blk, bpos, w0, w1, w2, w3, pid, slo, shi, k0, k1)
    c12 = rem[i]
    cnt = _remove_value(rem, cnt, c12)
    avail &= ~(1 << (c12 - 1))
    c13 = 111 - b2 - c6 - c10 - c11 - c12
    if c13 < 1 or c13 > 36 or not (avail & (1 << (c13 - 1))):
        return np.int64(0)
    cnt = _remove_value(rem, cnt, c13)
    avail &= ~(1 << (c13 - 1))

    for t in range(12):
        dvals[t] = rem[t]
    return np.int64(
        _count_d_rec(
            0,
            dvals,
            avail,
            111 - b3 - c7,
            111 - b4 - c8,
            111 - b5 - c9,
            111 - a3 - c2 - c10,
            111 - a4 - c3 - c11,
            111 - a5 - c4 - c12,
            111 - a6 - c5 - c13,
        )
    )


@njit
def measure_one(a_vals, b_vals, rem_masks, seed_lo, seed_hi, sample_idx):
    """One measure: every prefix gets a random middle fill and contributes
    the exact number of tail completions (zero when a forced cell fails)."""
    P = a_vals.shape[0]
    xi = np.int64(0)
    rem = np.empty(25, dtype=np.int64)
    dvals = np.empty(12, dtype=np.int64)
    slo = np.uint64(sample_idx) & _U32
    shi = (np.uint64(sample_idx) >> _SH32) & _U32
    k0 = np.uint64(seed_lo) & _U32
    k1 = np.uint64(seed_hi) & _U32
    for pidx in range(P):
        xi += _prefix_contribution(a_vals, b_vals, rem_masks, pidx, slo, shi, k0, k1, rem, dvals)
    return xi


@njit(parallel=True)
def measure_batch(a_vals, b_vals, rem_masks, seed_lo, seed_hi, first_sample, out):
    for s in prange(out.shape[0]):
        out[s] = measure_one(a_vals, b_vals, rem_masks, seed_lo, seed_hi, first_sample + s)


@njit
def prefix_contribution_traced(a_vals, b_vals, rem_masks, pidx, seed_lo, seed_hi, sample_idx):
    """Single-prefix contribution, for cross-checking against the pure
    Python replay of the same substream."""
    rem = np.empty(25, dtype=np.int64)
    dvals = np.empty(12, dtype=np.int64)
    slo = np.uint64(sample_idx) & _U32
    shi = (np.uint64(sample_idx) >> _SH32) & _U32
    k0 = np.uint64(seed_lo) & _U32
    k1 = np.uint64(seed_hi) & _U32
    return _prefix_contribution(a_vals, b_vals, rem_masks, pidx, slo, shi, k0, k1, rem, dvals)


@njit(cache=True)
def build_prefixes(s1_vals, s1_masks, out_a, out_b, out_rem):
    """All (row-1 series, column-1 series) prefixes with 1 shared, ascending
    cells, and a2 < b1.  Returns the count."""
    K = s1_masks.shape[0]
    n = 0
    for ai in range(K):
        am = s1_masks[ai]
        a2 = s1_vals[ai, 1]
        for bi in range(K):
            bm = s1_masks[bi]
            if (am & bm) != 1:
                continue
            if a2 >= s1_vals[bi, 1]:
                continue
            if n >= out_a.shape[0]:
                return -1
            for t in range(6):
                out_a[n, t] = s1_vals[ai, t]
            for t in range(5):
                out_b[n, t] = s1_vals[bi, t + 1]
            out_rem[n] = UNIVERSE6 & ~(am | bm)
            n += 1
    return n


@njit(cache=True)
def exhaust_stage1(rem_vals, n_rem, b1):
    """Exhaustive row-2 stage: (valid forced-c5 states, direct ordered
    5-tuple count); the two must agree."""
    staged = 0
    target = 111 - b1
    for i1 in range(n_rem):
        v1 = rem_vals[i1]
        for i2 in range(n_rem):
            if i2 == i1:
                continue
            v2 = rem_vals[i2]
            for i3 in range(n_rem):
                if i3 == i1 or i3 == i2:
                    continue
                v3 = rem_vals[i3]
                for i4 in range(n_rem):
                    if i4 == i1 or i4 == i2 or i4 == i3:
                        continue
                    c5 = target - v1 - v2 - v3 - rem_vals[i4]
                    if c5 < 1 or c5 > 36:
                        continue
                    if c5 == v1 or c5 == v2 or c5 == v3 or c5 == rem_vals[i4]:
                        continue
                    for j in range(n_rem):
                        if rem_vals[j] == c5:
                            staged += 1
                            break
    direct = 0
    for i1 in range(n_rem):
        v1 = rem_vals[i1]
        for i2 in range(n_rem):
            if i2 == i1:
                continue
            v2 = v1 + rem_vals[i2]
            for i3 in range(n_rem):
                if i3 == i1 or i3 == i2:
                    continue
                v3 = v2 + rem_vals[i3]
                if v3 >= target:
                    continue
                for i4 in range(n_rem):
                    if i4 == i1 or i4 == i2 or i4 == i3:
                        continue
                    v4 = v3 + rem_vals[i4]
                    if v4 >= target:
                        continue
                    for i5 in range(n_rem):
                        if i5 == i1 or i5 == i2 or i5 == i3 or i5 == i4:
                            continue
                        if v4 + rem_vals[i5] == target:
                            direct += 1
    return staged, direct


@njit
def exhaust_stages23(a_row, b_col, avail0, c1, c2, c3, c4, c5):
    """Sum of tail-completion counts over every column-2 and row-3 fill.

    The row-2 cells c1..c5 are fixed; all ordered choices of (c6,c7,c8)
    and (c10,c11,c12) are enumerated with the same forced-cell rules the
    random estimator applies.
    """
    a2 = a_row[1]
    a3 = a_row[2]
    a4 = a_row[3]
    a5 = a_row[4]
    a6 = a_row[5]
    b2 = b_col[1]
    b3 = b_col[2]
    b4 = b_col[3]
    b5 = b_col[4]
    vals20 = np.empty(20, dtype=np.int64)
    cnt = 0
    mm = avail0
    while mm:
        low = mm & -mm
        vals20[cnt] = _bit_index(low) + 1
        cnt += 1
        mm ^= low
    dvals = np.empty(12, dtype=np.int64)
    total = np.int64(0)
    for i6 in range(20):
        c6 = vals20[i6]
        for i7 in range(20):
            if i7 == i6:
                continue
            c7 = vals20[i7]
            for i8 in range(20):
                if i8 == i6 or i8 == i7:
                    continue
                c8 = vals20[i8]
                c9 = 111 - a2 - c1 - c6 - c7 - c8
                if c9 < 1 or c9 > 36 or c9 == c6 or c9 == c7 or c9 == c8:
                    continue
                used2 = (1 << (c6 - 1)) | (1 << (c7 - 1)) | (1 << (c8 - 1))
                if not (avail0 & ~used2) & (1 << (c9 - 1)):
                    continue
                avail2 = avail0 & ~(used2 | (1 << (c9 - 1)))
                for i10 in range(20):
                    c10 = vals20[i10]
                    if not avail2 & (1 << (c10 - 1)):
                        continue
                    for i11 in range(20):
                        c11 = vals20[i11]
                        if i11 == i10 or not avail2 & (1 << (c11 - 1)):
                            continue
                        for i12 in range(20):
                            c12 = vals20[i12]
                            if i12 == i10 or i12 == i11 or not avail2 & (1 << (c12 - 1)):
                                continue
                            c13 = 111 - b2 - c6 - c10 - c11 - c12
                            if c13 < 1 or c13 > 36 or c13 == c10 or c13 == c11 or c13 == c12:
                                continue
                            used3 = (1 << (c10 - 1)) | (1 << (c11 - 1)) | (1 << (c12 - 1))
                            if not (avail2 & ~used3) & (1 << (c13 - 1)):
                                continue
                            avail3 = avail2 & ~(used3 | (1 << (c13 - 1)))
                            k = 0
                            mm2 = avail3
                            while mm2:
                                low2 = mm2 & -mm2
                                dvals[k] = _bit_index(low2) + 1
                                k += 1
                                mm2 ^= low2
                            total += _count_d_rec(
                                0,
                                dvals,
                                avail3,
                                111 - b3 - c7,
                                111 - b4 - c8,
                                111 - b5 - c9,
                                111 - a3 - c2 - c10,
                                111 - a4 - c3 - c11,
                                111 - a5 - c4 - c12,
                                111 - a6 - c5 - c13,
                            )
    return total


@njit
def _rect_rec(k, row_rem, col_rem, avail, nrows, ncols):
    """Completions of a nrows x ncols open block with given deficits;
    independent of the estimator's staged fill logic."""
    if k == nrows * ncols:
        return np.int64(1)
    r = k // ncols
    c = k % ncols
    last_r = c == ncols - 1
    last_c = r == nrows - 1
    total = np.int64(0)
    if last_r and last_c:
        v = row_rem[r]
        if v == col_rem[c] and 1 <= v <= 36 and avail & (1 << (v - 1)):
            row_rem[r] -= v
            col_rem[c] -= v
            total = _rect_rec(k + 1, row_rem, col_rem, avail & ~(1 << (v - 1)), nrows, ncols)
            row_rem[r] += v
            col_rem[c] += v
        return total
    if last_r:
        v = row_rem[r]
        if 1 <= v <= 36 and avail & (1 << (v - 1)) and v < col_rem[c]:
            row_rem[r] -= v
            col_rem[c] -= v
            total = _rect_rec(k + 1, row_rem, col_rem, avail & ~(1 << (v - 1)), nrows, ncols)
            row_rem[r] += v
            col_rem[c] += v
        return total
    if last_c:
        v = col_rem[c]
        if 1 <= v <= 36 and avail & (1 << (v - 1)) and v < row_rem[r]:
            row_rem[r] -= v
            col_rem[c] -= v
            total = _rect_rec(k + 1, row_rem, col_rem, avail & ~(1 << (v - 1)), nrows, ncols)
            row_rem[r] += v
            col_rem[c] += v
        return total
    mm = avail
    while mm:
        low = mm & -mm
        v = _bit_index(low) + 1
        mm ^= low
        if v < row_rem[r] and v < col_rem[c]:
            row_rem[r] -= v
            col_rem[c] -= v
            total += _rect_rec(k + 1, row_rem, col_rem, avail & ~low, nrows, ncols)
            row_rem[r] += v
            col_rem[c] += v
    return total


def count_rect_completions(row_rem, col_rem, avail) -> int:
    """Completions of an open rectangular block by distinct available
    numbers meeting per-row and per-column deficits."""
    rr = np.array(row_rem, dtype=np.int64)
    cc = np.array(col_rem, dtype=np.int64)
    return int(_rect_rec(0, rr, cc, np.int64(avail), rr.shape[0], cc.shape[0]))
