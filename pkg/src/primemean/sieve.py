"""Prime generation and smallest-prime-factor tables.

Whole-range and segmented odd-only sieves of Eratosthenes.  The segmented
stream keeps memory at O(segment_size + sqrt(hi)) so a desk machine can walk
every prime up to 1e9; the smallest-prime-factor (SPF) table is the exact
factorization oracle used by brute-force cross-checks and is deliberately
capped at a much smaller range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import GridError

DEFAULT_SEGMENT_SIZE = 1 << 20  # numbers per segment
DEFAULT_MAX_BOUND = 10 ** 9     # address budget for sieving
SPF_CAP = 10 ** 7               # SPF tables stay oracle-sized


def primes_up_to(limit: int) -> np.ndarray:
    """All primes p <= limit, ascending, as an int64 array.

    Odd-only bitmap: index i represents 2i+3, so composites of an odd prime
    p start at (p*p - 3) / 2 with stride p.
    """
    limit = int(limit)
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    if limit < 3:
        return np.array([2], dtype=np.int64)
    size = (limit - 1) // 2
    mask = np.ones(size, dtype=bool)
    for i in range((math.isqrt(limit) - 1) // 2):
        if mask[i]:
            p = 2 * i + 3
            mask[(p * p - 3) // 2:: p] = False
    odds = 2 * np.flatnonzero(mask).astype(np.int64) + 3
    return np.concatenate((np.array([2], dtype=np.int64), odds))


def _segment_primes(lo: int, hi: int, base_odd: np.ndarray) -> np.ndarray:
    """Primes in the half-open window [lo, hi).

    `base_odd` must contain every odd prime <= sqrt(hi - 1).
    """
    if hi <= 2 or hi <= lo:
        return np.empty(0, dtype=np.int64)
    first_odd = max(lo, 3) | 1
    out_two = lo <= 2 < hi
    if first_odd >= hi:
        return np.array([2], dtype=np.int64) if out_two else np.empty(0, dtype=np.int64)
    size = (hi - first_odd + 1) // 2
    mask = np.ones(size, dtype=bool)
    top = math.isqrt(hi - 1)
    for p in base_odd:
        p = int(p)
        if p > top:
            break
        start = max(p * p, ((first_odd + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start >= hi:
            continue
        mask[(start - first_odd) // 2:: p] = False
    primes = first_odd + 2 * np.flatnonzero(mask).astype(np.int64)
    if out_two:
        return np.concatenate((np.array([2], dtype=np.int64), primes))
    return primes


@dataclass(frozen=True)
class PrimeStream:
    """Lazy ascending stream of the primes in [lo, hi] (inclusive).

    Segments are independently sievable: `segment_bounds()` plus
    `segment(i)` let a driver pull disjoint windows concurrently, while
    `segments()` / iteration walk them in ascending order.
    """

    lo: int
    hi: int
    segment_size: int

    def __post_init__(self):
        if not (2 <= self.lo <= self.hi):
            raise GridError(f"need 2 <= lo <= hi, got [{self.lo}, {self.hi}]")
        if self.segment_size < 64:
            raise GridError(f"segment size too small: {self.segment_size}")

    def segment_bounds(self) -> list[tuple[int, int]]:
        end = self.hi + 1
        bounds = []
        lo = self.lo
        while lo < end:
            bounds.append((lo, min(lo + self.segment_size, end)))
            lo += self.segment_size
        return bounds

    def _base(self) -> np.ndarray:
        return primes_up_to(math.isqrt(self.hi))[1:]  # odd base primes

    def segment(self, i: int, base_odd: np.ndarray | None = None) -> np.ndarray:
        lo, hi = self.segment_bounds()[i]
        return _segment_primes(lo, hi, self._base() if base_odd is None else base_odd)

    def segments(self) -> Iterator[np.ndarray]:
        base = self._base()
        for lo, hi in self.segment_bounds():
            yield _segment_primes(lo, hi, base)

    def __iter__(self) -> Iterator[int]:
        for seg in self.segments():
            yield from (int(p) for p in seg)


def stream_segmented(
    lo: int,
    hi: int,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    max_bound: int = DEFAULT_MAX_BOUND,
) -> PrimeStream:
    """Segmented prime stream over [lo, hi] with a hard address budget."""
    if hi > max_bound:
        raise GridError(f"hi={hi} exceeds the sieve bound {max_bound}")
    return PrimeStream(int(lo), int(hi), int(segment_size))


@dataclass(frozen=True)
class SpfTable:
    """Smallest-prime-factor table for exact factorization up to `limit`."""

    limit: int
    spf: np.ndarray

    def is_prime(self, k: int) -> bool:
        return k >= 2 and int(self.spf[k]) == k


def spf_build(limit: int, cap: int = SPF_CAP) -> SpfTable:
    """Build the SPF table for 0..limit (spf[0] = spf[1] = 0)."""
    limit = int(limit)
    if limit > cap:
        raise GridError(f"SPF table limit {limit} exceeds cap {cap}")
    if limit < 2:
        return SpfTable(limit, np.zeros(limit + 1, dtype=np.int32))
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            window = spf[p * p:: p]
            window[window == 0] = p
    untouched = np.flatnonzero(spf[2:] == 0) + 2
    spf[untouched] = untouched
    return SpfTable(limit, spf)


def factorize(k: int, table: SpfTable) -> list[tuple[int, int]]:
    """Exact factorization of k as ascending (prime, multiplicity) pairs.

    k < 2 has the empty factorization.
    """
    if k > table.limit:
        raise GridError(f"k={k} exceeds SPF table limit {table.limit}")
    if k < 2:
        return []
    spf = table.spf
    out: list[tuple[int, int]] = []
    while k > 1:
        p = int(spf[k])
        a = 0
        while k % p == 0:
            k //= p
            a += 1
        out.append((p, a))
    return out
