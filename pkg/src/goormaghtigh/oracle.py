"""Brute-force ground truth for repunit coincidences.

Independent of the sieve: values are enumerated directly and grouped.
"""

import heapq
from collections import defaultdict
from dataclasses import dataclass
from itertools import groupby

from .arith import is_prime_small, is_probable_prime, primes_in
from .search import Solution, find_base

# Above this limit the in-memory multimap gives way to a k-way merge of sorted streams.
STREAM_THRESHOLD = 10**9


@dataclass(frozen=True)
class RepunitHit:
    N: int
    representations: tuple  # ((base, length), ...) sorted by base

    def record(self) -> dict:
        return {
            "type": "hit",
            "N": str(self.N),
            "representations": [{"base": b, "length": k} for b, k in self.representations],
        }


def _stream(limit: int, length: int):
    # f_length(b) for b = 2, 3, ... while <= limit; ascending in b.
    b = 2
    while True:
        v = (b**length - 1) // (b - 1)
        if v > limit:
            return
        yield v, b, length
        b += 1


def _lengths(limit: int) -> range:
    # f_k(2) = 2^k - 1 is the smallest length-k repunit.
    return range(3, (limit + 1).bit_length() + 1)


def oracle_enumerate(limit: int) -> list[RepunitHit]:
    """Every N <= limit with at least two representations f_k(b), k >= 3, b >= 2."""
    if limit < 7:
        raise ValueError("limit must be >= 7")
    hits = []
    if limit <= STREAM_THRESHOLD:
        table = defaultdict(list)
        for k in _lengths(limit):
            for v, b, _ in _stream(limit, k):
                table[v].append((b, k))
        for v in sorted(table):
            if len(table[v]) >= 2:
                hits.append(RepunitHit(v, tuple(sorted(table[v]))))
        return hits
    merged = heapq.merge(*(_stream(limit, k) for k in _lengths(limit)))
    for v, group in groupby(merged, key=lambda e: e[0]):
        reps = [(b, k) for _, b, k in group]
        if len(reps) >= 2:
            hits.append(RepunitHit(v, tuple(sorted(reps))))
    return hits


def bateman_stemmler(limit: int) -> list[RepunitHit]:
    """Hits where N is prime and at least two representation bases are prime."""
    if limit < 31:
        raise ValueError("limit must be >= 31")
    return [
        h
        for h in oracle_enumerate(limit)
        if is_probable_prime(h.N) and sum(is_prime_small(b) for b, _ in h.representations) >= 2
    ]


def mersenne_scan(digits: int) -> list[Solution]:
    """All (m, n, y) with m prime, 2^m - 1 < 10^digits and f_n(y) = 2^m - 1, 3 <= n < m, y >= 3."""
    if digits < 2:
        raise ValueError("digits must be >= 2")
    bound = 10**digits
    top = bound.bit_length()
    out = []
    for m in primes_in(2, top):
        N = (1 << m) - 1
        if N >= bound:
            break
        for n in range(3, m):
            y = find_base(N, n, 3)
            if y is not None:
                out.append(Solution(x=2, m=m, y=y, n=n, N=N, n_prime=is_prime_small(n), N_probable_prime=is_probable_prime(N)))
    return out
