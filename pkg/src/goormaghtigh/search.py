"""Enumerate (m, x, n), rule triples out modulo small primes, verify survivors.

We look for f_m(x) = f_n(y) with m > n, y > x, both lengths prime. For each
length m and base x the value a = f_m(x) mod p comes from the sieve table
and is tested against every residue f_n(y) can take mod p. A single prime
with no matching residue rules the triple out over the integers.
"""

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .arith import integer_root, is_prime_small, is_probable_prime, primes_in, repunit_exact
from .tables import DEFAULT_PMAX, SieveTable, default_primes, lookup_a, n_feasible

KNOWN_VALUES = frozenset({31, 8191})

# Pairs per vectorized chunk; bounds peak memory of the kernel.
_CHUNK_PAIRS = 1 << 21
# int64 residue arithmetic and float log estimates need x well inside int64.
_NUMPY_X_LIMIT = 1 << 62
# Relative band around an integer where the float y-prune defers to exact arithmetic.
_PRUNE_EPS = 1e-9


class MissingTablesError(ValueError):
    pass


def fnv1a_64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass(frozen=True)
class SearchConfig:
    digits: int
    m_min: int = 53
    sieve_pmax: int = DEFAULT_PMAX
    y_floor: int = 100000
    x_min: int = 3
    use_m_min: bool = True
    use_n_ge_7: bool = True
    use_ratio_exclusion: bool = True
    use_y_prune: bool = True
    shard: tuple = (1, 1)
    x_block: int = 1 << 20
    adaptive: bool = False

    def __post_init__(self):
        if self.digits < 1:
            raise ValueError("digits must be >= 1")
        if self.x_block < 1:
            raise ValueError("x_block must be >= 1")
        if self.x_min < 2:
            raise ValueError("x_min must be >= 2")
        i, k = self.shard
        if not 1 <= i <= k:
            raise ValueError(f"shard index must satisfy 1 <= i <= k, got {i}/{k}")
        if self.sieve_pmax < 4:
            raise ValueError("sieve_pmax must admit at least the prime 3")

    @property
    def n_min(self) -> int:
        return 7 if self.use_n_ge_7 else 3

    @property
    def bound(self) -> int:
        return 10**self.digits

    def canonical_text(self) -> str:
        items = asdict(self)
        items["shard"] = "{}/{}".format(*self.shard)
        return "".join(f"{k}={int(v) if isinstance(v, bool) else v}\n" for k, v in sorted(items.items()))

    def config_hash(self) -> str:
        return format(fnv1a_64(self.canonical_text().encode()), "016x")


@dataclass(frozen=True)
class Candidate:
    m: int
    x: int
    n: int
    witness: int | None = None  # ruling-out prime, None if the triple survived

    @property
    def survived(self) -> bool:
        return self.witness is None


@dataclass(frozen=True)
class Solution:
    x: int
    m: int
    y: int
    n: int
    N: int
    n_prime: bool
    N_probable_prime: bool

    def record(self) -> dict:
        return {
            "type": "solution",
            "x": str(self.x),
            "m": self.m,
            "y": str(self.y),
            "n": self.n,
            "N": str(self.N),
            "n_prime": self.n_prime,
            "N_probable_prime": self.N_probable_prime,
        }


def m_floor(cfg: SearchConfig) -> int:
    return cfg.m_min if cfg.use_m_min else cfg.n_min + 1


def m_candidates(cfg: SearchConfig) -> list[int]:
    """Prime lengths m >= the configured floor with f_m(x_min) < 10^B."""
    bound = cfg.bound
    # f_m(x) > x^(m-1), so m - 1 < B log 10 / log x_min.
    top = int(cfg.digits * math.log(10) / math.log(cfg.x_min)) + 2
    lo = m_floor(cfg)
    if top < lo:
        return []
    return [m for m in primes_in(lo, top) if repunit_exact(cfg.x_min, m) < bound]


def x_limit(m: int, cfg: SearchConfig) -> int:
    """Largest x with f_m(x) < 10^B (may fall below x_min)."""
    bound = cfg.bound
    x = integer_root(bound - 1, m - 1)
    while x >= 2 and repunit_exact(x, m) >= bound:
        x -= 1
    return x


def x_range(m: int, cfg: SearchConfig) -> range:
    return range(cfg.x_min, max(cfg.x_min, x_limit(m, cfg) + 1))


def excluded_pair(m: int, n: int) -> bool:
    """Length pairs ruled out by the (m-1) = 3(n-1) theorem."""
    if not (is_prime_small(m) and is_prime_small(n)) or m <= n:
        raise ValueError(f"excluded_pair needs primes m > n, got m={m}, n={n}")
    return m - 1 == 3 * (n - 1)


@lru_cache(maxsize=4096)
def _base_lengths(m: int, n_min: int, ratio: bool) -> tuple:
    if m - 1 < n_min:
        return ()
    return tuple(n for n in primes_in(n_min, m - 1) if not (ratio and m - 1 == 3 * (n - 1)))


def lengths_for(m: int, cfg: SearchConfig) -> tuple:
    """Candidate n for m before the y-prune."""
    return _base_lengths(m, cfg.n_min, cfg.use_ratio_exclusion)


def y_min(x: int, cfg: SearchConfig) -> int:
    return max(x + 1, cfg.y_floor + 1)


def n_candidates(m: int, x: int, cfg: SearchConfig) -> list[int]:
    ns = lengths_for(m, cfg)
    if not cfg.use_y_prune:
        return list(ns)
    # Any second representation has y >= y_min and f_n(y) > y^(n-1).
    N = repunit_exact(x, m)
    ym = y_min(x, cfg)
    return [n for n in ns if ym ** (n - 1) <= N]


def rule_out(tables, m: int, x: int, n: int) -> int | None:
    """First table prime that rules out f_m(x) = f_n(y), or None if all admit a solution."""
    for t in tables:
        if not n_feasible(t, lookup_a(t, x % t.p, m), n):
            return t.p
    return None


def find_base(N: int, n: int, lo: int) -> int | None:
    """Integer y >= lo with f_n(y) = N, for n >= 3.

    y^(n-1) < f_n(y) < (y+1)^(n-1), so any solution lies at the integer
    (n-1)-th root of N; bisection runs on the bracket around it.
    """
    if N < 1 or n < 3:
        raise ValueError("find_base needs N >= 1 and n >= 3")
    r = integer_root(N, n - 1)
    lo, hi = max(lo, r - 1, 2), r + 1
    while lo <= hi:
        mid = (lo + hi) // 2
        v = repunit_exact(mid, n)
        if v == N:
            return mid
        if v < N:
            lo = mid + 1
        else:
            hi = mid - 1
    return None


def verify_candidate(m: int, x: int, n: int) -> Solution | None:
    if x < 2 or n < 3:
        raise ValueError("verify_candidate needs x >= 2 and n >= 3")
    N = repunit_exact(x, m)
    y = find_base(N, n, x + 1)
    if y is None:
        return None
    return Solution(x=x, m=m, y=y, n=n, N=N, n_prime=is_prime_small(n), N_probable_prime=is_probable_prime(N))


def select_tables(tables, cfg: SearchConfig) -> list[SieveTable]:
    """The tables with p < sieve_pmax, ascending; every such odd prime must be present."""
    by_p = {t.p: t for t in tables}
    wanted = default_primes(cfg.sieve_pmax)
    missing = [p for p in wanted if p not in by_p]
    if missing:
        raise MissingTablesError(f"no sieve table for primes {missing[:5]}{'...' if len(missing) > 5 else ''}")
    return [by_p[p] for p in wanted]


# ---- block kernel -----------------------------------------------------------


@dataclass
class BlockResult:
    index: int
    m: int
    x_lo: int
    x_hi: int
    survivors: list = field(default_factory=list)
    solutions: list = field(default_factory=list)
    kills: dict = field(default_factory=dict)

    def records(self) -> list[dict]:
        out = []
        by_triple = {(s.m, s.x, s.n): s for s in self.solutions}
        for c in self.survivors:
            out.append({"type": "survivor", "m": c.m, "x": str(c.x), "n": c.n})
            sol = by_triple.get((c.m, c.x, c.n))
            if sol is not None:
                out.append(sol.record())
        out.append({"type": "progress", "m": self.m, "x_block_start": self.x_lo, "x_block_end": self.x_hi})
        return out


class _MaskCache:
    """Per-table stacked n-masks for the current length list (last one kept)."""

    def __init__(self):
        self._key = {}
        self._val = {}

    def get(self, t: SieveTable, ns: tuple) -> np.ndarray:
        if self._key.get(t.p) is not ns:
            self._key[t.p] = ns
            self._val[t.p] = np.stack([t.n_mask(n) for n in ns])
        return self._val[t.p]


_masks = _MaskCache()


def _prune_caps(xs: np.ndarray, m: int, cfg: SearchConfig) -> np.ndarray:
    """Per x, the largest allowed value of n-1 (as a float) under the y-prune."""
    xf = xs.astype(np.float64)
    log_n = m * np.log(xf) - np.log(xf - 1.0) + np.log1p(-np.power(xf, -float(m)))
    log_y = np.log(np.maximum(xf + 1.0, float(cfg.y_floor + 1)))
    caps = log_n / log_y
    near = np.abs(caps - np.rint(caps)) <= _PRUNE_EPS * np.maximum(caps, 1.0)
    for i in np.flatnonzero(near):
        x = int(xs[i])
        j = int(round(float(caps[i])))
        exact = y_min(x, cfg) ** j <= repunit_exact(x, m) if j >= 0 else False
        caps[i] = j if exact else j - 0.5
    return caps


def _sieve_chunk(tables, m: int, xs: np.ndarray, ns: tuple, cfg: SearchConfig, kills: dict):
    ns_arr = np.asarray(ns, dtype=np.int64)
    if cfg.use_y_prune:
        counts = np.searchsorted(ns_arr - 1, _prune_caps(xs, m, cfg), side="right")
    else:
        counts = np.full(len(xs), len(ns), dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        return []
    ix = np.repeat(np.arange(len(xs)), counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    jn = np.arange(total) - starts
    px = xs[ix]
    for t in tables:
        p = t.p
        a = t.a_row(m)[px % p]
        ok = _masks.get(t, ns)[jn, a]
        dead = total - int(np.count_nonzero(ok))
        if dead:
            kills[p] = kills.get(p, 0) + dead
            px, jn = px[ok], jn[ok]
            total -= dead
            if total == 0:
                return []
    return [(int(x), ns[j]) for x, j in zip(px.tolist(), jn.tolist())]


def sieve_block(tables, m: int, x_lo: int, x_hi: int, cfg: SearchConfig, kills: dict) -> list[tuple]:
    """Survivors (x, n) with x in [x_lo, x_hi]; ruled-out counts accumulate into kills."""
    ns = lengths_for(m, cfg)
    if not ns or x_hi < x_lo:
        return []
    if x_hi >= _NUMPY_X_LIMIT:
        out = []
        for x in range(x_lo, x_hi + 1):
            for n in n_candidates(m, x, cfg):
                w = rule_out(tables, m, x, n)
                if w is None:
                    out.append((x, n))
                else:
                    kills[w] = kills.get(w, 0) + 1
        return out
    step = max(1, _CHUNK_PAIRS // len(ns))
    out = []
    for lo in range(x_lo, x_hi + 1, step):
        xs = np.arange(lo, min(lo + step, x_hi + 1), dtype=np.int64)
        out.extend(_sieve_chunk(tables, m, xs, ns, cfg, kills))
    return out


def process_block(tables, cfg: SearchConfig, unit: tuple) -> BlockResult:
    index, m, x_lo, x_hi = unit
    res = BlockResult(index, m, x_lo, x_hi)
    for x, n in sieve_block(tables, m, x_lo, x_hi, cfg, res.kills):
        res.survivors.append(Candidate(m, x, n))
        sol = verify_candidate(m, x, n)
        if sol is not None:
            res.solutions.append(sol)
    return res


def iter_blocks(cfg: SearchConfig, start=None):
    """Yield (global_index, m, x_lo, x_hi) for this shard's blocks, in search order.

    Blocks are numbered globally across all m; shard i of k owns the blocks
    with index = i-1 (mod k). start = (m, next_x, next_index) resumes.
    """
    i, k = cfg.shard
    xb = cfg.x_block
    g = 0
    for m in m_candidates(cfg):
        if start is not None and m < start[0]:
            continue
        x_hi = x_limit(m, cfg)
        x = cfg.x_min
        if start is not None and m == start[0]:
            x, g = start[1], start[2]
        while x <= x_hi:
            hi = min(x + xb - 1, x_hi)
            if g % k == i - 1:
                yield g, m, x, hi
            g += 1
            x = hi + 1


# ---- reports ----------------------------------------------------------------


@dataclass
class Report:
    records: list = field(default_factory=list)
    kills: dict = field(default_factory=dict)

    def add_block(self, res: BlockResult) -> None:
        self.records.extend(res.records())
        for p, c in res.kills.items():
            self.kills[p] = self.kills.get(p, 0) + c

    def stats_records(self) -> list[dict]:
        return [{"type": "stats", "p": p, "kills": c} for p, c in sorted(self.kills.items())]

    def all_records(self) -> list[dict]:
        return self.records + self.stats_records()

    @property
    def solutions(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "solution"]

    @property
    def survivors(self) -> list[dict]:
        return [r for r in self.records if r["type"] == "survivor"]


def merge_reports(reports) -> Report:
    """Union of records (deduplicated, stable) with per-prime kills summed."""
    out = Report()
    seen = set()
    for rep in reports:
        for rec in rep.records:
            key = tuple(sorted(rec.items()))
            if key not in seen:
                seen.add(key)
                out.records.append(rec)
        for p, c in rep.kills.items():
            out.kills[p] = out.kills.get(p, 0) + c
    return out


def prime_order(tables, kills: dict, adaptive: bool) -> list[SieveTable]:
    if not adaptive:
        return list(tables)
    return sorted(tables, key=lambda t: (-kills.get(t.p, 0), t.p))


def search_shard(cfg: SearchConfig, tables) -> Report:
    """Run this shard's whole search in-process and return the report."""
    tables = select_tables(tables, cfg)
    rep = Report()
    for unit in iter_blocks(cfg):
        rep.add_block(process_block(prime_order(tables, rep.kills, cfg.adaptive), cfg, unit))
    return rep


def is_unexpected(rec: dict) -> bool:
    """Solution or survivor record whose value is not one of the two known coincidences."""
    if rec.get("type") == "solution":
        return int(rec["N"]) not in KNOWN_VALUES
    if rec.get("type") == "survivor":
        return repunit_exact(int(rec["x"]), rec["m"]) not in KNOWN_VALUES
    if rec.get("type") == "hit":
        return int(rec["N"]) not in KNOWN_VALUES
    return False
