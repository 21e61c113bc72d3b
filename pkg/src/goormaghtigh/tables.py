"""Per-prime repunit residue tables and their binary file format.

For an odd prime p the table stores f_q(b) mod p for 2 <= b <= p-1 and
1 <= q <= p-1. Because b**(p-1) = 1 (mod p) for those b, the residue of
f_k(b) only depends on k modulo p-1, so these rows answer every length.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .arith import is_prime_small, primes_in

MAGIC = b"GMSV"
VERSION = 1
DEFAULT_PMAX = 1024

_HEADER = struct.Struct("<4sBI")
_PRIME = struct.Struct("<I")


class TableFormatError(ValueError):
    """Base class for unreadable table files."""


class BadMagicError(TableFormatError):
    pass


class VersionMismatchError(TableFormatError):
    pass


class TruncatedTableError(TableFormatError):
    pass


def exponent_class(k: int, p: int) -> int:
    """Canonical representative r in [1, p-1] with r = k (mod p-1)."""
    return (k - 1) % (p - 1) + 1


@dataclass(eq=False)
class SieveTable:
    p: int
    # values[b-2, q-1] = f_q(b) mod p
    values: np.ndarray
    # feasible[r-1] is a little-endian packed p-bit set of {f_r(b) mod p : 2 <= b < p}
    feasible: np.ndarray = field(init=False, repr=False)
    _masks: dict = field(init=False, repr=False, default_factory=dict)
    _rows: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        p = self.p
        if self.values.shape != (p - 2, p - 1):
            raise ValueError(f"values for p={p} must have shape {(p - 2, p - 1)}, got {self.values.shape}")
        member = np.zeros((p - 1, p), dtype=bool)
        rows = np.repeat(np.arange(p - 1), p - 2)
        member[rows, self.values.T.ravel()] = True
        self.feasible = np.packbits(member, axis=1, bitorder="little")

    def __eq__(self, other):
        if not isinstance(other, SieveTable):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.values, other.values)

    def feasible_set(self, r: int) -> set[int]:
        bits = np.unpackbits(self.feasible[r - 1], bitorder="little", count=self.p)
        return set(np.flatnonzero(bits).tolist())

    def a_row(self, m: int) -> np.ndarray:
        """f_m(b) mod p for every residue b in [0, p), as an int64 array."""
        row = self._rows.get(m)
        if row is None:
            p = self.p
            row = np.empty(p, dtype=np.int64)
            row[0] = 1
            row[1] = m % p
            row[2:] = self.values[:, exponent_class(m, p) - 1]
            if len(self._rows) < 4096:
                self._rows[m] = row
        return row

    def n_mask(self, n: int) -> np.ndarray:
        """Boolean array over a in [0, p): can f_n(y) = a (mod p) for some y?"""
        mask = self._masks.get(n)
        if mask is None:
            p = self.p
            bits = np.unpackbits(self.feasible[exponent_class(n, p) - 1], bitorder="little", count=p)
            mask = bits.astype(bool)
            mask[1] = True  # y = 0 (mod p)
            mask[n % p] = True  # y = 1 (mod p)
            self._masks[n] = mask
        return mask


def build_table(p: int) -> SieveTable:
    if p == 2 or p < 2 or not is_prime_small(p):
        raise ValueError(f"sieve tables need an odd prime, got {p}")
    if p >= 1 << 16:
        raise ValueError("residues are stored in 16 bits; p must be < 65536")
    b = np.arange(2, p, dtype=np.int64)
    values = np.empty((p - 2, p - 1), dtype=np.uint16)
    row = np.ones(p - 2, dtype=np.int64)
    values[:, 0] = row
    for q in range(1, p - 1):
        row = (row * b + 1) % p
        values[:, q] = row
    return SieveTable(p, values)


def default_primes(pmax: int = DEFAULT_PMAX) -> list[int]:
    """Odd primes below pmax."""
    if pmax <= 3:
        return []
    return primes_in(3, pmax - 1)


def build_tables(pmax: int = DEFAULT_PMAX) -> list[SieveTable]:
    return [build_table(p) for p in default_primes(pmax)]


def lookup_a(table: SieveTable, x_res: int, m: int) -> int:
    """f_m(x) mod p given x mod p."""
    p = table.p
    x_res %= p
    if x_res == 0:
        return 1
    if x_res == 1:
        return m % p
    return int(table.values[x_res - 2, exponent_class(m, p) - 1])


def n_feasible(table: SieveTable, a: int, n: int) -> bool:
    """False iff no residue y mod p has f_n(y) = a (mod p)."""
    p = table.p
    if a == 1 or a == n % p:
        return True
    r = exponent_class(n, p)
    byte = table.feasible[r - 1, a >> 3]
    return bool((byte >> (a & 7)) & 1)


def save_tables(tables, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(tables)))
        for t in tables:
            fh.write(_PRIME.pack(t.p))
            fh.write(t.values.astype("<u2", copy=False).tobytes(order="C"))


def load_tables(path) -> list[SieveTable]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a sieve table file (bad magic)")
    if len(data) < _HEADER.size:
        raise TruncatedTableError(f"{path}: truncated header")
    _, version, count = _HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise VersionMismatchError(f"{path}: table format version {version}, expected {VERSION}")
    pos = _HEADER.size
    tables = []
    for i in range(count):
        if pos + _PRIME.size > len(data):
            raise TruncatedTableError(f"{path}: truncated before table {i + 1} of {count}")
        (p,) = _PRIME.unpack_from(data, pos)
        pos += _PRIME.size
        if p < 3 or p >= 1 << 16 or not is_prime_small(p):
            raise TableFormatError(f"{path}: table {i + 1} has invalid modulus {p}")
        nbytes = 2 * (p - 2) * (p - 1)
        if pos + nbytes > len(data):
            raise TruncatedTableError(f"{path}: truncated inside table for p={p}")
        values = np.frombuffer(data, dtype="<u2", count=(p - 2) * (p - 1), offset=pos)
        values = values.reshape(p - 2, p - 1).astype(np.uint16)
        if values.size and int(values.max()) >= p:
            raise TableFormatError(f"{path}: residue out of range in table for p={p}")
        pos += nbytes
        tables.append(SieveTable(p, values))
    if pos != len(data):
        raise TableFormatError(f"{path}: {len(data) - pos} trailing bytes")
    return tables
