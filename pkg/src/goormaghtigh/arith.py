"""Exact and modular repunit arithmetic plus the primality helpers the search needs.

Naturals are plain Python ints; decimal strings are their external encoding.
"""

from math import isqrt

# Deterministic Miller-Rabin witnesses for every n < 3.3 * 10^24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3317044064679887385961981
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def repunit_exact(base: int, length: int) -> int:
    """Return 1 + base + ... + base**(length-1)."""
    if base < 2:
        raise ValueError(f"repunit base must be >= 2, got {base}")
    if length < 1:
        raise ValueError(f"repunit length must be >= 1, got {length}")
    return (base**length - 1) // (base - 1)


def repunit_mod(base: int, length: int, p: int) -> int:
    """Return f_length(base) mod p for an odd prime p.

    The division by base-1 is done with a modular inverse; base = 0 and
    base = 1 (mod p) are the two cases where that inverse does not exist.
    """
    if length < 1:
        raise ValueError(f"repunit length must be >= 1, got {length}")
    b = base % p
    if b == 0:
        return 1 % p
    if b == 1:
        return length % p
    return (pow(b, length, p) - 1) * pow(b - 1, -1, p) % p


def _miller_rabin(n: int, bases) -> bool:
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in bases:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime_small(k: int) -> bool:
    """Deterministic primality for word-sized k (exact up to 3.3e24)."""
    if k < 2:
        return False
    for p in _SMALL_PRIMES:
        if k % p == 0:
            return k == p
    if k < 97 * 97:
        return True
    if k >= _MR_DETERMINISTIC_LIMIT:
        raise ValueError("is_prime_small is only deterministic below 3.3e24; use is_probable_prime")
    return _miller_rabin(k, _MR_BASES)


def jacobi(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi symbol needs a positive odd modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _strong_lucas(n: int) -> bool:
    # Selfridge's method A: first D in 5, -7, 9, -11, ... with (D|n) = -1.
    D = 5
    while True:
        j = jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
    P, Q = 1, (1 - D) // 4

    d = n + 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1

    inv2 = (n + 1) // 2
    U, V, Qk = 1, P, Q % n
    for bit in bin(d)[3:]:
        U = U * V % n
        V = (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = (P * U + V) * inv2 % n, (D * U + P * V) * inv2 % n
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if V == 0:
            return True
    return False


def is_probable_prime(N: int) -> bool:
    """Baillie-PSW: strong base-2 Miller-Rabin followed by a strong Lucas test.

    Exact below 3.3e24 (deterministic Miller-Rabin); beyond that no BPSW
    counterexample is known.
    """
    if N < 2:
        return False
    for p in _SMALL_PRIMES:
        if N % p == 0:
            return N == p
    if N < _MR_DETERMINISTIC_LIMIT:
        return is_prime_small(N)
    if not _miller_rabin(N, (2,)):
        return False
    r = isqrt(N)
    if r * r == N:
        return False
    return _strong_lucas(N)


def primes_in(lo: int, hi: int) -> list[int]:
    """All primes in the closed interval [lo, hi], ascending."""
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if hi < 2:
        return []
    sieve = bytearray([1]) * (hi + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(hi) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(range(i * i, hi + 1, i)))
    return [i for i in range(max(lo, 2), hi + 1) if sieve[i]]


def integer_root(N: int, k: int) -> int:
    """Largest r >= 0 with r**k <= N."""
    if N < 0 or k < 1:
        raise ValueError("integer_root needs N >= 0 and k >= 1")
    if N < 2 or k == 1:
        return N
    if k == 2:
        return isqrt(N)
    # Newton iteration from an overestimate decreases monotonically to the root.
    r = 1 << -(-N.bit_length() // k)
    while True:
        s = ((k - 1) * r + N // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r**k > N:
        r -= 1
    while (r + 1) ** k <= N:
        r += 1
    return r


def to_decimal(n: int) -> str:
    if n < 0:
        raise ValueError("naturals are nonnegative")
    return str(n)


def from_decimal(text: str) -> int:
    """Parse a canonical decimal string (no sign, no leading zeros)."""
    if not text.isdigit() or not text.isascii() or (len(text) > 1 and text[0] == "0"):
        raise ValueError(f"not a canonical decimal natural: {text!r}")
    return int(text)
