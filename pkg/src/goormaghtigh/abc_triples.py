"""abc triples built from a repunit coincidence f_m(x) = f_n(y).

Clearing denominators gives x^m (y-1) + (x-y) = y^n (x-1); dividing the
three terms by their gcd g yields a + b = c with b < 0 when y > x.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from .arith import is_probable_prime, primes_in

TRIAL_LIMIT = 10**6
DEFAULT_RHO_BUDGET = 2_000_000

_trial_primes = None


class FactorizationError(RuntimeError):
    """A composite cofactor resisted factoring within the effort budget."""


def _small_primes():
    global _trial_primes
    if _trial_primes is None:
        _trial_primes = primes_in(2, TRIAL_LIMIT)
    return _trial_primes


def _brent(n: int, budget: int) -> tuple[int | None, int]:
    """A nontrivial factor of odd composite n by Pollard-Brent, and the iterations spent."""
    spent = 0
    for c in range(1, 50):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += 128
            spent += r
            if spent > budget:
                return None, spent
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g, spent
    return None, spent


def factorize(N: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> dict[int, int]:
    """Prime factorization {prime: exponent}; primes above 10^6 are probable primes."""
    if N < 1:
        raise ValueError("factorize needs N >= 1")
    out = {}
    for p in _small_primes():
        if p * p > N:
            break
        if N % p == 0:
            e = 0
            while N % p == 0:
                N //= p
                e += 1
            out[p] = e
    if N == 1:
        return out
    stack = [N]
    budget = rho_budget
    while stack:
        n = stack.pop()
        if n == 1:
            continue
        if is_probable_prime(n):
            out[n] = out.get(n, 0) + 1
            continue
        r = isqrt(n)
        if r * r == n:
            stack += [r, r]
            continue
        f, spent = _brent(n, budget)
        budget -= spent
        if f is None:
            raise FactorizationError(f"composite cofactor with {len(str(n))} digits resisted factoring")
        stack += [f, n // f]
    return dict(sorted(out.items()))


def radical(N: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> int:
    """Product of the distinct primes dividing N (rad(1) = 1)."""
    return math.prod(factorize(N, rho_budget))


@dataclass(frozen=True)
class AbcTriple:
    x: int
    y: int
    m: int
    n: int
    g: int
    a: int
    b: int
    c: int
    residual: int
    rad: int | None = None
    quality: float | None = None

    @property
    def is_solution(self) -> bool:
        return self.residual == 0

    def record(self) -> dict:
        return {
            "type": "abc",
            "x": str(self.x),
            "y": str(self.y),
            "m": self.m,
            "n": self.n,
            "g": str(self.g),
            "a": str(self.a),
            "b": str(self.b),
            "c": str(self.c),
            "residual": str(self.residual),
            "rad": None if self.rad is None else str(self.rad),
            "quality": self.quality,
        }


def abc_triple(x: int, y: int, m: int, n: int, rho_budget: int = DEFAULT_RHO_BUDGET) -> AbcTriple:
    if not (y > x >= 2 and m >= 2 and n >= 2):
        raise ValueError("abc_triple needs y > x >= 2 and m, n >= 2")
    left = x**m * (y - 1)
    mid = x - y
    right = y**n * (x - 1)
    g = gcd(gcd(left, mid), right)
    a, b, c = left // g, mid // g, right // g
    residual = left + mid - right
    if residual != 0:
        return AbcTriple(x, y, m, n, g, a, b, c, residual)
    rad = radical(abs(a * b * c), rho_budget)
    return AbcTriple(x, y, m, n, g, a, b, c, residual, rad, math.log(c) / math.log(rad))


def exponent_margin(m: int, n: int) -> Fraction:
    """Exponent of y in rad(abc)^(5/4) / c after the bound rad(abc) < y^(3+(n+1)/m) (x-1)/g.

    Uses the n > m orientation of the conditional argument.
    """
    if m < 5 or n <= m:
        raise ValueError(f"exponent_margin needs n > m >= 5, got m={m}, n={n}")
    return Fraction(15, 4) + Fraction(5, 4) * Fraction(n + 1, m) - n


def rad_upper_bound(x: int, y: int, g: int) -> int:
    """x (y-1) (y-x) y (x-1) / g, rounded down."""
    if not (y > x >= 2 and g >= 1):
        raise ValueError("rad_upper_bound needs y > x >= 2 and g >= 1")
    return x * (y - 1) * (y - x) * y * (x - 1) // g
