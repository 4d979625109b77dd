"""Elementary arithmetic: certified factorization and multiplicative helpers.

Everything downstream (local densities, sieve weights, the counting engine's
cofactor classification) leans on `factor`, so it is deterministic and
certified: primality is decided by Miller-Rabin with a fixed witness set that
is *proven* correct below 3.3 * 10^24, and inputs beyond that bound are
refused rather than answered probabilistically.

The splitting loop is Brent's variant of Pollard rho with a deterministic
parameter schedule (c = 1, 2, 3, ...), so factor(n) is a pure function of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceBudgetError

# Witnesses certifying Miller-Rabin for all n < 3.317e24 (first 13 primes).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_CERTIFIED_BOUND = 3_317_044_064_679_887_385_961_981

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_prime(n: int) -> bool:
    """Deterministic primality for 0 <= n < 3.3e24."""
    if n >= _MR_CERTIFIED_BOUND:
        raise ValueError(f"n = {n} exceeds the certified Miller-Rabin bound")
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    # n is odd and > 47^2? No: n > 47 and coprime to the small primes; MR decides.
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_WITNESSES:
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


def _brent_rho(n: int) -> int:
    """A nontrivial factor of composite odd n, deterministic schedule."""
    if n % 2 == 0:
        return 2
    c = 1
    while True:
        y, m = 2, 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
        c += 1  # rare cycle degeneracy: restart with the next polynomial


@dataclass(frozen=True)
class Factorization:
    """Certified factorization n = sign * prod p_i^e_i with p_1 < p_2 < ..."""

    n: int
    sign: int
    primes: tuple[int, ...]
    exponents: tuple[int, ...]

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.primes, self.exponents))

    @property
    def omega(self) -> int:
        return len(self.primes)

    def is_squarefree(self) -> bool:
        return all(e == 1 for e in self.exponents)

    def valuation(self, p: int) -> int:
        for q, e in zip(self.primes, self.exponents):
            if q == p:
                return e
        return 0

    def radical(self) -> int:
        return math.prod(self.primes)


def factor(n: int) -> Factorization:
    """Factor n (|n| >= 1) into certified primes."""
    if n == 0:
        raise ValueError("0 has no factorization")
    sign = 1 if n > 0 else -1
    m = abs(n)
    found: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while m % p == 0:
            found[p] = found.get(p, 0) + 1
            m //= p
    stack = [m] if m > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        d = _brent_rho(m)
        stack += [d, m // d]
    primes = tuple(sorted(found))
    return Factorization(n, sign, primes, tuple(found[p] for p in primes))


def moebius(n: int) -> int:
    if n < 1:
        raise ValueError("moebius is defined for n >= 1")
    if n == 1:
        return 1
    f = factor(n)
    if not f.is_squarefree():
        return 0
    return -1 if f.omega % 2 else 1


def omega_z(n: int, z: float) -> int:
    """Number of distinct prime factors of n that are < z."""
    if n == 1:
        return 0
    return sum(1 for p in factor(n).primes if p < z)


def divisors_supported_on(n: int, primes: tuple[int, ...]) -> list[int]:
    """Divisors of n composed only of the given primes, ascending.

    The part of n supported elsewhere is ignored, i.e. this lists divisors of
    gcd(n, (prod primes)^infinity).
    """
    divs = [1]
    for p in primes:
        e = 0
        m = n
        while m % p == 0:
            e += 1
            m //= p
        if e:
            divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (empty for n < 2)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def spf_table(n: int, budget_bytes: int = 1 << 30) -> np.ndarray:
    """Smallest-prime-factor table for 0..n (spf[0] = spf[1] = 0).

    Built in fixed-size segments so peak memory stays near the size of the
    output table itself; refuses up front if that exceeds `budget_bytes`.
    """
    need = 8 * (n + 1)
    if need > budget_bytes:
        raise ResourceBudgetError(
            f"spf table for n={n} needs {need} bytes > budget {budget_bytes}",
            needed_bytes=need,
            budget_bytes=budget_bytes,
        )
    spf = np.zeros(n + 1, dtype=np.int64)
    if n < 2:
        return spf
    ps = primes_up_to(math.isqrt(n))
    seg = max(1 << 20, int(ps[-1]) + 1 if len(ps) else 2)
    for lo in range(2, n + 1, seg):
        hi = min(lo + seg, n + 1)
        block = spf[lo:hi]
        for p in ps:
            p = int(p)
            start = ((lo + p - 1) // p) * p
            if start < p * p and lo <= p < hi:
                start = p  # let p mark itself
            idx = np.arange(start - lo, hi - lo, p)
            sub = block[idx]
            block[idx] = np.where(sub == 0, p, sub)
        rest = np.nonzero(block == 0)[0]
        block[rest] = rest + lo  # remaining entries are prime
    spf[:2] = 0
    return spf


def fundamental_discriminant(D: int) -> int:
    """The fundamental discriminant D0 with Q(sqrt D) = Q(sqrt D0).

    D must be a nonzero non-square (so that Q(sqrt D) is a real or imaginary
    quadratic field).
    """
    if D == 0:
        raise ValueError("D must be nonzero")
    f = factor(D)
    d = f.sign * math.prod(p for p, e in f.pairs() if e % 2)
    if d == 1:
        raise ValueError("D is a perfect square")
    return d if d % 4 == 1 else 4 * d


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), the full extension of Jacobi to all n."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    # factor out 2s from n: (a/2) = 0, 1, -1 for a even, a = +-1 mod 8, else
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    # now n odd positive: Jacobi with reciprocity
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0
