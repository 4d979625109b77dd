"""Exact arithmetic in Z[zeta_M] via the power basis of the M-th cyclotomic ring.

Character-sum quantities (the convolution psi_L, ideal counts r_L) are rational
integers for structural reasons, and the tests downstream assert that fact
exactly.  Floating point cannot carry such an assertion, so sums of roots of
unity are accumulated here as integer coordinate vectors in the basis
1, x, ..., x^(phi(M)-1) of Z[x]/Phi_M(x) and only converted to int/complex at
the end.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Euclidean division of integer polynomials, den monic. Coeffs ascending."""
    num = list(num)
    d = len(den) - 1
    q = [0] * max(1, len(num) - d)
    for i in range(len(num) - 1, d - 1, -1):
        coef = num[i]
        if coef:
            q[i - d] = coef
            for j, c in enumerate(den):
                num[i - d + j] -= coef * c
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return q, num


@lru_cache(maxsize=None)
def cyclotomic_poly(M: int) -> tuple[int, ...]:
    """Coefficients of Phi_M (ascending), by exact division of x^M - 1."""
    if M < 1:
        raise ValueError("M >= 1 required")
    if M == 1:
        return (-1, 1)
    num = [0] * (M + 1)
    num[0], num[M] = -1, 1
    for d in range(1, M):
        if M % d == 0:
            num, rem = _poly_divmod(num, list(cyclotomic_poly(d)))
            assert rem == [0], f"Phi_{d} does not divide x^{M}-1 exactly"
    return tuple(num)


class CycRing:
    """Z[x]/Phi_M(x): elements are int tuples of length phi(M) (power basis)."""

    def __init__(self, M: int):
        self.M = M
        self.phi = cyclotomic_poly(M)
        self.deg = len(self.phi) - 1
        # x^j reduced mod Phi_M for 0 <= j < M; since x^M = 1 in the ring,
        # every power of the root is covered.
        pows = []
        cur = [1] + [0] * (self.deg - 1)
        for _ in range(M):
            pows.append(tuple(cur))
            cur = self._shift(cur)
        self._pows = pows

    def _shift(self, el: list[int]) -> list[int]:
        """Multiply by x and reduce (Phi_M is monic)."""
        out = [0] + list(el[: self.deg - 1])
        top = el[self.deg - 1]
        if top:
            for j in range(self.deg):
                out[j] -= top * self.phi[j]
        return out

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.deg

    def one(self) -> tuple[int, ...]:
        return self._pows[0]

    def zeta_pow(self, k: int) -> tuple[int, ...]:
        return self._pows[k % self.M]

    def add(self, a, b) -> tuple[int, ...]:
        return tuple(x + y for x, y in zip(a, b))

    def scale(self, a, c: int) -> tuple[int, ...]:
        return tuple(c * x for x in a)

    def mul(self, a, b) -> tuple[int, ...]:
        conv = [0] * (2 * self.deg - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    conv[i + j] += x * y
        # fold the high part down with repeated shifts of the basis powers
        out = list(conv[: self.deg])
        for k in range(self.deg, len(conv)):
            if conv[k]:
                red = self._pow_reduced(k)
                for j in range(self.deg):
                    out[j] += conv[k] * red[j]
        return tuple(out)

    def _pow_reduced(self, k: int) -> tuple[int, ...]:
        if k < self.M:
            return self._pows[k]
        cur = list(self._pows[self.M - 1])
        for _ in range(k - self.M + 1):
            cur = self._shift(cur)
        return tuple(cur)

    def as_int(self, el) -> int:
        """The element as a rational integer; raises if it is not one."""
        if any(el[1:]):
            raise AssertionError(f"cyclotomic element {el} is not a rational integer")
        return el[0]

    def to_complex(self, el) -> complex:
        z = cmath.exp(2j * cmath.pi / self.M)
        return sum(c * z**j for j, c in enumerate(el))


def root_of_unity(e: int, m: int) -> complex:
    """exp(2*pi*i*e/m), exact for the 4th roots."""
    e %= m
    g = math.gcd(e, m) if e else m
    num, den = e // g if e else 0, m // g
    if den == 1:
        return 1 + 0j
    if den == 2:
        return -1 + 0j
    if den == 4:
        return 1j if num == 1 else -1j
    return cmath.exp(2j * cmath.pi * e / m)
