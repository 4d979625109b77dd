"""Binary quadratic forms F(s,t) = a s^2 + b s t + c t^2 and their local data.

The counting machinery needs, for each modulus k, the roots xi of
F(xi, 1) = 0 mod k (the lines s = xi t along which k | F), their count
rho^-_F, and the full pair-count rho_F.  Away from the discriminant all roots
are simple, so root counts are Hensel-stable in the exponent and roots mod
p^nu are obtained by Newton lifting from mod p; ramified prime powers are
scanned exhaustively up to 10^6 and refused beyond that (they never occur in
the pipelines, whose moduli are coprime to W).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import Factorization, factor, is_prime, kronecker
from .errors import HypothesisError

_SCAN_BOUND = 10**6


@dataclass(frozen=True)
class FormSpec:
    """Integral binary quadratic form, irreducible over Q (nonsquare disc)."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        d = self.disc
        if d == 0:
            raise ValueError("discriminant must be nonzero")
        r = math.isqrt(d) if d > 0 else 0
        if d > 0 and r * r == d:
            raise ValueError("discriminant is a perfect square: F reducible over Q")

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self) -> int:
        return math.gcd(math.gcd(self.a, self.b), self.c)

    def __call__(self, s: int, t: int) -> int:
        return self.a * s * s + self.b * s * t + self.c * t * t

    def coeffs(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def reversed(self) -> "FormSpec":
        return FormSpec(self.c, self.b, self.a)


def b_F(F: FormSpec) -> float:
    """sup of |F| over [-1,1]^2, exactly (corners + edge critical points)."""
    cands = [Fraction(abs(F.a + F.b + F.c)), Fraction(abs(F.a - F.b + F.c))]
    if abs(F.b) <= 2 * abs(F.a):
        cands.append(abs(Fraction(F.disc, 4 * F.a)))
    if abs(F.b) <= 2 * abs(F.c):
        cands.append(abs(Fraction(F.disc, 4 * F.c)))
    return float(max(cands))


# ---------------------------------------------------------------------------
# roots of F(xi, 1) mod prime powers
# ---------------------------------------------------------------------------

def _scan_roots(F: FormSpec, m: int) -> list[int]:
    """All xi mod m with F(xi,1) = 0, by vectorized scan (m <= 10^6)."""
    if m > _SCAN_BOUND:
        raise ValueError(f"modulus {m} beyond the exhaustive-scan bound")
    x = np.arange(m, dtype=np.int64)
    vals = ((F.a % m) * (x * x % m) + (F.b % m) * x + (F.c % m)) % m
    return np.nonzero(vals == 0)[0].tolist()


def _newton_lift(F: FormSpec, r: int, p: int, nu: int) -> int:
    """Lift a simple root r of F(x,1) mod p to mod p^nu."""
    prec, mod = 1, p
    while prec < nu:
        prec = min(2 * prec, nu)
        mod = p**prec
        fr = (F.a * r * r + F.b * r + F.c) % mod
        dr = (2 * F.a * r + F.b) % mod
        r = (r - fr * pow(dr, -1, mod)) % mod
    return r


@lru_cache(maxsize=None)
def _roots_pp(F: FormSpec, p: int, nu: int) -> tuple[int, ...]:
    """Sorted roots of F(x,1) mod p^nu."""
    base = _scan_roots(F, p)
    if all((2 * F.a * r + F.b) % p for r in base):
        # every root simple: Newton lifting gives exactly one root above each
        if nu == 1:
            return tuple(base)
        return tuple(sorted(_newton_lift(F, r, p, nu) for r in base))
    return tuple(_scan_roots(F, p**nu))


def roots_mod(F: FormSpec, k: int | Factorization) -> list[int]:
    """Sorted residues xi mod k with F(xi,1) = 0 mod k (CRT across p^nu)."""
    kf = k if isinstance(k, Factorization) else factor(k)
    if kf.sign < 0:
        raise ValueError("modulus must be positive")
    res: list[int] = [0]
    mod = 1
    for p, v in kf.pairs():
        pv = p**v
        local = _roots_pp(F, p, v)
        inv = pow(mod, -1, pv) if mod > 1 else 1
        res = [r + mod * ((x - r) * inv % pv) for r in res for x in local]
        mod *= pv
    return sorted(r % mod for r in res)


def rho_minus_pp(F: FormSpec, p: int, nu: int) -> int:
    """rho^-_F(p^nu), the root count mod p^nu."""
    if nu < 1:
        raise ValueError("nu >= 1 required")
    d = F.disc
    if d % p:
        # all roots simple: count is stable in nu
        if p == 2 or F.a % p == 0:
            return len(_roots_pp(F, p, 1))
        return 1 + kronecker(d, p)
    return len(_roots_pp(F, p, nu))


def rho_minus(F: FormSpec, k: int | Factorization, a: int = 1) -> int:
    """Restricted product of rho^-_F(p^nu) over p^nu || k with p not | a."""
    kf = k if isinstance(k, Factorization) else factor(k)
    out = 1
    for p, v in kf.pairs():
        if a % p:
            out *= rho_minus_pp(F, p, v)
    return out


def _rho_full_pp(F: FormSpec, p: int, nu: int) -> int:
    """rho_F(p^nu), the count of pairs (s,t) mod p^nu with p^nu | F(s,t)."""
    if F.a % p:
        G = F
    elif F.c % p:
        G = F.reversed()
    else:
        if p ** (2 * nu) <= 4 * _SCAN_BOUND:
            cnt = 0
            m = p**nu
            for t in range(m):
                cnt += sum(1 for s in range(m) if F(s, t) % m == 0)
            return cnt
        raise ValueError(f"rho_F at p={p} dividing both outer coefficients, nu={nu}: too large to scan")
    # recursion N(nu) = phi(p^nu) rho^-(p^nu) + p^2 N(nu-2), valid since
    # p | t and p^j | G(s,t) (j>=1) force p | s when p does not divide G.a
    N = [1, (p - 1) * rho_minus_pp(G, p, 1) + 1]
    for j in range(2, nu + 1):
        phi = (p - 1) * p ** (j - 1)
        N.append(phi * rho_minus_pp(G, p, j) + p * p * N[j - 2])
    return N[nu]


def rho_full(F: FormSpec, k: int | Factorization) -> int:
    """rho_F(k) = #{(s,t) mod k : F(s,t) = 0 mod k} (multiplicative)."""
    kf = k if isinstance(k, Factorization) else factor(k)
    return math.prod(_rho_full_pp(F, p, v) for p, v in kf.pairs())


# ---------------------------------------------------------------------------
# the sieve modulus W and the base point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SieveModulus:
    """W = prod_{p <= w0} p^max(1, v_p(q_L)); all bad primes sit below w0."""

    W: int
    w0: int


def compute_W(L, F: FormSpec, w0_min: int = 2) -> SieveModulus:
    """Build the sieve modulus W for the pair (L, F).

    w0 is the largest of: the requested minimum, 2(n-1)+1 (so the local
    series converge: rho * |psi| <= 2(n-1) < p beyond w0), and every prime
    dividing disc(F) * F(1,0) * F(0,1) * q_L.  Then W packs each p <= w0 to
    the power max(1, v_p(q_L)).
    """
    Lmin = L.normalize()
    qL, n = Lmin.q, Lmin.degree
    assert F(0, 1) != 0, "F(0,1) = 0 impossible for irreducible F"
    bad = F.disc * F(0, 1) * F(1, 0) * qL
    support = factor(bad).primes
    w0 = max(w0_min, 2 * (n - 1) + 1, max(support))
    W = 1
    for p in range(2, w0 + 1):
        if is_prime(p):
            W *= p ** max(1, _valuation(qL, p))
    return SieveModulus(W, w0)


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def find_base_point(L, F: FormSpec, M: SieveModulus) -> tuple[int, int]:
    """Lexicographically first (s1,t1) in [0,W)^2 with F(s1,t1) a unit mod W
    whose class mod q lies in H (so every character of Ĝ evaluates to 1)."""
    W = M.W
    Hset = set(L.H)
    q = L.q
    for s1 in range(W):
        for t1 in range(W):
            v = F(s1, t1)
            if math.gcd(v, W) == 1 and v % q in Hset:
                return (s1, t1)
    raise HypothesisError(
        "assumption (ii) unsatisfied: no residue pair mod W makes F(s,t) "
        "an H-class unit — F never takes values coprime to W in the norm class"
    )
