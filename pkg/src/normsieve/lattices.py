"""Congruence lattices {(s,t) : s = xi t mod k} and primitive point counts.

Lambda*(R, k) counts lattice points of the union over roots xi of F mod k,
restricted to gcd(s,t) = 1, a fixed residue pair mod W, and the region
R(B,z).  Its main term is c' vol(R) rho_F^-(k) v0(k) / k with the coprime
density c' = W^-2 prod_{p not| W} (1 - p^-2); the error is controlled by the
first successive minima lambda_1(k, xi) computed by Gauss-Lagrange reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import Factorization, factor
from .errors import ResourceBudgetError
from .forms import FormSpec, rho_minus, roots_mod
from .regions import vol_region

# ---------------------------------------------------------------------------
# shortest vectors
# ---------------------------------------------------------------------------

def _gauss_reduce(u: tuple[int, int], v: tuple[int, int]) -> tuple[tuple[int, int], tuple[int, int]]:
    """Lagrange-Gauss reduction; returns (shortest, second) basis vectors."""

    def n2(w):
        return w[0] * w[0] + w[1] * w[1]

    if n2(u) > n2(v):
        u, v = v, u
    while True:
        dot = u[0] * v[0] + u[1] * v[1]
        mu = round(dot / n2(u))
        v = (v[0] - mu * u[0], v[1] - mu * u[1])
        if n2(v) >= n2(u):
            return u, v
        u, v = v, u


@dataclass(frozen=True)
class CongruenceLattice:
    """The rank-2 lattice {(s,t) in Z^2 : s = xi t (mod k)}."""

    k: int
    xi: int

    def __post_init__(self):
        if not 0 <= self.xi < self.k:
            raise ValueError("0 <= xi < k required")

    @property
    def basis(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return _gauss_reduce((self.k, 0), (self.xi, 1))

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.basis
        return a * d - b * c

    @property
    def lam1(self) -> float:
        u = self.basis[0]
        return math.hypot(u[0], u[1])


def lambda1(k: int, xi: int) -> tuple[float, tuple[int, int]]:
    """(length, vector) of a shortest nonzero lattice vector."""
    lat = CongruenceLattice(k, xi % k if k > 1 else 0)
    u = lat.basis[0]
    return math.hypot(u[0], u[1]), u


# ---------------------------------------------------------------------------
# exact counts and the density estimate
# ---------------------------------------------------------------------------

def lambda_star_count(
    F: FormSpec,
    B: float,
    z: float,
    k: int,
    base: tuple[int, int],
    W: int,
    max_points: int = 10**9,
) -> int:
    """#{(s,t) in [-B,B]^2 : |F| >= z, gcd(s,t)=1, (s,t) = base mod W, k | F}.

    Enumerates s = xi t (mod k) per root xi; the union over xi is disjoint on
    gcd(s,t) = 1 as long as every prime of k avoids F(1,0) * disc(F) (pairs
    hit by two roots share a factor with k, and no divisible pair escapes the
    root lines).  Requires gcd(k, W) = 1.
    """
    if math.gcd(k, W) != 1:
        raise ValueError("gcd(k, W) = 1 required")
    if math.gcd(k, F.a * F.disc) != 1 and k > 1:
        raise ValueError("k must avoid the primes of F(1,0)*disc(F)")
    Bi = int(math.floor(B))
    s1, t1 = base[0] % W, base[1] % W
    roots = roots_mod(F, k)
    est = (2 * Bi / W + 1) * ((2 * Bi / (k * W)) + 1) * max(len(roots), 1)
    if est > max_points:
        raise ResourceBudgetError(
            f"enumeration of ~{est:.2e} points exceeds {max_points:.2e}",
            needed_bytes=int(est), budget_bytes=max_points,
        )
    kW = k * W
    inv_w = pow(W, -1, k) if k > 1 else 1
    count = 0
    a, b, c = F.a, F.b, F.c
    for t in range(-Bi + ((t1 + Bi) % W), Bi + 1, W):
        # s = s1 (mod W) and s = xi t (mod k), CRT'd to one class mod kW
        for xi in roots:
            r = (s1 + W * ((xi * t - s1) * inv_w % k)) % kW
            s = np.arange(-Bi + ((r - (-Bi)) % kW), Bi + 1, kW, dtype=np.int64)
            if len(s) == 0:
                continue
            ok = np.gcd(s, t) == 1
            if z > 0:
                vals = np.abs(a * s * s + (b * t) * s + c * t * t)
                ok &= vals >= z
            count += int(np.count_nonzero(ok))
    return count


def lambda_star_count_direct(F: FormSpec, B: int, z: float, k: int,
                             base: tuple[int, int], W: int) -> int:
    """Brute-force oracle for lambda_star_count (small B only)."""
    s1, t1 = base[0] % W, base[1] % W
    count = 0
    for s in range(-B, B + 1):
        for t in range(-B, B + 1):
            v = F(s, t)
            if (
                math.gcd(s, t) == 1
                and s % W == s1
                and t % W == t1
                and v % k == 0
                and abs(v) >= z
            ):
                count += 1
    return count


def coprime_density_cw(W: int) -> float:
    """c' = W^-2 prod_{p not | W} (1 - p^-2), via the closed zeta(2) form."""
    c = 6.0 / math.pi**2
    for p, _ in factor(W).pairs() if W > 1 else ():
        c /= 1.0 - p**-2
    return c / (W * W)


def v0(k: int | Factorization) -> float:
    """v0(k) = prod_{p | k} (1 + 1/p)^-1."""
    kf = k if isinstance(k, Factorization) else factor(k)
    out = 1.0
    for p in kf.primes:
        out /= 1.0 + 1.0 / p
    return out


def lambda_star_estimate(F: FormSpec, B: float, z: float,
                         k: int | Factorization, W: int) -> float:
    """Main term c' vol(R(B,z)) rho_F^-(k) v0(k) / k of the lattice count."""
    kf = k if isinstance(k, Factorization) else factor(k)
    if not kf.is_squarefree():
        raise ValueError("k must be squarefree")
    kv = math.prod(p**e for p, e in kf.pairs())
    if math.gcd(kv, W) != 1:
        raise ValueError("gcd(k, W) = 1 required")
    return (
        coprime_density_cw(W)
        * vol_region(F, B, z)
        * rho_minus(F, kf)
        * v0(kf)
        / kv
    )


def inv_lambda1_sum(F: FormSpec, y: int) -> float:
    """sum_{k <= y} sum_{xi root of F mod k} 1 / lambda_1(k, xi)."""
    if y < 2:
        raise ValueError("y >= 2 required")
    total = 0.0
    for k in range(1, y + 1):
        for xi in roots_mod(F, k):
            total += 1.0 / lambda1(k, xi)[0]
    return total
