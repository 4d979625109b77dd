"""Euler products and truncated Dirichlet sums built on psi_L and rho_F^-.

Everything here is a finite, checkable stand-in for the analytic objects of
the counting problem: local Euler factors, the constants c_FL / u_FL, the
singular sums frakS and their volume-weighted and multi-dimensional variants,
and Mertens-type partial sums over primes.  Truncated objects report an
explicit tail figure next to the value instead of pretending to be exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .arith import Factorization, factor, is_prime, primes_up_to
from .errors import HypothesisError
from .fields import FieldSpec, character_group, psi_pp_exact
from .forms import FormSpec, rho_minus_pp
from .regions import vol_region

__all__ = [
    "LocalFactorFunction",
    "V0",
    "UNIT",
    "TruncatedProduct",
    "TruncatedSum",
    "local_psi_factor",
    "u1",
    "u3",
    "c_fl_prime",
    "c_FL",
    "u_FL",
    "g_FL",
    "sigma_k",
    "sigma_closed_product",
    "sigma_discrepancy",
    "frakS",
    "frakS_vol",
    "frakS_box",
    "mertens_rho",
    "mertens_twisted",
    "local_factor_identity",
]


# ---------------------------------------------------------------------------
# the multiplicative-function algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalFactorFunction:
    """Multiplicative k -> prod_{p | k} at_prime(p), constant on prime powers.

    `envelope` is the membership certificate: |at_prime(p) - 1| <= envelope/p
    for every prime p, which keeps the function inside the unit-like algebra
    (values positive, u(k) <= 2^omega(k) once p > envelope).
    """

    name: str
    at_prime: Callable[[int], float]
    envelope: float

    def __call__(self, k: int | Factorization, skip: int = 1) -> float:
        f = k if isinstance(k, Factorization) else factor(k)
        out = 1.0
        for p, _ in f.pairs():
            if skip % p:
                out *= self.at_prime(p)
        return out

    def check_certificate(self, bound: int) -> bool:
        return all(abs(self.at_prime(p) - 1.0) <= self.envelope / p + 1e-15
                   for p in primes_up_to(bound))


V0 = LocalFactorFunction("v0", lambda p: p / (p + 1.0), 1.0)
UNIT = LocalFactorFunction("one", lambda p: 1.0, 0.0)


@dataclass(frozen=True)
class TruncatedProduct:
    """Value of an Euler product cut at `cutoff`, with an empirical tail."""

    value: float
    cutoff: int
    tail_bound: float


@dataclass(frozen=True)
class TruncatedSum:
    value: float
    bound: int
    tail_bound: float


# ---------------------------------------------------------------------------
# local psi data (cached per residue class)
# ---------------------------------------------------------------------------

_PSI_CACHE: dict[tuple, int] = {}


def _psi_pp(L: FieldSpec, p: int, nu: int) -> int:
    """psi_L(p^nu) cached by residue class (the value only sees p mod q)."""
    q = L.q
    key = (L, p % q if q % p else p, nu)
    if key not in _PSI_CACHE:
        _PSI_CACHE[key] = psi_pp_exact(L, p, nu)
    return _PSI_CACHE[key]


def _euler_psi_closed(L: FieldSpec, p: int, x: float) -> float:
    """prod_{chi != 1} (1 - chi*(p) x)^-1 at primitive values; real by pairing."""
    val = complex(1.0)
    for c in character_group(L):
        if c.is_trivial:
            continue
        val *= 1.0 / (1.0 - c.prim_value(p) * x)
    assert abs(val.imag) < 1e-10 * (1.0 + abs(val.real))
    return val.real


def local_psi_factor(L: FieldSpec, p: int, weight: float) -> complex:
    """1 + sum_nu psi_L(p^nu) weight^nu, via the character product.

    Rejects p | q: on ramified primes the mod-q character table vanishes and
    the caller should not be feeding them into unramified Euler factors.
    """
    if not is_prime(p):
        raise ValueError("p must be prime")
    if L.q % p == 0:
        raise ValueError(f"p = {p} is ramified (divides the modulus {L.q})")
    if not 0 < weight <= 1:
        raise ValueError("weight in (0, 1] required")
    val = complex(1.0)
    for c in character_group(L):
        if c.is_trivial:
            continue
        val *= 1.0 / (1.0 - c(p) * weight)
    return val


# ---------------------------------------------------------------------------
# c_FL, u_FL and friends
# ---------------------------------------------------------------------------

def _bracket_series_tail(F: FormSpec, n: int, p: int, nu_max: int) -> float:
    """Envelope for sum_{nu > nu_max} |psi rho^-| / p^nu (quadratic root growth)."""
    tail, nu = 0.0, nu_max + 1
    while nu < nu_max + 200:
        term = 2 * math.comb(nu + n - 2, n - 2) * p ** (nu / 2) / p**nu
        tail += term
        if term < 1e-18:
            break
        nu += 1
    return tail


def _cfl_bracket(L: FieldSpec, F: FormSpec, v: LocalFactorFunction,
                 p: int, psi_pp: Optional[Callable] = None) -> tuple[float, float]:
    """(1 + sum_nu v(p) psi_L(p^nu) rho_F^-(p^nu) / p^nu, tail bound)."""
    psi = psi_pp or (lambda pp, nn: _psi_pp(L, pp, nn))
    if (F.disc * F(0, 1)) % p:
        # Hensel-stable: rho constant on powers, psi tail in closed form,
        # except when a custom psi evaluation is injected
        if psi_pp is None:
            rho = rho_minus_pp(F, p, 1)
            return 1.0 + v.at_prime(p) * rho * (_euler_psi_closed(L, p, 1.0 / p) - 1.0), 0.0
    n = L.degree
    total, nu = 1.0, 1
    while p**nu <= 10**6:
        total += v.at_prime(p) * psi(p, nu) * rho_minus_pp(F, p, nu) / p**nu
        nu += 1
    return total, v.at_prime(p) * _bracket_series_tail(F, n, p, nu - 1)


def c_FL(L: FieldSpec, F: FormSpec, v: LocalFactorFunction, W: int,
         P: int = 10**6, psi_pp: Optional[Callable] = None) -> TruncatedProduct:
    """Truncated Euler product prod_{p <= P, p coprime W} of the psi-rho bracket.

    The reported tail combines the drift of the last two decades (an
    empirical convergence figure for the conditionally convergent character
    part) with the absolutely convergent series tails of the bad primes.
    `psi_pp` optionally overrides the psi_L(p^nu) evaluation (diagnostics).
    """
    value = 1.0
    series_tail = 0.0
    partials: dict[int, float] = {}
    marks = sorted({max(2, P // 100), max(2, P // 10)})
    primes = primes_up_to(P)
    idx = 0
    for mark in marks + [P]:
        while idx < len(primes) and primes[idx] <= mark:
            p = primes[idx]
            idx += 1
            if W % p == 0:
                continue
            bracket, tail = _cfl_bracket(L, F, v, p, psi_pp)
            if bracket <= 0:
                raise HypothesisError(
                    f"local factor at p = {p} is {bracket:.4g} <= 0; "
                    "enlarge w0 so the sieve modulus absorbs this prime")
            value *= bracket
            series_tail += tail / bracket * abs(value)
        partials[mark] = value
    if value <= 0:
        raise HypothesisError("partial product non-positive; enlarge w0")
    drift = max(abs(partials[P] - partials[marks[-1]]),
                abs(partials[marks[-1]] - partials[marks[0]]))
    return TruncatedProduct(value, P, 4.0 * drift + series_tail + 1e-12)


def u_FL(L: FieldSpec, F: FormSpec, v: LocalFactorFunction, W: int,
         envelope: Optional[float] = None) -> LocalFactorFunction:
    """The inverse-bracket element u_{F,L}(v) of the algebra."""

    def at(p: int) -> float:
        if W % p == 0:
            return 1.0
        bracket, _ = _cfl_bracket(L, F, v, p)
        if bracket <= 0:
            raise HypothesisError(
                f"local factor at p = {p} non-positive; enlarge w0")
        return 1.0 / bracket

    env = 4.0 * (L.degree - 1) if envelope is None else envelope
    return LocalFactorFunction(f"u_FL[{v.name}]", at, env)


def u1(L: FieldSpec) -> LocalFactorFunction:
    """prod_{p | k} (1 + sum_nu psi_L(p^nu)/p^nu), in closed form."""
    return LocalFactorFunction(
        "u1", lambda p: _euler_psi_closed(L, p, 1.0 / p), 2.0 * (L.degree - 1))


def c_fl_prime(L: FieldSpec, F: FormSpec, W: int, P: int = 10**5) -> float:
    """prod_{p <= P, p coprime W} (1 - v0(p) u_FL(v0)(p) g_FL(p) / p^2)."""
    u = u_FL(L, F, V0, W)
    value = 1.0
    for p in primes_up_to(P):
        if W % p == 0:
            continue
        value *= 1.0 - V0.at_prime(p) * u.at_prime(p) * _g_local(L, F, p) / p**2
    if value <= 0:
        raise HypothesisError("c_FL' non-positive; enlarge w0")
    return value


def u3(L: FieldSpec, F: FormSpec, W: int, d: int) -> float:
    """Correction prod_{p | d} (1 - 1/(u1(p) p)) / (1 - v0 u g / p^2)."""
    u = u_FL(L, F, V0, W)
    one = u1(L)
    out = 1.0
    for p, _ in factor(d).pairs():
        out *= (1.0 - 1.0 / (one.at_prime(p) * p)) / (
            1.0 - V0.at_prime(p) * u.at_prime(p) * _g_local(L, F, p) / p**2)
    return out


# ---------------------------------------------------------------------------
# g_FL and the sigma sums
# ---------------------------------------------------------------------------

def _g_local(L: FieldSpec, F: FormSpec, p: int) -> float:
    phi = _euler_psi_closed(L, p, 1.0 / p)
    psi1 = _psi_pp(L, p, 1)
    return rho_minus_pp(F, p, 1) * (1.0 + psi1 + (phi - 1.0 - psi1 / p))


def g_FL(L: FieldSpec, F: FormSpec, d: int | Factorization) -> float:
    """rho_F^-(d) prod_{p | d} (1 + psi_L(p) + sum_{nu >= 2} psi_L(p^nu)/p^nu)."""
    f = d if isinstance(d, Factorization) else factor(d)
    if not f.is_squarefree() or f.sign < 0:
        raise ValueError("d must be positive and squarefree")
    out = 1.0
    for p, _ in f.pairs():
        out *= _g_local(L, F, p)
    return out


def sigma_k(L: FieldSpec, F: FormSpec, k1: int, a: int,
            v: Optional[LocalFactorFunction] = None,
            bound: int = 10**9) -> TruncatedSum:
    """sum over l | (a k1)^infty, l <= bound, of psi_L(l) gcd(k1 l, a) / l.

    The rho and v weights of the defining sum are identically 1 on the
    support (every prime of l divides a*k1, and the restricted products skip
    exactly those primes), so `v` only documents which algebra element the
    caller is working with.
    """
    del v
    ps = sorted({p for p, _ in factor(a * k1).pairs()})
    total = 0.0

    def rec(i: int, ell: int, psi: int) -> None:
        nonlocal total
        if i == len(ps):
            total += psi * math.gcd(k1 * ell, a) / ell
            return
        p, nu = ps[i], 0
        while ell * p**nu <= bound:
            rec(i + 1, ell * p**nu, psi * _psi_pp(L, p, nu))
            nu += 1

    rec(0, 1, 1)
    n = L.degree
    tail = a * bound ** -0.5
    for p in ps:
        tail *= (1.0 - p**-0.5) ** -(n - 1)
    if not ps:
        tail = 0.0
    return TruncatedSum(total, bound, tail)


def sigma_closed_product(L: FieldSpec, F: FormSpec, d: int, m: int) -> float:
    """The closed product form for sigma_1(d m^2 / gcd(d, m^2)), d, m squarefree.

    This is the factorization used on the way to the M_d main term.  It does
    NOT agree with the literal truncated sum `sigma_k` in general (the
    gcd(l, a) weight is absorbed differently); `sigma_discrepancy` reports
    both values side by side instead of hiding the mismatch.
    """
    if not (factor(d).is_squarefree() and factor(m).is_squarefree()):
        raise ValueError("d and m must be squarefree")
    out = 1.0
    for p, _ in factor(d).pairs():
        if m % p:
            out *= _euler_psi_closed(L, p, 1.0 / p)
    for p, _ in factor(m).pairs():
        psi1 = _psi_pp(L, p, 1)
        out *= 1.0 + psi1 + (_euler_psi_closed(L, p, 1.0 / p) - 1.0 - psi1 / p)
    return out


def sigma_discrepancy(L: FieldSpec, F: FormSpec, d: int, m: int,
                      bound: int = 10**9) -> tuple[float, float, float]:
    """(literal sigma_1(dm^2/gcd(d,m^2)), closed product, absolute gap)."""
    a = d * m * m // math.gcd(d, m * m)
    lit = sigma_k(L, F, 1, a, None, bound).value
    closed = sigma_closed_product(L, F, d, m)
    return lit, closed, abs(lit - closed)


# ---------------------------------------------------------------------------
# the truncated singular sums
# ---------------------------------------------------------------------------

def _mult_table(y: int, weight_pp: Callable[[int, int], float]) -> np.ndarray:
    """T[k] = prod over p^nu || k of weight_pp(p, nu), for 0 <= k <= y."""
    T = np.ones(y + 1)
    T[0] = 0.0
    for p in primes_up_to(y):
        pv, nu = p, 1
        while pv <= y:
            w = weight_pp(p, nu)
            ids = np.arange(pv, y + 1, pv)
            if pv * p <= y:
                ids = ids[ids % (pv * p) != 0]
            T[ids] *= w
            pv *= p
            nu += 1
    return T


def _frakS_table(L: FieldSpec, F: FormSpec, y: int, a: int, k1: int,
                 v: LocalFactorFunction, W: int) -> np.ndarray:
    ak1 = a * k1
    fk1, fa = factor(k1), factor(a)

    def weight(p: int, nu: int) -> float:
        if W % p == 0:
            return 0.0
        psi = _psi_pp(L, p, nu)
        if psi == 0:
            return 0.0
        if ak1 % p == 0:
            # rho and v are skipped at p | a k1; the gcd(k1 k, a) weight
            # grows by this factor relative to gcd(k1, a)
            rv = 1.0
            v1, va = fk1.valuation(p), fa.valuation(p)
            gext = p ** (min(v1 + nu, va) - min(v1, va))
        else:
            rv = rho_minus_pp(F, p, nu) * v.at_prime(p)
            gext = 1
        return psi * rv * gext

    return _mult_table(y, weight)


def frakS(L: FieldSpec, F: FormSpec, y: float, a: int, k1: int,
          v: LocalFactorFunction, W: int) -> float:
    """sum_{k <= y, gcd(k,W)=1} psi_L(k) rho_{F,k1 a}(k; v) gcd(k1 k, a) / k."""
    if math.gcd(a * k1, W) != 1:
        raise ValueError("gcd(a k1, W) = 1 required")
    yi = int(math.floor(y))
    if yi < 1:
        return 0.0
    T = _frakS_table(L, F, yi, a, k1, v, W)
    scaled = T / np.arange(0, yi + 1).clip(min=1)
    return math.gcd(k1, a) * float(scaled.sum())


def frakS_vol(L: FieldSpec, F: FormSpec, y: float, a: int, k1: int, z: float,
              v: LocalFactorFunction, W: int, B: float) -> float:
    """The vol(R(B, z k1 k))-weighted variant of frakS."""
    from .forms import b_F
    if math.gcd(a * k1, W) != 1:
        raise ValueError("gcd(a k1, W) = 1 required")
    if k1 * z * y > float(b_F(F)) * B * B:
        raise ValueError("k1 z y <= b_F B^2 required")
    yi = int(math.floor(y))
    if yi < 1:
        return 0.0
    if z == 0:
        return 4.0 * B * B * frakS(L, F, y, a, k1, v, W)
    T = _frakS_table(L, F, yi, a, k1, v, W)
    total = 0.0
    for k in np.nonzero(T)[0]:
        if k == 0:
            continue
        total += T[k] / k * vol_region(F, B, z * k1 * int(k))
    return math.gcd(k1, a) * total


def frakS_box(L: FieldSpec, F: FormSpec, box, a: int, v: LocalFactorFunction,
              W: int, cap: int, vol_params: Optional[tuple[float, float]] = None,
              ) -> complex:
    """sum over k in the box of Psi_L(k) rho_{F,a}(K; v) gcd(K, a) / K.

    `box` lists (lo, hi) per coordinate, hi = None for unbounded; `cap` bounds
    the product K = k_1...k_{n-1} so the enumeration is always finite.  With
    `vol_params` = (B, z) each term carries the weight vol(R(B, z K)).
    """
    if math.gcd(a, W) != 1:
        raise ValueError("gcd(a, W) = 1 required")
    if cap is None or cap < 1:
        raise ValueError("a positive product cap is required")
    box = [(int(lo), None if hi is None else int(hi)) for lo, hi in box]
    if len(box) != L.degree - 1:
        raise ValueError(f"expected {L.degree - 1} coordinates")
    if any(lo < 1 for lo, _ in box):
        raise ValueError("coordinate lower bounds must be >= 1")

    comp_cache: dict[int, float] = {}

    def comp_weight(K: int) -> float:
        # rho^-(K, a) v(K, a) 1_{gcd(K, W) = 1} gcd(K, a) / K
        if K not in comp_cache:
            if math.gcd(K, W) != 1:
                comp_cache[K] = 0.0
            else:
                out = math.gcd(K, a) / K
                for p, nu in factor(K).pairs():
                    if a % p:
                        out *= rho_minus_pp(F, p, nu) * v.at_prime(p)
                if vol_params is not None and out:
                    B, z = vol_params
                    out *= vol_region(F, B, z * K)
                comp_cache[K] = out
        return comp_cache[K]

    chars = [c for c in character_group(L) if not c.is_trivial]
    total = complex(0.0)

    def rec(i: int, prod: int, chi: complex) -> None:
        nonlocal total
        if chi == 0:
            return
        if i == len(box):
            w = comp_weight(prod)
            if w:
                total += chi * w
            return
        lo, hi = box[i]
        top = cap // prod
        if hi is not None:
            top = min(top, hi)
        for k in range(lo, top + 1):
            rec(i + 1, prod * k, chi * chars[i](k))

    rec(0, 1, complex(1.0))
    return total


# ---------------------------------------------------------------------------
# Mertens-type prime sums
# ---------------------------------------------------------------------------

def mertens_rho(F: FormSpec, z: float) -> tuple[float, float]:
    """(sum_{p <= z} rho_F^-(p)/p, that sum minus log log z)."""
    if z < 2:
        return 0.0, float("nan")
    zi = int(z)
    total = 0.0
    for p in primes_up_to(zi):
        total += rho_minus_pp(F, p, 1) / p
    return total, total - math.log(math.log(zi))


def mertens_twisted(L: FieldSpec, F: FormSpec, z: float) -> float:
    """sum_{p <= z} psi_L(p) rho_F^-(p) / p."""
    if z < 2:
        return 0.0
    total = 0.0
    for p in primes_up_to(int(z)):
        psi = _psi_pp(L, p, 1)
        if psi:
            total += psi * rho_minus_pp(F, p, 1) / p
    return total


# ---------------------------------------------------------------------------
# the local factor identity behind the analytic continuation
# ---------------------------------------------------------------------------

def local_factor_identity(L: FieldSpec, F: FormSpec, p: int, s: float) -> float:
    """|local psi-rho factor times the inverse twisted L-factors - 1|.

    The twisted characters are evaluated through the norm: a degree-1 prime
    above a split p contributes chi(p), the single degree-2 prime above an
    inert p contributes chi(p^2).  The residual must decay like p^(-2s).
    """
    if s <= 0.5:
        raise ValueError("s > 1/2 required")
    if (L.q * F.disc * F(0, 1)) % p == 0:
        raise ValueError(f"p = {p} is ramified here")
    rho = rho_minus_pp(F, p, 1)
    x = p ** -s
    chars = [c for c in character_group(L) if not c.is_trivial]
    if rho == 2:
        bracket = 1.0 + rho * (_euler_psi_closed(L, p, x) - 1.0)
        inv = complex(1.0)
        for c in chars:
            inv *= (1.0 - c(p) * x) ** 2
    else:
        bracket = 1.0
        inv = complex(1.0)
        for c in chars:
            inv *= 1.0 - c(p * p) * x * x
    residual = abs(bracket * inv - 1.0)
    assert residual <= 4.0 * L.degree**2 * p ** (-2 * s + 0.1)
    return residual
