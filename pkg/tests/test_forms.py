"""Tests for quadratic-form local data: b_F, rho counts, roots, W, base points."""

import math
import random

import pytest

from normsieve.arith import factor, primes_up_to
from normsieve.errors import HypothesisError
from normsieve.fields import FieldSpec, character_group
from normsieve.forms import (
    FormSpec,
    SieveModulus,
    b_F,
    compute_W,
    find_base_point,
    rho_full,
    rho_minus,
    rho_minus_pp,
    roots_mod,
)

L9 = FieldSpec(9, (1, 8), True)
L4 = FieldSpec(4, (1,), True)
L8 = FieldSpec(8, (1,), True)
F2 = FormSpec(1, 0, -2)   # s^2 - 2 t^2
FI = FormSpec(1, 0, 1)    # s^2 + t^2
FH = FormSpec(1, 1, 1)    # s^2 + s t + t^2


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def rho_minus_direct(F, m):
    return sum(1 for x in range(m) if F(x, 1) % m == 0)


def rho_full_direct(F, m):
    return sum(1 for s in range(m) for t in range(m) if F(s, t) % m == 0)


# ---------------------------------------------------------------------------
# FormSpec / b_F
# ---------------------------------------------------------------------------

def test_formspec_validation():
    with pytest.raises(ValueError):
        FormSpec(1, 0, 0)  # disc 0? F = s^2: disc = 0
    with pytest.raises(ValueError):
        FormSpec(1, 0, -1)  # disc 4: reducible
    with pytest.raises(ValueError):
        FormSpec(0, 1, 1)  # disc 1: reducible (t(s+t))
    F = FormSpec(3, 0, 3)
    assert F.content == 3 and F.disc == -36


def test_bF_examples():
    assert b_F(F2) == 2
    assert b_F(FI) == 2
    assert b_F(FH) == 3


def test_bF_is_supremum_grid_oracle():
    rng = random.Random(17)
    for _ in range(30):
        a = rng.randrange(-9, 10)
        b = rng.randrange(-9, 10)
        c = rng.randrange(-9, 10)
        try:
            F = FormSpec(a, b, c)
        except ValueError:
            continue
        grid = max(
            abs(F(i / 50, j / 50)) for i in range(-50, 51) for j in range(-50, 51)
        )
        val = b_F(F)
        assert grid <= val + 1e-9
        assert val - grid < 0.05 * max(1.0, val)


# ---------------------------------------------------------------------------
# rho^- : root counts
# ---------------------------------------------------------------------------

def test_rho_minus_pp_examples():
    assert rho_minus_pp(F2, 7, 1) == 2
    assert rho_minus_pp(F2, 7, 2) == 2
    assert rho_minus_pp(F2, 5, 1) == 0


def test_rho_minus_hensel_stability():
    for F in (F2, FI, FH):
        bad = F.disc * F(0, 1)
        for p in primes_up_to(200):
            p = int(p)
            if bad % p == 0:
                continue
            base = rho_minus_direct(F, p)
            for nu in (1, 2, 3):
                assert rho_minus_pp(F, p, nu) == base, (F, p, nu)
                if p**nu <= 3000:
                    assert rho_minus_direct(F, p**nu) == base


def test_rho_minus_at_ramified_primes_matches_scan():
    for F in (F2, FI, FH, FormSpec(2, 1, 3), FormSpec(5, 3, 7)):
        for p, nu in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 1), (5, 2), (7, 2)]:
            assert rho_minus_pp(F, p, nu) == rho_minus_direct(F, p**nu), (F, p, nu)


def test_rho_minus_large_ramified_rejected():
    with pytest.raises(ValueError):
        rho_minus_pp(F2, 2, 25)  # 2 | disc and 2^25 beyond the scan bound


def test_rho_minus_multiplicative():
    rng = random.Random(23)
    for _ in range(60):
        m = rng.randrange(2, 120)
        n = rng.randrange(2, 120)
        if math.gcd(m, n) != 1 or m * n % 2 == 0:
            continue
        if any(F2.disc % p == 0 and p**v > 10**6 for p, v in factor(m * n).pairs()):
            continue
        assert rho_minus(F2, m * n) == rho_minus(F2, m) * rho_minus(F2, n)
        assert rho_minus_direct(F2, m * n) == rho_minus(F2, m * n)


def test_rho_minus_restricted():
    assert rho_minus(F2, 119) == 4
    assert rho_minus(F2, 119, 7) == 2
    assert rho_minus(F2, 1, 5) == 1
    assert rho_minus(FH, 1) == 1


def test_rho_minus_at_most_degree():
    for F in (F2, FI, FH):
        for p in primes_up_to(300):
            p = int(p)
            if F.disc % p:
                assert rho_minus_pp(F, p, 1) <= 2


# ---------------------------------------------------------------------------
# rho: pair counts
# ---------------------------------------------------------------------------

def test_rho_full_examples():
    assert rho_full(F2, 7) == 13
    assert rho_full(F2, 5) == 1
    assert rho_full(F2, 1) == 1


def test_rho_full_against_direct():
    for F in (F2, FI, FH, FormSpec(3, 1, 5)):
        for m in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 49, 11, 13]:
            assert rho_full(F, m) == rho_full_direct(F, m), (F, m)


def test_rho_full_prime_identity():
    for F in (F2, FI, FH):
        for p in primes_up_to(200):
            p = int(p)
            if (2 * F.disc) % p:
                assert rho_full(F, p) == 1 + (p - 1) * rho_minus_pp(F, p, 1)


# ---------------------------------------------------------------------------
# roots_mod
# ---------------------------------------------------------------------------

def test_roots_mod_examples():
    assert roots_mod(F2, 7) == [3, 4]
    assert roots_mod(F2, 17) == [6, 11]
    r119 = roots_mod(F2, 119)
    assert len(r119) == 4
    assert sorted(x % 7 for x in r119) == [3, 3, 4, 4]
    assert sorted(x % 17 for x in r119) == [6, 6, 11, 11]


def test_roots_mod_satisfy_equation_and_count():
    rng = random.Random(7)
    for F in (F2, FI, FH):
        for _ in range(40):
            k = rng.randrange(2, 4000)
            if any(F.disc % p == 0 and p**v > 10**6 for p, v in factor(k).pairs()):
                continue
            roots = roots_mod(F, k)
            assert len(roots) == rho_minus(F, k)
            assert roots == sorted(set(roots))
            for x in roots:
                assert F(x, 1) % k == 0


# ---------------------------------------------------------------------------
# W and base points
# ---------------------------------------------------------------------------

def test_compute_W_examples():
    assert compute_W(L9, F2, 9) == SieveModulus(630, 9)
    assert compute_W(L4, FI, 5) == SieveModulus(60, 5)
    assert compute_W(L9, F2) == SieveModulus(90, 5)
    assert compute_W(L8, F2) == SieveModulus(840, 7)


def test_compute_W_invariants():
    for L, F in ((L9, F2), (L4, FI), (L8, F2)):
        M = compute_W(L, F, 3)
        qL = L.normalize().q
        assert M.W % qL == 0
        for p, _ in factor(F.disc * F(0, 1)).pairs():
            assert p <= M.w0
            assert M.W % p == 0


def test_find_base_point():
    M = compute_W(L9, F2)
    s1, t1 = find_base_point(L9, F2, M)
    assert (s1, t1) == (1, 0)
    v = F2(s1, t1)
    assert math.gcd(v, M.W) == 1
    assert all(abs(chi(v) - 1) < 1e-12 for chi in character_group(L9))
    # the value itself is in the norm class: (1,1) from the worked example
    w = F2(1, 1)
    assert w == -1 and (w % 9) in set(L9.H)


def test_find_base_point_failure():
    F = FormSpec(3, 0, 3)  # always divisible by 3, never a unit mod W
    L = FieldSpec(4, (1,), True)
    with pytest.raises(HypothesisError):
        find_base_point(L, F, compute_W(L, F))
