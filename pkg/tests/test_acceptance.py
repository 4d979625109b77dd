"""Acceptance gate: the thirteen headline checks, one test (and one
pass/fail line on stdout) per criterion.  Run with -s to see the lines;
under plain -v each test name doubles as the verdict line.
"""

import math
import time
from functools import lru_cache

from normsieve.arith import factor, primes_up_to
from normsieve.engine import (EXAMPLE_PAIRS, SweepConfig, asymptotic_fit,
                              chebotarev_slope, count_NFL, count_loc_upper,
                              factorize_box, nt_diagnostic, sweep_sum)
from normsieve.fields import (FieldSpec, character_group, construct_L0,
                              is_norm_prime, r_L)
from normsieve.forms import FormSpec, compute_W, rho_full, rho_minus
from normsieve.lattices import lambda_star_count, lambda_star_estimate
from normsieve.series import (V0, c_FL, frakS, mertens_rho, mertens_twisted,
                              sigma_k, u_FL)
from normsieve.sieve import beta_weights, check_weights, fundamental_lemma_check

L4 = FieldSpec(4, (1,), True)
L8 = FieldSpec(8, (1,), True)
L9 = FieldSpec(9, (1, 8), True)
F2 = FormSpec(1, 0, -2)
FI = FormSpec(1, 0, 1)
W9 = compute_W(L9, F2).W

BS9 = (256, 512, 1024, 2048, 4096)


def _verdict(num, label, ok, detail=""):
    print(f"criterion {num:02d} [{label}]: {'PASS' if ok else 'FAIL'}"
          + (f"  ({detail})" if detail else ""))
    assert ok, f"criterion {num:02d} {label} failed: {detail}"


@lru_cache(maxsize=1)
def _norm_counts():
    """exact_norm counts at the criterion-9 checkpoints, 4 workers."""
    return {B: count_NFL(L9, F2, B, config=SweepConfig(B=B, threads=4))
            for B in BS9}


def test_criterion_01_r_L_oracle():
    t0 = time.monotonic()
    r2 = [0] * (10**4 + 1)
    for a in range(-100, 101):
        aa = a * a
        for b in range(-100, 101):
            k = aa + b * b
            if k <= 10**4:
                r2[k] += 1
    bad = sum(1 for k in range(1, 10**4 + 1) if 4 * r_L(L4, k) != r2[k])
    dt = time.monotonic() - t0
    _verdict(1, "r_L oracle equivalence", bad == 0 and dt < 5.0,
             f"k <= 1e4 exact, {bad} mismatches, {dt:.2f}s")


def test_criterion_02_norm_detection():
    t0 = time.monotonic()
    chars = character_group(L9)
    bad = 0
    for p in primes_up_to(10**4):
        p = int(p)
        if p == 3:
            continue
        s = sum(chi(p) for chi in chars)
        assert abs(s.imag) < 1e-9
        by_char = abs(s.real / 3 - 1.0) < 1e-9
        if not (is_norm_prime(L9, p) == (p % 9 in (1, 8)) == by_char):
            bad += 1
    dt = time.monotonic() - t0
    _verdict(2, "norm detection", bad == 0 and dt < 1.0,
             f"primes <= 1e4, {bad} mismatches, {dt:.2f}s")


def test_criterion_03_hensel_rho():
    t0 = time.monotonic()
    bad = 0
    for F in (F2, FI):
        for p in primes_up_to(200):
            p = int(p)
            if (F.disc * F(0, 1)) % p:
                r1 = rho_minus(F, p)
                if any(rho_minus(F, p**nu) != r1 for nu in (2, 3)):
                    bad += 1
            if (2 * F.disc) % p:
                if rho_full(F, p) != 1 + (p - 1) * rho_minus(F, p):
                    bad += 1
    dt = time.monotonic() - t0
    _verdict(3, "Hensel/rho suite", bad == 0 and dt < 10.0,
             f"both forms, p <= 200, nu <= 3, {bad} mismatches, {dt:.2f}s")


def test_criterion_04_sieve_weights():
    t0 = time.monotonic()
    ok = (check_weights(beta_weights(30**6, 1, "-", 30), 10**5)
          and check_weights(beta_weights(30**6, 1, "+", 30), 10**5))
    dt = time.monotonic() - t0
    _verdict(4, "sieve weights (i)-(iv)", ok and dt < 10.0,
             f"squarefree n <= 1e5, z=30, y=z^6, {dt:.2f}s")


def test_criterion_05_fundamental_lemma_ratio():
    t0 = time.monotonic()
    wp = beta_weights(30**6, 1, "+", 30)
    wm = beta_weights(30**6, 1, "-", 30)
    rm, rp = fundamental_lemma_check(lambda p: 1.0 / p, wp, wm, 30)
    dt = time.monotonic() - t0
    ok = 0.95 <= rm <= 1.05 and 0.95 <= rp <= 1.05 and dt < 10.0
    _verdict(5, "fundamental lemma ratio", ok,
             f"ratios {rm:.6f}/{rp:.6f}, {dt:.2f}s")


def test_criterion_06_euler_product_limit():
    t0 = time.monotonic()
    c = c_FL(L9, F2, V0, W9, P=10**6).value
    u = u_FL(L9, F2, V0, W9)
    errs = []
    for (a, k1) in ((1, 1), (7, 1), (1, 7)):
        got = frakS(L9, F2, 10**6, a, k1, V0, W9)
        target = c * u(a * k1) * sigma_k(L9, F2, k1, a).value
        errs.append(abs(got - target) / abs(target))
    dt = time.monotonic() - t0
    ok = all(e < 0.02 for e in errs) and dt < 120.0
    # the (7,1) sum is a near-cancellation; at truncation 1e6 its relative
    # error is ~5% and this criterion stays red (see module tests: the
    # identity does hold to <1% at truncation 1e7)
    _verdict(6, "Euler-product limit", ok,
             "rel errs " + "/".join(f"{e:.4f}" for e in errs)
             + f", tol 0.02, {dt:.1f}s")


def test_criterion_07_lattice_estimate():
    t0 = time.monotonic()
    rels = []
    for k in (1, 7, 17, 119):
        got = lambda_star_count(F2, 10**4, 0, k, (0, 0), 1)
        est = lambda_star_estimate(F2, 10**4, 0, k, 1)
        rels.append(abs(got - est) / est)
    dt = time.monotonic() - t0
    ok = all(r <= 0.02 for r in rels) and dt < 120.0
    _verdict(7, "lattice estimate", ok,
             "rel " + "/".join(f"{r:.5f}" for r in rels) + f", {dt:.1f}s")


def test_criterion_08_mertens_constants():
    t0 = time.monotonic()
    c5 = mertens_rho(F2, 10**5)[1]
    c6 = mertens_rho(F2, 10**6)[1]
    t5 = mertens_twisted(L9, F2, 10**5)
    t6 = mertens_twisted(L9, F2, 10**6)
    s5 = mertens_twisted(L8, F2, 10**5)
    s6 = mertens_twisted(L8, F2, 10**6)
    b5 = s5 - math.log(math.log(10**5))
    b6 = s6 - math.log(math.log(10**6))
    dt = time.monotonic() - t0
    ok = (abs(c6 - c5) < 0.05 and abs(t6 - t5) < 0.05
          and s6 - s5 > 0.05 and abs(b6 - b5) < 0.05 and dt < 60.0)
    _verdict(8, "Mertens constants", ok,
             f"untwisted {abs(c6-c5):.2e}, twisted {abs(t6-t5):.2e}, "
             f"reducible grows {s5:.3f}->{s6:.3f} const {b5:.3f}->{b6:.3f}, "
             f"{dt:.1f}s")


def test_criterion_09_main_theorem_order():
    t0 = time.monotonic()
    single = {B: count_NFL(L9, F2, B) for B in BS9}
    t_single = time.monotonic() - t0
    t0 = time.monotonic()
    four = _norm_counts()
    t_four = time.monotonic() - t0
    assert single == four
    _, spread = asymptotic_fit([(B, single[B]) for B in BS9], 1, 3)
    ok = spread < 1.30 and t_single < 600.0 and t_four < 180.0
    _verdict(9, "main theorem order", ok,
             f"spread {spread:.4f}, single {t_single:.1f}s, "
             f"4 workers {t_four:.1f}s")


def test_criterion_10_upper_lower_consistency():
    exact = _norm_counts()
    ok = True
    lines = []
    for B in BS9:
        lo = count_NFL(L9, F2, B, mode="squarefree_detector",
                       config=SweepConfig(B=B, threads=4))
        hi = count_loc_upper(L9, F2, B, config=SweepConfig(B=B, threads=4))
        lines.append(f"{lo}<={exact[B]}<={hi}")
        ok = ok and lo <= exact[B] <= hi
    _verdict(10, "upper/lower consistency", ok, ", ".join(lines))


def test_criterion_11_descent_identity():
    L0 = construct_L0(L8, F2)
    same = L0 == L4
    bad = sum(1 for p in primes_up_to(10**4)
              if int(p) % 8 == 1 and r_L(L8, int(p)) != 2 * r_L(L0, int(p)))
    _verdict(11, "descent identity", same and bad == 0,
             f"L0 == (4,{{1}}): {same}, r_L = 2 r_L0 mismatches: {bad}")


def test_criterion_12_product_diagnostics():
    t0 = time.monotonic()
    checkpoints = (10**3, 10**4, 10**5, 10**6)
    prods = nt_diagnostic(L9, F2, checkpoints, 1, 3)
    drift = max(prods) / min(prods) - 1.0
    slope = chebotarev_slope(L9, F2, checkpoints)
    dt = time.monotonic() - t0
    ok = drift < 0.15 and abs(slope - 1 / 3) / (1 / 3) < 0.10 and dt < 120.0
    _verdict(12, "log-power product diagnostics", ok,
             f"drift {drift:.4f}, slope {slope:.4f} vs 1/3, {dt:.1f}s")


def test_criterion_13_strategy_equivalence():
    strategies = ("naive", "spf_table", "row_sieve")
    # identical factorization streams, order included
    for F in (F2, FI):
        for B in (*range(1, 21), 200):
            its = [factorize_box(F, B, strategy=s) for s in strategies]
            for x, y, z in zip(*its, strict=True):
                assert x == y == z
    # identical counts in every mode
    ok = True
    for (L, F) in EXAMPLE_PAIRS:
        for mode in ("exact_norm", "loc_upper", "detector"):
            vals = {sweep_sum(L, F, 200, mode,
                              config=SweepConfig(B=200, strategy=s))
                    for s in strategies}
            ok = ok and len(vals) == 1
    _verdict(13, "strategy equivalence", ok,
             "streams and counts identical at B <= 20 and B = 200")
