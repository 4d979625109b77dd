"""Tests for the box sweeps: factorization streams, norm counts, fits."""

import math
import random

import numpy as np
import pytest

from normsieve import _kernels
from normsieve.arith import factor
from normsieve.errors import HypothesisError, ResourceBudgetError
from normsieve.engine import (
    EXAMPLE_PAIRS,
    SweepConfig,
    asymptotic_fit,
    chebotarev_slope,
    chebotarev_sum,
    count_NFL,
    count_loc_upper,
    factorize_box,
    nt_diagnostic,
    nt_product,
    row_sieve_factorize,
    sweep_sum,
)
from normsieve.engine import _row_plan, _scan_row
from normsieve.fields import (
    FieldSpec,
    is_norm_value,
    r_L,
    splitting_data,
    varpi,
)
from normsieve.forms import FormSpec, compute_W, find_base_point

L9 = FieldSpec(9, (1, 8), True)
L4 = FieldSpec(4, (1,), True)
F2 = FormSpec(1, 0, -2)
FI = FormSpec(1, 0, 1)
STRATEGIES = ("naive", "spf_table", "row_sieve")


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def count_exact_direct(L, F, B):
    """Per-pair norm test straight from the splitting data."""
    total = 0
    for s in range(-B, B + 1):
        for t in range(-B, B + 1):
            v = F(s, t)
            if v != 0 and is_norm_value(L, v):
                total += 1
    return total


def count_upper_direct(L, F, B):
    total = 0
    for s in range(-B, B + 1):
        for t in range(-B, B + 1):
            v = F(s, t)
            if v:
                total += varpi(L, abs(v))
    return total


def count_detector_direct(L, F, B):
    """Squarefree completely-split values on the standard class, gcd 1."""
    M = compute_W(L, F)
    s1, t1 = find_base_point(L, F, M)
    total = 0
    for s in range(-B, B + 1):
        for t in range(-B, B + 1):
            if (s - s1) % M.W or (t - t1) % M.W or math.gcd(s, t) != 1:
                continue
            v = F(s, t)
            if v == 0:
                continue
            f = factor(abs(v))
            if not f.is_squarefree():
                continue
            if all(splitting_data(L, p) == (1, 1, L.degree) for p in f.primes):
                total += 1
    return total


# ---------------------------------------------------------------------------
# configuration and guards
# ---------------------------------------------------------------------------

def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(B=0)
    with pytest.raises(ValueError):
        SweepConfig(B=10, strategy="hashtable")
    with pytest.raises(ValueError):
        SweepConfig(B=10, threads=0)
    with pytest.raises(ValueError):
        SweepConfig(B=10, klass=((0, 0), 0))
    assert SweepConfig(B=512).resolved_strategy() == "spf_table"
    assert SweepConfig(B=513).resolved_strategy() == "row_sieve"
    assert SweepConfig(B=10, strategy="naive").resolved_strategy() == "naive"


def test_overflow_guard():
    with pytest.raises(OverflowError):
        count_NFL(L9, F2, 2**31)


def test_sweep_sum_validation():
    with pytest.raises(ValueError):
        sweep_sum(L9, F2, 10, "norm_count")
    with pytest.raises(ValueError):
        sweep_sum(L9, F2, 10, "exact_norm", d=0)
    with pytest.raises(ValueError):
        sweep_sum(L9, F2, 10, "exact_norm", config=SweepConfig(B=11))
    with pytest.raises(ValueError):
        count_NFL(L9, F2, 10, mode="something_else")


def test_exact_norm_requires_pid():
    L = FieldSpec(23, (1, 22), pid=False)
    with pytest.raises(HypothesisError):
        count_NFL(L, F2, 5)
    # the detector set never promotes ideal norms to element norms
    assert count_NFL(L, FormSpec(1, 1, 6), 5, "squarefree_detector") >= 0


def test_spf_budget_guard():
    cfg = SweepConfig(B=200, strategy="spf_table", memory_budget=1000)
    with pytest.raises(ResourceBudgetError):
        count_NFL(L9, F2, 200, config=cfg)


# ---------------------------------------------------------------------------
# count_NFL
# ---------------------------------------------------------------------------

def test_count_B1_includes_negative_unit_value():
    # (1,1) has value -1 on s^2-2t^2: a norm (odd degree), so it counts
    assert F2(1, 1) == -1
    assert is_norm_value(L9, -1)
    assert count_NFL(L9, F2, 1) == 6


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_count_B1_all_strategies(strategy):
    cfg = SweepConfig(B=1, strategy=strategy)
    assert count_NFL(L9, F2, 1, config=cfg) == 6


def test_count_monotone_in_B():
    vals = [count_NFL(L9, F2, B) for B in (2, 4, 8, 16, 32, 64)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("L,F", EXAMPLE_PAIRS, ids=["cubic", "gauss"])
def test_count_matches_direct_B100(L, F):
    cfg = SweepConfig(B=100, strategy="row_sieve")
    assert count_NFL(L, F, 100, config=cfg) == count_exact_direct(L, F, 100)


@pytest.mark.parametrize("L,F", EXAMPLE_PAIRS, ids=["cubic", "gauss"])
def test_upper_matches_direct(L, F):
    cfg = SweepConfig(B=60, strategy="row_sieve")
    assert count_loc_upper(L, F, 60, config=cfg) == count_upper_direct(L, F, 60)


@pytest.mark.parametrize("L,F", EXAMPLE_PAIRS, ids=["cubic", "gauss"])
def test_detector_matches_direct(L, F):
    got = count_NFL(L, F, 150, "squarefree_detector",
                    SweepConfig(B=150, strategy="row_sieve"))
    assert got == count_detector_direct(L, F, 150)


def test_detector_below_exact_on_same_class():
    # the detector undercounts the exact count restricted to its own class
    M = compute_W(L9, F2)
    base = find_base_point(L9, F2, M)
    cfg = SweepConfig(B=120, klass=(base, M.W), coprime_only=True)
    exact = sweep_sum(L9, F2, 120, "exact_norm", config=cfg)
    det = count_NFL(L9, F2, 120, "squarefree_detector",
                    SweepConfig(B=120, klass=(base, M.W)))
    assert det <= exact


def test_interleaved_inequalities():
    for B in (32, 64, 128):
        det = count_NFL(L9, F2, B, "squarefree_detector")
        mid = count_NFL(L9, F2, B)
        up = count_loc_upper(L9, F2, B)
        assert det <= mid <= up


def test_negative_values_rejected_for_imaginary_field():
    # s^2 - 2t^2 takes negative values; Q(i) norms are nonnegative
    F, B = F2, 40
    cnt = sweep_sum(L4, F, B, "exact_norm", config=SweepConfig(B=B))
    direct = count_exact_direct(L4, F, B)
    assert cnt == direct
    # and some positions were indeed rejected by sign alone
    rejected = sum(
        1
        for s in range(-B, B + 1)
        for t in range(-B, B + 1)
        if F(s, t) < 0 and varpi(L4, abs(F(s, t)))
    )
    assert rejected > 0 and cnt + rejected == count_loc_upper(L4, F, B)


# ---------------------------------------------------------------------------
# strategy equivalence and streams
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("L,F", EXAMPLE_PAIRS, ids=["cubic", "gauss"])
def test_strategies_identical_counts(L, F):
    for B in (37, 200):
        exact = {count_NFL(L, F, B, config=SweepConfig(B=B, strategy=s))
                 for s in STRATEGIES}
        det = {count_NFL(L, F, B, "squarefree_detector",
                         SweepConfig(B=B, strategy=s)) for s in STRATEGIES}
        up = {count_loc_upper(L, F, B, SweepConfig(B=B, strategy=s))
              for s in STRATEGIES}
        assert len(exact) == len(det) == len(up) == 1


@pytest.mark.parametrize("F", [F2, FI], ids=["F2", "FI"])
def test_streams_identical(F):
    streams = [list(factorize_box(F, 25, s)) for s in STRATEGIES]
    assert streams[0] == streams[1] == streams[2]
    # ordering contract: t ascending, then s ascending, origin skipped
    seen = [(s, t) for s, t, _ in streams[0]]
    assert seen == [(s, t) for t in range(-25, 26) for s in range(-25, 26)
                    if (s, t) != (0, 0)]


def test_row_sieve_factorize_matches_factor_B50():
    for s, t, fz in row_sieve_factorize(F2, 50):
        v = abs(F2(s, t))
        ref = factor(v)
        assert fz == ref, (s, t)


def test_row_sieve_factorize_unit_value():
    fzs = {(s, t): fz for s, t, fz in row_sieve_factorize(F2, 1)}
    assert fzs[(1, 1)].primes == () and fzs[(1, 1)].n == 1
    assert (0, 0) not in fzs
    assert len(fzs) == 8


def test_factorize_box_rejects_unknown_strategy():
    with pytest.raises(ValueError):
        list(factorize_box(F2, 5, "mystery"))


# ---------------------------------------------------------------------------
# kernels and parallelism
# ---------------------------------------------------------------------------

def test_backend_selected():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_kernel_twins_agree():
    if not _kernels._HAVE_NUMBA:
        pytest.skip("numba unavailable")
    plan = _row_plan(L9, F2, 250)
    rng = random.Random(20260815)
    rows = [0, 1, -1, 2 * 3 * 5 * 7, -90] + [rng.randint(-250, 250) for _ in range(10)]
    for t in rows:
        a = _scan_row(plan, t, kernel=_kernels.row_kernel_numpy)
        b = _scan_row(plan, t, kernel=_kernels.row_kernel_numba)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)


def test_numpy_kernel_full_count():
    cfg = SweepConfig(B=90, strategy="row_sieve")
    got = sweep_sum(L9, F2, 90, "exact_norm", config=cfg,
                    kernel=_kernels.row_kernel_numpy)
    assert got == count_NFL(L9, F2, 90, config=cfg)


def test_parallel_determinism():
    base = count_NFL(L9, F2, 150, config=SweepConfig(B=150, strategy="row_sieve"))
    for threads in (2, 3, 8):
        cfg = SweepConfig(B=150, strategy="row_sieve", threads=threads)
        assert count_NFL(L9, F2, 150, config=cfg) == base
    # class-restricted sweeps take the unmirrored path; check those too
    M = compute_W(L9, F2)
    base_cfg = SweepConfig(B=150, strategy="row_sieve",
                           klass=(find_base_point(L9, F2, M), M.W))
    ref = sweep_sum(L9, F2, 150, "detector", config=base_cfg)
    for threads in (2, 5):
        cfg = SweepConfig(B=150, strategy="row_sieve", threads=threads,
                          klass=(find_base_point(L9, F2, M), M.W))
        assert sweep_sum(L9, F2, 150, "detector", config=cfg) == ref


def test_mirror_symmetry_consistency():
    # forcing the full-row path via a trivial class must not change counts
    full = SweepConfig(B=75, strategy="row_sieve", klass=((0, 0), 1))
    sym = SweepConfig(B=75, strategy="row_sieve")
    for mode in ("exact_norm", "loc_upper"):
        assert (sweep_sum(L9, F2, 75, mode, config=full)
                == sweep_sum(L9, F2, 75, mode, config=sym))


# ---------------------------------------------------------------------------
# the split-detector identity
# ---------------------------------------------------------------------------

def test_detector_identity_random_pairs():
    """mu^2 * 1_norm = mu^2 * r_L / n^omega on values coprime to W."""
    M = compute_W(L9, F2)
    s1, t1 = find_base_point(L9, F2, M)
    n = L9.degree
    rng = random.Random(97)
    checked = 0
    while checked < 10**4:
        s = s1 + M.W * rng.randint(-60, 60)
        t = t1 + M.W * rng.randint(-60, 60)
        v = F2(s, t)
        if v == 0:
            continue
        f = factor(abs(v))
        mu2 = 1 if f.is_squarefree() else 0
        lhs = mu2 * (1 if is_norm_value(L9, v) else 0)
        rhs = mu2 * r_L(L9, f) / n ** f.omega
        assert rhs in (0.0, 1.0)
        assert lhs == rhs, (s, t, v)
        # and local solubility is implied on the detector set
        if lhs == 1:
            assert varpi(L9, abs(v)) == 1
        checked += 1


# ---------------------------------------------------------------------------
# asymptotic fit
# ---------------------------------------------------------------------------

def test_fit_synthetic_exact():
    counts = [(B, B * B) for B in (10, 100, 1000, 10000)]
    cB, spread = asymptotic_fit(counts, 3, 3)
    assert cB == [1.0, 1.0, 1.0, 1.0]
    assert spread == 1.0


def test_fit_validation():
    with pytest.raises(ValueError):
        asymptotic_fit([(10, 100), (20, 400)], 1, 3)
    with pytest.raises(ValueError):
        asymptotic_fit([(10, 1), (10, 2), (20, 3)], 1, 3)
    with pytest.raises(ValueError):
        asymptotic_fit([(1, 1), (2, 2), (3, 3)], 1, 3)
    with pytest.raises(ValueError):
        asymptotic_fit([(2, 1), (4, 2), (8, 3)], 4, 3)


def test_fit_measured_smoke():
    counts = [(B, count_NFL(L9, F2, B)) for B in (64, 128, 256)]
    cB, spread = asymptotic_fit(counts, 1, 3)
    assert all(c > 0 for c in cB)
    assert spread < 1.5


# ---------------------------------------------------------------------------
# the slow local product
# ---------------------------------------------------------------------------

def test_nt_product_range_and_pin():
    v9 = nt_product(L9, F2, 1000)
    v4 = nt_product(L4, FI, 1000)
    assert 0 < v9 <= 1 and 0 < v4 <= 1
    assert v9 == pytest.approx(0.19834847, rel=1e-6)
    assert v4 == pytest.approx(0.85616305, rel=1e-6)
    with pytest.raises(ValueError):
        nt_product(L9, F2, 9)


def test_nt_product_decreases():
    assert nt_product(L9, F2, 10**4) < nt_product(L9, F2, 10**3)


def test_nt_diagnostic_flat_smoke():
    diag = nt_diagnostic(L9, F2, [10**3, 10**4], 1, 3)
    assert max(diag) / min(diag) - 1 < 0.01


def test_chebotarev_sum_and_slope():
    sums = chebotarev_sum(L9, F2, [10**3, 10**4, 10**5])
    assert sums == sorted(sums)
    slope = chebotarev_slope(L9, F2, [10**3, 10**4, 10**5])
    assert 0.2 < slope < 0.5
    with pytest.raises(ValueError):
        chebotarev_slope(L9, F2, [100])


# ---------------------------------------------------------------------------
# regression pins (measured once, deterministic)
# ---------------------------------------------------------------------------

def test_pinned_counts():
    assert count_NFL(L9, F2, 256) == 25938
    assert count_NFL(L9, F2, 256, "squarefree_detector") == 9
    assert count_loc_upper(L9, F2, 256) == 25938
