"""Beta-sieve weights and the lower-bound pipeline built on them.

The weights are a truncated Moebius function: lambda_d = mu(d) on a
combinatorially chosen set of squarefree d with prime factors below z and
d <= y, zero elsewhere.  They feed the congruence sums M_d (squarefree,
split-weighted values divisible by d) and S_d (the same sums with the
squarefree condition unfolded through m^2 | F), and finally the pipeline
that checks the sieved lower bound against the direct minorant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Tuple

from .arith import Factorization, factor, primes_up_to
from .engine import SweepConfig, sweep_sum
from .fields import (FieldSpec, construct_L0, factor_count_over_L,
                     r_L_from_splitting, splitting_data)
from .forms import FormSpec, compute_W, find_base_point, rho_minus

__all__ = [
    "SieveWeights",
    "beta_weights",
    "check_weights",
    "fundamental_lemma_check",
    "M_d",
    "S_d",
    "omega_z",
    "lower_bound_pipeline",
]


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SieveWeights:
    """One sign of the beta-sieve: lambda_d = mu(d) on `support`, else 0.

    `support` maps d to lambda_d and only carries the nonzero entries; every
    key is squarefree with prime factors < z and d <= y.
    """

    y: float
    beta: float
    sign: str
    z: float
    support: Mapping[int, int]

    def weight(self, d: int) -> int:
        return self.support.get(d, 0)

    def divisor_sum(self, n: int | Factorization) -> int:
        """sum_{d | n} lambda_d, the quantity constrained by invariant (iv)."""
        f = n if isinstance(n, Factorization) else factor(n)
        if not f.is_squarefree():
            raise ValueError("divisor_sum expects squarefree n")
        divs = [1]
        for p in f.primes:
            divs += [d * p for d in divs]
        return sum(self.support.get(d, 0) for d in divs)


def beta_weights(y, beta, sign: str, z) -> SieveWeights:
    """Combinatorial beta-sieve weights of one sign.

    d = p_1 ... p_r (p_1 > ... > p_r, all < z) is retained with
    lambda_d = mu(d) iff d <= y and p_m^{beta+1} p_{m-1} ... p_1 <= y at
    every truncation depth m of the critical parity: even m for the minus
    weights, odd m for the plus weights.  Deterministic.
    """
    if y <= 1:
        raise ValueError("sieve level y > 1 required")
    if z < 2:
        raise ValueError("prime cutoff z >= 2 required")
    if beta < 1:
        raise ValueError("sifting parameter beta >= 1 required")
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    # descending primes: the DFS appends ever-smaller factors, so each
    # parity condition is checked once, when its prime enters
    ps = [int(p) for p in primes_up_to(int(math.ceil(z))) if p < z][::-1]
    critical = 0 if sign == "-" else 1
    exact = float(beta).is_integer()
    bexp = int(beta) + 1
    logy = math.log(y)
    support: Dict[int, int] = {1: 1}

    def admissible(p: int, d: int, m: int) -> bool:
        if m % 2 != critical:
            return True
        if exact:
            return p**bexp * d <= y
        return (beta + 1.0) * math.log(p) + math.log(d) <= logy + 1e-12

    def grow(start: int, d: int, m: int) -> None:
        for i in range(start, len(ps)):
            p = ps[i]
            nd = d * p
            # ps is descending, so a failure here can still pass at i+1
            if nd > y or not admissible(p, d, m + 1):
                continue
            support[nd] = -1 if (m + 1) % 2 else 1
            grow(i + 1, nd, m + 1)

    grow(0, 1, 0)
    return SieveWeights(y=float(y), beta=float(beta), sign=sign,
                        z=float(z), support=support)


def check_weights(w: SieveWeights, N: int) -> bool:
    """Exhaustive audit of the four weight invariants.

    (i) lambda_1 = 1; (ii) |lambda_d| <= 1; (iii) lambda_d = 0 beyond the
    level y (and off the squarefree z-smooth integers); (iv) for every
    squarefree n <= N with all prime factors < z and n > 1, the divisor sum
    of the minus weights is <= 0 and of the plus weights >= 0.
    """
    if w.weight(1) != 1:
        return False
    for d, lam in w.support.items():
        if lam not in (-1, 0, 1):
            return False
        if d > w.y and lam != 0:
            return False
        f = factor(d)
        if not f.is_squarefree() or any(p >= w.z for p in f.primes):
            return False
    good: Callable[[int], bool] = (
        (lambda s: s <= 0) if w.sign == "-" else (lambda s: s >= 0))
    ps = [int(p) for p in primes_up_to(int(math.ceil(w.z))) if p < w.z]

    def scan(start: int, n: int, divs) -> bool:
        for i in range(start, len(ps)):
            nn = n * ps[i]
            if nn > N:
                break  # ascending primes: every later product is larger
            ndivs = divs + [d * ps[i] for d in divs]
            if not good(sum(w.support.get(d, 0) for d in ndivs)):
                return False
            if not scan(i + 1, nn, ndivs):
                return False
        return True

    return scan(0, 1, [1])


# ---------------------------------------------------------------------------
# fundamental-lemma main term
# ---------------------------------------------------------------------------

def fundamental_lemma_check(g: Callable[[int], float], w_plus: SieveWeights,
                            w_minus: SieveWeights, z, kappa: float = 1.0,
                            M: float = 10.0) -> Tuple[float, float]:
    """Ratios sum_d lambda_d^{+-} g(d) / prod_{p<z} (1 - g(p)).

    `g` must be the density of a kappa-dimensional sieve problem: values in
    [0, 1) at primes, and for every prime w < z
        prod_{w <= p < z} (1 - g(p))^{-1}
            <= (log z / log w)^kappa (1 + M / log w).
    Densities violating either condition (in particular divergent ones,
    whose partial products blow past the dimension envelope) are rejected.
    Returns (ratio_minus, ratio_plus).
    """
    if w_plus.sign != "+" or w_minus.sign != "-":
        raise ValueError("expected the plus weights first, then the minus")
    if not (w_plus.z == w_minus.z == float(z)):
        raise ValueError("weights were built with a different prime cutoff")
    ps = [int(p) for p in primes_up_to(int(math.ceil(z))) if p < z]
    vals = {}
    for p in ps:
        gp = float(g(p))
        if not 0.0 <= gp < 1.0:
            raise ValueError(f"g({p}) = {gp} lies outside [0, 1)")
        vals[p] = gp
    for i, w in enumerate(ps):
        partial = 1.0
        for p in ps[i:]:
            partial /= 1.0 - vals[p]
        cap = (math.log(z) / math.log(w)) ** kappa * (1.0 + M / math.log(w))
        if partial > cap:
            raise ValueError(
                f"density too steep at w = {w}: partial product {partial:.6g}"
                f" exceeds the dimension-{kappa} envelope {cap:.6g}")
    denom = 1.0
    for p in ps:
        denom *= 1.0 - vals[p]

    def side(w: SieveWeights) -> float:
        total = 0.0
        for d, lam in sorted(w.support.items()):
            gd = 1.0
            for p, _ in factor(d).pairs():
                gd *= vals[p]
            total += lam * gd
        return total / denom

    return side(w_minus), side(w_plus)


# ---------------------------------------------------------------------------
# the congruence sums
# ---------------------------------------------------------------------------

def M_d(L: FieldSpec, F: FormSpec, B: int, d: int, base: Tuple[int, int],
        W: int, threads: int = 1, strategy: str = "auto") -> int:
    """sum of mu^2(F(s,t)) r_L(F(s,t)) over the class, restricted to d | F.

    The sum runs over |s|,|t| <= B with gcd(s,t) = 1 and (s,t) = base
    mod W.  On that class every value is a unit mod W, so the squarefree
    values carrying r_L > 0 are exactly the completely-split ones, each
    weighted n^omega — which is what the engine's split_weight mode adds up.
    Exact integer.
    """
    if d < 1:
        raise ValueError("d >= 1 required")
    if not factor(d).is_squarefree():
        raise ValueError("d must be squarefree")
    if math.gcd(d, W) != 1:
        raise ValueError("gcd(d, W) = 1 required")
    cfg = SweepConfig(B=B, strategy=strategy, threads=threads,
                      coprime_only=True, klass=((base[0], base[1]), W))
    return sweep_sum(L, F, B, "split_weight", d=d, config=cfg)


def _class_range(residue: int, W: int, B: int) -> range:
    """The arithmetic progression residue mod W clipped to [-B, B]."""
    first = residue - ((residue + B) // W) * W
    return range(first, B + 1, W)


def S_d(L: FieldSpec, F: FormSpec, B: int, d: int, m: int,
        base: Tuple[int, int], W: int) -> int:
    """sum of r_L(F(s,t)) over the class with lcm(d, m^2) | F(s,t).

    Same domain as M_d but no squarefree restriction: this is the sum the
    Moebius unfolding mu^2(k) = sum_{m^2 | k} mu(m) produces.  The class is
    sparse (one pair per W^2 box), so each value is factored directly.
    """
    if d < 1 or m < 1:
        raise ValueError("d, m >= 1 required")
    if math.gcd(d * m, W) != 1:
        raise ValueError("gcd(dm, W) = 1 required")
    ell = math.lcm(d, m * m)
    s1, t1 = base
    total = 0
    for t in _class_range(t1, W, B):
        for s in _class_range(s1, W, B):
            if math.gcd(s, t) != 1:
                continue
            v = F(s, t)
            if v == 0 or v % ell:
                continue
            total += r_L_from_splitting(L, factor(abs(v)))
    return total


def omega_z(k: int | Factorization, z) -> int:
    """#{p | k : p <= z}, the truncated prime-divisor count."""
    f = k if isinstance(k, Factorization) else factor(k)
    return sum(1 for p in f.primes if p <= z)


def _md_known_zero(L, F: FormSpec, d: int) -> bool:
    """True when M_d = 0 is forced by a local obstruction at some p | d.

    Either p fails to split completely (an ideal of norm p is missing, so
    r_L kills every squarefree multiple of p), or F has no root mod p and
    p does not divide F(1,0) (so no primitive value is divisible by p).
    Only called for d coprime to W, hence p unramified and p odd.
    """
    if d == 1:
        return False
    n = L.degree
    for p, _ in factor(d).pairs():
        if splitting_data(L, p) != (1, 1, n):
            return True
        if rho_minus(F, p) == 0 and F(1, 0) % p:
            return True
    return False


# ---------------------------------------------------------------------------
# the lower-bound pipeline
# ---------------------------------------------------------------------------

def lower_bound_pipeline(L: FieldSpec, F: FormSpec, B: int, eta=None,
                         eps0=None, beta: float = 1.0,
                         threads: int = 1, w0: int = 2) -> dict:
    """Chain the minorant, the sieve bound, and the predicted order.

    Steps: (a) the direct minorant sum mu^2(F) r_L(F) / n^omega(F, z) over
    the congruence class; (b) the sieved lower bound
    sum_d lambda_d^- (1 - 1/n)^omega(d) M_d(B) over d <= y coprime to W;
    (c) the inequality (a) >= (b); (d) the predicted order
    B^2 / (log B)^(1 - 1/n) and the ratio of (a) against it.

    When F splits into two conjugate factors over L the count switches to
    the index-two subfield: r_{L0} with n/2 in place of n.  Since
    (2/n)^omega = (1/deg L0)^omega, that branch is the plain pipeline run
    with the effective field L0.

    The exponents default to eta = 1/(16 n^2) and eps0 = 1/(8 n^2) with n
    the effective degree.  At desk scale those give z = B^eta < 2: the
    weights collapse to {1: 1} and (a) = (b) exactly — a true, if idle,
    inequality.  Override eta/eps0 to give the sieve content.

    `w0` is an explicit floor for the sieve-support bound; compute_W may
    still enlarge it past the requested value (convergence floor, bad
    primes), never shrink it.
    """
    if B < 2:
        raise ValueError("B >= 2 required")
    Lmin = L.normalize()
    reducible = factor_count_over_L(Lmin, F) == 2
    L_eff = construct_L0(Lmin, F) if reducible else Lmin
    n_eff = L_eff.degree
    if eta is None:
        eta = 1.0 / (16.0 * n_eff * n_eff)
    if eps0 is None:
        eps0 = 1.0 / (8.0 * n_eff * n_eff)
    M = compute_W(Lmin, F, w0_min=w0)
    base = find_base_point(Lmin, F, M)  # assumption (ii) gate
    W = M.W
    z = B**eta
    y = B**eps0
    weights = beta_weights(y, beta, "-", max(2.0, z))

    # (b) the sieved lower bound
    sieved = 0.0
    md_values: Dict[int, int] = {}
    for dd in sorted(weights.support):
        if math.gcd(dd, W) != 1:
            continue
        if _md_known_zero(L_eff, F, dd):
            md_values[dd] = 0  # forced by a local obstruction, no sweep
            continue
        md = M_d(L_eff, F, B, dd, base, W, threads=threads)
        md_values[dd] = md
        sieved += (weights.support[dd]
                   * (1.0 - 1.0 / n_eff) ** factor(dd).omega * md)

    # (a) the direct minorant over the (sparse) class grid
    direct = 0.0
    s1, t1 = base
    for t in _class_range(t1, W, B):
        for s in _class_range(s1, W, B):
            if math.gcd(s, t) != 1:
                continue
            v = F(s, t)
            if v == 0:
                continue
            fz = factor(abs(v))
            if not fz.is_squarefree():
                continue
            r = r_L_from_splitting(L_eff, fz)
            if r == 0:
                continue
            direct += r / float(n_eff) ** omega_z(fz, z)

    predicted = B * B / math.log(B) ** (1.0 - 1.0 / n_eff)
    return {
        "B": B,
        "W": W,
        "w0": M.w0,
        "base": base,
        "reducible": reducible,
        "degree": Lmin.degree,
        "effective_degree": n_eff,
        "eta": eta,
        "eps0": eps0,
        "beta": beta,
        "z": z,
        "y": y,
        "support_size": len(weights.support),
        "M_d": md_values,
        "direct": direct,
        "sieved": sieved,
        "inequality_holds": direct + 1e-9 * (1.0 + abs(direct)) >= sieved,
        "predicted_order": predicted,
        "ratio": direct / predicted,
    }
