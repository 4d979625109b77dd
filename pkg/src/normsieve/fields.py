"""Abelian number fields modeled as pairs (q, H).

An abelian field L of conductor q_L sits inside Q(zeta_q) and corresponds to
a subgroup H <= (Z/q)^x via Gal(Q(zeta_q)/Q) ~ (Z/q)^x: the Galois group of
L/Q is the quotient G = (Z/q)^x / H and the degree is n = phi(q)/|H|.  All
field-theoretic data used downstream is recovered from this finite model:

  characters      Ĝ  = characters of (Z/q)^x trivial on H
  psi_L(k)        (chi_1 * ... * chi_{n-1})(k), Dirichlet convolution of the
                  nontrivial characters (primitive values; see psi_pp_exact)
  r_L(k)          # integral ideals of norm k  =  (1 * psi_L)(k)
  splitting       (e, f, g) of a rational prime from the cyclotomic tower:
                  inertia = image of ker((Z/q)^x -> (Z/m)^x) where q = p^a m,
                  Frobenius = class of p in (Z/m)^x / image(H)

Everything is exact: character values are stored as exponents of roots of
unity and the integer quantities (psi_L, r_L) are evaluated in Z[zeta] with
an integrality assertion, never by rounding floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from ._cyclotomic import CycRing, root_of_unity
from .arith import Factorization, factor, fundamental_discriminant, kronecker
from .errors import HypothesisError

# h_L = 1 is an *assumption* of the counting theorems, not something this
# package verifies; specs carry a user-asserted `pid` flag, cross-checked
# against this table for the bundled examples (conductor-minimal keys).
_PID_TABLE = {
    (4, (1,)): True,  # Q(i)
    (8, (1,)): True,  # Q(zeta_8)
    (9, (1, 8)): True,  # real cubic subfield of Q(zeta_9)
    (5, (1, 4)): True,  # Q(sqrt 5)
    (8, (1, 7)): True,  # Q(sqrt 2)
}


# ---------------------------------------------------------------------------
# unit groups (Z/q)^x with canonical generators and discrete logs
# ---------------------------------------------------------------------------

def _primitive_root(p: int, a: int) -> int:
    """Smallest primitive root mod p^a (p odd prime)."""
    pa = p**a
    phi = (p - 1) * p ** (a - 1)
    fac = factor(phi).primes
    for g in range(2, pa):
        if g % p == 0:
            continue
        if all(pow(g, phi // r, pa) != 1 for r in fac):
            return g
    raise AssertionError(f"no primitive root mod {p}^{a}")


class UnitGroup:
    """(Z/q)^x presented on canonical generators with precomputed dlogs.

    Components ordered by ascending prime; for 2^a (a >= 3) the generators
    are (-1 mod 2^a, 5) in that order.  `dlog(u)` returns exponents per
    generator; `orders` are the generator orders.
    """

    def __init__(self, q: int):
        self.q = q
        gens: list[int] = []
        orders: list[int] = []
        locals_: list[tuple[int, int, dict[int, int]]] = []  # (p^a, kind, dlog data)
        for p, a in factor(q).pairs() if q > 1 else ():
            pa = p**a
            rest = q // pa
            if p == 2:
                if a == 1:
                    continue
                if a == 2:
                    g = self._crt_lift(3, pa, rest)
                    gens.append(g)
                    orders.append(2)
                    locals_.append((pa, 2, {}))
                    continue
                gens.append(self._crt_lift(pa - 1, pa, rest))
                orders.append(2)
                g5 = self._crt_lift(5, pa, rest)
                gens.append(g5)
                orders.append(2 ** (a - 2))
                table = {}
                x = 1
                for j in range(2 ** (a - 2)):
                    table[x] = j
                    x = x * 5 % pa
                locals_.append((pa, 3, table))
            else:
                g = _primitive_root(p, a)
                gens.append(self._crt_lift(g, pa, rest))
                phi = (p - 1) * p ** (a - 1)
                orders.append(phi)
                table = {}
                x = 1
                for j in range(phi):
                    table[x] = j
                    x = x * g % pa
                locals_.append((pa, 1, table))
        self.gens = tuple(gens)
        self.orders = tuple(orders)
        self._locals = locals_
        self.exponent = math.lcm(*orders) if orders else 1
        self.phi = math.prod(orders) if orders else 1

    def _crt_lift(self, g: int, pa: int, rest: int) -> int:
        """Lift g mod pa to a unit mod q that is 1 mod rest."""
        if rest == 1:
            return g % (pa * rest)
        inv = pow(pa, -1, rest)
        return (g + pa * ((1 - g) * inv % rest)) % (pa * rest)

    def dlog(self, u: int) -> tuple[int, ...]:
        u %= self.q
        if math.gcd(u, self.q) != 1:
            raise ValueError(f"{u} is not a unit mod {self.q}")
        out: list[int] = []
        for pa, kind, table in self._locals:
            v = u % pa
            if kind == 1:
                out.append(table[v])
            elif kind == 2:  # mod 4
                out.append(0 if v == 1 else 1)
            else:  # mod 2^a, a >= 3: u = (-1)^x 5^y
                x = 0 if v % 4 == 1 else 1
                w = v if x == 0 else (-v) % pa
                out.append(x)
                out.append(table[w])
        return tuple(out)


@lru_cache(maxsize=None)
def unit_group(q: int) -> UnitGroup:
    return UnitGroup(q)


# ---------------------------------------------------------------------------
# Dirichlet characters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Character:
    """Character of (Z/q)^x stored as exact root-of-unity exponents.

    `exps` are exponents on the canonical generators of (Z/q)^x (the value at
    generator i is zeta_{orders[i]}^{exps[i]}); `table[u]` is the exponent e
    with chi(u) = zeta_order^e for units u, -1 off units.  `prim` is the same
    table for the primitive character mod `conductor` inducing chi.
    """

    q: int
    exps: tuple[int, ...]
    order: int
    conductor: int
    table: tuple[int, ...] = field(repr=False)
    prim: tuple[int, ...] = field(repr=False)

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    def exp_at(self, k: int) -> int | None:
        """Exponent e with chi(k) = zeta_order^e, or None off units."""
        e = self.table[k % self.q]
        return None if e < 0 else e

    def prim_exp_at(self, k: int) -> int | None:
        """Exponent of the inducing primitive character at k."""
        e = self.prim[k % self.conductor]
        return None if e < 0 else e

    def __call__(self, k: int) -> complex:
        e = self.exp_at(k)
        return 0j if e is None else root_of_unity(e, self.order)

    def prim_value(self, k: int) -> complex:
        e = self.prim_exp_at(k)
        return 0j if e is None else root_of_unity(e, self.order)

    def __mul__(self, other: "Character") -> "Character":
        if self.q != other.q:
            raise ValueError("characters must share a modulus")
        ug = unit_group(self.q)
        exps = tuple((a + b) % m for a, b, m in zip(self.exps, other.exps, ug.orders))
        return _character_from_exps(self.q, exps)

    def conj(self) -> "Character":
        ug = unit_group(self.q)
        return _character_from_exps(self.q, tuple((-a) % m for a, m in zip(self.exps, ug.orders)))

    def pow(self, j: int) -> "Character":
        ug = unit_group(self.q)
        return _character_from_exps(self.q, tuple((a * j) % m for a, m in zip(self.exps, ug.orders)))


@lru_cache(maxsize=None)
def _dlog_table(q: int) -> tuple[tuple[int, ...] | None, ...]:
    ug = unit_group(q)
    out: list[tuple[int, ...] | None] = [None] * q
    for u in range(q):
        if math.gcd(u, q) == 1:
            out[u] = ug.dlog(u)
    if q == 1:
        out = [()]
    return tuple(out)


@lru_cache(maxsize=None)
def _character_from_exps(q: int, exps: tuple[int, ...]) -> Character:
    ug = unit_group(q)
    M0 = ug.exponent
    dlogs = _dlog_table(q)
    weights = tuple(a * (M0 // m) for a, m in zip(exps, ug.orders))
    order = math.lcm(*(m // math.gcd(m, a) for a, m in zip(exps, ug.orders))) if exps else 1
    scale = order  # exponent E mod M0 maps to E*order/M0 mod order
    table = [-1] * max(q, 1)
    for u in range(q):
        dl = dlogs[u]
        if dl is None:
            continue
        E = sum(w * x for w, x in zip(weights, dl)) % M0
        assert E * scale % M0 == 0
        table[u] = E * scale // M0 % order
    if q == 1:
        table = [0]
    # conductor: smallest q' | q with chi trivial on units congruent 1 mod q'
    cond = q
    for qp in sorted(d for d in range(1, q + 1) if q % d == 0):
        if all(table[u] == 0 for u in range(q) if table[u] >= 0 and u % qp == 1 % qp):
            cond = qp
            break
    prim = [-1] * cond
    for k in range(cond):
        if math.gcd(k, cond) != 1:
            continue
        for j in range(q // cond + 1):
            u = k + j * cond
            if u > 0 and math.gcd(u, q) == 1:
                prim[k] = table[u % q]
                break
        assert prim[k] >= 0, "no coprime lift found for primitive value"
    return Character(q, exps, order, cond, tuple(table), tuple(prim))


# ---------------------------------------------------------------------------
# field specs
# ---------------------------------------------------------------------------

def _normalized_key(q: int, H: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Smallest q' | q whose reduction kernel sits inside H, with H's image."""
    Hset = set(H)
    for qp in sorted(d for d in range(3, q) if q % d == 0):
        kernel = {u for u in range(1, q) if math.gcd(u, q) == 1 and u % qp == 1}
        if kernel <= Hset:
            return (qp, tuple(sorted({h % qp for h in H})))
    return (q, tuple(sorted(Hset)))


@dataclass(frozen=True)
class FieldSpec:
    """Abelian field L <= Q(zeta_q) given by the subgroup H of (Z/q)^x.

    `pid` asserts (it does not verify) that the ring of integers is a PID;
    the exact-norm counting mode requires it.  For the bundled example fields
    the flag is cross-checked against a small table.
    """

    q: int
    H: tuple[int, ...]
    pid: bool = False

    def __post_init__(self):
        q = self.q
        if q < 3:
            raise ValueError("conductor q >= 3 required (degree n >= 2)")
        H = tuple(sorted(h % q for h in self.H))
        if len(set(H)) != len(H):
            raise ValueError("H has repeated elements")
        if 1 not in H:
            raise ValueError("H must contain 1")
        for h in H:
            if math.gcd(h, q) != 1:
                raise ValueError(f"H element {h} is not a unit mod {q}")
        Hset = set(H)
        for h1 in H:
            for h2 in H:
                if h1 * h2 % q not in Hset:
                    raise ValueError("H is not closed under multiplication")
        object.__setattr__(self, "H", H)
        ug = unit_group(q)
        if ug.phi % len(H) or ug.phi // len(H) < 2:
            raise ValueError("degree phi(q)/|H| must be an integer >= 2")
        key = (self.normalized_key())
        if key in _PID_TABLE and self.pid != _PID_TABLE[key]:
            raise ValueError(
                f"pid={self.pid} contradicts the built-in table for {key}"
            )

    @property
    def degree(self) -> int:
        return unit_group(self.q).phi // len(self.H)

    def normalized_key(self) -> tuple[int, tuple[int, ...]]:
        return _normalized_key(self.q, self.H)

    def is_conductor_minimal(self) -> bool:
        return self.normalized_key() == (self.q, self.H)

    def normalize(self) -> "FieldSpec":
        """The conductor-minimal spec of the same field."""
        qp, Hp = self.normalized_key()
        if (qp, Hp) == (self.q, self.H):
            return self
        return FieldSpec(qp, Hp, self.pid)


def character_group(L: FieldSpec) -> list[Character]:
    """Characters of (Z/q)^x trivial on H, lexicographic in exponent vectors."""
    return list(_character_group_cached(L.q, L.H))


@lru_cache(maxsize=None)
def _character_group_cached(q: int, H: tuple[int, ...]) -> tuple[Character, ...]:
    ug = unit_group(q)
    M0 = ug.exponent
    dlogs = [ug.dlog(h) for h in H]
    chars = []
    # enumerate exponent vectors in lexicographic order
    def rec(prefix: tuple[int, ...]):
        i = len(prefix)
        if i == len(ug.orders):
            weights = [a * (M0 // m) for a, m in zip(prefix, ug.orders)]
            if all(sum(w * x for w, x in zip(weights, dl)) % M0 == 0 for dl in dlogs):
                chars.append(_character_from_exps(q, prefix))
            return
        for a in range(ug.orders[i]):
            rec(prefix + (a,))

    rec(())
    n = ug.phi // len(H)
    assert len(chars) == n, f"expected {n} characters, found {len(chars)}"
    return tuple(chars)


def conductor_discriminant(L: FieldSpec) -> int:
    """|disc L| as the product of the character conductors."""
    return math.prod(chi.conductor for chi in character_group(L))


# ---------------------------------------------------------------------------
# psi_L, Psi_L, r_L
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _psi_prim_data(L: FieldSpec) -> tuple[int, tuple[tuple[int, int], ...]]:
    """(M, ((conductor, weight) per nontrivial char)) with weight scaling to M."""
    chars = [c for c in character_group(L) if not c.is_trivial]
    M = math.lcm(*(c.order for c in chars))
    return M, tuple((c.conductor, M // c.order) for c in chars)


@lru_cache(maxsize=None)
def _cycring(M: int) -> CycRing:
    return CycRing(M)


@lru_cache(maxsize=None)
def psi_pp_exact(L: FieldSpec, p: int, v: int) -> int:
    """psi_L(p^v) as an exact rational integer.

    psi_L is the (n-1)-fold Dirichlet convolution of the nontrivial characters
    of Ĝ *at primitive values*, so that 1 * psi_L counts integral ideals at
    every k (ramified prime powers included).  The value is a Galois-stable
    sum of roots of unity, hence certifiably an integer.
    """
    if v == 0:
        return 1
    chars = [c for c in character_group(L) if not c.is_trivial]
    M, _ = _psi_prim_data(L)
    ring = _cycring(M)
    # exponent of zeta_M for chi_i(p), or None where the primitive value is 0
    es = []
    for c in chars:
        e = c.prim_exp_at(p)
        es.append(None if e is None else e * (M // c.order))
    live = [e for e in es if e is not None]
    total = ring.zero()
    # compositions of v over the live slots (dead slots force exponent 0 there)
    counts: dict[int, int] = {}

    def rec(i: int, rem: int, acc: int):
        if i == len(live) - 1:
            e = (acc + rem * live[i]) % M
            counts[e] = counts.get(e, 0) + 1
            return
        for j in range(rem + 1):
            rec(i + 1, rem - j, (acc + j * live[i]) % M)

    if not live:
        return 0
    rec(0, v, 0)
    for e, cnt in counts.items():
        total = ring.add(total, ring.scale(ring.zeta_pow(e), cnt))
    return ring.as_int(total)


def psi_L(L: FieldSpec, k: int | Factorization) -> int:
    """(chi_1 * ... * chi_{n-1})(k), exact (always a rational integer)."""
    f = k if isinstance(k, Factorization) else factor(k)
    if f.n < 1:
        raise ValueError("psi_L is defined for k >= 1")
    return math.prod(psi_pp_exact(L, p, v) for p, v in f.pairs())


def Psi_L(L: FieldSpec, kvec) -> complex:
    """prod_l chi_l(k_l) over the nontrivial characters (mod-q values)."""
    chars = [c for c in character_group(L) if not c.is_trivial]
    if len(kvec) != len(chars):
        raise ValueError(f"expected {len(chars)} components, got {len(kvec)}")
    M = math.lcm(*(c.order for c in chars))
    e_total = 0
    for c, k in zip(chars, kvec):
        e = c.exp_at(k)
        if e is None:
            return 0j
        e_total += e * (M // c.order)
    return root_of_unity(e_total, M)


def r_L(L: FieldSpec, k: int | Factorization) -> int:
    """Number of integral ideals of L with norm k: (1 * psi_L)(k)."""
    f = k if isinstance(k, Factorization) else factor(k)
    if f.n < 1:
        raise ValueError("r_L is defined for k >= 1")
    out = 1
    for p, v in f.pairs():
        loc = sum(psi_pp_exact(L, p, j) for j in range(v + 1))
        assert loc >= 0, f"negative local ideal count at {p}^{v}"
        out *= loc
    return out


def r_L_from_splitting(L: FieldSpec, k: int | Factorization) -> int:
    """r_L via splitting data: prod_p C(v/f + g - 1, g - 1) [f | v]."""
    f = k if isinstance(k, Factorization) else factor(k)
    out = 1
    for p, v in f.pairs():
        _, fp, gp = splitting_data(L, p)
        if v % fp:
            return 0
        out *= math.comb(v // fp + gp - 1, gp - 1)
    return out


# ---------------------------------------------------------------------------
# splitting, norm detection
# ---------------------------------------------------------------------------

def is_norm_prime(L: FieldSpec, p: int) -> bool:
    """Whether the unramified prime p splits completely (p is then a norm)."""
    if L.q % p == 0:
        raise ValueError(f"p={p} ramifies (p | q); use splitting_data")
    return p % L.q in set(L.H)


@lru_cache(maxsize=None)
def splitting_data(L: FieldSpec, p: int) -> tuple[int, int, int]:
    """(e, f, g) of p in L, from the cyclotomic model."""
    q, H = L.q, set(L.H)
    n = L.degree
    a = 0
    m = q
    while m % p == 0:
        m //= p
        a += 1
    if a == 0:
        e = 1
    else:
        kernel = {u for u in range(1, q) if math.gcd(u, q) == 1 and u % m == 1 % m}
        KH = {k * h % q for k in kernel for h in H}
        e = len(KH) // len(H)
    # Frobenius order in (Z/m)^x / image(H)
    if m <= 2:
        f = 1
    else:
        Hm = {h % m for h in H}
        # image(H) need not be closed... it is: reduction is a homomorphism
        x = p % m
        f = 1
        while x not in Hm:
            x = x * p % m
            f += 1
    g, rem = divmod(n, e * f)
    assert rem == 0, "efg does not divide n — invalid splitting computation"
    return e, f, g


def varpi(L: FieldSpec, k: int | Factorization) -> int:
    """Local-solubility indicator: 1 iff f_p | v_p(k) at every p | k.

    The valuations of local norms at a prime with residue degree f_p form
    f_p * Z (ramified or not), so this is the correct necessary condition at
    every prime and coincides with the local-degree test [L_p : Q_p] | v_p at
    all unramified p.
    """
    return 1 if is_ideal_norm(L, k) else 0


def is_ideal_norm(L: FieldSpec, k: int | Factorization) -> bool:
    """Whether k is the norm of an integral ideal: f_p | v_p(k) for all p."""
    f = k if isinstance(k, Factorization) else factor(k)
    if f.sign < 0:
        raise ValueError("ideal norms are positive; pass |k|")
    return all(v % splitting_data(L, p)[1] == 0 for p, v in f.pairs())


def allows_negative_norms(L: FieldSpec) -> bool:
    """Whether negative rational numbers can be norms from L.

    Odd degree: N(-x) = -N(x), so both signs occur.  Even degree: an
    abelian field is totally real or totally imaginary; the imaginary case
    (complex conjugation -1 mod q outside H) has N(x) = prod |sigma(x)|^2
    >= 0, while the totally real case imposes no condition at the infinite
    places.  (A totally real even-degree field may still pin the sign of a
    generator through the unit group; only the local condition is used
    here, which is exact for the bundled fields.)
    """
    if L.degree % 2:
        return True
    return (-1) % L.q in set(L.H)


def is_norm_value(L: FieldSpec, v: int) -> bool:
    """Norm test for a nonzero integer: sign policy plus the ideal test."""
    if v == 0:
        raise ValueError("v = 0 is trivially a norm; callers skip it")
    if v < 0 and not allows_negative_norms(L):
        return False
    return is_ideal_norm(L, abs(v))


# ---------------------------------------------------------------------------
# quadratic subfield bookkeeping (form factorization over L, the half-field L0)
# ---------------------------------------------------------------------------

def factor_count_over_L(L: FieldSpec, F) -> int:
    """Number (1 or 2) of irreducible factors of F over L.

    F splits over L iff K = Q(sqrt(disc F)) embeds in L, iff the Kronecker
    character of the fundamental discriminant lies in Ĝ.
    """
    disc = F.disc
    r = math.isqrt(abs(disc))
    if disc == 0 or (disc > 0 and r * r == disc):
        raise ValueError("form must be irreducible over Q (nonsquare disc)")
    D0 = fundamental_discriminant(disc)
    if L.q % abs(D0):
        return 1
    return 2 if all(kronecker(D0, h) == 1 for h in L.H) else 1


def _subgroups(elems: list[Character]) -> list[tuple[tuple[int, ...], ...]]:
    """All subgroups of the finite abelian group given by `elems` (as
    sorted tuples of exponent keys), grown by closure under extension."""
    by_key = {c.exps: c for c in elems}
    trivial = next(c for c in elems if c.is_trivial).exps

    def closure(keys: set[tuple[int, ...]]) -> tuple[tuple[int, ...], ...]:
        cur = set(keys) | {trivial}
        changed = True
        while changed:
            changed = False
            for x in list(cur):
                for y in list(cur):
                    z = (by_key[x] * by_key[y]).exps
                    if z not in cur:
                        cur.add(z)
                        changed = True
        return tuple(sorted(cur))

    found = {closure(set())}
    frontier = list(found)
    while frontier:
        s = frontier.pop()
        for c in elems:
            if c.exps not in s:
                bigger = closure(set(s) | {c.exps})
                if bigger not in found:
                    found.add(bigger)
                    frontier.append(bigger)
    return sorted(found)


def construct_L0(L: FieldSpec, F) -> FieldSpec:
    """The index-2 subfield L0 with r_L(p) = 2 r_{L0}(p) on split-in-K primes.

    Decomposes the 2-primary part P of Ĝ as <chi_*> x C where chi_* is a
    deepest 2-power root of the quadratic character chi_0 cutting out
    K = Q(sqrt(disc F)), and returns the fixed field of <chi_*^2> x C x (odd
    part).  Deterministic: chi_* and C are the lexicographically smallest
    valid choices.
    """
    n = L.degree
    if factor_count_over_L(L, F) != 2:
        raise ValueError("F must split into two factors over L")
    if n % 2 or n < 4:
        raise ValueError("construction requires even degree n >= 4")
    chars = character_group(L)
    by_key = {c.exps: c for c in chars}
    D0 = fundamental_discriminant(F.disc)
    chi0 = next(
        c
        for c in chars
        if c.order == 2
        and all(
            c.exp_at(u) == (0 if kronecker(D0, u) == 1 else 1)
            for u in range(1, L.q)
            if math.gcd(u, L.q) == 1
        )
    )
    P = [c for c in chars if c.order & (c.order - 1) == 0]  # 2-power orders
    odd = [c for c in chars if c.order % 2 == 1]
    # deepest 2-power root chi_* of chi0 inside P: chi_*^(2^(a-1)) = chi0
    a, chi_star = 1, chi0
    for c in sorted(P, key=lambda ch: ch.exps):
        x, j = c, 1
        while not x.is_trivial:
            if x.exps == chi0.exps:
                if j > a:
                    a, chi_star = j, c
                break
            x, j = x.pow(2), j + 1
    cyc_set = set()
    x = chi_star
    for _ in range(1 << a):
        cyc_set.add(x.exps)
        x = x * chi_star
    target = len(P) // (1 << a)
    trivial_key = next(c for c in chars if c.is_trivial).exps
    complements = [
        s
        for s in _subgroups(P)
        if len(s) == target and cyc_set.intersection(s) == {trivial_key}
    ]
    assert complements, "no complement found for the cyclic 2-part"
    C = complements[0]
    # G0 = <chi_*^2> x C x odd part
    sq = []
    x = chi_star.pow(2)
    cur = _character_from_exps(L.q, tuple(0 for _ in chi_star.exps))
    for _ in range(1 << (a - 1)):
        sq.append(cur.exps)
        cur = cur * x
    g0_keys = set()
    for s in sq:
        for ckey in C:
            for o in odd:
                g0_keys.add((by_key[s] * by_key[ckey] * o).exps)
    assert len(g0_keys) == n // 2, "G0 has wrong size"
    H0 = tuple(
        sorted(
            u
            for u in range(1, L.q)
            if math.gcd(u, L.q) == 1
            and all(by_key[k].exp_at(u) == 0 for k in g0_keys)
        )
    )
    qp, Hp = _normalized_key(L.q, H0)
    return FieldSpec(qp, Hp, _PID_TABLE.get((qp, Hp), False))
