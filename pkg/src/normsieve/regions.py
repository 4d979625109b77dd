"""Volumes of the superlevel sets R(B,z) = {(s,t) in [-B,B]^2 : |F(s,t)| >= z}.

For fixed s the section {t : |F(s,t)| < z} is cut out by two quadratics in t
(F = z and F = -z), so its measure has a closed form via the quadratic
formula.  vol R(B,z) = 4B^2 - integral of that section measure; the integrand
is piecewise analytic in s with breakpoints where a section root enters the
box or two roots collide (square-root branch points).  Between breakpoints we
integrate with composite Gauss-Legendre on a mesh graded geometrically toward
the endpoints, which restores full accuracy despite the sqrt singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forms import FormSpec, b_F

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GRADE_LEVELS = 28  # smallest subinterval ~ 2^-28 of a piece


def _section_below(F: FormSpec, s: np.ndarray, v: float, B: float) -> np.ndarray:
    """measure{t in [-B,B] : F(s,t) < v} for an array of s values."""
    a, b, c = F.a, F.b, F.c
    D = (b * s) ** 2 - 4.0 * c * (a * s * s - v)
    has = D > 0
    sq = np.sqrt(np.where(has, D, 0.0))
    r1 = (-b * s - sq) / (2.0 * c)
    r2 = (-b * s + sq) / (2.0 * c)
    lo = np.minimum(r1, r2)
    hi = np.maximum(r1, r2)
    lo_c = np.clip(lo, -B, B)
    hi_c = np.clip(hi, -B, B)
    between = np.where(has, hi_c - lo_c, 0.0)
    if c > 0:
        # parabola opens up: {F < v} is the open interval between the roots
        return between
    # opens down: {F < v} is the complement of [lo, hi]
    return np.where(has, 2.0 * B - between, 2.0 * B)


def _section_inside(F: FormSpec, s: np.ndarray, z: float, B: float) -> np.ndarray:
    """measure{t in [-B,B] : |F(s,t)| < z}."""
    return _section_below(F, s, z, B) - _section_below(F, s, -z, B)


def _breakpoints(F: FormSpec, B: float, z: float) -> list[float]:
    """s-values where the section structure changes, inside (-B, B)."""
    a, b, c = F.a, F.b, F.c
    disc = F.disc
    pts = {-B, B, 0.0}
    for v in (z, -z):
        # root collision: discriminant in t vanishes: s^2 * disc + 4 c v = 0
        if disc != 0:
            s2 = -4.0 * c * v / disc
            if s2 > 0:
                pts.update((math.sqrt(s2), -math.sqrt(s2)))
        # a section root crosses t = +-B: a s^2 +- b B s + (c B^2 - v) = 0
        for sgn in (1, -1):
            aa, bb, cc = a, sgn * b * B, c * B * B - v
            if aa == 0:
                if bb != 0:
                    pts.add(-cc / bb)
                continue
            d = bb * bb - 4.0 * aa * cc
            if d >= 0:
                r = math.sqrt(d)
                pts.update(((-bb - r) / (2 * aa), (-bb + r) / (2 * aa)))
    return sorted(p for p in pts if -B <= p <= B)


def _graded_mesh(alpha: float, beta: float) -> np.ndarray:
    """Subdivision of [alpha, beta] geometrically refined toward both ends."""
    fracs = [0.0]
    for j in range(_GRADE_LEVELS, 0, -1):
        fracs.append(0.5 ** j)
    fracs += [1.0 - f for f in reversed(fracs[:-1])]
    return alpha + (beta - alpha) * np.array(sorted(set(fracs)))


def vol_region(F: FormSpec, B: float, z: float) -> float:
    """Lebesgue measure of {(s,t) in [-B,B]^2 : |F(s,t)| >= z}."""
    if B < 1:
        raise ValueError("B >= 1 required")
    if z < 0:
        raise ValueError("z >= 0 required")
    if z == 0:
        return 4.0 * B * B
    if z >= float(b_F(F)) * B * B:
        # |F| <= b_F B^2 on the whole box, with equality only on a null set
        return 0.0
    total_inside = 0.0
    pts = _breakpoints(F, B, z)
    for alpha, beta in zip(pts[:-1], pts[1:]):
        if beta - alpha < 1e-14 * B:
            continue
        mesh = _graded_mesh(alpha, beta)
        lo = mesh[:-1]
        hi = mesh[1:]
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        s_nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        total_inside += float(np.dot(w, _section_inside(F, s_nodes, z, B)))
    return min(max(4.0 * B * B - total_inside, 0.0), 4.0 * B * B)


def delta_vol(F: FormSpec, B: float, z1: float, z2: float) -> float:
    """vol R(B,z1) - vol R(B,z2), the mass of {z1 <= |F| < z2} in the box."""
    if not 0 < z1 < z2:
        raise ValueError("0 < z1 < z2 required")
    d = vol_region(F, B, z1) - vol_region(F, B, z2)
    return max(d, 0.0)


@dataclass(frozen=True)
class Region:
    """The superlevel set R(B,z) of a form, with its measure on demand."""

    form: FormSpec
    B: float
    z: float

    def __post_init__(self):
        if self.B < 2:
            raise ValueError("B >= 2 required")
        if self.z < 0:
            raise ValueError("z >= 0 required")

    def volume(self) -> float:
        v = vol_region(self.form, self.B, self.z)
        assert 0.0 <= v <= 4.0 * self.B * self.B + 1e-9
        return v


def vol_region_direct(F: FormSpec, B: float, z: float, samples: int = 10**6,
                      seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo volume with its standard error (testing oracle)."""
    rng = np.random.default_rng(seed)
    s = rng.uniform(-B, B, samples)
    t = rng.uniform(-B, B, samples)
    vals = np.abs(F.a * s * s + F.b * s * t + F.c * t * t) >= z
    p = vals.mean()
    se = math.sqrt(max(p * (1 - p), 1e-12) / samples) * 4 * B * B
    return 4.0 * B * B * p, se
