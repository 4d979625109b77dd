"""Hot row kernels for the box sweeps, with two interchangeable backends.

The sweep in `engine` walks the box row by row (fixed t, s varying) and has
to strip every sieve prime out of |F(s,t)| while recording, per position,

  * the exact cofactor after all sieve primes are removed,
  * whether some prime violated its residue-degree condition (f_p | v_p),
  * whether some prime factor does not split completely,
  * whether some prime appeared squared,
  * the number of distinct prime factors found.

Both backends implement the same contract (`row_kernel_*` below); the numba
one is a straight scalar loop that the JIT turns into tight machine code,
the numpy one expresses the identical arithmetic with vectorised slices so
the package keeps working when numba is absent.  Selection: the environment
variable NORMSIEVE_BACKEND may be set to "numba" or "numpy"; unset means
"numba when importable, else numpy".
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised on numba-less installs
    _HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

def _pick_backend() -> str:
    env = os.environ.get("NORMSIEVE_BACKEND", "").strip().lower()
    if env == "numpy":
        return "numpy"
    if env == "numba":
        if not _HAVE_NUMBA:
            raise ImportError(
                "NORMSIEVE_BACKEND=numba requested but numba is not importable"
            )
        return "numba"
    if env:
        raise ValueError(f"unknown NORMSIEVE_BACKEND value {env!r}")
    return "numba" if _HAVE_NUMBA else "numpy"


BACKEND = _pick_backend()


# ---------------------------------------------------------------------------
# pure-numpy kernel
# ---------------------------------------------------------------------------

def row_kernel_numpy(rem, t, s0, primes, fdeg, issplit, rootptr, roots,
                     viol, nonsplit, sq, omega):
    """Strip all sieve primes from one row, updating the flag arrays.

    rem[i] = |F(s0 + i, t)| on entry (zeros must have been masked to 1 by
    the caller); on exit rem[i] is the cofactor, which is 1 or a single
    prime larger than every sieve prime.

    For p not dividing t the positions with p | F(s,t) are exactly the
    progressions s = xi*t (mod p) over the roots xi of F(x,1) mod p; for
    p | t no progression shortcut exists (p can enter through a*s^2), so
    the row is scanned directly.
    """
    length = rem.shape[0]
    nprimes = primes.shape[0]
    for b in range(nprimes):
        p = int(primes[b])
        if t % p == 0:
            idx = np.nonzero(rem % p == 0)[0]
            if idx.size == 0:
                continue
        else:
            lo, hi = int(rootptr[b]), int(rootptr[b + 1])
            if lo == hi:
                continue
            pieces = [
                np.arange((int(roots[ri]) * t - s0) % p, length, p,
                          dtype=np.int64)
                for ri in range(lo, hi)
            ]
            idx = pieces[0] if len(pieces) == 1 else np.concatenate(pieces)
            if idx.size == 0:
                continue
        x = rem[idx]
        v = np.zeros(idx.size, dtype=np.int64)
        m = np.ones(idx.size, dtype=bool)  # every selected entry divisible
        while m.any():
            x[m] //= p
            v[m] += 1
            m[m] = x[m] % p == 0
        rem[idx] = x
        omega[idx] += 1
        sq[idx] |= v >= 2
        if not issplit[b]:
            nonsplit[idx] = True
        fp = int(fdeg[b])
        if fp > 1:
            viol[idx] |= (v % fp) != 0


# ---------------------------------------------------------------------------
# numba kernel (same arithmetic, scalar loops)
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _row_kernel_jit(rem, t, s0, primes, fdeg, issplit, rootptr, roots,
                        viol, nonsplit, sq, omega):
        length = rem.shape[0]
        nprimes = primes.shape[0]
        for b in range(nprimes):
            p = primes[b]
            fp = fdeg[b]
            sp = issplit[b]
            if t % p == 0:
                for i in range(length):
                    x = rem[i]
                    if x % p == 0:
                        v = 0
                        while x % p == 0:
                            x //= p
                            v += 1
                        rem[i] = x
                        omega[i] += 1
                        if v >= 2:
                            sq[i] = True
                        if not sp:
                            nonsplit[i] = True
                        if fp > 1 and v % fp != 0:
                            viol[i] = True
            else:
                for ri in range(rootptr[b], rootptr[b + 1]):
                    start = (roots[ri] * t - s0) % p
                    for i in range(start, length, p):
                        x = rem[i]
                        v = 0
                        while x % p == 0:
                            x //= p
                            v += 1
                        rem[i] = x
                        omega[i] += 1
                        if v >= 2:
                            sq[i] = True
                        if not sp:
                            nonsplit[i] = True
                        if fp > 1 and v % fp != 0:
                            viol[i] = True

    def row_kernel_numba(rem, t, s0, primes, fdeg, issplit, rootptr, roots,
                         viol, nonsplit, sq, omega):
        _row_kernel_jit(rem, t, s0, primes, fdeg, issplit, rootptr, roots,
                        viol, nonsplit, sq, omega)

else:  # pragma: no cover

    def row_kernel_numba(*args):
        raise RuntimeError("numba backend requested but numba is unavailable")


process_row = row_kernel_numba if BACKEND == "numba" else row_kernel_numpy
