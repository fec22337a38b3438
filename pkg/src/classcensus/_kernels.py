"""Compiled inner loops.

Everything here is integer arithmetic on preallocated arrays, jitted with
numba so the Theta(X^{3/2}) sieve and the character-sum sweeps run at
native speed.  No Python objects cross into these functions.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

__all__ = [
    "isqrt_i64",
    "kron_i64",
    "bucket_fill",
    "forms_count",
    "charsum_raw",
    "sample_log_l",
    "warm_up",
]


@njit(cache=True)
def isqrt_i64(n: int) -> int:
    # floor square root; math.isqrt is not available inside nopython code
    if n < 0:
        return -1
    x = int(math.sqrt(float(n)))
    while x > 0 and x * x > n:
        x -= 1
    while (x + 1) * (x + 1) <= n:
        x += 1
    return x


@njit(cache=True)
def kron_i64(top: int, bottom: int) -> int:
    """Kronecker symbol (top | bottom), bottom >= 0.  Mirrors arith.kronecker;
    kept separate because it is called inside other jitted loops."""
    if bottom == 0:
        if top == 1 or top == -1:
            return 1
        return 0
    if top % 2 == 0 and bottom % 2 == 0:
        return 0
    sign = 1
    while bottom % 2 == 0:
        bottom //= 2
        r = top % 8
        if r == 3 or r == 5:
            sign = -sign
    a = top % bottom
    while a != 0:
        while a % 2 == 0:
            a //= 2
            r = bottom % 8
            if r == 3 or r == 5:
                sign = -sign
        t = a
        a = bottom
        bottom = t
        if a % 4 == 3 and bottom % 4 == 3:
            sign = -sign
        a %= bottom
    if bottom == 1:
        return sign
    return 0


@njit(cache=True, nogil=True)
def bucket_fill(X: int, a_lo: int, a_hi: int, counts: np.ndarray) -> None:
    """Count reduced forms (a, b, c) with 4ac - b^2 <= X for a in [a_lo, a_hi),
    adding into counts[4ac - b^2].

    Reduction conditions: -a < b <= a <= c, and b >= 0 when a = c.  The
    discriminant 4ac - b^2 >= 3a^2 > 0 always, so no bounds check is needed
    beyond cmax.  nogil so lanes can run concurrently on private buckets.
    """
    for a in range(a_lo, a_hi):
        a4 = 4 * a
        for b in range(-a + 1, a + 1):
            bb = b * b
            cmax = (X + bb) // a4
            if cmax < a:
                continue
            c0 = a
            if b < 0:
                c0 = a + 1  # a == c requires b >= 0
            for c in range(c0, cmax + 1):
                counts[a4 * c - bb] += 1


@njit(cache=True)
def forms_count(d: int) -> int:
    """Number of reduced positive definite forms of discriminant -d."""
    h = 0
    amax = isqrt_i64(d // 3)
    for a in range(1, amax + 1):
        a4 = 4 * a
        for b in range(-a + 1, a + 1):
            t = b * b + d
            if t % a4 == 0:
                c = t // a4
                if c >= a and not (a == c and b < 0):
                    h += 1
    return h


@njit(cache=True, nogil=True)
def charsum_raw(d: int, spf: np.ndarray) -> int:
    """Raw character sum S = sum of chi_{-d}(a) over 0 < a < d/2.

    chi is completely multiplicative, so values are sieved from the least
    prime factor table: chi(a) = chi(spf) * chi(a / spf), with fresh
    Kronecker evaluations only at primes.  Requires len(spf) > (d-1)//2.
    """
    m = (d - 1) // 2
    chi = np.empty(m + 1, dtype=np.int8)
    chi[0] = 0
    s = 0
    if m >= 1:
        chi[1] = 1
        s = 1
    for a in range(2, m + 1):
        p = int(spf[a])
        if p == a:
            c = kron_i64(-d, a)
        else:
            c = chi[p] * chi[a // p]
        chi[a] = c
        s += c
    return s


@njit(cache=True, nogil=True, inline="always")
def _mix64(x: np.uint64) -> np.uint64:
    # splitmix64 finalizer; all arithmetic stays in uint64 (wrapping)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@njit(cache=True, nogil=True)
def sample_log_l(
    seed: int,
    i0: int,
    nb: int,
    is_x: bool,
    log_minus: np.ndarray,
    log_plus: np.ndarray,
    thr_plus: np.ndarray,
    thr_nonzero: np.ndarray,
    out: np.ndarray,
) -> None:
    """log L for sample indices [i0, i0+nb), written into out[:nb].

    Draw (i, j) is a pure function of (seed, i, j): counter-mode splitmix64
    with two odd increments, so any block partition of the index range
    reproduces identical values.  The uniform is the top 53 bits of the
    mixed word, compared against thresholds prescaled by 2^53 (an exact
    power-of-two rescaling of the unit-interval comparison); under the X
    law it selects +1 below thr_plus[j], -1 below thr_nonzero[j], else 0,
    and under the Y law it is a fair sign.

    The loop runs prime-major with branch-free selection (the select masks
    are converted to 0.0/1.0 multipliers, exact in IEEE arithmetic), which
    vectorizes and avoids the mispredicted branch per uniform.  Per draw
    the accumulation order over primes is ascending, matching the
    reference implementation term for term.
    """
    G1 = np.uint64(0x9E3779B97F4A7C15)
    G2 = np.uint64(0xC2B2AE3D27D4EB4F)
    n_primes = len(log_minus)
    base = np.empty(nb, dtype=np.uint64)
    for i in range(nb):
        base[i] = _mix64(np.uint64(seed) + np.uint64(i0 + i) * G1)
        out[i] = 0.0
    if is_x:
        for j in range(n_primes):
            off = np.uint64(j + 1) * G2
            lm = log_minus[j]
            lp = log_plus[j]
            t1 = thr_plus[j]
            t2 = thr_nonzero[j]
            for i in range(nb):
                v = _mix64(base[i] + off)
                u = np.float64(v >> np.uint64(11))
                f1 = np.float64(u < t1)
                f2 = np.float64(u < t2)
                out[i] -= f1 * lm + (f2 - f1) * lp
    else:
        for j in range(n_primes):
            off = np.uint64(j + 1) * G2
            lm = log_minus[j]
            lp = log_plus[j]
            t1 = thr_plus[j]
            for i in range(nb):
                v = _mix64(base[i] + off)
                u = np.float64(v >> np.uint64(11))
                f1 = np.float64(u < t1)
                out[i] -= f1 * lm + (1.0 - f1) * lp


def warm_up() -> None:
    """Force compilation of every kernel on tiny inputs (cache-backed, so
    this is fast after the first process ever)."""
    buf = np.zeros(24, dtype=np.uint32)
    bucket_fill(23, 1, 3, buf)
    forms_count(23)
    spf = np.array([0, 0, 2, 3, 2, 5, 2, 7, 2, 3, 2, 11], dtype=np.uint32)
    charsum_raw(23, spf)
    kron_i64(-23, 5)
    isqrt_i64(10)
    tab = np.array([0.5, 0.6], dtype=np.float64)
    thr = tab * 2.0**53
    scratch = np.empty(2, dtype=np.float64)
    sample_log_l(1, 0, 2, True, -tab, tab, thr, thr, scratch)
    sample_log_l(1, 0, 2, False, -tab, tab, thr, thr, scratch)
