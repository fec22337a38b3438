"""Elementary arithmetic: Kronecker symbols, fundamental discriminants,
prime sieves, and the handful of mathematical constants everything else
leans on.

Conventions used throughout the package:

* ``d`` always denotes the positive integer with discriminant ``-d``, so
  "fundamental" below means that ``-d`` is a fundamental discriminant of an
  imaginary quadratic field.
* all logarithms are natural.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import CapacityError

__all__ = [
    "kronecker",
    "is_fundamental",
    "fundamental_mask",
    "squarefree_mask",
    "primes_up_to",
    "smallest_prime_factor",
    "unit_count",
    "Constants",
    "CONSTANTS",
    "memory_budget_bytes",
    "check_capacity",
]


def memory_budget_bytes() -> int:
    """Active memory budget in bytes.

    Controlled by the ``CLASSCENSUS_MEM_MB`` environment variable
    (default 4096 MB).  Large allocations are estimated against this budget
    up front so an oversized request fails fast instead of thrashing.
    """
    mb = int(os.environ.get("CLASSCENSUS_MEM_MB", "4096"))
    return mb * (1 << 20)


def check_capacity(estimated_bytes: int, what: str) -> None:
    """Raise :class:`CapacityError` if ``estimated_bytes`` exceeds the budget."""
    budget = memory_budget_bytes()
    if estimated_bytes > budget:
        raise CapacityError(
            f"{what} needs ~{estimated_bytes / (1 << 20):.0f} MB "
            f"but the budget is {budget / (1 << 20):.0f} MB "
            f"(set CLASSCENSUS_MEM_MB to raise it)"
        )


def kronecker(top: int, bottom: int) -> int:
    """Kronecker symbol (top | bottom) for ``bottom >= 0``.

    Extends the Jacobi symbol to even and zero lower arguments in the usual
    way: (a|0) is 1 for a = +-1 and 0 otherwise, (a|2) is 0 for even a and
    +1/-1 for a = +-1 / +-3 mod 8.  Fully multiplicative in the bottom
    argument and, for fixed fundamental top, periodic with period |top|.
    """
    if bottom < 0:
        raise ValueError("bottom argument must be nonnegative")
    if bottom == 0:
        return 1 if top in (1, -1) else 0
    if top % 2 == 0 and bottom % 2 == 0:
        return 0
    sign = 1
    # peel the even part of the bottom; each factor 2 contributes (top|2)
    while bottom % 2 == 0:
        bottom //= 2
        if top % 8 in (3, 5):
            sign = -sign
    # bottom is now odd and positive: Jacobi with quadratic reciprocity.
    a = top % bottom
    while a:
        while a % 2 == 0:
            a //= 2
            if bottom % 8 in (3, 5):
                sign = -sign
        a, bottom = bottom, a
        if a % 4 == 3 and bottom % 4 == 3:
            sign = -sign
        a %= bottom
    return sign if bottom == 1 else 0


def is_fundamental(d: int) -> bool:
    """True iff ``-d`` is the discriminant of an imaginary quadratic field.

    Accepts any integer; only d >= 3 can qualify.  -d is fundamental when
    either d = 3 mod 4 and d is squarefree, or d = 4m with m squarefree and
    m = 1 or 2 mod 4.
    """
    if d < 3:
        return False
    if d % 4 == 3:
        return _is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        if m % 4 in (1, 2):
            return _is_squarefree(m)
    return False


def _is_squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    p = 3
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 2
    return True


def squarefree_mask(limit: int) -> np.ndarray:
    """Boolean array of length ``limit + 1``; entry n is True iff n is
    squarefree.  Entries 0 and 1 are False and True respectively.

    Single pass crossing off multiples of p^2 for p <= sqrt(limit).
    """
    if limit < 0:
        raise ValueError("limit must be nonnegative")
    check_capacity(limit + 1, f"squarefree sieve to {limit}")
    mask = np.ones(limit + 1, dtype=bool)
    mask[0] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:  # p squarefree so far => p is prime
            mask[p * p :: p * p] = False
    return mask


def fundamental_mask(limit: int) -> np.ndarray:
    """Boolean array of length ``limit + 1``; entry d is True iff ``-d`` is
    a fundamental imaginary quadratic discriminant.

    Built from one squarefree sieve; density tends to 3/pi^2.
    """
    if limit < 0:
        raise ValueError("limit must be nonnegative")
    sf = squarefree_mask(limit)
    mask = np.zeros(limit + 1, dtype=bool)
    idx = np.arange(limit + 1)
    # d = 3 mod 4, squarefree
    sel = (idx % 4 == 3) & sf
    mask |= sel
    # d = 4m, m squarefree, m = 1 or 2 mod 4
    m_idx = np.arange(limit // 4 + 1)
    m_ok = np.zeros(limit // 4 + 1, dtype=bool)
    m_ok[1:] = sf[: limit // 4 + 1][1:] & ((m_idx[1:] % 4 == 1) | (m_idx[1:] % 4 == 2))
    mask[m_idx[m_ok] * 4] = True
    return mask


def primes_up_to(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (Eratosthenes)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    check_capacity(limit + 1, f"prime sieve to {limit}")
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def smallest_prime_factor(limit: int) -> np.ndarray:
    """Array spf of length ``limit + 1`` with spf[n] = least prime factor of n
    (spf[0] = spf[1] = 0).  uint32, so limit must stay below 2^32."""
    if limit >= 1 << 32:
        raise ValueError("limit too large for uint32 factor table")
    check_capacity(4 * (limit + 1), f"spf table to {limit}")
    spf = np.zeros(limit + 1, dtype=np.uint32)
    if limit >= 2:
        spf[2::2] = 2
        for p in range(3, math.isqrt(limit) + 1, 2):
            if spf[p] == 0:
                sl = spf[p * p :: 2 * p]
                sl[sl == 0] = p
                spf[p * p :: 2 * p] = sl
        rest = np.nonzero(spf == 0)[0]
        spf[rest] = rest
        spf[:2] = 0
    return spf


def unit_count(d: int) -> int:
    """Number of units w in the ring of integers of Q(sqrt(-d)): 6 for d = 3,
    4 for d = 4, 2 otherwise.  Rejects non-fundamental d."""
    if not is_fundamental(d):
        raise ValueError(f"-{d} is not a fundamental discriminant")
    if d == 3:
        return 6
    if d == 4:
        return 4
    return 2


class Constants:
    """Mathematical constants used across the package, each computed from a
    rapidly convergent series rather than copied in as a literal.

    All values carry at least 1e-14 relative accuracy (the series below
    converge geometrically with ratio 1/4, so ~30 terms reach double
    precision exactly).
    """

    def __init__(self) -> None:
        self.zeta2 = self._zeta2()
        self.zeta3 = self._zeta3()
        self.euler_gamma = float(np.euler_gamma)
        self.pi = math.pi
        # leading constant of the averaged census: 3 zeta(2) / zeta(3)
        self.census_leading = 3.0 * self.zeta2 / self.zeta3
        # leading constant of the odd-census average
        self.odd_leading = 15.0 / 4.0

    @staticmethod
    def _zeta2() -> float:
        # zeta(2) = 3 * sum 1 / (n^2 binom(2n, n))
        total = 0.0
        binom = 2.0  # binom(2n, n) at n = 1
        n = 1
        while True:
            term = 1.0 / (n * n * binom)
            total += term
            if term < 1e-18 * total:
                break
            n += 1
            binom *= (2 * n - 1) * (2 * n) / (n * n)
        return 3.0 * total

    @staticmethod
    def _zeta3() -> float:
        # zeta(3) = (5/2) * sum (-1)^(n-1) / (n^3 binom(2n, n))
        total = 0.0
        binom = 2.0
        n = 1
        sign = 1.0
        while True:
            term = sign / (n * n * n * binom)
            total += term
            if abs(term) < 1e-18 * abs(total):
                break
            n += 1
            sign = -sign
            binom *= (2 * n - 1) * (2 * n) / (n * n)
        return 2.5 * total


CONSTANTS = Constants()
