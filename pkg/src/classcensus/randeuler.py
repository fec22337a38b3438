"""Random Euler products modeling the distribution of L(1, chi_{-d}).

Two local laws at each prime p, both mean zero:

* X_model: value +1 or -1 each with probability p/(2(p+1)), 0 with
  probability 1/(p+1) — the law of a quadratic character at p under a
  random fundamental discriminant.
* Y_model: +1 or -1 with probability 1/2 — the law under a random prime
  discriminant.

The product L = prod_p (1 - x_p/p)^{-1} over p <= prime_cutoff is studied
two ways: exact complex moments through local-factor products with an
analytic tail for the primes beyond the cutoff, and Monte Carlo sampling
with a counter-based generator so results are reproducible and
lane-count-independent.

Sign convention used everywhere here: ``moment(s, model)`` is
E(L^s) = prod_p E[(1 - x_p/p)^{-s}].  Callers that need E(L^{-s}) (the
expectation attached to negative moments of class numbers) must evaluate
the moment at exponent -s.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .arith import CONSTANTS, primes_up_to

__all__ = [
    "RandomEulerModel",
    "MomentResult",
    "local_factor",
    "moment",
    "sample_L",
    "sample_L_batch",
    "expect_min",
    "tail_probability",
]

S_MAX = 64.0  # |s| ceiling for moment computations
P_MIN = 100  # smallest allowed prime cutoff
_EPS = float(np.finfo(np.float64).eps)


@dataclass
class RandomEulerModel:
    """Configuration of one random Euler product.

    forced_value, when set, replaces every local draw by that constant
    (only 0 and +-1 make sense); a test hook for degenerate checks.
    """

    kind: str  # "X_model" | "Y_model"
    prime_cutoff: int = 1_000_000
    tail_order: int = 2
    forced_value: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("X_model", "Y_model"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.prime_cutoff < P_MIN:
            raise ValueError(f"prime_cutoff must be at least {P_MIN}")
        if self.tail_order not in (0, 1, 2):
            raise ValueError("tail_order must be 0, 1 or 2")
        if self.forced_value not in (None, -1, 0, 1):
            raise ValueError("forced_value must be None, -1, 0 or 1")


@dataclass
class MomentResult:
    s: complex
    value: complex
    truncation_error_bound: float


def local_factor(p: int, s: complex, model: RandomEulerModel) -> complex:
    """E[(1 - x(p)/p)^{-s}] for one prime under the model's local law."""
    s = complex(s)
    if abs(s) > S_MAX:
        raise ValueError(f"|s| exceeds the configured maximum {S_MAX}")
    if s == 0:
        return 1.0 + 0.0j
    u = 1.0 / p
    # principal branch powers of the positive reals 1 -+ 1/p
    e_minus = np.exp(-s * math.log1p(-u))
    e_plus = np.exp(-s * math.log1p(u))
    if model.kind == "X_model":
        q = p / (2.0 * (p + 1.0))
        return complex(1.0 / (p + 1.0) + q * (e_minus + e_plus))
    return complex(0.5 * (e_minus + e_plus))


@lru_cache(maxsize=32)
def _prime_zeta_tails(P: int) -> tuple[float, ...]:
    """Q[k] = sum_{p > P} p^{-k} for k = 2..26, high-accuracy.

    primezeta comes from mpmath; the finite part is an exactly rounded
    float sum.  Entries are clipped at 0 against rounding.
    """
    import mpmath as mp

    primes = primes_up_to(P).astype(np.float64)
    out = []
    with mp.workdps(30):
        for k in range(2, 27):
            fin = math.fsum(primes**-float(k))
            out.append(max(float(mp.primezeta(k)) - fin, 0.0))
    return tuple(out)


def _tail_sums(P: int) -> dict[str, float]:
    """Tail constants over p > P, from alternating prime-zeta expansions:
    1/(p(p+1)) = sum_j (-1)^j p^{-(2+j)}, 1/(p^3(p+1)) = sum_j (-1)^j
    p^{-(4+j)}, 1/(p^2(p+1)^2) = sum_j (-1)^j (j+1) p^{-(4+j)}."""
    Q = _prime_zeta_tails(P)  # Q[i] = sum p^{-(2+i)}

    def q(k: int) -> float:
        return Q[k - 2] if k - 2 < len(Q) else 0.0

    a2 = math.fsum((-1) ** j * q(2 + j) for j in range(25))
    a4 = math.fsum((-1) ** j * q(4 + j) for j in range(23))
    a2sq = math.fsum((-1) ** j * (j + 1) * q(4 + j) for j in range(23))
    return {"a2": a2, "a4": a4, "a2sq": a2sq, "s2": q(2), "s4": q(4)}


def _binom_majorant_terms(M: float, u0: float):
    """Terms b_j * u0^{2j} of W(u0) = sum_j C(M+2j-1, 2j) u0^{2j}, j >= 1.

    W(u) bounds |f_local(u) - 1| for either model at |s| = M; the series
    converges for any u0 < 1.
    """
    b = M * (M + 1.0) / 2.0
    uu = u0 * u0
    term = b * uu
    j = 1
    while True:
        yield term
        b *= (M + 2 * j) * (M + 2 * j + 1) / ((2 * j + 1) * (2 * j + 2))
        j += 1
        term = b * uu**j
        if j > 400:
            yield math.inf
            return
        if term < 1e-320:
            return


def _truncation_bound(s: complex, P: int, tail_order: int, n_primes: int) -> float:
    """Rigorous relative-error bound for the neglected primes > P at the
    given tail expansion order, plus a float-accumulation allowance."""
    M = abs(s)
    u0 = 1.0 / P
    if M == 0.0:
        return 0.0
    terms = list(_binom_majorant_terms(M, u0))
    W = math.fsum(terms)
    if not math.isfinite(W) or W > 0.5:
        return math.inf
    W4 = W - terms[0]
    W6 = W4 - (terms[1] if len(terms) > 1 else 0.0)
    A = W * P * P  # |w(p)| <= A / p^2 for p > P
    A4 = W4 * P**4
    A6 = W6 * P**6
    B2m = M * (M + 1.0) / 2.0
    if tail_order == 0:
        E = 2.0 * A / P
    elif tail_order == 1:
        E = (A * A + A4) / (3.0 * P**3)
    else:
        C6 = 3.0 * A**3 + A6 + 0.5 * (A + B2m) * A4
        E = C6 / (5.0 * P**5)
    return float(math.expm1(E + 8.0 * _EPS * (n_primes + 16)))


def moment(s: complex, model: RandomEulerModel) -> MomentResult:
    """E(L^s) = prod_{p <= P} local_factor(p, s) * exp(tail).

    The tail covers primes beyond P through the expansion of
    log local_factor in powers of 1/p at the model's tail_order; the
    reported truncation_error_bound is a rigorous relative bound for
    what the expansion drops (infinite when |s|/P leaves the regime where
    the bound's majorant converges below 1/2).
    """
    s = complex(s)
    if abs(s) > S_MAX:
        raise ValueError(f"|s| exceeds the configured maximum {S_MAX}")
    if s == 0:
        # every local factor is the expectation of 1
        return MomentResult(s=s, value=1.0 + 0.0j, truncation_error_bound=0.0)
    P = model.prime_cutoff
    primes = primes_up_to(P).astype(np.float64)
    u = 1.0 / primes
    e_minus = np.exp(-s * np.log1p(-u))
    e_plus = np.exp(-s * np.log1p(u))
    if model.kind == "X_model":
        q = primes / (2.0 * (primes + 1.0))
        factors = 1.0 / (primes + 1.0) + q * (e_minus + e_plus)
    else:
        factors = 0.5 * (e_minus + e_plus)
    value = complex(np.prod(factors))

    B2 = s * (s + 1.0) / 2.0
    B4 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) / 24.0
    ts = _tail_sums(P)
    if model.tail_order == 0:
        tail = 0.0
    elif model.kind == "X_model":
        tail = B2 * ts["a2"]
        if model.tail_order == 2:
            tail = tail + B4 * ts["a4"] - 0.5 * B2 * B2 * ts["a2sq"]
    else:
        tail = B2 * ts["s2"]
        if model.tail_order == 2:
            tail = tail + (B4 - 0.5 * B2 * B2) * ts["s4"]
    value *= complex(np.exp(tail))
    bound = _truncation_bound(s, P, model.tail_order, len(primes))
    return MomentResult(s=s, value=value, truncation_error_bound=bound)


# ---------------------------------------------------------------------------
# counter-based sampling

_G1 = np.uint64(0x9E3779B97F4A7C15)
_G2 = np.uint64(0xC2B2AE3D27D4EB4F)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_BLOCK = 1 << 15


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer, vectorized on uint64
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


class _Sampler:
    """Precomputed per-prime tables for one model."""

    def __init__(self, model: RandomEulerModel) -> None:
        primes = primes_up_to(model.prime_cutoff).astype(np.float64)
        self.is_x = model.kind == "X_model"
        self.forced = model.forced_value
        self.log_minus = np.log1p(-1.0 / primes)  # log(1 - 1/p)
        self.log_plus = np.log1p(1.0 / primes)
        self.t_plus = primes / (2.0 * (primes + 1.0))
        self.t_nonzero = primes / (primes + 1.0)
        self.n_primes = len(primes)
        # thresholds prescaled by 2^53 for the compiled path (exact rescale)
        if self.is_x:
            self.thr1 = self.t_plus * 2.0**53
            self.thr2 = self.t_nonzero * 2.0**53
        else:
            self.thr1 = np.full(self.n_primes, 2.0**52)
            self.thr2 = self.thr1

    def log_l_block(self, seed: int, i0: int, nb: int) -> np.ndarray:
        """log L for global sample indices [i0, i0+nb), compiled path."""
        if self.forced is not None:
            return self._forced_block(nb)
        out = np.empty(nb)
        _kernels.sample_log_l(
            seed & 0xFFFFFFFFFFFFFFFF, i0, nb, self.is_x,
            self.log_minus, self.log_plus, self.thr1, self.thr2, out,
        )
        return out

    def _forced_block(self, nb: int) -> np.ndarray:
        if self.forced == 0:
            return np.zeros(nb)
        acc = self.log_minus if self.forced == 1 else self.log_plus
        return np.full(nb, -math.fsum(acc))

    def log_l_block_numpy(self, seed: int, i0: int, nb: int) -> np.ndarray:
        """log L for global sample indices [i0, i0+nb).

        Reference implementation in pure numpy; draw (i, j) depends only on
        (seed, i, j).  Kept alongside the compiled path so the two can be
        checked bit-for-bit against each other.
        """
        if self.forced is not None:
            return self._forced_block(nb)
        # counter arithmetic wraps mod 2^64 by design
        with np.errstate(over="ignore"):
            base = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
                          + np.arange(i0, i0 + nb, dtype=np.uint64) * _G1)
            acc = np.zeros(nb)
            for j in range(self.n_primes):
                v = _mix64(base + np.uint64(j + 1) * _G2)
                uni = (v >> np.uint64(11)).astype(np.float64) * 2.0**-53
                if self.is_x:
                    # +1 below t_plus, -1 between t_plus and t_nonzero, else 0
                    acc -= np.where(
                        uni < self.t_plus[j],
                        self.log_minus[j],
                        np.where(uni < self.t_nonzero[j], self.log_plus[j], 0.0),
                    )
                else:
                    acc -= np.where(uni < 0.5, self.log_minus[j], self.log_plus[j])
        return acc


def sample_L_batch(
    model: RandomEulerModel, seed: int, n: int, lanes: int = 1
) -> np.ndarray:
    """n draws of L, bit-identical for every lane count.

    Sample i of a batch is a pure function of (seed, i); lanes only decide
    which thread computes which fixed-size block.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if lanes < 1:
        raise ValueError("lane count must be at least 1")
    sampler = _Sampler(model)
    out = np.empty(n)
    spans = [(i0, min(_BLOCK, n - i0)) for i0 in range(0, n, _BLOCK)]

    def run(span: tuple[int, int]) -> None:
        i0, nb = span
        out[i0 : i0 + nb] = np.exp(sampler.log_l_block(seed, i0, nb))

    if lanes == 1 or len(spans) == 1:
        for span in spans:
            run(span)
    else:
        with ThreadPoolExecutor(max_workers=lanes) as pool:
            list(pool.map(run, spans))
    return out


def sample_L(model: RandomEulerModel, seed: int) -> float:
    """One draw of the truncated product, deterministic in seed."""
    return float(sample_L_batch(model, seed, 1)[0])


def _block_mean_std(v: np.ndarray) -> tuple[float, float]:
    """Mean and standard error with a fixed blockwise summation order
    (independent of how the samples were produced)."""
    n = len(v)
    edges = np.arange(0, n, 4096)
    mean = math.fsum(np.add.reduceat(v, edges)) / n
    dev = v - mean
    var = math.fsum(np.add.reduceat(dev * dev, edges)) / (n - 1)
    return mean, math.sqrt(var / n)


def expect_min(
    H: int,
    X: float | None,
    model: RandomEulerModel,
    n_samples: int,
    seed: int,
    lanes: int = 1,
) -> tuple[float, float]:
    """Monte Carlo estimate of E(min(pi^2 H^2 / L^2, X)).

    X may be math.inf or None for the uncapped expectation.  Returns
    (estimate, standard error); deterministic in seed.
    """
    if H < 1:
        raise ValueError("H must be positive")
    cap = math.inf if X is None else float(X)
    if not cap >= 1.0:
        raise ValueError("X must be at least 1 (or None/inf for no cap)")
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    L = sample_L_batch(model, seed, n_samples, lanes)
    v = (math.pi * H / L) ** 2
    if math.isfinite(cap):
        np.minimum(v, cap, out=v)
    return _block_mean_std(v)


def tail_probability(
    tau: float,
    model: RandomEulerModel,
    n_samples: int,
    seed: int,
    lanes: int = 1,
) -> tuple[float, float]:
    """Empirical P(L <= zeta(2) e^{-gamma} / tau) with binomial stderr."""
    if tau < 1.0:
        raise ValueError("tau must be at least 1")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    threshold = CONSTANTS.zeta2 * math.exp(-CONSTANTS.euler_gamma) / tau
    L = sample_L_batch(model, seed, n_samples, lanes)
    hits = int(np.count_nonzero(L <= threshold))
    p = hits / n_samples
    return p, math.sqrt(p * (1.0 - p) / n_samples)
