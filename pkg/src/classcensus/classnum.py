"""Class numbers h(-d) of imaginary quadratic fields.

Two independent algorithms:

* reduced-form counting (``class_number_forms``, and in bulk the bucket
  sieve of ``batch_class_numbers``): count integer triples (a, b, c) with
  b^2 - 4ac = -d, -a < b <= a <= c, b >= 0 when a = c.  For fundamental -d
  the count is the ideal class number.
* the finite Dirichlet character sum (``class_number_charsum``): for
  fundamental -d < -4,  h(-d) = (2 - chi(2))^{-1} * sum_{0 < a < d/2} chi(a)
  with chi = kronecker(-d, .); h = 1 for d in {3, 4}.

They share no code beyond the Kronecker symbol, so each serves as the
other's oracle.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .arith import check_capacity, fundamental_mask, is_fundamental, unit_count
from .errors import InternalInconsistencyError

__all__ = [
    "ReducedForm",
    "ClassNumberTable",
    "reduced_forms",
    "class_number_forms",
    "class_number_charsum",
    "batch_class_numbers",
    "table_via_forms",
    "l_one_chi",
    "save_table",
    "load_table",
]

_MAGIC = b"CCTBL\x00\x01\x00"
_METHOD_CODES = {"batch_sieve": 0, "per_discriminant": 1}
_METHOD_NAMES = {v: k for k, v in _METHOD_CODES.items()}


@dataclass(frozen=True)
class ReducedForm:
    """A reduced positive definite binary quadratic form ax^2 + bxy + cy^2."""

    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c


@dataclass
class ClassNumberTable:
    """Dense table d -> h(-d) for 1 <= d <= cutoff.

    values[d] holds h(-d) at fundamental d and the sentinel 0 elsewhere.
    Immutable by convention once built; safe to share across threads.
    """

    cutoff: int
    values: np.ndarray  # uint32, length cutoff + 1
    build_method: str
    checksum: int = field(default=-1)

    def __post_init__(self) -> None:
        if self.build_method not in _METHOD_CODES:
            raise ValueError(f"unknown build_method {self.build_method!r}")
        if self.checksum < 0:
            self.checksum = int(self.values.sum(dtype=np.uint64))

    def class_number(self, d: int) -> int:
        if not 1 <= d <= self.cutoff:
            raise ValueError(f"d={d} outside table range [1, {self.cutoff}]")
        h = int(self.values[d])
        if h == 0:
            raise ValueError(f"-{d} is not a fundamental discriminant")
        return h

    def fundamental_discriminants(self) -> np.ndarray:
        """Ascending array of all fundamental d <= cutoff."""
        return np.nonzero(self.values)[0]


def reduced_forms(d: int) -> list[ReducedForm]:
    """All reduced forms of discriminant -d, ordered by (a, b)."""
    if not is_fundamental(d):
        raise ValueError(f"-{d} is not a fundamental discriminant")
    out = []
    for a in range(1, math.isqrt(d // 3) + 1):
        for b in range(-a + 1, a + 1):
            t = b * b + d
            if t % (4 * a) == 0:
                c = t // (4 * a)
                if c >= a and not (a == c and b < 0):
                    out.append(ReducedForm(a, b, c))
    return out


def class_number_forms(d: int) -> int:
    """h(-d) by reduced-form enumeration."""
    if not is_fundamental(d):
        raise ValueError(f"-{d} is not a fundamental discriminant")
    return int(_kernels.forms_count(d))


# least-prime-factor table for the character sieve, grown on demand
_spf_cache = np.zeros(0, dtype=np.uint32)


def _spf_up_to(limit: int) -> np.ndarray:
    global _spf_cache
    if len(_spf_cache) <= limit:
        from .arith import smallest_prime_factor

        _spf_cache = smallest_prime_factor(max(limit, 2 * len(_spf_cache), 1024))
    return _spf_cache


def class_number_charsum(d: int) -> int:
    """h(-d) by the finite Dirichlet character sum (independent oracle)."""
    if not is_fundamental(d):
        raise ValueError(f"-{d} is not a fundamental discriminant")
    if d <= 4:
        return 1
    spf = _spf_up_to((d - 1) // 2)
    s = int(_kernels.charsum_raw(d, spf))
    div = 2 - _kernels.kron_i64(-d, 2)
    if s <= 0 or s % div != 0:
        raise InternalInconsistencyError(
            f"character sum {s} for d={d} not a positive multiple of {div}"
        )
    return s // div


def _lane_bounds(X: int, amax: int, lanes: int) -> list[tuple[int, int]]:
    # balance lanes by estimated work per outer value a: the inner loops
    # touch about (2a) * (cmax - a + 1) ~ X/2 - 3a^2/2 cells
    a = np.arange(1, amax + 1, dtype=np.float64)
    w = np.maximum(X / 2.0 - 1.5 * a * a, 1.0)
    cw = np.cumsum(w)
    targets = cw[-1] * np.arange(1, lanes) / lanes
    cuts = np.searchsorted(cw, targets) + 1  # a-values are 1-based
    edges = [1, *cuts.tolist(), amax + 1]
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:])]


def batch_class_numbers(X: int, lanes: int = 1) -> ClassNumberTable:
    """Build the full table of h(-d) for all fundamental d <= X.

    Enumerates every reduced triple with 4ac - b^2 <= X once, bucketing by
    discriminant (Theta(X^{3/2}) work), then zeroes non-fundamental indices.
    ``lanes`` partitions the outer a-loop; each lane fills a private bucket
    array and the arrays are summed in lane order, so the result is
    identical for every lane count.
    """
    if X < 3:
        raise ValueError("X must be at least 3")
    if lanes < 1:
        raise ValueError("lane count must be at least 1")
    amax = math.isqrt(X // 3)
    lanes = min(lanes, max(1, amax))
    # private buckets per extra lane, plus result array and the boolean
    # sieves behind fundamental_mask
    check_capacity((lanes + 1) * 4 * (X + 1) + 2 * (X + 1), f"batch sieve to {X}")
    if lanes == 1:
        counts = np.zeros(X + 1, dtype=np.uint32)
        _kernels.bucket_fill(X, 1, amax + 1, counts)
    else:
        bounds = _lane_bounds(X, amax, lanes)
        privs = [np.zeros(X + 1, dtype=np.uint32) for _ in bounds]
        with ThreadPoolExecutor(max_workers=lanes) as pool:
            futs = [
                pool.submit(_kernels.bucket_fill, X, lo, hi, priv)
                for (lo, hi), priv in zip(bounds, privs)
            ]
            for f in futs:
                f.result()
        counts = privs[0]
        for priv in privs[1:]:  # fixed merge order
            counts += priv
    mask = fundamental_mask(X)
    counts[~mask] = 0
    if int(counts[mask].min(initial=1)) == 0:
        raise InternalInconsistencyError(
            "sieve produced h = 0 at a fundamental discriminant"
        )
    return ClassNumberTable(cutoff=X, values=counts, build_method="batch_sieve")


def table_via_forms(X: int) -> ClassNumberTable:
    """Table built discriminant by discriminant (slow; cross-validation)."""
    if X < 3:
        raise ValueError("X must be at least 3")
    check_capacity(4 * (X + 1) + 2 * (X + 1), f"per-discriminant table to {X}")
    mask = fundamental_mask(X)
    values = np.zeros(X + 1, dtype=np.uint32)
    for d in np.nonzero(mask)[0]:
        values[d] = _kernels.forms_count(int(d))
    return ClassNumberTable(
        cutoff=X, values=values, build_method="per_discriminant"
    )


def l_one_chi(d: int, h: int | None = None) -> float:
    """L(1, chi_{-d}) = 2 pi h(-d) / (w sqrt(d)) for fundamental d.

    Computes h by form enumeration unless the caller supplies it.
    """
    if h is None:
        h = class_number_forms(d)
    else:
        if not is_fundamental(d):
            raise ValueError(f"-{d} is not a fundamental discriminant")
    return 2.0 * math.pi * h / (unit_count(d) * math.sqrt(d))


def save_table(table: ClassNumberTable, path: str, fmt: str = "bin") -> None:
    """Write a table to ``path``.

    bin: 16-byte header (8-byte magic, uint32 version, uint32 method code),
    then uint32 X and the X+1 value array, all little-endian.
    csv: header ``d,h`` then one row per fundamental d, ascending.
    """
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<II", 1, _METHOD_CODES[table.build_method]))
            fh.write(struct.pack("<I", table.cutoff))
            fh.write(table.values.astype("<u4", copy=False).tobytes())
    elif fmt == "csv":
        ds = table.fundamental_discriminants()
        with open(path, "w", encoding="ascii") as fh:
            fh.write("d,h\n")
            for d in ds:
                fh.write(f"{int(d)},{int(table.values[d])}\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_table(path: str) -> ClassNumberTable:
    """Read a table written by save_table(fmt='bin')."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a class-number table (bad magic)")
        version, method_code = struct.unpack("<II", fh.read(8))
        if version != 1 or method_code not in _METHOD_NAMES:
            raise ValueError(f"{path}: unsupported version/method")
        (cutoff,) = struct.unpack("<I", fh.read(4))
        values = np.frombuffer(fh.read(4 * (cutoff + 1)), dtype="<u4")
        if len(values) != cutoff + 1:
            raise ValueError(f"{path}: truncated table")
    return ClassNumberTable(
        cutoff=int(cutoff),
        values=values.astype(np.uint32),
        build_method=_METHOD_NAMES[method_code],
    )
