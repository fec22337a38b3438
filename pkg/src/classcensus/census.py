"""The census F_X(h) = #{fundamental d <= X : h(-d) = h} and empirical
verification of its averaged asymptotics.

The averaged count sum_{h<=H} F(h) grows like (3 zeta(2)/zeta(3)) H^2, and
restricted to odd h like (15/4) H^2 / log H.  Both checks here use the
explicit cutoff X = ceil(H^2 * max(loglog H, 1)): the census is exact as a
function of X, while completeness for the true F(h) (every field with
h <= H counted) is heuristic and only plausible once loglog H is genuinely
large.  The ``heuristically_complete`` flag is deliberately conservative:
it is never set below H = 16, where loglog H <= 1 and the cutoff rule has
no meaning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .arith import CONSTANTS
from .classnum import ClassNumberTable, batch_class_numbers

__all__ = [
    "FCensus",
    "AsymptoticRow",
    "AsymptoticReport",
    "cutoff_for",
    "tabulate",
    "verify_theorem1",
    "verify_theorem2",
]


def cutoff_for(H: int) -> int:
    """Census cutoff X = ceil(H^2 * max(loglog H, 1)), natural logs.

    The loglog factor is clamped below by 1 (it only exceeds 1 past
    H = e^e, i.e. H >= 16).
    """
    if H < 1:
        raise ValueError("H must be positive")
    if H < 16:
        ll = 1.0
    else:
        ll = max(math.log(math.log(H)), 1.0)
    return math.ceil(H * H * ll)


@dataclass
class FCensus:
    """Census of class numbers in a table truncated at X.

    counts[h] = F_X(h) for every h observed in the table (counts[0] = 0).
    H is the height the census was requested for; heuristically_complete
    records whether X reaches the cutoff rule at this H (see module
    docstring for the small-H convention).
    """

    H: int
    X: int
    counts: np.ndarray
    heuristically_complete: bool

    def partial_sum(self, H: int | None = None, odd_only: bool = False) -> int:
        """sum of F_X(h) over h <= H (default: the census's own H)."""
        H = self.H if H is None else H
        hi = min(H, len(self.counts) - 1)
        if hi < 1:
            return 0
        if odd_only:
            return int(self.counts[1 : hi + 1 : 2].sum())
        return int(self.counts[1 : hi + 1].sum())


def tabulate(table: ClassNumberTable, H: int) -> FCensus:
    """Tabulate F_X(h) from a class-number table.

    Emits a RuntimeWarning (and clears the flag) when the table's cutoff
    is below the census rule for this H.
    """
    if H < 1:
        raise ValueError("H must be positive")
    vals = table.values[table.values > 0]
    counts = np.bincount(vals)
    counts = counts.astype(np.int64)
    complete = H >= 16 and table.cutoff >= cutoff_for(H)
    if not complete:
        if table.cutoff < cutoff_for(H):
            reason = (
                f"the table stops at X={table.cutoff}, below the census "
                f"cutoff {cutoff_for(H)} for H={H}"
            )
        else:
            reason = (
                f"H={H} is below the asymptotic regime (H >= 16) where the "
                "cutoff rule is trusted"
            )
        warnings.warn(
            f"census counts may miss fields with larger d: {reason}; counts "
            "are exact for this X but are lower bounds for F(h)",
            RuntimeWarning,
            stacklevel=2,
        )
    return FCensus(H=H, X=table.cutoff, counts=counts, heuristically_complete=complete)


@dataclass
class AsymptoticRow:
    H: int
    X: int
    empirical_sum: int
    main_term: float
    ratio: float
    residual: float


@dataclass
class AsymptoticReport:
    theorem: int
    target_constant: float
    rows: list[AsymptoticRow] = field(default_factory=list)


def _verify(
    H_grid: list[int],
    odd_only: bool,
    table: ClassNumberTable | None,
    lanes: int,
) -> list[AsymptoticRow]:
    if not H_grid:
        raise ValueError("H grid is empty")
    for H in H_grid:
        if H < 16:
            raise ValueError(f"H={H} below 16 (loglog H must exceed 1)")
    grid = sorted(H_grid)
    X_need = cutoff_for(grid[-1])
    if table is None or table.cutoff < X_need:
        table = batch_class_numbers(X_need, lanes=lanes)
    rows = []
    for H in grid:
        X = cutoff_for(H)
        vals = table.values[: X + 1]
        vals = vals[vals > 0]
        counts = np.bincount(vals)
        hi = min(H, len(counts) - 1)
        if odd_only:
            emp = int(counts[1 : hi + 1 : 2].sum())
            main = 3.75 * H * H / math.log(H)
        else:
            emp = int(counts[1 : hi + 1].sum())
            main = CONSTANTS.census_leading * H * H
        rows.append(
            AsymptoticRow(
                H=H,
                X=X,
                empirical_sum=emp,
                main_term=main,
                ratio=emp / main,
                residual=emp - main,
            )
        )
    return rows


def verify_theorem1(
    H_grid: list[int],
    *,
    table: ClassNumberTable | None = None,
    lanes: int = 1,
) -> AsymptoticReport:
    """Empirical check of sum_{h<=H} F_X(h) against (3 zeta(2)/zeta(3)) H^2.

    H grid entries must be >= 16; X = cutoff_for(H) per row.  A prebuilt
    table covering cutoff_for(max H) is used when supplied.
    """
    return AsymptoticReport(
        theorem=1,
        target_constant=CONSTANTS.census_leading,
        rows=_verify(H_grid, False, table, lanes),
    )


def verify_theorem2(
    H_grid: list[int],
    *,
    table: ClassNumberTable | None = None,
    lanes: int = 1,
) -> AsymptoticReport:
    """Empirical check of sum_{h<=H odd} F_X(h) against (15/4) H^2/log H."""
    return AsymptoticReport(
        theorem=2,
        target_constant=CONSTANTS.odd_leading,
        rows=_verify(H_grid, True, table, lanes),
    )
