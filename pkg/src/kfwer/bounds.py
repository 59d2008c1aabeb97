"""Probability bounds certifying local tests as level-alpha.

The central inequality bounds the chance that the first m order
statistics of t p-values all fall below a nondecreasing threshold
sequence; everything else here is a reparameterization of it. Sums are
accumulated strictly left to right so that the different entry points
produce bitwise-identical floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    BadShapeError,
    CardinalityOutOfRangeError,
    CriticalSchedule,
    LengthMismatchError,
    LocalTestFamily,
    NotMonotoneError,
    _check_unit_interval,
)


@dataclass(frozen=True)
class BoundInput:
    """Threshold sequence for the ordered-p-value bound.

    ``t`` is the number of p-values; ``betas`` holds beta_1 <= ... <=
    beta_m with m <= t. beta_0 is fixed at zero.
    """

    t: int
    betas: tuple[float, ...]

    def __post_init__(self):
        if self.t < 1:
            raise BadShapeError(f"t must be >= 1, got {self.t}")
        m = len(self.betas)
        if m < 1 or m > self.t:
            raise BadShapeError(f"need 1 <= m <= t={self.t} thresholds, got {m}")
        _check_unit_interval(self.betas, "beta")
        for pos in range(1, m):
            if self.betas[pos] < self.betas[pos - 1]:
                raise NotMonotoneError(pos + 1)


def lemma31_bound(bound_input: BoundInput) -> float:
    """Upper bound on P{P_(1) <= beta_1, ..., P_(m) <= beta_m}.

    Returns ``t * sum_i (beta_i - beta_{i-1}) / i`` with beta_0 = 0. The
    result is a bound, not a probability: it is nonnegative and may
    exceed 1.
    """
    total = 0.0
    prev = 0.0
    for i, b in enumerate(bound_input.betas, start=1):
        total += (b - prev) / i
        prev = b
    return bound_input.t * total


def type1_bound(family: LocalTestFamily, m: int) -> float:
    """Bound on the Type-I error of the size-m local test of a family.

    Evaluates the ordered-p-value bound with t = m and thresholds equal
    to row m of the family padded with k-1 leading zeros.
    """
    if not family.k <= m <= family.n:
        raise CardinalityOutOfRangeError(m, family.k, family.n)
    betas = (0.0,) * (family.k - 1) + family.row(m)
    return lemma31_bound(BoundInput(t=m, betas=betas))


def d1(schedule: CriticalSchedule) -> float:
    """Normalization constant making a scaled stepup schedule level-alpha.

    Computed by exhaustively scanning every subset cardinality m = k..n;
    the scan is the definition, so there is no shortcut to get out of
    sync with.
    """
    k, n = schedule.k, schedule.n
    best = -math.inf
    for m in range(k, n + 1):
        term = m * schedule.alpha(n - m + k) / k
        for j in range(k + 1, m + 1):
            term += m * (schedule.alpha(n - m + j) - schedule.alpha(n - m + j - 1)) / j
        if term > best:
            best = term
    return best


def evaluate_local_test(subset_pvalues: Sequence[float], family_row: Sequence[float]) -> bool:
    """Decide one intersection hypothesis from its sorted subset p-values.

    ``subset_pvalues`` must be sorted ascending (length m); ``family_row``
    holds the critical values for ranks k..m of a size-m subset. Returns
    True (reject) iff some rank-j p-value with j >= k is at or below its
    critical value.
    """
    m = len(subset_pvalues)
    width = len(family_row)
    if width < 1 or width > m:
        raise LengthMismatchError(
            f"family row of length {width} does not fit {m} subset p-values"
        )
    k = m - width + 1
    for j in range(k, m + 1):
        if subset_pvalues[j - 1] <= family_row[j - k]:
            return True
    return False
