"""Domain types for k-FWER multiple testing: p-value vectors, critical
value schedules, local test families, and rejection sets.

All types are immutable and validated at construction. Indices follow the
statistical convention: hypotheses are 1-based in user-facing messages and
in the CLI, while ``PValueVector.order`` stores 0-based positions for
direct indexing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence


class KfwerError(ValueError):
    """Base class for all validation and usage errors in this package."""


class EmptyInputError(KfwerError):
    """Raised when a p-value collection is empty."""


class OutOfRangeError(KfwerError):
    """A value lies outside [0, 1] or is not finite.

    ``position`` is the 1-based position of the offending entry.
    """

    def __init__(self, position: int, value: float, what: str = "value"):
        self.position = position
        self.value = value
        super().__init__(f"{what} at position {position} is {value!r}, expected a finite number in [0, 1]")


class BadShapeError(KfwerError):
    """A schedule or family table has the wrong length or row structure."""


class NotMonotoneError(KfwerError):
    """A critical schedule decreases. ``position`` is the 1-based entry where it drops."""

    def __init__(self, position: int):
        self.position = position
        super().__init__(f"critical values must be nondecreasing; entry {position} is smaller than its predecessor")


class NotMonotoneInIError(KfwerError):
    """A family row decreases in i. Carries the offending (i, m)."""

    def __init__(self, i: int, m: int):
        self.i, self.m = i, m
        super().__init__(f"family values must be nondecreasing in i: entry (i={i}, m={m}) is smaller than (i={i - 1}, m={m})")


class NotMonotoneInMError(KfwerError):
    """A family column increases in m. Carries the offending (i, m)."""

    def __init__(self, i: int, m: int):
        self.i, self.m = i, m
        super().__init__(f"family values must be nonincreasing in m: entry (i={i}, m={m}) is larger than (i={i}, m={m - 1})")


class KOutOfRangeError(KfwerError):
    """k is not in {1, ..., n}."""

    def __init__(self, k: int, n: int):
        self.k, self.n = k, n
        super().__init__(f"k must satisfy 1 <= k <= n, got k={k} with n={n}")


class AlphaOutOfRangeError(KfwerError):
    """A target level alpha is outside (0, 1)."""

    def __init__(self, alpha: float):
        self.alpha = alpha
        super().__init__(f"alpha must lie strictly between 0 and 1, got {alpha!r}")


class CardinalityOutOfRangeError(KfwerError):
    """A subset cardinality m is outside {k, ..., n}."""

    def __init__(self, m: int, k: int, n: int):
        self.m, self.k, self.n = m, k, n
        super().__init__(f"cardinality m={m} must satisfy k={k} <= m <= n={n}")


class LengthMismatchError(KfwerError):
    """Two inputs that must agree in length do not."""


class TooLargeError(KfwerError):
    """The problem size exceeds the exhaustive-enumeration limit."""

    def __init__(self, n: int, limit: int):
        self.n, self.limit = n, limit
        super().__init__(f"exhaustive closed testing supports at most n={limit} hypotheses, got n={n}")


class DegenerateScheduleError(KfwerError):
    """A schedule normalization constant is zero (all-zero critical values)."""


def _check_unit_interval(values: Sequence[float], what: str) -> None:
    for pos, v in enumerate(values, start=1):
        if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
            raise OutOfRangeError(pos, v, what)


@dataclass(frozen=True)
class PValueVector:
    """Raw p-values with their deterministic ordering permutation.

    ``order`` holds 0-based original positions such that
    ``values[order[0]] <= values[order[1]] <= ...``; ties are broken by
    ascending original position, so the permutation is unique. Use
    :func:`order_pvalues` to construct one.
    """

    values: tuple[float, ...]
    order: tuple[int, ...]

    def __post_init__(self):
        n = len(self.values)
        if n == 0:
            raise EmptyInputError("need at least one p-value")
        _check_unit_interval(self.values, "p-value")
        if sorted(self.order) != list(range(n)):
            raise BadShapeError(f"order must be a permutation of 0..{n - 1}")
        for a, b in zip(self.order, self.order[1:]):
            va, vb = self.values[a], self.values[b]
            if va > vb or (va == vb and a > b):
                raise BadShapeError("order must sort values nondecreasingly with ties by ascending index")

    @property
    def n(self) -> int:
        return len(self.values)

    def sorted_values(self) -> tuple[float, ...]:
        """P-values in nondecreasing order (the order statistics)."""
        return tuple(self.values[j] for j in self.order)


@dataclass(frozen=True)
class CriticalSchedule:
    """Nondecreasing critical values for a stepwise procedure.

    ``alphas[i - k]`` is the critical value compared against the i-th
    smallest p-value, for i = k..n. Values for i < k are never stored:
    the k-1 most significant hypotheses are rejected unconditionally.
    """

    k: int
    n: int
    alphas: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise KOutOfRangeError(self.k, self.n)
        if len(self.alphas) != self.n - self.k + 1:
            raise BadShapeError(
                f"schedule for k={self.k}, n={self.n} needs {self.n - self.k + 1} values, got {len(self.alphas)}"
            )
        _check_unit_interval(self.alphas, "critical value")
        for pos in range(1, len(self.alphas)):
            if self.alphas[pos] < self.alphas[pos - 1]:
                raise NotMonotoneError(pos + 1)

    def alpha(self, i: int) -> float:
        """Critical value for ordered index i (k <= i <= n)."""
        return self.alphas[i - self.k]


@dataclass(frozen=True)
class LocalTestFamily:
    """Symmetric family of local tests as a triangular critical-value table.

    ``rows[m - k]`` holds the values compared against the k-th through m-th
    smallest p-values of a size-m subset. Validity requires each row to be
    nondecreasing left to right and each column nonincreasing as the
    subset grows; both are enforced here, and a violating table is
    rejected at construction.
    """

    k: int
    n: int
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        k, n = self.k, self.n
        if not 1 <= k <= n:
            raise KOutOfRangeError(k, n)
        if len(self.rows) != n - k + 1:
            raise BadShapeError(f"family for k={k}, n={n} needs {n - k + 1} rows, got {len(self.rows)}")
        for m in range(k, n + 1):
            row = self.rows[m - k]
            if len(row) != m - k + 1:
                raise BadShapeError(f"row for cardinality m={m} needs {m - k + 1} values, got {len(row)}")
            _check_unit_interval(row, f"family value in row m={m}")
            for i in range(k + 1, m + 1):
                if row[i - k] < row[i - k - 1]:
                    raise NotMonotoneInIError(i, m)
        for i in range(k, n + 1):
            for m in range(max(i, k) + 1, n + 1):
                if self.value(i, m) > self.value(i, m - 1):
                    raise NotMonotoneInMError(i, m)

    def value(self, i: int, m: int) -> float:
        """Critical value for the i-th smallest p-value of a size-m subset."""
        return self.rows[m - self.k][i - self.k]

    def row(self, m: int) -> tuple[float, ...]:
        """Critical values for subsets of cardinality m."""
        return self.rows[m - self.k]


@dataclass(frozen=True)
class RejectionSet:
    """Per-hypothesis decisions plus a procedure-specific audit value.

    ``rejected`` is indexed by original hypothesis position. ``detail``
    carries the stepwise cutoff index (``{"r": ...}``), the Hommel
    true-null estimate (``{"j_hat": ...}``, ``None`` marking the
    reject-all branch), or the accepted intersection cardinalities for
    closed testing.
    """

    rejected: tuple[bool, ...]
    num_rejected: int
    detail: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_rejected != sum(self.rejected):
            raise BadShapeError(
                f"num_rejected={self.num_rejected} disagrees with {sum(self.rejected)} true flags"
            )

    def rejected_indices(self) -> tuple[int, ...]:
        """0-based original positions of rejected hypotheses, ascending."""
        return tuple(j for j, flag in enumerate(self.rejected) if flag)


def order_pvalues(values: Iterable[float]) -> PValueVector:
    """Attach the stable ordering permutation to raw p-values.

    Ties are broken by ascending original position, which makes every
    downstream procedure deterministic. Input values are not modified.
    """
    vals = tuple(float(v) for v in values)
    if len(vals) == 0:
        raise EmptyInputError("need at least one p-value")
    _check_unit_interval(vals, "p-value")
    order = tuple(sorted(range(len(vals)), key=lambda j: vals[j]))  # stable: ties keep index order
    return PValueVector(values=vals, order=order)


def validate_schedule(k: int, n: int, alphas: Iterable[float]) -> CriticalSchedule:
    """Build a :class:`CriticalSchedule`, rejecting ill-shaped or decreasing input."""
    return CriticalSchedule(k=k, n=n, alphas=tuple(alphas))


def validate_family(k: int, n: int, table: Iterable[Iterable[float]]) -> LocalTestFamily:
    """Build a :class:`LocalTestFamily` from a triangular table of rows m = k..n."""
    return LocalTestFamily(k=k, n=n, rows=tuple(tuple(row) for row in table))


def check_theorem43_condition(family: LocalTestFamily) -> bool:
    """Check the diagonal monotonicity condition for stepup reductions.

    For each i >= k, the values along the diagonal l -> (l, (n - i) + l)
    must be nondecreasing in l over the entries that exist in the
    triangular table (l = k..i). Families derived from a single schedule
    by the stepup transform have constant diagonals and always pass.
    """
    k, n = family.k, family.n
    for i in range(k, n + 1):
        prev = None
        for l in range(k, i + 1):
            v = family.value(l, (n - i) + l)
            if prev is not None and v < prev:
                return False
            prev = v
    return True
