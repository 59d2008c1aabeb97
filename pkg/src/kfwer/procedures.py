"""Decision procedures controlling the k-FWER from marginal p-values.

Four procedures share one convention: the k-1 most significant
hypotheses are always rejected, since fewer than k false rejections can
never violate the error criterion. Stepdown and stepup consume a
single-indexed critical schedule; closed testing and the generalized
Hommel shortcut consume a double-indexed local test family. The closure
engine enumerates every subset exhaustively and doubles as the oracle
against which the shortcuts are checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

from .bounds import d1
from .core import (
    AlphaOutOfRangeError,
    CriticalSchedule,
    DegenerateScheduleError,
    KOutOfRangeError,
    LengthMismatchError,
    LocalTestFamily,
    PValueVector,
    RejectionSet,
    TooLargeError,
)

# Exhaustive subset enumeration is exponential in n; refuse beyond this.
EXHAUSTIVE_LIMIT = 18


@dataclass(frozen=True)
class ProcedureResult:
    """A rejection set together with the procedure tag and the critical
    values it ran with, for audit and serialization."""

    rejection: RejectionSet
    procedure: str
    schedule: Optional[CriticalSchedule] = None
    family: Optional[LocalTestFamily] = None

    @property
    def rejected(self) -> tuple[bool, ...]:
        return self.rejection.rejected

    @property
    def num_rejected(self) -> int:
        return self.rejection.num_rejected

    @property
    def detail(self) -> dict[str, Any]:
        return self.rejection.detail


def _prefix_rejection(p: PValueVector, count: int, detail: dict[str, Any]) -> RejectionSet:
    """Reject the ``count`` most significant hypotheses (tie-broken order)."""
    flags = [False] * p.n
    for j in p.order[:count]:
        flags[j] = True
    return RejectionSet(rejected=tuple(flags), num_rejected=count, detail=detail)


def _require_same_n(p: PValueVector, n: int, what: str) -> None:
    if p.n != n:
        raise LengthMismatchError(f"{what} is sized for n={n} but got {p.n} p-values")


def stepdown(p: PValueVector, s: CriticalSchedule) -> ProcedureResult:
    """Stepdown procedure: scan upward from the k-th smallest p-value.

    Rejects the hypotheses of the r smallest p-values, where r is the
    largest index such that every ordered p-value from rank k through r
    is at or below its critical value. If already the k-th smallest
    exceeds its critical value, only the automatic k-1 are rejected and
    the cutoff is recorded as absent.
    """
    _require_same_n(p, s.n, "schedule")
    k = s.k
    sorted_vals = p.sorted_values()
    r: Optional[int] = None
    if sorted_vals[k - 1] <= s.alphas[0]:
        r = k
        for i in range(k + 1, s.n + 1):
            if sorted_vals[i - 1] <= s.alpha(i):
                r = i
            else:
                break
    count = r if r is not None else k - 1
    return ProcedureResult(
        rejection=_prefix_rejection(p, count, {"r": r}),
        procedure="stepdown",
        schedule=s,
    )


def stepup(p: PValueVector, s: CriticalSchedule) -> ProcedureResult:
    """Stepup procedure: scan downward from the least significant p-value.

    Rejects the hypotheses of the r smallest p-values with
    r = max{i >= k : P_(i) <= alpha_i}; when every comparison fails only
    the automatic k-1 are rejected. Rejecting everything when the largest
    p-value clears its critical value is the r = n case.
    """
    _require_same_n(p, s.n, "schedule")
    k = s.k
    sorted_vals = p.sorted_values()
    r: Optional[int] = None
    for i in range(s.n, k - 1, -1):
        if sorted_vals[i - 1] <= s.alpha(i):
            r = i
            break
    count = r if r is not None else k - 1
    return ProcedureResult(
        rejection=_prefix_rejection(p, count, {"r": r}),
        procedure="stepup",
        schedule=s,
    )


def closed_testing(
    p: PValueVector, f: LocalTestFamily, exhaustive_limit: int = EXHAUSTIVE_LIMIT
) -> ProcedureResult:
    """Generalized closed testing by exhaustive subset enumeration.

    A hypothesis is rejected iff every subset that contains it at rank k
    or beyond (in the tie-broken order) has its intersection hypothesis
    rejected by the local test; subsets where it sits among the first
    k-1 members impose no constraint, which also makes the k-1 globally
    most significant hypotheses automatic rejections. Enumeration is
    deliberately unpruned: this function is the reference the shortcut
    procedures are validated against.
    """
    _require_same_n(p, f.n, "family")
    n, k = f.n, f.k
    if n > exhaustive_limit:
        raise TooLargeError(n, exhaustive_limit)
    order = p.order
    sorted_vals = p.sorted_values()
    rejected = [True] * n
    accepted_cards: set[int] = set()
    # Masks index positions in the sorted order, so the rank of a member
    # inside a subset is just its count of set bits up to and including
    # its own position.
    for mask in range(1, 1 << n):
        m = mask.bit_count()
        if m < k:
            continue
        row = f.rows[m - k]
        rank = 0
        rejects = False
        bits = mask
        while bits:
            low = bits & -bits
            pos = low.bit_length() - 1
            bits ^= low
            rank += 1
            if rank >= k and sorted_vals[pos] <= row[rank - k]:
                rejects = True
                break
        if not rejects:
            accepted_cards.add(m)
            rank = 0
            bits = mask
            while bits:
                low = bits & -bits
                pos = low.bit_length() - 1
                bits ^= low
                rank += 1
                if rank >= k:
                    rejected[order[pos]] = False
    detail = {"accepted_cardinalities": tuple(sorted(accepted_cards))}
    return ProcedureResult(
        rejection=RejectionSet(tuple(rejected), sum(rejected), detail),
        procedure="closed_testing",
        family=f,
    )


def _hommel_j_hat(sorted_vals: tuple[float, ...], f: LocalTestFamily) -> Optional[int]:
    """Largest cardinality whose worst-case intersection survives, or None."""
    n, k = f.n, f.k
    for i in range(n, k - 1, -1):
        if all(sorted_vals[n - i + l - 1] > f.value(l, i) for l in range(k, i + 1)):
            return i
    return None


def generalized_hommel(p: PValueVector, f: LocalTestFamily) -> ProcedureResult:
    """Generalized Hommel shortcut for closed testing.

    First estimates the number of true nulls as the largest cardinality
    j whose top-j p-values all clear the size-j local test; then rejects
    every hypothesis with p-value at or below the rank-k critical value
    of the size-j test. When no cardinality survives, everything is
    rejected and the estimate is recorded as absent.
    """
    _require_same_n(p, f.n, "family")
    n, k = f.n, f.k
    sorted_vals = p.sorted_values()
    j_hat = _hommel_j_hat(sorted_vals, f)
    if j_hat is None:
        count = n
    else:
        threshold = f.value(k, j_hat)
        below = 0
        while below < n and sorted_vals[below] <= threshold:
            below += 1
        count = max(k - 1, below)
    return ProcedureResult(
        rejection=_prefix_rejection(p, count, {"j_hat": j_hat}),
        procedure="generalized_hommel",
        family=f,
    )


def estimate_true_nulls(p: PValueVector, f: LocalTestFamily) -> Optional[int]:
    """The Hommel true-null count estimate, or None when every
    cardinality's worst-case intersection is rejected (the reject-all
    branch). Exposed as a heuristic; no distributional guarantee is
    attached."""
    _require_same_n(p, f.n, "family")
    return _hommel_j_hat(p.sorted_values(), f)


def _check_level(k: int, n: int, alpha: float) -> None:
    if not 1 <= k <= n:
        raise KOutOfRangeError(k, n)
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRangeError(alpha)


def lehmann_romano_schedule(k: int, n: int, alpha: float) -> CriticalSchedule:
    """Stepdown critical values k*alpha/(n - i + k) for i = k..n.

    At k = 1 this is Holm's schedule alpha/(n - i + 1).
    """
    _check_level(k, n, alpha)
    return CriticalSchedule(k=k, n=n, alphas=tuple(k * alpha / (n - i + k) for i in range(k, n + 1)))


def _scaled(alpha: float, base_value: float, d: float) -> float:
    # Shared by romano_shaikh_schedule and scaled_family so the m = n row
    # of the family is bitwise-identical to the schedule.
    return alpha * base_value / d


def romano_shaikh_schedule(base: CriticalSchedule, alpha: float) -> CriticalSchedule:
    """Stepup critical values alpha * alpha_i / D1 from any base schedule.

    The normalization makes the stepup procedure level-alpha under
    arbitrary p-value dependence, whatever the base.
    """
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRangeError(alpha)
    d = d1(base)
    if d == 0.0:
        raise DegenerateScheduleError("base schedule is identically zero")
    return CriticalSchedule(
        k=base.k,
        n=base.n,
        alphas=tuple(_scaled(alpha, a, d) for a in base.alphas),
    )


def constant_family(k: int, n: int, alpha: float) -> LocalTestFamily:
    """Local tests with constant row values k*alpha/m for cardinality m."""
    _check_level(k, n, alpha)
    rows = tuple(tuple(k * alpha / m for _ in range(k, m + 1)) for m in range(k, n + 1))
    return LocalTestFamily(k=k, n=n, rows=rows)


def simes_family(k: int, n: int, alpha: float) -> LocalTestFamily:
    """Local tests with values i*alpha/m; at k = 1 these are Simes'
    critical values, turning the Hommel shortcut into the classical
    Hommel procedure."""
    _check_level(k, n, alpha)
    rows = tuple(tuple(i * alpha / m for i in range(k, m + 1)) for m in range(k, n + 1))
    return LocalTestFamily(k=k, n=n, rows=rows)


def scaled_family(base: CriticalSchedule, alpha: float) -> LocalTestFamily:
    """Local tests alpha * alpha_{n-m+i} / D1 built from a base schedule.

    Row m = n reproduces :func:`romano_shaikh_schedule` exactly; every
    row's Type-I bound is at most alpha by construction of D1.
    """
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRangeError(alpha)
    k, n = base.k, base.n
    d = d1(base)
    if d == 0.0:
        raise DegenerateScheduleError("base schedule is identically zero")
    rows = tuple(
        tuple(_scaled(alpha, base.alpha(n - m + i), d) for i in range(k, m + 1))
        for m in range(k, n + 1)
    )
    return LocalTestFamily(k=k, n=n, rows=rows)


def stepdown_as_family(s: CriticalSchedule) -> LocalTestFamily:
    """The family whose closed testing procedure equals stepdown with s.

    Row m is constant at alpha_{n-m+k}: a size-m subset is tested against
    the schedule value its rank-k member would face globally in the worst
    case. Materialized as a full table so it passes family validation and
    exercises the same closed-testing path as user-supplied families.
    """
    k, n = s.k, s.n
    rows = tuple(tuple(s.alpha(n - m + k) for _ in range(k, m + 1)) for m in range(k, n + 1))
    return LocalTestFamily(k=k, n=n, rows=rows)


def stepup_as_family(s: CriticalSchedule) -> LocalTestFamily:
    """The family whose closed testing procedure equals stepup with s.

    Row m holds alpha_{n-m+i} for i = k..m; diagonals i -> (i, (n-j)+i)
    are constant, which is exactly the condition under which closed
    testing collapses to a stepup scan.
    """
    k, n = s.k, s.n
    rows = tuple(tuple(s.alpha(n - m + i) for i in range(k, m + 1)) for m in range(k, n + 1))
    return LocalTestFamily(k=k, n=n, rows=rows)


ProcedureFn = Callable[[PValueVector], ProcedureResult]
