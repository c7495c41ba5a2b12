"""
Partition functions S(eps) = sum_k mu([k eps, (k+1) eps))^q and their log tables.

Two independent evaluation paths are kept for cascade measures: the closed
form (1 - q) ln 2 (a_1 + ... + a_n) at dyadic scales, and brute-force
enumeration of the level-n cells. Each one is the other's oracle.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import (
    DomainError,
    EstimatorError,
    InvariantViolationError,
    OutputSaveError,
    PrecisionGuardError,
    ResourceLimitError,
)
from .measure import (
    LN2,
    MAX_ENUMERATION_DEPTH,
    CascadeMeasure,
    DiscretizedMeasure,
    check_exponent,
)

logger = logging.getLogger(__name__)

RESOLUTION_GUARD = 4.0
JUMP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PartitionTable:
    """
    Rows (ln eps, ln S(eps)) with ln eps strictly decreasing.

    ``ln_eps`` and ``ln_S`` are parallel read-only arrays.
    """

    q: float
    ln_eps: np.ndarray
    ln_S: np.ndarray
    source: str = ""

    def __post_init__(self):
        check_exponent(self.q)
        if self.ln_eps.shape != self.ln_S.shape or self.ln_eps.ndim != 1:
            raise DomainError("ln_eps and ln_S must be 1-D arrays of equal length")
        if self.ln_eps.size == 0:
            raise DomainError("A partition table needs at least one row")
        if np.any(np.diff(self.ln_eps) >= 0):
            raise DomainError("Table rows must have strictly decreasing ln_eps")
        if not np.all(np.isfinite(self.ln_S)):
            raise DomainError("ln_S values must be finite")
        self.ln_eps.setflags(write=False)
        self.ln_S.setflags(write=False)

    @classmethod
    def from_rows(cls, q: float, rows: Sequence[Tuple[float, float]],
                  source: str = "") -> "PartitionTable":
        ln_eps = np.array([float(r[0]) for r in rows])
        ln_S = np.array([float(r[1]) for r in rows])
        return cls(float(q), ln_eps, ln_S, source)

    def __len__(self) -> int:
        return int(self.ln_eps.size)

    @property
    def scale(self) -> np.ndarray:
        """t = -ln eps, increasing along the rows."""
        return -self.ln_eps

    @property
    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.ln_eps.tolist(), self.ln_S.tolist()))

    def to_csv(self, path: str) -> None:
        """Write columns ln_eps, ln_S with 17 significant digits."""
        try:
            with open(path, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["ln_eps", "ln_S"])
                for x, y in zip(self.ln_eps.tolist(), self.ln_S.tolist()):
                    writer.writerow([f"{x:.17g}", f"{y:.17g}"])
        except OSError as e:
            raise OutputSaveError(f"Cannot save table to: {path}. {e}") from e

    @classmethod
    def from_csv(cls, path: str, q: float, source: Optional[str] = None) -> "PartitionTable":
        with open(path, "r", newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            try:
                rows = [(float(r["ln_eps"]), float(r["ln_S"])) for r in reader]
            except (KeyError, TypeError, ValueError) as e:
                raise EstimatorError(f"Malformed partition table CSV: {path}") from e
        return cls.from_rows(q, rows, source or path)


@dataclass
class JumpDiagnostics:
    """Outcome of checking consecutive-row jumps against the dyadic bounds."""

    q: float
    B: float
    observed_A: float
    max_violation: float
    violations: List[Tuple[int, float, float, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def raise_for_violation(self) -> None:
        if self.violations:
            row, jump, lower, upper = self.violations[0]
            raise InvariantViolationError(
                f"{len(self.violations)} jump bound violations; first at row {row}: "
                f"jump {jump:.17g} outside [{lower:.17g}, {upper:.17g}]"
            )


def partition_exact_dyadic(m: CascadeMeasure, n: int) -> float:
    """ln S(2^-n) = (1 - q) ln 2 (a_1 + ... + a_n) at the build exponent."""
    if not 0 <= n <= m.depth:
        raise DomainError(f"Level {n} outside 0..{m.depth}")
    if n == 0:
        return 0.0
    return (1.0 - m.build_q) * LN2 * math.fsum(m.a_values[:n])


def partition_enumerate(m: CascadeMeasure, n: int, q_eval: float) -> float:
    """
    ln of the sum of q_eval-th powers of the nonzero level-n cell masses.

    Raises:
        DomainError: If n is outside 0..depth
        ResourceLimitError: If n exceeds the enumeration limit
    """
    q_eval = check_exponent(q_eval, "q_eval")
    if not 0 <= n <= m.depth:
        raise DomainError(f"Level {n} outside 0..{m.depth}")
    if n > MAX_ENUMERATION_DEPTH:
        raise ResourceLimitError(
            f"Enumerating level {n} needs 2^{n} cells; limit is level {MAX_ENUMERATION_DEPTH}"
        )
    return _log_power_sum(m.level_masses(n), q_eval)


def partition_bucket(dm: DiscretizedMeasure, eps: float, q: float) -> float:
    """
    ln S(eps) for an atomic measure, bucketing atoms by floor(position / eps).

    An atom exactly on a cell boundary belongs to the cell on its right.

    Raises:
        PrecisionGuardError: If eps < 4 * dm.resolution
    """
    q = check_exponent(q)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if eps < RESOLUTION_GUARD * dm.resolution * (1.0 - 1e-12):
        raise PrecisionGuardError(
            f"eps={eps:.6g} is finer than {RESOLUTION_GUARD:g} x resolution "
            f"({dm.resolution:.6g}); discretize more finely"
        )
    return _log_power_sum(bucket_masses(dm, eps), q)


def bucket_masses(dm: DiscretizedMeasure, eps: float) -> np.ndarray:
    """Masses of the occupied cells [k eps, (k+1) eps)."""
    cells = np.floor(dm.positions / eps)
    # floating division can land just below an exact boundary
    cells += (cells + 1.0) * eps <= dm.positions
    _, inverse = np.unique(cells, return_inverse=True)
    return np.bincount(inverse.ravel(), weights=dm.weights)


def build_table(m: CascadeMeasure, n_max: int, q: Optional[float] = None) -> PartitionTable:
    """
    Rows (-n ln 2, ln S(2^-n)) for n = 0..n_max.

    At the build exponent the closed form is used; any other exponent falls
    back to enumeration. The jump bounds are checked before returning.

    Raises:
        DomainError: If n_max is outside 0..depth
        InvariantViolationError: If a jump bound fails
    """
    q = m.build_q if q is None else check_exponent(q)
    if not 0 <= n_max <= m.depth:
        raise DomainError(f"n_max={n_max} outside 0..{m.depth}")

    levels = np.arange(n_max + 1)
    if q == m.build_q:
        ln_S = np.concatenate(([0.0], (1.0 - q) * LN2 * np.cumsum(m.a_values[:n_max])))
        how = "exact"
    else:
        ln_S = np.array([partition_enumerate(m, int(n), q) for n in levels])
        how = "enumerated"

    table = PartitionTable(q, -levels * LN2, ln_S,
                           f"cascade(build_q={m.build_q:g}, depth={m.depth}, {how})")
    if n_max >= 1:
        check_jump_bounds(table).raise_for_violation()
    if q > 1 and np.max(ln_S) > JUMP_TOL:
        raise InvariantViolationError("ln S exceeds q ln(total mass) for a probability measure")
    logger.debug("Built %s table with %d rows", how, len(table))
    return table


def bucket_table(dm: DiscretizedMeasure, levels: Sequence[int], q: float,
                 source: str = "") -> PartitionTable:
    """Bucketed rows at eps = 2^-n for the given levels."""
    levels = sorted(set(int(n) for n in levels))
    rows = [(-n * LN2, partition_bucket(dm, 2.0 ** -n, q)) for n in levels]
    return PartitionTable.from_rows(q, rows, source or f"atoms({len(dm)})")


def check_jump_bounds(t: PartitionTable, d: int = 1, tol: float = JUMP_TOL) -> JumpDiagnostics:
    """
    Check 0 <= ln S(eps) - ln S(2^-k eps) <= k d (q - 1) ln 2 between neighbouring rows.

    For q < 1 the bounds are mirrored. Neighbouring checks imply the bound
    for every pair of rows since both sides add up along the table.

    Raises:
        EstimatorError: If the table has fewer than 2 rows or rows are not
            dyadically spaced
    """
    if len(t) < 2:
        raise EstimatorError("Jump bounds need at least 2 rows")
    steps = -np.diff(t.ln_eps) / LN2
    k = np.rint(steps)
    if np.any(np.abs(steps - k) > 1e-9) or np.any(k < 1):
        raise EstimatorError("Jump bounds need rows at dyadic spacing")

    B = d * (t.q - 1.0)
    jumps = -np.diff(t.ln_S)
    bound = k * B * LN2
    lower = np.minimum(0.0, bound)
    upper = np.maximum(0.0, bound)
    excess = np.maximum(lower - jumps, jumps - upper)

    bad = np.flatnonzero(excess > tol)
    violations = [(int(i), float(jumps[i]), float(lower[i]), float(upper[i])) for i in bad]
    return JumpDiagnostics(
        q=t.q,
        B=B,
        observed_A=_largest_wrong_way_move(t.ln_S, t.q),
        max_violation=float(max(np.max(excess), 0.0)),
        violations=violations,
    )


def _largest_wrong_way_move(ln_S: np.ndarray, q: float) -> float:
    """Largest rise (q > 1) or fall (q < 1) of ln S as eps shrinks."""
    values = ln_S if q > 1 else -ln_S
    running_min = np.minimum.accumulate(values)
    return float(max(np.max(values - running_min), 0.0))


def _log_power_sum(masses: np.ndarray, q: float) -> float:
    positive = masses[masses > 0]
    if positive.size == 0:
        raise DomainError("Measure has no mass")
    return math.log(math.fsum(positive ** q))
