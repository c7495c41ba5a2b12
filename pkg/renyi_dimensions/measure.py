"""
Dyadic cascade measures on [0, 1] and finite atomic measures.

A CascadeMeasure splits the mass of every level-(n-1) dyadic cell between its
halves: the left half keeps the fraction (1 - omega_n), the right half gets
omega_n. Each omega_n in [0, 1/2] is chosen so that

    ln(omega_n^q + (1 - omega_n)^q) = (1 - q) ln(2) a_n

which makes ln S(2^-n) = (1 - q) ln(2) (a_1 + ... + a_n) exactly.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy import optimize

from .exceptions import DomainError, ResourceLimitError
from .profiles import WeightProfile

logger = logging.getLogger(__name__)

OMEGA_XTOL = 1e-300
OMEGA_MAXITER = 2000
OMEGA_CHECK_TOL = 1e-12
DEFAULT_CDF_TOL = 1e-12
MAX_ENUMERATION_DEPTH = 24
DEFAULT_ATOM_CAP = 2 ** 22
MERGE_TOL = 1e-12
LN2 = math.log(2.0)


def check_exponent(q: float, name: str = "q") -> float:
    """Validate a Renyi exponent: positive and different from 1."""
    q = float(q)
    if not (q > 0) or q == 1 or math.isinf(q):
        raise DomainError(f"{name} must be positive and different from 1, got {q}")
    return q


@lru_cache(maxsize=1024)
def solve_omega(q: float, a: float) -> float:
    """
    Find omega in [0, 1/2] with ln(omega^q + (1-omega)^q) = (1-q) ln(2) a.

    The left-hand side is strictly monotone on [0, 1/2] for both q < 1 and
    q > 1, so bisection on that bracket always converges.

    Raises:
        DomainError: If q is not a valid exponent or a lies outside [0, 1]
    """
    q = check_exponent(q)
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"Profile value must satisfy 0 <= a <= 1, got {a}")
    if a == 0.0:
        return 0.0
    if a == 1.0:
        return 0.5

    target = (1.0 - q) * LN2 * a

    def objective(omega):
        return math.log(omega ** q + (1.0 - omega) ** q) - target

    omega = optimize.bisect(objective, 0.0, 0.5, xtol=OMEGA_XTOL, maxiter=OMEGA_MAXITER)
    if abs(objective(omega)) > OMEGA_CHECK_TOL:
        raise DomainError(f"Could not solve for omega at q={q}, a={a}")
    return omega


@dataclass(frozen=True, eq=False)
class CascadeMeasure:
    """
    A dyadic multiplicative cascade of finite depth.

    ``omegas[n-1]`` and ``a_values[n-1]`` belong to level n. Both arrays are
    read-only.
    """

    build_q: float
    depth: int
    omegas: np.ndarray
    a_values: np.ndarray
    profile: WeightProfile

    def level_masses(self, n: int) -> np.ndarray:
        """Masses of the 2^n level-n cells, left to right."""
        if not 0 <= n <= self.depth:
            raise DomainError(f"Level {n} outside 0..{self.depth}")
        if n > MAX_ENUMERATION_DEPTH:
            raise ResourceLimitError(
                f"Level {n} has 2^{n} cells; enumeration is limited to level "
                f"{MAX_ENUMERATION_DEPTH}. Use a coarser depth."
            )
        masses = np.ones(1)
        for omega in self.omegas[:n]:
            masses = np.column_stack((masses * (1.0 - omega), masses * omega)).ravel()
        return masses


def build_cascade(profile: WeightProfile, q: float, depth: int) -> CascadeMeasure:
    """
    Build the cascade measure whose level-n splitting weight is solve_omega(q, a_n).

    Raises:
        DomainError: If depth < 1, the profile is shorter than depth, or the
            solver rejects (q, a_n)
    """
    q = check_exponent(q)
    if depth < 1:
        raise DomainError(f"Cascade depth must be at least 1, got {depth}")
    if profile.length < depth:
        raise DomainError(f"Profile has {profile.length} terms, depth {depth} requested")

    omegas = np.empty(depth)
    a_values = np.empty(depth)
    for run in profile.truncated(depth).runs:
        omegas[run.first - 1:run.last] = solve_omega(q, float(run.value))
        a_values[run.first - 1:run.last] = float(run.value)
    omegas.setflags(write=False)
    a_values.setflags(write=False)

    logger.debug("Built cascade: q=%s depth=%d runs=%d", q, depth, len(profile.runs))
    return CascadeMeasure(q, depth, omegas, a_values, profile)


def cdf_with_residual(m: CascadeMeasure, x: float,
                      tol: float = DEFAULT_CDF_TOL) -> Tuple[float, float]:
    """
    Evaluate F(x) = mu([0, x)) by descending the dyadic tree.

    The descent stops at a node whose left endpoint is x (exact answer), at a
    node lighter than ``tol``, or at the deepest level. Inside the final node
    the mass is spread linearly and the node mass is returned as the residual
    bound.

    Returns:
        (value, residual) with |value - F(x)| <= residual
    """
    if not tol > 0:
        raise DomainError(f"cdf tolerance must be positive, got {tol}")
    if x <= 0.0:
        return 0.0, 0.0
    if x >= 1.0:
        return 1.0, 0.0

    lo, width, mass, acc = 0.0, 1.0, 1.0, 0.0
    omegas = m.omegas
    for level in range(m.depth):
        if x == lo:
            return acc, 0.0
        if mass < tol:
            break
        omega = float(omegas[level])
        width *= 0.5
        left = mass * (1.0 - omega)
        if x >= lo + width:
            acc += left
            lo += width
            mass *= omega
        else:
            mass = left
    if x == lo:
        return acc, 0.0
    return acc + mass * (x - lo) / width, mass


def cdf(m: CascadeMeasure, x: float, tol: float = DEFAULT_CDF_TOL) -> float:
    """F(x) within ``tol`` (or within the mass of a deepest-level cell)."""
    value, _ = cdf_with_residual(m, x, tol)
    return min(max(value, 0.0), 1.0)


def interval_mass(m: CascadeMeasure, a: float, b: float,
                  tol: float = DEFAULT_CDF_TOL) -> float:
    """mu([a, b)) = F(b) - F(a)."""
    if a > b:
        raise DomainError(f"Interval endpoints out of order: [{a}, {b})")
    if a == b:
        return 0.0
    return max(cdf(m, b, tol) - cdf(m, a, tol), 0.0)


@dataclass(frozen=True, eq=False)
class DiscretizedMeasure:
    """Finitely many weighted point masses at strictly increasing positions."""

    positions: np.ndarray
    weights: np.ndarray
    resolution: float
    total_mass: float

    def __post_init__(self):
        if self.positions.shape != self.weights.shape or self.positions.ndim != 1:
            raise DomainError("positions and weights must be 1-D arrays of equal length")
        if self.positions.size == 0:
            raise DomainError("A discretized measure needs at least one atom")
        if np.any(np.diff(self.positions) <= 0):
            raise DomainError("Atom positions must be strictly increasing")
        if np.any(self.weights < 0):
            raise DomainError("Atom weights must be nonnegative")
        if not self.resolution > 0:
            raise DomainError(f"Resolution must be positive, got {self.resolution}")
        drift = abs(math.fsum(self.weights) - self.total_mass)
        if drift > 1e-12 * max(1.0, self.total_mass):
            raise DomainError(f"Atom weights miss the stated total mass by {drift:.3e}")

    @classmethod
    def from_atoms(cls, atoms: Iterable[Tuple[float, float]],
                   resolution: float = 1.0) -> "DiscretizedMeasure":
        """Build from (position, weight) pairs in any order."""
        pairs = sorted((float(p), float(w)) for p, w in atoms)
        positions = np.array([p for p, _ in pairs])
        weights = np.array([w for _, w in pairs])
        return cls(positions, weights, float(resolution), math.fsum(weights))

    @classmethod
    def dirac(cls, position: float = 0.0, weight: float = 1.0,
              resolution: float = 1.0) -> "DiscretizedMeasure":
        return cls.from_atoms([(position, weight)], resolution)

    def __len__(self) -> int:
        return int(self.positions.size)

    @property
    def atoms(self) -> list:
        return list(zip(self.positions.tolist(), self.weights.tolist()))


def discretize(m: CascadeMeasure, depth: int) -> DiscretizedMeasure:
    """
    Replace every level-``depth`` cell by an atom at its left endpoint.

    Raises:
        DomainError: If depth is outside 1..m.depth
        ResourceLimitError: If 2^depth atoms exceed the enumeration limit
    """
    if not 1 <= depth <= m.depth:
        raise DomainError(
            f"Discretization depth {depth} outside 1..{m.depth}; "
            f"cell weights below the build depth are undefined"
        )
    weights = m.level_masses(depth)
    resolution = 2.0 ** -depth
    positions = np.arange(weights.size) * resolution
    return DiscretizedMeasure(positions, weights, resolution, 1.0)


def convolve(m1: DiscretizedMeasure, m2: DiscretizedMeasure,
             atom_cap: int = DEFAULT_ATOM_CAP) -> DiscretizedMeasure:
    """
    The convolution of two atomic measures.

    Atoms land on all pairwise position sums with product weights; sums
    closer than 1e-12 are merged. Two measures living on a common lattice
    are convolved as dense weight vectors.

    Raises:
        ResourceLimitError: If the output would exceed ``atom_cap`` atoms
    """
    resolution = max(m1.resolution, m2.resolution)
    total = m1.total_mass * m2.total_mass

    lattice = _lattice_indices(m1, resolution), _lattice_indices(m2, resolution)
    if lattice[0] is not None and lattice[1] is not None:
        k1, k2 = lattice
        size = int(k1[-1] + k2[-1]) + 1
        if size <= atom_cap:
            dense1 = np.zeros(int(k1[-1]) + 1)
            dense2 = np.zeros(int(k2[-1]) + 1)
            dense1[k1] = m1.weights
            dense2[k2] = m2.weights
            weights = np.convolve(dense1, dense2)
            # lattice points that are no pairwise sum carry no atom
            occupied1 = np.zeros_like(dense1)
            occupied2 = np.zeros_like(dense2)
            occupied1[k1] = 1.0
            occupied2[k2] = 1.0
            reached = np.flatnonzero(np.convolve(occupied1, occupied2) > 0.5)
            origin = m1.positions[0] + m2.positions[0]
            positions = origin + reached * resolution
            return DiscretizedMeasure(positions, weights[reached], resolution, total)

    pairs = len(m1) * len(m2)
    if pairs > atom_cap:
        raise ResourceLimitError(
            f"Convolution would form {pairs} atoms (cap {atom_cap}); "
            f"discretize at a coarser depth"
        )
    sums = np.add.outer(m1.positions, m2.positions).ravel()
    products = np.multiply.outer(m1.weights, m2.weights).ravel()
    order = np.argsort(sums, kind="stable")
    sums, products = sums[order], products[order]
    group = np.concatenate(([0], np.cumsum(np.diff(sums) > MERGE_TOL)))
    weights = np.bincount(group, weights=products)
    positions = sums[np.concatenate(([0], np.flatnonzero(np.diff(group)) + 1))]
    return DiscretizedMeasure(positions, weights, resolution, total)


def _lattice_indices(dm: DiscretizedMeasure, spacing: float) -> Optional[np.ndarray]:
    """Integer offsets of the atoms on a lattice of the given spacing, if they fit."""
    offsets = (dm.positions - dm.positions[0]) / spacing
    rounded = np.rint(offsets)
    if np.max(np.abs(offsets - rounded)) > 1e-9:
        return None
    return rounded.astype(np.int64)
