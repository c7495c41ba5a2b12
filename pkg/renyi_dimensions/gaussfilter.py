"""
Gaussian-filtered L^q norms of measures on the line.

I(eps) = integral of (g_eps * mu)(x)^q dx, where g is the standard normal
density and g_eps(x) = g(x / eps) / eps. Up to explicit envelope constants C,
eps^(q-1) I(eps) / S(eps) stays in [1/C, C], so the filtered norm and the
partition function share their scaling exponents.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate

from .exceptions import (
    DomainError,
    InvariantViolationError,
    PrecisionGuardError,
    QuadratureError,
)
from .measure import CascadeMeasure, DiscretizedMeasure, check_exponent, discretize
from .partition import RESOLUTION_GUARD, partition_bucket

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
# contributions beyond 16 standard deviations are below 1e-55 of the peak
DENSITY_CUTOFF = 16.0
CHUNK_ELEMENTS = 2 ** 21
MAX_CHUNK_POINTS = 1024
MIN_ENVELOPE_RADIUS = 8
MONOTONE_TOL = 1e-8


def _g(x):
    return np.exp(-0.5 * np.square(x)) / SQRT_2PI


class GaussianKernel:
    """The standard Gaussian and its dilations g_eps."""

    @staticmethod
    def density(x, eps: float = 1.0):
        if not eps > 0:
            raise DomainError(f"eps must be positive, got {eps}")
        return _g(np.asarray(x, dtype=float) / eps) / eps

    @classmethod
    def check_normalization(cls, eps: float = 1.0, tol: float = 1e-10) -> float:
        """
        Integrate g_eps over the line and return |integral - 1|.

        Raises:
            InvariantViolationError: If the deviation exceeds ``tol``
        """
        half = DENSITY_CUTOFF * eps
        total, _ = integrate.quad(cls.density, -half, half, args=(eps,),
                                  points=[0.0], epsabs=1e-14, epsrel=1e-13, limit=200)
        error = abs(total - 1.0)
        if error > tol:
            raise InvariantViolationError(f"Integral of g_eps is {total!r} at eps={eps}")
        return error

    @classmethod
    def check_semigroup(cls, eps: float, eta: float, grid: Sequence[float],
                        tol: float = 1e-8) -> float:
        """
        Compare (g_eps * g_eta)(x) with g_sqrt(eps^2 + eta^2)(x) on ``grid``.

        The convolution integral is evaluated by adaptive quadrature around
        the peak of the integrand.

        Returns:
            The largest absolute pointwise deviation
        """
        combined = math.hypot(eps, eta)
        width = eps * eta / combined
        worst = 0.0
        for x in grid:
            center = x * eta ** 2 / combined ** 2
            value, _ = integrate.quad(
                lambda y: cls.density(x - y, eps) * cls.density(y, eta),
                center - DENSITY_CUTOFF * width, center + DENSITY_CUTOFF * width,
                points=[center], epsabs=1e-14, epsrel=1e-12, limit=200,
            )
            worst = max(worst, abs(value - float(cls.density(x, combined))))
        if worst > tol:
            raise InvariantViolationError(
                f"Semigroup identity off by {worst:.3e} for eps={eps}, eta={eta}"
            )
        return worst


def gaussian_lq_closed_form(q: float, eps: float = 1.0) -> float:
    """||g_eps||_q^q = eps^(1-q) (2 pi)^((1-q)/2) q^(-1/2), the norm of a unit point mass."""
    q = check_exponent(q)
    return eps ** (1.0 - q) * (2.0 * math.pi) ** ((1.0 - q) / 2.0) / math.sqrt(q)


@dataclass(frozen=True)
class EnvelopeConstants:
    """
    Lower and upper envelopes of g over the unit windows n + (-1, 1).

    ``gamma[i]`` and ``Gamma[i]`` belong to n = i - radius. The Gamma norms
    include a geometric bound on the truncated tail; the gamma norms omit
    the tail, which only enlarges C.
    """

    q: float
    radius: int
    gamma: np.ndarray
    Gamma: np.ndarray
    gamma_l1: float
    gamma_lq: float
    Gamma_l1: float
    Gamma_lq: float
    C: float

    @property
    def lower(self) -> float:
        return 1.0 / self.C

    @property
    def upper(self) -> float:
        return self.C

    def contains(self, ratio: float) -> bool:
        return self.lower <= ratio <= self.upper


def envelope_constants(q: float, radius: int = 12) -> EnvelopeConstants:
    """
    Build gamma_n = inf g and Gamma_n = sup g over n + (-1, 1) for |n| <= radius.

    gamma_n = g(|n| + 1) and Gamma_n = g(max(|n| - 1, 0)). The ratio bound
    constant is max(||Gamma||_1^q, ||gamma||_q^-q) for q > 1 and
    max(||Gamma||_q^q, ||gamma||_1^-q) for q < 1, with ||.||_q^q meaning the
    sum of q-th powers.

    Raises:
        DomainError: If q is invalid or radius < 8
    """
    q = check_exponent(q)
    if radius < MIN_ENVELOPE_RADIUS:
        raise DomainError(f"Envelope radius must be at least {MIN_ENVELOPE_RADIUS}, got {radius}")

    n = np.abs(np.arange(-radius, radius + 1))
    gamma = _g(n + 1.0)
    Gamma = _g(np.maximum(n - 1.0, 0.0))

    def tail(power):
        # sum over |n| > radius of Gamma_n^power, bounded by a geometric series
        head = float(_g(radius - 1.0)) ** power
        step = (float(_g(radius)) / float(_g(radius - 1.0))) ** power
        return 2.0 * head / (1.0 - step)

    gamma_l1 = math.fsum(gamma)
    gamma_lq = math.fsum(gamma ** q)
    Gamma_l1 = math.fsum(Gamma) + tail(1.0)
    Gamma_lq = math.fsum(Gamma ** q) + tail(q)

    if q > 1:
        C = max(Gamma_l1 ** q, 1.0 / gamma_lq)
    else:
        C = max(Gamma_lq, gamma_l1 ** -q)

    gamma.setflags(write=False)
    Gamma.setflags(write=False)
    return EnvelopeConstants(q, radius, gamma, Gamma, gamma_l1, gamma_lq,
                             Gamma_l1, Gamma_lq, C)


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Simpson settings for lq_norm_q."""

    rtol: float = 1e-6
    max_halvings: int = 6
    step_fraction: float = 1 / 8
    pad_sigmas: float = 10.0

    @classmethod
    def from_settings(cls, settings) -> "QuadratureSpec":
        return cls(rtol=settings.quad_rtol, max_halvings=settings.quad_max_halvings)


def filtered_density(dm: DiscretizedMeasure, eps: float, x):
    """
    (g_eps * mu)(x) = sum_i w_i g_eps(x - x_i) for a scalar or an array of points.

    Atoms farther than 16 eps from every evaluation point are skipped.
    """
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    points = np.asarray(x, dtype=float)
    flat = points.ravel()

    keep = dm.weights > 0
    positions, weights = dm.positions[keep], dm.weights[keep]
    cut = DENSITY_CUTOFF * eps

    order = np.argsort(flat, kind="stable")
    result = np.zeros(flat.size)
    start = 0
    while start < flat.size:
        lo_x = flat[order[start]]
        lo = np.searchsorted(positions, lo_x - cut, side="left")
        window = int(np.searchsorted(positions, lo_x + cut, side="right")) - lo
        chunk = min(MAX_CHUNK_POINTS, max(1, CHUNK_ELEMENTS // max(1, window)))
        stop = min(flat.size, start + chunk)
        idx = order[start:stop]
        hi = np.searchsorted(positions, flat[idx[-1]] + cut, side="right")
        if hi > lo:
            diff = (flat[idx][:, None] - positions[None, lo:hi]) / eps
            result[idx] = _g(diff) @ weights[lo:hi] / eps
        start = stop

    if points.ndim == 0:
        return float(result[0])
    return result.reshape(points.shape)


def lq_norm_q(dm: DiscretizedMeasure, eps: float, q: float,
              quad: Optional[QuadratureSpec] = None) -> float:
    """
    I = integral of (g_eps * mu)^q over [min atom - pad, max atom + pad].

    The pad is 10 eps (10 eps / sqrt(q) when q < 1, where the tails of the
    q-th power decay more slowly). Composite Simpson starts at step
    eps * step_fraction and halves the step until two successive estimates
    agree to ``rtol``.

    Raises:
        PrecisionGuardError: If eps < 4 * dm.resolution
        QuadratureError: If the estimates do not settle within max_halvings
    """
    quad = quad or QuadratureSpec()
    q = check_exponent(q)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if eps < RESOLUTION_GUARD * dm.resolution * (1.0 - 1e-12):
        raise PrecisionGuardError(
            f"eps={eps:.6g} is finer than {RESOLUTION_GUARD:g} x resolution "
            f"({dm.resolution:.6g})"
        )

    pad = quad.pad_sigmas * eps / math.sqrt(min(q, 1.0))
    lo = float(dm.positions[0]) - pad
    hi = float(dm.positions[-1]) + pad
    intervals = 2 * math.ceil((hi - lo) / (eps * quad.step_fraction) / 2)

    grid = np.linspace(lo, hi, intervals + 1)
    values = filtered_density(dm, eps, grid) ** q
    estimates = [integrate.simpson(values, dx=(hi - lo) / intervals)]

    for halving in range(1, quad.max_halvings + 1):
        midpoints = 0.5 * (grid[:-1] + grid[1:])
        refined = np.empty(2 * values.size - 1)
        refined[0::2] = values
        refined[1::2] = filtered_density(dm, eps, midpoints) ** q
        merged = np.empty(refined.size)
        merged[0::2] = grid
        merged[1::2] = midpoints
        grid, values = merged, refined
        intervals *= 2
        estimates.append(integrate.simpson(values, dx=(hi - lo) / intervals))

        previous, current = estimates[-2], estimates[-1]
        if abs(current - previous) <= quad.rtol * abs(current):
            if halving == quad.max_halvings:
                logger.warning("Quadrature at eps=%.3g settled only on the last halving", eps)
            logger.debug("Quadrature at eps=%.3g settled after %d halvings", eps, halving)
            return float(current)

    raise QuadratureError(
        f"Quadrature at eps={eps:.6g}, q={q:g} did not settle to rtol={quad.rtol:g} "
        f"after {quad.max_halvings} halvings",
        estimates,
    )


@dataclass
class RatioRow:
    eps: float
    I: float
    ln_S: float
    ratio: float

    @property
    def ln_eps(self) -> float:
        return math.log(self.eps)

    @property
    def ln_ratio(self) -> float:
        return math.log(self.ratio)


@dataclass
class RatioReport:
    """eps^(q-1) I(eps) / S(eps) per scale, against the envelope bound [1/C, C]."""

    q: float
    depth: int
    envelope: EnvelopeConstants
    rows: List[RatioRow] = field(default_factory=list)

    @property
    def violations(self) -> List[RatioRow]:
        return [row for row in self.rows if not self.envelope.contains(row.ratio)]

    @property
    def passed(self) -> bool:
        return not self.violations

    def csv_rows(self) -> List[List[float]]:
        """Rows (ln_eps, ln_ratio, lower_bound, upper_bound), bounds on the log scale."""
        lower, upper = math.log(self.envelope.lower), math.log(self.envelope.upper)
        return [[row.ln_eps, row.ln_ratio, lower, upper] for row in self.rows]

    def raise_for_violation(self) -> None:
        bad = self.violations
        if bad:
            raise InvariantViolationError(
                f"Ratio {bad[0].ratio:.6g} at eps={bad[0].eps:.6g} outside "
                f"[{self.envelope.lower:.6g}, {self.envelope.upper:.6g}]"
            )


def check_ratio_bound(m: CascadeMeasure, q: float, eps_list: Sequence[float], depth: int,
                      quad: Optional[QuadratureSpec] = None,
                      radius: int = 12) -> RatioReport:
    """
    Evaluate eps^(q-1) I(eps) / S(eps) on the depth-``depth`` discretization of m.

    I and S come from the same atomic measure; at dyadic eps the bucketed S
    coincides with the cascade's partition function.
    """
    q = check_exponent(q)
    dm = discretize(m, depth)
    report = RatioReport(q, depth, envelope_constants(q, radius))
    for eps in sorted(eps_list, reverse=True):
        I = lq_norm_q(dm, eps, q, quad)
        ln_S = partition_bucket(dm, eps, q)
        ratio = math.exp((q - 1.0) * math.log(eps) + math.log(I) - ln_S)
        report.rows.append(RatioRow(float(eps), I, ln_S, ratio))
        logger.debug("eps=%.4g I=%.6g lnS=%.6g ratio=%.6g", eps, I, ln_S, ratio)
    return report


@dataclass
class MonotonicityReport:
    """||g_eps * mu||_q across an increasing eps grid."""

    q: float
    eps: List[float]
    norms: List[float]
    tol: float = MONOTONE_TOL

    @property
    def violations(self) -> List[int]:
        """Indices i where the step from eps[i] to eps[i+1] goes the wrong way."""
        bad = []
        for i in range(len(self.norms) - 1):
            a, b = self.norms[i], self.norms[i + 1]
            if self.q > 1 and b > a * (1.0 + self.tol):
                bad.append(i)
            elif self.q < 1 and b < a * (1.0 - self.tol):
                bad.append(i)
        return bad

    @property
    def passed(self) -> bool:
        return not self.violations

    def raise_for_violation(self) -> None:
        bad = self.violations
        if bad:
            i = bad[0]
            raise InvariantViolationError(
                f"Filtered norm moves the wrong way between eps={self.eps[i]:.6g} "
                f"({self.norms[i]:.17g}) and eps={self.eps[i + 1]:.6g} ({self.norms[i + 1]:.17g})"
            )


def check_monotonicity(dm: DiscretizedMeasure, q: float, eps_grid: Sequence[float],
                       quad: Optional[QuadratureSpec] = None,
                       tol: float = MONOTONE_TOL) -> MonotonicityReport:
    """
    ||g_eps * mu||_q must not increase with eps for q > 1 and not decrease for q < 1.

    Raises:
        DomainError: If eps_grid is not strictly increasing
    """
    q = check_exponent(q)
    eps_grid = [float(e) for e in eps_grid]
    if any(b <= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise DomainError("eps_grid must be strictly increasing")
    norms = [lq_norm_q(dm, eps, q, quad) ** (1.0 / q) for eps in eps_grid]
    return MonotonicityReport(q, eps_grid, norms, tol)
