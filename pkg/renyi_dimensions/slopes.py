"""
Dimension estimators over partition tables.

Throughout, t = -ln eps >= 0 and rho(t) = ln S(e^-t). Raw slopes are slopes of
ln S against ln eps; dividing by (q - 1) turns them into dimensions. For
q > 1 raw slopes are nonnegative.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import EstimatorSettings
from .exceptions import DomainError, EstimatorError, InvariantViolationError, ResourceLimitError
from .gaussfilter import envelope_constants
from .measure import CascadeMeasure, check_exponent, convolve, discretize
from .partition import PartitionTable, bucket_table, build_table, check_jump_bounds

logger = logging.getLogger(__name__)

LSQ_VARIANTS = (1, 2, 3, 4)
ROW_MATCH_TOL = 1e-9
GAP_RATIO_LIMIT = 10.0
ZERO_GAP = 1e-9
MAX_CONVOLUTION_DEPTH = 12
BISECTION_STEPS = 60


@dataclass(frozen=True)
class SlopeFit:
    """One slope estimate and the window it was computed on."""

    method: str
    q: float
    slope: float
    window: Dict[str, float] = field(default_factory=dict)
    intercept: Optional[float] = None

    @property
    def dimension(self) -> float:
        """The slope divided by (q - 1)."""
        return self.slope / (self.q - 1.0)


@dataclass
class DimensionReport:
    """
    Finite-depth proxies for the four dimensions of a measure at one q.

    D_minus/D_plus come from secants through the origin, D_mm/D_pp from long
    secants between any two tail rows, bestfit_* from the discrete best-fit
    slope curve. ``diagnostics`` holds the observed constants and windows.
    """

    q: float
    depth: int
    D_minus: float
    D_plus: float
    D_mm: float
    D_pp: float
    bestfit_liminf: float
    bestfit_limsup: float
    diagnostics: Dict[str, float] = field(default_factory=dict)
    fits: List[SlopeFit] = field(default_factory=list)
    settings: EstimatorSettings = field(default_factory=EstimatorSettings)

    def ordering_gaps(self, d: int = 1) -> List[Tuple[str, float]]:
        """How far each link of 0 <= D_mm <= D_minus <= D_plus <= D_pp <= d is broken."""
        chain = [("0", 0.0), ("D_mm", self.D_mm), ("D_minus", self.D_minus),
                 ("D_plus", self.D_plus), ("D_pp", self.D_pp), ("d", float(d))]
        return [(f"{a}<={b}", x - y) for (a, x), (b, y) in zip(chain, chain[1:])]

    @property
    def passed(self) -> bool:
        tol = self.settings.ordering_tolerance
        return all(gap <= tol for _, gap in self.ordering_gaps())

    def raise_for_violation(self) -> None:
        tol = self.settings.ordering_tolerance
        for link, gap in self.ordering_gaps():
            if gap > tol:
                raise InvariantViolationError(
                    f"Dimension ordering {link} fails by {gap:.6g} (tolerance {tol:g})"
                )

    def to_entries(self) -> Dict[str, object]:
        """Flat key/value view, including the settings used."""
        entries: Dict[str, object] = {
            "q": self.q,
            "depth": self.depth,
            "D_minus": self.D_minus,
            "D_plus": self.D_plus,
            "D_mm": self.D_mm,
            "D_pp": self.D_pp,
            "bestfit_liminf": self.bestfit_liminf,
            "bestfit_limsup": self.bestfit_limsup,
        }
        for key, value in self.diagnostics.items():
            entries[f"diag.{key}"] = value
        for key, value in self.settings.to_entries().items():
            entries[f"setting.{key}"] = value
        return entries


# -- secants ---------------------------------------------------------------

def secant_estimate(t: PartitionTable, n: int, anchor: Optional[int] = None) -> float:
    """
    (1/(q-1)) ln S / ln eps at row n.

    With ``anchor`` the secant runs from row ``anchor`` instead of from the
    origin: (ln S_n - ln S_anchor) / (ln eps_n - ln eps_anchor) / (q - 1).

    Raises:
        EstimatorError: If the row is missing or the secant has zero length
    """
    _check_row(t, n)
    if anchor is None:
        run, rise = t.ln_eps[n], t.ln_S[n]
    else:
        _check_row(t, anchor)
        run, rise = t.ln_eps[n] - t.ln_eps[anchor], t.ln_S[n] - t.ln_S[anchor]
    if run == 0:
        raise EstimatorError(f"Secant at row {n} has zero length on the ln eps axis")
    return float(rise / run / (t.q - 1.0))


def secant_curve(t: PartitionTable) -> Tuple[np.ndarray, np.ndarray]:
    """(rows, secant values) for every row with ln eps != 0."""
    rows = np.flatnonzero(t.ln_eps != 0)
    return rows, t.ln_S[rows] / t.ln_eps[rows] / (t.q - 1.0)


def tail_extremes(values: np.ndarray, tail_fraction: float) -> Tuple[float, float]:
    """(min, max) over the last ``tail_fraction`` of the values."""
    if values.size == 0:
        raise EstimatorError("No values to take a tail over")
    if not 0 < tail_fraction <= 1:
        raise DomainError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    start = min(values.size - 1, int(math.floor(values.size * (1.0 - tail_fraction))))
    tail = values[start:]
    return float(np.min(tail)), float(np.max(tail))


def sequence_secants(t: PartitionTable, eps_seq: Optional[Sequence[float]] = None, *,
                     ln_eps: Optional[Sequence[float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Map each eps to the nearest table row on the ln scale and return
    (rows, secant values), dropping repeated rows and the eps = 1 row.

    Scales too fine for a float (4^-k for large k) can be passed as ``ln_eps``.
    """
    if len(t) < 2:
        raise EstimatorError("Need at least 2 rows")
    if (eps_seq is None) == (ln_eps is None):
        raise DomainError("Pass exactly one of eps_seq and ln_eps")
    scale = t.scale
    if ln_eps is None:
        targets = -np.log(np.asarray(eps_seq, dtype=float))
    else:
        targets = -np.asarray(ln_eps, dtype=float)
    if np.any(np.diff(targets) <= 0):
        raise DomainError("eps_seq must be strictly decreasing")
    right = np.clip(np.searchsorted(scale, targets), 1, scale.size - 1)
    left = right - 1
    closer_left = np.abs(scale[left] - targets) <= np.abs(scale[right] - targets)
    rows = np.where(closer_left, left, right)

    keep = np.concatenate(([True], np.diff(rows) != 0)) & (t.ln_eps[rows] != 0)
    rows = rows[keep]
    return rows, t.ln_S[rows] / t.ln_eps[rows] / (t.q - 1.0)


def sequence_estimate(t: PartitionTable, eps_seq: Optional[Sequence[float]] = None,
                      tail_terms: int = 5, *,
                      ln_eps: Optional[Sequence[float]] = None) -> Tuple[float, float]:
    """
    (liminf, limsup) of the secant along a subsequence, over its last ``tail_terms`` terms.

    The subsequence only reproduces the accumulation points of the full net
    when ln(eps_{n+1}) / ln(eps_n) tends to 1; a tail ratio far from 1 is
    logged as a warning but not refused.

    Raises:
        EstimatorError: If fewer than 3 distinct rows are hit
    """
    rows, values = sequence_secants(t, eps_seq, ln_eps=ln_eps)
    if rows.size < 3:
        raise EstimatorError(f"Subsequence hits only {rows.size} usable rows; need 3")

    hit = t.ln_eps[rows]
    ratio = float(hit[-1] / hit[-2])
    if abs(ratio - 1.0) > 0.1:
        logger.warning(
            "Subsequence log-ratio is %.4g near the end; its accumulation points "
            "may differ from the full net", ratio
        )
    tail = values[-min(tail_terms, values.size):]
    return float(np.min(tail)), float(np.max(tail))


# -- least squares ---------------------------------------------------------

def lsq_continuous(t: PartitionTable, x: float, variant: int = 1) -> float:
    """
    Slope of the least-squares line to rho over the window [t_0, t_0 + x].

    rho is interpolated linearly between rows, so every integrand is a
    polynomial of degree <= 2 on each segment and per-segment Simpson sums
    are exact. Variant 1 evaluates (6/x^3) int (2u - x) rho du; variant 2
    the covariance-over-variance form. The result is reported against ln eps.

    Raises:
        EstimatorError: If x <= 0 or the window leaves the table
    """
    if variant not in (1, 2):
        raise DomainError(f"lsq_continuous variant must be 1 or 2, got {variant}")
    scale = t.scale
    origin = scale[0]
    if not x > 0:
        raise EstimatorError(f"Window length must be positive, got {x}")
    if origin + x > scale[-1] * (1.0 + 1e-12) + 1e-12:
        raise EstimatorError(
            f"Window [0, {x:.6g}] extends past the last table row at {scale[-1] - origin:.6g}"
        )

    u_rows = scale - origin
    inner = u_rows[(u_rows > 0) & (u_rows < x)]
    nodes = np.concatenate(([0.0], inner, [x]))
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    widths = np.diff(nodes)
    rho_nodes = np.interp(nodes, u_rows, t.ln_S)
    rho_mids = np.interp(mids, u_rows, t.ln_S)

    def integral(f_nodes, f_mids):
        return float(np.sum(widths / 6.0 * (f_nodes[:-1] + 4.0 * f_mids + f_nodes[1:])))

    if variant == 1:
        t_slope = 6.0 / x ** 3 * integral((2 * nodes - x) * rho_nodes, (2 * mids - x) * rho_mids)
    else:
        mean_rho = integral(rho_nodes, rho_mids) / x
        cross = integral(nodes * rho_nodes, mids * rho_mids) - x * (x / 2.0) * mean_rho
        spread = x ** 3 / 3.0 - x * (x / 2.0) ** 2
        t_slope = cross / spread
    return -t_slope


def grid_values(t: PartitionTable, n: int, v: float = 2.0) -> np.ndarray:
    """rho_k = ln S(v^-k) for k = 0..n-1, read off the table."""
    if not v > 1:
        raise DomainError(f"Grid base must exceed 1, got {v}")
    targets = np.arange(n) * math.log(v)
    scale = t.scale
    idx = np.clip(np.searchsorted(scale, targets - ROW_MATCH_TOL), 0, scale.size - 1)
    missing = np.abs(scale[idx] - targets) > ROW_MATCH_TOL * np.maximum(1.0, targets)
    if np.any(missing):
        k = int(np.flatnonzero(missing)[0])
        raise EstimatorError(f"Table has no row at eps = {v:g}^-{k}")
    return t.ln_S[idx]


def lsq_discrete(t: PartitionTable, n: int, v: float = 2.0, variant: int = 1) -> float:
    """
    Least-squares slope of ln S against ln eps over the grid eps = v^-k, k < n.

    Variants 1 and 2 weight rho_k by (2k + 1 - n); variants 3 and 4 use the
    increments rho_k - rho_(k-1) weighted by k(n - k). All four are the same
    number computed along different routes.

    Raises:
        EstimatorError: If n < 2 or a grid row is missing
    """
    if variant not in LSQ_VARIANTS:
        raise DomainError(f"lsq_discrete variant must be one of {LSQ_VARIANTS}, got {variant}")
    if n < 2:
        raise EstimatorError(f"The discrete best fit needs n >= 2, got {n}")
    rho = grid_values(t, n, v)
    ln_v = math.log(v)
    k = np.arange(n, dtype=float)
    cubic = float(n) ** 3 - n

    if variant == 1:
        return float(-6.0 / (cubic * ln_v) * np.dot(2 * k + 1 - n, rho))
    if variant == 2:
        weights = 2 * k + 1 - n
        return float(np.dot(weights, rho) / np.dot(weights, -k * ln_v))

    inner = k[1:] * (n - k[1:])
    steps = np.diff(rho)
    if variant == 3:
        return float(6.0 / (cubic * ln_v) * np.dot(inner, -steps))
    return float(np.dot(inner, steps) / (np.sum(inner) * -ln_v))


def lsq_discrete_curve(t: PartitionTable, v: float = 2.0,
                       n_max: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    m~_n for every n = 2..n_max in one pass.

    Uses sum_k k(n-k) D_k = n P1_n - P2_n with D_k = rho_(k-1) - rho_k and
    running sums P1_n = sum_(k<n) k D_k, P2_n = sum_(k<n) k^2 D_k.

    Returns:
        (n values, slopes)
    """
    ln_v = math.log(v)
    if n_max is None:
        n_max = int(math.floor(t.scale[-1] / ln_v + ROW_MATCH_TOL)) + 1
    if n_max < 2:
        raise EstimatorError("The best-fit curve needs at least 2 grid rows")
    rho = grid_values(t, n_max, v)
    k = np.arange(1, n_max, dtype=float)
    drops = rho[:-1] - rho[1:]
    p1 = np.cumsum(k * drops)
    p2 = np.cumsum(k * k * drops)
    n = np.arange(2, n_max + 1, dtype=float)
    slopes = 6.0 / ((n ** 3 - n) * ln_v) * (n * p1 - p2)
    return n.astype(np.int64), slopes


@dataclass
class GapReport:
    """|m_x - m~_n| at x = n ln v, and whether n |gap| stays bounded."""

    v: float
    n: List[int]
    continuous: List[float]
    discrete: List[float]

    @property
    def gaps(self) -> List[float]:
        return [abs(a - b) for a, b in zip(self.continuous, self.discrete)]

    @property
    def scaled(self) -> List[float]:
        return [g * n for g, n in zip(self.gaps, self.n)]

    @property
    def spread(self) -> float:
        """max / median of n |gap|; 0 when every gap vanishes."""
        scaled = np.asarray(self.scaled)
        if np.max(scaled) <= ZERO_GAP:
            return 0.0
        median = float(np.median(scaled))
        return float(np.max(scaled)) / median if median > 0 else math.inf

    @property
    def passed(self) -> bool:
        return self.spread < GAP_RATIO_LIMIT


def lsq_gap_check(t: PartitionTable, v: float, n_list: Sequence[int]) -> GapReport:
    """Compare the continuous and discrete best-fit slopes over matching windows."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise EstimatorError("lsq_gap_check needs at least 3 increasing window sizes")
    ln_v = math.log(v)
    continuous = [lsq_continuous(t, n * ln_v) for n in n_list]
    discrete = [lsq_discrete(t, n, v) for n in n_list]
    return GapReport(v, n_list, continuous, discrete)


# -- regularity constants --------------------------------------------------

def nearly_lipschitz_constants(t: PartitionTable) -> Tuple[float, float]:
    """
    (A_hat, B) with |rho(x) - rho(y)| <= A_hat + B |x - y| over all row pairs.

    B = |q - 1|; A_hat is the smallest constant that works with it.
    """
    if len(t) < 2:
        raise EstimatorError("Need at least 2 rows")
    B = abs(t.q - 1.0)
    scale, rho = t.scale, t.ln_S
    up = rho - B * scale
    down = rho + B * scale
    rise = np.max(up[1:] - np.minimum.accumulate(up)[:-1])
    fall = np.max(np.maximum.accumulate(down)[:-1] - down[1:])
    return float(max(rise, fall, 0.0)), B


def small_jump_constant(t: PartitionTable) -> float:
    """E = largest |rho_i - rho_j| over row pairs at most ln 2 apart on the ln scale."""
    if len(t) < 2:
        raise EstimatorError("Need at least 2 rows")
    scale, rho = t.scale, t.ln_S
    reach = math.log(2.0) * (1.0 + 1e-12)
    E = 0.0
    offset = 1
    while offset < scale.size:
        close = scale[offset:] - scale[:-offset] <= reach
        if not np.any(close):
            break
        E = max(E, float(np.max(np.abs(rho[offset:] - rho[:-offset])[close])))
        offset += 1
    return E


# -- Matuszewska indices ---------------------------------------------------

@dataclass(frozen=True)
class MatuszewskaWindow:
    L: float
    alpha: float
    beta: float


def _largest_long_secant(u: np.ndarray, y: np.ndarray, L: float) -> float:
    """sup of (y_j - y_i) / (u_j - u_i) over pairs with u_j - u_i >= L."""
    partner = np.searchsorted(u, u - L, side="right") - 1
    valid = partner >= 0
    if not np.any(valid):
        raise EstimatorError(f"No row pair is {L:.6g} apart")
    steps = np.diff(y) / np.diff(u)
    lo, hi = float(np.min(steps)), float(np.max(steps))
    for _ in range(BISECTION_STEPS):
        c = 0.5 * (lo + hi)
        shifted = y - c * u
        best = np.minimum.accumulate(shifted)
        if np.any(shifted[valid] - best[partner[valid]] >= 0):
            lo = c
        else:
            hi = c
        if hi - lo <= 1e-13 * max(1.0, abs(lo)):
            break
    return lo


def matuszewska_estimate(t: PartitionTable, L: float,
                         burn_in: float = 0.1) -> Tuple[float, float]:
    """
    (alpha_hat, beta_hat) for f(x) = S(1/x)^(1/(1-q)) on the ln scale.

    Both are extremes of long-secant slopes of ln f against ln x over pairs
    of rows at least L apart, after dropping the first ``burn_in`` fraction
    of the table.

    Raises:
        EstimatorError: If the remaining span is shorter than 3 L
    """
    if not L > 0:
        raise DomainError(f"Window length must be positive, got {L}")
    if not 0 <= burn_in < 1:
        raise DomainError(f"burn_in must lie in [0, 1), got {burn_in}")
    start = int(math.floor(len(t) * burn_in))
    u = t.scale[start:]
    y = t.ln_S[start:] / (1.0 - t.q)
    if u.size < 2 or u[-1] - u[0] < 3 * L:
        raise EstimatorError(
            f"Table span {u[-1] - u[0] if u.size else 0.0:.6g} after burn-in is shorter than 3L = {3 * L:.6g}"
        )
    alpha = _largest_long_secant(u, y, L)
    beta = -_largest_long_secant(u, -y, L)
    return alpha, beta


def matuszewska_sweep(t: PartitionTable, fractions: Sequence[float],
                      burn_in: float = 0.1) -> List[MatuszewskaWindow]:
    """matuszewska_estimate over L = fraction * span for each fraction, smallest L first."""
    start = int(math.floor(len(t) * burn_in))
    span = float(t.scale[-1] - t.scale[start])
    windows = []
    for fraction in sorted(fractions):
        L = fraction * span
        alpha, beta = matuszewska_estimate(t, L, burn_in)
        windows.append(MatuszewskaWindow(L, alpha, beta))
        logger.debug("Matuszewska window L=%.6g: alpha=%.6g beta=%.6g", L, alpha, beta)
    return windows


# -- aggregates ------------------------------------------------------------

def dimension_report(m: CascadeMeasure, q: Optional[float] = None, depth: Optional[int] = None,
                     settings: Optional[EstimatorSettings] = None) -> DimensionReport:
    """
    Run every estimator on the dyadic table of m and check the ordering.

    Raises:
        DomainError: If depth exceeds m.depth
        InvariantViolationError: If 0 <= D_mm <= D_minus <= D_plus <= D_pp <= 1
            fails beyond settings.ordering_tolerance
    """
    settings = settings or EstimatorSettings()
    q = m.build_q if q is None else check_exponent(q)
    depth = m.depth if depth is None else depth
    if not 2 <= depth <= m.depth:
        raise DomainError(f"Report depth {depth} outside 2..{m.depth}")

    table = build_table(m, depth, q)
    _, secants = secant_curve(table)
    D_minus, D_plus = tail_extremes(secants, settings.tail_fraction)

    windows = matuszewska_sweep(table, settings.matuszewska_windows, settings.matuszewska_burn_in)
    widest = windows[-1]
    D_mm = widest.beta
    D_pp = widest.alpha

    n_values, curve = lsq_discrete_curve(table, settings.grid_base)
    fit_low, fit_high = tail_extremes(curve, settings.tail_fraction)
    bestfit_liminf, bestfit_limsup = sorted((fit_low / (q - 1.0), fit_high / (q - 1.0)))

    jumps = check_jump_bounds(table)
    A_hat, B = nearly_lipschitz_constants(table)
    diagnostics = {
        "A_observed": jumps.observed_A,
        "A_hat": A_hat,
        "B": B,
        "C": envelope_constants(q, settings.envelope_radius).C,
        "E": small_jump_constant(table),
        "matuszewska_L": widest.L,
    }
    fits = [
        SlopeFit("secant", q, float(secants[-1]) * (q - 1.0), {"n": float(depth)}),
        SlopeFit("lsq_discrete_v1", q, float(curve[-1]),
                 {"n": float(n_values[-1]), "v": settings.grid_base}),
        SlopeFit("lsq_continuous", q, lsq_continuous(table, float(table.scale[-1])),
                 {"x": float(table.scale[-1])}),
        SlopeFit("matuszewska_upper", q, D_pp * (q - 1.0), {"L": widest.L}),
        SlopeFit("matuszewska_lower", q, D_mm * (q - 1.0), {"L": widest.L}),
    ]
    report = DimensionReport(q, depth, D_minus, D_plus, D_mm, D_pp,
                             bestfit_liminf, bestfit_limsup, diagnostics, fits, settings)
    report.raise_for_violation()
    return report


def fit_table(t: PartitionTable, settings: Optional[EstimatorSettings] = None) -> List[SlopeFit]:
    """Every slope estimator on an arbitrary table, over its full range."""
    settings = settings or EstimatorSettings()
    last = len(t) - 1
    x = float(t.scale[-1] - t.scale[0])
    fits = [SlopeFit("secant", t.q, secant_estimate(t, last, anchor=0) * (t.q - 1.0),
                     {"n": float(last), "anchor": 0.0})]
    if x > 0:
        fits.append(SlopeFit("lsq_continuous", t.q, lsq_continuous(t, x), {"x": x}))
    try:
        n_values, curve = lsq_discrete_curve(t, settings.grid_base)
        fits.append(SlopeFit("lsq_discrete_v1", t.q, float(curve[-1]),
                             {"n": float(n_values[-1]), "v": settings.grid_base}))
    except EstimatorError as e:
        logger.warning("Skipping discrete best fit: %s", e)
    return fits


@dataclass
class ConvolutionReport:
    """
    Estimated D(mu * nu) at q against the weighted combination of D_r(mu) and D_s(nu).

    Every dimension here is the discrete best-fit slope of a bucketed table,
    standing in for the lower dimension; no liminf of secants is taken. At
    depth <= 12 the comparison is indicative, not a certificate.
    """

    q: float
    r: float
    s: float
    depth: int
    D_conv: float
    D_r: float
    D_s: float
    weight_r: float
    weight_s: float
    tol: float

    @property
    def bound(self) -> float:
        return self.weight_r * self.D_r + self.weight_s * self.D_s

    @property
    def margin(self) -> float:
        return self.D_conv - self.bound

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tol

    def raise_for_violation(self) -> None:
        if not self.passed:
            raise InvariantViolationError(
                f"D(mu*nu) = {self.D_conv:.6g} is below the combined bound "
                f"{self.bound:.6g} by more than {self.tol:g}"
            )


def convolution_bound_check(m1: CascadeMeasure, m2: CascadeMeasure, q: float, r: float,
                            s: float, depth: int, tol: float = 0.05,
                            atom_cap: Optional[int] = None) -> ConvolutionReport:
    """
    Estimate dimensions of mu, nu and mu * nu from bucketed tables and compare.

    Each dimension is the discrete best-fit slope over eps = 2^-k,
    k = 0..depth-2, divided by (exponent - 1).

    Raises:
        DomainError: If 1/q + 1 != 1/r + 1/s or r, s sit on the wrong side of 1
        ResourceLimitError: If depth exceeds 12
    """
    q, r, s = check_exponent(q), check_exponent(r, "r"), check_exponent(s, "s")
    if abs(1 / q + 1 - 1 / r - 1 / s) > 1e-12:
        raise DomainError(f"Exponents must satisfy 1/q + 1 = 1/r + 1/s; got q={q}, r={r}, s={s}")
    if (r - 1) * (q - 1) <= 0 or (s - 1) * (q - 1) <= 0:
        raise DomainError("r and s must lie on the same side of 1 as q")
    if depth > MAX_CONVOLUTION_DEPTH:
        raise ResourceLimitError(
            f"Convolution depth {depth} exceeds {MAX_CONVOLUTION_DEPTH}; use a coarser depth"
        )
    if depth < 3:
        raise DomainError(f"Convolution depth must be at least 3, got {depth}")

    dm1, dm2 = discretize(m1, depth), discretize(m2, depth)
    product = convolve(dm1, dm2) if atom_cap is None else convolve(dm1, dm2, atom_cap)
    levels = range(depth - 1)
    n = depth - 1

    def dimension(dm, exponent):
        table = bucket_table(dm, levels, exponent)
        return lsq_discrete(table, n, 2.0) / (exponent - 1.0)

    return ConvolutionReport(
        q=q, r=r, s=s, depth=depth,
        D_conv=dimension(product, q),
        D_r=dimension(dm1, r),
        D_s=dimension(dm2, s),
        weight_r=q * (r - 1) / (r * (q - 1)),
        weight_s=q * (s - 1) / (s * (q - 1)),
        tol=tol,
    )


def _check_row(t: PartitionTable, n: int) -> None:
    if not 0 <= n < len(t):
        raise EstimatorError(f"Row {n} outside 0..{len(t) - 1}")
