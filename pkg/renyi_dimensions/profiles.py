"""
Weight profiles driving the dyadic cascade construction.

A profile is the sequence a_1, a_2, ... with 0 <= a_n <= 1 that fixes the
splitting weight of every level of a cascade measure. Profiles are stored as
runs of constant value so that the block constructions stay cheap even when
they span millions of levels, and so that running sums can be evaluated in
closed form (exactly, when requested).
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import DomainError, RationalModeError

logger = logging.getLogger(__name__)

PROFILE_KINDS = ("constant", "block48", "geometric-blocks", "explicit")
KIND_ALIASES = {"block-48": "block48", "explicit-list": "explicit"}

ProfileValue = Union[Fraction, float]

BLOCK48_FIRST = Fraction(30, 47)


@dataclass(frozen=True)
class Run:
    """Indices first..last (1-based, inclusive) all carrying the same value."""

    first: int
    last: int
    value: ProfileValue

    @property
    def length(self) -> int:
        return self.last - self.first + 1


@dataclass(frozen=True)
class WeightProfile:
    """
    Deterministic rule for the sequence a_1..a_length.

    Use the classmethod constructors rather than building runs by hand; they
    validate that every value lies in [0, 1].
    """

    kind: str
    length: int
    runs: Tuple[Run, ...]
    parameters: Dict[str, object] = field(default_factory=dict, compare=False)
    block_starts: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise DomainError(f"Unknown profile kind: {self.kind}")
        if self.length < 1:
            raise DomainError(f"Profile length must be at least 1, got {self.length}")
        expected = 1
        for run in self.runs:
            if run.first != expected or run.last < run.first:
                raise DomainError(f"Profile runs are not contiguous at index {expected}")
            _check_unit_interval(run.value)
            expected = run.last + 1
        if expected != self.length + 1:
            raise DomainError(
                f"Profile runs cover {expected - 1} levels, expected {self.length}"
            )

    def __len__(self) -> int:
        return self.length

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, a: ProfileValue, length: int) -> "WeightProfile":
        """Every level carries the same value a."""
        value = _as_profile_value(a)
        return cls("constant", length, (Run(1, length, value),), {"a": value})

    @classmethod
    def block48(cls, length: int) -> "WeightProfile":
        """
        The base-48 block profile.

        a_1 = 30/47, and for every m >= 0 the levels (48^m, 12*48^m] carry 0,
        (12*48^m, 36*48^m] carry 1 and (36*48^m, 48^(m+1)] carry 1/2. Reading
        the blocks from m = 0 makes the running average at every power of 48
        equal to 30/47.
        """
        runs = [Run(1, 1, BLOCK48_FIRST)]
        base = 1
        while runs[-1].last < length:
            for lo, hi, value in ((1, 12, Fraction(0)), (12, 36, Fraction(1)),
                                  (36, 48, Fraction(1, 2))):
                first = lo * base + 1
                if first > length:
                    break
                runs.append(Run(first, min(hi * base, length), value))
            base *= 48
        return cls("block48", length, _clip_runs(runs, length))

    @classmethod
    def geometric_blocks(cls, ratio: float, length: int, k_seed: int = 1,
                         k_list: Optional[Sequence[int]] = None) -> "WeightProfile":
        """
        Block profile built on a fast-growing index sequence k_1 < k_2 < ...

        a_j = 1/2 up to 2*k_1, then for every l the levels
        (2k_l, k_l + k_{l+1}] carry 0 and (k_l + k_{l+1}, 2k_{l+1}] carry 1.
        Without an explicit ``k_list`` the sequence is k_{l+1} = ceil(ratio*k_l)
        starting from ``k_seed``.
        """
        if k_list is None:
            if not ratio > 1:
                raise DomainError(f"Block growth ratio must exceed 1, got {ratio}")
            if k_seed < 1:
                raise DomainError(f"k_seed must be at least 1, got {k_seed}")
            ks = [int(k_seed)]
            while 2 * ks[-1] < length:
                ks.append(max(math.ceil(ratio * ks[-1]), ks[-1] + 1))
        else:
            ks = [int(k) for k in k_list]
            if not ks or ks[0] < 1 or any(b <= a for a, b in zip(ks, ks[1:])):
                raise DomainError("k_list must be a strictly increasing list of positive integers")

        runs = [Run(1, 2 * ks[0], Fraction(1, 2))]
        for k, k_next in zip(ks, ks[1:]):
            runs.append(Run(2 * k + 1, k + k_next, Fraction(0)))
            runs.append(Run(k + k_next + 1, 2 * k_next, Fraction(1)))
        if runs[-1].last < length:
            runs.append(Run(runs[-1].last + 1, length, Fraction(1, 2)))

        params = {"ratio": ratio, "k_seed": ks[0]}
        return cls("geometric-blocks", length, _clip_runs(runs, length), params,
                   tuple(k for k in ks if 2 * k <= length))

    @classmethod
    def explicit(cls, values: Iterable[ProfileValue]) -> "WeightProfile":
        """A finite list a_1..a_N given term by term."""
        runs: List[Run] = []
        for index, raw in enumerate(values, start=1):
            value = _as_profile_value(raw)
            if runs and runs[-1].value == value:
                runs[-1] = Run(runs[-1].first, index, value)
            else:
                runs.append(Run(index, index, value))
        if not runs:
            raise DomainError("An explicit profile needs at least one value")
        return cls("explicit", runs[-1].last, tuple(runs))

    # -- evaluation -------------------------------------------------------

    def values(self) -> np.ndarray:
        """The sequence a_1..a_length as a float array (index 0 holds a_1)."""
        out = np.empty(self.length, dtype=float)
        for run in self.runs:
            out[run.first - 1:run.last] = float(run.value)
        return out

    def value_at(self, k: int) -> ProfileValue:
        if not 1 <= k <= self.length:
            raise DomainError(f"Profile index {k} outside 1..{self.length}")
        for run in self.runs:
            if run.first <= k <= run.last:
                return run.value
        raise AssertionError("runs are contiguous")

    def truncated(self, length: int) -> "WeightProfile":
        """The first ``length`` terms of this profile."""
        if not 1 <= length <= self.length:
            raise DomainError(f"Cannot truncate a profile of length {self.length} to {length}")
        return WeightProfile(self.kind, length, _clip_runs(list(self.runs), length),
                             dict(self.parameters),
                             tuple(k for k in self.block_starts if 2 * k <= length))


@dataclass(frozen=True)
class ProfileStats:
    """Running sums of a profile at one checkpoint n."""

    n: int
    running_sum: ProfileValue
    weighted_sum: ProfileValue
    exact: bool

    @property
    def running_average(self) -> ProfileValue:
        """(1/n) * sum_{j<=n} a_j"""
        return self.running_sum / self.n

    @property
    def weighted_average(self) -> ProfileValue:
        """6/(n^3 - n) * sum_{k<n} k(n-k) a_k, the best-fit slope kernel."""
        if self.n < 2:
            raise DomainError("The weighted average needs n >= 2")
        return 6 * self.weighted_sum / (self.n ** 3 - self.n)

    @property
    def weighted_average_cubic(self) -> ProfileValue:
        """6/n^3 * sum_{k<n} k(n-k) a_k"""
        return 6 * self.weighted_sum / self.n ** 3


def profile_block48(n_max: int) -> np.ndarray:
    """a_1..a_{n_max} of the base-48 block profile."""
    return WeightProfile.block48(n_max).values()


def profile_geometric_blocks(ratio: float, n_max: int, k_seed: int = 1) -> np.ndarray:
    """a_1..a_{n_max} of the geometric block profile."""
    return WeightProfile.geometric_blocks(ratio, n_max, k_seed).values()


def running_stats(profile: WeightProfile, checkpoints: Sequence[int],
                  rational: bool = False,
                  max_denominator: int = 2 ** 64) -> List[ProfileStats]:
    """
    Sum a_j and sum k(n-k) a_k at every checkpoint in a single pass.

    The pass walks the profile's runs and uses closed-form power sums inside
    each run, so block profiles with millions of levels cost only as many
    steps as they have runs. In rational mode every value is converted to a
    Fraction and all arithmetic is exact.

    Returns:
        One ProfileStats per checkpoint, in the order given.

    Raises:
        DomainError: If a checkpoint lies outside 1..len(profile)
        RationalModeError: If rational mode meets a value whose exact
            denominator exceeds ``max_denominator``
    """
    for n in checkpoints:
        if not 1 <= n <= profile.length:
            raise DomainError(f"Checkpoint {n} outside 1..{profile.length}")

    if rational:
        def convert(value):
            exact = value if isinstance(value, Fraction) else Fraction(value)
            if exact.denominator > max_denominator:
                raise RationalModeError(
                    f"Profile value {value!r} needs denominator {exact.denominator}; "
                    f"rerun with rational mode off"
                )
            return exact
        zero = Fraction(0)
    else:
        convert = float
        zero = 0.0

    pending = sorted(set(checkpoints))
    found: Dict[int, ProfileStats] = {}
    s0 = s1 = s2 = zero
    cursor = 0
    for run in profile.runs:
        if cursor >= len(pending):
            break
        value = convert(run.value)
        while cursor < len(pending) and pending[cursor] <= run.last:
            n = pending[cursor]
            p0, p1, p2 = _power_sums(run.first, n)
            t0 = s0 + value * p0
            t1 = s1 + value * p1
            t2 = s2 + value * p2
            found[n] = ProfileStats(n, t0, n * t1 - t2, rational)
            cursor += 1
        p0, p1, p2 = _power_sums(run.first, run.last)
        s0 += value * p0
        s1 += value * p1
        s2 += value * p2

    logger.debug("Evaluated %d checkpoints over %d runs", len(found), len(profile.runs))
    return [found[n] for n in checkpoints]


def _power_sums(first: int, last: int) -> Tuple[int, int, int]:
    """(count, sum k, sum k^2) for k = first..last."""
    def tri(m):
        return m * (m + 1) // 2

    def sq(m):
        return m * (m + 1) * (2 * m + 1) // 6

    return last - first + 1, tri(last) - tri(first - 1), sq(last) - sq(first - 1)


def _as_profile_value(value) -> ProfileValue:
    if isinstance(value, Fraction):
        result = value
    elif isinstance(value, (int, np.integer)):
        result = Fraction(int(value))
    elif isinstance(value, Real):
        result = float(value)
    else:
        raise DomainError(f"Profile value must be a real number, got {value!r}")
    _check_unit_interval(result)
    return result


def _check_unit_interval(value) -> None:
    if not 0 <= value <= 1:
        raise DomainError(f"Profile values must satisfy 0 <= a <= 1, got {value}")


def _clip_runs(runs: List[Run], length: int) -> Tuple[Run, ...]:
    clipped = []
    for run in runs:
        if run.first > length:
            break
        clipped.append(Run(run.first, min(run.last, length), run.value))
    return tuple(clipped)
