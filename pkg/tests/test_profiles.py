"""
Unit and property tests for weight profiles and their running statistics.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from renyi_dimensions.exceptions import DomainError, RationalModeError
from renyi_dimensions.profiles import (
    WeightProfile,
    profile_block48,
    profile_geometric_blocks,
    running_stats,
)


@st.composite
def fraction_profile(draw):
    """Generate a short explicit profile of exact values in [0, 1]."""
    denominators = st.integers(min_value=1, max_value=12)
    values = []
    for _ in range(draw(st.integers(min_value=2, max_value=40))):
        den = draw(denominators)
        values.append(Fraction(draw(st.integers(min_value=0, max_value=den)), den))
    return values


class TestConstructors:
    """Test the profile constructors."""

    def test_constant_profile(self):
        profile = WeightProfile.constant(Fraction(1, 2), 10)
        assert len(profile) == 10
        assert all(v == 0.5 for v in profile.values())

    def test_constant_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            WeightProfile.constant(1.5, 4)
        with pytest.raises(DomainError):
            WeightProfile.constant(-0.1, 4)

    def test_block48_layout(self):
        """The first block: a_1 = 30/47, zeros up to 12, ones up to 36, halves up to 48."""
        profile = WeightProfile.block48(48 * 48)
        assert profile.value_at(1) == Fraction(30, 47)
        assert profile.value_at(2) == 0
        assert profile.value_at(12) == 0
        assert profile.value_at(13) == 1
        assert profile.value_at(36) == 1
        assert profile.value_at(37) == Fraction(1, 2)
        assert profile.value_at(48) == Fraction(1, 2)
        assert profile.value_at(49) == 0
        assert profile.value_at(12 * 48) == 0
        assert profile.value_at(12 * 48 + 1) == 1

    def test_block48_array_helper(self):
        values = profile_block48(100)
        assert values.shape == (100,)
        assert values[0] == pytest.approx(30 / 47)

    def test_geometric_blocks_layout(self):
        profile = WeightProfile.geometric_blocks(2.0, 64, k_seed=1)
        assert profile.block_starts == (1, 2, 4, 8, 16, 32)
        assert profile.value_at(1) == Fraction(1, 2)
        assert profile.value_at(2) == Fraction(1, 2)
        assert profile.value_at(3) == 0
        assert profile.value_at(4) == 1
        assert profile.value_at(5) == 0
        assert profile.value_at(7) == 1
        assert len(profile_geometric_blocks(2.0, 64)) == 64

    def test_geometric_blocks_explicit_list(self):
        profile = WeightProfile.geometric_blocks(2.0, 30, k_list=[2, 5, 15])
        assert profile.value_at(4) == Fraction(1, 2)
        assert profile.value_at(5) == 0
        assert profile.value_at(7) == 0
        assert profile.value_at(8) == 1
        assert profile.value_at(10) == 1
        assert profile.value_at(11) == 0

    def test_geometric_blocks_rejects_bad_input(self):
        with pytest.raises(DomainError):
            WeightProfile.geometric_blocks(1.0, 64)
        with pytest.raises(DomainError):
            WeightProfile.geometric_blocks(2.0, 64, k_list=[3, 3, 5])

    def test_explicit_merges_runs(self):
        profile = WeightProfile.explicit([0, 0, 1, 1, 1, Fraction(1, 3)])
        assert len(profile.runs) == 3
        assert profile.value_at(6) == Fraction(1, 3)

    def test_explicit_rejects_empty(self):
        with pytest.raises(DomainError):
            WeightProfile.explicit([])

    def test_truncated(self):
        profile = WeightProfile.block48(200).truncated(40)
        assert len(profile) == 40
        assert profile.value_at(40) == Fraction(1, 2)
        with pytest.raises(DomainError):
            profile.truncated(41)


class TestRunningStats:
    """Test checkpoint sums, exact and floating."""

    def test_block48_checkpoint_averages_are_exact(self):
        """At 48^m, 12*48^m and 36*48^m the averages are 30/47, 5/94 and 193/282."""
        profile = WeightProfile.block48(48 ** 3)
        checkpoints = []
        for m in range(3):
            checkpoints += [48 ** m, 12 * 48 ** m, 36 * 48 ** m]
        checkpoints.append(48 ** 3)
        stats = running_stats(profile, checkpoints, rational=True)

        expected = [Fraction(30, 47), Fraction(5, 94), Fraction(193, 282)] * 3 + [Fraction(30, 47)]
        for stat, target in zip(stats, expected):
            assert stat.exact
            assert stat.running_average == target, f"n={stat.n}"

    def test_geometric_blocks_secants(self):
        """Along 2k_l the average is 1/2; along 3k_l (R = 2) it is 1/3."""
        profile = WeightProfile.geometric_blocks(2.0, 2 ** 12)
        ks = profile.block_starts
        stats = running_stats(profile, [2 * k for k in ks], rational=True)
        assert all(s.running_average == Fraction(1, 2) for s in stats)
        stats = running_stats(profile, [3 * k for k in ks[:-1]], rational=True)
        assert all(s.running_average == Fraction(1, 3) for s in stats)

    def test_order_of_checkpoints_is_kept(self):
        profile = WeightProfile.block48(100)
        stats = running_stats(profile, [36, 12, 48])
        assert [s.n for s in stats] == [36, 12, 48]

    def test_checkpoint_out_of_range(self):
        profile = WeightProfile.constant(1, 10)
        with pytest.raises(DomainError):
            running_stats(profile, [11])
        with pytest.raises(DomainError):
            running_stats(profile, [0])

    def test_weighted_average_needs_two_levels(self):
        stat = running_stats(WeightProfile.constant(1, 10), [1])[0]
        with pytest.raises(DomainError):
            stat.weighted_average

    def test_rational_mode_rejects_large_denominators(self):
        profile = WeightProfile.explicit([0.1, 0.2])
        with pytest.raises(RationalModeError):
            running_stats(profile, [2], rational=True, max_denominator=1000)

    def test_weighted_average_of_constant(self):
        """6/(n^3 - n) sum k(n-k) a equals a for a constant profile."""
        stat = running_stats(WeightProfile.constant(Fraction(2, 3), 50), [50], rational=True)[0]
        assert stat.weighted_average == Fraction(2, 3)

    @settings(max_examples=50)
    @given(fraction_profile(), st.data())
    def test_property_running_sums_match_direct_sums(self, values, data):
        """
        Property: run-based closed-form sums equal term-by-term sums for any profile.
        """
        profile = WeightProfile.explicit(values)
        n = data.draw(st.integers(min_value=1, max_value=len(values)))
        stat = running_stats(profile, [n], rational=True)[0]

        assert stat.running_sum == sum(values[:n])
        assert stat.weighted_sum == sum(k * (n - k) * values[k - 1] for k in range(1, n))

        floating = running_stats(profile, [n])[0]
        assert float(floating.running_sum) == pytest.approx(float(stat.running_sum), abs=1e-9)
