"""
Unit and property tests for partition functions and partition tables.
"""

import math
import os
import tempfile
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from renyi_dimensions.exceptions import (
    DomainError,
    EstimatorError,
    InvariantViolationError,
    PrecisionGuardError,
    ResourceLimitError,
)
from renyi_dimensions.measure import DiscretizedMeasure, build_cascade, discretize
from renyi_dimensions.partition import (
    PartitionTable,
    bucket_masses,
    bucket_table,
    build_table,
    check_jump_bounds,
    partition_bucket,
    partition_enumerate,
    partition_exact_dyadic,
)
from renyi_dimensions.profiles import WeightProfile

LN2 = math.log(2)

exponents = st.one_of(st.floats(min_value=0.2, max_value=0.9),
                      st.floats(min_value=1.1, max_value=5.0))


@st.composite
def explicit_cascade(draw):
    """Generate a cascade of depth <= 10 from a random profile."""
    depth = draw(st.integers(min_value=1, max_value=10))
    values = draw(st.lists(st.floats(min_value=0.0, max_value=1.0),
                           min_size=depth, max_size=depth))
    return build_cascade(WeightProfile.explicit(values), draw(exponents), depth)


class TestPartitionFunctions:
    """Test the three ways of evaluating ln S."""

    def test_exact_block48(self):
        m = build_cascade(WeightProfile.block48(48), 2.0, 48)
        assert partition_exact_dyadic(m, 0) == 0.0
        assert partition_exact_dyadic(m, 12) == pytest.approx(-LN2 * 12 * 5 / 94, abs=1e-12)
        assert partition_exact_dyadic(m, 36) == pytest.approx(-LN2 * 36 * 193 / 282, abs=1e-12)

    def test_exact_and_enumerated_agree(self):
        m = build_cascade(WeightProfile.block48(14), 2.0, 14)
        for n in range(15):
            assert partition_enumerate(m, n, 2.0) == pytest.approx(
                partition_exact_dyadic(m, n), abs=1e-10)

    def test_enumeration_limit(self):
        m = build_cascade(WeightProfile.constant(1, 25), 2.0, 25)
        with pytest.raises(ResourceLimitError):
            partition_enumerate(m, 25, 2.0)

    def test_level_out_of_range(self):
        m = build_cascade(WeightProfile.constant(1, 5), 2.0, 5)
        with pytest.raises(DomainError):
            partition_exact_dyadic(m, 6)
        with pytest.raises(DomainError):
            partition_enumerate(m, -1, 2.0)

    def test_bucket_matches_closed_form(self):
        """Bucketing the depth-10 atoms at eps = 2^-n reproduces ln S(2^-n)."""
        m = build_cascade(WeightProfile.block48(10), 2.0, 10)
        dm = discretize(m, 10)
        for n in range(9):
            assert partition_bucket(dm, 2.0 ** -n, 2.0) == pytest.approx(
                partition_exact_dyadic(m, n), abs=1e-10)

    def test_bucket_precision_guard(self):
        m = build_cascade(WeightProfile.constant(1, 10), 2.0, 10)
        dm = discretize(m, 10)
        with pytest.raises(PrecisionGuardError):
            partition_bucket(dm, 2.0 ** -9, 2.0)

    def test_boundary_atom_goes_right(self):
        dm = DiscretizedMeasure.from_atoms([(0.0, 0.25), (0.25, 0.25), (0.5, 0.5)],
                                           resolution=1 / 16)
        assert bucket_masses(dm, 0.25).tolist() == [0.25, 0.25, 0.5]
        assert bucket_masses(dm, 0.5).tolist() == [0.5, 0.5]
        assert partition_bucket(dm, 0.5, 2.0) == pytest.approx(math.log(0.5))

    def test_zero_cells_are_skipped(self):
        m = build_cascade(WeightProfile.constant(0, 6), 2.0, 6)
        assert partition_enumerate(m, 6, 0.5) == pytest.approx(0.0, abs=1e-15)


class TestPartitionTable:
    """Test table construction, validation and CSV round trip."""

    def test_build_exact_table(self):
        m = build_cascade(WeightProfile.constant(Fraction(1, 2), 20), 2.0, 20)
        table = build_table(m, 20)
        assert len(table) == 21
        assert table.ln_eps[5] == pytest.approx(-5 * LN2)
        assert table.ln_S[5] == pytest.approx(-5 * LN2 / 2)
        assert "exact" in table.source

    def test_build_enumerated_table(self):
        m = build_cascade(WeightProfile.block48(10), 2.0, 10)
        table = build_table(m, 10, q=3.0)
        assert table.q == 3.0
        assert "enumerated" in table.source
        assert np.all(table.ln_S <= 1e-12)

    def test_build_table_range(self):
        m = build_cascade(WeightProfile.constant(1, 5), 2.0, 5)
        with pytest.raises(DomainError):
            build_table(m, 6)

    def test_validation(self):
        with pytest.raises(DomainError):
            PartitionTable.from_rows(2.0, [(0.0, 0.0), (0.0, -1.0)])
        with pytest.raises(DomainError):
            PartitionTable.from_rows(2.0, [])
        with pytest.raises(DomainError):
            PartitionTable.from_rows(1.0, [(0.0, 0.0)])
        with pytest.raises(DomainError):
            PartitionTable.from_rows(2.0, [(0.0, float("nan"))])

    def test_arrays_are_read_only(self):
        table = PartitionTable.from_rows(2.0, [(0.0, 0.0), (-LN2, -LN2)])
        with pytest.raises(ValueError):
            table.ln_S[0] = 1.0

    def test_csv_round_trip_is_exact(self):
        m = build_cascade(WeightProfile.block48(60), 2.0, 60)
        table = build_table(m, 60)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "table.csv")
            table.to_csv(path)
            loaded = PartitionTable.from_csv(path, 2.0)
        assert np.array_equal(loaded.ln_eps, table.ln_eps)
        assert np.array_equal(loaded.ln_S, table.ln_S)

    def test_malformed_csv(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "bad.csv")
            with open(path, "w") as f:
                f.write("eps,S\n1,2\n")
            with pytest.raises(EstimatorError):
                PartitionTable.from_csv(path, 2.0)

    def test_bucket_table(self):
        m = build_cascade(WeightProfile.constant(1, 8), 2.0, 8)
        table = bucket_table(discretize(m, 8), [0, 3, 1, 6], 2.0)
        assert len(table) == 4
        assert table.ln_S.tolist() == pytest.approx([0.0, -LN2, -3 * LN2, -6 * LN2])


class TestJumpBounds:
    """Test the dyadic jump bounds on consecutive rows."""

    def test_violation_is_reported(self):
        table = PartitionTable.from_rows(2.0, [(0.0, 0.0), (-LN2, 0.5), (-2 * LN2, 0.0)])
        report = check_jump_bounds(table)
        assert not report.passed
        assert report.violations[0][0] == 0
        assert report.observed_A == pytest.approx(0.5)
        with pytest.raises(InvariantViolationError):
            report.raise_for_violation()

    def test_upper_bound_violation(self):
        table = PartitionTable.from_rows(2.0, [(0.0, 0.0), (-LN2, -2.0)])
        report = check_jump_bounds(table)
        assert not report.passed
        assert report.max_violation == pytest.approx(2.0 - LN2)

    def test_skipped_levels_scale_the_bound(self):
        table = PartitionTable.from_rows(2.0, [(0.0, 0.0), (-3 * LN2, -3 * LN2)])
        assert check_jump_bounds(table).passed

    def test_requires_dyadic_spacing(self):
        table = PartitionTable.from_rows(2.0, [(0.0, 0.0), (-1.0, -0.5)])
        with pytest.raises(EstimatorError):
            check_jump_bounds(table)

    def test_requires_two_rows(self):
        with pytest.raises(EstimatorError):
            check_jump_bounds(PartitionTable.from_rows(2.0, [(0.0, 0.0)]))

    @settings(max_examples=40)
    @given(explicit_cascade(), exponents)
    def test_property_jump_bounds_hold_at_any_exponent(self, m, q):
        """
        Property: for every cascade and every exponent, consecutive dyadic rows
        satisfy 0 <= ln S(eps) - ln S(eps/2) <= (q - 1) ln 2 (mirrored for q < 1).
        """
        rows = [(-n * LN2, partition_enumerate(m, n, q)) for n in range(m.depth + 1)]
        report = check_jump_bounds(PartitionTable.from_rows(q, rows))
        assert report.passed, report.violations
