"""
Unit tests for the Gaussian kernel, filtered L^q norms and the ratio bound.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from renyi_dimensions.exceptions import (
    DomainError,
    InvariantViolationError,
    PrecisionGuardError,
    QuadratureError,
)
from renyi_dimensions.gaussfilter import (
    GaussianKernel,
    MonotonicityReport,
    QuadratureSpec,
    check_monotonicity,
    check_ratio_bound,
    envelope_constants,
    filtered_density,
    gaussian_lq_closed_form,
    lq_norm_q,
)
from renyi_dimensions.measure import DiscretizedMeasure, build_cascade, discretize
from renyi_dimensions.profiles import WeightProfile


def point_mass(resolution=1e-3):
    return DiscretizedMeasure.dirac(0.0, 1.0, resolution)


class TestGaussianKernel:
    """Test the kernel identities."""

    @pytest.mark.parametrize("eps", [1.0, 0.1, 0.003])
    def test_normalization(self, eps):
        assert GaussianKernel.check_normalization(eps) < 1e-10

    def test_semigroup(self):
        worst = GaussianKernel.check_semigroup(0.3, 0.4, [-1.0, -0.2, 0.0, 0.35, 1.5])
        assert worst < 1e-8

    def test_density_rejects_bad_eps(self):
        with pytest.raises(DomainError):
            GaussianKernel.density(0.0, eps=0.0)

    def test_closed_form_at_q2(self):
        """||g||_2^2 = 1 / (2 sqrt(pi))."""
        assert gaussian_lq_closed_form(2.0) == pytest.approx(1 / (2 * math.sqrt(math.pi)))


class TestEnvelope:
    """Test the envelope constants."""

    def test_q2_constant(self):
        env = envelope_constants(2.0)
        assert env.C == pytest.approx(1 / env.gamma_lq)
        assert env.C > 1
        assert env.lower == pytest.approx(1 / env.C)

    def test_q_half_constant(self):
        env = envelope_constants(0.5)
        assert env.C == pytest.approx(max(env.Gamma_lq, env.gamma_l1 ** -0.5))

    def test_envelope_shapes(self):
        env = envelope_constants(2.0, radius=10)
        assert env.gamma.shape == (21,)
        assert np.all(env.gamma <= env.Gamma)
        assert env.Gamma[10] == pytest.approx(1 / math.sqrt(2 * math.pi))

    def test_radius_floor(self):
        with pytest.raises(DomainError):
            envelope_constants(2.0, radius=7)

    @settings(max_examples=30)
    @given(st.one_of(st.floats(min_value=0.2, max_value=0.95), st.floats(min_value=1.05, max_value=6.0)))
    def test_property_point_mass_ratio_inside_envelope(self, q):
        """
        Property: for a unit point mass S = 1 and eps^(q-1) I(eps) is
        (2 pi)^((1-q)/2) / sqrt(q), which must lie in [1/C, C].
        """
        ratio = gaussian_lq_closed_form(q, 0.1) * 0.1 ** (q - 1)
        assert envelope_constants(q).contains(ratio)


class TestFilteredNorms:
    """Test the filtered density and its L^q norm."""

    def test_filtered_density_of_point_mass(self):
        dm = point_mass()
        x = np.array([[-0.2, 0.0], [0.05, 0.3]])
        values = filtered_density(dm, 0.1, x)
        assert values.shape == (2, 2)
        assert np.allclose(values, GaussianKernel.density(x, 0.1))
        assert filtered_density(dm, 0.1, 0.0) == pytest.approx(1 / (0.1 * math.sqrt(2 * math.pi)))

    def test_zero_weight_atoms_are_ignored(self):
        dm = DiscretizedMeasure.from_atoms([(0.0, 1.0), (0.15, 0.0)], resolution=1e-3)
        assert filtered_density(dm, 0.05, 0.1) == pytest.approx(
            float(GaussianKernel.density(0.1, 0.05)), rel=1e-12)

    @pytest.mark.parametrize("q", [2.0, 0.5, 3.0])
    def test_point_mass_matches_closed_form(self, q):
        assert lq_norm_q(point_mass(), 0.1, q) == pytest.approx(
            gaussian_lq_closed_form(q, 0.1), rel=1e-6)

    def test_precision_guard(self):
        with pytest.raises(PrecisionGuardError):
            lq_norm_q(point_mass(0.01), 0.02, 2.0)

    def test_quadrature_failure_reports_estimates(self):
        quad = QuadratureSpec(rtol=1e-15, max_halvings=1, step_fraction=4.0)
        with pytest.raises(QuadratureError) as excinfo:
            lq_norm_q(point_mass(), 0.1, 2.0, quad)
        assert len(excinfo.value.estimates) == 2

    def test_lebesgue_norm_near_one(self):
        """For the uniform measure on [0, 1], I(eps) tends to 1 as eps shrinks."""
        m = build_cascade(WeightProfile.constant(1, 10), 2.0, 10)
        value = lq_norm_q(discretize(m, 10), 2.0 ** -6, 2.0)
        assert value == pytest.approx(1.0, abs=0.02)


class TestRatioBound:
    """Test the two-sided ratio bound and monotonicity in eps."""

    @pytest.mark.parametrize("q", [0.5, 2.0])
    @pytest.mark.parametrize("a", [1, Fraction(1, 2), 0])
    def test_ratio_inside_envelope(self, q, a):
        m = build_cascade(WeightProfile.constant(a, 8), q, 8)
        report = check_ratio_bound(m, q, [2.0 ** -k for k in range(3, 7)], 8)
        assert len(report.rows) == 4
        assert report.passed, [r.ratio for r in report.rows]
        report.raise_for_violation()

    def test_rows_run_from_coarse_to_fine(self):
        m = build_cascade(WeightProfile.constant(1, 8), 2.0, 8)
        report = check_ratio_bound(m, 2.0, [2.0 ** -5, 2.0 ** -3], 8)
        assert [row.eps for row in report.rows] == [2.0 ** -3, 2.0 ** -5]
        rows = report.csv_rows()
        assert rows[0][0] == pytest.approx(-3 * math.log(2))
        assert rows[0][3] == pytest.approx(math.log(report.envelope.C))

    def test_point_mass_monotone(self):
        grid = np.geomspace(0.02, 0.5, 8)
        decreasing = check_monotonicity(point_mass(), 2.0, grid)
        assert decreasing.passed
        assert decreasing.norms[0] > decreasing.norms[-1]
        increasing = check_monotonicity(point_mass(), 0.5, grid)
        assert increasing.passed
        assert increasing.norms[0] < increasing.norms[-1]

    def test_grid_must_increase(self):
        with pytest.raises(DomainError):
            check_monotonicity(point_mass(), 2.0, [0.5, 0.1])

    def test_wrong_way_step_is_reported(self):
        report = MonotonicityReport(2.0, [0.1, 0.2, 0.4], [3.0, 3.5, 2.0])
        assert report.violations == [0]
        with pytest.raises(InvariantViolationError):
            report.raise_for_violation()
