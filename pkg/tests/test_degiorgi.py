"""
Tests for De Giorgi tools: truncations, level profiles and sequence lemmas.
"""

import math

import mpmath
import numpy as np
import pytest

from core.domain.entities.reports import LevelProfile
from core.domain.exceptions import InvalidParameterError, NotApplicableError, OutOfDomainError
from core.domain.value_objects.verdicts import SequenceVerdict
from core.services.degiorgi import DeGiorgi
from core.services.field_calculus import FieldCalculus

from .conftest import create_field

HEIGHTS = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]


class TestTruncation:
    """Tests for truncations and convex images."""

    def test_truncate_plus(self, ball_grid):
        v = FieldCalculus.field_from_expression(ball_grid, "x")
        truncated = DeGiorgi.truncate_plus(v, 0.0)
        assert truncated.at((-0.5, 0.0)) == 0.0
        assert truncated.at((0.5, 0.0)) == 0.5

    def test_truncation_is_idempotent(self, ball_grid):
        v = FieldCalculus.field_from_expression(ball_grid, "sin(4*x)+y")
        once = DeGiorgi.truncate_plus(v, 0.2)
        twice = DeGiorgi.truncate_plus(once, 0.0)
        assert np.array_equal(once.active_values(), twice.active_values())

    def test_truncation_preserves_order(self, ball_grid):
        v = FieldCalculus.field_from_expression(ball_grid, "x")
        w = FieldCalculus.field_from_expression(ball_grid, "x+0.3")
        active = ball_grid.active
        assert np.all(DeGiorgi.truncate_plus(v, 0.1).values[active] <= DeGiorgi.truncate_plus(w, 0.1).values[active])

    def test_truncation_above_max_is_zero(self, ball_grid):
        v = FieldCalculus.field_from_expression(ball_grid, "x")
        assert np.all(DeGiorgi.truncate_plus(v, 5.0).active_values() == 0.0)

    def test_convex_image(self, ball_grid):
        v = FieldCalculus.field_from_expression(ball_grid, "x")
        assert DeGiorgi.convex_image(v, "square-plus").at((0.5, 0.0)) == 0.25
        assert DeGiorgi.convex_image(v, "square-plus").at((-0.5, 0.0)) == 0.0
        with pytest.raises(InvalidParameterError):
            DeGiorgi.convex_image(v, "cube")


class TestVProfile:
    """Tests for the truncated mass profile and its scaling class."""

    def test_constant_profile(self, wide_ball_grid):
        v = FieldCalculus.field_from_expression(wide_ball_grid, "1")
        profile = DeGiorgi.v_profile(v, [0.0, 0.5])
        for s, value in zip(profile.heights, profile.values):
            assert value == pytest.approx((1 - s) ** 2 * math.pi * (2 - s) ** 2, rel=0.03)

    def test_non_positive_field_has_zero_profile(self, wide_ball_grid):
        profile = DeGiorgi.v_profile(FieldCalculus.field_from_expression(wide_ball_grid, "-1"), HEIGHTS)
        assert all(value == 0.0 for value in profile.values)

    def test_profile_is_non_increasing(self, wide_ball_grid):
        v = FieldCalculus.field_from_expression(wide_ball_grid, "sin(3*x)*cos(2*y)")
        profile = DeGiorgi.v_profile(v, [0.8, 0.2, 0.5])
        assert profile.heights == (0.2, 0.5, 0.8)
        assert profile.values[2] <= profile.values[0]

    def test_needs_radius_two_grid(self, ball_grid):
        with pytest.raises(OutOfDomainError):
            DeGiorgi.v_profile(FieldCalculus.field_from_expression(ball_grid, "x"), HEIGHTS)

    def test_heights_must_lie_in_unit_interval(self, wide_ball_grid):
        with pytest.raises(InvalidParameterError):
            DeGiorgi.v_profile(FieldCalculus.field_from_expression(wide_ball_grid, "x"), [0.0, 1.5])

    def test_zero_profile_passes_scaling_class(self):
        report = DeGiorgi.scaling_class_audit(LevelProfile("V", (0.0, 0.5), (0.0, 0.0)), 2)
        assert report.passed
        assert report.measured["C"] == 0.0

    def test_mass_appearing_above_empty_level_fails(self):
        assert DeGiorgi.scaling_class_constant([0.0, 0.5], [0.0, 1.0], 2) == math.inf

    def test_scaling_class_constant_closed_form(self):
        """V(κ)(κ - τ)^4 / V(τ)^2 in two dimensions."""
        constant = DeGiorgi.scaling_class_constant([0.0, 0.5], [2.0, 1.0], 2)
        assert constant == pytest.approx(1.0 * 0.5**4 / 2.0**2)

    def test_scaling_class_is_stable_under_refinement(self):
        constants = []
        for resolution in (65, 129):
            v = create_field("x", resolution=resolution, half_width=2.0)
            profile = DeGiorgi.v_profile(v, HEIGHTS)
            report = DeGiorgi.scaling_class_audit(profile, 2)
            assert report.passed
            constants.append(report.measured["C"])
        assert constants[1] == pytest.approx(constants[0], rel=0.2)

    def test_scaling_class_needs_v_profile(self):
        with pytest.raises(InvalidParameterError):
            DeGiorgi.scaling_class_audit(LevelProfile("W", (0.0,), (0.5,)), 2)


class TestMeasureProfile:
    """Tests for sublevel measure profiles."""

    def test_half_disk(self, fine_ball_grid):
        v = FieldCalculus.field_from_expression(fine_ball_grid, "x")
        profile = DeGiorgi.measure_profile(v, [0.0])
        assert profile.values[0] == pytest.approx(0.5, abs=2 * fine_ball_grid.h)

    def test_height_above_max(self, fine_ball_grid):
        v = FieldCalculus.field_from_expression(fine_ball_grid, "x")
        assert DeGiorgi.measure_profile(v, [2.0]).values == (1.0,)

    def test_monotone_with_implied_constant(self, fine_ball_grid):
        v = FieldCalculus.field_from_expression(fine_ball_grid, "x*y+0.3*x")
        profile = DeGiorgi.measure_profile(v, [0.6, -0.2, 0.0, 0.2])
        assert list(profile.values) == sorted(profile.values)
        assert profile.implied_constant is not None


class TestOscillationDrop:
    """Tests for the quantitative maximum principle."""

    def test_linear_field_drops(self, ball_grid):
        report = DeGiorgi.oscillation_drop(FieldCalculus.field_from_expression(ball_grid, "x"), 0.25)
        assert report.passed
        assert report.measured["rho"] == pytest.approx(0.5)

    def test_solved_field_drops(self, harmonic_solution):
        u, _ = harmonic_solution
        report = DeGiorgi.oscillation_drop(u, 0.25)
        assert report.measured["rho"] < 1.0

    def test_non_positive_field(self, ball_grid):
        with pytest.raises(NotApplicableError):
            DeGiorgi.oscillation_drop(FieldCalculus.field_from_expression(ball_grid, "-1"), 0.25)

    def test_positive_constant_has_no_zero_set(self, ball_grid):
        with pytest.raises(NotApplicableError):
            DeGiorgi.oscillation_drop(FieldCalculus.field_from_expression(ball_grid, "1"), 0.25)

    def test_delta_range(self, ball_grid):
        with pytest.raises(InvalidParameterError):
            DeGiorgi.oscillation_drop(FieldCalculus.field_from_expression(ball_grid, "x"), 0.0)


class TestGeometricLemma:
    """Tests for a_{k+1} = C^k a_k^(1+δ)."""

    def test_small_start_converges(self):
        trace = DeGiorgi.seq_lemma_geometric(2.0, 1.0, 2.0**-10)
        assert trace.verdict is SequenceVerdict.CONVERGES
        assert trace.threshold == pytest.approx(0.5, rel=1e-5)

    def test_unit_start_diverges(self):
        trace = DeGiorgi.seq_lemma_geometric(2.0, 1.0, 1.0, bisect=False)
        assert trace.verdict is SequenceVerdict.DIVERGES
        assert trace.threshold is None

    def test_zero_start(self):
        trace = DeGiorgi.seq_lemma_geometric(2.0, 1.0, 0.0, kmax=10, bisect=False)
        assert trace.verdict is SequenceVerdict.CONVERGES
        assert trace.sequence == (0.0,) * 11

    def test_terms_match_high_precision_iteration(self):
        """The log-space iteration agrees with a 50-digit reference."""
        C, delta, a0 = 2.0, 1.0, 0.51
        trace = DeGiorgi.seq_lemma_geometric(C, delta, a0, kmax=50, bisect=False)
        assert trace.verdict is SequenceVerdict.DIVERGES
        assert len(trace.sequence) > 6
        with mpmath.workdps(50):
            a = mpmath.mpf(a0)
            for k, term in enumerate(trace.sequence[:6]):
                assert term == pytest.approx(float(a), rel=1e-10)
                a = mpmath.mpf(C) ** k * a ** (1 + mpmath.mpf(delta))

    def test_threshold_matches_closed_form(self):
        for C, delta in [(2.0, 1.0), (4.0, 0.5), (10.0, 2.0)]:
            trace = DeGiorgi.seq_lemma_geometric(C, delta, 0.0, kmax=1)
            assert trace.threshold == pytest.approx(C ** (-1.0 / delta**2), rel=1e-5)

    def test_threshold_ordering(self):
        sweep = DeGiorgi.threshold_sweep([2.0, 4.0, 8.0], [0.5, 1.0, 2.0])
        assert sweep.thresholds.shape == (3, 3)
        assert np.all(np.diff(sweep.thresholds, axis=0) < 0)
        assert np.all(np.diff(sweep.thresholds, axis=1) > 0)

    @pytest.mark.parametrize("C, delta, a0, kmax", [(0.0, 1.0, 0.1, 10), (2.0, 0.0, 0.1, 10), (2.0, 1.0, -0.1, 10), (2.0, 1.0, 0.1, 0)])
    def test_parameters_are_checked(self, C, delta, a0, kmax):
        with pytest.raises(InvalidParameterError):
            DeGiorgi.seq_lemma_geometric(C, delta, a0, kmax=kmax)

    def test_sweep_parameters_are_checked(self):
        with pytest.raises(InvalidParameterError):
            DeGiorgi.threshold_sweep([2.0], [-1.0])

    @pytest.mark.parametrize("seed", range(20))
    def test_verdict_matches_256_bit_reference(self, seed):
        rng = np.random.default_rng(seed)
        C, delta = float(rng.uniform(1.5, 10.0)), float(rng.uniform(0.25, 2.0))
        a0 = C ** (-1.0 / delta**2) * float(rng.choice([0.5, 2.0]))
        trace = DeGiorgi.seq_lemma_geometric(C, delta, a0, bisect=False)
        assert trace.verdict is reference_verdict(C, delta, a0)


def reference_verdict(C: float, delta: float, a0: float) -> SequenceVerdict:
    """Iterate at 256-bit precision until a_k >= 1 or a_k < 2^-100000 (past which it only shrinks)."""
    with mpmath.workprec(256):
        c, d, a = mpmath.mpf(C), mpmath.mpf(delta), mpmath.mpf(a0)
        tiny = mpmath.mpf(2) ** -100000
        for k in range(400):
            if a >= 1:
                return SequenceVerdict.DIVERGES
            if a < tiny:
                return SequenceVerdict.CONVERGES
            a = c**k * a ** (1 + d)
    raise AssertionError(f"no reference verdict for C={C}, delta={delta}, a0={a0}")


class TestQuadraticLemma:
    """Tests for a_{k+1} = a_k - c a_k²."""

    def test_first_step(self):
        trace = DeGiorgi.seq_lemma_quadratic(0.1, 1.0, kmax=5)
        assert trace.sequence[1] == pytest.approx(0.9)
        assert trace.verdict is SequenceVerdict.BOUND_SATISFIED

    def test_zero_start(self):
        trace = DeGiorgi.seq_lemma_quadratic(0.3, 0.0, kmax=5)
        assert trace.sequence == (0.0,) * 6
        assert trace.verdict is SequenceVerdict.BOUND_SATISFIED

    def test_long_run(self):
        trace = DeGiorgi.seq_lemma_quadratic(0.5, 1.0, kmax=10_000)
        assert trace.verdict is SequenceVerdict.BOUND_SATISFIED
        assert len(trace.sequence) == 10_001

    def test_bound_is_tight_for_small_c(self):
        trace = DeGiorgi.seq_lemma_quadratic(1e-3, 1.0, kmax=1000)
        assert trace.bound_ratio_max == pytest.approx(1.0, abs=1e-2)

    @pytest.mark.parametrize("c", [0.01, 0.05, 0.1, 0.25, 0.5])
    @pytest.mark.parametrize("a0", [1.0, 0.5, 0.1])
    def test_bound_holds_to_ten_thousand_steps(self, c, a0):
        trace = DeGiorgi.seq_lemma_quadratic(c, a0, kmax=10_000)
        ks = np.arange(len(trace.sequence))
        assert trace.verdict is SequenceVerdict.BOUND_SATISFIED
        assert np.all(np.asarray(trace.sequence) <= 1.0 / (1.0 + c * ks) + 1e-15)

    @pytest.mark.parametrize("c, a0", [(0.9, 0.5), (0.0, 0.5), (0.1, 1.5)])
    def test_parameters_are_checked(self, c, a0):
        with pytest.raises(InvalidParameterError):
            DeGiorgi.seq_lemma_quadratic(c, a0)
