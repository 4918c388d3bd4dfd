"""
Tests for report entities.
"""

import math

import pytest

from core.domain.entities.reports import (
    ConvergenceReport,
    HolderFit,
    IterationTrace,
    LevelProfile,
    ProbeReport,
    format_value,
)
from core.domain.exceptions import InvalidParameterError
from core.domain.value_objects.verdicts import SequenceVerdict

from .conftest import create_report


class TestProbeReport:
    """Tests for the ProbeReport entity."""

    def test_pass_follows_margin(self):
        assert create_report(margin=0.0).passed
        assert not create_report(margin=-1e-9).passed

    def test_inconsistent_pass_flag_raises(self):
        """Should refuse a pass flag that contradicts the margin."""
        with pytest.raises(InvalidParameterError):
            ProbeReport(name="bad", passed=True, margin=-1.0)

    def test_to_lines(self):
        report = create_report("caccioppoli", 0.25, lhs=1.0, rhs=2.0)
        assert report.to_lines() == [
            "probe=caccioppoli",
            "pass=true",
            "margin=0.25",
            "lhs=1.0",
            "rhs=2.0",
        ]

    def test_notes_are_joined(self):
        report = ProbeReport.from_margin("audit", {}, 1.0, notes=("demonstration", "constant"))
        assert report.to_lines()[-1] == "notes=demonstration;constant"

    def test_measured_is_copied(self):
        measured = {"ratio": 0.5}
        report = ProbeReport.from_margin("probe", measured, 0.1)
        measured["ratio"] = 2.0
        assert report.measured["ratio"] == 0.5


class TestFormatValue:
    """Tests for report value formatting."""

    def test_floats_round_trip(self):
        assert float(format_value(0.1)) == 0.1
        assert format_value(1.0) == "1.0"

    def test_booleans_and_sequences(self):
        assert format_value(False) == "false"
        assert format_value((0.5, 0.25)) == "0.5,0.25"
        assert format_value(3) == "3"


class TestConvergenceReport:
    """Tests for the ConvergenceReport entity."""

    def test_to_lines_without_schedule(self):
        report = ConvergenceReport(
            converged=True, iterations=3, energy=4.0, residual=1e-9, threshold=1e-8, lagrangian="quadratic"
        )
        lines = report.to_lines()
        assert "converged=true" in lines
        assert "smoothing_schedule=none" in lines
        assert lines[0] == "lagrangian=quadratic"

    def test_to_lines_with_schedule(self):
        report = ConvergenceReport(
            converged=False, iterations=1, energy=1.0, residual=1.0, threshold=1e-8, smoothing_schedule=(0.001, 0.0001)
        )
        assert "smoothing_schedule=0.001,0.0001" in report.to_lines()


class TestHolderFit:
    """Tests for HolderFit exponents."""

    def test_oscillation_alpha_is_exponent(self):
        fit = HolderFit("oscillation", (0.5, 0.25), (1.0, 0.5), exponent=1.0, residual=0.0)
        assert fit.alpha == 1.0

    def test_energy_alpha_is_half_exponent(self):
        fit = HolderFit("energy", (0.5, 0.25), (1.0, 0.25), exponent=2.0, residual=0.0)
        assert fit.alpha == 1.0

    def test_constant_fit_is_flagged(self):
        fit = HolderFit("oscillation", (0.5, 0.25), (0.0, 0.0), exponent=math.nan, residual=0.0, constant=True)
        assert math.isnan(fit.alpha)
        assert fit.to_lines()[-1] == "notes=constant"


class TestIterationTrace:
    """Tests for IterationTrace validation."""

    def test_negative_term_raises(self):
        with pytest.raises(InvalidParameterError):
            IterationTrace((1.0, -0.5), {"C": 2.0}, SequenceVerdict.DIVERGES)

    def test_nan_term_raises(self):
        with pytest.raises(InvalidParameterError):
            IterationTrace((math.nan,), {}, SequenceVerdict.DIVERGES)

    def test_to_lines(self):
        trace = IterationTrace((0.5, 0.25), {"C": 2, "delta": 1}, SequenceVerdict.CONVERGES, threshold=0.5)
        assert trace.to_lines() == [
            "C=2.0",
            "delta=1.0",
            "verdict=converges-to-zero",
            "steps=2",
            "last=0.25",
            "threshold=0.5",
        ]


class TestLevelProfile:
    """Tests for LevelProfile invariants."""

    def test_valid_profiles(self):
        LevelProfile("V", (0.0, 0.5, 1.0), (2.0, 1.0, 0.0))
        LevelProfile("W", (0.0, 0.5), (0.2, 0.7), implied_constant=1.5)

    def test_v_must_be_non_increasing(self):
        with pytest.raises(InvalidParameterError):
            LevelProfile("V", (0.0, 0.5), (1.0, 2.0))

    def test_w_must_be_non_decreasing(self):
        with pytest.raises(InvalidParameterError):
            LevelProfile("W", (0.0, 0.5), (0.7, 0.2))

    def test_w_range(self):
        with pytest.raises(InvalidParameterError):
            LevelProfile("W", (0.0,), (1.5,))

    def test_heights_ascending(self):
        with pytest.raises(InvalidParameterError):
            LevelProfile("V", (0.5, 0.0), (1.0, 1.0))

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameterError):
            LevelProfile("X", (), ())
