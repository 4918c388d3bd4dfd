"""
Tests for the field CSV format, report blocks, tables and figures.
"""

import math

import numpy as np
import pandas as pd
import pytest

from core.domain.entities.gradient_cloud import GradientCloud
from core.domain.entities.reports import HolderFit, IterationTrace, LevelProfile, ProbeReport
from core.domain.value_objects.mask_kind import MaskKind
from core.domain.value_objects.verdicts import SequenceVerdict
from core.services.degiorgi import DeGiorgi
from core.services.hedgehog import Hedgehog
from etl.extractors.field_reader import FieldFormatError, parse_header, read_field
from etl.loaders import svg_plots
from etl.loaders.field_writer import write_field
from etl.loaders.report_writer import parse_report, render_blocks, write_report
from etl.loaders.table_writer import (
    hedgehog_frame,
    profile_frame,
    scaling_frame,
    sequence_frame,
    sweep_frame,
    write_table,
)

from .conftest import create_field


def create_trace(**kwargs) -> IterationTrace:
    """Factory function to create an IterationTrace with sensible defaults."""
    defaults = {
        "sequence": (1.0, 0.5, 0.25),
        "parameters": {"C": 2.0, "delta": 1.0},
        "verdict": SequenceVerdict.CONVERGES,
    }
    defaults.update(kwargs)
    return IterationTrace(**defaults)


def square_rows(rows: list[str], res: int = 33) -> str:
    header = f"# dim=2 res={res} mask=square\n"
    return header + "\n".join(rows) + "\n"


class TestParseHeader:
    """Tests for field header lines."""

    def test_full_header(self):
        grid = parse_header("# dim=2 res=33 mask=ball half_width=2.0")
        assert (grid.dim, grid.resolution, grid.mask_kind, grid.half_width) == (2, 33, MaskKind.BALL, 2.0)

    def test_half_width_defaults_to_one(self):
        assert parse_header("# dim=2 res=33 mask=square").half_width == 1.0

    @pytest.mark.parametrize(
        "line",
        ["dim=2 res=33 mask=ball", "# dim=2 res=33", "# dim=2 res=33 mask=hexagon", "# dim=2 res mask=ball"],
    )
    def test_invalid_headers(self, line):
        with pytest.raises(FieldFormatError):
            parse_header(line)


class TestFieldFiles:
    """Tests for reading and writing field files."""

    def test_written_field_reads_back_exactly(self, tmp_path):
        field = create_field("sin(3*x)*exp(y)/3")
        path = write_field(field, tmp_path / "nested" / "u.csv")
        restored = read_field(path)
        assert restored.grid == field.grid
        assert np.array_equal(restored.values, field.values, equal_nan=True)

    def test_header_is_first_line(self, tmp_path):
        field = create_field("x", half_width=2.0)
        path = write_field(field, tmp_path / "u.csv")
        assert path.read_text(encoding="utf-8").splitlines()[0] == "# dim=2 res=33 mask=ball half_width=2.0"

    def test_missing_file(self, tmp_path):
        with pytest.raises(FieldFormatError):
            read_field(tmp_path / "absent.csv")

    def test_wrong_value_count(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text(square_rows([",".join(["0"] * 33)] * 3), encoding="utf-8")
        with pytest.raises(FieldFormatError, match="expected 33 rows"):
            read_field(path)

    def test_nan_on_active_node(self, tmp_path):
        rows = [",".join(["0"] * 33)] * 33
        rows[16] = ",".join(["nan"] + ["0"] * 32)
        path = tmp_path / "hole.csv"
        path.write_text(square_rows(rows), encoding="utf-8")
        with pytest.raises(FieldFormatError, match="finite"):
            read_field(path)

    def test_non_numeric_entry(self, tmp_path):
        rows = [",".join(["0"] * 33)] * 33
        rows[0] = ",".join(["abc"] + ["0"] * 32)
        path = tmp_path / "text.csv"
        path.write_text(square_rows(rows), encoding="utf-8")
        with pytest.raises(FieldFormatError):
            read_field(path)


class TestReportWriter:
    """Tests for key=value report blocks."""

    def test_render_and_parse(self):
        report = ProbeReport.from_margin("l2linf", {"ratio": 0.5}, 0.5)
        text = render_blocks([("l2linf", report), ("run", ["seed=1"])])
        assert text.startswith("[l2linf]\nprobe=l2linf\n")
        assert "\n\n[run]\nseed=1\n" in text
        sections = parse_report(text)
        assert sections["run"] == {"seed": "1"}
        assert sections["l2linf"]["probe"] == "l2linf"

    def test_no_blocks(self):
        assert render_blocks([]) == ""

    def test_write_report_creates_directories(self, tmp_path):
        path = write_report([("seq1", create_trace())], tmp_path / "a" / "report.txt")
        assert "verdict=" in path.read_text(encoding="utf-8")


class TestTables:
    """Tests for the pandas table builders."""

    def test_sequence_frame(self):
        frame = sequence_frame(create_trace())
        assert list(frame.columns) == ["k", "a"]
        assert frame["a"].tolist() == [1.0, 0.5, 0.25]

    def test_profile_frame(self):
        frame = profile_frame(LevelProfile("V", (0.0, 0.5), (2.0, 1.0)))
        assert list(frame.columns) == ["s", "V"]

    def test_scaling_frame_pads_decay(self):
        fit = HolderFit("oscillation", (0.5, 0.25), (1.0, 0.5), 1.0, 0.0, decay_factors=(0.5,))
        frame = scaling_frame(fit)
        assert list(frame.columns) == ["r", "oscillation", "decay"]
        assert frame["decay"].iloc[0] == 0.5
        assert math.isnan(frame["decay"].iloc[1])

    def test_sweep_frame_layout(self):
        frame = sweep_frame(DeGiorgi.threshold_sweep([2.0, 4.0], [1.0]))
        assert frame.index.name == "C"
        assert list(frame.columns) == ["delta=1"]
        assert frame.loc[2.0, "delta=1"] == pytest.approx(0.5, rel=1e-5)

    def test_hedgehog_frame_columns(self):
        cloud = Hedgehog.hedgehog_cloud(Hedgehog.perturbed_support(0.1), 40)
        frame = hedgehog_frame(cloud)
        assert list(frame.columns) == ["x1", "x2", "p1", "p2", "nu1", "nu2", "residual", "singular", "orientation", "component"]
        assert len(frame) == 40

    def test_tables_are_reproducible(self, tmp_path):
        frame = pd.DataFrame({"r": [0.5, 0.25], "osc": [1.0 / 3.0, math.nan]})
        first = write_table(frame, tmp_path / "one.csv").read_bytes()
        second = write_table(frame, tmp_path / "two.csv").read_bytes()
        assert first == second
        assert b"nan" in first


class TestFigures:
    """Tests for the SVG figures."""

    def test_sequence_figure_is_reproducible(self, tmp_path):
        first = svg_plots.plot_sequence(create_trace(), tmp_path / "one.svg").read_bytes()
        second = svg_plots.plot_sequence(create_trace(), tmp_path / "two.svg").read_bytes()
        assert first == second
        assert b"<svg" in first

    def test_cloud_figure_with_chops(self, tmp_path):
        cloud = GradientCloud(np.array([[0.0, 0.0], [1.0, 0.5], [0.5, 1.0]]), (0.0, 0.0), 0.25)
        path = svg_plots.plot_cloud(
            cloud, tmp_path / "plots" / "cloud.svg", line=((1.0, 0.0), 0.2, 0.05), circle=((0.0, 0.0), 0.3, 0.6)
        )
        assert path.is_file()

    def test_profile_and_hedgehog_figures(self, tmp_path):
        svg_plots.plot_profile(LevelProfile("W", (0.0, 0.5), (0.5, 0.8)), tmp_path / "w.svg")
        cloud = Hedgehog.hedgehog_cloud(Hedgehog.abs_fixture(2), 40)
        svg_plots.plot_hedgehog(cloud, tmp_path / "h.svg")
        assert (tmp_path / "w.svg").is_file()
        assert (tmp_path / "h.svg").is_file()
