"""Rendering: output files, determinism, CI bands, error paths."""

import math

import pytest
from matplotlib.collections import PolyCollection

from scora_plots.render import FigureSpec, build_figure, render

HEADER = "b,p_c,metric,mean,ci95,n_success,n_failed,embedding,f,g,pipeline\n"


def convergence_csv(tmp_path):
    rows = [HEADER]
    for p_c in (0.0, 0.5, 1.0):
        for i, b in enumerate((1e2, 1e3, 1e4, 1e5)):
            mean = 0.4 + 0.12 * i + 0.05 * p_c
            rows.append(
                f"{b},{p_c},corr,{mean},{0.03},20,0,identity,uniform,uniform,passive\n"
            )
    path = tmp_path / "convergence.csv"
    path.write_text("".join(rows))
    return path


def sweetspot_csv(tmp_path):
    rows = [HEADER]
    for p_c in (0.0, 0.25, 0.5, 0.75, 1.0):
        mean = 0.6 + 0.3 * math.sin(math.pi * p_c)
        rows.append(
            f"100000.0,{p_c},corr_exp,{mean},{0.02},20,0,onehot:5,kary:2,kary:2,active:ratings\n"
        )
    path = tmp_path / "sweetspot.csv"
    path.write_text("".join(rows))
    return path


def baseline_csv(tmp_path):
    rows = [HEADER]
    for pipeline in ("active:ratings", "active:comparisons"):
        for p_c in (0.0, 0.5, 1.0):
            mean = 0.5 + (0.2 if pipeline == "active:ratings" else 0.1) * p_c
            rows.append(
                f"10000.0,{p_c},corr_exp,{mean},{0.01},20,0,onehot:5,kary:2,kary:5,{pipeline}\n"
            )
    path = tmp_path / "baseline.csv"
    path.write_text("".join(rows))
    return path


class TestRender:
    @pytest.mark.parametrize("suffix", ["png", "svg"])
    def test_deterministic_output(self, tmp_path, suffix):
        csv_path = convergence_csv(tmp_path)
        outputs = []
        for name in ("one", "two"):
            out = tmp_path / f"{name}.{suffix}"
            render(FigureSpec(str(csv_path), "convergence", str(out)))
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        assert len(outputs[0]) > 1000

    def test_each_kind_renders(self, tmp_path):
        for kind, maker in (
            ("convergence", convergence_csv),
            ("sweetspot", sweetspot_csv),
            ("baseline_comparison", baseline_csv),
        ):
            out = tmp_path / f"{kind}.png"
            render(FigureSpec(str(maker(tmp_path)), kind, str(out)))
            assert out.stat().st_size > 0

    def test_input_csv_not_mutated(self, tmp_path):
        csv_path = convergence_csv(tmp_path)
        before = csv_path.read_bytes()
        render(FigureSpec(str(csv_path), "convergence", str(tmp_path / "out.png")))
        assert csv_path.read_bytes() == before

    def test_ci_bands_present_per_group(self, tmp_path):
        figure = build_figure(FigureSpec(str(convergence_csv(tmp_path)), "convergence",
                                         str(tmp_path / "unused.png")))
        axes = figure.axes[0]
        bands = [c for c in axes.collections if isinstance(c, PolyCollection)]
        assert len(bands) == 3  # one band per p_c group
        assert len(axes.lines) == 3
        assert axes.get_xscale() == "log"

    def test_sweetspot_linear_axis_and_grouping(self, tmp_path):
        figure = build_figure(FigureSpec(str(sweetspot_csv(tmp_path)), "sweetspot",
                                         str(tmp_path / "unused.png")))
        axes = figure.axes[0]
        assert axes.get_xscale() == "linear"
        assert len(axes.lines) == 1  # single budget group

    def test_baseline_groups_by_pipeline(self, tmp_path):
        figure = build_figure(FigureSpec(str(baseline_csv(tmp_path)), "baseline_comparison",
                                         str(tmp_path / "unused.png")))
        labels = [line.get_label() for line in figure.axes[0].lines]
        assert sorted(labels) == [
            "pipeline=active:comparisons",
            "pipeline=active:ratings",
        ]


class TestErrors:
    def test_empty_csv_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(HEADER)
        with pytest.raises(ValueError):
            render(FigureSpec(str(path), "convergence", str(tmp_path / "out.png")))

    def test_missing_columns_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("b,mean\n1,0.5\n")
        with pytest.raises(ValueError):
            render(FigureSpec(str(path), "convergence", str(tmp_path / "out.png")))

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            FigureSpec("whatever.csv", "scatter", "out.png")

    def test_all_failed_rows_rejected(self, tmp_path):
        path = tmp_path / "failed.csv"
        path.write_text(HEADER + "0.0,0.5,corr,nan,nan,0,20,identity,uniform,uniform,passive\n")
        with pytest.raises(ValueError):
            render(FigureSpec(str(path), "convergence", str(tmp_path / "out.png")))

    def test_cli_error_exit_codes(self, tmp_path):
        from scora_plots.cli import cli_main

        path = tmp_path / "empty.csv"
        path.write_text(HEADER)
        code = cli_main(
            ["render", "--kind", "convergence", "--in", str(path),
             "--out", str(tmp_path / "o.png")]
        )
        assert code == 1

    def test_cli_renders(self, tmp_path):
        from scora_plots.cli import cli_main

        csv_path = convergence_csv(tmp_path)
        out = tmp_path / "fig.png"
        code = cli_main(
            ["render", "--kind", "convergence", "--in", str(csv_path), "--out", str(out)]
        )
        assert code == 0
        assert out.exists()
