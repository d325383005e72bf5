"""Render experiment-result CSVs as figures with confidence bands."""

from scora_plots.render import KINDS, FigureSpec, build_figure, render

__all__ = ["KINDS", "FigureSpec", "build_figure", "render"]
