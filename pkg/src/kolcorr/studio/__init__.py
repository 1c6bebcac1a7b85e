"""Command-line front end, series analysis and export."""

from .analysis import AnalysisSeries, ema, phase_filter, residue_split, sign_pattern_break
from .export import RunConfig, export_analysis, export_series, read_table

__all__ = [
    "AnalysisSeries",
    "RunConfig",
    "ema",
    "export_analysis",
    "export_series",
    "phase_filter",
    "read_table",
    "residue_split",
    "sign_pattern_break",
]
