"""Batch front end: experiment files in, convergence tables out."""

from .config import COMMANDS, ExperimentSpec, emit_spec, parse_spec, parse_spec_text, with_overrides
from .main import build_parser, main
from .output import HEADER, emit, render_csv, render_json
from .run import ReportRecord, build_operator, execute

__all__ = [
    "COMMANDS",
    "ExperimentSpec",
    "HEADER",
    "ReportRecord",
    "build_operator",
    "build_parser",
    "emit",
    "emit_spec",
    "execute",
    "main",
    "parse_spec",
    "parse_spec_text",
    "render_csv",
    "render_json",
    "with_overrides",
]
