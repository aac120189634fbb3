"""Document language, task runner, reports and command line."""

from .build import BuildError, Workspace
from .report import TaskReport, read_report, render_json_lines, render_text
from .syntax import DocumentError, LexError, ParseError, ResolutionError, SpecDocument, parse, serialize
from .tasks import UsageError, replay, run_task

__all__ = [
    "BuildError", "DocumentError", "LexError", "ParseError", "ResolutionError", "SpecDocument",
    "TaskReport", "UsageError", "Workspace", "parse", "read_report", "render_json_lines",
    "render_text", "replay", "run_task", "serialize",
]
