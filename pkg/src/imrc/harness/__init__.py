"""Experiment harness: task streams, the streaming loop, diagnostics and reports."""

from .data import Task, TaskStream, load_dataset, save_stream, synthesize
from .diagnostics import durbin_levinson, partial_autocorrelation
from .report import read_report, report_write
from .runner import MODES, RunConfig, RunReport, run

__all__ = [
    "MODES", "RunConfig", "RunReport", "Task", "TaskStream", "durbin_levinson", "load_dataset",
    "partial_autocorrelation", "read_report", "report_write", "run", "save_stream", "synthesize",
]
