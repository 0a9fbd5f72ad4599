"""Report generation and formatting implementations."""

from mradon.reporters.reporter_service import ReporterService, ReportFormat, ReportTable, format_number

__all__ = ["ReporterService", "ReportFormat", "ReportTable", "format_number"]
