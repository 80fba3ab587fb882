"""
JSON report writer
"""
from src.report.writer import ReportDocument, ReportWriter
from src.utils.file_utils import canonical_json


class JsonReportWriter(ReportWriter):
    def render(self, document: ReportDocument) -> str:
        return canonical_json(document.to_dict())

    def _get_extension(self) -> str:
        return ".json"
