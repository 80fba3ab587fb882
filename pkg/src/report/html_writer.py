"""
HTML report: the markdown report converted with python-markdown
"""
import html
import logging

import markdown

from src.report.markdown_writer import MarkdownReportWriter
from src.report.writer import ReportDocument

logger = logging.getLogger(__name__)

PAGE_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>
body {{ font-family: sans-serif; margin: 2em; }}
table {{ border-collapse: collapse; }}
th, td {{ border: 1px solid #ccc; padding: 4px 8px; text-align: right; }}
</style>
</head>
<body>
{content}
</body>
</html>
"""


class HtmlReportWriter(MarkdownReportWriter):
    def render(self, document: ReportDocument) -> str:
        content = markdown.markdown(super().render(document), extensions=['tables'])
        return PAGE_TEMPLATE.format(title=html.escape("Forecast risk report"), content=content)

    def _get_extension(self) -> str:
        return ".html"
