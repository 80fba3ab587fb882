"""
Report rows and the writer interface
"""
import logging
import os
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from src import __version__
from src.data.forecast_set import QuantileForecastSet
from src.metrics.report import ReportSettings, RiskReport, compute_risk_report, fold_mape_summary, per_lead_mape
from src.utils.errors import ConfigError, EmptySet
from src.utils.file_utils import ensure_dir, write_file

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReportRow:
    """
    One scored (model, variant) row
    """
    model: str
    variant: str
    mode: str
    metrics: RiskReport
    per_lead_mape: Dict[str, float]
    fold_mape: Optional[Dict[str, float]] = None
    schedule_hash: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "variant": self.variant,
            "mode": self.mode,
            "metrics": self.metrics.to_dict(),
            "per_lead_mape": dict(self.per_lead_mape),
            "fold_mape": self.fold_mape,
            "schedule_hash": self.schedule_hash,
        }


@dataclass(frozen=True)
class ReportDocument:
    rows: List[ReportRow]
    config_hash: str = ""
    tool_version: str = __version__

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "config_hash": self.config_hash,
            "rows": [row.to_dict() for row in self.rows],
        }


def build_report_row(fs: QuantileForecastSet, model: str, variant: str = "default", mode: str = "walkforward",
                     settings: Optional[ReportSettings] = None, schedule_hash: str = "") -> ReportRow:
    """
    Score a forecast set into a report row

    Walk-forward rows add per-lead MAPE and the per-fold MAPE mean/std;
    fixed-split rows score h_star only.
    """
    settings = settings or ReportSettings()
    metrics = compute_risk_report(fs, settings, mode)
    if mode == "fixed_split":
        return ReportRow(model, variant, mode, metrics, per_lead_mape(fs, [settings.h_star]), None, schedule_hash)
    return ReportRow(model, variant, mode, metrics, per_lead_mape(fs, settings.per_lead),
                     fold_mape_summary(fs), schedule_hash)


class ReportWriter(ABC):
    """
    Abstract base class for report writers
    """

    basename = "report"

    def __init__(self, output_dir: str, template_dir: Optional[str] = None):
        """
        Initialize the report writer

        Args:
            output_dir (str): Directory receiving the report
            template_dir (str, optional): Directory containing templates
        """
        self.output_dir = output_dir
        self.template_dir = template_dir
        ensure_dir(output_dir)
        logger.debug(f"Initialized {self.__class__.__name__} with output_dir: {output_dir}")

    @abstractmethod
    def render(self, document: ReportDocument) -> str:
        """
        Render the document as text

        Args:
            document (ReportDocument): Rows plus provenance

        Returns:
            str: File content
        """
        pass

    @abstractmethod
    def _get_extension(self) -> str:
        """
        File extension including the dot
        """
        pass

    def write(self, document: ReportDocument) -> str:
        """
        Render and write the report

        Returns:
            str: Path of the written file
        """
        path = os.path.join(self.output_dir, f"{self.basename}{self._get_extension()}")
        write_file(path, self.render(document))
        logger.info(f"Wrote {path}")
        return path

    def _load_template(self, template_name: str) -> Optional[str]:
        """
        Load a template file

        Returns:
            str or None: Template content, None when missing
        """
        if not self.template_dir:
            return None
        template_path = os.path.join(self.template_dir, template_name)
        if not os.path.exists(template_path):
            logger.warning(f"Template not found: {template_path}")
            return None
        with open(template_path, 'r', encoding='utf-8') as f:
            return f.read()


class ReportWriterFactory:
    """
    Factory class to create report writers by format
    """

    formats = ("json", "csv", "markdown", "html")

    def get_writer(self, format_type: str, output_dir: str, template_dir: Optional[str] = None) -> ReportWriter:
        """
        Get a writer for the specified format

        Args:
            format_type (str): 'json', 'csv', 'markdown' or 'html'
            output_dir (str): Output directory
            template_dir (str, optional): Directory containing templates

        Returns:
            ReportWriter: Writer instance

        Raises:
            ConfigError: If the format is not supported
        """
        format_type = format_type.lower()

        if format_type == 'json':
            from src.report.json_writer import JsonReportWriter
            return JsonReportWriter(output_dir, template_dir)
        elif format_type == 'csv':
            from src.report.csv_writer import CsvReportWriter
            return CsvReportWriter(output_dir, template_dir)
        elif format_type == 'markdown':
            from src.report.markdown_writer import MarkdownReportWriter
            return MarkdownReportWriter(output_dir, template_dir)
        elif format_type == 'html':
            from src.report.html_writer import HtmlReportWriter
            return HtmlReportWriter(output_dir, template_dir)
        else:
            raise ConfigError(f"Unsupported report format: {format_type}",
                              {"format": format_type, "allowed": list(self.formats)})


def emit_report(rows: Sequence[ReportRow], output_dir: str, formats: Sequence[str] = ("json", "csv"),
                config_hash: str = "", template_dir: Optional[str] = None) -> List[str]:
    """
    Write the report in every requested format

    Raises:
        EmptySet: If there are no rows
    """
    if not rows:
        raise EmptySet("Nothing to report")
    document = ReportDocument(list(rows), config_hash)
    factory = ReportWriterFactory()
    return [factory.get_writer(fmt, output_dir, template_dir).write(document) for fmt in formats]
