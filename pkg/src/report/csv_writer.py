"""
CSV mirror of the report: one row per (model, variant)
"""
import logging
from typing import Any, Dict, List

import pandas as pd

from src.report.writer import ReportDocument, ReportRow, ReportWriter

logger = logging.getLogger(__name__)


def flatten_row(row: ReportRow, document: ReportDocument) -> Dict[str, Any]:
    """
    Flatten nested metrics into stable, ordered columns
    """
    flat: Dict[str, Any] = {"model": row.model, "variant": row.variant, "mode": row.mode}
    metrics = row.metrics.to_dict()
    counts = metrics.pop("large_error_counts")
    flat.update(metrics)
    for threshold, count in counts.items():
        flat[f"errors_over_{threshold}mw"] = count
    for lead, value in row.per_lead_mape.items():
        flat[f"mape_h{lead}_pct"] = value
    if row.fold_mape is not None:
        flat["fold_mape_mean_pct"] = row.fold_mape["mean"]
        flat["fold_mape_std_pct"] = row.fold_mape["std"]
        flat["n_folds"] = row.fold_mape["n_folds"]
    flat["schedule_hash"] = row.schedule_hash
    flat["config_hash"] = document.config_hash
    flat["tool_version"] = document.tool_version
    return flat


class CsvReportWriter(ReportWriter):
    def render(self, document: ReportDocument) -> str:
        records: List[Dict[str, Any]] = [flatten_row(row, document) for row in document.rows]
        columns: List[str] = []
        for record in records:
            columns.extend(c for c in record if c not in columns)
        frame = pd.DataFrame.from_records(records, columns=columns)
        return frame.to_csv(index=False, float_format="%.6f", lineterminator="\n")

    def _get_extension(self) -> str:
        return ".csv"
