"""
Markdown report rendered through a jinja2 template
"""
import logging
from typing import Optional

from jinja2 import Environment, StrictUndefined

from src.report.writer import ReportDocument, ReportWriter

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE = """# Forecast risk report

Tool version {{ tool_version }}, config {{ config_hash or "n/a" }}

| Model | Variant | Mode | MAPE (%) | UPR (%) | Reserve (%) | Bias (MW) | OPR (%) | Reserve (MW) | Points |
|---|---|---|---|---|---|---|---|---|---|
{% for row in rows -%}
| {{ row.model }} | {{ row.variant }} | {{ row.mode }} | {{ row.metrics.mape_pct | num(2) }} | {{ row.metrics.upr_pct | num(1) }} | {{ row.metrics.reserve_pct | num(2) }} | {{ row.metrics.bias_mw | num(1) }} | {{ row.metrics.opr_pct | num(1) }} | {{ row.metrics.reserve_mw | num(1) }} | {{ row.metrics.n_points }} |
{% endfor %}
{%- for row in rows if row.per_lead_mape %}
## {{ row.model }} / {{ row.variant }}

| Lead (h) | MAPE (%) |
|---|---|
{% for lead, value in row.per_lead_mape.items() -%}
| {{ lead }} | {{ value | num(2) }} |
{% endfor %}
{%- if row.fold_mape %}
Per-fold MAPE: {{ row.fold_mape.mean | num(2) }} ± {{ row.fold_mape.std | num(2) }} over {{ row.fold_mape.n_folds }} folds
{% endif %}
{%- endfor %}
"""


def _num(value, digits: int = 2) -> str:
    return f"{value:.{digits}f}"


class MarkdownReportWriter(ReportWriter):
    """
    Renders ``report.md`` from the template directory, or a built-in table
    """

    def __init__(self, output_dir: str, template_dir: Optional[str] = None):
        super().__init__(output_dir, template_dir)
        environment = Environment(undefined=StrictUndefined, keep_trailing_newline=True)
        environment.filters["num"] = _num
        source = self._load_template('report.md') or DEFAULT_TEMPLATE
        self.template = environment.from_string(source)

    def render(self, document: ReportDocument) -> str:
        return self.template.render(
            rows=document.rows,
            tool_version=document.tool_version,
            config_hash=document.config_hash,
        )

    def _get_extension(self) -> str:
        return ".md"
