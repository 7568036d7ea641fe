"""Report files: CSV tables, JSON summaries and the log-log SVG plot."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from deepnets.config import ExperimentConfig
from deepnets.exceptions import InvalidArgumentError, ReportWriteError
from deepnets.harness import SweepOutcome

__all__ = ["SWEEP_FIELDS", "emit_report", "emit_records", "render_rate_svg"]

logger = logging.getLogger(__name__)

SWEEP_FIELDS = ["m", "trial", "error", "seed"]

_WIDTH, _HEIGHT = 640, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 72, 24, 32, 56


def _write_text(path: Path, text: str) -> Path:
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportWriteError(path, exc.strerror or str(exc)) from exc
    logger.info("wrote %s", path)
    return path


def _csv_text(records: Sequence[Dict[str, Any]], fieldnames: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\n",
                            extrasaction="ignore")
    writer.writeheader()
    for record in records:
        writer.writerow(record)
    return buf.getvalue()


def _finite(value: Any) -> Any:
    """Non-finite floats become null; JSON has no spelling for them."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def _json_text(document: Any) -> str:
    return json.dumps(_finite(document), indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit_records(
    records: Sequence[Dict[str, Any]],
    cfg: ExperimentConfig,
    fieldnames: Sequence[str],
    summary: Optional[Dict[str, Any]] = None,
) -> List[Path]:
    """Write task records as CSV or as one JSON document ``{summary, records}``."""
    if not records:
        raise InvalidArgumentError("nothing to report")
    path = cfg.output_path
    if cfg.format == "csv":
        return [_write_text(path, _csv_text(records, fieldnames))]
    document = {"task": cfg.task, "config": cfg.echo(), "records": list(records)}
    if summary is not None:
        document["summary"] = summary
    return [_write_text(path, _json_text(document))]


def emit_report(results: SweepOutcome, cfg: ExperimentConfig) -> List[Path]:
    """Write the sweep table and its summary, plus the SVG plot when ``cfg.svg`` is set.

    ``csv``: the table at ``output`` (header ``m,trial,error,seed``) and the summary at
    ``<stem>.summary.json``. ``json``: one document holding the summary and the rows.

    :raises ReportWriteError: If a file cannot be written
    """
    if not results.rows:
        raise InvalidArgumentError("nothing to report")
    path = cfg.output_path
    summary = results.summary.model_dump(mode="json")
    rows = [row.as_record() for row in results.rows]
    written = []
    if cfg.format == "csv":
        written.append(_write_text(path, _csv_text(rows, SWEEP_FIELDS)))
        summary_path = path.with_name(path.stem + ".summary.json")
        written.append(_write_text(summary_path, _json_text(summary)))
    else:
        written.append(_write_text(path, _json_text({**summary, "rows": rows})))
    if cfg.svg:
        written.append(_write_text(path.with_suffix(".svg"), render_rate_svg(results)))
    return written


def _decades(lo: float, hi: float) -> List[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def render_rate_svg(results: SweepOutcome) -> str:
    """Log-log scatter of per-trial errors with per-m means, the fitted line and the
    theoretical slope drawn through the first mean."""
    points = [(row.m, row.error) for row in results.rows if row.error > 0]
    rate = results.rate
    means = [(m, e) for m, e in zip(rate.m_values, rate.mean_errors) if e > 0]
    if not points:
        points = [(m, 1.0) for m in rate.m_values]
    lx = [math.log10(m) for m, _ in points]
    ly = [math.log10(e) for _, e in points]
    x0, x1 = min(lx) - 0.1, max(lx) + 0.1
    y0, y1 = min(ly) - 0.25, max(ly) + 0.25
    plot_w = _WIDTH - _LEFT - _RIGHT
    plot_h = _HEIGHT - _TOP - _BOTTOM

    def px(v: float) -> float:
        return _LEFT + (v - x0) / (x1 - x0) * plot_w

    def py(v: float) -> float:
        return _TOP + (y1 - v) / (y1 - y0) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{plot_w}" height="{plot_h}" fill="none" '
        f'stroke="black"/>',
    ]
    for k in _decades(x0, x1):
        if x0 <= k <= x1:
            parts.append(f'<line x1="{px(k):.2f}" y1="{_TOP + plot_h}" x2="{px(k):.2f}" '
                         f'y2="{_TOP + plot_h + 5}" stroke="black"/>')
            parts.append(f'<text x="{px(k):.2f}" y="{_TOP + plot_h + 20}" '
                         f'text-anchor="middle">1e{k}</text>')
    for k in _decades(y0, y1):
        if y0 <= k <= y1:
            parts.append(f'<line x1="{_LEFT - 5}" y1="{py(k):.2f}" x2="{_LEFT}" y2="{py(k):.2f}" '
                         f'stroke="black"/>')
            parts.append(f'<text x="{_LEFT - 8}" y="{py(k) + 4:.2f}" '
                         f'text-anchor="end">1e{k}</text>')
    parts.append(f'<text x="{_LEFT + plot_w / 2:.2f}" y="{_HEIGHT - 12}" '
                 f'text-anchor="middle">sample size m</text>')
    parts.append(f'<text x="16" y="{_TOP + plot_h / 2:.2f}" text-anchor="middle" '
                 f'transform="rotate(-90 16 {_TOP + plot_h / 2:.2f})">generalization error</text>')
    for x, y in zip(lx, ly):
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2" fill="#9ecae1"/>')
    for m, e in means:
        parts.append(f'<circle cx="{px(math.log10(m)):.2f}" cy="{py(math.log10(e)):.2f}" r="4" '
                     f'fill="#08519c"/>')
    if not rate.degenerate:
        # fitted line in natural logs, drawn in log10 coordinates
        a, b = rate.intercept / math.log(10.0), rate.slope
        parts.append(_clipped_line(px, py, x0, x1, y0, y1, a, b, "#d62728", ""))
    if means:
        gm, ge = means[0]
        a = math.log10(ge) - rate.theory_exponent * math.log10(gm)
        parts.append(_clipped_line(px, py, x0, x1, y0, y1, a, rate.theory_exponent, "#555555",
                                   ' stroke-dasharray="6 4"'))
    label = "degenerate fit" if rate.degenerate else f"slope {rate.slope:.3f}"
    parts.append(f'<text x="{_LEFT + 8}" y="{_TOP + 16}">{label}, theory '
                 f'{rate.theory_exponent:.3f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _clipped_line(px, py, x0, x1, y0, y1, a, b, color, extra) -> str:
    """Segment of ``y = a + b x`` inside the plot box."""
    xs = [x0, x1]
    if b != 0:
        xs += [(y0 - a) / b, (y1 - a) / b]
    inside = sorted(x for x in xs if x0 <= x <= x1 and y0 - 1e-9 <= a + b * x <= y1 + 1e-9)
    if len(inside) < 2:
        return ""
    lo, hi = inside[0], inside[-1]
    return (f'<line x1="{px(lo):.2f}" y1="{py(a + b * lo):.2f}" x2="{px(hi):.2f}" '
            f'y2="{py(a + b * hi):.2f}" stroke="{color}" stroke-width="1.5"{extra}/>')
