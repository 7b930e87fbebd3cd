"""Design-session reports: typed document model plus HTML/JSON renderers.

A report is an ordered list of sections, one per selected calculation mode,
assembled from the modules' result payloads.  Every numeric entering the
document is rounded to 6 significant digits at build time, so the JSON
rendering round-trips exactly (parse after render reproduces the document)
and the HTML formatting rules below stay consistent with it:

  physical gains (K_p, K_d, alpha*, beta)  2 decimals
  other scalars                            4 decimals (or %.4g off-scale)
  data-table cells                         %.6g

Figures embed both their raw series and a self-contained inline SVG built
by pure string formatting, so two renderings of the same document are
byte-identical.
"""

import html
import json
from dataclasses import dataclass, field
from math import isfinite

import numpy as np

from . import __version__
from .errors import InvalidInput

MODE_ORDER = (
    "GenericMID",
    "ControlMID",
    "CRRID",
    "Admissibility",
    "Spectrum",
    "Sensitivity",
    "Simulation",
    "Factorization",
)

HTML_TABLE_ROW_CAP = 50

_GAIN_KEYS = {"K_p", "K_d", "beta", "alpha", "alpha0", "alpha1"}

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _r6(value):
    """Round to 6 significant digits; None passes through."""
    if value is None:
        return None
    v = float(value)
    if not isfinite(v):
        raise InvalidInput("non_finite_input", "report values must be finite")
    return float("%.6g" % v)


# ----------------------------------------------------------------- blocks


@dataclass(frozen=True)
class TextBlock:
    title: str
    body: str

    def to_dict(self) -> dict:
        return {"type": "text", "title": self.title, "body": self.body}


@dataclass(frozen=True)
class KeyValueBlock:
    title: str
    rows: tuple  # (key, value) pairs; values are 6-sig floats, strings, or None

    def to_dict(self) -> dict:
        return {
            "type": "keyvalue",
            "title": self.title,
            "rows": [[k, v] for k, v in self.rows],
        }


@dataclass(frozen=True)
class DataTableBlock:
    title: str
    columns: tuple
    rows: tuple  # tuple of row tuples, all 6-sig floats

    def to_dict(self) -> dict:
        return {
            "type": "table",
            "title": self.title,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
        }


@dataclass(frozen=True)
class FigureBlock:
    title: str
    series: tuple  # (label, xs, ys) triples, raw data at 6 significant digits
    svg: str

    def to_dict(self) -> dict:
        return {
            "type": "figure",
            "title": self.title,
            "series": [
                {"label": lbl, "x": list(xs), "y": list(ys)}
                for lbl, xs, ys in self.series
            ],
            "svg": self.svg,
        }


_BLOCK_TYPES = {"text", "keyvalue", "table", "figure"}


def _block_from_dict(data: dict):
    kind = data.get("type")
    if kind not in _BLOCK_TYPES:
        raise InvalidInput(
            "unknown_block_type", f"unknown report block type {kind!r}"
        )
    try:
        if kind == "text":
            return TextBlock(title=data["title"], body=data["body"])
        if kind == "keyvalue":
            return KeyValueBlock(
                title=data["title"],
                rows=tuple((k, v) for k, v in data["rows"]),
            )
        if kind == "table":
            return DataTableBlock(
                title=data["title"],
                columns=tuple(data["columns"]),
                rows=tuple(tuple(r) for r in data["rows"]),
            )
        return FigureBlock(
            title=data["title"],
            series=tuple(
                (s["label"], tuple(s["x"]), tuple(s["y"])) for s in data["series"]
            ),
            svg=data["svg"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(
            "report_schema_mismatch", f"malformed {kind} block: {exc}"
        ) from exc


# --------------------------------------------------------------- document


@dataclass(frozen=True)
class ReportDocument:
    metadata: tuple  # (key, value) pairs: title, timestamp, version
    sections: tuple = field(default_factory=tuple)

    def __post_init__(self):
        titles = [b.title for b in self.sections]
        if len(set(titles)) != len(titles):
            raise InvalidInput("validation_error", "section titles must be unique")
        for block in self.sections:
            for value in _numeric_cells(block):
                if value is not None and not isfinite(value):
                    raise InvalidInput(
                        "non_finite_input", "report cells must be finite"
                    )

    def to_dict(self) -> dict:
        return {
            "metadata": dict(self.metadata),
            "sections": [b.to_dict() for b in self.sections],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        try:
            meta = tuple(data["metadata"].items())
            sections = tuple(_block_from_dict(b) for b in data["sections"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidInput(
                "report_schema_mismatch", f"malformed report document: {exc}"
            ) from exc
        return cls(metadata=meta, sections=sections)


def _numeric_cells(block):
    if isinstance(block, KeyValueBlock):
        for _, v in block.rows:
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                yield float(v)
    elif isinstance(block, DataTableBlock):
        for row in block.rows:
            for v in row:
                yield float(v)
    elif isinstance(block, FigureBlock):
        for _, xs, ys in block.series:
            for v in xs:
                yield float(v)
            for v in ys:
                yield float(v)


# ------------------------------------------------------------ svg figures


def _svg_polylines(series, width=480, height=300, scatter=False, vline=None):
    """Self-contained SVG: polylines or scatter in a framed viewport.

    Coordinates are formatted at fixed precision so identical input always
    produces identical bytes.
    """
    pad = 36.0
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if vline is not None:
        xs_all.append(vline)
    if not xs_all or not ys_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi - x_lo < 1e-300:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-300:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def sx(x):
        return pad + (x - x_lo) / (x_hi - x_lo) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y_lo) / (y_hi - y_lo) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">',
        f'<rect x="{pad:.2f}" y="{pad:.2f}" width="{width - 2 * pad:.2f}" '
        f'height="{height - 2 * pad:.2f}" fill="none" stroke="#999"/>',
        f'<text x="{pad:.2f}" y="{height - 8:.2f}" font-size="11" fill="#555">'
        f"{_r6(x_lo)} .. {_r6(x_hi)}</text>",
        f'<text x="4" y="{pad - 8:.2f}" font-size="11" fill="#555">'
        f"{_r6(y_lo)} .. {_r6(y_hi)}</text>",
    ]
    if vline is not None:
        parts.append(
            f'<line x1="{sx(vline):.2f}" y1="{pad:.2f}" x2="{sx(vline):.2f}" '
            f'y2="{height - pad:.2f}" stroke="#d62728" stroke-dasharray="4 3"/>'
        )
    for idx, (label, xs, ys) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        if scatter:
            for x, y in zip(xs, ys):
                parts.append(
                    f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                    f'fill="{color}"><title>{html.escape(label)}</title></circle>'
                )
        else:
            points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
            parts.append(
                f'<polyline points="{points}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"><title>{html.escape(label)}</title></polyline>'
            )
    parts.append("</svg>")
    return "".join(parts)


# ------------------------------------------------------------- assembling


def _as_payload_dict(payload) -> dict:
    if hasattr(payload, "to_dict"):
        return payload.to_dict()
    if isinstance(payload, dict):
        return payload
    raise InvalidInput(
        "validation_error", f"unsupported report payload type {type(payload).__name__}"
    )


def _coeff_rows(prefix, values):
    return [(f"{prefix}{i}", _r6(v)) for i, v in enumerate(values)]


def _placement_section(mode, payload):
    data = _as_payload_dict(payload)
    gains = None
    if "placement" in data:
        gains = data.get("gains")
        data = _as_payload_dict(data["placement"])
    qp = data["qp"]
    rows = [
        ("s0", _r6(data["s0"])),
        ("tau", _r6(qp["tau"])),
        ("multiplicity", data["multiplicity"]),
        ("condition", _r6(data["condition"])),
    ]
    rows += _coeff_rows("a", qp["a"])
    rows += _coeff_rows("b", qp["b"])
    rows += [(f"residual{i}", _r6(r)) for i, r in enumerate(data["residuals"])]
    if gains:
        rows += [(k, _r6(v)) for k, v in gains.items()]
    title = (
        "Generic maximal-multiplicity design"
        if mode == "GenericMID"
        else "Control-oriented multiplicity design"
    )
    return [KeyValueBlock(title=title, rows=tuple(rows))]


def _crrid_section(payload):
    data = _as_payload_dict(payload)
    qp = data["qp"]
    rows = [(f"root{i}", _r6(r)) for i, r in enumerate(data["roots"])]
    rows += [("tau", _r6(qp["tau"])), ("condition", _r6(data["condition"]))]
    rows += _coeff_rows("a", qp["a"])
    rows += _coeff_rows("b", qp["b"])
    return [KeyValueBlock(title="Coexisting real roots design", rows=tuple(rows))]


def _admissibility_section(payload):
    data = _as_payload_dict(payload)
    s0s = data["s0_values"]
    taus = data["tau_values"]
    values = data["values"]
    rows = tuple(
        (_r6(s0), _r6(tau), _r6(values[i][j]))
        for i, s0 in enumerate(s0s)
        for j, tau in enumerate(taus)
    )
    table = DataTableBlock(
        title="Admissibility samples", columns=("s0", "tau", "F"), rows=rows
    )
    series = tuple(
        (
            f"boundary {k}",
            tuple(_r6(p[0]) for p in curve),
            tuple(_r6(p[1]) for p in curve),
        )
        for k, curve in enumerate(data.get("curves", []))
    )
    figure = FigureBlock(
        title="Admissibility boundary",
        series=series,
        svg=_svg_polylines(series),
    )
    summary = KeyValueBlock(
        title="Admissibility map",
        rows=(
            ("s0_min", _r6(min(s0s))),
            ("s0_max", _r6(max(s0s))),
            ("tau_min", _r6(min(taus))),
            ("tau_max", _r6(max(taus))),
            ("samples", len(s0s) * len(taus)),
            ("boundary curves", len(series)),
        ),
    )
    return [summary, table, figure]


def _spectrum_section(payload):
    data = _as_payload_dict(payload)
    win = data["window"]
    rows = tuple(
        (_r6(r["re"]), _r6(r["im"]), r["multiplicity"], _r6(r["residual"]))
        for r in data["roots"]
    )
    table = DataTableBlock(
        title="Spectrum roots",
        columns=("re", "im", "multiplicity", "residual"),
        rows=rows,
    )
    pts = (
        "roots",
        tuple(_r6(r["re"]) for r in data["roots"]),
        tuple(_r6(r["im"]) for r in data["roots"]),
    )
    abscissa = data["abscissa"]
    figure = FigureBlock(
        title="Spectrum map",
        series=(pts,),
        svg=_svg_polylines(
            [pts], scatter=True, vline=None if abscissa is None else float(abscissa)
        ),
    )
    summary = KeyValueBlock(
        title="Spectrum",
        rows=(
            ("x_min", _r6(win["x_min"])),
            ("x_max", _r6(win["x_max"])),
            ("y_max", _r6(win["y_max"])),
            ("total_count", data["total_count"]),
            ("abscissa", _r6(abscissa)),
            ("certified", str(bool(data["certified"]))),
        ),
    )
    return [summary, table, figure]


def _sensitivity_section(payload):
    data = _as_payload_dict(payload)
    taus = [_r6(t) for t in data["taus"]]
    re = data["re"]
    im = data["im"]
    conv = data["converged"]
    branches = len(re[0]) if re else 0
    rows = tuple(
        (taus[i], j, _r6(re[i][j]), _r6(im[i][j]), int(conv[i][j]))
        for i in range(len(taus))
        for j in range(branches)
    )
    table = DataTableBlock(
        title="Sensitivity samples",
        columns=("tau", "branch", "re", "im", "converged"),
        rows=rows,
    )
    series = tuple(
        (f"branch {j} re", tuple(taus), tuple(_r6(re[i][j]) for i in range(len(taus))))
        for j in range(branches)
    )
    figure = FigureBlock(
        title="Root branches vs delay",
        series=series,
        svg=_svg_polylines(series, vline=_r6(data["base_tau"])),
    )
    summary = KeyValueBlock(
        title="Delay sensitivity",
        rows=(
            ("s0", _r6(data["s0"])),
            ("base_tau", _r6(data["base_tau"])),
            ("steps", len(taus)),
            ("branches", branches),
        ),
    )
    return [summary, table, figure]


def _simulation_section(payload):
    data = _as_payload_dict(payload)
    t = [_r6(v) for v in data["t"]]
    y = [_r6(v) for v in data["y"]]
    series = (("y(t)", tuple(t), tuple(y)),)
    figure = FigureBlock(
        title="Simulated response", series=series, svg=_svg_polylines(series)
    )
    rows = [
        ("T", t[-1] if t else None),
        ("samples", len(t)),
        ("decay_estimate", _r6(data.get("decay_estimate"))),
    ]
    rows += [
        (f"final_state{i}", _r6(v)) for i, v in enumerate(data.get("final_state", []))
    ]
    summary = KeyValueBlock(title="Simulation", rows=tuple(rows))
    return [summary, figure]


def _factorization_section(payload):
    data = _as_payload_dict(payload)
    rows = [
        ("s0", _r6(data["s0"])),
        ("multiplicity", data["multiplicity"]),
        ("validation_residual", _r6(data["validation_residual"])),
    ]
    rows += [(f"w{i}", _r6(v)) for i, v in enumerate(data["weight_coeffs"])]
    hyper = data.get("hyper_params")
    if hyper:
        rows += [
            ("hyper_a", _r6(hyper["a"])),
            ("hyper_b", _r6(hyper["b"])),
            ("hyper_c", _r6(hyper["c"])),
        ]
    else:
        rows.append(("hyper_params", "unavailable"))
    return [KeyValueBlock(title="Factorized form at the placed root", rows=tuple(rows))]


_SECTION_BUILDERS = {
    "GenericMID": lambda p: _placement_section("GenericMID", p),
    "ControlMID": lambda p: _placement_section("ControlMID", p),
    "CRRID": _crrid_section,
    "Admissibility": _admissibility_section,
    "Spectrum": _spectrum_section,
    "Sensitivity": _sensitivity_section,
    "Simulation": _simulation_section,
    "Factorization": _factorization_section,
}


def build_report(
    selection, results, title: str = "Delay feedback design report",
    timestamp: str = "",
) -> ReportDocument:
    """Document with one section group per selected mode, in the fixed
    mode order; pass a timestamp for reproducible output (empty means
    "unspecified", never the wall clock — determinism is a feature)."""
    selection = set(selection)
    unknown = selection - set(MODE_ORDER)
    if unknown:
        raise InvalidInput(
            "validation_error", f"unknown report modes: {sorted(unknown)}"
        )
    results = dict(results or {})
    missing = [m for m in selection if results.get(m) is None]
    if missing:
        raise InvalidInput(
            "validation_error", f"selection without result: {sorted(missing)}"
        )
    sections = []
    for mode in MODE_ORDER:
        if mode in selection:
            sections.extend(_SECTION_BUILDERS[mode](results[mode]))
    metadata = (
        ("title", title),
        ("timestamp", timestamp),
        ("version", __version__),
    )
    return ReportDocument(metadata=metadata, sections=tuple(sections))


# -------------------------------------------------------------- rendering


def render_json(doc: ReportDocument) -> str:
    return json.dumps(doc.to_dict(), indent=2) + "\n"


def parse_json(text: str) -> ReportDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(
            "report_schema_mismatch", f"report is not valid JSON: {exc}"
        ) from exc
    return ReportDocument.from_dict(data)


def _fmt_html(key, value):
    if value is None:
        return "&#8212;"
    if isinstance(value, bool) or isinstance(value, str):
        return html.escape(str(value))
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if key in _GAIN_KEYS:
        return "%.2f" % v
    if v == 0.0 or 1e-2 <= abs(v) < 1e4:
        return "%.4f" % v
    return "%.4g" % v


_STYLE = (
    "body{font-family:sans-serif;margin:2em auto;max-width:60em;color:#222}"
    "h1{border-bottom:2px solid #444}h2{margin-top:1.6em;color:#333}"
    "table{border-collapse:collapse;margin:0.6em 0}"
    "td,th{border:1px solid #bbb;padding:0.25em 0.7em;text-align:right}"
    "th{background:#eee}.kv th{text-align:left}.meta{color:#777}"
)


def render_html(doc: ReportDocument) -> str:
    meta = dict(doc.metadata)
    out = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8"/>',
        f"<title>{html.escape(str(meta.get('title', 'Report')))}</title>",
        f"<style>{_STYLE}</style></head><body>",
        f"<h1>{html.escape(str(meta.get('title', 'Report')))}</h1>",
        f'<p class="meta">{html.escape(str(meta.get("timestamp", "")))}'
        f" &#183; toolchain version {html.escape(str(meta.get('version', '')))}</p>",
    ]
    for block in doc.sections:
        out.append(f"<section><h2>{html.escape(block.title)}</h2>")
        if isinstance(block, TextBlock):
            out.append(f"<p>{html.escape(block.body)}</p>")
        elif isinstance(block, KeyValueBlock):
            out.append('<table class="kv">')
            for k, v in block.rows:
                out.append(
                    f"<tr><th>{html.escape(str(k))}</th>"
                    f"<td>{_fmt_html(k, v)}</td></tr>"
                )
            out.append("</table>")
        elif isinstance(block, DataTableBlock):
            out.append("<table><tr>")
            out.extend(f"<th>{html.escape(str(c))}</th>" for c in block.columns)
            out.append("</tr>")
            for row in block.rows[:HTML_TABLE_ROW_CAP]:
                out.append(
                    "<tr>"
                    + "".join(f"<td>{'%.6g' % float(v)}</td>" for v in row)
                    + "</tr>"
                )
            out.append("</table>")
            hidden = len(block.rows) - HTML_TABLE_ROW_CAP
            if hidden > 0:
                out.append(
                    f'<p class="meta">&#8230; {hidden} more rows in the JSON '
                    "rendering</p>"
                )
        elif isinstance(block, FigureBlock):
            out.append(block.svg)
        out.append("</section>")
    out.append("</body></html>")
    return "\n".join(out) + "\n"
