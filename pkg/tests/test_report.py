import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import jsonschema
import pytest

from delaylab import (
    InvalidInput,
    SpectralWindow,
    compute_grid,
    compute_spectrum,
    get_example,
    recover_gains,
    sensitivity_sweep,
    simulate,
    solve_control_mid,
    solve_crrid,
    HistorySpec,
)
from delaylab.factorization import integral_form
from delaylab.report import (
    DataTableBlock,
    FigureBlock,
    KeyValueBlock,
    ReportDocument,
    TextBlock,
    build_report,
    parse_json,
    render_html,
    render_json,
)

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "schemas" / "report.schema.json").read_text()
)


def _oscillator_placement():
    return solve_control_mid(a=[1.0, 0.0], m=1, tau=1.0, s0=-1.0)


def _pendulum_payload():
    ex = get_example("pendulum")
    q = 19.114
    tau = (20.0 - math.sqrt(400.0 - 8.0 * q)) / (2.0 * q)
    placed = solve_control_mid(a=list(ex.a), m=ex.m, tau=tau, s0=-5.0)
    return {"placement": placed, "gains": recover_gains(ex, placed)}


def test_empty_selection_is_metadata_only():
    doc = build_report(set(), {}, timestamp="2026-08-22T00:00:00Z")
    assert doc.sections == ()
    meta = dict(doc.metadata)
    assert meta["timestamp"] == "2026-08-22T00:00:00Z"
    html = render_html(doc)
    ET.fromstring(html.replace("<!DOCTYPE html>\n", ""))  # well-formed


def test_missing_payload_rejected():
    with pytest.raises(InvalidInput) as e:
        build_report({"Spectrum"}, {})
    assert "selection without result" in str(e.value)
    with pytest.raises(InvalidInput):
        build_report({"Fourier"}, {})


def test_control_mid_section_rounds_to_six_digits():
    doc = build_report({"ControlMID"}, {"ControlMID": _oscillator_placement()})
    (block,) = doc.sections
    rows = dict(block.rows)
    assert rows["b0"] == -0.735759  # -2/e at 6 significant digits
    assert rows["s0"] == -1.0
    html = render_html(doc)
    assert "-0.7358" in html


def test_pendulum_gains_render_with_paper_values():
    doc = build_report(
        {"ControlMID", "Spectrum"},
        {
            "ControlMID": _pendulum_payload(),
            "Spectrum": compute_spectrum(
                _pendulum_payload()["placement"].qp,
                SpectralWindow(-12.0, 1.0, 30.0),
            ),
        },
        timestamp="fixed",
    )
    html = render_html(doc)
    assert "192.16" in html
    assert "74.83" in html
    assert "<svg" in html  # spectrum figure block present
    # sections follow the fixed mode order: design before spectrum
    assert html.index("Control-oriented") < html.index("Spectrum")


def test_json_round_trip_identity():
    results = {
        "ControlMID": _oscillator_placement(),
        "Simulation": simulate(
            _oscillator_placement().qp, HistorySpec("constant", (0.1,)), T=2.0, h=0.1
        ),
    }
    doc = build_report({"ControlMID", "Simulation"}, results, timestamp="t0")
    text = render_json(doc)
    assert parse_json(text) == doc
    # a second rendering is byte-identical
    assert render_json(build_report({"ControlMID", "Simulation"}, results, timestamp="t0")) == text


def test_json_validates_against_published_schema():
    placed = _oscillator_placement()
    results = {
        "ControlMID": placed,
        "CRRID": solve_crrid(n=1, m=0, tau=1.0, roots=[-1.0, -2.0]),
        "Admissibility": compute_grid(
            a=[1.0, 0.0], m=1, s0_range=(-3.0, -0.2), tau_range=(0.1, 2.0), resolution=(12, 12)
        ),
        "Spectrum": compute_spectrum(placed.qp, SpectralWindow(-3.0, 0.5, 6.0)),
        "Sensitivity": sensitivity_sweep(placed.qp, s0=-1.0, tau_span=0.1, steps=5),
        "Simulation": simulate(placed.qp, HistorySpec("constant", (0.1,)), T=2.0, h=0.1),
        "Factorization": integral_form(placed.qp, -1.0, M=3),
    }
    doc = build_report(set(results), results, timestamp="t0")
    payload = json.loads(render_json(doc))
    jsonschema.validate(payload, SCHEMA)
    # no data loss: every simulation sample appears in the JSON document
    sim = results["Simulation"]
    fig = next(
        s for s in payload["sections"]
        if s["type"] == "figure" and s["title"] == "Simulated response"
    )
    assert len(fig["series"][0]["x"]) == len(sim.t)


def test_admissibility_table_is_complete_and_html_caps_rows():
    grid = compute_grid(
        a=[1.0, 0.0], m=1, s0_range=(-3.0, -0.2), tau_range=(0.1, 2.0), resolution=(12, 12)
    )
    doc = build_report({"Admissibility"}, {"Admissibility": grid}, timestamp="t0")
    table = next(b for b in doc.sections if isinstance(b, DataTableBlock))
    assert len(table.rows) == 144
    html = render_html(doc)
    assert "more rows in the JSON rendering" in html
    assert html.count("<tr>") < 144


def test_unique_section_titles_enforced():
    b = KeyValueBlock(title="Same", rows=(("k", 1.0),))
    with pytest.raises(InvalidInput):
        ReportDocument(metadata=(("title", "x"),), sections=(b, b))


def test_non_finite_cells_rejected():
    with pytest.raises(InvalidInput) as e:
        ReportDocument(
            metadata=(("title", "x"),),
            sections=(
                DataTableBlock(title="T", columns=("v",), rows=((float("nan"),),)),
            ),
        )
    assert e.value.code == "non_finite_input"


def test_unknown_block_type_on_parse():
    doc = build_report(set(), {}, timestamp="t0")
    payload = json.loads(render_json(doc))
    payload["sections"] = [{"type": "hologram", "title": "X"}]
    with pytest.raises(InvalidInput) as e:
        parse_json(json.dumps(payload))
    assert e.value.code == "unknown_block_type"
    with pytest.raises(InvalidInput) as e2:
        parse_json("not json at all {")
    assert e2.value.code == "report_schema_mismatch"


def test_figures_are_deterministic_inline_svg():
    placed = _oscillator_placement()
    sweep = sensitivity_sweep(placed.qp, s0=-1.0, tau_span=0.1, steps=5)
    d1 = build_report({"Sensitivity"}, {"Sensitivity": sweep}, timestamp="t0")
    d2 = build_report({"Sensitivity"}, {"Sensitivity": sweep}, timestamp="t0")
    assert render_html(d1) == render_html(d2)
    fig = next(b for b in d1.sections if isinstance(b, FigureBlock))
    assert fig.svg.startswith("<svg")
    assert "http://www.w3.org/2000/svg" in fig.svg
    ET.fromstring(fig.svg)  # parseable, self-contained


def test_text_block_round_trip():
    doc = ReportDocument(
        metadata=(("title", "note"), ("timestamp", ""), ("version", "0")),
        sections=(TextBlock(title="Note", body="plain <text> & entities"),),
    )
    assert parse_json(render_json(doc)) == doc
    html = render_html(doc)
    assert "&lt;text&gt;" in html
