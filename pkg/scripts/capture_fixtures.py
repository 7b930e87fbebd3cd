"""Capture real service responses as webui test fixtures.

Each fixture file pairs the exact request body the browser client sends
with the byte-identical response the HTTP service produced for it, so the
frontend's mocked-service tests exercise genuine payloads instead of
hand-written ones.  Re-run after changing the service or the client's
request-building constants:

    python3 scripts/capture_fixtures.py
"""

import json
import math
from pathlib import Path

from fastapi.testclient import TestClient

from delaylab.service import create_app

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "frontend" / "test" / "fixtures"

# Mirror of the request-building constants in frontend/src/app.ts.
GRID = {"ns0": 96, "ntau": 96}
SENSITIVITY = {"span": 0.2, "steps": 21}
SIMULATION = {"T": 30, "h": 0.01, "window": [10, 25]}
SPECTRUM_WINDOW = {"left_margin": 3.0, "x_max": 0.5, "y_max": 8.0}
REPORT_TITLE = "Delay feedback design report"


def nearest_vertex(curves, s0_target, tau_target):
    """Curve vertex closest to a target point, by squared data distance —
    the same rule the UI tests use to decide where to click."""
    best, best_d = None, math.inf
    for curve in curves:
        for s0, tau in curve:
            d = (s0 - s0_target) ** 2 + (tau - tau_target) ** 2
            if d < best_d:
                best, best_d = (s0, tau), d
    return best


def write(name, request, response, *, text=None, content_type=None):
    record = {"request": request}
    if text is not None:
        record["response_text"] = text
        record["content_type"] = content_type
    else:
        record["response"] = response
    path = OUT / name
    path.write_text(json.dumps(record, indent=1) + "\n")
    size = path.stat().st_size
    print(f"  {name}  ({size // 1024} KiB)")


def get(client, name, path):
    res = client.get(path)
    res.raise_for_status()
    write(name, {"method": "GET", "path": path}, res.json())
    return res.json()


def post(client, name, path, body):
    res = client.post(path, json=body)
    res.raise_for_status()
    write(name, {"method": "POST", "path": path, "body": body}, res.json())
    return res.json()


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with TestClient(create_app(limits=True)) as client:
        get(client, "health.json", "/api/v1/health")
        get(client, "examples.json", "/api/v1/examples")

        # --- oscillator loop: map, click near (-1, 1), fan out, export
        adm = post(
            client,
            "adm_oscillator.json",
            "/api/v1/admissibility",
            {"example": "oscillator", "s0_min": -3, "tau_max": 2, **GRID},
        )
        s0, tau = nearest_vertex(adm["curves"], -1.0, 1.0)
        print(f"  oscillator click target: s0={s0!r} tau={tau!r}")
        cm = post(
            client,
            "cm_oscillator.json",
            "/api/v1/placement/control-mid",
            {"example": "oscillator", "tau": tau, "branch": "all"},
        )
        sol = cm["solutions"][0]
        post(
            client,
            "spectrum_oscillator.json",
            "/api/v1/spectrum",
            {
                "qp": sol["qp"],
                "window": {
                    "x_min": sol["s0"] - SPECTRUM_WINDOW["left_margin"],
                    "x_max": SPECTRUM_WINDOW["x_max"],
                    "y_max": SPECTRUM_WINDOW["y_max"],
                },
            },
        )
        post(
            client,
            "sensitivity_oscillator.json",
            "/api/v1/sensitivity",
            {"qp": sol["qp"], "s0": sol["s0"], **SENSITIVITY},
        )
        post(
            client,
            "simulate_oscillator.json",
            "/api/v1/simulate",
            {
                "qp": sol["qp"],
                "history": {"kind": "constant", "data": [1]},
                **SIMULATION,
            },
        )
        for fmt in ("json", "html"):
            body = {
                "selection": ["ControlMID"],
                "payloads": {"ControlMID": {"placement": sol, "gains": sol["gains"]}},
                "format": fmt,
                "title": REPORT_TITLE,
                "timestamp": "",
            }
            res = client.post("/api/v1/report", json=body)
            res.raise_for_status()
            write(
                f"report_{fmt}.json",
                {"method": "POST", "path": "/api/v1/report", "body": body},
                None,
                text=res.text,
                content_type=res.headers["content-type"].split(";")[0],
            )

        # --- raw-coefficient variant of the same plant
        post(
            client,
            "adm_oscillator_raw.json",
            "/api/v1/admissibility",
            {"a": [1, 0], "m": 1, "s0_min": -3, "tau_max": 2, **GRID},
        )

        # --- pendulum: physical-gain display and input invalidation
        adm_p = post(
            client,
            "adm_pendulum.json",
            "/api/v1/admissibility",
            {"example": "pendulum", "s0_min": -8, "tau_max": 0.5, **GRID},
        )
        s0p, taup = nearest_vertex(adm_p["curves"], -5.0, 0.112)
        print(f"  pendulum click target: s0={s0p!r} tau={taup!r}")
        post(
            client,
            "cm_pendulum.json",
            "/api/v1/placement/control-mid",
            {"example": "pendulum", "tau": taup, "branch": "all"},
        )
    print("fixtures written to", OUT)


if __name__ == "__main__":
    main()
