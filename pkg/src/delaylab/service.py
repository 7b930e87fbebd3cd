"""Stateless HTTP JSON API exposing every computation in the package.

Payload assembly lives in plain functions so the command-line interface can
produce byte-identical JSON by calling the same code; the route handlers
only parse requests and pass through.  All handlers are synchronous and
share no mutable state, so the framework runs them on its worker pool and
concurrent requests cannot interfere; identical bodies always produce
identical responses.  Size caps guard the expensive endpoints and are
disabled by ``DELAYLAB_LIMITS=off``.
"""

import dataclasses
import os
from typing import Annotated, Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from . import __version__
from .admissibility import compute_grid, solve_for_s0, solve_for_tau
from .dde_sim import HistorySpec, estimate_decay_rate, simulate
from .errors import CapExceeded, DelayLabError, InvalidInput, NumericFailure
from .examples import get_example, list_examples
from .factorization import integral_form
from .placement import solve_control_mid, solve_crrid, solve_generic_mid
from .quasipoly import Quasipolynomial
from .report import build_report, render_html, render_json
from .spectrum import SpectralWindow, compute_spectrum, sensitivity_sweep

MAX_ORDER = 12
MAX_GRID_AXIS = 2000
MAX_SWEEP_STEPS = 10_000
MAX_TIME_STEPS = 10_000_000


def limits_enabled() -> bool:
    return os.environ.get("DELAYLAB_LIMITS", "").strip().lower() != "off"


def _cap(limits: bool, condition: bool, message: str) -> None:
    if limits and condition:
        raise CapExceeded("cap_exceeded", message)


# --------------------------------------------------------- payload assembly


def resolve_system(a, m, example, params):
    """Placement inputs from either raw coefficients or a catalog id.

    Returns ``(a, m, entry)`` where ``entry`` is the catalog system when one
    was named (so callers can attach physical gains) and None for raw input.
    """
    if (a is None) == (example is None):
        raise InvalidInput(
            "validation_error", "provide either coefficients a or an example id, not both"
        )
    if example is not None:
        ex = get_example(example, **(params or {}))
        if m is not None and m != ex.m:
            raise InvalidInput(
                "validation_error",
                f"m={m} disagrees with the {example} feedback degree {ex.m}",
            )
        return list(ex.a), ex.m, ex
    if params:
        raise InvalidInput("validation_error", "params only apply to a catalog example")
    if m is None:
        raise InvalidInput("validation_error", "m is required with raw coefficients")
    return a, m, None


def system_payload(ex) -> dict:
    """JSON echo of a resolved catalog system, so clients never re-derive
    coefficients from physical parameters themselves."""
    return {
        "id": ex.id,
        "params": dict(ex.params),
        "derived": ex.derived(),
        "gain_names": list(ex.gain_map.gain_names()),
    }


def generic_mid_payload(n: int, m: int, tau: float, s0: float, limits: bool = True) -> dict:
    _cap(limits, n > MAX_ORDER, f"n={n} exceeds the order cap {MAX_ORDER}")
    return solve_generic_mid(n=n, m=m, tau=tau, s0=s0).to_dict()


def control_mid_payload(
    a=None,
    m: Optional[int] = None,
    tau: Optional[float] = None,
    s0: Optional[float] = None,
    branch: Optional[str] = None,
    example: Optional[str] = None,
    params: Optional[dict] = None,
    limits: bool = True,
) -> dict:
    a, m, ex = resolve_system(a, m, example, params)
    _cap(limits, len(a) > MAX_ORDER, f"n={len(a)} exceeds the order cap {MAX_ORDER}")
    if (tau is None) == (s0 is None):
        raise InvalidInput("validation_error", "exactly one of tau and s0 must be provided")
    if tau is not None:
        branch = branch or "rightmost"
        if branch not in ("rightmost", "all"):
            raise InvalidInput(
                "validation_error",
                f"branch must be 'rightmost' or 'all' when solving for s0, got {branch!r}",
            )
        candidates = sorted(solve_for_s0(a, m, tau), reverse=True)
        if branch == "rightmost":
            candidates = candidates[:1]
        pairs = [(c, tau) for c in candidates]
    else:
        branch = branch or "smallest"
        if branch not in ("smallest", "all"):
            raise InvalidInput(
                "validation_error",
                f"branch must be 'smallest' or 'all' when solving for tau, got {branch!r}",
            )
        candidates = sorted(solve_for_tau(a, m, s0))
        if branch == "smallest":
            candidates = candidates[:1]
        pairs = [(s0, c) for c in candidates]
    solutions = []
    for s0_value, tau_value in pairs:
        placed = solve_control_mid(a=a, m=m, tau=tau_value, s0=s0_value).to_dict()
        solution = {
            "s0": placed["s0"],
            "tau": placed["qp"]["tau"],
            "b": placed["qp"]["b"],
            "residuals": placed["residuals"],
            "qp": placed["qp"],
            "multiplicity": placed["multiplicity"],
            "condition": placed["condition"],
        }
        if ex is not None:
            try:
                solution["gains"] = ex.gain_map.to_physical(
                    placed["qp"]["b"], placed["qp"]["tau"]
                )
            except InvalidInput:
                # physically unrealizable (e.g. delay below the fixed
                # transport part); keep the mathematical solution visible
                solution["gains"] = None
        solutions.append(solution)
    out = {"solutions": solutions}
    if ex is not None:
        out["system"] = system_payload(ex)
    return out


def crrid_payload(n: int, m: int, tau: float, roots, limits: bool = True) -> dict:
    _cap(limits, n > MAX_ORDER, f"n={n} exceeds the order cap {MAX_ORDER}")
    return solve_crrid(n=n, m=m, tau=tau, roots=roots).to_dict()


def admissibility_grid(
    a,
    m: int,
    s0_min: float,
    tau_max: float,
    ns0: int = 200,
    ntau: int = 200,
    limits: bool = True,
):
    _cap(limits, len(a) > MAX_ORDER, f"n={len(a)} exceeds the order cap {MAX_ORDER}")
    _cap(
        limits,
        max(ns0, ntau) > MAX_GRID_AXIS,
        f"grid {ns0}x{ntau} exceeds the cap {MAX_GRID_AXIS}x{MAX_GRID_AXIS}",
    )
    return compute_grid(
        a=a,
        m=m,
        s0_range=(s0_min, 0.0),
        tau_range=(0.0, tau_max),
        resolution=(ns0, ntau),
    )


def admissibility_payload(
    a=None,
    m: Optional[int] = None,
    s0_min: float = -4.0,
    tau_max: float = 2.0,
    ns0: int = 200,
    ntau: int = 200,
    example: Optional[str] = None,
    params: Optional[dict] = None,
    limits: bool = True,
) -> dict:
    a, m, ex = resolve_system(a, m, example, params)
    payload = admissibility_grid(a, m, s0_min, tau_max, ns0, ntau, limits=limits).to_dict()
    if ex is not None:
        payload["system"] = system_payload(ex)
    return payload


def spectrum_result(
    qp: Quasipolynomial, window: SpectralWindow, grid=(400, 400), limits: bool = True
):
    _cap(limits, qp.n > MAX_ORDER, f"n={qp.n} exceeds the order cap {MAX_ORDER}")
    _cap(
        limits,
        max(grid) > MAX_GRID_AXIS,
        f"grid {grid[0]}x{grid[1]} exceeds the cap {MAX_GRID_AXIS}x{MAX_GRID_AXIS}",
    )
    return compute_spectrum(qp, window, grid=grid)


def spectrum_payload_from(result) -> dict:
    payload = result.to_dict()
    payload["certified_count"] = payload["total_count"] if payload["certified"] else 0
    return payload


def spectrum_payload(
    qp: Quasipolynomial, window: SpectralWindow, grid=(400, 400), limits: bool = True
) -> dict:
    return spectrum_payload_from(spectrum_result(qp, window, grid=grid, limits=limits))


def sensitivity_trace(
    qp: Quasipolynomial,
    s0: float,
    span: float = 0.2,
    steps: int = 41,
    iterations: int = 50,
    limits: bool = True,
):
    _cap(limits, qp.n > MAX_ORDER, f"n={qp.n} exceeds the order cap {MAX_ORDER}")
    _cap(limits, steps > MAX_SWEEP_STEPS, f"steps={steps} exceeds the cap {MAX_SWEEP_STEPS}")
    return sensitivity_sweep(
        qp, s0=s0, tau_span=span, steps=steps, newton_iterations=iterations
    )


def sensitivity_payload_from(trace) -> dict:
    payload = trace.to_dict()
    branch_count = trace.branches.shape[1]
    payload["branches"] = [
        {
            "re": [row[j] for row in payload["re"]],
            "im": [row[j] for row in payload["im"]],
            "converged": [row[j] for row in payload["converged"]],
        }
        for j in range(branch_count)
    ]
    return payload


def sensitivity_payload(
    qp: Quasipolynomial,
    s0: float,
    span: float = 0.2,
    steps: int = 41,
    iterations: int = 50,
    limits: bool = True,
) -> dict:
    return sensitivity_payload_from(
        sensitivity_trace(qp, s0, span=span, steps=steps, iterations=iterations, limits=limits)
    )


def simulation_result(
    qp: Quasipolynomial,
    history: HistorySpec,
    T: float,
    h: float,
    window=None,
    limits: bool = True,
):
    _cap(limits, qp.n > MAX_ORDER, f"n={qp.n} exceeds the order cap {MAX_ORDER}")
    if h > 0 and T > 0:
        _cap(
            limits,
            T / h > MAX_TIME_STEPS,
            f"T/h={T / h:.3g} exceeds the step cap {MAX_TIME_STEPS}",
        )
    result = simulate(qp, history, T=T, h=h)
    if window is not None:
        estimate = estimate_decay_rate(result, window)
    else:
        try:
            estimate = estimate_decay_rate(result, (T / 3.0, T))
        except DelayLabError:
            estimate = None
    return dataclasses.replace(result, decay_estimate=estimate)


def simulate_payload(
    qp: Quasipolynomial,
    history: HistorySpec,
    T: float,
    h: float,
    window=None,
    limits: bool = True,
) -> dict:
    return simulation_result(qp, history, T=T, h=h, window=window, limits=limits).to_dict()


def factorization_payload(
    qp: Quasipolynomial, s0: float, multiplicity: Optional[int] = None, limits: bool = True
) -> dict:
    _cap(limits, qp.n > MAX_ORDER, f"n={qp.n} exceeds the order cap {MAX_ORDER}")
    return {"form": integral_form(qp, s0, M=multiplicity).to_dict()}


# ------------------------------------------------------------ request bodies

FiniteFloat = Annotated[float, Field(allow_inf_nan=False)]


class QpBody(BaseModel):
    a: list[FiniteFloat]
    b: list[FiniteFloat]
    tau: FiniteFloat
    n: Optional[int] = None
    m: Optional[int] = None

    def build(self) -> Quasipolynomial:
        qp = Quasipolynomial(a=self.a, b=self.b, tau=self.tau)
        if self.n is not None and self.n != qp.n:
            raise InvalidInput(
                "validation_error", f"n={self.n} disagrees with {len(self.a)} a-coefficients"
            )
        if self.m is not None and self.m != qp.m:
            raise InvalidInput(
                "validation_error", f"m={self.m} disagrees with {len(self.b)} b-coefficients"
            )
        return qp


class WindowBody(BaseModel):
    x_min: FiniteFloat
    x_max: FiniteFloat
    y_max: FiniteFloat


class HistoryBody(BaseModel):
    kind: str
    data: list[FiniteFloat]


class GenericMidRequest(BaseModel):
    n: int
    m: int
    tau: FiniteFloat
    s0: FiniteFloat


class ControlMidRequest(BaseModel):
    a: Optional[list[FiniteFloat]] = None
    m: Optional[int] = None
    tau: Optional[FiniteFloat] = None
    s0: Optional[FiniteFloat] = None
    branch: Optional[str] = None
    example: Optional[str] = None
    params: Optional[dict[str, FiniteFloat]] = None


class CrridRequest(BaseModel):
    n: int
    m: int
    tau: FiniteFloat
    roots: list[FiniteFloat]


class AdmissibilityRequest(BaseModel):
    a: Optional[list[FiniteFloat]] = None
    m: Optional[int] = None
    s0_min: FiniteFloat
    tau_max: FiniteFloat
    ns0: int = 200
    ntau: int = 200
    example: Optional[str] = None
    params: Optional[dict[str, FiniteFloat]] = None


class SpectrumRequest(BaseModel):
    qp: QpBody
    window: WindowBody
    grid: Optional[tuple[int, int]] = None


class SensitivityRequest(BaseModel):
    qp: QpBody
    s0: FiniteFloat
    span: FiniteFloat = 0.2
    steps: int = 41
    iterations: int = 50


class SimulateRequest(BaseModel):
    qp: QpBody
    history: HistoryBody
    T: FiniteFloat
    h: FiniteFloat
    window: Optional[tuple[FiniteFloat, FiniteFloat]] = None


class FactorizationRequest(BaseModel):
    qp: QpBody
    s0: FiniteFloat
    multiplicity: Optional[int] = None


class ReportRequest(BaseModel):
    selection: list[str]
    payloads: dict[str, Any]
    format: str = "json"
    title: str = "Delay feedback design report"
    timestamp: str = ""


def _http_status(exc: DelayLabError) -> int:
    if isinstance(exc, CapExceeded):
        return 413
    if isinstance(exc, NumericFailure):
        return 422
    return 400


def create_app(limits: Optional[bool] = None) -> FastAPI:
    """Build the API application.  ``limits=None`` reads DELAYLAB_LIMITS."""
    if limits is None:
        limits = limits_enabled()

    app = FastAPI(title="delaylab service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(DelayLabError)
    def _domain_error(request: Request, exc: DelayLabError):
        return JSONResponse(
            status_code=_http_status(exc),
            content={"code": exc.code, "message": exc.message, "detail": None},
        )

    @app.exception_handler(RequestValidationError)
    def _body_error(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(p) for p in err.get("loc", [])], "msg": str(err.get("msg", ""))}
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content={
                "code": "validation_error",
                "message": "request body failed validation",
                "detail": detail,
            },
        )

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/api/v1/examples")
    def examples():
        return list_examples()

    @app.post("/api/v1/placement/generic-mid")
    def generic_mid(req: GenericMidRequest):
        return generic_mid_payload(req.n, req.m, req.tau, req.s0, limits=limits)

    @app.post("/api/v1/placement/control-mid")
    def control_mid(req: ControlMidRequest):
        return control_mid_payload(
            req.a,
            req.m,
            tau=req.tau,
            s0=req.s0,
            branch=req.branch,
            example=req.example,
            params=req.params,
            limits=limits,
        )

    @app.post("/api/v1/placement/crrid")
    def crrid(req: CrridRequest):
        return crrid_payload(req.n, req.m, req.tau, req.roots, limits=limits)

    @app.post("/api/v1/admissibility")
    def admissibility(req: AdmissibilityRequest):
        return admissibility_payload(
            req.a,
            req.m,
            req.s0_min,
            req.tau_max,
            req.ns0,
            req.ntau,
            example=req.example,
            params=req.params,
            limits=limits,
        )

    @app.post("/api/v1/spectrum")
    def spectrum(req: SpectrumRequest):
        window = SpectralWindow(req.window.x_min, req.window.x_max, req.window.y_max)
        return spectrum_payload(
            req.qp.build(), window, grid=req.grid or (400, 400), limits=limits
        )

    @app.post("/api/v1/sensitivity")
    def sensitivity(req: SensitivityRequest):
        return sensitivity_payload(
            req.qp.build(),
            s0=req.s0,
            span=req.span,
            steps=req.steps,
            iterations=req.iterations,
            limits=limits,
        )

    @app.post("/api/v1/simulate")
    def simulate_endpoint(req: SimulateRequest):
        history = HistorySpec(kind=req.history.kind, data=tuple(req.history.data))
        return simulate_payload(
            req.qp.build(), history, T=req.T, h=req.h, window=req.window, limits=limits
        )

    @app.post("/api/v1/factorization")
    def factorization(req: FactorizationRequest):
        return factorization_payload(
            req.qp.build(), req.s0, multiplicity=req.multiplicity, limits=limits
        )

    @app.post("/api/v1/report")
    def report(req: ReportRequest):
        if req.format not in ("html", "json"):
            raise InvalidInput(
                "validation_error", f"format must be 'html' or 'json', got {req.format!r}"
            )
        document = build_report(
            set(req.selection), req.payloads, title=req.title, timestamp=req.timestamp
        )
        if req.format == "html":
            return Response(content=render_html(document), media_type="text/html")
        return Response(content=render_json(document), media_type="application/json")

    return app


def serve(host: Optional[str] = None, port: Optional[int] = None) -> None:
    """Run the API under uvicorn.  Address precedence: arguments, then
    DELAYLAB_ADDR as ``host:port``, then 127.0.0.1:8000."""
    import uvicorn

    env = os.environ.get("DELAYLAB_ADDR", "")
    env_host, env_port = None, None
    if env:
        head, sep, tail = env.rpartition(":")
        if sep and tail.isdigit():
            env_host, env_port = head or None, int(tail)
        else:
            env_host = env
    final_host = host if host is not None else (env_host or "127.0.0.1")
    final_port = port if port is not None else (env_port or 8000)
    uvicorn.run(create_app(), host=final_host, port=final_port)
