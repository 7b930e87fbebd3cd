"""Time-domain validation of delayed feedback designs.

Integrates the scalar closed loop

    y^(n)(t) + a_{n-1} y^(n-1)(t) + ... + a_0 y(t)
        + b_m y^(m)(t - tau) + ... + b_0 y(t - tau) = 0

as a first-order companion system by the method of steps: classical
four-stage Runge-Kutta on a uniform grid, with delayed state values read
from a dense-output buffer (cubic Hermite between grid nodes, which keeps
the delayed-term accuracy at O(h^4), matching the integrator).  Because
the step never exceeds tau/10, every delayed argument of a step lies in
segments that are already complete, so the scheme stays explicit.

The decay-rate estimator turns a trajectory into a single number
comparable with a placed dominant root: the slope of a least-squares fit
of log|y| against (t, log t, 1).  The log t regressor absorbs the
polynomial factor t^(M-1) that accompanies a defect-free multiple root,
which would otherwise bias the slope on short windows.
"""

from dataclasses import dataclass
from math import ceil, isfinite
from typing import Optional

import numpy as np

from .errors import CapExceeded, InvalidInput
from .quasipoly import Quasipolynomial

MAX_STEPS = 10_000_000

_VALID_KINDS = ("constant", "polynomial", "sampled")


@dataclass(frozen=True)
class HistorySpec:
    """Initial function on [-tau, 0].

    kind "constant": data is a single value, all derivatives zero.
    kind "polynomial": data is ascending coefficients of y(t) in t; exact
        derivatives of every order.
    kind "sampled": data is values on a uniform grid over [-tau, 0]
        (first sample at -tau, last at 0); evaluation is piecewise-cubic
        with central-difference slopes, so derivatives beyond the third
        are unavailable and the sample spacing must not exceed the
        integration step.
    """

    kind: str
    data: tuple

    def __post_init__(self):
        if self.kind not in _VALID_KINDS:
            raise InvalidInput(
                "invalid_history",
                f"history kind must be one of {_VALID_KINDS}, got {self.kind!r}",
            )
        if self.kind == "constant":
            values = np.atleast_1d(np.asarray(self.data, dtype=float))
            if values.size != 1:
                raise InvalidInput(
                    "invalid_history", "constant history takes a single value"
                )
        else:
            values = np.asarray(self.data, dtype=float)
            if values.ndim != 1 or values.size == 0:
                raise InvalidInput(
                    "invalid_history",
                    f"{self.kind} history data must be a non-empty 1-D sequence",
                )
            if self.kind == "sampled" and values.size < 4:
                raise InvalidInput(
                    "invalid_history", "sampled history needs at least 4 samples"
                )
        if not np.all(np.isfinite(values)):
            raise InvalidInput("non_finite_input", "history data must be finite")
        object.__setattr__(self, "data", tuple(float(v) for v in values))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "data": list(self.data)}

    @classmethod
    def from_dict(cls, data: dict) -> "HistorySpec":
        try:
            return cls(kind=data["kind"], data=data["data"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput(
                "invalid_history", f"malformed history payload: {exc}"
            ) from exc


@dataclass(frozen=True)
class SimulationResult:
    """Trajectory on a uniform grid spanning [0, T].

    final_state holds (y, y', ..., y^(n-1)) at the final time;
    decay_estimate stays None until an estimate is attached.
    """

    t: np.ndarray
    y: np.ndarray
    final_state: tuple
    decay_estimate: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "t": [float(v) for v in self.t],
            "y": [float(v) for v in self.y],
            "final_state": [float(v) for v in self.final_state],
            "decay_estimate": self.decay_estimate,
        }

    def to_csv(self) -> str:
        lines = ["t,y"]
        for ti, yi in zip(self.t, self.y):
            lines.append("%.17g,%.17g" % (ti, yi))
        return "\n".join(lines) + "\n"


def _polynomial_state(coeffs: np.ndarray, t: float, n: int) -> np.ndarray:
    state = np.zeros(n)
    c = coeffs
    for k in range(n):
        if c.size == 0:
            break
        state[k] = np.polynomial.polynomial.polyval(t, c)
        c = np.polynomial.polynomial.polyder(c)
    return state


def _sampled_state(samples: np.ndarray, tau: float, t: float, n: int) -> np.ndarray:
    """State of a piecewise-cubic interpolant of uniform samples on [-tau, 0].

    Node slopes come from central differences (one-sided at the ends), the
    standard Catmull-Rom construction; each segment is then a cubic whose
    derivatives supply the state components (zero beyond order three).
    """
    npts = samples.size
    dt = tau / (npts - 1)
    u = (t + tau) / dt
    i = min(max(int(u), 0), npts - 2)
    slopes = np.gradient(samples, dt)
    x = u - i
    y0, y1 = samples[i], samples[i + 1]
    d0, d1 = slopes[i] * dt, slopes[i + 1] * dt
    # cubic in local coordinate x on [0, 1]
    c0 = y0
    c1 = d0
    c2 = 3 * (y1 - y0) - 2 * d0 - d1
    c3 = 2 * (y0 - y1) + d0 + d1
    state = np.zeros(n)
    local = np.array([c0, c1, c2, c3])
    for k in range(min(n, 4)):
        state[k] = np.polynomial.polynomial.polyval(x, local) / dt**k
        local = np.polynomial.polynomial.polyder(local)
    return state


def _history_state(history: HistorySpec, t: float, n: int, tau: float) -> np.ndarray:
    if history.kind == "constant":
        state = np.zeros(n)
        state[0] = history.data[0]
        return state
    if history.kind == "polynomial":
        return _polynomial_state(np.asarray(history.data), t, n)
    return _sampled_state(np.asarray(history.data), tau, t, n)


def simulate(
    qp: Quasipolynomial, history: HistorySpec, T: float, h: float
) -> SimulationResult:
    """Integrate the closed loop from its initial function over [0, T].

    Retarded systems only; the step must satisfy h <= tau/10 so delayed
    arguments always fall in already-completed segments.  The grid
    actually used is T/ceil(T/h), never coarser than requested.
    """
    if qp.m >= qp.n:
        raise InvalidInput(
            "neutral_unsupported", "simulation restricted to retarded type"
        )
    for name, value in (("T", T), ("h", h)):
        if not (isinstance(value, (int, float)) and isfinite(value) and value > 0):
            raise InvalidInput(
                "validation_error", f"{name} must be a positive finite number"
            )
    if not isinstance(history, HistorySpec):
        raise InvalidInput("invalid_history", "history must be a HistorySpec")
    tau = qp.tau
    if h > tau / 10.0 * (1 + 1e-12):
        raise InvalidInput(
            "invalid_step", f"step {h} exceeds tau/10 = {tau / 10.0}"
        )
    if history.kind == "sampled":
        spacing = tau / (len(history.data) - 1)
        if spacing > h * (1 + 1e-12):
            raise InvalidInput(
                "invalid_history",
                f"sampled history spacing {spacing:.6g} exceeds the step {h:.6g}",
            )
    steps = ceil(T / h * (1 - 1e-12))
    if steps > MAX_STEPS:
        raise CapExceeded(
            "cap_exceeded", f"T/h = {T / h:.3g} exceeds the step cap {MAX_STEPS}"
        )
    h_eff = T / steps

    n, m = qp.n, qp.m
    a = np.asarray(qp.a)
    b = np.asarray(qp.b)

    xs = np.zeros((steps + 1, n))
    fs = np.zeros((steps + 1, n))

    def delayed_state(t: float) -> np.ndarray:
        td = t - tau
        if td <= 0.0:
            return _history_state(history, td, n, tau)
        i = min(int(td / h_eff), steps - 1)
        u = td / h_eff - i
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        return (
            h00 * xs[i]
            + h10 * h_eff * fs[i]
            + h01 * xs[i + 1]
            + h11 * h_eff * fs[i + 1]
        )

    def f(t: float, x: np.ndarray) -> np.ndarray:
        d = delayed_state(t)
        dx = np.empty(n)
        dx[:-1] = x[1:]
        dx[-1] = -np.dot(a, x) - np.dot(b, d[: m + 1])
        return dx

    xs[0] = _history_state(history, 0.0, n, tau)
    fs[0] = f(0.0, xs[0])
    for i in range(steps):
        t = i * h_eff
        x = xs[i]
        k1 = fs[i]
        k2 = f(t + h_eff / 2, x + h_eff / 2 * k1)
        k3 = f(t + h_eff / 2, x + h_eff / 2 * k2)
        k4 = f(t + h_eff, x + h_eff * k3)
        xs[i + 1] = x + h_eff / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        fs[i + 1] = f(t + h_eff, xs[i + 1])

    t_grid = np.linspace(0.0, T, steps + 1)
    return SimulationResult(
        t=t_grid,
        y=xs[:, 0].copy(),
        final_state=tuple(float(v) for v in xs[-1]),
    )


def _window_mask(res: SimulationResult, window) -> np.ndarray:
    try:
        t1, t2 = (float(w) for w in window)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(
            "validation_error", f"window must be a (t1, t2) pair: {exc}"
        ) from exc
    if not (isfinite(t1) and isfinite(t2)) or not 0.0 < t1 < t2:
        raise InvalidInput(
            "validation_error",
            "window must satisfy 0 < t1 < t2 (the log t regressor needs t1 > 0)",
        )
    return (res.t >= t1) & (res.t <= t2)


def estimate_decay_rate(res: SimulationResult, window) -> float:
    """Decay rate of |y| over a window: the t-slope of a least-squares fit
    of log|y| against (t, log t, 1).

    Oscillatory signals are reduced to their peak envelope (local maxima
    of |y|) first; a monotone |y| is fitted directly.  Anything else is
    too short or too irregular to grade.
    """
    mask = _window_mask(res, window)
    t = res.t[mask]
    ay = np.abs(res.y[mask])
    if t.size < 8:
        raise InvalidInput(
            "signal_too_short", "signal too short: too few samples in the window"
        )

    interior = np.nonzero(
        (ay[1:-1] >= ay[:-2]) & (ay[1:-1] >= ay[2:]) & (ay[1:-1] > 0)
    )[0]
    if interior.size >= 3:
        t_fit = t[interior + 1]
        v_fit = ay[interior + 1]
    else:
        wobble = 1e-12 * max(float(ay.max(initial=0.0)), 1e-300)
        d = np.diff(ay)
        if not (np.all(d <= wobble) or np.all(d >= -wobble)):
            raise InvalidInput(
                "signal_too_short",
                "signal too short: need 3 envelope peaks or a monotone envelope",
            )
        keep = ay > 0
        t_fit = t[keep]
        v_fit = ay[keep]
    if t_fit.size < 3:
        raise InvalidInput(
            "signal_too_short", "signal too short: too few usable samples"
        )
    A = np.column_stack([t_fit, np.log(t_fit), np.ones(t_fit.size)])
    coef, *_ = np.linalg.lstsq(A, np.log(v_fit), rcond=None)
    return float(coef[0])
