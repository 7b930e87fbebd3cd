"""The admissibility relation and its zero set.

With the plant P fixed, the control-oriented design pins a root of
multiplicity m+1 at s0 by a linear solve for b (see ``placement``).  The pair
(s0, tau) is *admissible* -- the multiplicity rises to m+2 and s0 becomes a
candidate dominant root -- exactly when the next derivative also vanishes:

    F(s0, tau) = Delta^(m+1)(s0)  evaluated on the designed b(s0, tau).

F is computed numerically through the same linear
solve rather than by symbolic elimination: one batched path serves scalars,
1-D sweeps, and dense grids alike, and stays valid for every (n, m) without
case-by-case closed forms.

This module samples F on grids (marching squares for the zero curves), solves
F = 0 along either coordinate, and locates the largest delay for which an
admissible s0 < 0 exists at all.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq, minimize_scalar

from .errors import InvalidInput, NumericFailure
from .placement import delayed_monomial_derivative

# Relative |F| target for curve-vertex refinement.
CURVE_TOL = 1e-9
# Relative |F| below which a local extremum counts as a tangential (double) root.
TANGENCY_TOL = 1e-8
# 1-D sweeps: base sample count and the doubling budget for suspicious patterns.
SWEEP_SAMPLES = 2048
MAX_DOUBLINGS = 3
_BATCH_CHUNK = 1 << 18


def _validate_plant(a, m) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or len(a) < 1 or not np.all(np.isfinite(a)):
        raise InvalidInput("invalid_quasipolynomial", "a must be a finite real vector, length n >= 1")
    if not isinstance(m, (int, np.integer)) or m < 0 or m > len(a):
        raise InvalidInput("validation_error", f"m must satisfy 0 <= m <= n = {len(a)}, got {m}")
    return a


def _relation_batch(a: np.ndarray, m: int, s0, tau):
    """F and its magnitude yardstick over broadcast arrays of (s0, tau).

    Works in the substituted unknowns c_j = b_j e^(-s0 tau), so the batch
    contains no exponentials at all: entries are pure polynomials in s0 and
    tau, and the whole grid is one stacked linear solve.
    """
    s0 = np.asarray(s0, dtype=float)
    tau = np.asarray(tau, dtype=float)
    shape = np.broadcast_shapes(s0.shape, tau.shape)
    s0 = np.broadcast_to(s0, shape).reshape(-1)
    tau = np.broadcast_to(tau, shape).reshape(-1)
    p = np.append(a, 1.0)
    p_derivs = [npoly.polyder(p, k) if k else p for k in range(m + 2)]

    F = np.empty(s0.size)
    scale = np.empty(s0.size)
    for start in range(0, s0.size, _BATCH_CHUNK):
        sl = slice(start, start + _BATCH_CHUNK)
        x, t = s0[sl], tau[sl]
        G = np.empty((x.size, m + 2, m + 1))
        for k in range(m + 2):
            for j in range(m + 1):
                G[:, k, j] = delayed_monomial_derivative(k, j, x, t)
        rhs = np.empty((x.size, m + 1))
        for k in range(m + 1):
            rhs[:, k] = -npoly.polyval(x, p_derivs[k])
        try:
            c = np.linalg.solve(G[:, : m + 1, :], rhs[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise NumericFailure(
                "degenerate_placement_system", "inner placement solve is singular on the grid"
            ) from exc
        top = G[:, m + 1, :]
        F[sl] = npoly.polyval(x, p_derivs[m + 1]) + np.einsum("nj,nj->n", top, c)
        term_scale = npoly.polyval(np.abs(x), np.abs(p_derivs[m + 1])) + np.einsum(
            "nj,nj->n", np.abs(top), np.abs(c)
        )
        sys_scale = np.max(np.sum(np.abs(G[:, : m + 1, :]), axis=2), axis=1) * np.max(
            np.abs(c), axis=1
        ) + np.max(np.abs(rhs), axis=1)
        scale[sl] = np.maximum(np.maximum(term_scale, sys_scale), np.finfo(float).tiny)
    return F.reshape(shape), scale.reshape(shape)


def relation_value(a, m: int, tau: float, s0: float) -> float:
    """Admissibility relation F(s0, tau): the (m+1)-th derivative of the
    designed quasipolynomial at s0.  F = 0 iff (s0, tau) is admissible."""
    a = _validate_plant(a, m)
    if not (isinstance(tau, (int, float)) and math.isfinite(tau)) or tau <= 0:
        raise InvalidInput("validation_error", f"tau must be positive and finite, got {tau}")
    if not (isinstance(s0, (int, float)) and math.isfinite(s0)):
        raise InvalidInput("non_finite_input", "s0 must be finite")
    F, _ = _relation_batch(a, m, np.asarray(float(s0)), np.asarray(float(tau)))
    F = float(F)
    if not math.isfinite(F):
        raise NumericFailure("degenerate_placement_system", "relation value overflows")
    return F


# --------------------------------------------------------------------- grids


@dataclass(frozen=True)
class AdmissibilityGrid:
    """Sampled F over a rectangle plus the extracted zero curves.

    ``values[i, j]`` is F(s0_values[i], tau_values[j]).  Each curve is an
    (N, 2) array of refined (s0, tau) vertices chained from the marching-
    squares segments.
    """

    s0_values: np.ndarray
    tau_values: np.ndarray
    values: np.ndarray
    curves: tuple
    curve_tol: float

    def to_dict(self) -> dict:
        return {
            "s0_values": self.s0_values.tolist(),
            "tau_values": self.tau_values.tolist(),
            "values": self.values.tolist(),
            "curves": [c.tolist() for c in self.curves],
            "curve_tol": self.curve_tol,
        }

    def to_csv(self) -> str:
        """Rows ``s0,tau,F``, s0-major (matching the values layout)."""
        s0 = np.repeat(self.s0_values, len(self.tau_values))
        tau = np.tile(self.tau_values, len(self.s0_values))
        buf = io.StringIO()
        np.savetxt(
            buf,
            np.column_stack([s0, tau, self.values.reshape(-1)]),
            fmt="%.17g",
            delimiter=",",
            header="s0,tau,F",
            comments="",
        )
        return buf.getvalue()


# Marching-squares connectivity: case index = sw | se<<1 | ne<<2 | nw<<3,
# listing pairs of crossed cell sides to join ("S","E","N","W").  Cases 5 and
# 10 are ambiguous and resolved by the cell-center sign.
_MS_SEGMENTS = {
    0: [],
    1: [("W", "S")],
    2: [("S", "E")],
    3: [("W", "E")],
    4: [("N", "E")],
    5: None,
    6: [("S", "N")],
    7: [("W", "N")],
    8: [("W", "N")],
    9: [("S", "N")],
    10: None,
    11: [("N", "E")],
    12: [("W", "E")],
    13: [("S", "E")],
    14: [("W", "S")],
    15: [],
}


def _vector_bisect(f_batch, lo, hi):
    """Sign-change bisection on many intervals at once; f_batch maps an array
    of abscissae to an array of values.  Returns the refined roots."""
    flo = f_batch(lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fmid = f_batch(mid)
        same = np.sign(fmid) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fmid, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def compute_grid(a, m: int, s0_range, tau_range, resolution=(200, 200)) -> AdmissibilityGrid:
    """Sample F over [s0_lo, s0_hi] x (tau_lo, tau_hi] and trace F = 0.

    The tau axis excludes its left endpoint (tau = 0 has no delay structure);
    s0 endpoints are inclusive.  Zero curves are assembled by marching squares
    on the sign grid and every vertex is refined along its grid edge until
    |F| <= curve_tol relative to the local magnitude yardstick.
    """
    a = _validate_plant(a, m)
    try:
        s0_lo, s0_hi = (float(v) for v in s0_range)
        tau_lo, tau_hi = (float(v) for v in tau_range)
        ns0, ntau = (int(v) for v in resolution)
    except (TypeError, ValueError) as exc:
        raise InvalidInput("invalid_grid", "ranges must be (lo, hi) pairs, resolution (ns0, ntau)") from exc
    if not all(math.isfinite(v) for v in (s0_lo, s0_hi, tau_lo, tau_hi)):
        raise InvalidInput("invalid_grid", "grid ranges must be finite")
    if not (s0_lo < s0_hi <= 0.0):
        raise InvalidInput("invalid_grid", f"need s0_lo < s0_hi <= 0, got ({s0_lo}, {s0_hi})")
    if not (0.0 <= tau_lo < tau_hi):
        raise InvalidInput("invalid_grid", f"need 0 <= tau_lo < tau_hi, got ({tau_lo}, {tau_hi})")
    if ns0 < 2 or ntau < 2:
        raise InvalidInput("invalid_grid", "resolution must be at least 2 x 2")

    s0s = np.linspace(s0_lo, s0_hi, ns0)
    step = (tau_hi - tau_lo) / ntau
    taus = tau_lo + step * np.arange(1, ntau + 1)
    F, _ = _relation_batch(a, m, s0s[:, None], taus[None, :])
    if not np.all(np.isfinite(F)):
        raise NumericFailure("degenerate_placement_system", "relation values overflow on the grid")

    S = F > 0  # exact zeros count as negative side; refinement recovers them

    # --- refined crossing per grid edge ------------------------------------
    points = {}
    # s0-direction edges: between (i, j) and (i+1, j), tau fixed.
    ii, jj = np.nonzero(S[:-1, :] != S[1:, :])
    if ii.size:
        tfix = taus[jj]
        roots = _vector_bisect(lambda x: _relation_batch(a, m, x, tfix)[0], s0s[ii], s0s[ii + 1])
        for e, (i, j) in enumerate(zip(ii, jj)):
            points[("s", int(i), int(j))] = (float(roots[e]), float(tfix[e]))
    # tau-direction edges: between (i, j) and (i, j+1), s0 fixed.
    ii, jj = np.nonzero(S[:, :-1] != S[:, 1:])
    if ii.size:
        sfix = s0s[ii]
        roots = _vector_bisect(lambda t: _relation_batch(a, m, sfix, t)[0], taus[jj], taus[jj + 1])
        for e, (i, j) in enumerate(zip(ii, jj)):
            points[("t", int(i), int(j))] = (float(sfix[e]), float(roots[e]))

    # --- cell segments ------------------------------------------------------
    sw, se = S[:-1, :-1], S[1:, :-1]
    nw, ne = S[:-1, 1:], S[1:, 1:]
    case = sw * 1 + se * 2 + ne * 4 + nw * 8
    ambiguous = (case == 5) | (case == 10)
    centers = {}
    if np.any(ambiguous):
        ai, aj = np.nonzero(ambiguous)
        cs0 = 0.5 * (s0s[ai] + s0s[ai + 1])
        ct = 0.5 * (taus[aj] + taus[aj + 1])
        Fc, _ = _relation_batch(a, m, cs0, ct)
        for e, (i, j) in enumerate(zip(ai, aj)):
            centers[(int(i), int(j))] = Fc[e] > 0

    def _edge_key(side, i, j):
        if side == "S":
            return ("s", i, j)
        if side == "N":
            return ("s", i, j + 1)
        if side == "W":
            return ("t", i, j)
        return ("t", i + 1, j)

    segments = []
    ci, cj = np.nonzero((case != 0) & (case != 15))
    for i, j in zip(ci, cj):
        code = int(case[i, j])
        if code in (5, 10):
            # isolate whichever diagonal pair of corners the centre sample
            # disagrees with
            center_pos = centers[(int(i), int(j))]
            if code == 5:  # SW/NE positive
                pairs = [("S", "E"), ("W", "N")] if center_pos else [("W", "S"), ("N", "E")]
            else:  # SE/NW positive
                pairs = [("W", "S"), ("N", "E")] if center_pos else [("S", "E"), ("W", "N")]
        else:
            pairs = _MS_SEGMENTS[code]
        for p, q in pairs:
            segments.append((_edge_key(p, int(i), int(j)), _edge_key(q, int(i), int(j))))

    # --- chain segments into polylines -------------------------------------
    adjacency = {}
    for u, v in segments:
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)

    visited = set()
    curves = []

    def _walk(start):
        path = [start]
        visited.add(start)
        cur = start
        while True:
            nxt = [w for w in adjacency[cur] if w not in visited]
            if not nxt:
                break
            cur = nxt[0]
            visited.add(cur)
            path.append(cur)
        return path

    keys = sorted(adjacency)
    for k in keys:  # open curves first: start from endpoints
        if k not in visited and len(adjacency[k]) == 1:
            curves.append(_walk(k))
    for k in keys:  # remaining closed loops
        if k not in visited:
            path = _walk(k)
            path.append(path[0])
            curves.append(path)

    curve_arrays = tuple(
        np.asarray([points[k] for k in path], dtype=float) for path in curves if len(path) > 1
    )
    return AdmissibilityGrid(
        s0_values=s0s, tau_values=taus, values=F, curves=curve_arrays, curve_tol=CURVE_TOL
    )


# ----------------------------------------------------------------- 1-D solves


def _sweep_roots(a, m: int, xs: np.ndarray, f_scalar, fixed_other):
    """Root extraction along one coordinate: bracketed sign changes via Brent,
    tangential (double) roots via local-extremum refinement.  Returns
    (roots, suspicious) where ``suspicious`` asks the caller to re-sample at
    double resolution (adjacent brackets or an accepted tangency)."""
    F, scale = fixed_other(xs)
    roots = []
    exact = np.nonzero(F == 0.0)[0]
    roots.extend(float(xs[i]) for i in exact)
    idx = np.nonzero((F[:-1] * F[1:]) < 0)[0]
    for i in idx:
        roots.append(brentq(f_scalar, xs[i], xs[i + 1], xtol=1e-12, rtol=1e-15))
    suspicious = bool(np.any(np.diff(idx) <= 1)) if idx.size > 1 else False

    # tangency candidates: positive local minima / negative local maxima
    interior = np.arange(1, len(xs) - 1)
    minima = interior[(F[interior] <= F[interior - 1]) & (F[interior] <= F[interior + 1]) & (F[interior] > 0)]
    maxima = interior[(F[interior] >= F[interior - 1]) & (F[interior] >= F[interior + 1]) & (F[interior] < 0)]
    candidates = sorted(
        list(minima) + list(maxima), key=lambda i: abs(F[i]) / scale[i]
    )[:16]
    for i in candidates:
        sgn = 1.0 if F[i] > 0 else -1.0
        res = minimize_scalar(
            lambda x: sgn * f_scalar(x),
            bounds=(xs[i - 1], xs[i + 1]),
            method="bounded",
            options={"xatol": 1e-10},
        )
        x_star = float(res.x)
        _, sc = fixed_other(np.asarray([x_star]))
        if abs(f_scalar(x_star)) <= TANGENCY_TOL * float(sc[0]):
            roots.append(x_star)
            suspicious = True
    return sorted(roots), suspicious


def _dedupe(roots, span: float):
    out = []
    for r in sorted(roots):
        if not out or abs(r - out[-1]) > 1e-7 * (1.0 + span):
            out.append(r)
    return out


def solve_for_s0(a, m: int, tau: float, s0_min=None, n_samples: int = SWEEP_SAMPLES):
    """All admissible s0 in [s0_min, 0] at the given delay, ascending.

    Default bracket is [-50/tau, 0]: root magnitudes scale inversely with the
    delay, so the window does too.
    """
    a = _validate_plant(a, m)
    if not (isinstance(tau, (int, float)) and math.isfinite(tau)) or tau <= 0:
        raise InvalidInput("validation_error", f"tau must be positive and finite, got {tau}")
    lo = -50.0 / tau if s0_min is None else float(s0_min)
    if not math.isfinite(lo) or lo >= 0:
        raise InvalidInput("validation_error", f"s0_min must be finite and negative, got {lo}")

    def f_scalar(x):
        return float(_relation_batch(a, m, np.asarray(float(x)), np.asarray(tau))[0])

    def fixed_other(xs):
        return _relation_batch(a, m, xs, np.asarray(tau))

    roots = []
    for attempt in range(MAX_DOUBLINGS + 1):
        xs = np.linspace(lo, 0.0, n_samples << attempt)
        roots, suspicious = _sweep_roots(a, m, xs, f_scalar, fixed_other)
        if roots and not suspicious:
            break
        if attempt == MAX_DOUBLINGS:
            break
    return _dedupe(roots, abs(lo))


def solve_for_tau(a, m: int, s0: float, tau_max: float = 10.0, n_samples: int = SWEEP_SAMPLES):
    """All delays in (0, tau_max] making s0 admissible, ascending."""
    a = _validate_plant(a, m)
    if not (isinstance(s0, (int, float)) and math.isfinite(s0)):
        raise InvalidInput("non_finite_input", "s0 must be finite")
    if not (isinstance(tau_max, (int, float)) and math.isfinite(tau_max)) or tau_max <= 0:
        raise InvalidInput("validation_error", f"tau_max must be positive, got {tau_max}")

    def f_scalar(t):
        return float(_relation_batch(a, m, np.asarray(float(s0)), np.asarray(float(t)))[0])

    def fixed_other(ts):
        return _relation_batch(a, m, np.asarray(float(s0)), ts)

    roots = []
    for attempt in range(MAX_DOUBLINGS + 1):
        count = n_samples << attempt
        ts = tau_max * np.arange(1, count + 1) / count
        roots, suspicious = _sweep_roots(a, m, ts, f_scalar, fixed_other)
        if roots and not suspicious:
            break
        if attempt == MAX_DOUBLINGS:
            break
    return _dedupe(roots, tau_max)


@dataclass(frozen=True)
class MaxDelayResult:
    """Largest delay with an admissible s0 < 0, and the rightmost such s0."""

    tau: float
    s0: float

    def to_dict(self) -> dict:
        return {"tau": self.tau, "s0": self.s0}


def max_stabilizable_tau(
    a, m: int, tau_max: float = 10.0, tol: float = 1e-4, n_samples: int = SWEEP_SAMPLES
) -> MaxDelayResult:
    """Bisect the existence predicate "solve_for_s0 finds a negative root"
    down to a delay interval of width ``tol``; returns the admissible end."""
    a = _validate_plant(a, m)
    if tol <= 0 or not math.isfinite(tol):
        raise InvalidInput("validation_error", f"tol must be positive, got {tol}")

    def admissible(tau):
        return [r for r in solve_for_s0(a, m, tau, n_samples=n_samples) if r < 0]

    scan = np.linspace(tau_max, tau_max / 64.0, 64)
    good = None
    good_roots = None
    bad = None
    for t in scan:
        roots = admissible(float(t))
        if roots:
            good, good_roots = float(t), roots
            break
        bad = float(t)
    if good is None:
        raise NumericFailure(
            "no_admissible_point", f"no admissible (s0, tau) found for tau in (0, {tau_max}]"
        )
    if bad is None:  # admissible already at tau_max: capped by the search box
        return MaxDelayResult(tau=good, s0=max(good_roots))
    while bad - good > tol:
        mid = 0.5 * (good + bad)
        roots = admissible(mid)
        if roots:
            good, good_roots = mid, roots
        else:
            bad = mid
    return MaxDelayResult(tau=good, s0=max(good_roots))
