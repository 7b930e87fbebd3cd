"""Certified spectra in rectangular windows.

Root location is a three-stage pipeline: grid sampling flags every cell whose
corners change sign in both Re(Delta) and Im(Delta); damped Newton refines
each candidate; the argument principle certifies the outcome, once per root
cluster (a small circle gives the multiplicity) and once over the whole
window boundary (the total must equal the sum of multiplicities).  Phase
continuation along every contour is adaptive -- segments are split until no
step turns the phase by pi/2 or more, which makes the winding count exact.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidInput, NumericFailure
from .quasipoly import Quasipolynomial

# Contour points this close to a root (relative |Delta|) force a nudge/shrink.
BOUNDARY_SAFETY = 1e-13
# Relative residual below which a refined root counts as converged.
ROOT_RESIDUAL_TOL = 1e-8
# Newton stops when the update is this small relative to the iterate.
NEWTON_STEP_TOL = 1e-10


@dataclass(frozen=True)
class SpectralWindow:
    """Rectangle [x_min, x_max] x [-y_max, y_max] in the complex plane."""

    x_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.x_max, self.y_max)
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
            raise InvalidInput("invalid_window", "window bounds must be finite numbers")
        if not self.x_min < self.x_max:
            raise InvalidInput("invalid_window", f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.y_max > 0:
            raise InvalidInput("invalid_window", f"y_max must be positive, got {self.y_max}")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "y_max", float(self.y_max))

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "y_max": self.y_max}

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralWindow":
        try:
            return cls(data["x_min"], data["x_max"], data["y_max"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput("invalid_window", "window needs x_min, x_max, y_max") from exc


@dataclass(frozen=True)
class RootEstimate:
    re: float
    im: float
    multiplicity: int
    residual: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "re": self.re,
            "im": self.im,
            "multiplicity": self.multiplicity,
            "residual": self.residual,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class Spectrum:
    """Roots in a window plus the argument-principle certificate.

    ``certified`` means the boundary winding count equals the sum of the
    cluster multiplicities; ``abscissa`` is the largest real part (None when
    the window is empty).
    """

    window: SpectralWindow
    roots: tuple
    abscissa: float | None
    total_count: int
    certified: bool

    def to_dict(self) -> dict:
        return {
            "window": self.window.to_dict(),
            "roots": [r.to_dict() for r in self.roots],
            "abscissa": self.abscissa,
            "total_count": self.total_count,
            "certified": self.certified,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("re,im,multiplicity,residual\n")
        for r in self.roots:
            buf.write(f"{r.re:.17g},{r.im:.17g},{r.multiplicity},{r.residual:.17g}\n")
        return buf.getvalue()


class _ContourTouchesRoot(Exception):
    """Internal: a contour sample sits numerically on top of a root."""


def _direct_evaluator(qp: Quasipolynomial):
    """Contour evaluator (values, trust floors) from the plain monomial sum."""

    def fn(s):
        val, scale = qp.evaluate_with_scale(s)
        return np.asarray(val), BOUNDARY_SAFETY * np.asarray(scale, dtype=float)

    return fn


def _poly_shift(coeffs, center: complex, count: int):
    """Recenter an ascending-coefficient polynomial: p(center + z) in powers
    of z, together with the absolute-sum yardstick of each new coefficient."""
    size = min(count, len(coeffs))
    out = np.zeros(size, dtype=complex)
    mag = np.zeros(size)
    for i, ci in enumerate(coeffs):
        for j in range(min(i, size - 1) + 1):
            term = ci * math.comb(i, j) * center ** (i - j)
            out[j] += term
            mag[j] += abs(term)
    return out, mag


def _shifted_taylor(qp: Quasipolynomial, center: complex, count: int):
    """Taylor coefficients of Delta about ``center`` with formation
    yardsticks: Delta(center + z) = sum_j c_j z^j.  The exponential factor is
    folded in analytically, so any order is exact up to rounding."""
    p_shift, p_mag = _poly_shift(list(qp.a) + [1.0], center, count)
    q_shift, q_mag = _poly_shift(list(qp.b), center, count)
    exp_coeff = np.exp(-center * qp.tau) * np.array(
        [(-qp.tau) ** k / math.factorial(k) for k in range(count)], dtype=complex
    )
    delayed = np.convolve(exp_coeff, q_shift)[:count]
    delayed_mag = np.convolve(np.abs(exp_coeff), q_mag)[:count]
    c = np.zeros(count, dtype=complex)
    mag = np.zeros(count)
    c[: p_shift.size] = p_shift
    mag[: p_mag.size] = p_mag
    c[: delayed.size] += delayed
    mag[: delayed_mag.size] += delayed_mag
    return c, mag


def _exact_taylor_heads(qp: Quasipolynomial, s0: float, count: int) -> np.ndarray:
    """First ``count`` Taylor coefficients of Delta about a real point,
    formed exactly (rational arithmetic plus one 50-digit exponential) and
    rounded once at the end.

    A placed cluster leaves these coefficients smaller than their own
    double-precision formation noise, so forming them directly would bury
    the local behavior the recentered series exists to expose."""
    s0f = Fraction(s0)
    tauf = Fraction(qp.tau)
    pc = [Fraction(float(v)) for v in qp.a] + [Fraction(1)]
    qc = [Fraction(float(v)) for v in qp.b]

    def shift(coeffs, j):
        return sum(
            (coeffs[i] * math.comb(i, j) * s0f ** (i - j) for i in range(j, len(coeffs))),
            Fraction(0),
        )

    def to_dec(f):
        return Decimal(f.numerator) / Decimal(f.denominator)

    out = np.empty(count)
    with localcontext() as ctx:
        ctx.prec = 50
        expo = to_dec(-s0f * tauf).exp()
        for j in range(count):
            delayed = sum(
                (shift(qc, k) * (-tauf) ** (j - k) / math.factorial(j - k)
                 for k in range(min(j, len(qc) - 1) + 1)),
                Fraction(0),
            )
            out[j] = float(to_dec(shift(pc, j)) + expo * to_dec(delayed))
    return out


def _recentered_evaluator(qp: Quasipolynomial, center: complex, radius: float = 0.4,
                          terms: int = 48):
    """Contour evaluator that stays trustworthy next to a multiple root.

    Within ``radius`` of ``center`` the direct monomial sum cancels to
    rounding noise whenever the center carries a root cluster, which makes a
    nearby counting contour look like it touches a root.  The Taylor series
    about the center has no such cancellation across powers -- its terms are
    the surviving local behavior -- so both the values and the trust floor
    shrink to the honest local magnitude.  For a real center the leading
    coefficients are formed in extended precision, which makes the series
    follow the true stored function right through the cluster's noise
    plateau."""
    center = complex(center)
    c, mag = _shifted_taylor(qp, center, terms)
    if center.imag == 0.0:
        heads = _exact_taylor_heads(qp, center.real, min(qp.degree + 1, terms))
        c[: heads.size] = heads
    absc = np.abs(c)
    tail = 2.0 * mag[-1] * radius ** (terms - 1)
    powers = np.arange(terms)

    def fn(s):
        s = np.asarray(s, dtype=complex)
        vals = np.empty(s.shape, dtype=complex)
        floors = np.empty(s.shape, dtype=float)
        z = s - center
        near = np.abs(z) <= radius
        if near.any():
            zp = z[near, None] ** powers
            vals[near] = (c * zp).sum(axis=-1)
            floors[near] = BOUNDARY_SAFETY * ((absc * np.abs(zp)).sum(axis=-1) + tail)
        far = ~near
        if far.any():
            val, scale = qp.evaluate_with_scale(s[far])
            vals[far] = val
            floors[far] = BOUNDARY_SAFETY * np.asarray(scale, dtype=float)
        return vals, floors

    return fn


def _winding_number(fn, gamma, n0: int = 64, max_samples: int = 1 << 15) -> int:
    """Winding of fn's values along the closed path gamma : [0,1] -> C.

    ``fn`` maps contour points to (values, trust floors).  Adaptive phase
    continuation: any parameter interval whose phase step reaches pi/2 is
    split, so the final wrapped increments sum to the exact winding.  Raises
    _ContourTouchesRoot when a sample's magnitude falls below its floor.
    """
    t = np.linspace(0.0, 1.0, n0 + 1)
    val, floor = fn(gamma(t))
    if np.any(np.abs(val) <= floor):
        raise _ContourTouchesRoot
    phi = np.angle(val)
    logm = np.log(np.abs(val))
    while True:
        d = np.diff(phi)
        d = (d + np.pi) % (2.0 * np.pi) - np.pi
        # A wrapped phase step alone can alias a near-full turn (passing close
        # to a root), so segments are also split while the modulus jumps: the
        # fast swings always come with a sharp |Delta| dip.
        bad = np.nonzero((np.abs(d) >= 0.5 * np.pi) | (np.abs(np.diff(logm)) > math.log(2.0)))[0]
        if bad.size == 0:
            total = float(d.sum()) / (2.0 * np.pi)
            count = int(round(total))
            if abs(total - count) > 0.25:
                raise NumericFailure(
                    "certification_failed", "phase continuation did not close up"
                )
            return count
        if t.size + bad.size > max_samples:
            raise NumericFailure(
                "certification_failed",
                "contour refinement exceeded its sample budget (root on or near the contour?)",
            )
        tm = 0.5 * (t[bad] + t[bad + 1])
        vm, fm = fn(gamma(tm))
        if np.any(np.abs(vm) <= fm):
            raise _ContourTouchesRoot
        t = np.insert(t, bad + 1, tm)
        phi = np.insert(phi, bad + 1, np.angle(vm))
        logm = np.insert(logm, bad + 1, np.log(np.abs(vm)))


def _rectangle_path(x_min, x_max, y_max):
    corners = np.array(
        [
            x_max - 1j * y_max,
            x_max + 1j * y_max,
            x_min + 1j * y_max,
            x_min - 1j * y_max,
            x_max - 1j * y_max,
        ]
    )

    def gamma(t):
        u = np.clip(np.asarray(t, dtype=float), 0.0, 1.0) * 4.0
        seg = np.minimum(u.astype(int), 3)
        f = u - seg
        return corners[seg] * (1.0 - f) + corners[seg + 1] * f

    return gamma


def _count_roots_eval(fn, window: SpectralWindow) -> int:
    """Winding count over the window boundary using evaluator ``fn``; the
    rectangle is inflated by 1e-6 of its size, up to three times, if the
    contour runs into a root."""
    dx = 1e-6 * max(1.0, window.x_max - window.x_min)
    dy = 1e-6 * max(1.0, 2 * window.y_max)
    for k in range(4):
        gamma = _rectangle_path(window.x_min - k * dx, window.x_max + k * dx, window.y_max + k * dy)
        try:
            return _winding_number(fn, gamma)
        except _ContourTouchesRoot:
            continue
    raise NumericFailure(
        "window_boundary_root",
        "a root sits on the counting contour even after nudging the window",
    )


def count_roots(qp: Quasipolynomial, window: SpectralWindow) -> int:
    """Number of roots (with multiplicity) strictly inside the window, by the
    argument principle on its boundary."""
    if not isinstance(window, SpectralWindow):
        window = SpectralWindow.from_dict(window)
    return _count_roots_eval(_direct_evaluator(qp), window)


def _newton_refine(qp: Quasipolynomial, seeds: np.ndarray, center: complex, radius: float,
                   max_iter: int = 60) -> np.ndarray:
    """Damped vectorized Newton started from ``seeds``; iterates escaping the
    ball |s - center| > radius are frozen where they stood."""
    s = np.array(seeds, dtype=complex)
    active = np.ones(s.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        cur = s[active]
        val = np.asarray(qp.evaluate(cur))
        der = np.asarray(qp.evaluate_derivative(cur, 1))
        der = np.where(np.abs(der) == 0.0, 1e-30, der)
        step = val / der
        trial = cur - step
        # halve any step that increases |Delta| (up to five times)
        for _ in range(5):
            worse = np.abs(np.asarray(qp.evaluate(trial))) > np.abs(val)
            if not worse.any():
                break
            step = np.where(worse, 0.5 * step, step)
            trial = cur - step
        s[active] = trial
        idx = np.nonzero(active)[0]
        done = np.abs(step) <= NEWTON_STEP_TOL * (1.0 + np.abs(trial))
        escaped = np.abs(trial - center) > radius
        active[idx[done | escaped]] = False
    return s


def _cluster_radius(z: complex) -> float:
    return 1e-3 * (1.0 + abs(z))


def _cluster(points: np.ndarray):
    """Single-linkage union of points within each other's cluster radius."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(points[i] - points[j]) <= max(
                _cluster_radius(points[i]), _cluster_radius(points[j])
            ):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: (points[g[0]].real, points[g[0]].imag))


def _polish_root(qp: Quasipolynomial, z0: complex, mult: int, trust: float) -> complex:
    """Sharpen a cluster representative past the multiple-root noise floor.

    A multiplicity-M root of Delta is a *simple* root of the (M-1)-th
    derivative, so Newton on that derivative converges quadratically to full
    precision where Newton on Delta itself stalls at the rounding plateau
    (width ~ eps^(1/M)).  Reverts to the seed if the iteration leaves the
    trust disc."""
    z = complex(z0)
    order = mult - 1
    for _ in range(40):
        g = qp.evaluate_derivative(z, order) if order else qp.evaluate(z)
        gp = qp.evaluate_derivative(z, order + 1)
        if gp == 0:
            break
        step = complex(g) / complex(gp)
        z_new = z - step
        if abs(z_new - z0) > trust:
            return complex(z0)
        z = z_new
        if abs(step) <= 1e-15 * (1.0 + abs(z)):
            break
    return z


def compute_spectrum(qp: Quasipolynomial, window: SpectralWindow, grid=(400, 400)) -> Spectrum:
    """Locate, refine, and certify every root of Delta inside the window."""
    if not isinstance(window, SpectralWindow):
        window = SpectralWindow.from_dict(window)
    try:
        nx, ny = (int(v) for v in grid)
    except (TypeError, ValueError) as exc:
        raise InvalidInput("invalid_grid", "grid must be a pair of integers") from exc
    if nx < 8 or ny < 8:
        raise InvalidInput("invalid_grid", "spectrum grid must be at least 8 x 8")
    _neutral_window_guard(qp, window.x_min)

    for attempt_grid in (grid, (2 * nx, 2 * ny)):
        spectrum = _spectrum_once(qp, window, attempt_grid)
        if spectrum.certified:
            return spectrum
    return spectrum


def _neutral_window_guard(qp: Quasipolynomial, x_min: float) -> None:
    """Neutral systems carry root chains whose real parts accumulate at
    ln|b_n|/tau; a window reaching left of that line cannot be enumerated."""
    if qp.m != qp.n:
        return
    beta = abs(qp.b[-1])
    if beta == 0.0:
        return
    if beta >= 1.0:
        raise NumericFailure(
            "neutral_chain_unbounded",
            f"neutral system with |b_n| = {beta:.6g} >= 1: root chains reach Re s >= 0",
        )
    x_floor = math.log(beta) / qp.tau + 1e-2
    if x_min < x_floor:
        raise NumericFailure(
            "neutral_chain_unbounded",
            f"window must stay right of the neutral chain: x_min >= {x_floor:.6g}",
        )


def _spectrum_once(qp: Quasipolynomial, window: SpectralWindow, grid) -> Spectrum:
    nx, ny = (int(v) for v in grid)
    xs = np.linspace(window.x_min, window.x_max, nx)
    ys = np.linspace(-window.y_max, window.y_max, ny)
    S = xs[:, None] + 1j * ys[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        val = qp.evaluate(S)
    pos_r = val.real > 0
    pos_i = val.imag > 0

    def _changes(Bool):
        c = Bool[:-1, :-1]
        return (c != Bool[1:, :-1]) | (c != Bool[:-1, 1:]) | (c != Bool[1:, 1:])

    cand = _changes(pos_r) & _changes(pos_i)
    ci, cj = np.nonzero(cand)
    diag = math.hypot(window.x_max - window.x_min, 2 * window.y_max)
    center = complex(0.5 * (window.x_min + window.x_max), 0.0)
    # Point scales vanish where every monomial does (e.g. a root at the
    # origin of s^n), so residual yardsticks get a window-level floor.
    corners = [
        complex(window.x_min, -window.y_max),
        complex(window.x_min, window.y_max),
        complex(window.x_max, -window.y_max),
        complex(window.x_max, window.y_max),
    ]
    scale_floor = 1e-13 * max(
        1.0, max(float(qp.evaluate_with_scale(c)[1]) for c in corners)
    )
    roots: list[RootEstimate] = []
    total = count_roots(qp, window)
    if ci.size:
        centers = 0.5 * (xs[ci] + xs[ci + 1]) + 0.5j * (ys[cj] + ys[cj + 1])
        # A seed on the real axis stays real under Newton (real coefficients),
        # so each cell also seeds a conjugate off-axis pair.
        dy = 0.25 * (ys[1] - ys[0])
        seeds = np.concatenate([centers, centers + 1j * dy, centers - 1j * dy])
        refined = _newton_refine(qp, seeds, center, radius=2.0 * diag)
        inside = (
            (refined.real >= window.x_min - 1e-9)
            & (refined.real <= window.x_max + 1e-9)
            & (np.abs(refined.imag) <= window.y_max + 1e-9)
        )
        vals = np.asarray(qp.evaluate(refined))
        _, scales = qp.evaluate_with_scale(refined)
        scales = np.maximum(scales, scale_floor)
        ok = inside & (np.abs(vals) <= 1e-4 * scales)  # drop clear non-roots early
        pts = refined[ok]
        if pts.size:
            groups = _cluster(pts)
            for g in groups:
                members = pts[g]
                gv = np.abs(np.asarray(qp.evaluate(members)))
                rep = complex(members[int(np.argmin(gv))])
                spread = float(np.max(np.abs(members - rep)))
                outside_mask = np.ones(len(pts), dtype=bool)
                outside_mask[g] = False
                outside = pts[outside_mask]
                d_nn = float(np.min(np.abs(outside - rep))) if outside.size else np.inf
                # the counting circle must cover the whole cluster while
                # staying clear of every other one
                rho = min(3e-4 * (1.0 + abs(rep)), d_nn / 3.0)
                rho = max(rho, 1.5 * spread + 1e-8)
                mult = _circle_multiplicity(qp, rep, rho)
                if mult <= 0:
                    continue
                if mult >= 2 and abs(rep.imag) <= _cluster_radius(rep):
                    # a multiple cluster hugging the real axis is (numerically)
                    # a real multiple root or a merged conjugate pair
                    rep = complex(rep.real, 0.0)
                rep = _polish_root(qp, rep, mult, trust=max(10.0 * rho, _cluster_radius(rep)))
                v, sc = qp.evaluate_with_scale(rep)
                residual = abs(complex(v)) / max(float(sc), scale_floor)
                roots.append(
                    RootEstimate(
                        re=float(rep.real),
                        im=float(rep.imag),
                        multiplicity=mult,
                        residual=float(residual),
                        converged=bool(residual <= ROOT_RESIDUAL_TOL),
                    )
                )
    roots.sort(key=lambda r: (-r.re, r.im))
    abscissa = max((r.re for r in roots), default=None)
    certified = total == sum(r.multiplicity for r in roots)
    return Spectrum(
        window=window, roots=tuple(roots), abscissa=abscissa, total_count=total, certified=certified
    )


def _circle_multiplicity(qp: Quasipolynomial, center: complex, rho: float) -> int:
    """Winding of Delta around a small circle: the cluster's multiplicity.
    Shrinks the circle when it happens to graze another root.  Evaluation is
    recentered on the cluster so a high multiplicity cannot push the contour
    magnitudes down to rounding noise."""
    fn = _recentered_evaluator(qp, center, radius=max(0.4, 2.0 * rho))
    for _ in range(4):
        def gamma(t, _r=rho, _c=center):
            return _c + _r * np.exp(2j * np.pi * np.asarray(t))

        try:
            return _winding_number(fn, gamma, n0=32)
        except _ContourTouchesRoot:
            rho *= 0.5
    raise NumericFailure(
        "certification_failed", "could not isolate a root cluster with a counting circle"
    )


# ------------------------------------------------------------------ envelope


def imaginary_bound(qp: Quasipolynomial, x: float) -> float:
    """Modulus bound for roots with Re s >= x.

    Any root right of the vertical line satisfies
    |s|^n <= sum |a_k| |s|^k + e^(-tau x) sum |b_k| |s|^k, so the largest
    positive root of the gap g(r) = r^n - (...) bounds both |Im s| and Re s.
    For neutral systems the envelope only closes when the delayed leading
    coefficient stays contractive on the line: x must exceed
    ln|b_n|/tau (plus a 1e-2 chain margin), otherwise root chains accumulate
    to the right of x and no bound exists.
    """
    if not (isinstance(x, (int, float)) and math.isfinite(x)):
        raise InvalidInput("non_finite_input", "x must be finite")
    a_abs = np.abs(np.asarray(qp.a))
    b_abs = np.abs(np.asarray(qp.b))
    w = math.exp(-qp.tau * x)
    if qp.m == qp.n and b_abs[-1] > 0:
        x_floor = math.log(b_abs[-1]) / qp.tau + 1e-2
        if x < x_floor:
            raise NumericFailure(
                "neutral_chain_unbounded",
                f"neutral root chains are not bounded right of x = {x:.6g} "
                f"(need x >= ln|b_n|/tau + 1e-2 = {x_floor:.6g})",
            )
    n = qp.n

    def g(r):
        powers = r ** np.arange(max(n, len(b_abs)), dtype=float)
        return r**n - float(a_abs @ powers[:n]) - w * float(b_abs @ powers[: len(b_abs)])

    # past the chain check the effective leading coefficient is positive
    lead = 1.0 - (w * float(b_abs[-1]) if qp.m == qp.n else 0.0)
    rest = float(a_abs.sum()) + w * float(b_abs[: qp.n].sum())
    r_hi = max(1.0, rest / lead) + 1.0
    rs = np.linspace(0.0, r_hi, 512)
    gs = np.array([g(r) for r in rs])
    crossings = np.nonzero((gs[:-1] <= 0) & (gs[1:] > 0))[0]
    if crossings.size == 0:
        return 0.0
    i = crossings[-1]
    if gs[i] == 0.0:
        return float(rs[i])
    return float(brentq(g, rs[i], rs[i + 1], xtol=1e-12))


@dataclass(frozen=True)
class DominanceCertificate:
    """Winding-number evidence that nothing lies to the right of s0.

    ``right_window`` covers every possible root with Re s > s0 + epsilon (its
    extent comes from the envelope bound); ``right_count`` must be zero for
    dominance.  ``cluster_window`` moves the left edge to s0 - epsilon so the
    placed cluster itself is counted."""

    s0: float
    epsilon: float
    dominant: bool
    right_window: SpectralWindow
    right_count: int
    cluster_window: SpectralWindow
    cluster_count: int

    def to_dict(self) -> dict:
        return {
            "s0": self.s0,
            "epsilon": self.epsilon,
            "dominant": self.dominant,
            "right_window": self.right_window.to_dict(),
            "right_count": self.right_count,
            "cluster_window": self.cluster_window.to_dict(),
            "cluster_count": self.cluster_count,
        }


def _half_plane_window(qp: Quasipolynomial, edge: float) -> tuple:
    bound = imaginary_bound(qp, edge)
    if bound <= edge:
        return None, 0  # the envelope excludes roots right of the edge outright
    return SpectralWindow(x_min=edge, x_max=bound, y_max=bound), None


def check_dominance(qp: Quasipolynomial, s0: float, epsilon: float = 1e-3) -> DominanceCertificate:
    """Certify that s0 is the rightmost root location.

    Counts roots in [s0 + epsilon, x_cap] x [-Y, Y] with (x_cap, Y) from the
    envelope bound -- zero means dominance -- and repeats with the left edge
    at s0 - epsilon, which must pick up the placed cluster.  Both window
    edges pass within epsilon of the placed cluster, so counting evaluates
    Delta recentered on s0 to stay above rounding noise there."""
    if not (isinstance(s0, (int, float)) and math.isfinite(s0)):
        raise InvalidInput("non_finite_input", "s0 must be finite")
    if not (isinstance(epsilon, (int, float)) and 0 < epsilon < 1):
        raise InvalidInput("validation_error", f"epsilon must lie in (0, 1), got {epsilon}")

    fn = _recentered_evaluator(qp, complex(s0))

    right_window, forced = _half_plane_window(qp, s0 + epsilon)
    if right_window is None:
        right_count = forced
        right_window = SpectralWindow(s0 + epsilon, s0 + epsilon + 1e-6, 1e-6)
    else:
        right_count = _count_roots_eval(fn, right_window)

    cluster_window, forced = _half_plane_window(qp, s0 - epsilon)
    if cluster_window is None:
        cluster_count = forced
        cluster_window = SpectralWindow(s0 - epsilon, s0 - epsilon + 1e-6, 1e-6)
    else:
        cluster_count = _count_roots_eval(fn, cluster_window)

    return DominanceCertificate(
        s0=float(s0),
        epsilon=float(epsilon),
        dominant=(right_count == 0),
        right_window=right_window,
        right_count=right_count,
        cluster_window=cluster_window,
        cluster_count=cluster_count,
    )


# ---------------------------------------------------------------- sensitivity


@dataclass(frozen=True)
class SensitivityTrace:
    """Root-branch positions of the designed quasipolynomial as the realized
    delay sweeps around its design value (coefficients held fixed)."""

    taus: np.ndarray
    branches: np.ndarray  # (len(taus), m+2) complex
    converged: np.ndarray  # same shape, bool
    s0: float
    base_tau: float

    def to_dict(self) -> dict:
        return {
            "taus": self.taus.tolist(),
            "re": self.branches.real.tolist(),
            "im": self.branches.imag.tolist(),
            "converged": self.converged.tolist(),
            "s0": self.s0,
            "base_tau": self.base_tau,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("tau,branch_index,re,im,converged\n")
        for i, t in enumerate(self.taus):
            for j in range(self.branches.shape[1]):
                z = self.branches[i, j]
                buf.write(
                    f"{t:.17g},{j},{z.real:.17g},{z.imag:.17g},{int(self.converged[i, j])}\n"
                )
        return buf.getvalue()


def sensitivity_sweep(
    qp: Quasipolynomial,
    s0: float,
    tau_span: float = 0.2,
    steps: int = 41,
    newton_iterations: int = 50,
) -> SensitivityTrace:
    """Track the m+2 roots that emanate from the placed cluster as the delay
    is perturbed multiplicatively by up to ``tau_span``.

    The sweep starts at the grid point nearest the design delay, seeding the
    branches on a small circle around s0, and walks outward in both
    directions warm-starting each step from its neighbor.  When a step's
    branches have collapsed together (as they do at the design delay itself),
    the next step re-seeds on the circle: Newton from splayed angles
    distributes the iterates over the separating roots.
    """
    if not (isinstance(s0, (int, float)) and math.isfinite(s0)):
        raise InvalidInput("non_finite_input", "s0 must be finite")
    if not (0 < tau_span < 1):
        raise InvalidInput("validation_error", f"tau_span must lie in (0, 1), got {tau_span}")
    if not (isinstance(steps, (int, np.integer)) and steps >= 2):
        raise InvalidInput("validation_error", f"steps must be an integer >= 2, got {steps}")
    k = qp.m + 2
    taus = qp.tau * np.linspace(1.0 - tau_span, 1.0 + tau_span, int(steps))
    i0 = int(np.argmin(np.abs(taus - qp.tau)))
    r_seed = 1e-3 * (1.0 + abs(s0))
    circle = s0 + r_seed * np.exp(2j * np.pi * np.arange(k) / k)

    branches = np.empty((len(taus), k), dtype=complex)
    converged = np.empty((len(taus), k), dtype=bool)

    def _solve_at(tau_value, seeds):
        qp_t = Quasipolynomial(a=qp.a, b=qp.b, tau=float(tau_value))
        refined = _newton_refine(
            qp_t, np.asarray(seeds), complex(s0), radius=10.0 * (1.0 + abs(s0)),
            max_iter=newton_iterations,
        )
        vals = np.asarray(qp_t.evaluate(refined))
        _, scales = qp_t.evaluate_with_scale(refined)
        return refined, np.abs(vals) <= ROOT_RESIDUAL_TOL * scales

    def _next_seeds(prev):
        spread = max(
            abs(p - q) for p in prev for q in prev
        ) if len(prev) > 1 else 0.0
        if spread < r_seed:  # collapsed cluster: re-splay around its mean
            c = complex(np.mean(prev))
            return c + r_seed * np.exp(2j * np.pi * np.arange(k) / k)
        return np.asarray(prev)

    branches[i0], converged[i0] = _solve_at(taus[i0], circle)
    for i in range(i0 + 1, len(taus)):
        branches[i], converged[i] = _solve_at(taus[i], _next_seeds(branches[i - 1]))
    for i in range(i0 - 1, -1, -1):
        branches[i], converged[i] = _solve_at(taus[i], _next_seeds(branches[i + 1]))

    return SensitivityTrace(
        taus=taus, branches=branches, converged=converged, s0=float(s0), base_tau=qp.tau
    )
