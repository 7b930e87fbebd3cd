"""Factorized output forms for maximal-multiplicity quasipolynomials.

After normalization the designed quasipolynomial reads Dtilde(z) = z^M R(z)
with R(0) != 0.  This module extracts the Taylor remainder R, represents
Dtilde as z^M times a weighted exponential moment integral over [0, 1], and
-- when the weight is of Beta type c t^m (1-t)^n -- rewrites the integral as
a confluent hypergeometric (Kummer) function.  Every reported identity is
validated numerically at a fixed probe set before it is returned; nothing is
asserted symbolically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericFailure
from .quasipoly import Quasipolynomial

REMAINDER_TERMS = 16
FORM_RESIDUAL_TOL = 1e-8
KUMMER_ARGUMENT_CAP = 50.0
KUMMER_MAX_TERMS = 500
PROBES = (1.0, -1.0, 2.0, -2.0, 1j, -1j, 1.0 + 1j, -3.0)

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(64)
# map from [-1, 1] to [0, 1]
_GAUSS_T = 0.5 * (_GAUSS_NODES + 1.0)
_GAUSS_W = 0.5 * _GAUSS_WEIGHTS


@dataclass(frozen=True)
class FactorizedForm:
    """A validated representation Dtilde(z) = z^M * integral_0^1 w(t) e^(-zt) dt.

    ``weight_coeffs`` are the ascending coefficients of the polynomial w on
    [0, 1].  When w is of Beta type, ``hyper_params`` carries (a, b, c) with
    Dtilde(z) = z^M * c * B(m+1, n+1) * KummerM(a, b, -z); otherwise it is
    None.  ``validation_residual`` is the largest relative probe mismatch."""

    s0: float
    multiplicity: int
    weight_coeffs: tuple
    hyper_params: tuple | None
    validation_residual: float

    def to_dict(self) -> dict:
        hyper = None
        if self.hyper_params is not None:
            a, b, c = self.hyper_params
            hyper = {"a": a, "b": b, "c": c}
        return {
            "s0": self.s0,
            "multiplicity": self.multiplicity,
            "weight_coeffs": list(self.weight_coeffs),
            "hyper_params": hyper,
            "validation_residual": self.validation_residual,
        }


def _taylor_coefficients(qpn: Quasipolynomial, count: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``count`` Taylor coefficients of the unit-delay normalized form,
    t_j = Dtilde^(j)(0)/j!, with matching magnitude yardsticks.

    Works to arbitrary order because the exponential series is folded in
    analytically: t_j = p_j + sum_k b_k (-1)^(j-k)/(j-k)!.
    """
    p = np.zeros(count)
    pc = list(qpn.a) + [1.0]
    p[: min(count, len(pc))] = pc[: min(count, len(pc))]
    b = np.asarray(qpn.b)
    coeffs = np.empty(count)
    scales = np.empty(count)
    for j in range(count):
        k_hi = min(j, len(b) - 1)
        terms = np.array(
            [b[k] * (-1.0) ** (j - k) / math.factorial(j - k) for k in range(k_hi + 1)]
        )
        coeffs[j] = p[j] + terms.sum()
        scales[j] = abs(p[j]) + np.abs(terms).sum()
    scales = np.maximum(scales, 1e-2 * max(1.0, scales.max(initial=0.0)))
    return coeffs, scales


def _normalized(qp: Quasipolynomial, s0: float) -> Quasipolynomial:
    if qp.tau == 1.0 and s0 == 0.0:
        return qp
    return qp.normalize(s0)


def deflate(qp: Quasipolynomial, s0: float, M: int, L: int = REMAINDER_TERMS) -> np.ndarray:
    """Taylor remainder of the normalized form: coefficients of
    R(z) = Dtilde(z)/z^M, length L.

    Requires the first M Taylor coefficients to vanish numerically (the root
    at s0 really has multiplicity >= M) and the next one not to (it has
    multiplicity exactly M)."""
    if not (isinstance(M, (int, np.integer)) and M >= 1):
        raise InvalidInput("validation_error", f"multiplicity M must be a positive integer, got {M}")
    if M > qp.degree:
        raise InvalidInput(
            "derivative_order_too_large",
            f"multiplicity {M} exceeds the maximum n+m+1 = {qp.degree}",
        )
    if not (isinstance(L, (int, np.integer)) and 1 <= L <= 64):
        raise InvalidInput("validation_error", f"remainder length must be in 1..64, got {L}")
    qpn = _normalized(qp, s0)
    coeffs, scales = _taylor_coefficients(qpn, M + L)
    for k in range(M):
        if abs(coeffs[k]) > FORM_RESIDUAL_TOL * scales[k]:
            raise NumericFailure(
                "multiplicity_too_low",
                f"Taylor coefficient {k} of the normalized form is "
                f"{coeffs[k]:.3g}, not zero: the root multiplicity is below {M}",
            )
    if abs(coeffs[M]) <= FORM_RESIDUAL_TOL * scales[M]:
        raise NumericFailure(
            "multiplicity_too_low",
            f"leading remainder coefficient vanishes: multiplicity exceeds {M}",
        )
    return coeffs[M : M + L]


def _weight_quadrature(weight_coeffs, z: complex, M: int) -> complex:
    w_vals = np.polynomial.polynomial.polyval(_GAUSS_T, np.asarray(weight_coeffs))
    integral = np.sum(_GAUSS_W * w_vals * np.exp(-z * _GAUSS_T))
    return z**M * integral


def _probe_residual(qpn: Quasipolynomial, weight_coeffs, M: int, probes) -> float:
    worst = 0.0
    for z in probes:
        lhs = complex(qpn.evaluate(z))
        rhs = _weight_quadrature(weight_coeffs, complex(z), M)
        _, scale = qpn.evaluate_with_scale(complex(z))
        worst = max(worst, abs(lhs - rhs) / max(float(scale), 1.0))
    return worst


def _beta_weight(n: int, m: int, r0: float) -> tuple[np.ndarray, float]:
    beta = math.factorial(m) * math.factorial(n) / math.factorial(n + m + 1)
    c = r0 / beta
    one_minus_t = np.zeros(n + 1)
    for j in range(n + 1):
        one_minus_t[j] = math.comb(n, j) * (-1.0) ** j
    coeffs = np.zeros(n + m + 1)
    coeffs[m:] = c * one_minus_t
    return coeffs, c


def root_multiplicity(qp: Quasipolynomial, s0: float) -> int:
    """Number of leading Taylor coefficients of the normalized form that
    vanish numerically: the detected multiplicity of s0 (0 if not a root)."""
    qpn = _normalized(qp, s0)
    coeffs, scales = _taylor_coefficients(qpn, qp.degree + 1)
    k = 0
    while k < qp.degree and abs(coeffs[k]) <= FORM_RESIDUAL_TOL * scales[k]:
        k += 1
    return k


def integral_form(qp: Quasipolynomial, s0: float, M: int | None = None) -> FactorizedForm:
    """Represent the normalized design as z^M times an exponential moment
    integral with polynomial weight.

    M defaults to the detected multiplicity of s0 (maximal for a full
    placement).  Tries the Beta-type weight c t^m (1-t)^n first (exact for
    the maximal multiplicity M = n+m+1); if its probe validation fails -- as
    it does for partial placements with M < n+m+1 -- a general degree-(M-1)
    weight is solved from the first M remainder moments and re-validated."""
    if M is None:
        M = root_multiplicity(qp, s0)
        if M == 0:
            raise NumericFailure(
                "multiplicity_too_low", f"s0 = {s0} is not a root of the design"
            )
    r = deflate(qp, s0, M)
    qpn = _normalized(qp, s0)
    n, m = qp.n, qp.m

    beta_coeffs, c = _beta_weight(n, m, float(r[0]))
    residual = _probe_residual(qpn, beta_coeffs, M, PROBES)
    if residual <= FORM_RESIDUAL_TOL:
        return FactorizedForm(
            s0=float(s0),
            multiplicity=int(M),
            weight_coeffs=tuple(float(v) for v in beta_coeffs),
            hyper_params=(m + 1, n + m + 2, float(c)),
            validation_residual=float(residual),
        )

    # moment-matched fallback: mu_k = (-1)^k k! r_k and
    # mu_k = sum_i w_i / (k+i+1) for a degree-(M-1) polynomial weight
    mu = np.array([(-1.0) ** k * math.factorial(k) * r[k] for k in range(M)])
    A = np.array([[1.0 / (k + i + 1.0) for i in range(M)] for k in range(M)])
    try:
        w = np.linalg.solve(A, mu)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(
            "factorization_unrepresentable", "moment system is singular"
        ) from exc
    if not np.all(np.isfinite(w)):
        raise NumericFailure(
            "factorization_unrepresentable", "moment system produced non-finite weight"
        )
    fallback_residual = _probe_residual(qpn, w, M, PROBES)
    if fallback_residual <= FORM_RESIDUAL_TOL:
        return FactorizedForm(
            s0=float(s0),
            multiplicity=int(M),
            weight_coeffs=tuple(float(v) for v in w),
            hyper_params=None,
            validation_residual=float(fallback_residual),
        )
    raise NumericFailure(
        "factorization_unrepresentable",
        f"no polynomial weight validated at the probes "
        f"(beta residual {residual:.3g}, moment residual {fallback_residual:.3g})",
    )


def hypergeometric_form(qp: Quasipolynomial, s0: float, M: int | None = None) -> FactorizedForm:
    """Kummer-function form Dtilde(z) = z^M c B(m+1, n+1) M(m+1, n+m+2, -z).

    Available exactly when the integral form carries the Beta-type weight;
    the identity is re-validated at the probe set through the series
    evaluation of M."""
    form = integral_form(qp, s0, M)
    if form.hyper_params is None:
        raise NumericFailure(
            "factorization_unrepresentable",
            "hypergeometric form unavailable: the integral form needed a "
            "general (non-Beta) weight",
        )
    a, b, c = form.hyper_params
    qpn = _normalized(qp, float(form.s0))
    beta = math.factorial(a - 1) * math.factorial(b - a - 1) / math.factorial(b - 1)
    worst = 0.0
    for z in PROBES:
        lhs = complex(qpn.evaluate(z))
        rhs = complex(z) ** form.multiplicity * c * beta * kummer_M(a, b, -complex(z))
        _, scale = qpn.evaluate_with_scale(complex(z))
        worst = max(worst, abs(lhs - rhs) / max(float(scale), 1.0))
    if worst > FORM_RESIDUAL_TOL:
        raise NumericFailure(
            "factorization_unrepresentable",
            f"hypergeometric identity failed validation (residual {worst:.3g})",
        )
    return FactorizedForm(
        s0=form.s0,
        multiplicity=form.multiplicity,
        weight_coeffs=form.weight_coeffs,
        hyper_params=form.hyper_params,
        validation_residual=float(max(form.validation_residual, worst)),
    )


def kummer_M(a: float, b: float, z: complex) -> complex:
    """Confluent hypergeometric function M(a, b, z) by direct series.

    sum_k (a)_k z^k / ((b)_k k!), accumulated until a term falls below
    1e-16 of the partial sum."""
    if not (isinstance(a, (int, float)) and isinstance(b, (int, float))):
        raise InvalidInput("validation_error", "Kummer parameters must be real numbers")
    if not (math.isfinite(a) and math.isfinite(b) and a > 0 and b >= a):
        raise InvalidInput("validation_error", f"need b >= a > 0, got a={a}, b={b}")
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidInput("non_finite_input", "z must be finite")
    if abs(z) > KUMMER_ARGUMENT_CAP:
        raise InvalidInput(
            "kummer_argument_too_large",
            f"|z| = {abs(z):.3g} outside the series regime (cap {KUMMER_ARGUMENT_CAP:g})",
        )
    term = 1.0 + 0.0j
    total = term
    for k in range(KUMMER_MAX_TERMS):
        term = term * (a + k) * z / ((b + k) * (k + 1))
        total += term
        if abs(term) < 1e-16 * abs(total):
            return total
    raise NumericFailure(
        "kummer_series_diverged",
        f"series did not settle within {KUMMER_MAX_TERMS} terms",
    )
