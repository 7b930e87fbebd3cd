"""Pole placement by finite linear solves.

Three design routes, all reducing to small dense linear systems:

* ``solve_generic_mid``  -- choose every free coefficient (a and b) so that a
  single real root s0 reaches the maximal multiplicity n+m+1.
* ``solve_control_mid``  -- plant polynomial P fixed, choose only the feedback
  coefficients b so that s0 is a root of multiplicity (at least) m+1.
* ``solve_crrid``        -- assign n+m+1 *distinct* real roots instead of one
  multiple root.

The delayed-term columns are written in the substituted unknowns
c_j = b_j * exp(-s0*tau); this keeps the exponential out of the matrix (it
would otherwise multiply every delayed column and wreck the conditioning for
large |s0*tau|), and b is recovered afterwards by one scalar multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InvalidInput, NumericFailure
from .quasipoly import Quasipolynomial

# Relative residual each imposed condition must meet after back-substitution.
RESIDUAL_TOL = 1e-8
# Condition-number ceiling beyond which the solve is reported as degenerate.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class PlacementResult:
    """Outcome of a multiplicity-based design.

    ``multiplicity`` counts the *imposed* coincident-root conditions (m+1 for
    the control-oriented solve, n+m+1 for the generic one); the realized
    multiplicity can be higher at admissible points.  ``residuals`` are the
    relative condition residuals |Delta^(k)(s0)| / scale_k, one per imposed
    condition.
    """

    qp: Quasipolynomial
    s0: float
    multiplicity: int
    residuals: tuple
    condition: float

    def to_dict(self) -> dict:
        return {
            "qp": self.qp.to_dict(),
            "s0": self.s0,
            "multiplicity": self.multiplicity,
            "residuals": list(self.residuals),
            "condition": self.condition,
        }


@dataclass(frozen=True)
class CrridResult:
    """Outcome of distinct-root assignment: qp with all of ``roots`` placed."""

    qp: Quasipolynomial
    roots: tuple
    residuals: tuple
    condition: float

    def to_dict(self) -> dict:
        return {
            "qp": self.qp.to_dict(),
            "roots": list(self.roots),
            "residuals": list(self.residuals),
            "condition": self.condition,
        }


def delayed_monomial_derivative(k: int, j: int, s0, tau):
    """d^k/ds^k [s^j e^(-s tau)] evaluated at s0, with the overall factor
    e^(-s0 tau) stripped.  This is the matrix entry multiplying the
    substituted unknown c_j = b_j e^(-s0 tau).  Broadcasts over s0/tau."""
    out = 0.0
    for i in range(min(k, j) + 1):
        out = out + (
            math.comb(k, i)
            * math.perm(j, i)
            * np.asarray(-tau) ** (k - i)
            * np.asarray(s0) ** (j - i)
        )
    return out


def _poly_derivative_value(coeffs, k, s0):
    return npoly.polyval(s0, npoly.polyder(coeffs, k)) if k else npoly.polyval(s0, coeffs)


def _derivative_scale(qp: Quasipolynomial, s0: float, k: int) -> float:
    """Sum of absolute values of every term in Delta^(k)(s0) -- the yardstick
    against which a residual counts as zero."""
    r = abs(s0)
    p = np.abs(np.asarray(qp.a + (1.0,)))
    q = np.abs(np.asarray(qp.b))
    scale = float(_poly_derivative_value(p, k, r))
    acc = 0.0
    for i in range(min(k, qp.m) + 1):
        acc += math.comb(k, i) * qp.tau ** (k - i) * float(_poly_derivative_value(q, i, r))
    scale += math.exp(-qp.tau * s0) * acc
    return max(scale, np.finfo(float).tiny)


def _relative_residuals(qp: Quasipolynomial, s0: float, orders, floor: float = 0.0) -> tuple:
    # ``floor`` is the magnitude yardstick of the linear system that produced
    # qp (||A|| ||x|| + ||rhs||): a backward-stable solve cannot promise
    # residuals small relative to anything finer, e.g. when one condition's
    # own terms are orders of magnitude below the rest of the system.
    out = []
    for k in orders:
        val = qp.evaluate_derivative(s0, k)
        out.append(abs(val) / max(_derivative_scale(qp, s0, k), floor))
    return tuple(out)


def _system_scale(A: np.ndarray, x: np.ndarray, rhs: np.ndarray) -> float:
    return float(
        np.linalg.norm(A, np.inf) * np.max(np.abs(x)) + np.max(np.abs(rhs))
    )


def _check_solvable(A: np.ndarray, what: str) -> float:
    if not np.all(np.isfinite(A)):
        raise NumericFailure("degenerate_placement_system", f"{what}: system entries overflow")
    cond = float(np.linalg.cond(A))
    if not math.isfinite(cond) or cond > CONDITION_LIMIT:
        raise NumericFailure(
            "degenerate_placement_system",
            f"{what}: condition number {cond:.3g} exceeds {CONDITION_LIMIT:.0e}",
        )
    return cond


def _validate_common(tau: float, s0: float):
    if not (isinstance(tau, (int, float)) and math.isfinite(tau)) or tau <= 0:
        raise InvalidInput("validation_error", f"tau must be positive and finite, got {tau}")
    if not (isinstance(s0, (int, float)) and math.isfinite(s0)):
        raise InvalidInput("non_finite_input", "s0 must be finite")


def _control_system(a, m: int, tau: float, s0: float, absorb_exponential: bool = True):
    """Rows Delta^(k)(s0) = 0 for k = 0..m, unknowns c (absorbed) or raw b."""
    p = np.append(np.asarray(a, dtype=float), 1.0)
    A = np.empty((m + 1, m + 1))
    rhs = np.empty(m + 1)
    for k in range(m + 1):
        for j in range(m + 1):
            A[k, j] = delayed_monomial_derivative(k, j, s0, tau)
        rhs[k] = -float(_poly_derivative_value(p, k, s0))
    if not absorb_exponential:
        A = A * math.exp(-s0 * tau)
    return A, rhs


def solve_control_mid(a, m: int, tau: float, s0: float) -> PlacementResult:
    """Fix the plant P (monic, lower coefficients ``a``) and choose b so that
    s0 becomes a root of multiplicity at least m+1.

    The m+1 conditions Delta^(k)(s0) = 0, k = 0..m, are linear in
    c_j = b_j e^(-s0 tau) and the system matrix is a confluent Wronskian of
    the extended Chebyshev system {s^j e^(-s tau)}, hence nonsingular for
    every tau > 0; failures can only come from overflow or extreme
    ill-conditioning.
    """
    _validate_common(tau, s0)
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or len(a) < 1 or not np.all(np.isfinite(a)):
        raise InvalidInput("invalid_quasipolynomial", "a must be a finite real vector, length n >= 1")
    if not isinstance(m, (int, np.integer)) or m < 0 or m > len(a):
        raise InvalidInput("validation_error", f"m must satisfy 0 <= m <= n = {len(a)}, got {m}")
    A, rhs = _control_system(a, m, tau, s0)
    cond = _check_solvable(A, "control-MID")
    c = np.linalg.solve(A, rhs)
    b = c * math.exp(s0 * tau) if abs(s0 * tau) < 700 else c * np.inf
    if not np.all(np.isfinite(b)):
        raise NumericFailure("degenerate_placement_system", "recovered b overflows")
    qp = Quasipolynomial(a=tuple(a), b=tuple(b), tau=tau)
    residuals = _relative_residuals(qp, s0, range(m + 1), floor=_system_scale(A, c, rhs))
    if max(residuals) > RESIDUAL_TOL:
        raise NumericFailure(
            "degenerate_placement_system",
            f"post-solve residual {max(residuals):.3g} exceeds {RESIDUAL_TOL:.0e}",
        )
    return PlacementResult(qp=qp, s0=float(s0), multiplicity=m + 1, residuals=residuals, condition=cond)


def solve_generic_mid(n: int, m: int, tau: float, s0: float) -> PlacementResult:
    """Choose all of a and b so that s0 reaches the maximal multiplicity
    n+m+1.  Unknown vector is [a_0..a_{n-1}, c_0..c_m]; row k imposes
    Delta^(k)(s0) = 0 with the monic s^n term on the right-hand side."""
    _validate_common(tau, s0)
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInput("validation_error", f"n must be a positive integer, got {n}")
    if not isinstance(m, (int, np.integer)) or m < 0 or m > n:
        raise InvalidInput("validation_error", f"m must satisfy 0 <= m <= n = {n}, got {m}")
    size = n + m + 1
    A = np.empty((size, size))
    rhs = np.empty(size)
    for k in range(size):
        for j in range(n):
            A[k, j] = math.perm(j, k) * s0 ** (j - k) if k <= j else 0.0
        for j in range(m + 1):
            A[k, n + j] = delayed_monomial_derivative(k, j, s0, tau)
        rhs[k] = -(math.perm(n, k) * s0 ** (n - k)) if k <= n else 0.0
    cond = _check_solvable(A, "generic MID")
    x = np.linalg.solve(A, rhs)
    a = x[:n]
    b = x[n:] * math.exp(s0 * tau) if abs(s0 * tau) < 700 else x[n:] * np.inf
    if not np.all(np.isfinite(b)):
        raise NumericFailure("degenerate_placement_system", "recovered b overflows")
    qp = Quasipolynomial(a=tuple(a), b=tuple(b), tau=tau)
    residuals = _relative_residuals(qp, s0, range(size), floor=_system_scale(A, x, rhs))
    if max(residuals) > RESIDUAL_TOL:
        raise NumericFailure(
            "degenerate_placement_system",
            f"post-solve residual {max(residuals):.3g} exceeds {RESIDUAL_TOL:.0e}",
        )
    return PlacementResult(qp=qp, s0=float(s0), multiplicity=size, residuals=residuals, condition=cond)


def solve_crrid(n: int, m: int, tau: float, roots) -> CrridResult:
    """Assign n+m+1 distinct real roots.

    Row per root r: sum_j a_j r^j + e^(-r tau) sum_j b_j r^j = -r^n.  The
    exponentials stay explicit here (each row has its own factor, so nothing
    cancels globally); widely spread negative roots can therefore overflow,
    which is reported as a degenerate system.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInput("validation_error", f"n must be a positive integer, got {n}")
    if not isinstance(m, (int, np.integer)) or m < 0 or m > n:
        raise InvalidInput("validation_error", f"m must satisfy 0 <= m <= n = {n}, got {m}")
    if not (isinstance(tau, (int, float)) and math.isfinite(tau)) or tau <= 0:
        raise InvalidInput("validation_error", f"tau must be positive and finite, got {tau}")
    r = np.asarray(roots, dtype=float)
    if r.ndim != 1 or not np.all(np.isfinite(r)):
        raise InvalidInput("non_finite_input", "roots must be a finite real vector")
    size = n + m + 1
    if len(r) != size:
        raise InvalidInput(
            "root_count_mismatch", f"need exactly n+m+1 = {size} roots, got {len(r)}"
        )
    r = np.sort(r)
    gap_tol = 1e-9 * (1.0 + float(np.max(np.abs(r))))
    if len(r) > 1 and float(np.min(np.diff(r))) <= gap_tol:
        raise InvalidInput("roots_not_distinct", f"assigned roots closer than {gap_tol:.3g}")
    with np.errstate(over="ignore"):
        expo = np.exp(-tau * r)
    powers = np.vander(r, N=n + 1, increasing=True)  # r^0 .. r^n
    A = np.hstack([powers[:, :n], expo[:, None] * powers[:, : m + 1]])
    rhs = -powers[:, n]
    cond = _check_solvable(A, "distinct-root assignment")
    x = np.linalg.solve(A, rhs)
    qp = Quasipolynomial(a=tuple(x[:n]), b=tuple(x[n:]), tau=float(tau))
    floor = _system_scale(A, x, rhs)
    residuals = []
    for root in r:
        val, scale = qp.evaluate_with_scale(root)
        residuals.append(abs(val) / max(scale, floor))
    residuals = tuple(residuals)
    if max(residuals) > RESIDUAL_TOL:
        raise NumericFailure(
            "degenerate_placement_system",
            f"assigned-root residual {max(residuals):.3g} exceeds {RESIDUAL_TOL:.0e}",
        )
    return CrridResult(qp=qp, roots=tuple(float(v) for v in r), residuals=residuals, condition=cond)
