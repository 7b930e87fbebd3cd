"""Quasipolynomial arithmetic for single-delay characteristic functions.

The central object is Delta(s) = P(s) + exp(-s*tau) * Q(s), with P monic of
degree n and deg Q = m <= n.  Everything downstream (pole placement, the
admissibility map, spectrum certification, factorization) funnels through the
evaluation and derivative routines here, so they are kept vectorized and
allocation-light.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InvalidInput, NumericFailure

# Highest derivative order any algorithm in the package requests beyond the
# structural degree n+m+1; orders past n+m+1+5 are refused.
DERIVATIVE_ORDER_SLACK = 5


def _as_float_tuple(values, name: str) -> tuple:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput("invalid_quasipolynomial", f"{name} must be a real sequence") from exc
    if arr.ndim != 1:
        raise InvalidInput("invalid_quasipolynomial", f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("non_finite_input", f"{name} contains NaN or infinity")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class Quasipolynomial:
    """Characteristic function Delta(s) = P(s) + exp(-s*tau) * Q(s).

    Parameters
    ----------
    a : sequence of float
        Coefficients of P below the leading term, ascending by power.  P is
        monic of degree n = len(a); the leading coefficient 1 is implicit.
    b : sequence of float
        Coefficients of Q, ascending by power; m = len(b) - 1.
    tau : float
        Delay, strictly positive.

    The retarded case is m < n; m == n is neutral.  Degrees larger than the
    polynomial part (m > n) are rejected.
    """

    a: tuple
    b: tuple
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "a", _as_float_tuple(self.a, "a"))
        object.__setattr__(self, "b", _as_float_tuple(self.b, "b"))
        if len(self.a) < 1:
            raise InvalidInput("invalid_quasipolynomial", "P must have degree n >= 1 (len(a) >= 1)")
        if len(self.b) < 1:
            raise InvalidInput("invalid_quasipolynomial", "Q needs at least a constant coefficient")
        if len(self.b) - 1 > len(self.a):
            raise InvalidInput(
                "invalid_quasipolynomial",
                f"deg Q = {len(self.b) - 1} exceeds deg P = {len(self.a)} (advanced type not supported)",
            )
        tau = self.tau
        if not isinstance(tau, (int, float)) or not math.isfinite(tau):
            raise InvalidInput("non_finite_input", "tau must be a finite real number")
        if tau <= 0:
            raise InvalidInput("invalid_quasipolynomial", f"tau must be positive, got {tau}")
        object.__setattr__(self, "tau", float(tau))

    # ------------------------------------------------------------------ shape

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def m(self) -> int:
        return len(self.b) - 1

    @property
    def degree(self) -> int:
        """Structural degree n + m + 1: the maximal root multiplicity and the
        number of coefficient degrees of freedom (a, b, and the delay slot)."""
        return self.n + self.m + 1

    def classify(self) -> str:
        return "retarded" if self.m < self.n else "neutral"

    def _p_coeffs(self) -> np.ndarray:
        return np.asarray(self.a + (1.0,))

    def _q_coeffs(self) -> np.ndarray:
        return np.asarray(self.b)

    # ------------------------------------------------------------- evaluation

    def evaluate(self, s):
        """Evaluate Delta at s (scalar or array; complex Horner)."""
        sc = np.asarray(s, dtype=complex)
        val = npoly.polyval(sc, self._p_coeffs()) + np.exp(-self.tau * sc) * npoly.polyval(
            sc, self._q_coeffs()
        )
        return val if sc.shape else complex(val)

    def evaluate_with_scale(self, s):
        """Evaluate Delta together with its cancellation yardstick.

        Returns ``(value, scale)`` where scale is the sum of the absolute
        values of every monomial term of Delta at s,

            scale = sum_k |a_k| |s|^k + |s|^n + e^(-tau Re s) sum_k |b_k| |s|^k,

        so |value| << scale means the evaluation lives deep in cancellation
        territory.  Residual thresholds throughout the package are taken
        relative to this scale.
        """
        sc = np.asarray(s, dtype=complex)
        r = np.abs(sc)
        scale = npoly.polyval(r, np.abs(self._p_coeffs())) + np.exp(
            -self.tau * sc.real
        ) * npoly.polyval(r, np.abs(self._q_coeffs()))
        scale = np.maximum(scale.real, np.finfo(float).tiny)
        val = npoly.polyval(sc, self._p_coeffs()) + np.exp(-self.tau * sc) * npoly.polyval(
            sc, self._q_coeffs()
        )
        if sc.shape:
            return val, scale
        return complex(val), float(scale)

    def evaluate_derivative(self, s, k: int):
        """k-th derivative of Delta at s.

        Uses the Leibniz expansion of the delayed term:

            Delta^(k)(s) = P^(k)(s)
                         + e^(-s tau) * sum_{i=0}^{k} C(k,i) (-tau)^(k-i) Q^(i)(s).

        Orders above n+m+1+5 are refused; nothing in this package needs them
        and factorials past that point start to dominate rounding noise.
        """
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise InvalidInput("validation_error", "derivative order k must be a nonnegative integer")
        if k > self.degree + DERIVATIVE_ORDER_SLACK:
            raise InvalidInput(
                "derivative_order_too_large",
                f"derivative order {k} exceeds cap n+m+1+{DERIVATIVE_ORDER_SLACK} = "
                f"{self.degree + DERIVATIVE_ORDER_SLACK}",
            )
        sc = np.asarray(s, dtype=complex)
        pk = npoly.polyder(self._p_coeffs(), k) if k else self._p_coeffs()
        out = npoly.polyval(sc, pk) if len(pk) else np.zeros_like(sc)
        q = self._q_coeffs()
        acc = np.zeros_like(sc)
        for i in range(0, min(k, self.m) + 1):
            qi = npoly.polyder(q, i) if i else q
            acc = acc + math.comb(k, i) * (-self.tau) ** (k - i) * npoly.polyval(sc, qi)
        out = out + np.exp(-self.tau * sc) * acc
        return out if sc.shape else complex(out)

    # ---------------------------------------------------------- normalization

    def normalize(self, s0: float) -> "Quasipolynomial":
        """Shift to s0 and rescale time by the delay: unit-delay normal form.

        Returns the quasipolynomial Dtilde with

            Dtilde(z) = tau^n * Delta(s0 + z/tau),   delay 1,

        whose polynomial part is again monic and whose b coefficients absorb
        the factor e^(-s0 tau).  Roots map by z = tau*(s - s0) with
        multiplicities preserved, so a root placed at s0 sits at the origin of
        the normalized form.
        """
        if not math.isfinite(s0):
            raise InvalidInput("non_finite_input", "s0 must be finite")
        tau, n = self.tau, self.n
        shift = npoly.Polynomial([float(s0), 1.0 / tau])
        p_new = (tau**n) * npoly.Polynomial(self._p_coeffs())(shift)
        q_new = (tau**n) * math.exp(-s0 * tau) * npoly.Polynomial(self._q_coeffs())(shift) \
            if abs(s0 * tau) < 700 else None
        if q_new is None or not (
            np.all(np.isfinite(p_new.coef)) and np.all(np.isfinite(q_new.coef))
        ):
            raise NumericFailure(
                "normalization_overflow", f"exp(-s0*tau) overflows for s0*tau = {s0 * tau:.3g}"
            )
        pc = np.zeros(n + 1)
        pc[: len(p_new.coef)] = p_new.coef
        pc /= pc[-1]  # restore exact monicity (leading term is 1 up to rounding)
        qc = np.zeros(self.m + 1)
        qc[: len(q_new.coef)] = q_new.coef
        return Quasipolynomial(a=tuple(pc[:-1]), b=tuple(qc), tau=1.0)

    # ---------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        """Canonical JSON form: {"n", "m", "a", "b", "tau"}."""
        return {
            "n": self.n,
            "m": self.m,
            "a": list(self.a),
            "b": list(self.b),
            "tau": self.tau,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Quasipolynomial":
        if not isinstance(data, dict):
            raise InvalidInput("invalid_quasipolynomial", "expected a JSON object")
        missing = {"a", "b", "tau"} - set(data)
        if missing:
            raise InvalidInput("invalid_quasipolynomial", f"missing fields: {sorted(missing)}")
        qp = cls(a=data["a"], b=data["b"], tau=data["tau"])
        if "n" in data and int(data["n"]) != qp.n:
            raise InvalidInput("invalid_quasipolynomial", f"n={data['n']} inconsistent with len(a)={qp.n}")
        if "m" in data and int(data["m"]) != qp.m:
            raise InvalidInput("invalid_quasipolynomial", f"m={data['m']} inconsistent with len(b)-1={qp.m}")
        return qp

    def __repr__(self) -> str:
        return f"Quasipolynomial(a={list(self.a)}, b={list(self.b)}, tau={self.tau})"
