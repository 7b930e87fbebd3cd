import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaylab import (
    InvalidInput,
    NumericFailure,
    Quasipolynomial,
    solve_control_mid,
    solve_crrid,
    solve_generic_mid,
)
from delaylab.placement import _control_system


def test_control_mid_oscillator_triple_root_gain():
    # Oscillator P = s^2 + 1, proportional-derivative delayed feedback,
    # s0 = -1, tau = 1: the exact solution is b = [-2/e, 0].
    res = solve_control_mid(a=[1.0, 0.0], m=1, tau=1.0, s0=-1.0)
    assert res.qp.b[0] == pytest.approx(-2.0 / math.e, abs=1e-12)
    assert abs(res.qp.b[1]) < 1e-12
    assert res.multiplicity == 2
    assert max(res.residuals) <= 1e-8
    # The point is admissible, so the next derivative vanishes too.
    assert abs(res.qp.evaluate_derivative(-1.0, 2)) < 1e-10


def test_control_mid_proportional_only():
    # Single condition m=0: Delta(-1) = 2 + e*b0 = 0.
    res = solve_control_mid(a=[1.0, 0.0], m=0, tau=1.0, s0=-1.0)
    assert res.qp.b[0] == pytest.approx(-2.0 / math.e, abs=1e-12)


def test_generic_mid_first_order():
    # (n, m) = (1, 0), s0 = 0, tau = 1 forces Delta = s - 1 + e^{-s}.
    res = solve_generic_mid(n=1, m=0, tau=1.0, s0=0.0)
    assert res.qp.a[0] == pytest.approx(-1.0, abs=1e-12)
    assert res.qp.b[0] == pytest.approx(1.0, abs=1e-12)
    assert res.multiplicity == 2


def test_generic_mid_second_order_with_derivative_feedback():
    res = solve_generic_mid(n=2, m=1, tau=1.0, s0=0.0)
    assert np.allclose(res.qp.a, [6.0, -4.0], atol=1e-10)
    assert np.allclose(res.qp.b, [-6.0, -2.0], atol=1e-10)
    assert res.multiplicity == 4
    # Multiplicity is exactly n+m+1: the next derivative must not vanish.
    assert abs(res.qp.evaluate_derivative(0.0, 4)) > 1e-6


def test_generic_mid_second_order_proportional():
    res = solve_generic_mid(n=2, m=0, tau=1.0, s0=0.0)
    assert np.allclose(res.qp.a, [2.0, -2.0], atol=1e-10)
    assert np.allclose(res.qp.b, [-2.0], atol=1e-10)


def test_crrid_two_assigned_roots():
    # n=1, m=0, tau=1, roots {-1, -2}: eliminating by hand gives
    # b0 = 1/(e^2 - e) and a0 = 1 - 1/(e - 1).
    res = solve_crrid(n=1, m=0, tau=1.0, roots=[-1.0, -2.0])
    assert res.qp.a[0] == pytest.approx(1.0 - 1.0 / (math.e - 1.0), abs=1e-12)
    assert res.qp.b[0] == pytest.approx(1.0 / (math.e**2 - math.e), abs=1e-12)
    for r in (-1.0, -2.0):
        assert abs(res.qp.evaluate(r)) < 1e-12


def test_crrid_rejects_duplicate_roots():
    with pytest.raises(InvalidInput) as err:
        solve_crrid(n=1, m=0, tau=1.0, roots=[-1.0, -1.0])
    assert err.value.code == "roots_not_distinct"


def test_crrid_rejects_wrong_count():
    with pytest.raises(InvalidInput) as err:
        solve_crrid(n=1, m=0, tau=1.0, roots=[-1.0, -2.0, -3.0])
    assert err.value.code == "root_count_mismatch"


def test_crrid_overflowing_spread_is_degenerate():
    with pytest.raises(NumericFailure) as err:
        solve_crrid(n=1, m=0, tau=1.0, roots=[-1000.0, -1001.0])
    assert err.value.code == "degenerate_placement_system"


def test_condition_estimate_reported():
    res = solve_control_mid(a=[1.0, 0.0], m=1, tau=1.0, s0=-1.0)
    assert res.condition >= 1.0
    assert math.isfinite(res.condition)


def test_result_serialization():
    res = solve_control_mid(a=[1.0, 0.0], m=1, tau=1.0, s0=-1.0)
    d = res.to_dict()
    assert d["s0"] == -1.0
    assert d["multiplicity"] == 2
    assert d["qp"]["b"][0] == pytest.approx(-2.0 / math.e)


@st.composite
def control_instances(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(0, min(n, 2)))
    coeff = st.floats(-4, 4, allow_nan=False)
    a = draw(st.lists(coeff, min_size=n, max_size=n))
    tau = draw(st.floats(0.05, 2.0))
    s0_tau = draw(st.floats(-5.0, 2.0))  # keep |s0*tau| modest
    return a, m, tau, s0_tau / tau


@settings(max_examples=120, deadline=None)
@given(control_instances())
def test_control_mid_residuals_meet_tolerance(instance):
    a, m, tau, s0 = instance
    res = solve_control_mid(a=a, m=m, tau=tau, s0=s0)
    assert len(res.residuals) == m + 1
    assert max(res.residuals) <= 1e-8


@settings(max_examples=120, deadline=None)
@given(control_instances())
def test_exponential_absorption_is_equivalent(instance):
    # Solving in c = b e^{-s0 tau} and solving in raw b must agree; the
    # substitution only affects conditioning, not the solution.
    a, m, tau, s0 = instance
    A_c, rhs = _control_system(a, m, tau, s0, absorb_exponential=True)
    A_b, rhs_b = _control_system(a, m, tau, s0, absorb_exponential=False)
    b_via_c = np.linalg.solve(A_c, rhs) * math.exp(s0 * tau)
    b_raw = np.linalg.solve(A_b, rhs_b)
    denom = np.max(np.abs(b_raw)) + 1.0
    assert np.max(np.abs(b_via_c - b_raw)) / denom <= 1e-6


@settings(max_examples=120, deadline=None)
@given(
    st.integers(1, 3),
    st.integers(0, 2),
    st.floats(0.2, 1.5),
    st.floats(-2.0, 1.0),
)
def test_generic_mid_pins_full_multiplicity(n, m, tau, s0):
    m = min(m, n)
    res = solve_generic_mid(n=n, m=m, tau=tau, s0=s0)
    assert len(res.residuals) == n + m + 1
    assert max(res.residuals) <= 1e-8


@settings(max_examples=120, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2), st.floats(0.2, 1.5), st.data())
def test_crrid_assigned_roots_are_roots(n, m, tau, data):
    m = min(m, n)
    size = n + m + 1
    start = data.draw(st.floats(-3.0, 0.0))
    gaps = data.draw(
        st.lists(st.floats(0.15, 1.0), min_size=size - 1, max_size=size - 1)
    )
    roots = [start]
    for g in gaps:
        roots.append(roots[-1] - g)
    res = solve_crrid(n=n, m=m, tau=tau, roots=roots)
    for r in roots:
        val, scale = res.qp.evaluate_with_scale(r)
        assert abs(val) <= 1e-8 * scale
