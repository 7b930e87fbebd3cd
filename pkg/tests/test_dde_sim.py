import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaylab import CapExceeded, InvalidInput, Quasipolynomial, solve_control_mid
from delaylab.dde_sim import (
    HistorySpec,
    SimulationResult,
    estimate_decay_rate,
    simulate,
)


def _open_oscillator():
    return Quasipolynomial(a=(1.0, 0.0), b=(0.0,), tau=1.0)


def _designed_oscillator():
    return solve_control_mid(a=[1.0, 0.0], m=1, tau=1.0, s0=-1.0).qp


def _designed_pendulum():
    # tau at the smaller admissibility root of (s0^2 + a0) tau^2 + 4 s0 tau + 2
    # for s0 = -5, a0 = -5.886
    q = 19.114
    tau = (20.0 - math.sqrt(400.0 - 8.0 * q)) / (2.0 * q)
    return solve_control_mid(a=[-5.886, 0.0], m=1, tau=tau, s0=-5.0).qp


# ---------------------------------------------------------------- histories


def test_history_validation():
    with pytest.raises(InvalidInput):
        HistorySpec(kind="spline", data=(1.0,))
    with pytest.raises(InvalidInput):
        HistorySpec(kind="constant", data=(1.0, 2.0))
    with pytest.raises(InvalidInput):
        HistorySpec(kind="sampled", data=(1.0, 2.0, 3.0))
    with pytest.raises(InvalidInput) as e:
        HistorySpec(kind="polynomial", data=(1.0, float("nan")))
    assert e.value.code == "non_finite_input"


def test_history_round_trip():
    h = HistorySpec(kind="polynomial", data=(0.1, 0.05))
    assert HistorySpec.from_dict(h.to_dict()) == h
    with pytest.raises(InvalidInput):
        HistorySpec.from_dict({"data": [1.0]})


# --------------------------------------------------------------- validation


def test_neutral_rejected():
    neutral = Quasipolynomial(a=(0.0,), b=(1.0, 0.5), tau=1.0)
    with pytest.raises(InvalidInput) as e:
        simulate(neutral, HistorySpec("constant", (1.0,)), T=1.0, h=0.01)
    assert e.value.code == "neutral_unsupported"
    assert "restricted to retarded type" in str(e.value)


def test_step_and_horizon_validation():
    qp = _open_oscillator()
    hist = HistorySpec("constant", (1.0,))
    with pytest.raises(InvalidInput) as e:
        simulate(qp, hist, T=1.0, h=0.2)
    assert e.value.code == "invalid_step"
    with pytest.raises(InvalidInput):
        simulate(qp, hist, T=0.0, h=0.01)
    with pytest.raises(InvalidInput):
        simulate(qp, hist, T=float("inf"), h=0.01)


def test_step_count_cap():
    with pytest.raises(CapExceeded):
        simulate(
            _open_oscillator(), HistorySpec("constant", (1.0,)), T=2.0e6, h=0.1
        )


def test_sampled_history_rate_check():
    qp = _open_oscillator()
    hist = HistorySpec("sampled", tuple(np.ones(5)))
    with pytest.raises(InvalidInput) as e:
        simulate(qp, hist, T=1.0, h=0.01)
    assert "spacing" in str(e.value)


# ------------------------------------------------------------- trajectories


def test_open_loop_oscillator_matches_cosine():
    res = simulate(_open_oscillator(), HistorySpec("constant", (1.0,)), T=20.0, h=1e-2)
    assert res.t[0] == 0.0 and res.t[-1] == pytest.approx(20.0, abs=0)
    assert np.max(np.abs(res.y - np.cos(res.t))) <= 1e-4
    # final state carries (y, y') at T
    assert res.final_state[0] == pytest.approx(math.cos(20.0), abs=1e-6)
    assert res.final_state[1] == pytest.approx(-math.sin(20.0), abs=1e-6)


def test_polynomial_history_sets_initial_derivatives():
    hist = HistorySpec("polynomial", (0.1, 0.05))
    res = simulate(_open_oscillator(), hist, T=5.0, h=1e-2)
    exact = 0.1 * np.cos(res.t) + 0.05 * np.sin(res.t)
    assert np.max(np.abs(res.y - exact)) <= 1e-6


def test_piecewise_closed_form_through_one_delay():
    # y'(t) = -y(t-1), y = 1 on [-1, 0]: y(t) = 1 - t on [0, 1] and
    # 1 - t + (t-1)^2/2 on [1, 2]; RK4 reproduces both polynomials exactly
    qp = Quasipolynomial(a=(0.0,), b=(1.0,), tau=1.0)
    res = simulate(qp, HistorySpec("constant", (1.0,)), T=2.0, h=0.1)
    i1 = np.argmin(np.abs(res.t - 1.0))
    assert res.y[i1] == pytest.approx(0.0, abs=1e-12)
    assert res.y[-1] == pytest.approx(-0.5, abs=1e-12)


def test_sampled_history_matches_constant():
    qp = Quasipolynomial(a=(0.0,), b=(1.0,), tau=1.0)
    ref = simulate(qp, HistorySpec("constant", (1.0,)), T=2.0, h=0.1)
    sam = simulate(qp, HistorySpec("sampled", tuple(np.ones(101))), T=2.0, h=0.1)
    assert np.max(np.abs(ref.y - sam.y)) <= 1e-10


def test_sampled_history_matches_polynomial():
    grid = np.linspace(-1.0, 0.0, 101)
    sampled = HistorySpec("sampled", tuple(0.1 + 0.05 * grid))
    poly = HistorySpec("polynomial", (0.1, 0.05))
    r1 = simulate(_open_oscillator(), sampled, T=3.0, h=1e-2)
    r2 = simulate(_open_oscillator(), poly, T=3.0, h=1e-2)
    assert np.max(np.abs(r1.y - r2.y)) <= 1e-8


def test_designed_oscillator_decays():
    res = simulate(
        _designed_oscillator(), HistorySpec("constant", (0.1,)), T=30.0, h=1e-2
    )
    assert abs(res.y[-1]) <= 1e-9


def test_linearity_in_the_history():
    # doubling the history doubles the trajectory bit-for-bit: every
    # operation in the integrator is linear in the state and scaling by a
    # power of two commutes exactly with rounding
    qp = _designed_oscillator()
    r1 = simulate(qp, HistorySpec("constant", (0.1,)), T=10.0, h=0.05)
    r2 = simulate(qp, HistorySpec("constant", (0.2,)), T=10.0, h=0.05)
    assert np.array_equal(r2.y, 2.0 * r1.y)


@settings(max_examples=30, deadline=None)
@given(
    a=st.lists(st.floats(-2, 2), min_size=1, max_size=3),
    b0=st.floats(-2, 2),
    c=st.floats(0.1, 1.0),
)
def test_linearity_property(a, b0, c):
    qp = Quasipolynomial(a=tuple(a), b=(b0,), tau=1.0)
    r1 = simulate(qp, HistorySpec("constant", (c,)), T=2.0, h=0.1)
    r2 = simulate(qp, HistorySpec("constant", (2.0 * c,)), T=2.0, h=0.1)
    assert np.array_equal(r2.y, 2.0 * r1.y)


def test_step_halving_convergence_order():
    qp = _designed_oscillator()
    hist = HistorySpec("constant", (0.1,))
    finals = [
        simulate(qp, hist, T=5.0, h=h).y[-1] for h in (0.1, 0.05, 0.025)
    ]
    e1 = abs(finals[0] - finals[1])
    e2 = abs(finals[1] - finals[2])
    order = math.log2(e1 / e2)
    assert 3.5 <= order <= 5.0


# ------------------------------------------------------------- decay rates


def test_pure_exponential_slope():
    t = np.arange(0.0, 10.0, 0.01)
    y = np.exp(-2.0 * t)
    res = SimulationResult(t=t, y=y, final_state=(float(y[-1]),))
    assert estimate_decay_rate(res, (1.0, 9.0)) == pytest.approx(-2.0, abs=1e-3)


def test_designed_oscillator_decay_rate():
    res = simulate(
        _designed_oscillator(), HistorySpec("constant", (0.1,)), T=30.0, h=1e-2
    )
    rate = estimate_decay_rate(res, (10.0, 25.0))
    assert rate == pytest.approx(-0.9911747149825244, abs=1e-6)
    assert abs(rate - (-1.0)) <= 0.1


def test_designed_pendulum_decay_rate():
    qp = _designed_pendulum()
    assert np.allclose(qp.b, [11.52990345, 4.48976123], atol=1e-4)
    res = simulate(qp, HistorySpec("constant", (0.1,)), T=4.0, h=1e-3)
    rate = estimate_decay_rate(res, (1.0, 2.5))
    assert rate == pytest.approx(-4.8444933773588605, abs=1e-6)
    assert abs(rate - (-5.0)) <= 0.5


def test_open_loop_pendulum_growth_rate():
    qp = Quasipolynomial(a=(-5.886, 0.0), b=(0.0,), tau=1.0)
    res = simulate(qp, HistorySpec("constant", (1e-6,)), T=3.0, h=1e-3)
    rate = estimate_decay_rate(res, (1.0, 3.0))
    assert abs(rate - 2.426) <= 0.05 * 2.426
    assert rate == pytest.approx(2.4367378081024036, abs=1e-6)


def test_oscillatory_peak_envelope():
    # lightly damped open loop: |y| has many peaks, the envelope decays at
    # the real part of the root pair of s^2 + 0.2 s + 1
    qp = Quasipolynomial(a=(1.0, 0.2), b=(0.0,), tau=1.0)
    res = simulate(qp, HistorySpec("constant", (1.0,)), T=40.0, h=1e-2)
    rate = estimate_decay_rate(res, (5.0, 35.0))
    assert rate == pytest.approx(-0.1, abs=0.01)


def test_decay_window_validation():
    t = np.arange(0.0, 10.0, 0.01)
    res = SimulationResult(t=t, y=np.exp(-t), final_state=(0.0,))
    for window in ((0.0, 5.0), (3.0, 2.0), (1.0, float("nan"))):
        with pytest.raises(InvalidInput) as e:
            estimate_decay_rate(res, window)
        assert e.value.code == "validation_error"


def test_decay_signal_too_short():
    t = np.arange(0.0, 10.0, 0.01)
    res = SimulationResult(t=t, y=np.exp(-t), final_state=(0.0,))
    with pytest.raises(InvalidInput) as e:
        estimate_decay_rate(res, (1.0, 1.05))
    assert e.value.code == "signal_too_short"
    # two |y| peaks and a non-monotone window: not enough structure
    wavy = SimulationResult(t=t, y=np.cos(t), final_state=(0.0,))
    with pytest.raises(InvalidInput) as e:
        estimate_decay_rate(wavy, (1.0, 7.0))
    assert e.value.code == "signal_too_short"


def test_zero_signal_rejected():
    t = np.arange(0.0, 10.0, 0.01)
    res = SimulationResult(t=t, y=np.zeros_like(t), final_state=(0.0,))
    with pytest.raises(InvalidInput) as e:
        estimate_decay_rate(res, (1.0, 9.0))
    assert e.value.code == "signal_too_short"


# ------------------------------------------------------------ serialization


def test_result_serialization():
    res = simulate(_open_oscillator(), HistorySpec("constant", (1.0,)), T=1.0, h=0.05)
    data = res.to_dict()
    assert len(data["t"]) == len(data["y"]) == 21
    assert data["decay_estimate"] is None
    assert len(data["final_state"]) == 2
    csv = res.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "t,y"
    parsed = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.allclose(parsed[:, 0], res.t)
    assert np.allclose(parsed[:, 1], res.y)
