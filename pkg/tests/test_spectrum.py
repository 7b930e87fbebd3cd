import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaylab import (
    DelayLabError,
    InvalidInput,
    NumericFailure,
    Quasipolynomial,
    SpectralWindow,
    check_dominance,
    compute_spectrum,
    count_roots,
    imaginary_bound,
    sensitivity_sweep,
    solve_control_mid,
)


def _designed_oscillator():
    # s^2 + 1 with delayed feedback placed for a triple root at -1
    return solve_control_mid(a=[1.0, 0.0], m=1, tau=1.0, s0=-1.0).qp


def _scalar_lambert():
    # s - 1 + e^{-s}: double root at the origin
    return Quasipolynomial(a=(-1.0,), b=(1.0,), tau=1.0)


# ---------------------------------------------------------------- windows


def test_window_validation():
    with pytest.raises(InvalidInput) as e:
        SpectralWindow(1.0, -1.0, 2.0)
    assert e.value.code == "invalid_window"
    with pytest.raises(InvalidInput):
        SpectralWindow(-1.0, 1.0, 0.0)
    with pytest.raises(InvalidInput):
        SpectralWindow(float("nan"), 1.0, 1.0)
    with pytest.raises(InvalidInput):
        SpectralWindow.from_dict({"x_min": -1.0})


def test_window_round_trip():
    w = SpectralWindow(-2.0, 0.5, 3.0)
    assert SpectralWindow.from_dict(json.loads(json.dumps(w.to_dict()))) == w


# ---------------------------------------------------------------- counting


def test_count_roots_polynomial_triple():
    # (s - 0.3)^3, no delayed term
    qp = Quasipolynomial(a=(-0.027, 0.27, -0.9), b=(0.0,), tau=1.0)
    assert count_roots(qp, SpectralWindow(-1.0, 1.0, 1.0)) == 3
    assert count_roots(qp, SpectralWindow(0.5, 1.0, 1.0)) == 0


def test_count_roots_nudges_past_boundary_root():
    # +-i sit exactly on the right edge; the outward nudge must pick them up
    qp = Quasipolynomial(a=(1.0, 0.0), b=(0.0,), tau=1.0)
    assert count_roots(qp, SpectralWindow(-1.0, 0.0, 2.0)) == 2


def test_count_roots_rejects_bad_window():
    qp = _scalar_lambert()
    with pytest.raises(InvalidInput):
        count_roots(qp, {"x_min": 0.0})


# ---------------------------------------------------------------- spectra


def test_spectrum_pure_polynomial_pair():
    qp = Quasipolynomial(a=(1.0, 0.0), b=(0.0,), tau=1.0)
    spec = compute_spectrum(qp, SpectralWindow(-1.0, 1.0, 2.0), grid=(128, 128))
    assert spec.certified
    assert spec.total_count == 2
    assert len(spec.roots) == 2
    found = sorted((r.re, r.im) for r in spec.roots)
    assert found[0] == pytest.approx((0.0, -1.0), abs=1e-9)
    assert found[1] == pytest.approx((0.0, 1.0), abs=1e-9)
    assert all(r.multiplicity == 1 and r.converged for r in spec.roots)
    assert spec.abscissa == pytest.approx(0.0, abs=1e-9)


def test_spectrum_designed_oscillator():
    qp = _designed_oscillator()
    spec = compute_spectrum(qp, SpectralWindow(-5.0, 1.0, 20.0))
    assert spec.certified
    assert spec.total_count == 5
    assert spec.abscissa == pytest.approx(-1.0, abs=1e-6)
    # the placed triple root is dominant: nothing to its right
    assert all(r.re <= -1.0 + 1e-3 for r in spec.roots)
    triple = max(spec.roots, key=lambda r: r.re)
    assert triple.multiplicity == 3
    assert (triple.re, triple.im) == pytest.approx((-1.0, 0.0), abs=1e-6)
    assert triple.converged
    # first chain pair
    pair = sorted(spec.roots, key=lambda r: r.im)
    assert (pair[0].re, pair[0].im) == pytest.approx((-4.838602, -8.366816), abs=1e-5)
    assert (pair[-1].re, pair[-1].im) == pytest.approx((-4.838602, 8.366816), abs=1e-5)


def test_spectrum_double_root_at_origin():
    qp = _scalar_lambert()
    spec = compute_spectrum(qp, SpectralWindow(-1.0, 1.0, 5.0), grid=(200, 200))
    assert spec.certified
    assert spec.total_count == 2
    assert len(spec.roots) == 1
    root = spec.roots[0]
    assert root.multiplicity == 2
    assert (root.re, root.im) == pytest.approx((0.0, 0.0), abs=1e-6)
    # nothing strictly to the right of the double root
    assert count_roots(qp, SpectralWindow(1e-3, 1.0, 5.0)) == 0


def test_spectrum_serialization_and_csv():
    qp = _designed_oscillator()
    spec = compute_spectrum(qp, SpectralWindow(-2.0, 0.0, 2.0), grid=(100, 100))
    data = json.loads(json.dumps(spec.to_dict()))
    assert data["total_count"] == 3
    assert data["window"]["x_min"] == -2.0
    csv = spec.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "re,im,multiplicity,residual"
    assert len(lines) == 1 + len(spec.roots)
    cells = lines[1].split(",")
    assert len(cells) == 4
    assert int(cells[2]) == 3


def test_spectrum_empty_window():
    qp = _designed_oscillator()
    spec = compute_spectrum(qp, SpectralWindow(0.5, 1.5, 1.0), grid=(64, 64))
    assert spec.certified
    assert spec.total_count == 0
    assert spec.roots == ()
    assert spec.abscissa is None


def test_spectrum_rejects_tiny_grid():
    qp = _scalar_lambert()
    with pytest.raises(InvalidInput) as e:
        compute_spectrum(qp, SpectralWindow(-1.0, 1.0, 1.0), grid=(4, 4))
    assert e.value.code == "invalid_grid"


# ---------------------------------------------------------------- envelope


def test_imaginary_bound_closed_form():
    qp = Quasipolynomial(a=(1.0, 0.0), b=(-2.0 / math.e, 0.0), tau=1.0)
    # g(r) = r^2 - 1 - e^{0.999} * (2/e)  =>  r* = sqrt(1 + 2 e^{-0.001})
    expected = math.sqrt(1.0 + 2.0 * math.exp(-0.001))
    assert imaginary_bound(qp, -0.999) == pytest.approx(expected, rel=1e-9)


def test_imaginary_bound_contains_all_window_roots():
    qp = _designed_oscillator()
    bound = imaginary_bound(qp, -5.0)
    spec = compute_spectrum(qp, SpectralWindow(-5.0, 1.0, 20.0))
    for r in spec.roots:
        assert math.hypot(r.re, r.im) <= bound + 1e-9


def test_imaginary_bound_neutral_refusal():
    qp = Quasipolynomial(a=(1.0,), b=(0.0, 2.0), tau=1.0)
    assert qp.classify() == "neutral"
    with pytest.raises(NumericFailure) as e:
        imaginary_bound(qp, 0.0)
    assert e.value.code == "neutral_chain_unbounded"
    # right of the chain abscissa the envelope closes again
    assert imaginary_bound(qp, math.log(2.0) + 0.011) > 0


# ---------------------------------------------------------------- dominance


def test_dominance_oscillator():
    qp = _designed_oscillator()
    cert = check_dominance(qp, -1.0)
    assert cert.dominant
    assert cert.right_count == 0
    assert cert.cluster_count == 3
    assert cert.right_window.x_min == pytest.approx(-1.0 + 1e-3)
    assert cert.cluster_window.x_min == pytest.approx(-1.0 - 1e-3)
    data = json.loads(json.dumps(cert.to_dict()))
    assert data["dominant"] is True


def test_dominance_double_root():
    cert = check_dominance(_scalar_lambert(), 0.0)
    assert cert.dominant
    assert cert.right_count == 0
    assert cert.cluster_count == 2


def test_dominance_detects_unstable_root():
    # s - 1 (plus a vanishing delayed term): root at +1, right of s0 = 0
    qp = Quasipolynomial(a=(-1.0,), b=(0.0,), tau=1.0)
    cert = check_dominance(qp, 0.0)
    assert not cert.dominant
    assert cert.right_count == 1


def test_dominance_rejects_bad_epsilon():
    with pytest.raises(DelayLabError):
        check_dominance(_scalar_lambert(), 0.0, epsilon=0.0)


# ---------------------------------------------------------------- sweeps


def test_sensitivity_sweep_oscillator():
    qp = _designed_oscillator()
    trace = sensitivity_sweep(qp, s0=-1.0, tau_span=0.2, steps=41)
    assert trace.branches.shape == (41, 3)
    assert trace.converged.shape == (41, 3)
    assert trace.taus[0] == pytest.approx(0.8)
    assert trace.taus[-1] == pytest.approx(1.2)

    # at the design delay all three branches collapse onto s0
    i_star = int(np.argmin(np.abs(trace.taus - 1.0)))
    assert trace.taus[i_star] == pytest.approx(1.0)
    assert np.all(np.abs(trace.branches[i_star] - (-1.0)) < 1e-4)
    assert trace.converged[i_star].all()

    # real coefficients: every step's branch set is closed under conjugation
    # (tolerance sits above the multiple-root rounding plateau ~1e-5 that
    # limits branch positions near the collapse)
    for i in range(len(trace.taus)):
        row = trace.branches[i]
        for z in row:
            assert np.min(np.abs(np.conj(z) - row)) < 1e-4


def test_sensitivity_branches_are_true_roots():
    qp = _designed_oscillator()
    trace = sensitivity_sweep(qp, s0=-1.0, tau_span=0.2, steps=21)
    window = SpectralWindow(-3.0, 1.0, 3.0)
    for i in [0, 5, 10, 15, 20]:
        qp_t = Quasipolynomial(a=qp.a, b=qp.b, tau=float(trace.taus[i]))
        spec = compute_spectrum(qp_t, window, grid=(200, 200))
        spec_roots = np.array([complex(r.re, r.im) for r in spec.roots])
        row = trace.branches[i]
        # collapsed branches sit on the multiple-root rounding plateau, so the
        # match is correspondingly coarser there
        spread = max(abs(p - q) for p in row for q in row)
        tol = 1e-6 if spread > 1e-3 else 1e-4
        for j in range(row.shape[0]):
            z = row[j]
            if not trace.converged[i, j]:
                continue
            if not (-2.9 <= z.real <= 0.9 and abs(z.imag) <= 2.9):
                continue  # wandered outside the cross-check window
            assert np.min(np.abs(spec_roots - z)) < tol


def test_sensitivity_csv_and_dict():
    qp = _designed_oscillator()
    trace = sensitivity_sweep(qp, s0=-1.0, tau_span=0.1, steps=5)
    csv = trace.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "tau,branch_index,re,im,converged"
    assert len(lines) == 1 + 5 * 3
    first = lines[1].split(",")
    assert len(first) == 5
    assert first[4] in {"0", "1"}
    data = json.loads(json.dumps(trace.to_dict()))
    assert len(data["taus"]) == 5
    assert len(data["re"][0]) == 3


def test_sensitivity_rejects_bad_span():
    qp = _designed_oscillator()
    with pytest.raises(DelayLabError):
        sensitivity_sweep(qp, s0=-1.0, tau_span=1.5)
    with pytest.raises(DelayLabError):
        sensitivity_sweep(qp, s0=-1.0, steps=1)


# ---------------------------------------------------------------- properties


@st.composite
def retarded_instances(draw):
    n = draw(st.integers(min_value=1, max_value=3))
    m = draw(st.integers(min_value=0, max_value=n - 1))
    coeff = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
    a = tuple(draw(coeff) for _ in range(n))
    b = tuple(draw(coeff) for _ in range(m + 1))
    tau = draw(st.floats(min_value=0.5, max_value=2.0, allow_nan=False))
    return Quasipolynomial(a=a, b=b, tau=tau)


@settings(max_examples=100, deadline=None)
@given(retarded_instances())
def test_random_retarded_spectra_certify(qp):
    window = SpectralWindow(-3.0, 1.0, 4.0)
    spec = compute_spectrum(qp, window, grid=(128, 128))
    assert spec.certified
    assert spec.total_count == sum(r.multiplicity for r in spec.roots)
    for r in spec.roots:
        if r.multiplicity == 1:
            assert r.converged
        assert window.x_min - 1e-9 <= r.re <= window.x_max + 1e-9
        assert abs(r.im) <= window.y_max + 1e-9
        # real coefficients force conjugate-symmetric spectra
        if abs(r.im) > 1e-5:
            partner = min(
                spec.roots, key=lambda q: abs(complex(q.re, q.im) - complex(r.re, -r.im))
            )
            assert abs(complex(partner.re, partner.im) - complex(r.re, -r.im)) < 1e-5
            assert partner.multiplicity == r.multiplicity
    if spec.roots:
        assert spec.abscissa == pytest.approx(max(r.re for r in spec.roots))
    else:
        assert spec.abscissa is None
