import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_genlaguerre, factorial, iv
from scipy.stats import poisson

from dpancs import (
    DivergenceError, Family, NoClosedFormError, NonlinearityFn, StateSpec, build_state,
    choose_truncation, normalization_closed_form, normalization_series,
)
from dpancs.states import f_d, g_commutator


def pacs_oracle(alpha, m, N):
    """Agarwal-Tara state from its textbook Laguerre normalization."""
    x = abs(alpha) ** 2
    c = np.zeros(N + 1, dtype=complex)
    n = np.arange(N - m + 1)
    c[n + m] = (np.exp(-x / 2) * alpha ** n * np.sqrt(factorial(n + m)) / factorial(n)
                / np.sqrt(factorial(m) * eval_genlaguerre(m, 0, -x)))
    return c


def test_truncation_examples():
    assert choose_truncation(StateSpec(0, 3)) == 13
    N = choose_truncation(StateSpec(2, 0), 1e-12)
    assert poisson.sf(N, 4.0) < 1e-12
    assert poisson.sf(N - 1, 4.0) >= 1e-12 or N == 10
    spec = StateSpec(5, 2, NonlinearityFn.sqrt())
    N = choose_truncation(spec, 1e-10)
    ref = build_state(spec, N=400).coefficients
    assert np.sum(np.abs(ref[N + 1:]) ** 2) < 1e-10


@pytest.mark.parametrize("m", [0, 1, 2, 5])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 1 + 1j])
def test_pacs_reduction(alpha, m):
    s = build_state(StateSpec(alpha, m, NonlinearityFn.unity()))
    np.testing.assert_allclose(s.coefficients, pacs_oracle(alpha, m, s.N), atol=1e-12)
    p = build_state(StateSpec(alpha, m, family=Family.PACS))
    np.testing.assert_allclose(p.coefficients, s.coefficients, atol=1e-15)


def test_sqrt_m0_is_bessel_state():
    s = build_state(StateSpec(1.5, 0, NonlinearityFn.sqrt()))
    n = np.arange(s.N + 1)
    c = 1.5 ** n / factorial(n) / np.sqrt(iv(0, 3.0))
    np.testing.assert_allclose(s.coefficients, c, atol=1e-13)


@pytest.mark.parametrize("f", [NonlinearityFn.pt(3), NonlinearityFn.sqrt(), NonlinearityFn.inv_sqrt()])
def test_m0_reduces_to_nlcs(f):
    alpha = 0.7
    a = build_state(StateSpec(alpha, 0, f))
    b = build_state(StateSpec(alpha, 0, f, Family.NLCS))
    c = build_state(StateSpec(alpha, 0, f, Family.NEGATIVE_M), N=a.N)
    n = np.arange(a.N + 1)
    oracle = alpha ** n / np.sqrt(factorial(n)) / np.exp(f.log_f2_factorial(n) / 2)
    oracle /= np.linalg.norm(oracle)
    for s in (a, b, c):
        np.testing.assert_allclose(s.coefficients, oracle, atol=1e-12)


def test_number_state_limits():
    f = NonlinearityFn.pt(3)
    s = build_state(StateSpec(0, 2, f))
    assert s.coefficients[2] == 1 and np.count_nonzero(s.coefficients) == 1
    v = build_state(StateSpec(0, -2, f, Family.NEGATIVE_M))
    assert v.coefficients[0] == 1 and np.count_nonzero(v.coefficients) == 1


def test_support_and_norm(worked_f):
    for m in range(4):
        s = build_state(StateSpec(1.3, m, worked_f))
        assert np.all(s.coefficients[:m] == 0)
        assert 1 - s.tail_bound - 1e-15 <= s.norm2 <= 1 + 1e-14
    neg = build_state(StateSpec(1.3, -2, worked_f, Family.NEGATIVE_M))
    assert neg.coefficients[0] != 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(-np.pi, np.pi), st.integers(0, 4))
def test_phase_covariance(r, theta, m):
    f = NonlinearityFn.sqrt()
    a = build_state(StateSpec(r, m, f), N=40).coefficients
    b = build_state(StateSpec(r * np.exp(1j * theta), m, f), N=40).coefficients
    n = np.arange(41)
    phase = np.where(n >= m, np.exp(1j * (n - m) * theta), 1)
    np.testing.assert_allclose(b, a * phase, atol=1e-13)


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 4.0, 25.0])
@pytest.mark.parametrize("m", [0, 1, 3])
def test_closed_form_normalization(worked_f, x, m):
    spec = StateSpec(np.sqrt(x), m, worked_f)
    assert normalization_closed_form(spec) == pytest.approx(normalization_series(spec), rel=1e-10)


def test_closed_form_sqrt_x1_m1():
    s2 = sum(factorial(n + 1) ** 2 / factorial(n) ** 4 for n in range(40))
    expected = np.sqrt(iv(0, 2.0)) / np.sqrt(s2)
    assert normalization_closed_form(StateSpec(1, 1, NonlinearityFn.sqrt())) == pytest.approx(expected, rel=1e-12)


def test_no_closed_form():
    with pytest.raises(NoClosedFormError):
        normalization_closed_form(StateSpec(0.5, 1, NonlinearityFn.inv_sqrt()))


def test_divergence():
    with pytest.raises(DivergenceError):
        build_state(StateSpec(1.2, 1, NonlinearityFn.inv_sqrt()))
    build_state(StateSpec(0.9, 1, NonlinearityFn.inv_sqrt()))


@pytest.mark.parametrize("n, f, m, expected", [
    (4, NonlinearityFn.unity(), 2, 0.6),
    (3, NonlinearityFn.sqrt(), 1, 1.125),
])
def test_f_d_examples(n, f, m, expected):
    assert f_d(n, f, m) == pytest.approx(expected, rel=1e-15)


def test_f_d_m0_and_boundary():
    f = NonlinearityFn.pt(3)
    n = np.arange(10)
    np.testing.assert_allclose(f_d(n, f, 0), f(n + 1), rtol=1e-15)
    assert f_d(1, f, 2) == 0


@pytest.mark.parametrize("n, f, m, expected", [
    (2, NonlinearityFn.unity(), 1, 1.0),
    (2, NonlinearityFn.pt(3), 2, 14.0),
    (5, NonlinearityFn.sqrt(), 0, 0.0),
])
def test_g_commutator(n, f, m, expected):
    assert g_commutator(n, f, m) == pytest.approx(expected)


def test_csv_round_trip_digits():
    s = build_state(StateSpec(0.8, 1, NonlinearityFn.pt(3)))
    buf = io.StringIO()
    s.to_csv(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "n,re,im"
    vals = np.array([complex(float(r.split(",")[1]), float(r.split(",")[2])) for r in rows[1:]])
    np.testing.assert_array_equal(vals, s.coefficients)
