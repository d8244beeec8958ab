import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpancs import (
    FockVector, NonlinearityFn, StateSpec, build_state, criteria, moments_oracle, moments_series, sweep,
)
from dpancs.nonclassicality import SWEEP_HEADER, MomentSet, write_sweep_csv


def oracle_state(spec):
    return build_state(spec, tol=1e-24)


def test_number_state_moments():
    ms = moments_series(StateSpec(0, 3))
    assert (ms.a, ms.n, ms.n_sq, ms.ad2a2) == (0, 3, 9, 6)


def test_coherent_state_moments():
    ms = moments_series(StateSpec(2, 0))
    assert ms.a == pytest.approx(2, rel=1e-13)
    assert ms.n == pytest.approx(4, rel=1e-13)
    assert ms.ad2a2 == pytest.approx(16, rel=1e-13)
    r = criteria(ms)
    assert r.Q == pytest.approx(0, abs=1e-12) and r.g2 == pytest.approx(1, rel=1e-12)
    assert r.sx == pytest.approx(0, abs=1e-12) and r.sp == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("k", [0, 2])
def test_fock_oracle(k):
    c = np.zeros(6)
    c[k] = 1
    ms = moments_oracle(FockVector(c))
    np.testing.assert_allclose([ms.n, ms.ad2a2, ms.n_sq], [k, k * (k - 1), k * k], rtol=1e-15, atol=0)


@pytest.mark.parametrize("m", [1, 2, 4])
def test_number_state_criteria(m):
    r = criteria(moments_series(StateSpec(0, m)))
    assert r.Q == -1 and r.g2 == 1 - 1 / m
    assert r.sx == pytest.approx(2 * m) and r.sp == pytest.approx(2 * m)


def test_vacuum_flags():
    c = np.zeros(4)
    c[0] = 1
    r = criteria(moments_oracle(FockVector(c)))
    assert r.Q is None and r.g2 is None and "Q undefined" in r.flags


@pytest.mark.parametrize("spec", [
    StateSpec(1, 1, NonlinearityFn.sqrt()),
    StateSpec(1.5, 2, NonlinearityFn.pt(3)),
    StateSpec(0.7 + 0.9j, 3, NonlinearityFn.unity()),
    StateSpec(4.5, 5, NonlinearityFn.pt(3)),
])
def test_cross_path(spec):
    a, b = moments_series(spec), moments_oracle(oracle_state(spec))
    for name in ("a", "a2", "a4", "n", "ad2a2", "n_sq"):
        va, vb = getattr(a, name), getattr(b, name)
        assert abs(va - vb) <= 1e-10 * max(1, abs(vb)), name


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5), st.floats(-np.pi, np.pi), st.integers(0, 5),
       st.sampled_from(["unity", "pt", "sqrtn"]))
def test_moment_invariants(r, theta, m, kind):
    f = {"unity": NonlinearityFn.unity(), "pt": NonlinearityFn.pt(3), "sqrtn": NonlinearityFn.sqrt()}[kind]
    ms = moments_series(StateSpec(r * np.exp(1j * theta), m, f))
    assert ms.n_sq >= ms.n ** 2 * (1 - 1e-12)
    assert ms.ad2a2 == pytest.approx(ms.n_sq - ms.n, rel=1e-10, abs=1e-12)
    rep = criteria(ms)
    assert (1 + rep.sx) * (1 + rep.sp) >= 1 - 1e-10
    assert rep.Q == pytest.approx(ms.n * (rep.g2 - 1), rel=1e-10, abs=1e-10)
    assert min(rep.Q, rep.sx, rep.sp, rep.SX, rep.SP) >= -1 - 1e-12 and rep.g2 >= 0


def test_realness_for_real_alpha():
    ms = moments_series(StateSpec(1.7, 2, NonlinearityFn.pt(3)))
    assert isinstance(ms.a, complex) and ms.a.imag == 0 and ms.a2.imag == 0


def test_complex_moments_give_real_criteria():
    ms = MomentSet(a=0.3 + 1j, a2=0.5j - 0.2, a4=0.1 - 0.7j, n=2.0, ad2a2=3.0, n_sq=5.0)
    rep = criteria(ms)
    assert all(isinstance(v, float) for v in (rep.sx, rep.sp, rep.SX, rep.SP))


def test_pt_q_negative_and_small_alpha_antibunching():
    f = NonlinearityFn.pt(3)
    rows = sweep(np.linspace(0.1, 5, 25), [2, 5], f)
    assert all(r.Q < 0 for r in rows)
    small = sweep(np.linspace(0.1, 1, 10), [1, 2, 3], f)
    assert all(r.g2 < 1 for r in small if r.alpha <= 0.5)


def test_q_deepens_with_m():
    f = NonlinearityFn.pt(3)
    for a in np.linspace(0.3, 2, 12):
        q2 = criteria(moments_series(StateSpec(a, 2, f))).Q
        q5 = criteria(moments_series(StateSpec(a, 5, f))).Q
        assert q5 < q2


@pytest.mark.parametrize("m", [2, 5])
def test_small_alpha_expansion(m):
    # |m> plus a small |m+1> admixture: Q + 1 ~ x (m+1)(m+1+nu) / ((1+nu)^2 m)
    nu, x = 3.0, 1e-6
    q = criteria(moments_series(StateSpec(np.sqrt(x), m, NonlinearityFn.pt(nu)))).Q
    assert (q + 1) / x == pytest.approx((m + 1) * (m + 1 + nu) / ((1 + nu) ** 2 * m), rel=1e-4)


def test_alpha_zero_row():
    (r,) = sweep([0.0], [2], NonlinearityFn.pt(3))
    assert r.Q == -1


def test_sweep_errors_are_rows():
    rows = sweep([0.5, 2.0], [1], NonlinearityFn.inv_sqrt())
    assert rows[0].status == "ok" and rows[1].status == "error:DivergenceError"


def test_sweep_parallel_matches_serial():
    f = NonlinearityFn.sqrt()
    a = sweep([0.3, 1.0, 2.0], [1, 2], f)
    b = sweep([0.3, 1.0, 2.0], [1, 2], f, workers=2)
    assert a == b


def test_sweep_csv():
    buf = io.StringIO()
    write_sweep_csv(sweep([1.0], [2], NonlinearityFn.unity()), buf)
    head, row = buf.getvalue().splitlines()
    assert head.split(",") == SWEEP_HEADER
    assert row.startswith("1,2,") and row.endswith(",ok")
