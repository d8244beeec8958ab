import mpmath as mp
import numpy as np
import pytest
from scipy.special import iv

from dpancs.errors import ConvergenceError
from dpancs.special import hyp_pfq, laguerre, log_bessel_i, log_hyp_pfq


@pytest.mark.parametrize("a, b, x", [
    ([2, 2], [1, 1, 1], 1.0),
    ([3, 7], [1, 4, 4], 12.5),
    ([1], [1], 3.0),
    ([2.5], [1.5, 3.0], 0.2),
])
def test_pfq_against_mpmath(a, b, x):
    assert hyp_pfq(a, b, x) == pytest.approx(float(mp.hyper(a, b, x)), rel=1e-13)


def test_pfq_large_argument_stays_finite():
    ref = float(mp.log(mp.hyper([2, 5], [1, 4, 4], 5e4)))
    assert log_hyp_pfq([2, 5], [1, 4, 4], 5e4) == pytest.approx(ref, rel=1e-12)


def test_pfq_divergent():
    with pytest.raises(ConvergenceError):
        log_hyp_pfq([1, 1], [1], 2.0)


@pytest.mark.parametrize("nu, z", [(0, 2.0), (3, 0.5), (3, 40.0), (0, 900.0)])
def test_bessel(nu, z):
    ref = float(mp.log(mp.besseli(nu, z)))
    assert log_bessel_i(nu, z) == pytest.approx(ref, rel=1e-13)


def test_laguerre():
    assert laguerre(1, -1.0) == 2.0
    assert laguerre(3, 0.5) == pytest.approx(float(mp.laguerre(3, 0, 0.5)), rel=1e-14)
