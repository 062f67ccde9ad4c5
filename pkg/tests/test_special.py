import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcfbench.special import exp_integral_E, exp_scaled_E, hurwitz_zeta

mp.mp.dps = 30


def _mp_e(z):
    # principal value on the negative real axis
    if z.imag == 0 and z.real < 0:
        return complex(-mp.ei(-z.real))
    return complex(mp.expint(1, z))


@pytest.mark.parametrize("s", [1.5, 2.0, 3.0, 4.5])
def test_hurwitz_matches_mpmath(s):
    a = np.array([0.3, 1.0, 2.5 - 3j, 0.1 + 40j, 7.0 - 0.5j, 0.05 + 0.2j])
    got = hurwitz_zeta(s, a)
    ref = np.array([complex(mp.zeta(s, complex(x))) for x in a])
    np.testing.assert_allclose(got, ref, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 30), st.floats(-200, 200), st.floats(1.2, 5.0))
def test_hurwitz_recurrence(re, im, s):
    # zeta(s, a) - zeta(s, a + 1) = a^(-s)
    a = complex(re, im)
    lhs = hurwitz_zeta(s, a) - hurwitz_zeta(s, a + 1)
    rhs = a ** (-s)
    assert abs(lhs - rhs) <= 1e-11 * max(abs(rhs), abs(hurwitz_zeta(s, a)))


def test_hurwitz_rejects_bad_input():
    with pytest.raises(ValueError):
        hurwitz_zeta(1.0, 1.0)


@pytest.mark.parametrize(
    "z", [0.01, 0.5, 3.0, 45.0, 1e-3j, 2j, -2j, 30j, 200j, 1 + 1j, -3 + 0.5j, 10 - 20j, -0.7, -12.0]
)
def test_e1_matches_mpmath(z):
    z = complex(z)
    assert abs(exp_integral_E(z) - _mp_e(z)) <= 1e-12 * abs(_mp_e(z))


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(-500, 500))
def test_e1_property_vs_mpmath(re, im):
    z = complex(re, im)
    if abs(z) < 1e-6 or (re < 0 and abs(im) < 1e-9 and im != 0):
        return
    ref = _mp_e(z)
    assert abs(exp_integral_E(z) - ref) <= 1e-11 * abs(ref) + 1e-300


def test_e1_conjugate_symmetry():
    z = np.array([1 + 2j, 0.3 - 5j, 20 + 0.1j])
    np.testing.assert_allclose(exp_integral_E(np.conj(z)), np.conj(exp_integral_E(z)), rtol=1e-14)


def test_e1_pole():
    with pytest.raises(ValueError):
        exp_integral_E(0.0)


@pytest.mark.parametrize("z", [3.0, 60.0, 800.0, -800.0, 1e4j, -1e4j, 300 - 200j, -40 + 60j, -20 + 60j, 0.5 + 0.5j])
def test_scaled_e1_matches_mpmath(z):
    z = complex(z)
    ref = complex(mp.exp(z) * mp.mpc(_mp_e(z))) if abs(z) < 700 else None
    if ref is None:
        if z.imag == 0 and z.real < 0:
            ref = complex(-mp.exp(z) * mp.ei(-z))
        else:
            ref = complex(mp.exp(z) * mp.expint(1, z))
    assert abs(exp_scaled_E(z) - ref) <= 1e-12 * abs(ref)
