import json

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bcfbench.bath import (
    INF,
    BathSpec,
    Filtered,
    MeierTannorSum,
    OhmicExp,
    bath_from_dict,
    bath_to_dict,
    counter_lambda,
    eta_hat,
    eta_time,
    eval_bcf_freq,
    eval_bcf_time,
    eval_J,
)
from bcfbench.errors import PoleError


def _mp_bcf(sd, beta, t):
    """Defining integral evaluated with mpmath."""
    J = lambda w: sd.alpha * mp.pi / 2 * sd.omega_c ** (1 - sd.s) * w**sd.s * mp.exp(-w / sd.omega_c)
    coth = (lambda w: 1) if beta == INF else (lambda w: mp.coth(beta * w / 2))
    pts = [0, 0.1, 1, 10, 40, 100, 400]
    re = mp.quad(lambda w: J(w) * coth(w) * mp.cos(w * t), pts)
    im = mp.quad(lambda w: J(w) * mp.sin(w * t), pts)
    return complex((re - 1j * im) / mp.pi)


@pytest.mark.parametrize("s,beta", [(1.0, 1.0), (1.0, INF), (0.5, 10.0), (2.0, 0.5), (0.5, INF)])
def test_bcf_closed_form_matches_integral(s, beta):
    sd = OhmicExp(s, 0.7, 4.0)
    bath = BathSpec(sd, beta)
    for t in (0.0, 0.3, 1.7):
        ref = _mp_bcf(sd, beta, t)
        assert abs(eval_bcf_time(bath, t) - ref) <= 1e-10 * abs(ref)


def test_bcf_quadrature_branch_for_meier_tannor():
    sd = MeierTannorSum(((0.3 - 0.1j, 1.0 + 2.0j), (0.2 + 0.1j, 3.0 - 0.5j)))
    bath = BathSpec(sd, 2.0)
    terms = [(mp.mpc(c), mp.mpc(mu)) for c, mu in sd.terms]
    J = lambda w: 4 * sum(mp.im(c * w / (mu**2 + w**2)) for c, mu in terms)
    for t in (0.0, 0.8):
        # J decays like 1/w^3, the oscillatory tail is summed by quadosc
        if t == 0:
            re = mp.quad(lambda w: J(w) * mp.coth(w), [0, 1, 10, mp.inf])
            im = 0
        else:
            re = mp.quadosc(lambda w: J(w) * mp.coth(w) * mp.cos(w * t), [0, mp.inf], omega=t)
            im = mp.quadosc(lambda w: J(w) * mp.sin(w * t), [0, mp.inf], omega=t)
        ref = complex((re - 1j * im) / mp.pi)
        assert abs(eval_bcf_time(bath, t) - ref) <= 1e-6 * abs(ref)


def test_bcf_hermiticity_in_time_and_real_at_zero(ohmic_bath):
    assert np.imag(eval_bcf_time(ohmic_bath, 0.0)) == 0.0
    assert np.real(eval_bcf_time(ohmic_bath, 0.0)) > 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 30.0), st.floats(0.2, 5.0), st.floats(0.3, 2.0))
def test_fdt_of_spectrum(w, beta, s):
    bath = BathSpec(OhmicExp(s, 0.5, 3.0), beta)
    Fp = eval_bcf_freq(bath, w)
    Fm = eval_bcf_freq(bath, -w)
    assert abs(Fm - np.exp(-beta * w) * Fp) <= 1e-12 * abs(Fp) + 1e-300


def test_zero_temperature_spectrum_is_one_sided():
    bath = BathSpec(OhmicExp(1.0, 0.1, 5.0))
    assert eval_bcf_freq(bath, -1.0) == 0.0
    assert eval_bcf_freq(bath, 2.0) == pytest.approx(2 * float(bath.sd.J(2.0)))


def test_spectrum_is_fourier_transform_of_bcf():
    # F[L](w) = int L(t) e^{i w t} dt = 2 Re int_0^inf L(t) e^{i w t} dt
    bath = BathSpec(OhmicExp(1.0, 0.5, 2.0), 1.0)
    t = np.linspace(0, 200, 400001)
    L = eval_bcf_time(bath, t)
    for w in (-1.0, 0.5, 2.0):
        num = 2 * np.real(integrate.simpson(L * np.exp(1j * w * t), x=t))
        assert num == pytest.approx(float(eval_bcf_freq(bath, w)), rel=2e-4)


def test_zero_frequency_limit_and_pole():
    ohm = BathSpec(OhmicExp(1.0, 0.2, 10.0), 1.0)
    assert eval_bcf_freq(ohm, 0.0) == pytest.approx(float(eval_bcf_freq(ohm, 1e-7)), rel=1e-6)
    sub = BathSpec(OhmicExp(0.5, 1.0, 10.0), 10.0)
    with pytest.raises(PoleError):
        eval_bcf_freq(sub, 0.0)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
def test_counter_lambda_matches_quadrature(s):
    sd = OhmicExp(s, 0.8, 3.0)
    f = lambda w: sd.alpha * mp.pi / 2 * sd.omega_c ** (1 - s) * w ** (s - 1) * mp.exp(-w / sd.omega_c)
    # w = u^2 removes the endpoint singularity for s < 1
    ref = float(mp.quad(lambda u: 2 * u * f(u * u), [0, 1, 3, 10, mp.inf]) / mp.pi)
    assert counter_lambda(sd) == pytest.approx(ref, rel=1e-10)


def test_counter_lambda_meier_tannor():
    sd = MeierTannorSum(((0.3 - 0.1j, 1.0 + 2.0j),))
    ref = integrate.quad(lambda w: float(sd.J(w)) / w, 0, np.inf, limit=400, epsabs=1e-14)[0] / np.pi
    assert counter_lambda(sd) == pytest.approx(ref, rel=1e-8)


def test_eta_time_matches_quadrature():
    sd = OhmicExp(1.0, 1.0, 5.0)
    for t in (0.0, 0.2, 1.0):
        ref = 2 / np.pi * integrate.quad(lambda w: float(sd.J(w)) / w * np.cos(w * t), 0, np.inf, limit=400)[0]
        assert eta_time(sd, t) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize(
    "s", [0.0, 0.3, 2.0, -1.5j, 0.7j, 1e-4j, 1.0 + 2.0j, 0.5 - 3.0j]
)
def test_eta_hat_analytic_vs_quadrature_ohmic(s):
    sd = OhmicExp(1.0, 1.0, 5.0)
    a = eta_hat(sd, s)
    q = eta_hat(sd, s, method="quad")
    assert abs(a - q) <= 1e-8 * max(abs(a), 1.0)


@pytest.mark.parametrize("s", [0.4, -2.0j, 0.25j, 1.5 + 0.5j])
def test_eta_hat_analytic_vs_quadrature_meier_tannor(s):
    sd = MeierTannorSum(((0.3 - 0.1j, 1.0 + 2.0j), (0.2 + 0.1j, 3.0 - 0.5j)))
    a = eta_hat(sd, s)
    q = eta_hat(sd, s, method="quad")
    assert abs(a - q) <= 1e-8 * max(abs(a), 1.0)


def test_eta_hat_is_laplace_transform_of_eta():
    sd = OhmicExp(1.0, 1.0, 5.0)
    for s in (0.5, 2.0):
        ref = integrate.quad(lambda t: eta_time(sd, t) * np.exp(-s * t), 0, np.inf, limit=400)[0]
        assert eta_hat(sd, s).real == pytest.approx(ref, rel=1e-8)


def test_eta_hat_real_part_on_imaginary_axis():
    sd = OhmicExp(0.5, 1.0, 10.0)
    w = 1.3
    assert eta_hat(sd, -1j * w).real == pytest.approx(float(sd.J(w)) / w, rel=1e-12)


def test_meier_tannor_analytic_continuation_on_real_axis():
    sd = MeierTannorSum(((0.3 - 0.1j, 1.0 + 2.0j), (0.2 + 0.1j, 3.0 - 0.5j)))
    w = np.linspace(0.1, 10, 7)
    np.testing.assert_allclose(sd.J_analytic(w).real, sd.J(w), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(sd.J_analytic(w).imag, 0.0, atol=1e-12)


def test_filtered_density_notch():
    base = OhmicExp(1.0, 1.0, 5.0)
    flt = Filtered(base, 0.9, 2.0, 0.1)
    assert float(flt.J(2.0)) == pytest.approx(0.1 * float(base.J(2.0)), rel=1e-12)
    w = np.linspace(0, 20, 201)
    assert np.all(flt.J(w) >= 0)
    np.testing.assert_allclose(flt.J(np.array([8.0, 12.0])), base.J(np.array([8.0, 12.0])), rtol=1e-12)


def test_validation_errors():
    with pytest.raises(ValueError):
        OhmicExp(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        OhmicExp(1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        BathSpec(OhmicExp(1.0, 1.0, 1.0), -1.0)
    with pytest.raises(ValueError):
        eval_J(OhmicExp(1.0, 1.0, 1.0), -1.0)
    with pytest.raises(ValueError):
        eval_bcf_time(BathSpec(OhmicExp(1.0, 1.0, 1.0)), -0.1)
    with pytest.raises(ValueError):
        eta_hat(OhmicExp(1.0, 1.0, 1.0), -0.1)
    with pytest.raises(ValueError):
        MeierTannorSum(((1.0, -1.0),))


@pytest.mark.parametrize(
    "bath",
    [
        BathSpec(OhmicExp(0.5, 1.0, 10.0), 10.0),
        BathSpec(OhmicExp(1.0, 0.1, 5.0)),
        BathSpec(Filtered(OhmicExp(1.0, 1.0, 5.0), 0.5, 2.0, 0.2), 1.0),
        BathSpec(MeierTannorSum(((0.3 - 0.1j, 1.0 + 2.0j),)), 2.0),
    ],
)
def test_bath_json_round_trip(bath):
    back = bath_from_dict(json.loads(json.dumps(bath_to_dict(bath))))
    assert back == bath


def test_eta_hat_large_arguments_are_finite():
    sd = OhmicExp(1.0, 1.0, 5.0)
    s = np.array([-1e4j, -1e12j, 1e5, 2e3 + 5e3j])
    out = eta_hat(sd, s)
    assert np.all(np.isfinite(out))
    # eta_hat(s) ~ eta(0) / s for large |s|
    np.testing.assert_allclose(out * s, eta_time(sd, 0.0), rtol=1e-2)
