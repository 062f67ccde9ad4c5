import numpy as np
import pytest
from scipy.stats import unitary_group

from bcfbench.bath import BathSpec, OhmicExp
from bcfbench.errors import ConvergenceError
from bcfbench.fitting import esprit_fit, time_grid
from bcfbench.heom.generic import SystemSpec
from bcfbench.oscillator import OscillatorParams, eq_moment
from bcfbench.systems import centered_product, ladder, two_spin
from bcfbench.testing import (
    TransitionSpec,
    assign_surrogate,
    convergence_report,
    decompose_transitions,
    run_surrogate_test,
)


@pytest.fixture(scope="module")
def spin_bath():
    return BathSpec(OhmicExp(1.0, 0.2, 10.0), 1.0)


def _all(sys_, beta, lam):
    return decompose_transitions(sys_, beta, lam, coverage=2.0, renormalize=False)


def test_uncoupled_spins_give_bare_splittings():
    trs = decompose_transitions(two_spin(g=0.0), 1.0)
    assert sorted(t.Omega for t in trs) == pytest.approx([0.8, 1.2], abs=1e-12)
    for t in trs:
        # <sx^2> = 1 for each spin
        assert t.coupling == pytest.approx(1.0, abs=1e-12)


def test_weights_normalised_and_positive_frequencies(spin_bath):
    trs = _all(two_spin(), 1.0, spin_bath.lam)
    assert sum(t.p for t in trs) == pytest.approx(1.0, abs=1e-12)
    assert all(t.Omega > 0 for t in trs)
    kept = decompose_transitions(two_spin(), 1.0, spin_bath.lam)
    assert sum(t.p_raw for t in kept) >= 0.99
    assert sum(t.p for t in kept) == pytest.approx(1.0, abs=1e-12)
    assert [t.p for t in kept] == sorted((t.p for t in kept), reverse=True)


def test_coupling_operator_reconstruction(spin_bath):
    sys_ = two_spin()
    trs = _all(sys_, 1.0, spin_bath.lam)
    total = sum(t.C + t.C.conj().T for t in trs)
    np.testing.assert_allclose(total, sys_.V_S, atol=1e-10)


def test_basis_independence(spin_bath):
    sys_ = two_spin()
    U = unitary_group.rvs(4, random_state=7)
    rot = SystemSpec(U @ sys_.H_S @ U.conj().T, U @ sys_.V_S @ U.conj().T, beta=sys_.beta)
    a = _all(sys_, 1.0, spin_bath.lam)
    b = _all(rot, 1.0, spin_bath.lam)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x.Omega == pytest.approx(y.Omega, abs=1e-9)
        assert x.coupling == pytest.approx(y.coupling, abs=1e-9)
        assert x.p == pytest.approx(y.p, abs=1e-9)


def test_harmonic_self_test():
    w0, v0, lam, beta = 1.0, 0.9, 0.4, 1.0
    n = 40
    a = ladder(n)
    q = (a + a.conj().T) / np.sqrt(2)
    osc_sys = SystemSpec(w0 * a.conj().T @ a, v0 * q, counter_term=True)
    trs = decompose_transitions(osc_sys, beta, lam)
    assert len(trs) == 1
    assert trs[0].Omega == pytest.approx(w0 * np.sqrt(1 + 2 * lam * v0**2 / w0), abs=1e-8)


def test_zero_frequency_component_is_rejected():
    # V with a diagonal part in the eigenbasis of H
    sys_ = SystemSpec(np.diag([0.0, 1.0]), np.array([[1.0, 0.3], [0.3, -1.0]]))
    with pytest.raises(ValueError):
        decompose_transitions(sys_, 1.0)
    with pytest.warns(RuntimeWarning):
        trs = decompose_transitions(sys_, 1.0, allow_zero_freq=True)
    assert all(t.Omega > 0 for t in trs)


def test_assignment_residuals(spin_bath):
    lam = spin_bath.lam
    for tr in decompose_transitions(two_spin(), 1.0, lam):
        a = assign_surrogate(tr, lam, spin_bath)
        assert a.converged
        s = lam * a.v0**2
        assert abs(a.omega0 - (np.sqrt(s * s + tr.Omega**2) - s)) < 1e-10
        q2 = eq_moment(spin_bath, OscillatorParams(a.omega0, a.v0), "q2")
        assert abs(a.v0**2 * q2 - tr.coupling) / tr.coupling < 1e-8


def test_zero_counter_term_keeps_frequency(spin_bath):
    tr = TransitionSpec(1.3, np.zeros((2, 2)), 0.8, 1.0)
    a = assign_surrogate(tr, 0.0, spin_bath)
    assert a.omega0 == 1.3


def test_assignment_errors(spin_bath):
    tr = TransitionSpec(1.3, np.zeros((2, 2)), 0.8, 1.0)
    with pytest.raises(ConvergenceError):
        assign_surrogate(tr, 1.0, spin_bath, max_iter=1)
    with pytest.raises(ValueError):
        assign_surrogate(TransitionSpec(1.3, None, 0.0, 1.0), 1.0, spin_bath)
    with pytest.raises(ValueError):
        assign_surrogate(tr, -1.0, spin_bath)


@pytest.fixture(scope="module")
def spin_fits(spin_bath):
    grid = time_grid(spin_bath, 0.01, 20.0)
    return {K: esprit_fit(grid, K) for K in (4, 8)}


def test_report_totals_are_weighted_sums(spin_bath, spin_fits):
    lam = spin_bath.lam
    asg = [assign_surrogate(t, lam, spin_bath) for t in decompose_transitions(two_spin(), 1.0, lam)]
    rep = run_surrogate_test(asg, spin_bath, spin_fits[4], what="moments")
    for key in ("dq2", "dp2"):
        assert rep.totals[key] == pytest.approx(sum(r["p"] * r[key] for r in rep.rows), rel=1e-14)
    assert all("FL_mod_at_Omega" in r and "weak_coupling_risk" in r for r in rep.rows)
    # a single transition with weight one reports its own error
    single = asg[0]
    single.transition.p = 1.0
    rep1 = run_surrogate_test([single], spin_bath, spin_fits[4], what="moments")
    assert rep1.totals["dq2"] == rep1.rows[0]["dq2"]


def test_convergence_report_reference_row(spin_bath, spin_fits):
    sys_ = two_spin()
    obs = {"sxsx": lambda r: centered_product(r, sys_.observables["sx1"], sys_.observables["sx2"])}
    rows = convergence_report(sys_, spin_bath, lambda K: spin_fits[K], [4, 8], 8, obs, depth=3)
    ref = [r for r in rows if r["K"] == 8][0]
    assert ref["d_sxsx"] == 0.0
    assert all(r["stable"] for r in rows)
    assert abs(ref["trace"] - 1) < 1e-10
