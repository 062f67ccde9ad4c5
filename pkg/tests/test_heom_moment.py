import math

import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from bcfbench.errors import InstabilityError
from bcfbench.fitting import ExponentialBCF, IPParameters, ip_to_exponential
from bcfbench.heom.index import count_indices
from bcfbench.heom.moment import (
    MomentHEOMState,
    MomentIndexSet,
    apply_o_left,
    build_moment_generator,
    correlation_mod,
    propagate_expm,
    second_moments,
    spectral_abscissa,
    steady_moments,
    vacuum_state,
)
from bcfbench.oscillator import OscillatorParams, eq_moment, spectral_correlation


def _pseudomode_q2(osc, lam, Omega, kappa, g, t):
    """<q^2>(t) of the oscillator coupled to one damped mode, from the covariance ODE.

    Both modes start in the vacuum. ``H = w0 a^dag a + lam v0^2 q^2 + Omega b^dag b
    + v0 g q (b + b^dag)`` and the mode decays with ``kappa D[b]``.
    """
    w0, v0 = osc.omega0, osc.v0
    Hm = np.diag([w0 + 2 * lam * v0**2, w0, Omega, Omega])
    Hm[0, 2] = Hm[2, 0] = np.sqrt(2) * v0 * g
    J = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    A = J @ Hm - 0.5 * kappa * np.diag([0, 0, 1, 1])
    D = 0.5 * kappa * np.diag([0, 0, 1, 1])
    # vec(dS/dt) = (I x A + A x I) vec(S) + vec(D), augmented with a constant slot
    n = 4
    big = np.zeros((n * n + 1, n * n + 1))
    big[: n * n, : n * n] = np.kron(np.eye(n), A) + np.kron(A, np.eye(n))
    big[: n * n, -1] = D.ravel(order="F")
    x0 = np.concatenate([(0.5 * np.eye(n)).ravel(order="F"), [1.0]])
    S = (la.expm(big * t) @ x0)[: n * n].reshape(n, n, order="F")
    return S[0, 0]


def _random_model(rng, K):
    # conjugate pairs plus possibly one real rate, all with Re z > 0
    d, z = [], []
    while len(z) < K:
        if K - len(z) >= 2 and rng.random() < 0.6:
            zz = rng.uniform(0.3, 3) + 1j * rng.uniform(0.2, 4)
            dd = rng.normal(scale=0.3) + 1j * rng.normal(scale=0.3)
            d += [dd, rng.normal(scale=0.3) + 1j * rng.normal(scale=0.3)]
            z += [zz, np.conj(zz)]
        else:
            d.append(rng.normal(scale=0.3) + 1j * rng.normal(scale=0.3))
            z.append(rng.uniform(0.3, 3) + 0j)
    return ExponentialBCF(np.array(d), np.array(z))


def test_index_set_size():
    ix = MomentIndexSet(2, 2)
    assert len(ix) == 15 == count_indices(4, 2)
    assert ix.at(0, 0) == 0
    assert ix.at(2, 0, (0, 0)) >= 0 and ix.at(1, 1, (1, 0)) < 0


def test_generator_couples_depth_to_same_or_two_below(unit_osc):
    model = _random_model(np.random.default_rng(0), 3)
    G, ix = build_moment_generator(unit_osc, model, 0.3, depth=4)
    depth = ix.indices.sum(axis=1)
    r, c = G.nonzero()
    dd = depth[r] - depth[c]
    assert set(np.unique(dd)) <= {0, 2}


def test_trace_is_conserved(rng, unit_osc):
    model = _random_model(rng, 4)
    G, ix = build_moment_generator(unit_osc, model, 0.7, depth=2)
    assert np.all(G.getrow(ix.at(0, 0)).toarray() == 0)


def test_no_bath_amplitude_gives_free_dynamics():
    osc = OscillatorParams(1.3, 0.8)
    model = ExponentialBCF([0.0, 0.0], [1 + 2j, 1 - 2j])
    G, ix = build_moment_generator(osc, model, 0.0)
    st0 = MomentHEOMState(ix)
    # coherent state alpha
    alpha = 0.4 - 0.7j
    for m in range(3):
        for n in range(3 - m):
            st0.vec[ix.at(m, n)] = alpha**m * np.conj(alpha) ** n / np.sqrt(float(math.factorial(m) * math.factorial(n)))
    t = 2.1
    q2, p2 = second_moments(propagate_expm(G, st0, t))
    a_t = alpha * np.exp(-1.3j * t)
    assert q2 == pytest.approx(0.5 + 2 * a_t.real**2, abs=1e-12)
    assert p2 == pytest.approx(0.5 + 2 * a_t.imag**2, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_readout_on_coherent_states(re, im):
    ix = MomentIndexSet(1, 2)
    alpha = complex(re, im)
    st0 = MomentHEOMState(ix)
    for m in range(3):
        for n in range(3 - m):
            st0.vec[ix.at(m, n)] = alpha**m * np.conj(alpha) ** n / np.sqrt(float(math.factorial(m) * math.factorial(n)))
    q2, p2 = second_moments(st0)
    assert q2 == pytest.approx(0.5 + 2 * re**2, abs=1e-12)
    assert p2 == pytest.approx(0.5 + 2 * im**2, abs=1e-12)


def test_readout_fock_one():
    ix = MomentIndexSet(1, 2)
    st0 = MomentHEOMState(ix)
    st0.vec[ix.at(0, 0)] = 1.0
    st0.vec[ix.at(1, 1)] = 1.0
    assert second_moments(st0) == pytest.approx((1.5, 1.5))


def _random_pseudomode_model(rng, Q):
    # weakly coupled Lindblad pseudomodes with a positive quadratic Hamiltonian
    A = 0.2 * rng.normal(size=(Q, Q))
    om = A + A.T + np.diag(rng.uniform(1.0, 3.0, Q))
    return ip_to_exponential(IPParameters(om, rng.uniform(0.3, 2.0, Q), 0.3 * rng.normal(size=Q)))


def test_semigroup(rng, unit_osc):
    model = _random_pseudomode_model(rng, 2)
    G, ix = build_moment_generator(unit_osc, model, 0.2)
    assert spectral_abscissa(G)[0] < 1e-9
    v0 = vacuum_state(ix)
    a = propagate_expm(G, propagate_expm(G, v0, 0.7), 1.1).vec
    b = propagate_expm(G, v0, 1.8).vec
    np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("K,seed", [(2, 1), (3, 2), (4, 3)])
def test_depth_two_is_exact(K, seed):
    rng = np.random.default_rng(seed)
    osc = OscillatorParams(1.0, 0.9)
    model = _random_model(rng, K)
    G2, ix2 = build_moment_generator(osc, model, 0.4, depth=2)
    G4, ix4 = build_moment_generator(osc, model, 0.4, depth=4)
    a = second_moments(propagate_expm(G2, vacuum_state(ix2), 3.0, check=False))
    b = second_moments(propagate_expm(G4, vacuum_state(ix4), 3.0, check=False))
    np.testing.assert_allclose(a, b, rtol=1e-12)


@pytest.mark.parametrize("lam", [0.0, 0.3])
def test_single_pseudomode_matches_covariance_equation(lam):
    Omega, kappa, g = 1.7, 0.8, 0.6
    model = ip_to_exponential(IPParameters([[Omega]], [kappa], [g]))
    osc = OscillatorParams(1.1, 0.9)
    G, ix = build_moment_generator(osc, model, lam)
    for t in (0.5, 2.0, 7.0):
        q2, _ = second_moments(propagate_expm(G, vacuum_state(ix), t))
        assert q2 == pytest.approx(_pseudomode_q2(osc, lam, Omega, kappa, g, t), abs=1e-8)


def test_instability_is_reported():
    ix = MomentIndexSet(1, 2)
    with pytest.raises(InstabilityError):
        propagate_expm(sp.identity(len(ix), format="csr") * 0.1, vacuum_state(ix), 1.0)


def test_steady_moments_match_exact(ohmic_bath, ohmic_model, unit_osc):
    q2, p2 = steady_moments(unit_osc, ohmic_model, ohmic_bath.lam, t_f=1e4)
    assert q2 == pytest.approx(eq_moment(ohmic_bath, unit_osc, "q2"), rel=1e-5)
    assert p2 == pytest.approx(eq_moment(ohmic_bath, unit_osc, "p2"), rel=1e-4)


def test_correlation_starts_at_moment_and_gives_spectrum(ohmic_bath, ohmic_model, unit_osc):
    lam = ohmic_bath.lam
    t, C, F = correlation_mod(unit_osc, ohmic_model, lam, t_f=1e4, t_grid=np.arange(0, 300.05, 0.1),
                              omega_grid=np.array([0.5, 1.0, 2.0]))
    q2, _ = steady_moments(unit_osc, ohmic_model, lam, t_f=1e4)
    assert C[0].real == pytest.approx(q2, rel=1e-10)
    ref = spectral_correlation(ohmic_bath, unit_osc, "qq", np.array([0.5, 1.0, 2.0]))
    np.testing.assert_allclose(F, ref, rtol=2e-3)


def test_o_left_on_vacuum():
    ix = MomentIndexSet(1, 2)
    q = apply_o_left(vacuum_state(ix), "q")
    # q |0><0| has tr(a q rho) = 1/sqrt(2)
    assert q.phi(1, 0) == pytest.approx(1 / np.sqrt(2))
    with pytest.raises(ValueError):
        apply_o_left(vacuum_state(ix), "x")
