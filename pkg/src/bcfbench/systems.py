"""Demonstration systems: coupled spins and a transmon-resonator pair."""

import numpy as np
import scipy.linalg as la

from .heom.generic import SystemSpec

__all__ = ["pauli", "two_spin", "transmon_resonator", "ladder", "centered_product"]


def pauli():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    return sx, sy, sz


def ladder(n):
    """Truncated annihilation operator on ``n`` Fock states."""
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


def two_spin(omega_s1=1.2, omega_s2=0.8, g=0.4, beta=1.0, hbar=1.0):
    """``H/hbar = w1/2 sz1 + w2/2 sz2 + g sx1 sx2`` with ``V = sx1 + sx2``.

    Observables ``s{i}1``/``s{i}2`` for each spin and ``s{i}s{i}`` products.
    """
    sx, sy, sz = pauli()
    I2 = np.eye(2)
    H = hbar * (0.5 * omega_s1 * np.kron(sz, I2) + 0.5 * omega_s2 * np.kron(I2, sz) + g * np.kron(sx, sx))
    V = np.kron(sx, I2) + np.kron(I2, sx)
    obs = {}
    for name, s in zip("xyz", (sx, sy, sz)):
        obs[f"s{name}1"] = np.kron(s, I2)
        obs[f"s{name}2"] = np.kron(I2, s)
        obs[f"s{name}s{name}"] = np.kron(s, s)
    return SystemSpec(H, V, counter_term=False, beta=beta, observables=obs)


def centered_product(rho, A, B):
    """``<(A - <A>)(B - <B>)>`` for commuting ``A`` and ``B``."""
    ea = np.trace(A @ rho)
    eb = np.trace(B @ rho)
    return float(np.real(np.trace(A @ B @ rho) - ea * eb))


def _truncate(op_fn, n, n_build):
    # build in a larger Fock space, then keep the leading n x n block
    n_build = max(n, int(n_build or n))
    return op_fn(ladder(n_build))[:n, :n]


def transmon_resonator(omega_t=1.0, omega_r=2.0, g=0.4, eps=0.15, n_fock=5, n_build=None, beta=np.inf, hbar=1.0):
    """Transmon coupled to a resonator through ``g Y_t Y_r``; ``V = Y_r``.

    ``H_t / hbar = (w_t / 4)[Y^2 - (2/eps) cos(sqrt(eps) X)]`` with
    ``X = a + a^dag`` and ``Y = i(a^dag - a)``. Operators are built in a Fock
    space of dimension ``n_build`` (default ``n_fock``) and truncated to
    ``n_fock`` states per mode.
    """

    def X(a):
        return a + a.conj().T

    def Y(a):
        return 1j * (a.conj().T - a)

    def cos_term(a):
        return la.cosm(np.sqrt(eps) * X(a))

    def y2(a):
        return Y(a) @ Y(a)

    n = n_fock
    a = ladder(n)
    I = np.eye(n)
    Ht = 0.25 * omega_t * (_truncate(y2, n, n_build) - (2.0 / eps) * _truncate(cos_term, n, n_build))
    Nr = a.conj().T @ a
    H = hbar * (np.kron(Ht, I) + omega_r * np.kron(I, Nr) + g * np.kron(Y(a), Y(a)))
    V = np.kron(I, Y(a))
    obs = {}
    for tag, emb in (("t", lambda A: np.kron(A, I)), ("r", lambda A: np.kron(I, A))):
        obs[f"X{tag}2"] = emb(X(a) @ X(a))
        obs[f"Y{tag}2"] = emb(Y(a) @ Y(a))
        obs[f"N{tag}"] = emb(a.conj().T @ a)
        top = np.zeros((n, n))
        top[-1, -1] = 1.0
        obs[f"P{tag}_top"] = emb(top)
    return SystemSpec(H, V, counter_term=False, beta=beta, observables=obs)
