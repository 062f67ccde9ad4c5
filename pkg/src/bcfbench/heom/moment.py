"""HEOM for the harmonic surrogate in the moment representation.

State elements ``phi[m, n, j] = tr(a^m rho_j (a^dag)^n) / sqrt(m! n!)``. The
generator couples depth ``m + n + |j|`` only to the same depth and to depth
minus two, so truncating at depth 2 is exact for second moments.
"""

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy import integrate

from ..errors import InstabilityError
from .index import HierarchyIndexSet

__all__ = [
    "MomentIndexSet",
    "MomentHEOMState",
    "build_moment_generator",
    "propagate_expm",
    "vacuum_state",
    "second_moments",
    "steady_moments",
    "correlation_mod",
    "apply_o_left",
]

_SQ2 = np.sqrt(2.0)


class MomentIndexSet(HierarchyIndexSet):
    """Index set over ``(m, n, j_1..j_K)`` with ``m + n + |j| <= depth``."""

    def __init__(self, K, depth=2):
        super().__init__(K + 2, depth)
        self.K = int(K)

    def at(self, m, n, j=None):
        j = tuple(j) if j is not None else (0,) * self.K
        return self.get((m, n) + j)


class MomentHEOMState:
    """Vector of moments with accessors by ``(m, n, j)``."""

    def __init__(self, index_set, vec=None):
        self.index_set = index_set
        self.vec = np.zeros(len(index_set), dtype=complex) if vec is None else np.asarray(vec, dtype=complex)

    def phi(self, m, n, j=None):
        i = self.index_set.at(m, n, j)
        return self.vec[i] if i >= 0 else 0.0

    def copy(self):
        return MomentHEOMState(self.index_set, self.vec.copy())


def vacuum_state(index_set):
    """``phi = |0><0|`` in the ``j = 0`` slot."""
    st = MomentHEOMState(index_set)
    st.vec[index_set.at(0, 0)] = 1.0
    return st


def build_moment_generator(osc, model, lam, depth=2, index_set=None):
    """Generator ``d phi / dt = G phi`` of the moment-representation HEOM.

    Parameters
    ----------
    osc : OscillatorParams
    model : ExponentialBCF
    lam : float
        Counter-term strength of the bath the model approximates.
    depth : int
        Truncation ``m + n + |j| <= depth``.

    Returns
    -------
    G : scipy.sparse.csr_matrix
    index_set : MomentIndexSet
    """
    if np.any(model.conjugate_map < 0):
        raise ValueError("model must be closed under conjugation")
    K = model.K
    ix = index_set or MomentIndexSet(K, depth)
    hbar = osc.hbar
    w0, v0 = osc.omega0, osc.v0
    d, dbar, z = model.d, model.d_bar, model.z
    shift = lam * v0**2 / hbar

    rows, cols, vals = [], [], []

    def add(i, m, n, j, coef):
        if coef == 0 or m < 0 or n < 0 or min(j) < 0:
            return
        c = ix.get((m, n) + tuple(j))
        if c >= 0:
            rows.append(i)
            cols.append(c)
            vals.append(coef)

    for i, idx in enumerate(ix.indices):
        m, n = int(idx[0]), int(idx[1])
        j = [int(x) for x in idx[2:]]
        # system Hamiltonian with counter term
        diag = -1j * (w0 + shift) * (m - n) - np.dot(z, j)
        add(i, m, n, j, diag)
        pre = -1j * shift
        add(i, m - 2, n, j, pre * 0.5 * np.sqrt(m * (m - 1)))
        add(i, m, n - 2, j, -pre * 0.5 * np.sqrt(n * (n - 1)))
        add(i, m - 1, n + 1, j, pre * np.sqrt(m * (n + 1)))
        add(i, m + 1, n - 1, j, -pre * np.sqrt((m + 1) * n))
        for k in range(K):
            if j[k] > 0:
                jm = list(j)
                jm[k] -= 1
                s = v0 * np.sqrt(j[k]) / _SQ2
                # d_k S[q rho] - dbar_k S[rho q]
                add(i, m + 1, n, jm, s * (d[k] - dbar[k]) * np.sqrt(m + 1))
                add(i, m - 1, n, jm, s * d[k] * np.sqrt(m))
                add(i, m, n + 1, jm, s * (d[k] - dbar[k]) * np.sqrt(n + 1))
                add(i, m, n - 1, jm, -s * dbar[k] * np.sqrt(n))
            jp = list(j)
            jp[k] += 1
            s = -(v0 / hbar) * np.sqrt(j[k] + 1) / _SQ2
            add(i, m - 1, n, jp, s * np.sqrt(m))
            add(i, m, n - 1, jp, -s * np.sqrt(n))

    G = sp.csr_matrix((vals, (rows, cols)), shape=(len(ix), len(ix)), dtype=complex)
    G.sum_duplicates()
    return G, ix


def _dense(gen):
    return gen.toarray() if sp.issparse(gen) else np.asarray(gen)


def spectral_abscissa(gen):
    """Largest real part of the generator eigenvalues."""
    ev = la.eigvals(_dense(gen))
    k = int(np.argmax(ev.real))
    return float(ev.real[k]), complex(ev[k])


def propagate_expm(gen, state, t, check=True, tol=1e-9):
    """Apply ``exp(gen t)`` to a state by scaling and squaring.

    Raises
    ------
    InstabilityError
        When the generator has an eigenvalue with real part above ``tol``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    A = _dense(gen)
    if check:
        a, ev = spectral_abscissa(A)
        if a > tol:
            raise InstabilityError(f"unstable generator: eigenvalue {ev:.6g}", ev)
    vec = state.vec if isinstance(state, MomentHEOMState) else np.asarray(state)
    out = la.expm(A * t) @ vec
    if isinstance(state, MomentHEOMState):
        return MomentHEOMState(state.index_set, out)
    return out


def second_moments(state):
    """``(<q^2>, <p^2>)`` from the ``j = 0`` moments."""
    p00 = state.phi(0, 0)
    p11 = state.phi(1, 1)
    p20 = state.phi(2, 0)
    p02 = state.phi(0, 2)
    q2 = 0.5 * (_SQ2 * p20 + _SQ2 * p02 + 2 * p11 + p00)
    pp = 0.5 * (-_SQ2 * p20 - _SQ2 * p02 + 2 * p11 + p00)
    return float(np.real(q2)), float(np.real(pp))


def steady_moments(osc, model, lam, t_f=30.0, depth=2, initial=None):
    """Propagate from the vacuum to ``t_f`` and read off ``<q^2>, <p^2>``."""
    G, ix = build_moment_generator(osc, model, lam, depth)
    st = initial if initial is not None else vacuum_state(ix)
    return second_moments(propagate_expm(G, st, t_f))


def apply_o_left(state, which):
    """Transformed left multiplication by ``q`` or ``p`` in moment space."""
    ix = state.index_set
    out = np.zeros(len(ix), dtype=complex)
    for i, idx in enumerate(ix.indices):
        m, n = int(idx[0]), int(idx[1])
        j = tuple(int(x) for x in idx[2:])
        a_phi = np.sqrt(m + 1) * state.phi(m + 1, n, j)
        adag_phi = np.sqrt(m) * state.phi(m - 1, n, j) if m > 0 else 0.0
        phi_adag = np.sqrt(n + 1) * state.phi(m, n + 1, j)
        if which == "q":
            out[i] = (a_phi + adag_phi + phi_adag) / _SQ2
        elif which == "p":
            out[i] = 1j / _SQ2 * (adag_phi + phi_adag - a_phi)
        else:
            raise ValueError("which must be 'q' or 'p'")
    return MomentHEOMState(ix, out)


def _readout_o(state, which):
    p10, p01 = state.phi(1, 0), state.phi(0, 1)
    if which == "q":
        return (p10 + p01) / _SQ2
    return 1j / _SQ2 * (p01 - p10)


def correlation_mod(osc, model, lam, t_f=30.0, t_grid=None, omega_grid=None, which="q", dt=0.1):
    """Model autocorrelation ``C_oo(t)`` and its spectrum.

    Propagates to ``t_f``, applies the transformed ``o`` multiplication,
    propagates again over ``t_grid`` and reads ``o`` back out. The spectrum
    ``2 Re int_0^T C(t) e^{i w t} dt`` uses Simpson's rule on the grid.

    Returns
    -------
    t : ndarray
    C : ndarray of complex
    F : ndarray or None
        Spectrum on ``omega_grid`` when given.
    """
    G, ix = build_moment_generator(osc, model, lam, 2)
    st = propagate_expm(G, vacuum_state(ix), t_f)
    psi = apply_o_left(st, which)
    if t_grid is None:
        t_grid = np.arange(0.0, t_f + 0.5 * dt, dt)
    t_grid = np.asarray(t_grid, dtype=float)
    h = t_grid[1] - t_grid[0]
    if not np.allclose(np.diff(t_grid), h) or t_grid[0] != 0:
        raise ValueError("t_grid must be equidistant from 0")
    step = la.expm(_dense(G) * h)
    C = np.empty(len(t_grid), dtype=complex)
    v = psi.vec.copy()
    for n in range(len(t_grid)):
        C[n] = _readout_o(MomentHEOMState(ix, v), which)
        v = step @ v
    F = None
    if omega_grid is not None:
        F = spectrum_from_correlation(t_grid, C, omega_grid)
    return t_grid, C, F


def spectrum_from_correlation(t, C, omega):
    """``2 Re int_0^T C(t) exp(i w t) dt`` by Simpson's rule."""
    w = np.asarray(omega, dtype=float)
    ph = np.exp(1j * np.outer(w.ravel(), t))
    vals = integrate.simpson(ph * C[None, :], x=t, axis=1)
    return (2 * np.real(vals)).reshape(w.shape)
