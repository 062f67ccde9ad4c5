"""Generic HEOM for a finite-dimensional system in the exponential basis.

Auxiliary operators ``rho_j`` are stored as one contiguous array of shape
``(n_aux, n, n)`` in the eigenbasis of the HEOM Hamiltonian, where the
commutator with ``H`` is a pointwise multiplication. Hierarchy couplings are
sparse ``n_aux x n_aux`` matrices applied to all matrix elements at once.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import ConvergenceError, InstabilityError
from .index import HierarchyIndexSet, count_indices

__all__ = [
    "SystemSpec",
    "GenericHEOMState",
    "GenericHEOM",
    "build_generic_rhs",
    "rk4_propagate",
    "steady_state",
    "system_correlation",
    "system_from_dict",
    "system_to_dict",
    "gibbs_state",
]


def _hermitian(A, name, tol=1e-12):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square")
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.conj().T).max() > tol * scale:
        raise ValueError(f"{name} is not Hermitian")
    return 0.5 * (A + A.conj().T)


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """System Hamiltonian and coupling operator.

    Parameters
    ----------
    H_S : (n, n) array
        Hermitian, energy units.
    V_S : (n, n) array
        Hermitian coupling operator.
    counter_term : bool
        When True, ``H_S`` is the effective Hamiltonian and ``lam V_S^2`` is
        added before propagation. When False, ``H_S`` is used as given and
        the counter term is only subtracted for the Gibbs weight.
    beta : float
        Inverse temperature carried along for convenience (``inf`` allowed).
    observables : dict
        Named Hermitian operators for reporting.
    """

    H_S: np.ndarray
    V_S: np.ndarray
    counter_term: bool = False
    beta: float = np.inf
    observables: dict = field(default_factory=dict)

    def __post_init__(self):
        H = _hermitian(self.H_S, "H_S")
        V = _hermitian(self.V_S, "V_S")
        if H.shape != V.shape:
            raise ValueError("H_S and V_S must have the same shape")
        object.__setattr__(self, "H_S", H)
        object.__setattr__(self, "V_S", V)
        obs = {k: np.asarray(v, dtype=complex) for k, v in self.observables.items()}
        object.__setattr__(self, "observables", obs)

    @property
    def n(self):
        return self.H_S.shape[0]

    def hamiltonian(self, lam=0.0):
        """Hamiltonian entering the HEOM."""
        if self.counter_term:
            return self.H_S + lam * self.V_S @ self.V_S
        return self.H_S

    def h_eff(self, lam=0.0):
        """Effective Hamiltonian used for Gibbs-like states."""
        if self.counter_term:
            return self.H_S
        return self.H_S - lam * self.V_S @ self.V_S


def gibbs_state(H, beta):
    """``exp(-beta H) / Z``; at ``beta = inf`` the (averaged) ground-state projector."""
    E, U = la.eigh(H)
    if np.isinf(beta):
        gs = np.abs(E - E[0]) <= 1e-10 * max(1.0, abs(E[0]))
        w = gs / gs.sum()
    else:
        w = np.exp(-beta * (E - E[0]))
        w /= w.sum()
    return (U * w) @ U.conj().T


def _mat_to_list(A):
    return [[float(z.real), float(z.imag)] for z in np.asarray(A, dtype=complex).ravel()]


def _mat_from_list(lst, n):
    arr = np.asarray(lst, dtype=float)
    if arr.shape != (n * n, 2):
        raise ValueError(f"expected {n * n} [re, im] pairs, got shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n)


def system_to_dict(sys):
    out = {
        "n": sys.n,
        "H_S": _mat_to_list(sys.H_S),
        "V_S": _mat_to_list(sys.V_S),
        "beta": "inf" if np.isinf(sys.beta) else float(sys.beta),
        "counter_term": bool(sys.counter_term),
    }
    if sys.observables:
        out["observables"] = {k: _mat_to_list(v) for k, v in sys.observables.items()}
    return out


def system_from_dict(d):
    """Parse the system JSON layout (row-major ``[re, im]`` pairs)."""
    try:
        n = int(d["n"])
        H = _mat_from_list(d["H_S"], n)
        V = _mat_from_list(d["V_S"], n)
    except KeyError as exc:
        raise ValueError(f"system description missing key {exc}") from None
    beta = d.get("beta", "inf")
    beta = np.inf if beta in ("inf", None) else float(beta)
    obs = {k: _mat_from_list(v, n) for k, v in d.get("observables", {}).items()}
    return SystemSpec(H, V, bool(d.get("counter_term", False)), beta, obs)


def load_system(path):
    with open(path) as fh:
        return system_from_dict(json.load(fh))


class GenericHEOMState:
    """Stack of auxiliary operators in the propagation eigenbasis."""

    def __init__(self, heom, data):
        self.heom = heom
        self.data = np.asarray(data, dtype=complex)

    @property
    def rho0(self):
        """Reduced density matrix in the original basis."""
        return self.heom.to_original(self.data[0])

    def trace(self):
        return complex(np.trace(self.data[0]))

    def norm(self):
        return float(np.linalg.norm(self.data))

    def copy(self):
        return GenericHEOMState(self.heom, self.data.copy())


class GenericHEOM:
    """Right-hand side of the truncated hierarchy for one system and model.

    Parameters
    ----------
    sys : SystemSpec
    model : ExponentialBCF
    depth : int
        Truncation ``sum(j) <= depth``.
    lam : float
        Counter-term strength (used when ``sys.counter_term``).
    hbar : float
    """

    def __init__(self, sys, model, depth, lam=0.0, hbar=1.0):
        if depth < 1:
            raise ValueError("hierarchy depth must be >= 1")
        self.sys = sys
        self.model = model
        self.depth = int(depth)
        self.hbar = float(hbar)
        self.lam = float(lam)
        self.index_set = HierarchyIndexSet(model.K, depth)
        H = sys.hamiltonian(lam)
        E, U = la.eigh(H)
        self.E, self.U = E, U
        self.V = U.conj().T @ sys.V_S @ U
        n = sys.n
        self.n = n
        self.shape = (len(self.index_set), n, n)
        ix = self.index_set
        zj = ix.indices @ model.z
        bohr = (E[:, None] - E[None, :]) / hbar
        self.diag = -1j * bohr[None, :, :] - zj[:, None, None]
        self.down_d, self.down_db, self.up = self._couplings()

    def _couplings(self):
        ix = self.index_set
        d, db = self.model.d, self.model.d_bar
        size = len(ix)
        rd, cd, vd, vdb = [], [], [], []
        ru, cu, vu = [], [], []
        for k in range(ix.n_slots):
            src = ix.down[k]
            rows = np.nonzero(src >= 0)[0]
            s = np.sqrt(ix.indices[rows, k])
            rd.append(rows)
            cd.append(src[rows])
            vd.append(s * d[k])
            vdb.append(s * db[k])
            tgt = ix.up[k]
            rows = np.nonzero(tgt >= 0)[0]
            ru.append(rows)
            cu.append(tgt[rows])
            vu.append(np.sqrt(ix.indices[rows, k] + 1.0))
        cat = np.concatenate
        Dd = sp.csr_matrix((cat(vd), (cat(rd), cat(cd))), shape=(size, size), dtype=complex)
        Ddb = sp.csr_matrix((cat(vdb), (cat(rd), cat(cd))), shape=(size, size), dtype=complex)
        Up = sp.csr_matrix((cat(vu), (cat(ru), cat(cu))), shape=(size, size), dtype=complex)
        return Dd, Ddb, Up

    def __len__(self):
        return int(np.prod(self.shape))

    def to_eigen(self, A):
        return self.U.conj().T @ A @ self.U

    def to_original(self, A):
        return self.U @ A @ self.U.conj().T

    def initial_state(self, rho_s):
        data = np.zeros(self.shape, dtype=complex)
        data[0] = self.to_eigen(np.asarray(rho_s, dtype=complex))
        return GenericHEOMState(self, data)

    def __call__(self, data):
        """Time derivative of the stacked hierarchy ``data`` (shape ``self.shape``)."""
        R = data.reshape(self.shape)
        m = self.shape[0]
        VR = np.matmul(self.V, R).reshape(m, -1)
        RV = np.matmul(R, self.V).reshape(m, -1)
        out = self.diag * R
        flat = out.reshape(m, -1)
        flat += self.down_d @ VR
        flat -= self.down_db @ RV
        flat -= (self.up @ (VR - RV)) / self.hbar
        return out

    def matvec(self, x):
        return self(x.reshape(self.shape)).ravel()

    def linear_operator(self):
        N = len(self)
        return spla.LinearOperator((N, N), matvec=self.matvec, dtype=complex)

    def sparse_matrix(self):
        """Explicit sparse generator (row-major vectorisation of ``data``)."""
        n = self.n
        I = sp.identity(n, dtype=complex, format="csr")
        VL = sp.kron(sp.csr_matrix(self.V), I)
        VR = sp.kron(I, sp.csr_matrix(self.V.T))
        L = sp.diags(self.diag.ravel())
        L = L + sp.kron(self.down_d, VL) - sp.kron(self.down_db, VR)
        L = L - sp.kron(self.up, VL - VR) / self.hbar
        return L.tocsr()


def build_generic_rhs(sys, model, H, lam=0.0, hbar=1.0):
    """Build the HEOM right-hand side; see :class:`GenericHEOM`."""
    return GenericHEOM(sys, model, H, lam=lam, hbar=hbar)


def rk4_propagate(rhs, state, dt, t_end, t_start=0.0, observer=None, every=1, blowup=1e6):
    """Classic fourth-order Runge-Kutta propagation.

    Parameters
    ----------
    rhs : GenericHEOM
    state : GenericHEOMState
    dt, t_end : float
    observer : callable, optional
        ``observer(t, state)`` called every ``every`` steps and at the end.
    blowup : float
        Abort when the hierarchy norm exceeds ``blowup`` times its initial value.

    Returns
    -------
    GenericHEOMState
        Final state; ``state.max_norm`` records the largest norm seen.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    n_steps = int(round((t_end - t_start) / dt))
    if n_steps < 0:
        raise ValueError("t_end must not precede t_start")
    y = state.data.copy()
    n0 = max(np.linalg.norm(y), 1e-300)
    max_norm = n0
    t = t_start
    if observer is not None:
        observer(t, GenericHEOMState(rhs, y))
    for i in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t_start + (i + 1) * dt
        if (i + 1) % 50 == 0 or i + 1 == n_steps:
            nrm = np.linalg.norm(y)
            max_norm = max(max_norm, nrm)
            if not np.isfinite(nrm) or nrm > blowup * n0:
                raise InstabilityError(
                    f"hierarchy norm grew by {nrm / n0:.3g} at t={t:.4g}; the model may drive "
                    "an unstable generator (weak-coupling regime)",
                    nrm / n0,
                )
        if observer is not None and ((i + 1) % every == 0 or i + 1 == n_steps):
            observer(t, GenericHEOMState(rhs, y))
    out = GenericHEOMState(rhs, y)
    out.max_norm = max_norm / n0
    return out


def steady_state(rhs, rho_guess=None, tol=1e-9, precond_depth=3, restart=80, maxiter=20, max_block=40000):
    """Stationary hierarchy from ``L x = 0`` with ``tr rho_0 = 1``.

    The equation for ``rho_0[0, 0]`` is replaced by the trace condition and
    the system is solved with GMRES. The preconditioner is an exact sparse LU
    of the hierarchy truncated at ``precond_depth`` (the leading block, since
    indices are ordered by depth) and the inverse diagonal on deeper levels.
    The block depth is lowered until it has at most ``max_block`` unknowns,
    which keeps the LU within memory for large system dimensions.

    The true residual of the bordered system can plateau near 1e-10 for
    large hierarchies, so acceptance is ``|A x - b| <= 1e3 tol``.

    Raises
    ------
    ConvergenceError
        If the final true residual exceeds ``1e3 tol``.
    """
    shp = rhs.shape
    N = len(rhs)
    n = rhs.n
    pop = np.arange(n) * (n + 1)

    def with_trace_row(y, x):
        y[0] = x[pop].sum()
        return y

    def mv(x):
        return with_trace_row(rhs(x.reshape(shp)).ravel(), x)

    p = min(int(precond_depth), rhs.depth)
    K = rhs.index_set.n_slots
    while p >= 1 and count_indices(K, p) * n * n > max_block:
        p -= 1
    low = GenericHEOM(rhs.sys, rhs.model, p, lam=rhs.lam, hbar=rhs.hbar) if p >= 1 else None
    if low is not None:
        B = low.sparse_matrix().tolil()
        B[0, :] = 0
        B[0, pop] = 1.0
        lu = spla.splu(B.tocsc())
        nb = len(low)
    else:
        nb = 0
    diag = rhs.diag.ravel().copy()
    scale = max(float(np.abs(rhs.model.z.real).max()), 1.0)
    diag[np.abs(diag) < 1e-12 * scale] = -scale

    def pc(x):
        y = x / diag
        if nb:
            y[:nb] = lu.solve(x[:nb])
        return y

    A = spla.LinearOperator((N, N), matvec=mv, dtype=complex)
    P = spla.LinearOperator((N, N), matvec=pc, dtype=complex)
    b = np.zeros(N, dtype=complex)
    b[0] = 1.0
    x0 = None
    if rho_guess is not None:
        x0 = np.zeros(N, dtype=complex)
        x0[: n * n] = rhs.to_eigen(rho_guess).ravel()
    res = []
    x, info = spla.gmres(
        A, b, x0=x0, M=P, rtol=tol, atol=0.0, restart=restart, maxiter=maxiter,
        callback=lambda r: res.append(float(r)), callback_type="pr_norm",
    )
    true_res = float(np.linalg.norm(mv(x) - b))
    if not true_res <= 1e3 * tol:
        raise ConvergenceError(
            f"steady-state GMRES did not converge (info={info}, residual={true_res:.3g})", x, res
        )
    st = GenericHEOMState(rhs, x.reshape(shp))
    st.residual = true_res
    st.iterations = len(res)
    st.gmres_info = info
    return st


def system_correlation(rhs, state, A, B, t_grid):
    """``C_AB(t) = tr[A exp(L t)(B rho)]`` for ``t >= 0`` on an equidistant grid.

    ``B`` multiplies every auxiliary operator from the left. Negative times
    follow from ``C_AB(-t) = tr[A exp(-L t)(B rho)]`` only for equilibrium
    states and are not generated here; use the conjugate relation of the
    caller's observable pair.

    Returns
    -------
    ndarray of complex
    """
    t = np.asarray(t_grid, dtype=float)
    if t[0] != 0:
        raise ValueError("t_grid must start at 0")
    Ae = rhs.to_eigen(np.asarray(A, dtype=complex))
    Be = rhs.to_eigen(np.asarray(B, dtype=complex))
    y = np.matmul(Be, state.data)
    C = np.empty(len(t), dtype=complex)
    C[0] = np.trace(Ae @ y[0])
    if len(t) == 1:
        return C
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h):
        raise ValueError("t_grid must be equidistant")
    sub = max(1, int(np.ceil(h / 0.005)))
    dt = h / sub
    cur = GenericHEOMState(rhs, y)
    for i in range(1, len(t)):
        cur = rk4_propagate(rhs, cur, dt, dt * sub)
        C[i] = np.trace(Ae @ cur.data[0])
    return C
