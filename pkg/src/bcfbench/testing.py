"""Surrogate-oscillator accuracy test for a model BCF applied to a target system.

The coupling operator is split by Bohr frequency, each transition gets a
harmonic oscillator probing the same part of the BCF, and the oscillator
errors (model vs exact) are combined with transition weights.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy import integrate

from .errors import ConvergenceError, InstabilityError
from .heom.generic import GenericHEOM, gibbs_state, steady_state
from .heom.moment import correlation_mod, steady_moments
from .oscillator import OscillatorParams, eq_moment, spectral_correlation

__all__ = [
    "TransitionSpec",
    "SurrogateAssignment",
    "TestReport",
    "decompose_transitions",
    "assign_surrogate",
    "run_surrogate_test",
    "convergence_report",
    "relative_error",
]

log = logging.getLogger(__name__)


@dataclass
class TransitionSpec:
    """One Bohr-frequency component ``C_Omega`` of the coupling operator."""

    Omega: float
    C: np.ndarray
    coupling: float
    p: float
    p_raw: float = None

    def to_dict(self):
        return {"Omega": self.Omega, "coupling": self.coupling, "p": self.p, "p_raw": self.p_raw}


@dataclass
class SurrogateAssignment:
    transition: TransitionSpec
    omega0: float
    v0: float
    converged: bool
    iterations: int
    residuals: tuple = ()

    @property
    def osc(self):
        return OscillatorParams(self.omega0, self.v0)

    def to_dict(self):
        d = self.transition.to_dict()
        d.update(omega0=self.omega0, v0=self.v0, converged=self.converged, iterations=self.iterations)
        return d


@dataclass
class TestReport:
    """Per-transition errors and weighted totals."""

    __test__ = False  # not a pytest class

    rows: list = field(default_factory=list)
    totals: dict = field(default_factory=dict)
    unstable: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {"rows": self.rows, "totals": self.totals, "unstable": self.unstable, "meta": self.meta}


def _cluster(values, tol):
    # group sorted values whose consecutive gaps are below tol
    order = np.argsort(values)
    groups, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if values[b] - values[a] <= tol:
            cur.append(b)
        else:
            groups.append(cur)
            cur = [b]
    groups.append(cur)
    return groups


def decompose_transitions(sys, beta, lam=0.0, freq_tol=None, coverage=0.99, allow_zero_freq=False,
                          zero_warn=1e-3, renormalize=True, hbar=1.0):
    """Split ``V_S`` into Bohr-frequency components and weight them.

    Parameters
    ----------
    sys : SystemSpec
    beta : float
        Inverse temperature of the Gibbs-like reference state (``inf`` allowed).
    lam : float
        Counter-term strength; the reference state uses ``H_S - lam V_S^2``.
    freq_tol : float, optional
        Absolute merge tolerance; defaults to ``1e-9 max|Omega|``.
    coverage : float
        Keep the shortest prefix (by descending weight) reaching this fraction.
    allow_zero_freq : bool
        Drop a significant ``Omega = 0`` component with a warning instead of raising.
    renormalize : bool
        Rescale retained weights to sum to one (``p_raw`` keeps the original).

    Returns
    -------
    list of TransitionSpec
        Sorted by descending weight (ties: larger ``Omega`` first).
    """
    H = sys.hamiltonian(lam)
    E, U = la.eigh(H)
    n = len(E)
    Vt = U.conj().T @ sys.V_S @ U
    rho = U.conj().T @ gibbs_state(sys.h_eff(lam), beta) @ U
    i_idx, j_idx = np.triu_indices(n)
    om = (E[j_idx] - E[i_idx]) / hbar
    if freq_tol is None:
        freq_tol = 1e-9 * max(float(np.abs(om).max()), 1e-300)
    comps = []
    for grp in _cluster(om, freq_tol):
        C = np.zeros((n, n), dtype=complex)
        for g in grp:
            i, j = i_idx[g], j_idx[g]
            C[i, j] += (0.5 if i == j else 1.0) * Vt[i, j]
        X = C + C.conj().T
        coupling = float(np.real(np.trace(X @ X @ rho)))
        Omega = float(np.mean(om[grp]))
        if abs(Omega) <= freq_tol:
            Omega = 0.0
        comps.append((Omega, U @ C @ U.conj().T, coupling))
    total = sum(c for _, _, c in comps)
    if not total > 0:
        raise ValueError("coupling operator has no weight in the reference state")
    out = []
    for Omega, C, coupling in comps:
        p = coupling / total
        if Omega == 0.0:
            if p > zero_warn:
                msg = f"zero-frequency component carries weight {p:.3g}"
                if not allow_zero_freq:
                    raise ValueError(msg + "; pass allow_zero_freq to drop it")
                warnings.warn(msg + "; dropped", RuntimeWarning)
            continue
        # round-off weight from a rotated basis counts as no component
        if p <= 1e-14:
            continue
        out.append(TransitionSpec(Omega, C, coupling, p, p))
    out.sort(key=lambda t: (-t.p, -t.Omega))
    kept, acc = [], 0.0
    for t in out:
        if acc >= coverage:
            break
        kept.append(t)
        acc += t.p
    if renormalize:
        s = sum(t.p for t in kept)
        for t in kept:
            t.p = t.p / s
    return kept


def _half_coth(x):
    return 0.5 if np.isinf(x) else 0.5 / np.tanh(0.5 * x)


def assign_surrogate(tr, lam, bath, hbar=1.0, tol=1e-10, max_iter=200, damping=0.5, spec=None):
    """Oscillator ``(omega0, v0)`` probing the BCF like transition ``tr``.

    Solves ``omega0 = sqrt((lam v0^2/hbar)^2 + Omega^2) - lam v0^2/hbar`` and
    ``v0^2 <q^2>_eq(omega0, v0) = coupling`` by fixed-point iteration on
    ``v0^2``. Damping is switched on once the update changes sign.

    Raises
    ------
    ConvergenceError
        With the last iterate ``(omega0, v0)`` and the residual history.
    """
    if not tr.coupling > 0:
        raise ValueError("transition coupling must be positive")
    if lam < 0:
        raise ValueError("lam must be non-negative")
    Om, c = tr.Omega, tr.coupling
    v2 = c / _half_coth(bath.beta * hbar * Om)

    def omega0(v2):
        s = lam * v2 / hbar
        return np.sqrt(s * s + Om * Om) - s

    res = []
    mix, last_step = 1.0, 0.0
    for it in range(1, max_iter + 1):
        w0 = omega0(v2)
        q2 = eq_moment(bath, OscillatorParams(w0, np.sqrt(v2), hbar), "q2", spec)
        step = c / q2 - v2
        res.append(abs(step) / v2)
        if res[-1] < tol:
            v2 = c / q2
            w0 = omega0(v2)
            return SurrogateAssignment(tr, float(w0), float(np.sqrt(v2)), True, it, tuple(res))
        if step * last_step < 0:
            mix = damping
        last_step = step
        v2 = v2 + mix * step
    raise ConvergenceError(
        f"surrogate assignment for Omega={Om:.6g} did not converge", (omega0(v2), np.sqrt(v2)), res
    )


def relative_error(exact, model):
    return abs(exact - model) / abs(exact)


def _spectral_error(F, Fm, w):
    return float(integrate.trapezoid(np.abs(F - Fm), w) / integrate.trapezoid(np.abs(F), w))


def run_surrogate_test(assignments, bath, model, what="moments", t_f=1e4, omega_grid=None, lam=None,
                       fl_tol=1e-12, t_corr=1000.0):
    """Benchmark ``model`` on each surrogate oscillator and aggregate.

    Parameters
    ----------
    assignments : list of SurrogateAssignment
    bath : BathSpec
        Exact bath the model approximates.
    model : ExponentialBCF
    what : {"moments", "spectra", "both"}
    t_f : float
        Propagation time to the steady state. Slow model rates make short
        times unreliable; the exponential propagator makes long times free.
    t_corr : float
        Length of the correlation-function window for spectra (step 0.1).
    omega_grid : array_like, optional
        Frequency grid for spectral errors (default ``linspace(-10, 10, 2001)``).
    lam : float, optional
        Counter-term strength (default ``bath.lam``).

    Returns
    -------
    TestReport
    """
    if what not in ("moments", "spectra", "both"):
        raise ValueError("what must be 'moments', 'spectra' or 'both'")
    lam = bath.lam if lam is None else lam
    if omega_grid is None:
        omega_grid = np.linspace(-10.0, 10.0, 2001)
    w = np.asarray(omega_grid, dtype=float)
    rows, unstable = [], []
    for a in assignments:
        if not a.converged:
            raise ValueError("assignments must be converged")
        osc = a.osc
        row = a.to_dict()
        fl = float(model.fourier(a.transition.Omega))
        row["FL_mod_at_Omega"] = fl
        row["weak_coupling_risk"] = bool(fl < -fl_tol)
        try:
            if what in ("moments", "both"):
                q2m, p2m = steady_moments(osc, model, lam, t_f)
                q2e = eq_moment(bath, osc, "q2")
                p2e = eq_moment(bath, osc, "p2")
                row.update(q2_eq=q2e, p2_eq=p2e, q2_mod=q2m, p2_mod=p2m,
                           dq2=relative_error(q2e, q2m), dp2=relative_error(p2e, p2m))
            if what in ("spectra", "both"):
                for o in ("q", "p"):
                    t_grid = np.arange(0.0, t_corr + 0.05, 0.1)
                    _, _, Fm = correlation_mod(osc, model, lam, t_f, t_grid=t_grid, omega_grid=w, which=o)
                    F = spectral_correlation(bath, osc, o + o, np.where(w == 0, 1e-12, w))
                    row[f"dF{o}{o}"] = _spectral_error(F, Fm, w)
            row["stable"] = True
        except InstabilityError as exc:
            row["stable"] = False
            row["error"] = str(exc)
            unstable.append(a.transition.Omega)
            log.warning("surrogate at Omega=%.6g unstable: %s", a.transition.Omega, exc)
        rows.append(row)
    totals = {}
    for key in ("dq2", "dp2", "dFqq", "dFpp"):
        vals = [(r["p"], r[key]) for r in rows if r.get("stable") and key in r]
        if vals:
            totals[key] = float(sum(p * v for p, v in vals))
    return TestReport(rows, totals, unstable, {"t_f": t_f, "what": what, "K": model.K})


def _eval_observable(obs, rho):
    if callable(obs):
        return float(obs(rho))
    return float(np.real(np.trace(np.asarray(obs) @ rho)))


def convergence_report(sys, bath, fit, K_list, K_ref, observables, depth=6, assignments=None, what="moments",
                       t_f=1e4, steady_kw=None):
    """Target-system errors versus ``K`` next to the surrogate totals.

    Parameters
    ----------
    sys : SystemSpec
    bath : BathSpec
    fit : callable
        ``fit(K) -> ExponentialBCF``.
    K_list : iterable of int
    K_ref : int
        Reference number of terms (added to the runs if missing).
    observables : dict
        Name to operator or ``callable(rho) -> float``.
    depth : int
        Hierarchy cutoff for the target system.
    assignments : list of SurrogateAssignment, optional
        When given, the surrogate totals are reported for the same models.

    Returns
    -------
    list of dict
        One row per ``K`` with ``d_<name>`` errors and ``HO_<metric>`` totals.
    """
    steady_kw = steady_kw or {}
    Ks = sorted(set(K_list) | {K_ref})
    values, rows = {}, {}
    lam = bath.lam
    guess = gibbs_state(sys.h_eff(lam), bath.beta)
    for K in Ks:
        model = fit(K)
        row = {"K": K}
        try:
            st = steady_state(GenericHEOM(sys, model, depth, lam=lam, hbar=bath.hbar), rho_guess=guess, **steady_kw)
            rho = st.rho0
            values[K] = {k: _eval_observable(o, rho) for k, o in observables.items()}
            row["trace"] = float(np.real(np.trace(rho)))
            row["stable"] = True
        except (ConvergenceError, InstabilityError) as exc:
            row["stable"] = False
            row["error"] = str(exc)
        if assignments:
            rep = run_surrogate_test(assignments, bath, model, what=what, t_f=t_f)
            for k, v in rep.totals.items():
                row[f"HO_{k}"] = v
            row["HO_unstable"] = len(rep.unstable)
        rows[K] = row
    ref = values.get(K_ref)
    for K in Ks:
        if ref is None or K not in values:
            continue
        for name, v in values[K].items():
            rows[K][name] = v
            rows[K][f"d_{name}"] = relative_error(ref[name], v)
    return [rows[K] for K in Ks if K in K_list or K == K_ref]
