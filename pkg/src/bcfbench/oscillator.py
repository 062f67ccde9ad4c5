"""Exact benchmarks for a harmonic oscillator coupled linearly to the bath.

System: ``H_S,eff = hbar w0 a^dag a`` and ``V_S = v0 q`` with
``q = (a + a^dag)/sqrt(2)``. Everything follows from the Laplace-transformed
friction kernel through the effective mass ``M = hbar / (w0 v0^2)``.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as la
from scipy import integrate
from scipy.special import zeta as riemann_zeta

from .bath import eta_hat, eta_time, eval_bcf_time
from .errors import NumericalError, PoleError

__all__ = [
    "OscillatorParams",
    "MatsubaraSumSpec",
    "eq_moment",
    "spectral_correlation",
    "g_plus_hat",
    "g_plus_volterra",
    "transient_q2",
    "check_low_frequency_limit",
]


@dataclass(frozen=True)
class OscillatorParams:
    """Surrogate oscillator ``(omega0, v0)``."""

    omega0: float
    v0: float
    hbar: float = 1.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if not self.v0 > 0:
            raise ValueError("v0 must be positive")

    @property
    def M(self):
        return self.hbar / (self.omega0 * self.v0**2)


@dataclass(frozen=True)
class MatsubaraSumSpec:
    """Explicit Matsubara terms plus optional asymptotic tail correction.

    ``zero_t_method`` selects fixed cached nodes (``"nodes"``) or adaptive
    quadrature (``"quad"``) for the zero-temperature integral.
    """

    n_terms: int = 10_000
    tail: bool = True
    zero_t_method: str = "nodes"

    def __post_init__(self):
        if self.n_terms < 1:
            raise ValueError("n_terms must be >= 1")
        if self.zero_t_method not in ("nodes", "quad"):
            raise ValueError("zero_t_method must be 'nodes' or 'quad'")


def _tail_sum(n, terms, N):
    """Fit ``a/n^2 + b/n^3 + c/n^4`` to the last terms and sum it beyond ``N``."""
    m = min(len(n), 64)
    nn = n[-m:].astype(float)
    A = np.stack([nn**-2, nn**-3, nn**-4], axis=1)
    coef, *_ = la.lstsq(A, terms[-m:])
    return float(coef @ riemann_zeta([2.0, 3.0, 4.0], N + 1))


def eq_moment(bath, osc, which="q2", spec=None):
    """Equilibrium ``<q^2>`` or ``<p^2>`` of the coupled oscillator.

    Parameters
    ----------
    bath : BathSpec
    osc : OscillatorParams
    which : {"q2", "p2"}
    spec : MatsubaraSumSpec, optional
        Summation control for finite temperature.

    Returns
    -------
    float
    """
    if which not in ("q2", "p2"):
        raise ValueError("which must be 'q2' or 'p2'")
    spec = spec or MatsubaraSumSpec()
    w0, M = osc.omega0, osc.M
    if bath.zero_temperature:
        return _eq_moment_zero_t(bath, osc, which, spec.zero_t_method)

    N = int(spec.n_terms)
    n = np.arange(1, N + 1)
    nu = bath.matsubara(n)
    zeta_n = _matsubara_eta(bath, N) / M
    den = w0**2 + nu**2 + zeta_n
    terms = (w0**2 / den) if which == "q2" else ((w0**2 + zeta_n) / den)
    total = terms.sum()
    if spec.tail:
        total += _tail_sum(n, terms, N)
    return float((1.0 + 2.0 * total) / (bath.beta * bath.hbar * w0))


@lru_cache(maxsize=32)
def _matsubara_eta(bath, N):
    # nu_n eta_hat(nu_n) does not depend on the oscillator; reused across calls
    nu = bath.matsubara(np.arange(1, N + 1))
    out = nu * np.real(eta_hat(bath, nu))
    out.flags.writeable = False
    return out


@lru_cache(maxsize=32)
def _imag_axis_nodes(bath, n_panels=240, order=16):
    # composite Gauss-Legendre in log(nu) over 18 decades around the bath scale
    sc = bath.sd.scale
    x0, x1 = np.log(1e-10 * sc), np.log(1e8 * sc)
    edges = np.linspace(x0, x1, n_panels + 1)
    g, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    wx = (half[:, None] * w[None, :]).ravel()
    nu = np.exp(x)
    ends = np.exp([x0, x1])
    zeta = nu * np.real(eta_hat(bath, nu))
    zeta_end = ends * np.real(eta_hat(bath, ends))
    for a in (nu, wx * nu, zeta, zeta_end, ends):
        a.flags.writeable = False
    return nu, wx * nu, zeta, zeta_end, ends


def _eq_moment_zero_t(bath, osc, which, method="nodes"):
    w0, M = osc.omega0, osc.M
    if method == "nodes":
        nu, wts, zeta, zeta_end, ends = _imag_axis_nodes(bath)
        zeta = zeta / M
        num = w0**2 if which == "q2" else w0**2 + zeta
        val = float(np.sum(wts * num / (w0**2 + nu**2 + zeta)))
        # integrand is flat below the first node and decays like 1/nu^2 above the last
        ze = zeta_end / M
        f = (w0**2 if which == "q2" else w0**2 + ze) / (w0**2 + ends**2 + ze)
        val += f[0] * ends[0] + f[1] * ends[1]
        return float(val / (np.pi * w0))
    sc = bath.sd.scale

    def f(u):
        if u >= 1.0:
            return 0.0
        nu = sc * u / (1.0 - u)
        jac = sc / (1.0 - u) ** 2
        zeta = nu * float(np.real(eta_hat(bath, nu))) / M if nu > 0 else 0.0
        num = w0**2 if which == "q2" else w0**2 + zeta
        return num / (w0**2 + nu**2 + zeta) * jac

    # breakpoint near the oscillator frequency keeps the peak resolved
    u0 = w0 / (w0 + sc)
    val = 0.0
    for a, b in ((0.0, u0), (u0, 1.0)):
        v, err = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
        val += v
    return float(val / (np.pi * w0))


def g_plus_hat(bath, osc, s):
    """Laplace transform ``G_+(s) = 1 / (w0^2 + s^2 + s eta_hat(s) / M)``."""
    s = np.asarray(s, dtype=complex)
    return 1.0 / (osc.omega0**2 + s**2 + s * eta_hat(bath, s) / osc.M)


@lru_cache(maxsize=64)
def check_low_frequency_limit(bath, tol=1e-3):
    """Check numerically that ``w Im[eta_hat(-i w)] -> 0`` as ``w -> 0+``.

    Raises
    ------
    NumericalError
        If the product does not shrink over three decades.
    """
    sc = bath.sd.scale
    ws = sc * np.array([1e-5, 1e-7, 1e-9])
    vals = np.abs(ws * np.imag(eta_hat(bath, -1j * ws)))
    if not (vals[-1] < tol and vals[-1] <= vals[0]):
        raise NumericalError(f"w Im eta_hat(-i w) does not vanish at small w: {vals}")
    return True


def spectral_correlation(bath, osc, which="qq", omega=0.0):
    """Equilibrium spectrum ``F[C_qq](w)`` or ``F[C_pp](w)``.

    ``F[C_qq](w) = 2 w0 / (1 - exp(-beta hbar w)) Im G_+(-i w)``; zero
    temperature replaces the thermal factor by a step function.

    Raises
    ------
    PoleError
        At ``w = 0`` when the spectrum diverges there (sub-Ohmic, finite beta).
    """
    if which not in ("qq", "pp"):
        raise ValueError("which must be 'qq' or 'pp'")
    w = np.asarray(omega, dtype=float)
    w0, M = osc.omega0, osc.M
    sd = bath.sd
    if sd.low_exponent < 1 and np.any((np.abs(w) < 1e-3 * sd.scale) & (w != 0)):
        check_low_frequency_limit(bath)
    flat = w.ravel()
    out = np.zeros(flat.shape)
    nz = flat != 0
    if np.any(nz):
        wn = flat[nz]
        eh = np.atleast_1d(eta_hat(bath, -1j * wn))
        G = 1.0 / (w0**2 - wn**2 - 1j * wn * eh / M)
        if bath.zero_temperature:
            therm = np.where(wn > 0, 1.0, 0.0)
        else:
            therm = 1.0 / (-np.expm1(-bath.beta * bath.hbar * wn))
        out[nz] = 2 * w0 * therm * G.imag
    if np.any(~nz):
        if bath.zero_temperature:
            out[~nz] = 0.0
        else:
            lim = sd.J_over_omega_at_zero()
            if math.isinf(lim):
                raise PoleError("F[C_qq] diverges at w = 0 for this bath")
            # Im G ~ J(w) / (M w0^4), thermal factor ~ 1/(beta hbar w)
            out[~nz] = 2 * w0 * lim / (M * w0**4) / (bath.beta * bath.hbar)
    if which == "pp":
        out = out * (flat / w0) ** 2
    out = out.reshape(w.shape)
    return out[()] if out.ndim == 0 else out


def g_plus_volterra(bath, osc, t_grid, kernel=None, bound=10.0):
    """Solve ``G'' + (1/M) int_0^t eta(t - tau) G'(tau) dtau + w0^2 G = 0``.

    Trapezoidal product integration on an equidistant grid starting at 0,
    second order in the step.

    Parameters
    ----------
    bath : BathSpec
    osc : OscillatorParams
    t_grid : array_like
        Equidistant times with ``t_grid[0] == 0``.
    kernel : array_like, optional
        Precomputed ``eta`` on the grid (overrides the bath).
    bound : float
        ``|G|`` exceeding ``bound / w0`` is treated as a step-size failure.

    Returns
    -------
    G, dG : ndarray
    """
    t = np.asarray(t_grid, dtype=float)
    if t[0] != 0:
        raise ValueError("t_grid must start at 0")
    N = len(t)
    if N < 2:
        return np.zeros(N), np.ones(N)
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9):
        raise ValueError("t_grid must be equidistant")
    w0, M = osc.omega0, osc.M
    eta = np.asarray(kernel if kernel is not None else eta_time(bath, t), dtype=float) / M

    G = np.zeros(N)
    P = np.zeros(N)
    P[0] = 1.0
    F_prev = -(w0**2) * G[0]
    # system for (G_{n+1}, P_{n+1}):
    #   G_{n+1} - h/2 P_{n+1} = G_n + h/2 P_n
    #   h/2 w0^2 G_{n+1} + (1 + h^2/4 eta_0) P_{n+1} = P_n + h/2 F_n - h/2 * h * hist
    a11, a12 = 1.0, -0.5 * h
    a21, a22 = 0.5 * h * w0**2, 1.0 + 0.25 * h * h * eta[0]
    det = a11 * a22 - a12 * a21
    limit = bound / w0
    for n in range(N - 1):
        m = n + 1
        # history part of h * [eta_m P_0 / 2 + sum_{j=1}^{m-1} eta_{m-j} P_j]
        hist = 0.5 * eta[m] * P[0]
        if m > 1:
            hist += eta[m - 1 : 0 : -1] @ P[1:m]
        b1 = G[n] + 0.5 * h * P[n]
        b2 = P[n] + 0.5 * h * F_prev - 0.5 * h * h * hist
        G[m] = (b1 * a22 - a12 * b2) / det
        P[m] = (a11 * b2 - a21 * b1) / det
        F_prev = -(w0**2) * G[m] - h * (hist + 0.5 * eta[0] * P[m])
        if abs(G[m]) > limit or not np.isfinite(G[m]):
            raise NumericalError(f"G_+ grew beyond {limit:.3g} at t={t[m]:.4g}; reduce the step")
    return G, P


def _transient_on_grid(bath, osc, initial, t_end, n_steps):
    q0, p0, s0 = initial
    w0, M = osc.omega0, osc.M
    t = np.linspace(0.0, t_end, n_steps + 1)
    G, dG = g_plus_volterra(bath, osc, t)
    Lg = eval_bcf_time(bath, t)
    T = la.toeplitz(Lg, np.conj(Lg))
    wts = np.full(len(t), t[1] - t[0])
    wts[0] = wts[-1] = 0.5 * (t[1] - t[0])
    v = wts * G
    dbl = float(np.real(v @ T @ v))
    val = q0 * dG[-1] ** 2 + p0 * w0**2 * G[-1] ** 2 + s0 * w0 * G[-1] * dG[-1] + w0 / M * dbl
    return val, abs(float(G[-1]))


def transient_q2(bath, osc, initial=(0.5, 0.5, 0.0), t=1.0, h=None, richardson=True, return_decay=False):
    """Exact ``<q^2>(t)`` for a factorised initial state.

    Parameters
    ----------
    bath : BathSpec
    osc : OscillatorParams
    initial : tuple
        ``(<q^2>_0, <p^2>_0, <qp + pq>_0)``; the default is the vacuum.
    t : float
    h : float, optional
        Base step. Defaults to ``min(0.005, 0.05 / scale)``.
    richardson : bool
        Combine steps ``h`` and ``h/2`` to cancel the ``O(h^2)`` error.
    return_decay : bool
        Also return ``|G_+(t)|``. A small value means the initial state has
        been forgotten; no threshold is imposed here.

    Returns
    -------
    float, or (float, float) with ``return_decay``
    """
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return (float(initial[0]), 0.0) if return_decay else float(initial[0])
    if h is None:
        h = min(0.005, 0.05 / bath.sd.scale)
    n = max(int(math.ceil(t / h)), 4)
    val, decay = _transient_on_grid(bath, osc, initial, t, n)
    if richardson:
        fine, decay = _transient_on_grid(bath, osc, initial, t, 2 * n)
        val = (4.0 * fine - val) / 3.0
    return (val, decay) if return_decay else val
