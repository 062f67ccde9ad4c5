"""Exponential-sum models of the bath correlation function.

A model is ``L_mod(t) = sum_k d_k exp(-z_k t)`` for ``t >= 0`` with a rate set
closed under complex conjugation. Builders: ESPRIT (time domain), AAA
(frequency domain), GMT&FIT (Meier-Tannor fit of Im L plus fitted Matsubara
terms) and conversion of interacting-pseudomode parameters.

The estimator classes at the bottom wrap the builders with a scikit-learn
style ``fit``/``predict`` interface.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy import integrate, optimize
from scipy.interpolate import AAA
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .bath import MeierTannorSum, eval_bcf_freq, eval_bcf_time
from .errors import FitError, RankDeficiencyError

__all__ = [
    "ExponentialBCF",
    "SampleGrid",
    "IPParameters",
    "time_grid",
    "frequency_grid",
    "esprit_fit",
    "aaa_fit",
    "subohmic_frequency_grid",
    "gmt_fit",
    "ip_to_exponential",
    "delta_L",
    "model_from_dict",
    "model_to_dict",
    "ESPRITFitter",
    "AAAFitter",
    "GMTFitter",
]

_PAIR_TOL = 1e-10


def _pair_conjugates(z, tol=_PAIR_TOL):
    """Permutation ``sigma`` with ``z[sigma[k]] == conj(z[k])``; -1 if missing."""
    z = np.asarray(z, dtype=complex)
    scale = np.maximum(np.abs(z), 1.0)
    sigma = -np.ones(len(z), dtype=int)
    used = np.zeros(len(z), dtype=bool)
    for k in range(len(z)):
        if sigma[k] >= 0:
            continue
        dist = np.abs(z - np.conj(z[k])) / scale
        dist[used] = np.inf
        j = int(np.argmin(dist)) if len(z) else -1
        if j >= 0 and dist[j] <= tol:
            sigma[k], sigma[j] = j, k
            used[k] = used[j] = True
    return sigma


def _close_under_conjugation(d, z, tol=_PAIR_TOL):
    """Append zero-amplitude partners for rates whose conjugate is absent."""
    d = np.asarray(d, dtype=complex)
    z = np.asarray(z, dtype=complex)
    sigma = _pair_conjugates(z, tol)
    missing = np.where(sigma < 0)[0]
    if len(missing):
        d = np.concatenate([d, np.zeros(len(missing), dtype=complex)])
        z = np.concatenate([z, np.conj(z[missing])])
    return d, z


@dataclass(frozen=True)
class ExponentialBCF:
    """Model ``L_mod(t) = sum_k d_k exp(-z_k t)`` with a conjugation-closed rate set.

    Parameters
    ----------
    d, z : array_like of complex
        Amplitudes and rates; ``Re(z_k) > 0``.
    conjugate_map : array_like of int, optional
        ``z[conjugate_map[k]] == conj(z[k])``. Computed when omitted.
    meta : dict
        Free-form fit metadata.
    """

    d: np.ndarray
    z: np.ndarray
    conjugate_map: np.ndarray = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.d, dtype=complex))
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if d.shape != z.shape or d.ndim != 1:
            raise ValueError("d and z must be 1-d arrays of equal length")
        if np.any(z.real <= 0):
            raise ValueError("all rates need Re(z) > 0")
        if self.conjugate_map is None:
            sigma = _pair_conjugates(z)
        else:
            sigma = np.asarray(self.conjugate_map, dtype=int)
        if np.any(sigma < 0) or sorted(sigma) != list(range(len(z))):
            raise ValueError("rate set is not closed under complex conjugation")
        if not np.allclose(z[sigma], np.conj(z), rtol=1e-8, atol=1e-12):
            raise ValueError("conjugate_map does not pair conjugate rates")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "conjugate_map", sigma)

    @classmethod
    def closed(cls, d, z, meta=None, tol=_PAIR_TOL):
        """Build a model, appending zero-amplitude conjugate partners if needed."""
        d, z = _close_under_conjugation(d, z, tol)
        return cls(d, z, meta=dict(meta or {}))

    @property
    def K(self):
        return len(self.z)

    @property
    def d_bar(self):
        """Amplitudes of ``L_mod(t)^*`` in the same basis."""
        return np.conj(self.d[self.conjugate_map])

    def __call__(self, t):
        """Evaluate ``L_mod(t)``; negative times use ``L(-t) = L(t)^*``."""
        t = np.asarray(t, dtype=float)
        tt = np.abs(t)[..., None]
        val = (self.d * np.exp(-self.z * tt)).sum(axis=-1)
        return np.where(t < 0, np.conj(val), val)

    def fourier(self, omega):
        """``F[L_mod](w) = 2 Re sum_k d_k / (z_k - i w)``."""
        w = np.asarray(omega, dtype=float)[..., None]
        return 2 * np.real(self.d / (self.z - 1j * w)).sum(axis=-1)

    def scaled(self, factor):
        return ExponentialBCF(self.d * factor, self.z, self.conjugate_map, dict(self.meta))


def model_to_dict(model):
    return {
        "terms": [{"d": [float(d.real), float(d.imag)], "z": [float(z.real), float(z.imag)]} for d, z in zip(model.d, model.z)],
        "meta": dict(model.meta),
    }


def model_from_dict(obj):
    d = [complex(*t["d"]) for t in obj["terms"]]
    z = [complex(*t["z"]) for t in obj["terms"]]
    return ExponentialBCF(np.array(d), np.array(z), meta=dict(obj.get("meta", {})))


@dataclass(frozen=True)
class SampleGrid:
    """Sampled data in the time or frequency domain."""

    domain: str
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.domain not in ("time", "frequency"):
            raise ValueError("domain must be 'time' or 'frequency'")
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        if pts.shape != vals.shape or pts.ndim != 1:
            raise ValueError("points and values must be 1-d of equal length")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def equidistant(self):
        if len(self.points) < 3:
            return True
        h = np.diff(self.points)
        return bool(np.allclose(h, h[0], rtol=1e-9, atol=0))

    @property
    def spacing(self):
        return float(self.points[1] - self.points[0])


@dataclass(frozen=True)
class IPParameters:
    """Interacting-pseudomode parameters ``(omega, kappa, g)``."""

    omega_matrix: np.ndarray
    kappa: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        om = np.atleast_2d(np.asarray(self.omega_matrix, dtype=float))
        ka = np.atleast_1d(np.asarray(self.kappa, dtype=float))
        g = np.atleast_1d(np.asarray(self.g, dtype=float))
        Q = len(ka)
        if om.shape != (Q, Q) or g.shape != (Q,):
            raise ValueError("IP parameter shapes disagree")
        if not np.allclose(om, om.T, atol=1e-12):
            raise ValueError("omega_matrix must be symmetric")
        if np.any(ka <= 0):
            raise ValueError("kappa must be positive")
        object.__setattr__(self, "omega_matrix", om)
        object.__setattr__(self, "kappa", ka)
        object.__setattr__(self, "g", g)

    @property
    def omega_tilde(self):
        return self.omega_matrix - 0.5j * np.diag(self.kappa)


# ----------------------------------------------------------------------------
# data grids


def time_grid(bath, dt=0.01, t_max=20.0):
    """Equidistant samples of ``L(t)`` on ``[0, t_max)``."""
    t = dt * np.arange(int(round(t_max / dt)))
    return SampleGrid("time", t, eval_bcf_time(bath, t))


def frequency_grid(bath, d_omega=0.1, omega_max=300.0, exclude_zero=True):
    """Equidistant samples of ``F[L](w)`` on ``[-omega_max, omega_max)``."""
    n = int(round(omega_max / d_omega))
    w = d_omega * np.arange(-n, n)
    if exclude_zero:
        w = w[w != 0]
    return SampleGrid("frequency", w, eval_bcf_freq(bath, w))


def subohmic_frequency_grid(bath, omega_max=300.0, N_log=100, cap=50.0, d_omega=0.1, omega1=(-0.1, 0.13)):
    """Five-region frequency grid for a spectrum that diverges at ``w = 0``.

    The outer regions use spacing ``d_omega``; the inner regions carry
    ``N_log`` logarithmically spaced points between ``omega1`` and the
    frequencies where ``F[L]`` reaches ``cap``. The divergent centre is left
    out.

    Returns
    -------
    grid : SampleGrid
    endpoints : tuple
        ``(omega_l0, omega_r0)``.
    """
    if bath.zero_temperature:
        raise ValueError("sub-Ohmic grid needs finite temperature")
    w1_l, w1_r = omega1

    def excess(w):
        return float(eval_bcf_freq(bath, w)) - cap

    ends = []
    for w1 in (w1_l, w1_r):
        if excess(w1) > 0:
            ends.append(None)
            continue
        # walk towards zero until the spectrum exceeds the cap
        lo = w1
        found = None
        for _ in range(200):
            nxt = lo / 2.0
            if excess(nxt) > 0:
                found = optimize.brentq(excess, nxt, lo, xtol=1e-16, rtol=1e-14)
                break
            lo = nxt
        ends.append(found)

    n = int(round(omega_max / d_omega))
    w_eq = d_omega * np.arange(-n, n)
    if ends[0] is None or ends[1] is None:
        warnings.warn("cap never reached; falling back to an equidistant grid", RuntimeWarning)
        w = w_eq[w_eq != 0]
        return SampleGrid("frequency", w, eval_bcf_freq(bath, w)), (None, None)

    w_l0, w_r0 = ends
    outer = w_eq[(w_eq < w1_l) | (w_eq > w1_r)]
    inner_r = np.exp(np.linspace(np.log(w_r0), np.log(w1_r), N_log))
    inner_l = -np.exp(np.linspace(np.log(-w_l0), np.log(-w1_l), N_log))
    w = np.unique(np.concatenate([outer, inner_l, inner_r]))
    return SampleGrid("frequency", w, eval_bcf_freq(bath, w)), (w_l0, w_r0)


# ----------------------------------------------------------------------------
# ESPRIT


def _hankel(y, rows):
    cols = len(y) - rows + 1
    return la.hankel(y[:rows], y[rows - 1 : rows - 1 + cols])


def _esprit_rates(channels, K, dt, max_rows=2000):
    """Rates shared by the real signals in ``channels``.

    All channels are stacked side by side so their column spaces combine.
    Real data gives a real rotation matrix and hence conjugate-paired
    eigenvalues.
    """
    N = len(channels[0])
    rows = min(N // 2, max_rows)
    Hs = np.hstack([_hankel(np.asarray(c), rows) for c in channels])
    U, sv, _ = la.svd(Hs, full_matrices=False, lapack_driver="gesdd")
    if sv[0] == 0:
        return None, sv
    rank = int(np.sum(sv > 1e-13 * sv[0]))
    if K > rank:
        raise RankDeficiencyError(f"K={K} exceeds the numerical rank {rank} of the data")
    Uk = U[:, :K]
    Phi = la.lstsq(Uk[:-1], Uk[1:])[0]
    lam = la.eigvals(Phi)
    z = -np.log(lam.astype(complex)) / dt
    return z, sv


def _vandermonde_lsq(t, y, z):
    V = np.exp(-np.outer(t, z))
    d, *_ = la.lstsq(V, y)
    return d


def esprit_fit(grid, K, max_rows=2000):
    """ESPRIT fit of equidistant ``L(t_n)`` samples with ``K`` exponentials.

    Rates are estimated jointly from ``Re L`` and ``Im L`` so that the rate
    set is closed under conjugation. Amplitudes then follow from complex
    linear least squares. Rates with ``Re z <= 0`` are reflected into the
    right half-plane and the amplitudes refitted.

    Parameters
    ----------
    grid : SampleGrid
        Time-domain samples starting anywhere, equally spaced.
    K : int
    max_rows : int
        Upper bound on the Hankel row count (``N // 2`` otherwise).

    Returns
    -------
    ExponentialBCF
        ``meta`` records ``reflected`` (number of reflected rates) and the
        rotational solve used.
    """
    if grid.domain != "time":
        raise ValueError("esprit_fit needs time-domain samples")
    if not grid.equidistant:
        raise ValueError("esprit_fit needs equidistant samples")
    K = int(K)
    if K < 1 or len(grid.points) < 2 * K:
        raise ValueError("need K >= 1 and at least 2K samples")
    t, y = grid.points, grid.values
    dt = grid.spacing
    channels = [y.real, y.imag] if np.any(y.imag != 0) else [y.real]
    z, sv = _esprit_rates(channels, K, dt, max_rows)
    meta = {"method": "esprit", "rotation_solve": "least-squares", "reflected": 0}
    if z is None:
        # zero signal: any stable rate with zero amplitude
        z = np.ones(K, dtype=complex)
        return ExponentialBCF.closed(np.zeros(K), z, meta)
    unstable = z.real <= 0
    if np.any(unstable):
        warnings.warn(f"ESPRIT returned {unstable.sum()} unstable rate(s); reflecting", RuntimeWarning)
        z = np.where(unstable, np.maximum(np.abs(z.real), 1e-12) + 1j * z.imag, z)
        meta["reflected"] = int(unstable.sum())
    d = _vandermonde_lsq(t - t[0], y, z) * np.exp(z * t[0]) if t[0] != 0 else _vandermonde_lsq(t, y, z)
    return ExponentialBCF.closed(d, z, meta)


# ----------------------------------------------------------------------------
# AAA


def _fourier_basis(w, z):
    # columns for Re d and Im d of 2 Re[d / (z - i w)]
    g = 1.0 / (z[None, :] - 1j * w[:, None])
    return np.hstack([2 * g.real, -2 * g.imag])


def _refit_fourier(w, F, z):
    A = _fourier_basis(w, z)
    coef, *_ = la.lstsq(A, F.real)
    K = len(z)
    return coef[:K] + 1j * coef[K:]


def aaa_fit(grid, K_target, tol=1e-13):
    """AAA rational fit of ``F[L](w_j)`` samples turned into exponentials.

    Parameters
    ----------
    grid : SampleGrid
        Frequency-domain samples with divergent points removed.
    K_target : int
        Degree budget: the rational function has at most ``2 K_target``
        poles, so roughly ``K_target`` of them fall in the lower half-plane.
    tol : float
        AAA relative tolerance.

    Returns
    -------
    ExponentialBCF

    Notes
    -----
    Lower half-plane poles ``w_p`` become rates ``z = i w_p``. Upper
    half-plane poles are dropped, the rate set is closed under conjugation,
    and amplitudes are refitted by linear least squares on the grid.
    """
    if grid.domain != "frequency":
        raise ValueError("aaa_fit needs frequency-domain samples")
    w, F = grid.points, grid.values.real
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        r = AAA(w, F, rtol=tol, max_terms=2 * int(K_target) + 1, clean_up=True)
    poles = r.poles()
    lower = poles[poles.imag < 0]
    if len(lower) < 1:
        raise FitError("AAA produced no stable poles")
    z = 1j * lower
    d0 = np.zeros_like(z)
    d0, z = _close_under_conjugation(d0, z)
    d = _refit_fourier(w, F, z)
    resid = float(np.max(np.abs(2 * np.real(d / (z[None, :] - 1j * w[:, None])).sum(axis=1) - F)))
    meta = {
        "method": "aaa",
        "n_poles": int(len(poles)),
        "n_discarded_upper": int(np.sum(poles.imag >= 0)),
        "grid_residual": resid,
    }
    return ExponentialBCF.closed(d, z, meta)


# ----------------------------------------------------------------------------
# GMT&FIT


def _gmt_cot_terms(bath_beta, hbar, a, mu):
    """Map an ESPRIT fit ``Im L = sum a_k e^{-mu_k t}`` to full-L amplitudes.

    With ``c_k = -i a_k / 2`` the Meier-Tannor form gives
    ``Re L = 2 sum Im[c_k cot(beta hbar mu_k / 2) e^{-mu_k t}]`` plus the
    Matsubara tail. Re parts are symmetrised over conjugate partners.
    """
    sigma = _pair_conjugates(mu)
    x = a * (1.0 / np.tan(0.5 * bath_beta * hbar * mu))
    re_part = -0.5 * (x + np.conj(x[sigma]))
    im_part = 1j * 0.5 * (a + np.conj(a[sigma]))
    return re_part + im_part


def gmt_fit(bath_or_beta, K_sd, K_matsubara, grid=None, hbar=1.0, maxiter=500):
    """Two-step GMT&FIT model.

    Step 1 fits ``Im L(t)`` with ``K_sd`` exponentials (ESPRIT), which fixes a
    generalised Meier-Tannor spectral density. Step 2 adds ``K_matsubara``
    real exponentials fitted to the remaining ``Re L`` by L-BFGS-B with
    ``gamma_n > 0``.

    Parameters
    ----------
    bath_or_beta : BathSpec or float
        Bath (used to sample ``L`` when ``grid`` is omitted) or its ``beta``.
    K_sd, K_matsubara : int
    grid : SampleGrid, optional
        Time samples of the exact ``L``.

    Returns
    -------
    ExponentialBCF
        ``meta`` holds ``step1_residual``, ``optimizer_success`` and the
        Meier-Tannor parameters.
    """
    if hasattr(bath_or_beta, "sd"):
        beta, hbar = bath_or_beta.beta, bath_or_beta.hbar
        if grid is None:
            grid = time_grid(bath_or_beta)
    else:
        beta = float(bath_or_beta)
        if grid is None:
            raise ValueError("pass a time grid when only beta is given")
    if math.isinf(beta):
        raise ValueError("GMT&FIT needs finite temperature")
    t, y = grid.points, grid.values

    im_grid = SampleGrid("time", t, y.imag.astype(complex))
    step1 = esprit_fit(im_grid, K_sd)
    mu, a = step1.z, step1.d
    step1_res = float(np.max(np.abs(step1(t).real - y.imag)))

    d_gmt = _gmt_cot_terms(beta, hbar, a, mu)
    gmt = ExponentialBCF(d_gmt, mu)
    resid = y.real - gmt(t).real
    c = -0.5j * a
    sd = MeierTannorSum(tuple(zip(c, mu)))

    n = np.arange(1, K_matsubara + 1)
    nu = 2 * np.pi * n / (beta * hbar)
    b0 = np.real(2j * sd.J_analytic(1j * nu) / (beta * hbar))
    x0 = np.concatenate([b0, nu])

    scale = max(float(np.max(np.abs(y.real))), 1e-300)

    def fun(x):
        b, g = x[:K_matsubara], x[K_matsubara:]
        E = np.exp(-np.outer(t, g))
        r = (E @ b - resid) / scale
        f = float(r @ r)
        grad_b = 2 * (E.T @ r) / scale
        grad_g = -2 * b * ((E * t[:, None]).T @ r) / scale
        return f, np.concatenate([grad_b, grad_g])

    success = True
    if K_matsubara > 0:
        bounds = [(None, None)] * K_matsubara + [(1e-8, None)] * K_matsubara
        res = optimize.minimize(fun, x0, jac=True, method="L-BFGS-B", bounds=bounds,
                                options={"maxiter": maxiter, "ftol": 1e-15, "gtol": 1e-12})
        success = bool(res.success)
        if not success:
            warnings.warn(f"Matsubara fit did not converge: {res.message}", RuntimeWarning)
        b, g = res.x[:K_matsubara], res.x[K_matsubara:]
        d_all = np.concatenate([d_gmt, b.astype(complex)])
        z_all = np.concatenate([mu, g.astype(complex)])
    else:
        d_all, z_all = d_gmt, mu
    meta = {
        "method": "gmt",
        "K_sd": int(K_sd),
        "K_matsubara": int(K_matsubara),
        "step1_residual": step1_res,
        "optimizer_success": success,
        "mt_terms": [[complex(ci).real, complex(ci).imag, complex(m).real, complex(m).imag] for ci, m in zip(c, mu)],
    }
    return ExponentialBCF.closed(d_all, z_all, meta)


# ----------------------------------------------------------------------------
# interacting pseudomodes


def ip_to_exponential(ip, hbar=1.0):
    """Convert ``L_mod(t) = g^T exp(-i omega_tilde t) g / hbar`` to exponentials.

    Diagonalising ``omega_tilde = S Lambda S^{-1}`` gives
    ``d_k = (g^T S)_k (S^{-1} g)_k / hbar`` and ``z_k = i Lambda_k``.
    Conjugate partners missing from the spectrum are added with zero
    amplitude.
    """
    wt = ip.omega_tilde
    lam, S = la.eig(wt)
    if np.linalg.cond(S) > 1e12:
        raise np.linalg.LinAlgError("omega_tilde is (numerically) defective")
    Sinv = la.inv(S)
    d = (ip.g @ S) * (Sinv @ ip.g) / hbar
    z = 1j * lam
    return ExponentialBCF.closed(d, z, {"method": "ip-convert", "Q": int(len(ip.g))})


# ----------------------------------------------------------------------------
# error metric


def delta_L(bath, model, t_f=30.0, n_points=3001):
    """Time-averaged relative deviation ``(1/t_f) int_0^t_f |L - L_mod| / |L(0)| dt``.

    ``bath`` may also be a callable returning exact ``L(t)``.
    """
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    n_points = max(int(n_points), 3001)
    if n_points % 2 == 0:
        n_points += 1
    t = np.linspace(0.0, t_f, n_points)
    L = bath(t) if callable(bath) and not hasattr(bath, "sd") else eval_bcf_time(bath, t)
    L0 = abs(L[0])
    if L0 == 0:
        raise ValueError("delta_L needs L(0) != 0")
    dev = np.abs(L - model(t)) / L0
    return float(integrate.simpson(dev, x=t) / t_f)


# ----------------------------------------------------------------------------
# estimator wrappers


def _check_1d(x, name, dtype=float):
    x = np.asarray(x, dtype=dtype)
    if x.ndim == 2 and 1 in x.shape:
        x = x.ravel()
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def _check_xy(x, y, y_dtype=complex):
    x = _check_1d(x, "X")
    y = _check_1d(y, "y", y_dtype)
    if len(x) != len(y):
        raise ValueError("X and y lengths differ")
    return x, y


class ESPRITFitter(RegressorMixin, BaseEstimator):
    """Estimator wrapper around :func:`esprit_fit`.

    ``fit(t, L)`` takes equidistant times and complex samples; ``predict``
    evaluates the fitted model.
    """

    def __init__(self, K=8, max_rows=2000):
        self.K = K
        self.max_rows = max_rows

    def fit(self, X, y):
        t, L = _check_xy(X, y)
        self.model_ = esprit_fit(SampleGrid("time", t, L), self.K, self.max_rows)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.model_(_check_1d(X, "X"))

    def score(self, X, y):
        """Negative mean relative deviation ``-mean|y - y_mod| / |y[0]|``."""
        t, L = _check_xy(X, y)
        return -float(np.mean(np.abs(self.predict(t) - L)) / max(abs(L[0]), 1e-300))


class AAAFitter(RegressorMixin, BaseEstimator):
    """Estimator wrapper around :func:`aaa_fit` on ``(omega, F[L])`` samples."""

    def __init__(self, K=8, tol=1e-13):
        self.K = K
        self.tol = tol

    def fit(self, X, y):
        w, F = _check_xy(X, y, float)
        self.model_ = aaa_fit(SampleGrid("frequency", w, F), self.K, self.tol)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.model_.fourier(_check_1d(X, "X"))


class GMTFitter(RegressorMixin, BaseEstimator):
    """Estimator wrapper around :func:`gmt_fit` on time samples of ``L``."""

    def __init__(self, K_sd=8, K_matsubara=2, beta=1.0, hbar=1.0, maxiter=500):
        self.K_sd = K_sd
        self.K_matsubara = K_matsubara
        self.beta = beta
        self.hbar = hbar
        self.maxiter = maxiter

    def fit(self, X, y):
        t, L = _check_xy(X, y)
        grid = SampleGrid("time", t, L)
        self.model_ = gmt_fit(self.beta, self.K_sd, self.K_matsubara, grid=grid, hbar=self.hbar, maxiter=self.maxiter)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.model_(_check_1d(X, "X"))
