"""Special functions needed by the closed-form bath expressions.

Both functions are vectorised over their complex argument. ``scipy.special``
covers neither case well enough: ``zeta`` only takes a real shift and ``exp1``
loses about six digits for large ``|z|`` away from the axes.
"""

import numpy as np
from scipy.special import bernoulli, gammaln

__all__ = ["hurwitz_zeta", "exp_integral_E", "exp_scaled_E"]

_EULER_GAMMA = 0.57721566490153286061

# Euler-Maclaurin settings: explicit terms before the tail and number of
# Bernoulli corrections.  With Re(a) + N >= 20 the remainder is below 1e-16
# for the exponents used here (s <= ~5).
_EM_SHIFT = 20
_EM_ORDER = 10
_B2J = bernoulli(2 * _EM_ORDER)[2::2]


def hurwitz_zeta(s, a):
    """Hurwitz zeta function ``sum_k (a + k)^(-s)`` for real ``s > 1``.

    Parameters
    ----------
    s : float
        Real exponent, must exceed 1.
    a : complex or array_like
        Shift parameter with ``Re(a) > 0``.

    Returns
    -------
    complex or ndarray
        Same shape as ``a``.

    Notes
    -----
    Euler-Maclaurin summation after shifting the argument by ``N`` terms of
    the defining series.
    """
    s = float(s)
    if not s > 1.0:
        raise ValueError(f"hurwitz_zeta needs s > 1, got {s}")
    a_arr = np.asarray(a, dtype=complex)
    if np.any(a_arr.real <= 0):
        raise ValueError("hurwitz_zeta needs Re(a) > 0")

    scalar = a_arr.ndim == 0
    a_arr = np.atleast_1d(a_arr)
    k = np.arange(_EM_SHIFT)
    head = np.sum((a_arr[:, None] + k[None, :]) ** (-s), axis=1)

    w = a_arr + _EM_SHIFT
    tail = w ** (1.0 - s) / (s - 1.0) + 0.5 * w ** (-s)
    # rising product s (s+1) ... (s+2j-2) / (2j)!
    poch = s
    wpow = w ** (-s - 1.0)
    w2 = w ** -2
    for j in range(1, _EM_ORDER + 1):
        coef = _B2J[j - 1] * np.exp(np.log(poch) - gammaln(2 * j + 1))
        tail = tail + coef * wpow
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        wpow = wpow * w2
    out = head + tail
    return out[0] if scalar else out


def _e1_series(z):
    # E1(z) = -gamma - log z - sum_{k>=1} (-z)^k / (k k!)
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for k in range(1, 200):
        term = term * (-z) / k
        inc = term / k
        total = total + inc
        if np.all(np.abs(inc) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return -_EULER_GAMMA - np.log(z) - total


def _e1_contfrac(z):
    # modified Lentz on E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...)))
    # converged entries are dropped from the working set
    tiny = 1e-300
    z = np.asarray(z, dtype=complex)
    b = z + 1.0
    f = np.where(b == 0, tiny, b)
    C = f.copy()
    D = np.zeros_like(z)
    act = np.arange(z.size)
    za, fa, Ca, Da = z.ravel(), f.ravel().copy(), C.ravel(), D.ravel()
    out = fa.copy()
    for n in range(1, 5000):
        an = -float(n * n)
        b = za + 2.0 * n + 1.0
        Da = b + an * Da
        Da = np.where(Da == 0, tiny, Da)
        Ca = b + an / Ca
        Ca = np.where(Ca == 0, tiny, Ca)
        Da = 1.0 / Da
        delta = Ca * Da
        fa = fa * delta
        done = np.abs(delta - 1.0) < 1e-16
        if np.any(done):
            out[act[done]] = fa[done]
            keep = ~done
            act, za, fa, Ca, Da = act[keep], za[keep], fa[keep], Ca[keep], Da[keep]
            if act.size == 0:
                break
    if act.size:
        out[act] = fa
    return np.exp(-z) / out.reshape(z.shape)


def _e1_asymptotic(z):
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, 60):
        term = term * (-k) / z
        total = total + term
        if np.all(np.abs(term) < 1e-17):
            break
    return np.exp(-z) / z * total


def exp_integral_E(z):
    """Exponential integral ``E(z) = p.v. int_0^inf e^{-(x+z)}/(x+z) dx``.

    Equals ``E_1(z)`` off the negative real axis. On the negative real axis
    the principal value is returned, ``E(-x) = -Ei(x)``.

    Parameters
    ----------
    z : complex or array_like
        Nonzero argument.

    Returns
    -------
    complex or ndarray
    """
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr == 0):
        raise ValueError("exp_integral_E has a logarithmic pole at z = 0")
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    out = np.empty_like(z_arr)

    r = np.abs(z_arr)
    neg_real = (z_arr.imag == 0) & (z_arr.real < 0)
    # the series loses about (|z| + Re z)/ln(10) digits to cancellation
    use_series = (r < 4.0) | ((r + z_arr.real < 6.0) & (r < 40.0))
    use_asym = (~use_series) & (z_arr.real < 0) & (r >= 40.0)
    use_cf = ~(use_series | use_asym)

    if np.any(use_series):
        zs = z_arr[use_series]
        val = _e1_series(zs)
        # principal value drops the -i pi picked up by log on the cut
        nr = neg_real[use_series]
        val[nr] = val[nr].real
        out[use_series] = val
    if np.any(use_cf):
        out[use_cf] = _e1_contfrac(z_arr[use_cf])
    if np.any(use_asym):
        val = _e1_asymptotic(z_arr[use_asym])
        nr = neg_real[use_asym]
        val[nr] = val[nr].real
        out[use_asym] = val
    return out[0] if scalar else out


def exp_scaled_E(z):
    """``exp(z) E(z)`` without overflow for large ``|z|``.

    For ``|z| >= 50`` the asymptotic series is summed directly, except in the
    strip ``-36 < Re z < 0`` where the cut contribution ``pi exp(z)`` is not
    yet negligible and the product is formed explicitly.
    """
    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    out = np.empty_like(z_arr)
    asym = (np.abs(z_arr) >= 50.0) & ((z_arr.real >= 0) | (z_arr.real <= -36.0))
    if np.any(asym):
        za = z_arr[asym]
        total = np.ones_like(za)
        term = np.ones_like(za)
        for k in range(1, 60):
            term = term * (-k) / za
            total = total + term
            if np.all(np.abs(term) < 1e-17):
                break
        val = total / za
        # keep the principal value real on the negative axis
        nr = (za.imag == 0) & (za.real < 0)
        val[nr] = val[nr].real
        out[asym] = val
    if np.any(~asym):
        zd = z_arr[~asym]
        out[~asym] = np.exp(zd) * exp_integral_E(zd)
    return out[0] if scalar else out
