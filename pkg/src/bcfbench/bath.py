"""Spectral densities, thermal baths and the exact bath-side quantities.

Conventions: ``J(w)`` is given for ``w >= 0`` and extended as an odd function.
The bath correlation function is

    L(t) = (1/pi) int_0^inf dw J(w) [coth(beta hbar w / 2) cos(w t) - i sin(w t)],

the friction kernel is ``eta(t) = (2/pi) int_0^inf dw J(w)/w cos(w t)`` and
``eta_hat`` is its Laplace transform.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .errors import PoleError, QuadratureError
from .special import exp_scaled_E, hurwitz_zeta

__all__ = [
    "INF",
    "OhmicExp",
    "MeierTannorSum",
    "Filtered",
    "BathSpec",
    "eval_J",
    "eval_bcf_time",
    "eval_bcf_freq",
    "counter_lambda",
    "eta_time",
    "eta_hat",
    "spectral_density_from_dict",
    "spectral_density_to_dict",
    "bath_from_dict",
    "bath_to_dict",
    "QuadratureError",
    "PoleError",
]

INF = math.inf

# Quadrature cap in units of the frequency scale of the density.
_CAP_FACTOR = 1e3


def _check_finite(omega):
    omega = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(omega)):
        raise ValueError("spectral density needs finite frequencies")
    return omega


# ----------------------------------------------------------------------------
# spectral densities


@dataclass(frozen=True)
class OhmicExp:
    """``J(w) = (pi/2) alpha w_c^(1-s) w^s exp(-w/w_c)``."""

    s: float
    alpha: float
    omega_c: float

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("Ohmicity s must be positive")
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    @property
    def scale(self):
        return self.omega_c

    @property
    def low_exponent(self):
        return self.s

    def J(self, omega):
        w = _check_finite(omega)
        return 0.5 * np.pi * self.alpha * self.omega_c ** (1 - self.s) * w**self.s * np.exp(-w / self.omega_c)

    def J_over_omega_at_zero(self):
        if self.s == 1:
            return 0.5 * np.pi * self.alpha
        return 0.0 if self.s > 1 else INF


@dataclass(frozen=True)
class MeierTannorSum:
    """Generalised Meier-Tannor density, ``J(w) = 4 sum_j Im[c_j w / (mu_j^2 + w^2)]``.

    ``terms`` is a sequence of ``(c_j, mu_j)`` pairs with ``Re(mu_j) > 0``.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(c), complex(mu)) for c, mu in self.terms)
        if not terms:
            raise ValueError("MeierTannorSum needs at least one term")
        for _, mu in terms:
            if not mu.real > 0:
                raise ValueError("Meier-Tannor rates need Re(mu) > 0")
        object.__setattr__(self, "terms", terms)

    @property
    def c(self):
        return np.array([t[0] for t in self.terms])

    @property
    def mu(self):
        return np.array([t[1] for t in self.terms])

    @property
    def scale(self):
        return float(np.max(np.abs(self.mu)))

    @property
    def low_exponent(self):
        return 1.0

    def J(self, omega):
        w = np.asarray(_check_finite(omega), dtype=complex)
        c, mu = self.c, self.mu
        val = 4 * np.imag(c * w[..., None] / (mu**2 + w[..., None] ** 2)).sum(axis=-1)
        return val

    def J_analytic(self, omega):
        """Analytic continuation of ``J`` to complex frequency."""
        w = np.asarray(omega, dtype=complex)[..., None]
        c, mu = self.c, self.mu
        return (-2j * (c * w / (mu**2 + w**2) - np.conj(c) * w / (np.conj(mu) ** 2 + w**2))).sum(axis=-1)

    def J_over_omega_at_zero(self):
        return float(4 * np.imag(self.c / self.mu**2).sum())


@dataclass(frozen=True)
class Filtered:
    """``J(w) = |J_base(w) - f(w)|`` with a Gaussian notch ``f``.

    ``f(w) = fraction * J_base(w_f) * exp(-(w - w_f)^2 / (2 sigma_f^2))``.
    """

    base: object
    fraction: float
    omega_f: float
    sigma_f: float

    def __post_init__(self):
        if not self.sigma_f > 0:
            raise ValueError("filter width must be positive")

    @property
    def amplitude(self):
        return self.fraction * float(self.base.J(self.omega_f))

    @property
    def scale(self):
        return max(self.base.scale, self.omega_f + 10 * self.sigma_f)

    @property
    def low_exponent(self):
        return self.base.low_exponent

    def J(self, omega):
        w = _check_finite(omega)
        f = self.amplitude * np.exp(-((w - self.omega_f) ** 2) / (2 * self.sigma_f**2))
        return np.abs(self.base.J(w) - f)

    def J_over_omega_at_zero(self):
        return self.base.J_over_omega_at_zero()

    def breakpoints(self):
        return [max(self.omega_f - 5 * self.sigma_f, 0.0), self.omega_f, self.omega_f + 5 * self.sigma_f]


@dataclass(frozen=True)
class BathSpec:
    """Spectral density plus inverse temperature (``INF`` for zero temperature)."""

    sd: object
    beta: float = INF
    hbar: float = 1.0

    def __post_init__(self):
        beta = INF if self.beta in ("inf", "Infinity", None) else float(self.beta)
        if not beta > 0:
            raise ValueError("beta must be positive or INF")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "beta", beta)

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)

    def matsubara(self, n):
        """Matsubara frequencies ``2 pi n / (beta hbar)``."""
        return 2 * np.pi * np.asarray(n) / (self.beta * self.hbar)

    # convenience wrappers
    def L(self, t):
        return eval_bcf_time(self, t)

    def FL(self, omega):
        return eval_bcf_freq(self, omega)

    def eta_hat(self, s):
        return eta_hat(self, s)

    @cached_property
    def lam(self):
        return counter_lambda(self.sd)


def eval_J(sd, omega):
    """Spectral density at ``omega >= 0``."""
    w = _check_finite(omega)
    if np.any(w < 0):
        raise ValueError("eval_J expects omega >= 0; apply J(-w) = -J(w) explicitly")
    return sd.J(w)


def _J_odd(sd, omega):
    w = np.asarray(omega, dtype=float)
    return np.sign(w) * sd.J(np.abs(w))


# ----------------------------------------------------------------------------
# quadrature helpers


def _quad(f, a, b, what, epsabs=1e-13, epsrel=1e-12, **kw):
    val, err, *info = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=400, full_output=1, **kw)
    if len(info) >= 2 and err > max(1e3 * epsabs, 1e-8 * abs(val)):
        raise QuadratureError(f"{what}: quadrature did not converge (err={err:.2e})", val, err)
    return val


def _segments(sd, lo, hi):
    """Geometric breakpoints on ``[lo, hi]`` plus any feature points of ``sd``."""
    pts = {lo, hi}
    x = lo if lo > 0 else 1e-3 * sd.scale
    while x < hi:
        pts.add(x)
        x *= 4.0
    for p in getattr(sd, "breakpoints", lambda: [])():
        if lo < p < hi:
            pts.add(p)
    return sorted(pts)


def _half_line(sd, g, what, weight=None, wvar=None, start=0.0):
    """Integrate ``g(w)`` over ``[start, cap]`` where ``g`` behaves like ``w^p`` near 0.

    ``p`` is passed as ``g.power`` (defaults to 0).  Singular powers near the
    origin are handled by QUADPACK's algebraic weight on the first segment.
    """
    cap = _CAP_FACTOR * sd.scale
    power = getattr(g, "power", 0.0)
    total = 0.0
    lo = start
    if start == 0.0:
        first = 1e-3 * sd.scale
        if weight is not None and wvar:
            first = min(first, 0.5 / abs(wvar))
        if power != 0.0 and power != int(power):
            def smooth(w):
                w = max(w, 1e-200)  # QAWS samples the endpoint itself
                return g(w) / w**power * (1.0 if weight is None else _wfun(weight, wvar, w))

            total += _quad(smooth, 0.0, first, what, weight="alg", wvar=(power, 0.0))
        else:
            total += _quad(lambda w: g(w) * (1.0 if weight is None else _wfun(weight, wvar, w)), 0.0, first, what)
        lo = first
    pts = _segments(sd, lo, cap)
    for a, b in zip(pts[:-1], pts[1:]):
        if weight is not None and wvar:
            total += _quad(g, a, b, what, weight=weight, wvar=wvar)
        else:
            total += _quad(g, a, b, what)
    return total


def _wfun(weight, wvar, w):
    return np.cos(wvar * w) if weight == "cos" else np.sin(wvar * w)


class _Integrand:
    def __init__(self, fn, power=0.0):
        self.fn = fn
        self.power = power

    def __call__(self, w):
        return self.fn(w)


# ----------------------------------------------------------------------------
# correlation function


def _bcf_ohmic(bath, t):
    sd = bath.sd
    s, a, wc = sd.s, sd.alpha, sd.omega_c
    if bath.zero_temperature:
        return 0.5 * a * wc**2 * gamma_fn(s + 1) * (1 + 1j * wc * t) ** (-(s + 1))
    x = bath.beta * bath.hbar * wc
    z = (1 - 1j * wc * t) / x
    pref = a * wc**2 * gamma_fn(s + 1) / (2 * x ** (s + 1))
    return pref * (hurwitz_zeta(s + 1, np.conj(z)) + hurwitz_zeta(s + 1, z + 1))


def _coth_factor(bath, w):
    if bath.zero_temperature:
        return np.ones_like(w)
    return 1.0 / np.tanh(0.5 * bath.beta * bath.hbar * w)


def _bcf_quad(bath, t):
    sd = bath.sd
    p = sd.low_exponent
    re_power = p if bath.zero_temperature else p - 1.0
    re_f = _Integrand(lambda w: sd.J(w) * _coth_factor(bath, w), re_power)
    im_f = _Integrand(lambda w: sd.J(w), p)
    if t == 0:
        re = _half_line(sd, re_f, "Re L(0)")
        return re / np.pi + 0j
    re = _half_line(sd, re_f, "Re L(t)", weight="cos", wvar=t)
    im = _half_line(sd, im_f, "Im L(t)", weight="sin", wvar=t)
    return (re - 1j * im) / np.pi


def eval_bcf_time(bath, t):
    """Bath correlation function ``L(t)`` for ``t >= 0``.

    Uses the Hurwitz-zeta closed form for :class:`OhmicExp` and adaptive
    quadrature of the defining integral otherwise.

    Parameters
    ----------
    bath : BathSpec
    t : float or array_like
        Non-negative times.

    Returns
    -------
    complex or ndarray of complex
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise ValueError("eval_bcf_time needs finite t >= 0")
    if isinstance(bath.sd, OhmicExp):
        out = np.asarray(_bcf_ohmic(bath, t_arr.ravel()), dtype=complex).reshape(t_arr.shape)
        out = np.where(t_arr == 0, out.real + 0j, out)
    else:
        out = np.array([_bcf_quad(bath, float(x)) for x in t_arr.ravel()], dtype=complex).reshape(t_arr.shape)
    return out[()] if out.ndim == 0 else out


def eval_bcf_freq(bath, omega):
    """Fourier transform ``F[L](w) = 2 J(w) / (1 - exp(-beta hbar w))``.

    Raises
    ------
    PoleError
        At ``w = 0`` for finite temperature when ``J(w)/w`` diverges.
    """
    w = _check_finite(omega)
    J = _J_odd(bath.sd, w)
    if bath.zero_temperature:
        out = np.where(w > 0, 2 * J, 0.0)
    else:
        x = bath.beta * bath.hbar * w
        # expm1 overflows to -inf for large negative x, where the limit is 0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = 2 * J / (-np.expm1(-x))
        if np.any(w == 0):
            lim = bath.sd.J_over_omega_at_zero()
            if math.isinf(lim):
                raise PoleError("F[L] diverges at w = 0 for this spectral density")
            out = np.where(w == 0, 2 * lim / (bath.beta * bath.hbar), out)
    return out[()] if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------------
# friction kernel and counter term


def counter_lambda(sd):
    """Counter-term strength ``lambda = (1/pi) int_0^inf J(w)/w dw``."""
    if isinstance(sd, OhmicExp):
        return 0.5 * sd.alpha * sd.omega_c * gamma_fn(sd.s)
    if isinstance(sd, MeierTannorSum):
        return float(2 * np.imag(sd.c / sd.mu).sum())
    if sd.low_exponent <= 0:
        raise ValueError("counter term diverges for s <= 0")
    f = _Integrand(lambda w: sd.J(w) / w, sd.low_exponent - 1.0)
    return _half_line(sd, f, "lambda") / np.pi


def eta_time(bath_or_sd, t):
    """Friction kernel ``eta(t) = (2/pi) int_0^inf J(w)/w cos(w t) dw``."""
    sd = getattr(bath_or_sd, "sd", bath_or_sd)
    t_arr = np.asarray(t, dtype=float)
    if isinstance(sd, OhmicExp):
        out = sd.alpha * sd.omega_c * gamma_fn(sd.s) * np.real((1 + 1j * sd.omega_c * t_arr) ** (-sd.s))
    elif isinstance(sd, MeierTannorSum):
        tt = np.abs(t_arr)[..., None]
        out = 4 * np.imag((sd.c / sd.mu) * np.exp(-sd.mu * tt)).sum(axis=-1)
    else:
        f = _Integrand(lambda w: sd.J(w) / w, sd.low_exponent - 1.0)
        vals = []
        for x in np.abs(t_arr).ravel():
            if x == 0:
                vals.append(_half_line(sd, f, "eta(0)"))
            else:
                vals.append(_half_line(sd, f, "eta(t)", weight="cos", wvar=float(x)))
        out = 2 / np.pi * np.array(vals).reshape(t_arr.shape)
    return out[()] if np.ndim(out) == 0 else out


def _eta_hat_ohmic1(sd, s):
    a, wc = sd.alpha, sd.omega_c
    s = np.atleast_1d(s)
    out = np.empty(s.shape, dtype=complex)
    zero = s == 0
    real = (s.imag == 0) & ~zero
    imag = (s.real == 0) & ~zero
    other = ~(zero | real | imag)
    out[zero] = 0.5 * np.pi * a
    if np.any(real):
        x = 1j * s[real].real / wc
        out[real] = -a * np.imag(exp_scaled_E(x))
    if np.any(imag):
        # s = -i w
        x = -s[imag].imag / wc
        im = 0.5 * a * np.real(exp_scaled_E(x) - exp_scaled_E(-x))
        out[imag] = 0.5 * np.pi * a * np.exp(-np.abs(x)) + 1j * im
    if np.any(other):
        p = s[other] / wc
        out[other] = a / 2j * (exp_scaled_E(-1j * p) - exp_scaled_E(1j * p))
    return out


def _eta_hat_mt(sd, s):
    c, mu = sd.c, sd.mu
    ss = s[..., None]
    val = c / (mu * (ss + mu)) - np.conj(c) / (np.conj(mu) * (ss + np.conj(mu)))
    return -2j * val.sum(axis=-1)


def _eta_hat_quad(sd, s):
    p = sd.low_exponent - 1.0
    if s == 0:
        lim = sd.J_over_omega_at_zero()
        if math.isinf(lim):
            raise PoleError("eta_hat(0) diverges for this spectral density")
        return complex(lim)
    if s.imag == 0:
        x = s.real
        f = _Integrand(lambda w: sd.J(w) / w / (w * w + x * x), p)
        return complex(2 * x / np.pi * _half_line(sd, f, "eta_hat(s)"))
    if s.real == 0:
        w0 = -s.imag
        aw = abs(w0)
        re = float(sd.J(aw)) / aw
        im = np.sign(w0) * _pv_integral(sd, aw)
        return complex(re, -2 * aw / np.pi * im)
    # general complex s in the right half-plane
    fr = _Integrand(lambda w: np.real(s / (w * w + s * s)) * sd.J(w) / w, p)
    fi = _Integrand(lambda w: np.imag(s / (w * w + s * s)) * sd.J(w) / w, p)
    return complex(2 / np.pi * _half_line(sd, fr, "eta_hat(s)"), 2 / np.pi * _half_line(sd, fi, "eta_hat(s)"))


def _pv_integral(sd, w0):
    """``p.v. int_0^inf (J(w)/w) / (w^2 - w0^2) dw`` for ``w0 > 0``."""
    p = sd.low_exponent - 1.0
    g = lambda w: sd.J(w) / w
    lo, hi = 0.5 * w0, 2.0 * w0
    # Cauchy weight around the pole: int f(w)/(w - w0) with f = g/(w + w0)
    total = _quad(lambda w: g(w) / (w + w0), lo, hi, "p.v. integral", weight="cauchy", wvar=w0)
    inner = _Integrand(lambda w: g(w) / (w * w - w0 * w0), p)
    if p != 0.0 and p != int(p):
        def smooth(w):
            w = max(w, 1e-200)
            return g(w) / w**p / (w * w - w0 * w0)

        total += _quad(smooth, 0.0, lo, "p.v. integral", weight="alg", wvar=(p, 0.0))
    else:
        total += _quad(inner, 0.0, lo, "p.v. integral")
    cap = _CAP_FACTOR * max(sd.scale, w0)
    pts = sorted({hi, cap, *[x for x in _segments(sd, hi, cap)]})
    for a, b in zip(pts[:-1], pts[1:]):
        total += _quad(inner, a, b, "p.v. integral")
    return total


def eta_hat(bath_or_sd, s, method="auto"):
    """Laplace transform of the friction kernel for ``Re(s) >= 0``.

    Parameters
    ----------
    bath_or_sd : BathSpec or spectral density
    s : complex or array_like
    method : {"auto", "quad"}
        ``"quad"`` forces the quadrature branch (used for cross-checks).

    Returns
    -------
    complex or ndarray of complex

    Notes
    -----
    On the imaginary axis ``s = -i w`` the real part is exactly ``J(w)/w``
    and the imaginary part is a principal-value integral.
    """
    sd = getattr(bath_or_sd, "sd", bath_or_sd)
    s_arr = np.asarray(s, dtype=complex)
    if np.any(s_arr.real < 0):
        raise ValueError("eta_hat is defined for Re(s) >= 0")
    if method == "auto" and isinstance(sd, OhmicExp) and sd.s == 1:
        out = _eta_hat_ohmic1(sd, np.atleast_1d(s_arr)).reshape(s_arr.shape)
    elif method == "auto" and isinstance(sd, MeierTannorSum):
        out = _eta_hat_mt(sd, s_arr)
    else:
        out = np.array([_eta_hat_quad(sd, complex(x)) for x in s_arr.ravel()], dtype=complex).reshape(s_arr.shape)
    return out[()] if out.ndim == 0 else out


# ----------------------------------------------------------------------------
# JSON round trip


def spectral_density_from_dict(d):
    kind = d.get("type")
    if kind == "ohmic_exp":
        return OhmicExp(float(d["s"]), float(d["alpha"]), float(d["omega_c"]))
    if kind == "meier_tannor":
        terms = [(complex(*t["c"]), complex(*t["mu"])) for t in d["terms"]]
        return MeierTannorSum(tuple(terms))
    if kind == "filtered":
        flt = d["filter"]
        return Filtered(spectral_density_from_dict(d["base"]), float(flt["fraction"]), float(flt["omega_f"]), float(flt["sigma_f"]))
    raise ValueError(f"unknown spectral density type {kind!r}")


def spectral_density_to_dict(sd):
    if isinstance(sd, OhmicExp):
        return {"type": "ohmic_exp", "s": sd.s, "alpha": sd.alpha, "omega_c": sd.omega_c}
    if isinstance(sd, MeierTannorSum):
        return {"type": "meier_tannor", "terms": [{"c": [c.real, c.imag], "mu": [m.real, m.imag]} for c, m in sd.terms]}
    if isinstance(sd, Filtered):
        return {
            "type": "filtered",
            "base": spectral_density_to_dict(sd.base),
            "filter": {"fraction": sd.fraction, "omega_f": sd.omega_f, "sigma_f": sd.sigma_f},
        }
    raise TypeError(f"cannot serialise {type(sd).__name__}")


def bath_from_dict(d):
    """Build a :class:`BathSpec` from its JSON form.

    The spectral density keys sit at the top level next to ``beta`` and
    ``hbar``, or under ``"sd"``.
    """
    sd_part = d.get("sd", d)
    beta = d.get("beta", "inf")
    beta = INF if beta in ("inf", "Infinity", None) else float(beta)
    return BathSpec(spectral_density_from_dict(sd_part), beta, float(d.get("hbar", 1.0)))


def bath_to_dict(bath):
    out = spectral_density_to_dict(bath.sd)
    out["beta"] = "inf" if bath.zero_temperature else bath.beta
    out["hbar"] = bath.hbar
    return out
