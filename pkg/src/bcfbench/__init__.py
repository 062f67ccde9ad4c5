"""Exponential-sum models of bath correlation functions and exact oscillator benchmarks."""

__version__ = "0.1.0"

from .bath import INF, BathSpec, Filtered, MeierTannorSum, OhmicExp, counter_lambda, eta_hat
from .errors import (
    ConvergenceError,
    FitError,
    InstabilityError,
    NumericalError,
    PoleError,
    QuadratureError,
    RankDeficiencyError,
)
from .fitting import (
    AAAFitter,
    ESPRITFitter,
    ExponentialBCF,
    GMTFitter,
    IPParameters,
    SampleGrid,
    aaa_fit,
    delta_L,
    esprit_fit,
    gmt_fit,
    ip_to_exponential,
)
from .oscillator import OscillatorParams, eq_moment, spectral_correlation, transient_q2
