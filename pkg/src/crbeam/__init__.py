"""Zero-forcing water-filling toolkit for underlay MU-MISO cognitive downlinks.

A multi-antenna secondary base station serves single-antenna secondary
users in a band occupied by primary users.  The package builds transmit
precoders that null every primary receiver exactly and allocate power
optimally across the residual interference-free channels, simulates the
resulting capacity and bit-error behavior, probes the curvature of the
underlying sum-rate objective, and fits a closed-form predictor of the
rate-maximizing number of served users.
"""

from .model import (
    ChannelSet,
    Precoder,
    ScenarioConfig,
    generate_channels,
    pu_interference,
    sinr,
    sinr_all,
    sum_rate,
)
from .precoders import (
    SCHEMES,
    WaterfillResult,
    mmse_precoder,
    waterfill,
    zf_directions,
    zf_equalpower,
    zf_waterfill,
)
from .analysis import HessianReport, indefiniteness_probe, lagrangian, sumrate_hessian
from .simulation import (
    BerCurve,
    CapacityCurve,
    UserCountPoint,
    optimal_user_count,
    run_ber,
    run_capacity,
)
from .fitting import (
    LinearFit,
    PowerLawFit,
    UserCountFit,
    UserCountSurrogate,
    fit_user_count_surface,
    linear_fit,
    powerlaw_fit,
    user_count_formula,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSet",
    "Precoder",
    "ScenarioConfig",
    "generate_channels",
    "sinr",
    "sinr_all",
    "sum_rate",
    "pu_interference",
    "WaterfillResult",
    "waterfill",
    "zf_directions",
    "zf_waterfill",
    "zf_equalpower",
    "mmse_precoder",
    "SCHEMES",
    "HessianReport",
    "sumrate_hessian",
    "lagrangian",
    "indefiniteness_probe",
    "CapacityCurve",
    "BerCurve",
    "UserCountPoint",
    "run_capacity",
    "run_ber",
    "optimal_user_count",
    "LinearFit",
    "PowerLawFit",
    "UserCountFit",
    "UserCountSurrogate",
    "linear_fit",
    "powerlaw_fit",
    "user_count_formula",
    "fit_user_count_surface",
    "__version__",
]
