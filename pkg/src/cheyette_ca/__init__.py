"""Convexity adjustments under the one-factor Cheyette model, with a Monte Carlo oracle."""

from .adjusters import (
    CaResult,
    Cms,
    FraInArrears,
    Future,
    OisFuture,
    ca_cms,
    ca_fra_arrears,
    ca_future,
    ca_ois_future,
    convexity_adjustment,
    measure_change_adjustment,
    natural_forward_rate,
)
from .closed_form import (
    ca_cms_hw,
    ca_fra_arrears_hw,
    ca_future_hw,
    ca_ois_future_hw,
    convexity_adjustment_hw,
)
from .curves import (
    BasisSpread,
    CurveSet,
    DiscountCurve,
    SwapSchedule,
    annuity,
    df_estimation,
    df_ois,
    forward_rate,
    swap_rates,
)
from .errors import DomainError, NumericError, UsageError
from .kernels import (
    KernelContext,
    annuity_drift_exponent,
    beta,
    dm_bar,
    gamma_kernel,
    nu,
    nu_bar,
    sigma01_frozen,
)
from .mc import (
    McConfig,
    McEstimate,
    PathEnsemble,
    mc_cms,
    mc_forward_benchmark,
    mc_fra_arrears,
    mc_future_rate,
    mc_ois_future,
    simulate,
    state_approx_error,
)
from .model import (
    CheyetteSpec,
    HullWhiteSpec,
    MeanReversion,
    ModelState,
    StateDependentVol,
    TimeDependentVol,
    G,
    bond_reconstruct,
    expected_integrated_short_rate,
    hull_white_volatility,
    tanh_volatility,
    textbook_hull_white_volatility,
    x_bar_drift,
    y_bar,
)

__all__ = [
    "annuity",
    "annuity_drift_exponent",
    "BasisSpread",
    "beta",
    "bond_reconstruct",
    "ca_cms",
    "ca_cms_hw",
    "ca_fra_arrears",
    "ca_fra_arrears_hw",
    "ca_future",
    "ca_future_hw",
    "ca_ois_future",
    "ca_ois_future_hw",
    "CaResult",
    "CheyetteSpec",
    "Cms",
    "convexity_adjustment",
    "convexity_adjustment_hw",
    "CurveSet",
    "df_estimation",
    "df_ois",
    "DiscountCurve",
    "dm_bar",
    "DomainError",
    "expected_integrated_short_rate",
    "forward_rate",
    "FraInArrears",
    "Future",
    "G",
    "gamma_kernel",
    "hull_white_volatility",
    "HullWhiteSpec",
    "KernelContext",
    "mc_cms",
    "mc_forward_benchmark",
    "mc_fra_arrears",
    "mc_future_rate",
    "mc_ois_future",
    "McConfig",
    "McEstimate",
    "MeanReversion",
    "measure_change_adjustment",
    "ModelState",
    "natural_forward_rate",
    "nu",
    "nu_bar",
    "NumericError",
    "OisFuture",
    "PathEnsemble",
    "sigma01_frozen",
    "simulate",
    "state_approx_error",
    "StateDependentVol",
    "swap_rates",
    "SwapSchedule",
    "tanh_volatility",
    "textbook_hull_white_volatility",
    "TimeDependentVol",
    "UsageError",
    "x_bar_drift",
    "y_bar",
]

__version__ = "0.1.0"
