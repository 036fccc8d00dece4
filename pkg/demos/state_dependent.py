"""Generic adjusters on a model with no closed form: piecewise mean reversion, tanh volatility, basis curve.

Every product is priced by quadrature of the kernels and compared with the
Euler Monte Carlo oracle.  The estimation curve carries a tenor-dependent
basis, so the MC adjustment is measured against the forward-measure value of
the fixing rather than the time-zero curve forward.  With a state-dependent volatility the kernels
freeze the state, so gaps of a few percent of the adjustment are expected.

    python demos/state_dependent.py
"""

from cheyette_ca import Cms, FraInArrears, Future, McConfig, OisFuture, convexity_adjustment, natural_forward_rate
from cheyette_ca.config import build_spec, load_config
from cheyette_ca.mc import mc_rate
from _common import HERE

if __name__ == "__main__":
    cfg = load_config(HERE / "configs" / "basis_curve_futures.json", "futures")
    spec = build_spec(cfg)
    mc = McConfig(paths=50_000, steps_per_year=100, seed=42)
    products = [
        Future(2.0, 2.0, 2.25),
        OisFuture(2.0, 2.25, "compounding"),
        FraInArrears(2.0, 2.5),
        Cms.regular(2.0, 5.0, payment_lag=1.0),
    ]
    print(f"{'product':<34}{'analytic':>12}{'mc':>12}{'mc_se':>11}{'z':>7}")
    for p in products:
        res = convexity_adjustment(spec, p)
        est = mc_rate(spec, mc, p)
        ca_mc = est.mean - natural_forward_rate(spec.curve, p)
        z = (res.adjustment - ca_mc) / est.std_error
        print(f"{type(p).__name__ + ' @ 2y':<34}{res.adjustment:12.4e}{ca_mc:12.4e}{est.std_error:11.2e}{z:7.2f}")
