"""Compounded and averaged overnight-rate futures against Monte Carlo.

Hull-White with sigma = 0.01, k = 0.003, 3-month accrual periods.  With a
time-dependent volatility the formulas are exact, so the MC gap is pure noise
and shrinks like 1/sqrt(paths).  Plain (non-antithetic) sampling is used
because antithetic pairs make the averaged payoff exact and its SE zero.

    python demos/ois_futures.py [--paths N]
"""

import sys

from _common import run

if __name__ == "__main__":
    extra = sys.argv[1:]
    codes = [run("ois-future", "ois_compounding", *extra), run("ois-future", "ois_average", *extra)]
    sys.exit(max(codes))
