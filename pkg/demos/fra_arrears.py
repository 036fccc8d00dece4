"""FRA in arrears against Monte Carlo with a deliberately large volatility (sigma = 0.1, k = 0.007).

Two analytic values are reported: ``ca_analytic`` uses the beta kernel and
``ca_variant`` replaces it by the bare local volatility.  They differ by
the factor exp(-k s) inside the integral and bracket the MC estimate at long
expiries.

    python demos/fra_arrears.py
"""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("fra-arrears", "fra_arrears"))
