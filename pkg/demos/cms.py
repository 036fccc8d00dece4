"""CMS convexity adjustment on a 5-year annual swap, fixing in 1-10 years, paid one year after fixing.

Hull-White with sigma = 0.01 and k = 0.0007.  The MC estimator values the
coupon under the payment-date forward measure from simulated states, so it
checks the annuity-measure change, the root-found expansion point and the
payment-ratio derivative together.

    python demos/cms.py
"""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("cms", "cms"))
