"""Numeraire martingale checks and the state-approximation error study for a tanh local volatility.

The volatility is 0.05 exp(-0.1 t) (1 + 0.5 tanh x) with k = 0.1.  The CSV lists
E[exp(-int r)] / P(0, T) (should be 1), E[(x - xbar)^2] at each time, and the
log-log slope of the error over t <= 0.4.  The error grows like t^5 at first,
because y - ybar = O(t^1.5) and x - xbar integrates it once more, and it stays
bounded out to 30 years.

    python demos/diagnostics.py
"""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("diagnostics", "diagnostics"))
