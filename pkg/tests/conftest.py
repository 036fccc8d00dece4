import numpy as np
import pytest

from cheyette_ca.curves import BasisSpread, CurveSet, DiscountCurve
from cheyette_ca.model import CheyetteSpec, HullWhiteSpec, MeanReversion, tanh_volatility

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"CRITERION {number} [{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def flat_curve():
    return CurveSet.flat(0.01)


@pytest.fixture
def knot_curve():
    return CurveSet(DiscountCurve.from_knots([(1.0, 0.01), (2.0, 0.012), (5.0, 0.015)]), BasisSpread.from_pairs([(0.0, 0.001), (0.5, 0.002)]))


@pytest.fixture
def hw_futures(flat_curve):
    return HullWhiteSpec(0.015, 0.003).to_cheyette(flat_curve)


@pytest.fixture
def tanh_spec(flat_curve):
    return CheyetteSpec(MeanReversion.constant(0.1), tanh_volatility(0.05, 0.1, 0.5), flat_curve)


@pytest.fixture
def piecewise_spec(knot_curve):
    """Time-dependent vol on piecewise mean reversion, with vol breakpoints."""
    from cheyette_ca.model import TimeDependentVol

    vol = TimeDependentVol(lambda t: np.where(t < 2.0, 0.012, 0.009) * np.exp(-0.01 * t), breakpoints=(2.0,))
    return CheyetteSpec(MeanReversion.from_pairs([(0.0, 0.05), (1.5, 0.02), (4.0, 0.08)]), vol, knot_curve)


def trapezoid(f, a, b, n=1_000_001):
    """Plain composite trapezoid on ``n`` equispaced nodes."""
    x = np.linspace(a, b, n)
    y = f(x)
    h = (b - a) / (n - 1)
    return h * (np.sum(y) - 0.5 * (y[0] + y[-1]))
