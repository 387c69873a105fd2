import pytest

from ggrnd.heston import HestonParams
from ggrnd.rnd import MarketContext

# SPY option series, 63 days to expiry, with its published calibrations
SPY = dict(spot=445.92, rate=0.0016, div_yield=0.0123, dte=63)
SPY_BS_SIGMA = 0.137348
SPY_GG = dict(alpha=0.1554312, sigma=0.1483843)
SPY_HESTON = dict(kappa=15.03132587, theta=0.02793781, eta=2.0, rho=-0.77469470, v0=0.1615**2)


@pytest.fixture
def spy_ctx():
    return MarketContext.from_dte(SPY["spot"], SPY["rate"], SPY["div_yield"], SPY["dte"])


@pytest.fixture
def spy_heston():
    return HestonParams(**SPY_HESTON)


_CRITERIA = {}


def record_criterion(number, passed, detail):
    _CRITERIA[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        passed, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}")
