import math
import sys

import pytest

from epibench import AnalyticDensity

GAUSS = AnalyticDensity.gaussian(0.0, 1.0)
UNIFORM = AnalyticDensity.uniform(0.0, 1.0)
LAPLACE = AnalyticDensity.laplace(0.0, 1.0)
EXPON = AnalyticDensity.exponential(1.0)
MIXTURE = AnalyticDensity.mixture([0.5, 0.5], [-1.0, 1.0], [0.25, 0.25])

FAMILY_SET = {"gaussian": GAUSS, "uniform": UNIFORM, "laplace": LAPLACE,
              "exponential": EXPON, "mixture": MIXTURE}

HALF_LOG_2PI_E = 0.5 * math.log(2 * math.pi * math.e)


@pytest.fixture(params=list(FAMILY_SET), ids=list(FAMILY_SET))
def family(request):
    return FAMILY_SET[request.param]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
