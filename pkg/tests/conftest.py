import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import sdf_stability as sd

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def by_model():
    return sd.ez_by_benchmark()


@pytest.fixture(scope="session")
def ssy_model():
    return sd.ez_ssy_benchmark()


@pytest.fixture(scope="session")
def by_wc(by_model):
    return sd.solve_wealth_consumption(by_model)


@pytest.fixture(scope="session")
def ssy_wc_fast(ssy_model):
    # small grid with tight truncation: fast, and w stays on the branch the
    # deterministic anchor selects (wide spans let the volatility corners
    # dominate; see the stochastic-volatility acceptance test)
    return sd.solve_wealth_consumption(
        ssy_model, grid=sd.WcGridSpec(sizes=(7, 5, 5, 3), span=2.0,
                                      gh_nodes=5))


@pytest.fixture(scope="session")
def small_chain():
    return sd.MarkovChain.from_transition(
        [-1.0, 1.0], np.array([[0.5, 0.5], [0.25, 0.75]]))


# Acceptance reporting: tests named test_criterion_* in test_acceptance.py
# produce a one-line verdict each in the terminal summary.

CRITERIA = {
    1: "analytic exactness at the benchmark, 7 significant digits, < 1 ms",
    2: "discretization error < 1e-6 from 7 states, non-increasing to 25",
    3: "15-cell Monte Carlo table within 2e-4 of published means, sd within 2x",
    4: "long-run-risk benchmark mean in [-0.0059, -0.0019], verdict STABLE",
    5: "stochastic-volatility benchmark mean in [-0.0030, 0.0010], sd ~ 8e-4",
    6: "exp(tail exponent) within 1e-6 of spectral radius; p=1 vs p=2 agree",
    7: "bond-price identity discrepancy < 1e-12 on enumerable chains",
    8: "solver verdict flips at the scaling boundary; Neumann sum < 1e-8 off",
    9: "integrated exponent <= spectral exponent, slack >= -1e-12",
    10: "bitwise identical Monte Carlo and sweep output across thread counts",
}


def pytest_terminal_summary(terminalreporter):
    stats = terminalreporter.stats
    lines = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in stats.get(outcome, []):
            name = getattr(rep, "nodeid", "")
            if "test_acceptance" not in name or "test_criterion_" not in name:
                continue
            try:
                num = int(name.split("test_criterion_")[1].split("_")[0])
            except (IndexError, ValueError):
                continue
            lines[num] = "PASS" if outcome == "passed" else outcome.upper()
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(lines):
        desc = CRITERIA.get(num, "")
        terminalreporter.write_line(f"criterion {num:2d} {lines[num]:>4}  {desc}")
