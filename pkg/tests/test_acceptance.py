"""Acceptance gate: the twelve library-level checks, one test each.

Each test prints its check's pass/fail line (run pytest with ``-s`` to
see them inline; they also appear in captured output on failure).  The
full-size Monte Carlo check runs 1000 dispersed descents under the
compiled backend; under the pure-NumPy fallback it keeps the same
statistical gate on a 150-run batch so the suite stays practical.
"""

import pytest

from gtland._accel import NUMBA_ENABLED
from gtland import verification


@pytest.fixture(scope="module", autouse=True)
def _warm():
    verification.warm_up()


def _run(check_id: str, **kwargs) -> None:
    fn = verification._CHECK_FNS[check_id]
    passed, detail, elapsed = fn(**kwargs)
    result = verification.CheckResult(
        check_id, dict(verification.CHECKS)[check_id], passed, detail,
        elapsed)
    print(result.line())
    assert passed, result.line()


def test_01_analytic_solution_matches_integration_oracle():
    _run("analytic")


def test_02_field_angle_solver_matches_bisection_oracle():
    _run("rootfind")


def test_03_field_angle_stays_above_line_of_sight():
    _run("los")


def test_04_tracking_law_identities_on_random_states():
    _run("identities")


def test_05_error_rig_matches_power_law_decay():
    _run("decay")


def test_06_disturbed_error_stays_under_closed_form_bound():
    _run("bound")


def test_07_reference_scenarios_match_expected_fuel_and_attitude():
    _run("scenarios")


def test_08_scenario3_honors_glide_slope():
    _run("glide")


def test_09_baseline_law_matches_expected_fuel():
    _run("zemzev")


def test_10_downrange_sweep_shape_and_ordering():
    _run("sweep")


def test_11_dispersed_runs_land_reliably():
    _run("montecarlo", n=1000 if NUMBA_ENABLED else 150)


def test_12_command_envelope_fuzz():
    _run("envelope")
