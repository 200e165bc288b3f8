"""Tests for the seeded property suites."""

from __future__ import annotations

import pytest

from channel_lab.models.reports import OptimizerConfig
from channel_lab.services.suites import SUITES, run_suite


@pytest.mark.parametrize("name", ["weyl", "fvdg", "swap", "polarize", "degradable"])
def test_fast_suites_pass(name: str) -> None:
    """Cheap suites pass with a reduced optimizer budget."""

    cfg = OptimizerConfig(seed=3, restarts=6, max_iters=300)
    report = run_suite(name, 3, cfg)
    assert report.suite == name
    assert report.seed == 3
    assert report.checks
    failed = [check.name for check in report.checks if not check.passed]
    assert report.passed, f"failed checks: {failed}"


@pytest.mark.slow
@pytest.mark.parametrize(
    "name", ["monotonicity", "multiplicativity", "ci2qcd", "antidegradable", "mixed-unitary", "protocol"]
)
def test_full_budget_suites_pass(name: str) -> None:
    """The remaining suites pass for seed 1 with the default optimizer budget."""

    report = run_suite(name, 1)
    failed = [check.name for check in report.checks if not check.passed]
    assert report.passed, f"failed checks: {failed}"
    if name == "multiplicativity":
        samples = {check.name: check.samples for check in report.checks}
        assert samples["diamond-matches-unitary-oracle"] == 50


def test_weyl_suite_sizes() -> None:
    """Four dimensions, 50 random states each, held to the exact tolerance."""

    report = run_suite("weyl", 2, OptimizerConfig(seed=2))
    samples = {check.name: check.samples for check in report.checks}
    assert samples == {
        "weyl-orthogonality": 4,
        "depolarizing-is-weyl-average": 200,
        "controlled-weyl-uniform-control": 200,
    }
    assert all(check.allowed == 1e-10 for check in report.checks)


def test_suite_checks_count_their_samples() -> None:
    """Each check records how many samples it saw and stays within its allowance."""

    report = run_suite("weyl", 5, OptimizerConfig(seed=5, restarts=4, max_iters=200))
    for check in report.checks:
        assert check.samples > 0
        assert check.worst <= check.allowed


def test_every_named_suite_is_registered() -> None:
    """The registry names every suite the verify command accepts."""

    assert set(SUITES) == {
        "weyl",
        "fvdg",
        "monotonicity",
        "multiplicativity",
        "swap",
        "ci2qcd",
        "degradable",
        "antidegradable",
        "mixed-unitary",
        "polarize",
        "protocol",
    }


def test_unknown_suite_is_rejected() -> None:
    """Unknown suite names are input errors."""

    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("teleportation", 0)
