"""
Unit tests for metastable/suites.py

Tests cover:
- Rate formatting
- Hierarchy report documents
- Exit, resolvent and occupation suites on the small fixtures
- State token parsing
"""
from fractions import Fraction

import pytest

from metastable.core.errors import IndexOutOfRange
from metastable.core.plateaux import validate_cycle
from metastable.models import HierarchyReportModel
from metastable.suites import (
    exit_suite,
    fraction_text,
    hierarchy_checks,
    hierarchy_document,
    indicator_basis,
    occupation_suite,
    parse_states,
    resolvent_suite,
    verification_document,
)

pytestmark = pytest.mark.unit


class TestFormatting:
    """Test rate text."""

    def test_fraction(self):
        """Test p/q strings."""
        assert fraction_text(Fraction(1, 4)) == "1/4"
        assert fraction_text(Fraction(3)) == "3/1"

    def test_float(self):
        """Test floats from the fallback path."""
        assert fraction_text(0.25) == "0.25"


class TestHierarchyDocument:
    """Test report assembly."""

    def test_document_validates(self, W_report):
        """Test that the document round-trips through its model."""
        checks = hierarchy_checks(W_report)
        doc = hierarchy_document(W_report, {"settings": {}}, checks)
        model = HierarchyReportModel.model_validate(doc)
        assert model.gamma_stars == [1, 2, 3]
        assert model.levels[0].components == [[0], [1, 2], [3]]
        assert model.levels[1].transient == [1]
        assert model.levels[2].sharp_cycles == [[2, 3, 4]]
        assert all(c.passed for c in model.checks)

    def test_off_diagonal_rates_only(self, W_report):
        """Test that the document lists only positive off-diagonal rates."""
        doc = hierarchy_document(W_report, {})
        assert doc["levels"][0]["rates"] == [[1, 2, "1/2"], [2, 1, "1/2"]]
        assert doc["levels"][2]["rates"] == [[0, 1, "1/4"], [1, 0, "1/4"]]

    def test_check_log(self, W_report, tmp_path):
        """Test that checks are appended to the log as they are recorded."""
        log = tmp_path / "log.jsonl"
        checks = hierarchy_checks(W_report, log)
        assert len(log.read_text(encoding="utf-8").splitlines()) == len(checks)


class TestExitSuite:
    """Test the exit suite."""

    def test_exit_pair_passes(self, exit_pair):
        """Test the flat pair over the default grid."""
        checks = exit_suite(exit_pair, validate_cycle(exit_pair, [0, 1]), [20, 5, 10])
        assert [c.check for c in checks] == [
            "exit/limit", "exit/exact-gap", "exit/exact-gap-monotone", "exit/off-minimal-mass",
        ]
        assert all(c.passed for c in checks)
        assert checks[1].parameters["beta_grid"] == [5, 10, 20]

    def test_off_minimal_mass(self, W):
        """Test that the mass on the high boundary of s2 decays."""
        checks = exit_suite(W, validate_cycle(W, [2]), [10, 15, 20])
        off = next(c for c in checks if c.check == "exit/off-minimal-mass")
        assert off.passed
        assert off.observed[0] > off.observed[-1]

    def test_monte_carlo(self, exit_pair):
        """Test the Monte Carlo record."""
        checks = exit_suite(
            exit_pair, validate_cycle(exit_pair, [0, 1]), [5, 10, 20],
            mc_runs=4000, mc_beta=4.0, seed=2, batch_size=1000,
        )
        mc = checks[-1]
        assert mc.check == "exit/monte-carlo"
        assert set(mc.observed) == {"x1", "x2"}
        assert mc.passed

    def test_verification_document(self, exit_pair):
        """Test the suite report model."""
        checks = exit_suite(exit_pair, validate_cycle(exit_pair, [0, 1]), [0.5])
        report = verification_document("exit", {}, checks)
        assert not report.passed
        assert report.model_dump(by_alias=True)["checks"][1]["pass"] is False


class TestResolventSuite:
    """Test the resolvent suite."""

    def test_indicators(self, W_report):
        """Test one decreasing and one bound record per indicator."""
        level = W_report.level(1)
        assert indicator_basis(level)[1] == [0.0, 1.0, 0.0, 0.0]
        checks = resolvent_suite(W_report.landscape, level, [8, 4, 6])
        assert len(checks) == 8
        assert all(c.passed for c in checks)

    def test_zero_g(self, W_report):
        """Test that a vanishing series counts as decreasing."""
        checks = resolvent_suite(W_report.landscape, W_report.level(2), [4, 6], gs=[[0, 0, 0]])
        assert checks[0].passed


class TestOccupationSuite:
    """Test the occupation suite."""

    def test_occupation_only(self, W_report):
        """Test the occupation record without splits."""
        checks = occupation_suite(W_report.landscape, W_report.level(1), 8.0, n_runs=500, seed=4)
        assert [c.check for c in checks] == ["occupation/outside-valleys"]
        assert checks[0].passed

    def test_split_level_two(self, W_report):
        """Test the split of the transient well between the two ground states."""
        checks = occupation_suite(
            W_report.landscape, W_report.level(2), 5.0, n_runs=200, split_runs=4000, seed=4, batch_size=2000,
        )
        split = next(c for c in checks if c.check == "occupation/first-hit-split")
        assert split.parameters["plateau"] == 1
        assert split.observed["1"]["limit"] == pytest.approx(0.5)
        assert split.passed


class TestParseStates:
    """Test state token parsing."""

    def test_labels_and_ids(self, W):
        """Test mixed labels and ids."""
        assert parse_states(W, ["s1", " 4", ""]) == [1, 4]

    def test_unknown(self, W):
        """Test that unknown tokens raise IndexOutOfRange."""
        with pytest.raises(IndexOutOfRange):
            parse_states(W, ["s9"])
        with pytest.raises(IndexOutOfRange):
            parse_states(W, ["7"])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
