"""
Tests for the janus command-line interface.
"""

import io
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import mock

import numpy as np

from dual_update.console_script import (
    EXIT_ERROR,
    EXIT_INCOMPATIBLE,
    EXIT_NO_JPD,
    EXIT_OK,
    EXIT_SIGNALING,
    SEED_ENV,
    main,
    parse_tolerances,
    resolve_seed,
)
from dual_update.report import parse_records
from dual_update.tolerances import DEFAULT_SEED

DATA = Path(__file__).parent / "data"


def run(*argv):
    """Run main on records output and return (status, records)."""
    out = io.StringIO()
    with redirect_stdout(out):
        status = main(["--format", "records", *argv])
    return status, parse_records(out.getvalue())


def of_kind(records, kind):
    return [r for r in records if r["kind"] == kind]


class TestEprCommand(unittest.TestCase):
    """Test the photon-pair table."""

    def test_golden_records(self):
        """Test aligned polarizers against the stored output."""
        status, records = run("epr", "--angle-a", "0", "--angle-b", "0")
        self.assertEqual(status, EXIT_OK)
        expected = parse_records((DATA / "epr_zero.records").read_text())
        self.assertEqual(len(records), len(expected))
        for got, want in zip(records, expected):
            self.assertEqual(set(got), set(want))
            for key, value in want.items():
                if isinstance(value, list):
                    np.testing.assert_allclose(got[key], value, atol=1e-9)
                elif isinstance(value, float):
                    self.assertAlmostEqual(got[key], value, delta=1e-9)
                else:
                    self.assertEqual(got[key], value)

    def test_thirty_degrees(self):
        """Test p(+,+) = cos²(30°)/2."""
        status, records = run("epr", "--angle-a", "30", "--angle-b", "0")
        self.assertEqual(status, EXIT_OK)
        joint = {(r["x"], r["y"]): r["p"] for r in of_kind(records, "joint")}
        self.assertAlmostEqual(joint[(1, 1)], 0.375, delta=1e-12)
        self.assertAlmostEqual(sum(joint.values()), 1.0, delta=1e-12)

    def test_with_trials(self):
        """Test that --trials appends a sampled summary."""
        status, records = run("epr", "--angle-a", "10", "--trials", "50", "--seed", "3")
        self.assertEqual(status, EXIT_OK)
        summary = of_kind(records, "summary")[0]
        self.assertEqual(summary["trials"], 50)
        self.assertEqual(summary["seed"], 3)
        self.assertEqual(of_kind(records, "trial"), [])
        self.assertEqual(sum(r["count"] for r in of_kind(records, "cell")), 50)

    def test_tables_printed(self):
        """Test the default human output."""
        out = io.StringIO()
        with redirect_stdout(out):
            main(["epr", "--angle-a", "0"])
        text = out.getvalue()
        self.assertIn("polarizers a=0 deg, b=0 deg", text)
        self.assertIn("kind=joint", text)


class TestUpdateCommand(unittest.TestCase):
    """Test the Lüders update command."""

    def test_bell_update(self):
        """Test the collapse of a Bell-type state."""
        status, records = run("update", "--scenario", str(DATA / "bell.scn"), "A", "0")
        self.assertEqual(status, EXIT_OK)
        self.assertAlmostEqual(of_kind(records, "born")[0]["p"], 0.5, delta=1e-12)
        post = [r for r in of_kind(records, "state") if r["stage"] == "post"][0]
        np.testing.assert_allclose(np.abs(post["vector"]), [0, 1, 0, 0], atol=1e-12)
        site2 = [r for r in of_kind(records, "marginal") if r["stage"] == "post" and r["site"] == 2][0]
        np.testing.assert_allclose(site2["matrix"], [0, 0, 0, 1], atol=1e-12)

    def test_product_marginal_unchanged(self):
        """Test that updating site 1 of a product state leaves site 2 alone."""
        status, records = run("update", "--scenario", str(DATA / "product.scn"), "A", "0")
        self.assertEqual(status, EXIT_OK)
        site2 = {r["stage"]: r["matrix"] for r in of_kind(records, "marginal") if r["site"] == 2}
        np.testing.assert_allclose(site2["post"], site2["pre"], atol=1e-12)

    def test_zero_probability(self):
        """Test that conditioning on an impossible outcome fails."""
        with self.assertLogs("dual_update.console_script", level="ERROR") as logs:
            status, _ = run("update", "--scenario", str(DATA / "product.scn"), "A", "1")
        self.assertEqual(status, EXIT_ERROR)
        self.assertIn("zero-probability outcome", logs.output[0])

    def test_syntax_error(self):
        """Test that a malformed scenario reports its position."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.scn")
            Path(path).write_text("state:\n  amplitudes = 1 x\n")
            with self.assertLogs("dual_update.console_script", level="ERROR") as logs:
                status, _ = run("update", "--scenario", path, "Z", "1")
        self.assertEqual(status, EXIT_ERROR)
        self.assertIn("line 2", logs.output[0])

    def test_missing_scenario(self):
        """Test the error for an absent --scenario."""
        with self.assertLogs("dual_update.console_script", level="ERROR"):
            status, _ = run("update", "A", "0")
        self.assertEqual(status, EXIT_ERROR)


class TestCompareCommand(unittest.TestCase):
    """Test the classical/quantum comparison command."""

    def test_two_sites(self):
        """Test embedding and two-step reports for two sites."""
        status, records = run("compare", "--scenario", str(DATA / "bell.scn"))
        self.assertEqual(status, EXIT_OK)
        verdicts = {r["report"]: r["passed"] for r in of_kind(records, "verdict")}
        self.assertEqual(verdicts, {"embedding": True, "two-step": True})

    def test_polarizers(self):
        """Test the photon pair with the settings named in the file."""
        status, records = run("compare", "--scenario", str(DATA / "epr.scn"))
        self.assertEqual(status, EXIT_OK)
        self.assertTrue(all(r["passed"] for r in of_kind(records, "compare")))

    def test_compatible_single_system(self):
        """Test commuting observables on one system."""
        status, records = run("compare", "--scenario", str(DATA / "compatible.scn"))
        self.assertEqual(status, EXIT_OK)
        self.assertEqual([r["report"] for r in of_kind(records, "verdict")], ["embedding"])

    def test_incompatible(self):
        """Test that X and Z on one qubit exit with status 3."""
        with self.assertLogs("dual_update.console_script", level="ERROR") as logs:
            status, records = run("compare", "--scenario", str(DATA / "xz_same_site.scn"))
        self.assertEqual(status, EXIT_INCOMPATIBLE)
        self.assertIn("no joint probability distribution", logs.output[0])
        self.assertEqual(of_kind(records, "verdict")[0]["reason"], "no-joint-probability-distribution")

    def test_explicit_names(self):
        """Test --first/--second over the file's task."""
        status, records = run("compare", "--scenario", str(DATA / "bell.scn"),
                              "--first", "AX", "--second", "B")
        self.assertEqual(status, EXIT_OK)
        self.assertGreater(len(of_kind(records, "compare")), 0)


class TestJpdCommand(unittest.TestCase):
    """Test the joint-distribution checker command."""

    def test_product_behavior(self):
        """Test that an independent behavior has a joint distribution."""
        status, records = run("jpd", "--behavior", str(DATA / "behavior_product.beh"))
        self.assertEqual(status, EXIT_OK)
        self.assertTrue(of_kind(records, "verdict")[0]["exists"])
        self.assertEqual(len(of_kind(records, "chsh")), 8)
        witness = of_kind(records, "witness")
        self.assertAlmostEqual(sum(r["p"] for r in witness), 1.0, delta=1e-8)

    def test_optimal_angles(self):
        """Test that the optimal photon-pair angles have no joint distribution."""
        status, records = run("jpd", "--angles", "0", "45", "22.5", "67.5")
        self.assertEqual(status, EXIT_NO_JPD)
        verdict = of_kind(records, "verdict")[0]
        self.assertFalse(verdict["exists"])
        self.assertAlmostEqual(verdict["max_abs"], 2 * np.sqrt(2), delta=1e-8)
        self.assertAlmostEqual(abs(of_kind(records, "violated")[0]["value"]), 2 * np.sqrt(2), delta=1e-8)

    def test_scenario_settings(self):
        """Test settings named under the file's task."""
        status, _ = run("jpd", "--scenario", str(DATA / "epr.scn"))
        self.assertEqual(status, EXIT_NO_JPD)

    def test_signaling(self):
        """Test that a signaling behavior exits with status 5."""
        with self.assertLogs("dual_update.console_script", level="ERROR"):
            status, records = run("jpd", "--behavior", str(DATA / "behavior_signaling.beh"))
        self.assertEqual(status, EXIT_SIGNALING)
        self.assertEqual(of_kind(records, "verdict")[0]["reason"], "signaling")


class TestSampleCommand(unittest.TestCase):
    """Test the sampling command and seed handling."""

    def test_three_trials(self):
        """Test a reproducible three-trial run from the file's task."""
        args = ("sample", "--scenario", str(DATA / "epr.scn"), "--seed", "7")
        status, records = run(*args)
        self.assertEqual(status, EXIT_OK)
        trials = of_kind(records, "trial")
        self.assertEqual([r["i"] for r in trials], [0, 1, 2])
        self.assertEqual(run(*args)[1], records)
        summary = of_kind(records, "summary")[0]
        self.assertEqual((summary["trials"], summary["seed"], summary["mode"]), (3, 7, "direct"))

    def test_seed_from_environment(self):
        """Test that JANUS_SEED matches --seed."""
        args = ("sample", "--scenario", str(DATA / "epr.scn"))
        with mock.patch.dict(os.environ, {SEED_ENV: "7"}):
            from_env = run(*args)[1]
        self.assertEqual(from_env, run(*args, "--seed", "7")[1])

    def test_resolve_seed(self):
        """Test the seed precedence."""
        with mock.patch.dict(os.environ, {SEED_ENV: "0x10"}):
            self.assertEqual(resolve_seed(None), 16)
            self.assertEqual(resolve_seed(5), 5)
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(resolve_seed(None), DEFAULT_SEED)

    def test_aligned_never_disagree(self):
        """Test zero discordant records for equal polarizers."""
        status, records = run("sample", "--scenario", str(DATA / "epr_aligned.scn"),
                              "--trials", "10000", "--summary-only", "--mode", "two-step")
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(of_kind(records, "trial"), [])
        self.assertEqual(of_kind(records, "summary")[0]["discordant"], 0)

    def test_angles_without_scenario(self):
        """Test sampling the photon pair from angles."""
        status, records = run("sample", "--angle-a", "0", "--angle-b", "90", "--trials", "200")
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(of_kind(records, "summary")[0]["discordant"], 200)

    def test_trials_required(self):
        """Test that angles alone need a trial count."""
        with self.assertLogs("dual_update.console_script", level="ERROR"):
            status, _ = run("sample", "--angle-a", "0")
        self.assertEqual(status, EXIT_ERROR)


class TestSpectralCommand(unittest.TestCase):
    """Test the spectral decomposition command."""

    def test_projector_observable(self):
        """Test the two rank-one eigenspaces of a qubit projector."""
        status, records = run("spectral", "--scenario", str(DATA / "bell.scn"), "Z")
        self.assertEqual(status, EXIT_OK)
        spaces = of_kind(records, "eigenspace")
        self.assertEqual([r["eigenvalue"] for r in spaces], [0, 1])
        self.assertEqual([r["rank"] for r in spaces], [1, 1])

    def test_degenerate(self):
        """Test ranks of repeated eigenvalues."""
        status, records = run("spectral", "--scenario", str(DATA / "compatible.scn"), "A")
        self.assertEqual(status, EXIT_OK)
        self.assertEqual([r["rank"] for r in of_kind(records, "eigenspace")], [2, 2])


class TestUsage(unittest.TestCase):
    """Test global options and usage errors."""

    def exit_code(self, *argv):
        with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as cm:
                main(list(argv))
        return cm.exception.code

    def test_usage_errors(self):
        """Test status 2 for malformed command lines."""
        self.assertEqual(self.exit_code(), 2)
        self.assertEqual(self.exit_code("nonsense"), 2)
        self.assertEqual(self.exit_code("--tol", "NOPE=1", "epr"), 2)
        self.assertEqual(self.exit_code("--tol", "FEAS_TOL=-1", "epr"), 2)
        self.assertEqual(self.exit_code("sample", "--trials", "0"), 2)
        self.assertEqual(self.exit_code("sample", "--mode", "sideways"), 2)

    def test_version(self):
        """Test that --version exits cleanly."""
        self.assertEqual(self.exit_code("--version"), 0)

    def test_tolerance_override(self):
        """Test a tolerance override from the command line."""
        tol = parse_tolerances(["ZERO_PROB_TOL=1e-9"])
        self.assertEqual(tol.ZERO_PROB_TOL, 1e-9)
        status, _ = run("--tol", "ZERO_PROB_TOL=1e-9", "epr")
        self.assertEqual(status, EXIT_OK)


if __name__ == "__main__":
    unittest.main()
