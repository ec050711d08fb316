import subprocess
import sys

import pytest

from conftest import fixture_path
from z2nsuper import Atlas, GradedBundle, SplittingIso, load
from z2nsuper.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, Command, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestCheckCocycle:
    def test_pass(self, capsys):
        code, out, _ = run(capsys, "check-cocycle", fixture_path("sign_rules_zsp.atl"))
        assert code == EXIT_OK
        assert out.splitlines()[-1].startswith("# PASS")

    def test_reinterpreted_fails(self, capsys):
        code, out, _ = run(capsys, "check-cocycle", fixture_path("sign_rules_zsp.atl"), "--convention", "parity")
        assert code == EXIT_FAIL
        assert "FAIL cocycle C0 -> C1 -> C2  xi111: -6*xi100*xi010*xi001" in out.splitlines()

    def test_signed_data_passes(self, capsys):
        code, _, _ = run(capsys, "check-cocycle", fixture_path("sign_rules_parity_signs.atl"))
        assert code == EXIT_OK


class TestInputErrors:
    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "check-cocycle", tmp_path / "nope.atl")
        assert code == EXIT_INPUT and err.startswith("error:")

    def test_syntax_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.atl"
        bad.write_text("atlas a n=1\nvars x : (0)\nchart U V\noverlap U V\ntransition U -> V { x' = x + }\n")
        code, _, err = run(capsys, "check-cocycle", bad)
        assert code == EXIT_INPUT and "line 5" in err

    def test_grading_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.atl"
        bad.write_text("atlas a n=1\nvars x : (0)\nvars v : (1)\nchart U V\noverlap U V\n"
                       "transition U -> V { x' = x + v }\n")
        code, _, _ = run(capsys, "check-cocycle", bad)
        assert code == EXIT_INPUT

    def test_wrong_document_kind(self, capsys):
        code, _, _ = run(capsys, "check-cocycle", fixture_path("line_bundle.bdl"))
        assert code == EXIT_INPUT

    def test_tangent_lift_needs_n1(self, capsys):
        code, _, _ = run(capsys, "tangent-lift", fixture_path("twist_theta.atl"))
        assert code == EXIT_INPUT

    def test_bad_k(self):
        with pytest.raises(ValueError):
            Command("split", ["a"], k=0)


class TestTransforms:
    def test_superize_output(self, capsys, tmp_path):
        out = tmp_path / "p.atl"
        code, text, _ = run(capsys, "superize", fixture_path("sign_rules_zsp.atl"), "--convention", "parity", "--out", out)
        assert code == EXIT_OK and text == ""
        atlas = load(out)
        assert isinstance(atlas, Atlas) and atlas.transitions == load(fixture_path("sign_rules_parity_nosign.atl")).transitions

    def test_superize_requires_convention(self, capsys):
        code, _, _ = run(capsys, "superize", fixture_path("sign_rules_zsp.atl"))
        assert code == EXIT_INPUT

    def test_tangent_lift(self, capsys):
        code, out, _ = run(capsys, "tangent-lift", fixture_path("tangent_n1.atl"))
        assert code == EXIT_OK
        assert "  dx' = dx + xi1*dxi2 - xi2*dxi1;" in out.splitlines()

    def test_linearize(self, capsys, tmp_path):
        out = tmp_path / "b.bdl"
        code, _, _ = run(capsys, "linearize", fixture_path("affine_twist.atl"), "--out", out)
        assert code == EXIT_OK and isinstance(load(out), GradedBundle)

    def test_linearize_broken(self, capsys):
        code, _, _ = run(capsys, "linearize", fixture_path("sign_rules_parity_nosign.atl"))
        # the defect sits at order three, so the linear data is still consistent
        assert code == EXIT_OK

    def test_eval(self, capsys):
        code, out, _ = run(capsys, "eval", fixture_path("theta_square.ser"))
        assert code == EXIT_OK
        assert out.splitlines() == ["x^2 - eta*theta - theta^4", "# degree inhomogeneous", "# j-order 0"]

    def test_eval_expression(self, capsys):
        code, out, _ = run(capsys, "eval", fixture_path("theta_square.ser"), "--expr", "xi eta", "--k", "3")
        assert out.splitlines() == ["xi*eta", "# degree (1,1)", "# j-order 2"]


class TestSplitVerify:
    def test_round_trip(self, capsys, tmp_path):
        out = tmp_path / "iso.txt"
        atlas = fixture_path("twist_xieta.atl")
        code, text, _ = run(capsys, "split", atlas, "--k", 4, "--D", 3, "--out", out)
        assert code == EXIT_OK and text.splitlines()[-1] == "# PASS: 14/14 checks passed"
        assert isinstance(load(out), SplittingIso)
        code, text, _ = run(capsys, "verify", atlas, out, "--k", 4)
        assert code == EXIT_OK

    def test_deterministic(self, capsys):
        outputs = {run(capsys, "split", fixture_path("composite3.atl"), "--k", 5)[1] for _ in range(2)}
        assert len(outputs) == 1

    def test_unsolvable(self, capsys):
        code, out, _ = run(capsys, "split", fixture_path("affine_twist.atl"), "--k", 4, "--chart-order", "U,V")
        assert code == EXIT_FAIL and out.startswith("FAIL split")

    def test_verify_wrong_iso(self, capsys, tmp_path):
        out = tmp_path / "iso.txt"
        run(capsys, "split", fixture_path("twist_theta.atl"), "--k", 4, "--out", out)
        code, text, _ = run(capsys, "verify", fixture_path("twist_xieta.atl"), out, "--k", 4)
        assert code == EXIT_FAIL and "FAIL intertwining" in text


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "z2nsuper", "check-cocycle", fixture_path("twist_theta.atl")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "PASS inverse U <-> V" in proc.stdout
