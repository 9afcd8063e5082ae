import subprocess
import sys

import pytest

from ocforget.cli import main
from ocforget.lab import fixture_root
from ocforget.ocf import format_ocf, parse_ocf

P01 = fixture_root() / "proofs" / "P01" / "input.ocf"
P02 = fixture_root() / "proofs" / "P02"
A01 = fixture_root() / "appendix" / "A01"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestForget:
    def test_conditionalization_output(self, capsys):
        code, out, err = run(capsys, "forget", P01, "--op", "cond", "--formula", "a")
        assert code == 0
        assert out == "sig: a b\nrank 0: !a !b\nrank 1: !a b\n"
        assert "Bel before: a & b" in err

    def test_tautology_leaves_the_file_unchanged(self, capsys):
        code, out, _ = run(capsys, "forget", A01 / "input.ocf", "--op", "c-min", "--formula", "top")
        assert code == 0
        assert out == (A01 / "input.ocf").read_text()

    def test_marginalization_drops_the_atom(self, capsys):
        code, out, _ = run(capsys, "forget", P02 / "input.ocf", "--op", "marg", "--formula", "a")
        assert code == 0
        assert out.splitlines()[0] == "sig: b c"

    def test_output_file_and_strategy(self, capsys, tmp_path):
        target = tmp_path / "post.ocf"
        code, out, _ = run(capsys, "forget", A01 / "input.ocf", "--op", "c-custom:const:1",
                           "--formula", "a", "-o", target)
        assert code == 0 and "Bel after" in out
        assert parse_ocf(target.read_text()).signature.atoms == ("a", "b")

    @pytest.mark.parametrize("argv, code", [
        (["--op", "c-min", "--formula", "bot"], 3),
        (["--op", "c-min", "--formula", "a &"], 2),
        (["--op", "c-min", "--formula", "z"], 2),
        (["--op", "nope", "--formula", "a"], 2),
        (["--formula", "a"], 2),
    ])
    def test_error_codes(self, capsys, argv, code):
        assert run(capsys, "forget", A01 / "input.ocf", *argv)[0] == code

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "forget", tmp_path / "absent", "--op", "marg", "--formula", "a")[0] == 2


class TestQueries:
    def test_bel(self, capsys):
        assert run(capsys, "bel", A01 / "input.ocf")[1] == "a & b\n"

    def test_accepts(self, capsys):
        assert run(capsys, "accepts", A01 / "input.ocf", "(b|a)")[0] == 0
        assert run(capsys, "accepts", A01 / "input.ocf", "(!b|a)")[0] == 1
        assert run(capsys, "accepts", A01 / "input.ocf", "(b|")[0] == 2

    def test_rank(self, capsys):
        assert run(capsys, "rank", A01 / "input.ocf", "!a")[1] == "1\n"
        assert run(capsys, "rank", A01 / "input.ocf", "bot")[1] == "inf\n"

    def test_equiv(self, capsys, tmp_path):
        doubled = tmp_path / "double.ocf"
        doubled.write_text("sig: a b\nrank 0: a b\nrank 2: a !b , !a !b\nrank 4: !a b\n")
        assert run(capsys, "equiv", A01 / "input.ocf", A01 / "input.ocf")[0] == 0
        assert run(capsys, "equiv", A01 / "input.ocf", doubled)[0] == 0
        other = tmp_path / "other.ocf"
        other.write_text("sig: a b\nrank 0: a b\nrank 1: !a b\nrank 2: a !b , !a !b\n")
        assert run(capsys, "equiv", A01 / "input.ocf", other)[0] == 1
        assert run(capsys, "equiv", "--linear", A01 / "input.ocf", other)[0] == 1
        code, out, _ = run(capsys, "equiv", "--linear", A01 / "input.ocf", doubled)
        assert code == 0 and "q = 1/2" in out


class TestCheck:
    def test_success_on_a_fixture(self, capsys):
        assert run(capsys, "check", "AGM3", A01, "--op", "c-rev")[0] == 0

    def test_weak_monotony_violation_names_the_conditional(self, capsys):
        code, out, _ = run(capsys, "check", "W", P02, "--op", "cond", "--formula", "b")
        assert code == 1
        assert "violated" in out and "(!c|top)" in out

    def test_persistence_with_a_split(self, capsys):
        code, _, _ = run(capsys, "check", "EP", "--ocf", A01 / "input.ocf", "--op", "marg",
                         "--formula", "a", "--split", "b | a")
        assert code == 0

    def test_scale_factor_flag(self, capsys):
        argv = ["check", "LEocf", "--ocf", A01 / "input.ocf", "--op", "c-rev", "--formula", "a"]
        assert run(capsys, *argv)[0] == 1
        assert run(capsys, *argv, "--op", "c-custom:rev-xe", "--q", "3")[0] == 0

    def test_witness_file_replay(self, capsys, tmp_path):
        assert run(capsys, "mine", "--postulate", "AGM1", "--op", "cond", "--atoms", "2",
                   "--max-rank", "2", "--witness-dir", tmp_path)[0] == 0
        witness = tmp_path / "cond__AGM1.txt"
        assert run(capsys, "check", "AGM1", witness, "--op", "cond")[0] == 1

    @pytest.mark.parametrize("argv", [
        ["check", "OI", "--ocf", A01 / "input.ocf", "--op", "cond", "--formula", "a"],
        ["check", "AGM1", "--op", "cond", "--formula", "a"],
        ["check", "AGM1", "--ocf", A01 / "input.ocf", "--op", "cond"],
        ["check", "XYZ", "--ocf", A01 / "input.ocf", "--op", "cond", "--formula", "a"],
    ])
    def test_arity_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_domain_error(self, capsys):
        argv = ["check", "AGM1", "--ocf", A01 / "input.ocf", "--op", "c-min", "--formula", "top"]
        assert run(capsys, *argv)[0] in (0, 3)


class TestLab:
    def test_mine_writes_a_witness(self, capsys, tmp_path):
        code, out, _ = run(capsys, "mine", "--postulate", "wE", "--op", "c-nonmin", "--atoms", "2",
                           "--max-rank", "4", "--witness-dir", tmp_path)
        assert code == 0
        assert (tmp_path / "c-nonmin__wE.txt").exists()

    def test_mine_without_witness(self, capsys, tmp_path):
        code, out, _ = run(capsys, "mine", "--postulate", "AGM3", "--op", "c-min", "--atoms", "2",
                           "--max-rank", "2", "--witness-dir", tmp_path)
        assert code == 1 and "no witness" in out
        assert not list(tmp_path.iterdir())

    def test_bounds_are_validated(self, capsys):
        assert run(capsys, "mine", "--postulate", "AGM3", "--op", "c-min", "--atoms", "5")[0] == 2
        assert run(capsys, "matrix", "--op", "bogus")[0] == 2

    def test_partial_matrix(self, capsys, tmp_path):
        code, out, err = run(capsys, "matrix", "--atoms", "2", "--max-rank", "2", "--op", "marg",
                             "--op", "c-min", "--postulate", "W", "--postulate", "CP_S",
                             "--witness-dir", tmp_path)
        assert code == 0
        assert len(out.splitlines()) == 5
        assert "0 mismatches" in err
        assert (tmp_path / "c-min__W.txt").exists()

    def test_fixtures(self, capsys):
        code, out, _ = run(capsys, "fixtures", "--group", "all")
        assert code == 0
        assert len(out.splitlines()) == 21 and "FAIL" not in out


@pytest.mark.parametrize("path", sorted(fixture_root().glob("*/*/input.ocf")))
def test_round_trip(path):
    sections = path.read_text().split("--- ")
    for section in sections:
        body = section.partition("\n")[2] if section is not sections[0] else section
        assert format_ocf(parse_ocf(body, allow_partial=True)) == body


def test_help_and_console_script():
    result = subprocess.run([sys.executable, "-m", "ocforget.cli", "bel", str(A01 / "input.ocf")],
                            capture_output=True, text=True)
    assert result.returncode == 0 and result.stdout == "a & b\n"
    assert main(["--help"]) == 0
    assert main([]) == 2


def test_round_trip_normalizes_comments_and_spacing(capsys, tmp_path):
    messy = tmp_path / "messy.ocf"
    messy.write_text("# prior\nsig:   a  b\n\nrank 1:  !a !b,a !b   # tail\nrank 0: a b\nrank 2: !a b\n")
    code, out, _ = run(capsys, "forget", messy, "--op", "c-min", "--formula", "top")
    assert code == 0
    assert out == (A01 / "input.ocf").read_text()
