import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from fmt_workbench import textio
from fmt_workbench.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from fmt_workbench.counterexample import build_A, build_B
from fmt_workbench.reports import (
    ReportFormatError,
    as_dict,
    format_tuple,
    parse_bool,
    parse_kv,
    parse_tuple,
    to_kv,
    to_text,
)
from fmt_workbench.structures import Structure, Vocabulary


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def kv(out):
    return dict(parse_kv(out))


@pytest.fixture
def a11(tmp_path):
    path = tmp_path / "A11.struct"
    textio.dump(build_A(1, 1), str(path))
    return path


@pytest.fixture
def unary_pair(tmp_path):
    V = Vocabulary((("P", 1),))
    a, b = tmp_path / "allp.struct", tmp_path / "onep.struct"
    textio.dump(Structure(V, [1, 2], {"P": [1, 2]}), str(a))
    textio.dump(Structure(V, [1, 2], {"P": [1]}), str(b))
    return a, b


# -- report format ----------------------------------------------------------------------


def test_kv_round_trip_examples():
    records = [("command", "x"), ("ok", True), ("count", 3), ("text", "a=b\nc\\d")]
    text = to_kv(records)
    assert text.startswith("fmt-workbench-report 1\n")
    assert "ok=true" in text.splitlines()
    assert parse_kv(text) == [("command", "x"), ("ok", "true"), ("count", "3"), ("text", "a=b\nc\\d")]


@given(st.lists(st.tuples(st.from_regex(r"[a-z][a-z0-9._\[\];,:]{0,12}", fullmatch=True), st.text())))
def test_kv_round_trip_property(records):
    assert parse_kv(to_kv(records)) == records


def test_kv_errors():
    with pytest.raises(ReportFormatError):
        parse_kv("not a report\nx=1\n")
    with pytest.raises(ReportFormatError):
        parse_kv("fmt-workbench-report 2\n")
    with pytest.raises(ReportFormatError):
        parse_kv("fmt-workbench-report 1\nmissing equals\n")
    with pytest.raises(ReportFormatError):
        parse_bool("yes")


def test_small_helpers():
    assert as_dict([("a", False), ("b", "s")]) == {"a": "false", "b": "s"}
    assert format_tuple((3, 14)) == "3,14"
    assert parse_tuple(" 3,14 ") == (3, 14) and parse_tuple("") == ()
    text = to_text("title", [("a", 1), ("long_key", True)])
    assert text.splitlines() == ["title", "-----", "a         1", "long_key  true"]


# -- eval --------------------------------------------------------------------------------


def test_eval_examples(capsys, a11):
    assert run(capsys, "eval", a11, "exists x. P(x)") == (EXIT_OK, "true\n", "")
    assert run(capsys, "eval", a11, "forall x. x = x")[:2] == (EXIT_OK, "true\n")
    assert run(capsys, "eval", a11, "phi", "--k", 1)[:2] == (EXIT_OK, "true\n")
    assert run(capsys, "eval", a11, "xi5", "--k", 1)[:2] == (EXIT_OK, "false\n")


def test_eval_false_is_still_exit_zero(capsys, a11):
    code, out, _ = run(capsys, "eval", a11, "forall x. P(x)", "--format", "kv")
    assert code == EXIT_OK
    assert kv(out)["result"] == "false"


def test_eval_input_errors(capsys, a11, tmp_path):
    code, _, err = run(capsys, "eval", a11, "exists x. P(x")
    assert code == EXIT_INPUT and "position 13" in err
    assert run(capsys, "eval", a11, "Q(c)")[0] == EXIT_INPUT
    assert run(capsys, "eval", tmp_path / "missing.struct", "P(c)")[0] == EXIT_INPUT
    assert run(capsys, "eval", a11, "phi")[0] == EXIT_INPUT
    assert run(capsys, "eval")[0] == EXIT_INPUT
    assert run(capsys, "bogus")[0] == EXIT_INPUT


# -- counterexample -------------------------------------------------------------------------


def test_counterexample_exhaustive(capsys):
    code, out, _ = run(capsys, "counterexample", "--n", 1, "--k", 1, "--exhaustive", "--format", "kv")
    d = kv(out)
    assert code == EXIT_OK
    assert d["strategy_checks"] == "324" and d["strategy_failures"] == "0"
    assert d["passed"] == "true"


def test_counterexample_sample_needs_seed(capsys):
    assert run(capsys, "counterexample", "--n", 1, "--k", 1, "--sample", 10)[0] == EXIT_INPUT
    assert run(capsys, "counterexample", "--n", 1, "--k", 1)[0] == EXIT_INPUT


def test_counterexample_sample_is_byte_identical(capsys):
    argv = ["counterexample", "--n", 3, "--k", 2, "--sample", 500, "--seed", 42, "--format", "kv"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == EXIT_OK
    assert first[1] == second[1]


def test_counterexample_budget(capsys, monkeypatch):
    monkeypatch.setenv("FMT_WORKBENCH_BUDGET", "100")
    assert run(capsys, "counterexample", "--n", 1, "--k", 1, "--exhaustive")[0] == EXIT_BUDGET
    monkeypatch.delenv("FMT_WORKBENCH_BUDGET")
    assert run(capsys, "counterexample", "--n", 2, "--k", 2, "--exhaustive", "--budget", 10)[0] == EXIT_BUDGET


def test_counterexample_exports_and_figures(capsys, tmp_path):
    sdir, fdir = tmp_path / "structs", tmp_path / "figs"
    code, out, _ = run(
        capsys, "counterexample", "--n", 1, "--k", 1, "--exhaustive",
        "--export-structures", sdir, "--figures", fdir, "--format", "kv",
    )
    assert code == EXIT_OK
    d = kv(out)
    assert sorted(os.listdir(sdir)) == ["A_n1_k1.struct", "B_n1_k1_i0.struct", "B_n1_k1_i1.struct"]
    assert textio.load(str(sdir / "A_n1_k1.struct")) == build_A(1, 1)
    assert textio.load(str(sdir / "B_n1_k1_i1.struct")) == build_B(1, 1, 1)
    figures = d["figures"].split()
    assert figures and all((fdir / f).stat().st_size > 0 for f in figures)


# -- game ---------------------------------------------------------------------------------


def test_game_spoiler_example(capsys, unary_pair):
    a, b = unary_pair
    code, out, _ = run(capsys, "game", a, b, "--k", 0, "--n", 1, "--format", "kv")
    d = kv(out)
    assert code == EXIT_FAIL
    assert d["game.winner"] == "spoiler" and d["certificate_ok"] == "true"


def test_game_reflexive(capsys, unary_pair):
    a, _ = unary_pair
    assert run(capsys, "game", a, a, "--k", 1, "--n", 1)[0] == EXIT_OK


def test_game_budget(capsys, a11):
    assert run(capsys, "game", a11, a11, "--k", 2, "--n", 2, "--budget", 1000)[0] == EXIT_BUDGET


def test_family_game_certificate_round_trip(capsys, tmp_path):
    d = tmp_path / "s"
    run(capsys, "counterexample", "--n", 1, "--k", 1, "--exhaustive", "--skip-literal",
        "--export-structures", d)
    A, B0, B1 = (d / "A_n1_k1.struct", d / "B_n1_k1_i0.struct", d / "B_n1_k1_i1.struct")
    code, out, _ = run(capsys, "game", A, B0, B1, "--k", 1, "--n", 1, "--certificate", "--format", "kv")
    assert code == EXIT_OK
    assert kv(out)["game.winner"] == "duplicator"
    report = tmp_path / "game.kv"
    report.write_text(out)
    assert run(capsys, "check-certificate", report, A, B0, B1)[0] == EXIT_OK
    # the family certificate does not survive against a single target
    assert run(capsys, "check-certificate", report, A, B0)[0] == EXIT_FAIL
    lines = out.splitlines()
    j = next(i for i, line in enumerate(lines) if line.startswith("cert.response[5;4]="))
    lines[j] = "cert.response[5;4]=2"
    report.write_text("\n".join(lines) + "\n")
    assert run(capsys, "check-certificate", report, A, B0, B1)[0] == EXIT_FAIL


def test_check_certificate_needs_table(capsys, tmp_path, unary_pair):
    a, b = unary_pair
    _, out, _ = run(capsys, "game", a, b, "--k", 1, "--n", 1, "--format", "kv")
    report = tmp_path / "r.kv"
    report.write_text(out)
    assert run(capsys, "check-certificate", report, a, b)[0] == EXIT_INPUT


# -- transfer, build, preserve -------------------------------------------------------------


def test_transfer(capsys):
    code, out, _ = run(capsys, "transfer", "--n", 1, "--k", 0, "--format", "kv")
    d = kv(out)
    assert code == EXIT_OK
    assert d["family_game.winner"] == "duplicator"
    assert d["phi_prenex.prefix"] == "∃^1∀^3"


def test_build_round_trips(capsys, tmp_path):
    code, out, _ = run(capsys, "build", "B", "--n", 1, "--k", 1, "--istar", 0)
    assert code == EXIT_OK and textio.loads(out) == build_B(1, 1, 0)
    assert run(capsys, "build", "B", "--n", 1, "--k", 1)[0] == EXIT_INPUT
    assert run(capsys, "build", "B", "--n", 1, "--k", 1, "--istar", 5)[0] == EXIT_INPUT
    path = tmp_path / "star.struct"
    assert run(capsys, "build", "star", "--leaves", 3, "-o", path)[0] == EXIT_OK
    assert len(textio.load(str(path))) == 4


def test_preserve_crux_on_star(capsys, tmp_path):
    star = tmp_path / "star13.struct"
    run(capsys, "build", "star", "--leaves", 3, "-o", star)
    code, out, _ = run(capsys, "preserve", "crux", "--structure", star, "--formula", "domset1",
                       "--k", 1, "--format", "kv")
    d = kv(out)
    assert code == EXIT_OK
    assert d["crux_count"] == "1" and d["crux.0"] == "{1}"
    assert run(capsys, "preserve", "crux", "--structure", star, "--formula", "domset1",
               "--k", 1, "--candidate", "2")[0] == EXIT_FAIL


def test_preserve_duality_exists_p(capsys):
    code, out, _ = run(capsys, "preserve", "duality", "--formula", "exists x. P(x)", "--family", "all",
                       "--max-size", 3, "--k", 1, "--format", "kv")
    d = kv(out)
    assert code == EXIT_OK and d["holds"] == "true" and d["family_size"] == "14"


def test_preserve_hereditary_failure_is_recheckable(capsys, tmp_path):
    host = tmp_path / "h.struct"
    textio.dump(Structure(Vocabulary((("P", 1),)), [1, 2], {"P": [1]}), str(host))
    code, out, _ = run(capsys, "preserve", "hereditary", "--formula", "exists x. P(x)",
                       "--family", "lattice", "--structure", host, "--format", "kv")
    d = kv(out)
    assert code == EXIT_FAIL and d["holds"] == "false"
    model = textio.loads(d["counterexample.model"] + "\n")
    sub = parse_tuple(d["counterexample.subset"])
    from fmt_workbench.logic import evaluate, parse
    from fmt_workbench.structures import induced_substructure

    f = parse("exists x. P(x)", model.vocab)
    assert evaluate(model, f) and not evaluate(induced_substructure(model, sub), f)


def test_preserve_hereditary_small_lattice(capsys):
    code, out, _ = run(capsys, "preserve", "hereditary", "--formula", "phi", "--k", 0,
                       "--family", "A1,0-lattice", "--format", "kv")
    assert code == EXIT_OK and kv(out)["checked"] == "128"


def test_preserve_cover(capsys, tmp_path):
    host = tmp_path / "t.struct"
    textio.dump(Structure(Vocabulary((("P", 1),)), [1, 2, 3], {"P": [1]}), str(host))
    base = ["preserve", "cover", "--structure", host, "--k", 2]
    assert run(capsys, *base, "--member", "1,2", "--member", "2,3", "--member", "1,3")[0] == EXIT_OK
    assert run(capsys, *base, "--member", "1,2", "--member", "2,3")[0] == EXIT_FAIL
    assert run(capsys, *base)[0] == EXIT_INPUT


def test_preserve_usage_errors(capsys):
    assert run(capsys, "preserve", "duality", "--family", "all", "--max-size", 2, "--k", 1)[0] == EXIT_INPUT
    assert run(capsys, "preserve", "duality", "--formula", "domset1", "--family", "nope",
               "--max-size", 2, "--k", 1)[0] == EXIT_INPUT
    assert run(capsys, "preserve", "duality", "--formula", "domset1", "--family", "all", "--k", 1)[0] == EXIT_INPUT


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "fmt_workbench", "counterexample", "--n", "1", "--k", "0",
         "--exhaustive", "--format", "kv"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert dict(parse_kv(proc.stdout))["passed"] == "true"
