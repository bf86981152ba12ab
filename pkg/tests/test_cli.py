import json
import shutil

import pytest

from qlaws.cli.main import main
from qlaws.cli.parser import parse_program
from qlaws.cli.workspace import ENV_VAR, WorkspaceError, load_workspace


@pytest.fixture
def ws(tmp_path, corpus):
    for f in corpus.iterdir():
        if f.suffix in (".qp", ".json", ".replay"):
            shutil.copy(f, tmp_path / f.name)
    return tmp_path


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def structured(capsys, *args):
    code, out, _ = run(capsys, "--format", "structured", *args)
    doc = json.loads(out)
    assert {"command", "status", "exit_code"} <= set(doc)
    assert doc["exit_code"] == code
    return code, doc


def test_parse_prints_core_form(ws, capsys):
    code, out, _ = run(capsys, "--workspace", str(ws), "parse", "cnot_qif.qp")
    assert code == 0
    assert out.strip() == "qif [q1] (|0> -> skip) [] (|1> -> X[q2]) fiq"


def test_parse_ast(ws, capsys):
    code, doc = structured(capsys, "--workspace", str(ws), "parse", "--ast", "cnot.qp")
    assert code == 0 and doc["ast"]["node"] == "Gate" and doc["ast"]["name"] == "CNOT"


def test_syntax_error_is_usage(ws, capsys):
    (ws / "bad.qp").write_text("skip;\n  qif")
    code, out, err = run(capsys, "--workspace", str(ws), "parse", "bad.qp")
    assert code == 3 and "2:6" in err


def test_unknown_gate_is_usage(ws, capsys):
    (ws / "bad.qp").write_text("NOPE[q]")
    code, doc = structured(capsys, "--workspace", str(ws), "parse", "bad.qp")
    assert code == 3 and "NOPE" in doc["error"]


def test_bad_arguments_exit_3(capsys):
    assert run(capsys, "frobnicate")[0] == 3
    assert run(capsys)[0] == 3


def test_check_eq_codes(ws, capsys):
    args = ("--workspace", str(ws), "check-eq")
    assert run(capsys, *args, "toffoli.qp", "ccx.qp")[0] == 0
    assert run(capsys, *args, "fredkin.qp", "fredkin_swap.qp")[0] == 0
    assert run(capsys, *args, "deutsch.qp", "ccx.qp")[0] == 0
    code, doc = structured(capsys, *args, "cnot.qp", "ccx.qp")
    assert code == 1 and doc["verdict"] == "not-equal"


def test_check_eq_inconclusive(ws, capsys):
    (ws / "spin.qp").write_text("while MT[q] = 1 do skip od")
    (ws / "abort.qp").write_text("abort")
    code, doc = structured(capsys, "--workspace", str(ws), "check-eq", "spin.qp", "abort.qp")
    assert code == 2 and doc["verdict"] == "inconclusive"


def test_qec_check_eq_is_not_equal(ws, capsys):
    # the bit-flip code leaves q1 flipped after an X[q1] error; see the decisions ledger
    code, doc = structured(capsys, "--workspace", str(ws), "check-eq", "qec.qp", "init.qp")
    assert code == 1 and doc["residual"] > 1
    code, doc = structured(capsys, "--workspace", str(ws), "check-eq", "qec_corrected.qp", "init.qp")
    assert code == 0 and doc["residual"] <= 1e-9


def test_apply_prints_rewritten_program(ws, capsys):
    code, out, _ = run(capsys, "--workspace", str(ws), "apply", "--law", "CL-QifIdem", "--path", "0",
                       "qif_idem.qp")
    assert code == 0
    assert parse_program(out) == parse_program("X[r]; H[r]")


def test_apply_no_match_exit_1(ws, capsys):
    code, doc = structured(capsys, "--workspace", str(ws), "apply", "--law", "CL-QifIdem", "--path", "1",
                           "qif_idem.qp")
    assert code == 1 and doc["kind"] == "NoMatch"


def test_apply_at_with_params_and_check(ws, capsys):
    code, doc = structured(capsys, "--workspace", str(ws), "apply", "--law", "PL-Lifting",
                           "--at", "CNOT[q, q2]", "--param", "replacement=skip <- q -> X[q2]", "--check",
                           "qec.qp")
    assert code == 0 and doc["check"]["verdict"] == "equal"
    assert "qif [q]" in doc["program"]


def test_apply_writes_extension_library(ws, capsys, tmp_path):
    out = tmp_path / "out" / "fused.qp"
    out.parent.mkdir()
    (ws / "hh.qp").write_text("H[q]; S[q]")
    code, doc = structured(capsys, "--workspace", str(ws), "apply", "--law", "CL-GateFuse",
                           "--out", str(out), "hh.qp")
    assert code == 0 and doc["synthesized"]
    text = out.read_text()
    assert text.startswith('use "fused.lib.json";')
    code, doc = structured(capsys, "--workspace", str(ws), "check-eq", str(out), "hh.qp")
    assert code == 0


def test_normalize_and_defer(ws, capsys):
    args = ("--workspace", str(ws))
    code, doc = structured(capsys, *args, "normalize", "--layer", "program", "deferred.qp")
    assert code == 0 and doc["certificate"]["ok"]
    code, doc = structured(capsys, *args, "normalize", "--layer", "circuit", "toffoli.qp")
    assert code == 0 and doc["certificate"]["shape"]["flat_qif_sequence"]
    code, doc = structured(capsys, *args, "defer", "deferred.qp")
    assert code == 0 and doc["certificate"]["ok"] and len(doc["classifier"]) > 1
    code, doc = structured(capsys, *args, "normalize", "--layer", "circuit", "deferred.qp")
    assert code == 3


def test_normalize_out_round_trips(ws, capsys, tmp_path):
    out = tmp_path / "nf.qp"
    code, _ = structured(capsys, "--workspace", str(ws), "normalize", "--layer", "program",
                         "--out", str(out), "deferred.qp")
    assert code == 0
    code, doc = structured(capsys, "--workspace", str(ws), "check-eq", str(out), "deferred.qp")
    assert code == 0


def test_tail_to_loop(ws, capsys):
    code, doc = structured(capsys, "--workspace", str(ws), "tail-to-loop", "--check", "tail.qp")
    assert code == 0 and doc["check"]["verdict"] == "equal"
    assert parse_program(doc["program"]) == parse_program((ws / "tail_loop.qp").read_text())
    code, doc = structured(capsys, "--workspace", str(ws), "tail-to-loop", "skip.qp")
    assert code == 3


def test_refine_check(ws, capsys):
    args = ("--workspace", str(ws), "refine-check")
    code, doc = structured(capsys, *args, "refine_choice.qp", "skip.qp")
    assert code == 1 and doc["verdict"] == "violates"
    code, doc = structured(capsys, *args, "skip.qp", "refine_choice.qp")
    assert code == 0
    code, doc = structured(capsys, *args, "--clauses", "--trials", "2")
    assert code == 0 and set(doc["clauses"]) >= {"mono-seq", "init-if-choice"}


def test_verify_laws_table(capsys):
    code, out, _ = run(capsys, "verify-laws", "--trials", "3", "--law", "CL-QifIdem", "--law", "ND-Comm")
    assert code == 0
    assert "CL-QifIdem" in out and "2/2 laws passed" in out


def test_replay(ws, capsys):
    code, doc = structured(capsys, "--workspace", str(ws), "replay", "qec_corrected.replay")
    assert code == 0 and doc["verdict"] == "equal" and doc["check"]["residual"] <= 1e-9
    code, doc = structured(capsys, "--workspace", str(ws), "replay", "qec.replay")
    assert code == 1 and doc["verdict"] == "not-equal"


def test_replay_reports_failing_step(ws, capsys):
    script = {"program": "cnot.qp", "steps": [{"law": "CL-QifIdem", "path": "root"}]}
    (ws / "bad.replay").write_text(json.dumps(script))
    code, doc = structured(capsys, "--workspace", str(ws), "replay", "bad.replay")
    assert code == 1 and doc["failed_step"] == 0


def test_semantics(ws, capsys):
    code, doc = structured(capsys, "--workspace", str(ws), "semantics", "cnot.qp")
    assert code == 0 and doc["kind"] == "unitary" and len(doc["unitary"]) == 4
    code, doc = structured(capsys, "--workspace", str(ws), "semantics", "refine_choice.qp")
    assert code == 0 and len(doc["elements"]) == 2


def test_laws_listing(capsys):
    code, doc = structured(capsys, "laws")
    assert code == 0 and len(doc["laws"]) >= 50


def test_workspace_config(ws, capsys, monkeypatch):
    (ws / "qlaws.json").write_text(json.dumps({
        "libraries": ["example_gates.json"], "variables": {"p": 8}, "config": {"eps_eq": 1e-6}}))
    (ws / "rx.qp").write_text("RXB_PI2[q]")
    monkeypatch.setenv(ENV_VAR, str(ws))
    code, doc = structured(capsys, "check-eq", "rx.qp", "ccx.qp")
    assert code == 1  # loads: the gate comes from the workspace library
    w = load_workspace()
    assert w.variables["p"].dim == 8 and w.cfg.eps_eq == 1e-6


def test_workspace_rejects_bad_files(tmp_path):
    (tmp_path / "qlaws.json").write_text(json.dumps({"libraries": ["missing.json"]}))
    with pytest.raises(WorkspaceError):
        load_workspace(tmp_path)
    (tmp_path / "qlaws.json").write_text(json.dumps({"config": {"nonsense": 1}}))
    with pytest.raises(WorkspaceError):
        load_workspace(tmp_path)


def test_config_file_override(ws, capsys, tmp_path):
    cfg = tmp_path / "tight.json"
    cfg.write_text(json.dumps({"dmax": 4}))
    code, doc = structured(capsys, "--workspace", str(ws), "--config", str(cfg), "semantics", "ccx.qp")
    assert code == 3 and "cap" in doc["error"]
