import json

import pytest

from qlaws.cli.parser import parse, parse_program
from qlaws.cli.replay import ReplayError, decode_params, load_script, locate, run_replay
from qlaws.cli.workspace import load_workspace
from qlaws.syntax import Var
from qlaws.verify import check_eq

P = parse_program


def test_locate_node_and_window():
    prog = P("H[q]; X[r]; CNOT[q, r]; Z[q]")
    assert locate(prog, P("CNOT[q, r]")) == ((1, 1, 0), None)
    assert locate(prog, P("X[r]; CNOT[q, r]")) == ((), 1)
    with pytest.raises(ReplayError):
        locate(prog, P("Y[q]"))


def test_decode_params():
    variables = {"c": Var("c", 3)}
    got = decode_params({"replacement": "X[q]", "reg": "q, c", "split": 2, "basis": ["+", "-"]},
                        variables)
    assert got["replacement"] == P("X[q]")
    assert got["reg"] == (Var("q"), Var("c", 3))
    assert got["split"] == 2 and len(got["basis"]) == 2


def test_small_script(tmp_path):
    (tmp_path / "p.qp").write_text("H[q]; X[r]; X[r]")
    steps = [
        {"law": "CL-GateFuse", "at": "X[r]; X[r]"},
        {"law": "CL-Identity", "at": "I[r]"},
    ]
    script = {"program": "p.qp", "goal": "H[q]", "steps": steps}
    (tmp_path / "s.replay").write_text(json.dumps(script))
    rep = run_replay("s.replay", load_workspace(tmp_path))
    assert rep.error is None, rep.error
    assert len(rep.steps) == 2 and rep.verdict == "equal"


def test_bad_script(tmp_path):
    (tmp_path / "s.replay").write_text("{not json")
    with pytest.raises(ReplayError):
        load_script(tmp_path / "s.replay")


def _trace_is_sound(rep, ws, source):
    parsed, lib = ws.load_program(source)
    for step in rep.steps[::9] + rep.steps[-1:]:
        mid = parse(step.program, parsed.variables).program
        assert check_eq(parsed.program, mid, rep.lib).equal, step.index


def test_corrected_qec_reaches_goal(corpus):
    ws = load_workspace(corpus)
    rep = run_replay("qec_corrected.replay", ws)
    assert rep.ok and rep.verdict == "equal"
    assert rep.final == P("q1 := |0>; q2 := |0>")
    _trace_is_sound(rep, ws, "qec_corrected.qp")


def test_original_qec_gets_stuck(corpus):
    ws = load_workspace(corpus)
    rep = run_replay("qec.replay", ws)
    # every step applies; the X[q1] error case ends with q1 flipped
    assert rep.error is None and rep.verdict == "not-equal"
    assert rep.final == P("(q1 := |0>; q2 := |0>) |_| (q1 := |1>; q2 := |0>)")
    _trace_is_sound(rep, ws, "qec.qp")
