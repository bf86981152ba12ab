"""Regenerate the QEC derivation scripts in src/qlaws/corpus.

Every step is located here by a program fragment inside one branch of the
distributed choice and recorded with its explicit path and offset, so the
shipped scripts do not depend on fragment search.

    python3 scripts/make_qec_replay.py
"""

import json
from pathlib import Path

from qlaws.cli.parser import parse
from qlaws.cli.printer import show
from qlaws.cli.replay import decode_params, locate
from qlaws.library import Library
from qlaws.laws import CATALOG, LTR, RTL, apply_law
from qlaws.syntax import format_path, get_at
from qlaws.verify import check_eq

CORPUS = Path(__file__).resolve().parent.parent / "src" / "qlaws" / "corpus"
GOAL = "q1 := |0>; q2 := |0>"

# branch paths once the noise choice ((s |_| Xq) |_| Xq1) |_| Xq2 is distributed
B_SKIP, B_XQ, B_XQ1, B_XQ2 = (0, 0, 0), (0, 0, 1), (0, 1), (1,)


class Builder:
    def __init__(self, source: str):
        parsed = parse((CORPUS / source).read_text())
        self.vars = parsed.variables
        self.program = parsed.program
        self.lib = Library.standard()
        self.universe = frozenset()
        self.steps = []

    def step(self, law, at=None, within=(), path=None, offset=None, direction=LTR, params=None, note=""):
        if path is None:
            sub = get_at(self.program, within)
            p, offset = locate(sub, parse(at, self.vars).program)
            path = tuple(within) + p
        res = apply_law(CATALOG[law], self.program, self.lib, path, offset, direction,
                        params=decode_params(params or {}, self.vars), universe=self.universe)
        self.program, self.lib, self.universe = res.program, res.lib, res.universe
        rec = {"law": law, "path": format_path(res.path)}
        if res.offset is not None:
            rec["offset"] = res.offset
        if direction != LTR:
            rec["direction"] = direction
        if params:
            rec["params"] = params
        if note:
            rec["note"] = note
        self.steps.append(rec)

    def swap(self, a, b, within, note="disjoint variables commute"):
        self.step("PL-SeqComm", f"{a}; {b}", within, note=note)


def distribute(b: Builder):
    # the choice sits at spine position 4; first push the suffix in, then the prefix
    node = (1, 1, 1, 1)
    for k in range(3):
        b.step("ND-DistSeq", path=node + (0,) * k, params={"form": "right"},
               note="composition distributes over the noise choice")
    for depth in range(4):
        here = (1,) * (3 - depth)
        for k in range(3):
            b.step("ND-DistSeq", path=here + (0,) * k, params={"form": "left"},
                   note="composition distributes over the noise choice")


def cnot_conjugation(b: Builder, within, target: str, noise: str):
    """CNOT[q,t]; noise[q]; CNOT[q,t] == noise[q]; X[t], as a chain of circuit laws."""
    ctrl = f"skip <- q -> X[{target}]"
    for _ in range(2):
        b.step("PL-Lifting", f"CNOT[q, {target}]", within, params={"replacement": ctrl},
               note="CNOT as a quantum choice on q")
    b.step("CL-ChoiceSym", f"{ctrl}; {noise}", within, direction=RTL,
           note="move the coin to the front of the quantum choice")
    flipped = f"X[{target}] <- q -> skip"
    b.step("CL-QifSeq", f"{flipped}; {ctrl}", within, note="sequential quantum choices merge")
    b.step("CL-SeqUnit", f"X[{target}]; skip", within)
    b.step("CL-SeqUnit", f"skip; X[{target}]", within)
    b.step("CL-QifIdem", f"X[{target}] <- q -> X[{target}]", within)


def decode_window(b: Builder, within, noise: str, result: str):
    b.step("PL-Lifting", f"CNOT[q, q1]; CNOT[q, q2]; {noise}; CNOT[q, q2]; CNOT[q, q1]", within,
           params={"width": 5, "replacement": result},
           note="encoding and decoding cancel around this error")


CORR = "M[q2] |> (M[q1] |> (X[q]; X[q1]); X[q2])"
FIX = "M[q1] |> X[q1]"


def reset_tail(b: Builder, within, fixed: bool, q1: int):
    """With q1 := |q1>; q2 := |0> in front, discharge the optional final reset of q1."""
    if not fixed:
        return
    b.swap("q2 := |0>", FIX, within)
    b.step("PL-InitIf", f"q1 := |{q1}>; {FIX}", within, note="outcome of M[q1] is certain")
    if q1:
        b.step("PL-InitUnitary", "q1 := |1>; X[q1]", within)
    else:
        b.step("PL-SeqUnitZero", "q1 := |0>; skip", within)


def branch_skip(b: Builder, fixed: bool):
    w = B_SKIP
    decode_window(b, w, "skip", "skip")
    b.step("PL-SeqUnitZero", f"skip; {CORR}", w)
    b.step("PL-InitIf", f"q2 := |0>; {CORR}", w, note="outcome of M[q2] is certain")
    if fixed:
        b.step("PL-SeqUnitZero", f"skip; {FIX}", w)
    else:
        b.step("PL-SeqUnitZero", "q2 := |0>; skip", w)
    reset_tail(b, w, fixed, 0)


def branch_xq1(b: Builder, fixed: bool):
    w = B_XQ1
    decode_window(b, w, "X[q1]", "X[q1]")
    b.swap("q2 := |0>", "X[q1]", w)
    b.step("PL-InitUnitary", "q1 := |0>; X[q1]", w)
    b.step("PL-InitIf", f"q2 := |0>; {CORR}", w, note="outcome of M[q2] is certain")
    b.step("PL-SeqUnitZero", f"skip; {FIX}" if fixed else "q2 := |0>; skip", w)
    # without the final reset this branch stops at q1 := |1>; q2 := |0>
    reset_tail(b, w, fixed, 1)


def branch_xq2(b: Builder, fixed: bool):
    w = B_XQ2
    decode_window(b, w, "X[q2]", "X[q2]")
    b.step("PL-InitUnitary", "q2 := |0>; X[q2]", w)
    b.step("PL-InitIf", f"q2 := |1>; {CORR}", w, note="outcome of M[q2] is certain")
    b.swap("q1 := |0>", "q2 := |1>", w)
    b.step("PL-InitIf", "q1 := |0>; M[q1] |> (X[q]; X[q1])", w, note="outcome of M[q1] is certain")
    b.step("PL-SeqUnitZero", "skip; X[q2]", w)
    b.swap("q1 := |0>", "X[q2]", w)
    b.step("PL-InitUnitary", "q2 := |1>; X[q2]", w)
    if fixed:
        b.step("PL-InitIf", f"q1 := |0>; {FIX}", w, note="outcome of M[q1] is certain")
        b.step("PL-SeqUnitZero", "q1 := |0>; skip", w)
    b.swap("q2 := |0>", "q1 := |0>", w)


def branch_xq(b: Builder, fixed: bool):
    w = B_XQ
    cnot_conjugation(b, w, "q2", "X[q]")
    b.swap("X[q2]", "CNOT[q, q1]", w)
    cnot_conjugation(b, w, "q1", "X[q]")
    # q1 := |0>; q2 := |0>; X[q]; X[q1]; X[q2]; correction
    b.swap("q2 := |0>", "X[q]", w)
    b.swap("q1 := |0>", "X[q]", w)
    b.swap("q2 := |0>", "X[q1]", w)
    b.step("PL-InitUnitary", "q1 := |0>; X[q1]", w)
    b.step("PL-InitUnitary", "q2 := |0>; X[q2]", w)
    b.step("PL-InitIf", f"q2 := |1>; {CORR}", w, note="outcome of M[q2] is certain")
    b.swap("q1 := |1>", "q2 := |1>", w)
    b.step("PL-InitIf", "q1 := |1>; M[q1] |> (X[q]; X[q1])", w, note="outcome of M[q1] is certain")
    # X[q]; q2 := |1>; q1 := |1>; X[q]; X[q1]; X[q2]
    b.swap("X[q]", "X[q1]", w)
    b.step("PL-InitUnitary", "q1 := |1>; X[q1]", w)
    b.swap("X[q]", "X[q2]", w)
    b.swap("q1 := |0>", "X[q2]", w)
    b.step("PL-InitUnitary", "q2 := |1>; X[q2]", w)
    b.swap("q1 := |0>", "X[q]", w)
    b.swap("q2 := |0>", "X[q]", w)
    b.step("CL-GateFuse", "X[q]; X[q]", w, note="X is its own inverse")
    b.step("CL-Identity", path=w + (0,))
    b.step("PL-SeqUnitZero", path=w)
    b.swap("q2 := |0>", "q1 := |0>", w)
    reset_tail(b, w, fixed, 0)


def merge(b: Builder, fixed: bool):
    if fixed:
        for p in ((0, 0), (0,), ()):
            b.step("ND-Idem", path=p, note="all four error cases agree")
        return
    b.step("ND-Idem", path=(0, 0), note="the no-error and X[q] cases agree")
    b.step("ND-Assoc", path=())
    b.step("ND-Comm", path=(1,))
    b.step("ND-Assoc", path=(), direction=RTL)
    b.step("ND-Idem", path=(0,), note="the X[q2] case agrees too; the X[q1] case does not")


def build(source: str, fixed: bool) -> Builder:
    b = Builder(source)
    distribute(b)
    branch_skip(b, fixed)
    branch_xq(b, fixed)
    branch_xq1(b, fixed)
    branch_xq2(b, fixed)
    merge(b, fixed)
    return b


SCRIPTS = {
    "qec.replay": ("qec.qp", False,
                   "Three-qubit bit-flip code, derived law by law.  The X[q1] error case "
                   "cannot be brought to the goal: M[q2] reads 0 there, so q1 is never reset."),
    "qec_corrected.replay": ("qec_corrected.qp", True,
                             "Bit-flip code with a final reset of q1, derived law by law to the goal."),
}


def write(name: str) -> dict:
    source, fixed, description = SCRIPTS[name]
    b = build(source, fixed)
    goal = parse(GOAL, b.vars).program
    rep = check_eq(b.program, goal, b.lib)
    doc = {"description": description, "program": source, "goal": GOAL, "steps": b.steps}
    (CORPUS / name).write_text(json.dumps(doc, indent=1) + "\n")
    print(f"{name}: {len(b.steps)} steps, final {show(b.program)}, {rep.verdict} ({rep.residual:.2e})")
    return doc


if __name__ == "__main__":
    for name in SCRIPTS:
        write(name)
