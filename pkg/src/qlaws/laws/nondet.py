"""Laws of nondeterministic choice."""

from __future__ import annotations

from qlaws.laws.core import FnRule, Law, Meta, PatternRule
from qlaws.laws.util import Instance
from qlaws.randprog import random_meas, random_program
from qlaws.syntax import IfMeas, NdChoice, Seq, Var

P1, P2, P3 = Meta("P1"), Meta("P2"), Meta("P3")
Q, R = Var("q"), Var("r")


def _dist_if_match(n, ctx):
    if not isinstance(n, IfMeas):
        return None
    want = ctx.param("branch")
    idx = [i for i, p in enumerate(n.branches) if isinstance(p, NdChoice)]
    if want is not None:
        idx = [i for i in idx if i == int(want)]
    return {"M": n, "i": idx[0]} if idx else None


def _dist_if_build(b, ctx):
    m, i = b["M"], b["i"]
    choice = m.branches[i]
    left = m.branches[:i] + (choice.left,) + m.branches[i + 1:]
    right = m.branches[:i] + (choice.right,) + m.branches[i + 1:]
    return NdChoice(IfMeas(m.meas, m.reg, left), IfMeas(m.meas, m.reg, right))


def _dist_if_back_match(n, ctx):
    if not (isinstance(n, NdChoice) and isinstance(n.left, IfMeas) and isinstance(n.right, IfMeas)):
        return None
    a, c = n.left, n.right
    if (a.meas, a.reg) != (c.meas, c.reg) or len(a.branches) != len(c.branches):
        return None
    diff = [i for i, (x, y) in enumerate(zip(a.branches, c.branches)) if x != y]
    if len(diff) != 1:
        return None
    return {"A": a, "C": c, "i": diff[0]}


def _dist_if_back_build(b, ctx):
    a, c, i = b["A"], b["C"], b["i"]
    branches = a.branches[:i] + (NdChoice(a.branches[i], c.branches[i]),) + a.branches[i + 1:]
    return IfMeas(a.meas, a.reg, branches)


def _dist_seq_match(n, ctx):
    form = ctx.param("form")
    if isinstance(n, Seq):
        if form in (None, "right") and isinstance(n.first, NdChoice):
            return {"form": "right", "X": n.first, "R": n.second}
        if form in (None, "left") and isinstance(n.second, NdChoice):
            return {"form": "left", "X": n.second, "R": n.first}
    return None


def _dist_seq_build(b, ctx):
    x, r = b["X"], b["R"]
    if b["form"] == "right":
        return NdChoice(Seq(x.left, r), Seq(x.right, r))
    return NdChoice(Seq(r, x.left), Seq(r, x.right))


def _dist_seq_back_match(n, ctx):
    if not (isinstance(n, NdChoice) and isinstance(n.left, Seq) and isinstance(n.right, Seq)):
        return None
    a, c = n.left, n.right
    form = ctx.param("form")
    if form in (None, "right") and a.second == c.second:
        return {"form": "right", "A": a.first, "C": c.first, "R": a.second}
    if form in (None, "left") and a.first == c.first:
        return {"form": "left", "A": a.second, "C": c.second, "R": a.first}
    return None


def _dist_seq_back_build(b, ctx):
    x = NdChoice(b["A"], b["C"])
    return Seq(x, b["R"]) if b["form"] == "right" else Seq(b["R"], x)


# ---------------------------------------------------------------------------
# generators


def _progs(rng, lib, k, depth=2):
    out = []
    for _ in range(k):
        p, lib = random_program((Q, R), depth, rng, lib)
        out.append(p)
    return out, lib


def gen_comm(rng, lib):
    (a, c), lib = _progs(rng, lib, 2)
    return Instance(NdChoice(a, c), lib)


def gen_assoc(rng, lib):
    (a, c, d), lib = _progs(rng, lib, 3)
    return Instance(NdChoice(NdChoice(a, c), d), lib)


def gen_idem(rng, lib):
    (a,), lib = _progs(rng, lib, 1, 3)
    return Instance(NdChoice(a, a), lib)


def gen_dist_if(rng, lib):
    name, lib = random_meas((Q,), rng, lib)
    (a, c, d), lib = _progs(rng, lib, 3)
    i = int(rng.integers(2))
    branches = [d, d]
    branches[i] = NdChoice(a, c)
    return Instance(IfMeas(name, (Q,), tuple(branches)), lib, {"branch": i})


def gen_dist_seq(rng, lib):
    (a, c, r), lib = _progs(rng, lib, 3)
    if rng.random() < 0.5:
        return Instance(Seq(NdChoice(a, c), r), lib, {"form": "right"}, back_params={"form": "right"})
    return Instance(Seq(r, NdChoice(a, c)), lib, {"form": "left"}, back_params={"form": "left"})


# ---------------------------------------------------------------------------
# catalog


def laws() -> list[Law]:
    return [
        Law("ND-Comm", "nondet", "commutativity of nondeterministic choice",
            "nondeterminism laws: commutativity",
            PatternRule(NdChoice(P1, P2), NdChoice(P2, P1)),
            PatternRule(NdChoice(P1, P2), NdChoice(P2, P1)), gen_comm),
        Law("ND-Assoc", "nondet", "associativity of nondeterministic choice",
            "nondeterminism laws: associativity",
            PatternRule(NdChoice(NdChoice(P1, P2), P3), NdChoice(P1, NdChoice(P2, P3))),
            PatternRule(NdChoice(P1, NdChoice(P2, P3)), NdChoice(NdChoice(P1, P2), P3)), gen_assoc),
        Law("ND-Idem", "nondet", "idempotence of nondeterministic choice",
            "nondeterminism laws: idempotence",
            PatternRule(NdChoice(P1, P1), P1),
            FnRule(lambda n, c: {"P1": n}, lambda b, c: NdChoice(b["P1"], b["P1"])), gen_idem),
        Law("ND-DistIf", "nondet", "distributing an if over a choice in one branch",
            "nondeterminism laws: distributivity of if over choice",
            FnRule(_dist_if_match, _dist_if_build),
            FnRule(_dist_if_back_match, _dist_if_back_build), gen_dist_if),
        Law("ND-DistSeq", "nondet", "distributing sequential composition over choice",
            "nondeterminism laws: distributivity of composition over choice",
            FnRule(_dist_seq_match, _dist_seq_build),
            FnRule(_dist_seq_back_match, _dist_seq_back_build), gen_dist_seq),
    ]
