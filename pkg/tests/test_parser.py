import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlaws.cli.parser import ParseError, diagnose, parse, parse_program
from qlaws.cli.printer import show, show_file
from qlaws.library import Library
from qlaws.randprog import random_circuit, random_program
from qlaws.syntax import (
    Abort,
    Call,
    Gate,
    IfMeas,
    Init,
    Ket,
    Mu,
    NdChoice,
    ProbChoice,
    Qif,
    Seq,
    Skip,
    Var,
    While,
    standard_basis,
)

q, r = Var("q"), Var("r")


def test_skip_seq():
    assert parse_program("skip ; skip") == Seq(Skip(), Skip())


def test_qubit_choice_sugar():
    got = parse_program("X[r] <- q -> H[r]")
    assert got == Qif((q,), standard_basis(2), (Gate("X", (r,)), Gate("H", (r,))))


def test_pre_choice_sugar():
    got = parse_program("X[r] <- H[q] -> skip")
    assert got == Seq(Gate("H", (q,)), Qif((q,), standard_basis(2), (Gate("X", (r,)), Skip())))


def test_while_sugar():
    assert parse_program("M[q] * H[q]") == While("M", (q,), Gate("H", (q,)))
    assert parse_program("while M[q] do H[q] od") == While("M", (q,), Gate("H", (q,)))


def test_conditional_sugar():
    assert parse_program("X[r] <| M[q] |> H[r]") == IfMeas("M", (q,), (Gate("X", (r,)), Gate("H", (r,))))
    assert parse_program("M[q] |> X[r]") == IfMeas("M", (q,), (Skip(), Gate("X", (r,))))


@pytest.mark.parametrize("text, zero, one", [
    ("[M[q]]", Skip(), Skip()),
    ("(M[q]]", Abort(), Skip()),
    ("[M[q])", Skip(), Abort()),
])
def test_tests(text, zero, one):
    assert parse_program(text) == IfMeas("M", (q,), (zero, one))


def test_if_labels_any_order():
    a = parse_program("if M[q] (1 -> X[r]) [] (0 -> skip) fi")
    assert a == IfMeas("M", (q,), (Skip(), Gate("X", (r,))))
    assert parse_program("if [q] (0 -> skip) [] (1 -> X[r]) fi") == a


def test_precedence_seq_below_choice():
    got = parse_program("skip; X[q] |_| H[q]; abort")
    assert got == Seq(Skip(), Seq(NdChoice(Gate("X", (q,)), Gate("H", (q,))), Abort()))
    got = parse_program("skip |p:0.25| abort")
    assert got == ProbChoice(0.25, Skip(), Abort())


def test_mu_and_call():
    got = parse_program("mu X . M[q] |> (H[q]; X)")
    assert got == Mu("X", IfMeas("M", (q,), (Skip(), Seq(Gate("H", (q,)), Call("X")))))


def test_declarations_and_kets():
    p = parse('var c : 3; use "extra.json";\nc := |2>; q := |->')
    c = Var("c", 3)
    assert p.uses == ["extra.json"]
    assert p.program.first == Init((c,), Ket.basis(2, 3))
    assert np.allclose(p.program.second.state.vec, np.array([1, -1]) / np.sqrt(2))


def test_explicit_amplitudes():
    p = parse_program("q, r := |[0.5, 0.5j, -0.5, 0.5]>")
    assert np.allclose(p.state.vec, [0.5, 0.5j, -0.5, 0.5])


def test_comments_and_trailing_separator():
    assert parse_program("// hello\nskip; // tail\n") == Skip()


@pytest.mark.parametrize("text, line, col", [
    ("skip;\n  X[q", 2, 6),
    ("skip |", 1, 6),
    ("qif [q] (|0> -> skip) fiq", 1, 1),
    ("q := |5>", 1, 6),
])
def test_syntax_errors_have_positions(text, line, col):
    with pytest.raises(ParseError) as e:
        parse_program(text)
    assert (e.value.line, e.value.col) == (line, col)


def test_unknown_names_are_diagnosed(lib):
    p = parse("skip;\nFOO[q]; if BAR[q] (0 -> skip) [] (1 -> skip) fi")
    msgs = diagnose(p, lib)
    assert any(m.startswith("2:1:") and "FOO" in m for m in msgs)
    assert any(m.startswith("2:9:") and "BAR" in m for m in msgs)


def test_guard_in_branch_is_diagnosed(lib):
    msgs = diagnose(parse("qif [q] (|0> -> X[q]) [] (|1> -> skip) fiq"), lib)
    assert msgs and "guard" in msgs[0]


def test_printer_shapes():
    p = parse_program("(skip |_| X[q]); H[q]")
    assert show(p) == "skip |_| X[q]; H[q]"
    p = NdChoice(Skip(), NdChoice(Abort(), Skip()))
    assert show(p) == "skip |_| (abort |_| skip)"
    assert parse_program(show(p)) == p


def test_corpus_round_trip(corpus):
    files = sorted(corpus.glob("*.qp"))
    assert len(files) >= 20
    for f in files:
        parsed = parse(f.read_text())
        again = parse(show_file(parsed.program, parsed.uses), {})
        assert again.program == parsed.program, f.name


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_random_round_trip(seed, nondet):
    rng = np.random.default_rng(seed)
    c = Var("c", 3)
    vars_ = (q, r, c)
    lib = Library.standard()
    p, lib = random_program(vars_, 4, rng, lib, loops=True, nondet=nondet)
    text = show_file(p)
    assert parse_program(text) == p


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_circuit_round_trip(seed):
    rng = np.random.default_rng(seed)
    p, _ = random_circuit((q, r, Var("s")), 5, rng, Library.standard())
    assert parse_program(show_file(p)) == p
