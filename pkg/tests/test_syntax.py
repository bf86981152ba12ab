import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlaws.randprog import random_program
from qlaws.library import Library
from qlaws.syntax import (
    Abort,
    Call,
    Gate,
    IfMeas,
    IllFormed,
    Init,
    Ket,
    Mu,
    NdChoice,
    Qif,
    Seq,
    Skip,
    Var,
    While,
    canonical,
    check_wellformed,
    format_path,
    free_calls,
    fresh_vars,
    get_at,
    if2,
    is_circuit,
    is_finite,
    iter_paths,
    parse_path,
    qif2,
    qv,
    replace_at,
    require_wellformed,
    seq,
    seq_items,
    size,
    snap,
    standard_basis,
    subst,
)

q, r, s = Var("q"), Var("r"), Var("s")
X = lambda v: Gate("X", (v,))  # noqa: E731
H = lambda v: Gate("H", (v,))  # noqa: E731


def test_seq_builds_right_spine():
    p = seq(X(q), H(q), Skip())
    assert p == Seq(X(q), Seq(H(q), Skip()))
    assert seq_items(p) == [X(q), H(q), Skip()]
    assert seq() == Skip()
    assert seq(X(q)) == X(q)


def test_qv_includes_guards_and_measured():
    p = seq(qif2((q,), X(r), Skip()), While("M", (s,), Skip()))
    assert qv(p) == {q, r, s}
    assert canonical([s, q, r, q]) == (q, r, s)


def test_kinds():
    assert is_circuit(seq(H(q), qif2((q,), X(r), Skip())))
    assert not is_circuit(Init((q,), Ket.basis(0, 2)))
    assert not is_finite(Mu("Y", Call("Y")))
    assert free_calls(seq(Call("A"), Mu("B", Call("B")))) == {"A"}


def test_subst_and_size():
    body = if2("M", (q,), Skip(), Call("Y"))
    assert subst(body, "Y", Abort()) == if2("M", (q,), Skip(), Abort())
    assert size(body) == 3


def test_fresh_vars_skip_taken_names():
    vs, uni = fresh_vars({Var("#aux0")}, 2, dim=3)
    assert [v.name for v in vs] == ["#aux1", "#aux2"] and all(v.dim == 3 for v in vs)
    assert len(uni) == 3


def test_var_rejects_small_dim():
    with pytest.raises(ValueError):
        Var("q", 1)


def test_snap_rounds_near_constants():
    got = snap(np.array([1 / np.sqrt(2) + 1e-14, 0.3, -1e-15j]))
    assert got[0] == 1 / np.sqrt(2) and got[1] == 0.3 and got[2] == 0


def test_paths():
    p = seq(X(q), NdChoice(H(q), Abort()))
    got = dict((format_path(path), n) for path, n in iter_paths(p))
    assert got["root"] == p and got["1.0"] == H(q)
    assert parse_path("1.0") == (1, 0) and parse_path("root") == ()
    assert get_at(p, (1, 1)) == Abort()
    assert replace_at(p, (1, 1), Skip()) == seq(X(q), NdChoice(H(q), Skip()))
    with pytest.raises(IndexError):
        get_at(p, (0, 0))


def test_wellformed(lib):
    assert check_wellformed(seq(H(q), Gate("CNOT", (q, r))), lib) == []
    bad = {
        "guard occurs": qif2((q,), X(q), Skip()),
        "unknown gate": Gate("NOPE", (q,)),
        "distinct": Gate("CNOT", (q, q)),
        "not allowed inside a qif": qif2((q,), Init((r,), Ket.basis(0, 2)), Skip()),
        "unbound": Call("Y"),
        "not normalized": Init((q,), Ket((1, 1))),
        "orthonormal": Qif((q,), (Ket.basis(0, 2), Ket.basis(0, 2)), (Skip(), Skip())),
        "outcomes": IfMeas("M", (q,), (Skip(),)),
        "two dimensions": seq(X(q), Init((Var("q", 3),), Ket.basis(0, 3))),
    }
    for reason, node in bad.items():
        diags = check_wellformed(node, lib)
        assert any(reason in d.reason for d in diags), (reason, diags)
    with pytest.raises(IllFormed):
        require_wellformed(Call("Y"), lib)


def test_standard_basis():
    assert [k.basis_index() for k in standard_basis(3)] == [0, 1, 2]
    assert Ket((0.5 + 0j, 0.5 + 0j)).basis_index() is None


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_replace_at_own_subterm_is_identity(seed):
    rng = np.random.default_rng(seed)
    p, lib = random_program((q, r), 4, rng, Library.standard(), loops=True, nondet=True)
    assert check_wellformed(p, lib) == []
    for path, node in iter_paths(p):
        assert get_at(p, path) == node
        assert replace_at(p, path, node) == p
