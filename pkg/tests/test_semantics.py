import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlaws.cli.parser import parse_program
from qlaws.config import Config, DimensionCapError
from qlaws.linalg import random_density
from qlaws.randprog import random_circuit
from qlaws.library import Library
from qlaws.semantics import NondeterminismError, circ_sem, nd_sem, prog_sem, semantic_set
from qlaws.syntax import Var

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
CNOT = np.eye(4)[[0, 1, 3, 2]]
ket0, ket1 = np.array([1, 0]), np.array([0, 1])
plus, minus = H @ ket0, H @ ket1


def run(text, rho, lib, cfg=Config()):
    den = prog_sem(parse_program(text), lib, cfg)
    return den.superop.apply(rho), den


def test_circuit_unitaries(lib):
    assert np.allclose(circ_sem(parse_program("qif [q] (|0> -> skip) [] (|1> -> X[r]) fiq"), lib).unitary, CNOT)
    # wires follow variable names, not textual order
    assert np.allclose(circ_sem(parse_program("H[r]; X[a]"), lib).unitary, np.kron(X, H))


def test_qif_in_rotated_basis(lib):
    u = circ_sem(parse_program("qif [q] (|+> -> skip) [] (|-> -> Z[r]) fiq"), lib).unitary
    want = np.kron(np.outer(plus, plus), I2) + np.kron(np.outer(minus, minus), Z)
    assert np.allclose(u, want)


def test_measurement_then_correction(lib):
    rho0 = np.outer(np.kron(ket0, ket0), np.kron(ket0, ket0))
    out, _ = run("q := |+>; M[q] |> X[r]", rho0, lib)
    e00, e11 = np.kron(ket0, ket0), np.kron(ket1, ket1)
    assert np.allclose(out, 0.5 * np.outer(e00, e00) + 0.5 * np.outer(e11, e11))


def test_init_discards_state(lib):
    rho = random_density(2, np.random.default_rng(3))
    out, _ = run("q := |1>", rho, lib)
    assert np.allclose(out, np.outer(ket1, ket1))


def test_abort_is_zero(lib):
    out, _ = run("abort", np.eye(2) / 2, lib)
    assert np.allclose(out, 0)


def test_probabilistic_choice(lib):
    rho = random_density(2, np.random.default_rng(4))
    den = semantic_set(parse_program("skip |p:0.25| X[q]"), lib)
    assert len(den.elems) == 1
    assert np.allclose(den.elems[0].apply(rho), 0.25 * rho + 0.75 * X @ rho @ X)


def test_nondeterministic_choice(lib):
    den = nd_sem(parse_program("skip |_| X[q]"), lib)
    assert len(den.elems) == 2
    assert len(nd_sem(parse_program("skip |_| skip"), lib).elems) == 1
    with pytest.raises(NondeterminismError):
        prog_sem(parse_program("skip |_| X[q]"), lib)


@pytest.mark.parametrize("text", [
    "while M[q] do H[q] od",
    "mu Y . if M[q] (0 -> skip) [] (1 -> H[q]; Y) fi",
])
def test_terminating_loop_resets_to_zero(lib, text):
    # each round leaves the loop with probability 1/2 and always in |0>
    rho = random_density(2, np.random.default_rng(5))
    out, den = run(text, rho, lib)
    assert np.allclose(out, np.outer(ket0, ket0), atol=1e-9)
    t = den.truncation
    assert t.converged and t.residual <= 1e-10
    assert max(t.loop_depth, t.rec_depth) >= 30


def test_loop_geometric_weight(lib):
    # the body keeps amplitude cos(theta) on |1>, so each round leaves the loop with prob sin^2
    theta = 0.3
    lib = lib.with_gate("RY", (2,), [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    cfg = Config(loop_tol=0, loop_cap=5)
    out, den = run("while M[q] do RY[q] od", np.outer(ket1, ket1), lib, cfg)
    assert not den.truncation.converged
    # five guard measurements see four bodies; the weight still inside is cos^8
    assert np.isclose(1 - np.trace(out).real, np.cos(theta) ** 8)


def test_diverging_loop_not_converged(lib):
    _, den = run("while MT[q] do skip od", np.eye(2) / 2, lib)
    assert not den.truncation.converged


def test_dimension_cap(lib):
    with pytest.raises(DimensionCapError):
        circ_sem(parse_program("CCX[a, b, c]"), lib, Config(dmax=4))


def test_space_must_cover_program(lib):
    with pytest.raises(ValueError):
        prog_sem(parse_program("X[q]"), lib, space=(Var("r"),))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_circuit_and_program_semantics_agree(seed):
    rng = np.random.default_rng(seed)
    vs = (Var("a"), Var("b"), Var("c", 3))
    c, lib = random_circuit(vs, 4, rng, Library.standard())
    u = circ_sem(c, lib, space=vs).unitary
    assert np.allclose(u.conj().T @ u, np.eye(12))
    rho = random_density(12, rng)
    got = prog_sem(c, lib, space=vs).superop.apply(rho)
    assert np.allclose(got, u @ rho @ u.conj().T)
