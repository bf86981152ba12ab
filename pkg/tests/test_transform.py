import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlaws.cli.parser import parse_program
from qlaws.config import Config
from qlaws.library import Library
from qlaws.linalg import embed, random_density
from qlaws.randprog import random_circuit, random_finite_program, random_tail
from qlaws.semantics import circ_sem, prog_sem
from qlaws.syntax import Abort, IfMeas, Var, canonical, qv, reg_dims
from qlaws.transform import (
    SchemaMismatch,
    TransformError,
    check_tail,
    defer_measurements,
    is_circuit_normal,
    normalize_circuit,
    normalize_program,
    state_prep,
    tail_to_loop,
)
from qlaws.verify import check_eq

q, r = Var("q"), Var("r")


def nf_apply(nf, lib, space, rho):
    """Evaluate a single-if normal form directly from its Kraus operators and branch unitaries."""
    assert isinstance(nf, IfMeas)
    kraus = lib.kraus(nf.meas, reg_dims(nf.reg))
    out = np.zeros_like(rho)
    for k, branch in zip(kraus, nf.branches):
        if isinstance(branch, Abort):
            continue
        u = circ_sem(branch, lib, space=space).unitary
        m = u @ embed(k, nf.reg, space)
        out = out + m @ rho @ m.conj().T
    return out


def test_circuit_normal_form(lib):
    c = parse_program("H[q]; CNOT[q, r]")
    cert = normalize_circuit(c, lib)
    assert cert.ok and is_circuit_normal(cert.output)
    assert cert.fresh and all(v.name.startswith("#aux") for v in cert.fresh)
    space = canonical(qv(cert.output))
    assert np.allclose(circ_sem(cert.output, cert.lib, space=space).unitary,
                       circ_sem(c, lib, space=space).unitary)
    again = normalize_circuit(cert.output, cert.lib)
    assert again.output == cert.output


def test_flat_qif_is_fixed_point(lib):
    c = parse_program("qif [q] (|0> -> skip) [] (|1> -> X[r]) fiq")
    assert normalize_circuit(c, lib).output == c


def test_circuit_rejects_programs(lib):
    with pytest.raises(TransformError):
        normalize_circuit(parse_program("q := |0>"), lib)


def test_program_normal_form_by_hand(lib):
    p = parse_program("q := |+>; M[q] |> X[r]")
    cert = normalize_program(p, lib)
    assert cert.ok and all(cert.shape.values())
    space = (q, r)
    rho = random_density(4, np.random.default_rng(0))
    want = prog_sem(p, lib, space=space).superop.apply(rho)
    assert np.allclose(nf_apply(cert.output, cert.lib, space, rho), want)


def test_program_normal_form_keeps_abort(lib):
    p = parse_program("H[q]; MH[q] |> abort")
    cert = normalize_program(p, lib)
    assert any(isinstance(b, Abort) for b in cert.output.branches)
    rho = random_density(2, np.random.default_rng(1))
    got = nf_apply(cert.output, cert.lib, (q,), rho)
    want = prog_sem(p, lib).superop.apply(rho)
    assert np.allclose(got, want) and np.trace(got).real < 1


def test_program_rejects_loops(lib):
    with pytest.raises(TransformError):
        normalize_program(parse_program("M[q] * H[q]"), lib)


def test_state_prep():
    v = np.array([0.6, 0.8j, 0])
    u = state_prep(v)
    assert np.allclose(u[:, 0], v) and np.allclose(u.conj().T @ u, np.eye(3))


def test_defer_sandwich(lib):
    p = parse_program("H[q]; CNOT[q, r]; if M[q] (0 -> skip) [] (1 -> X[r]) fi; MH[r] |> abort")
    d = defer_measurements(p, lib)
    assert d.cert.ok
    assert "abort" in d.classifier and "skip" in d.classifier
    lhs, rhs = d.sandwich()
    assert check_eq(lhs, rhs, d.cert.lib).equal


def test_defer_by_hand(lib):
    # H; measure; the outcome lands in the auxiliary register, so the circuit is a dilation
    d = defer_measurements(parse_program("H[q]; if M[q] (0 -> skip) [] (1 -> X[r]) fi"), lib)
    aux = d.aux[0]
    space = (q, r, aux)
    u = circ_sem(d.circuit, d.cert.lib, space=space).unitary
    out = u @ np.eye(8)[:, 0]  # |q r aux> = |000>
    probs = np.abs(out) ** 2
    # outcome 0: q=0, r=0, aux=0; outcome 1: q=1, r=1, aux=1
    assert np.isclose(probs[0b000], 0.5) and np.isclose(probs[0b111], 0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normalize_random_circuits(seed):
    rng = np.random.default_rng(seed)
    c, lib = random_circuit((q, r, Var("s")), 4, rng, Library.standard())
    cert = normalize_circuit(c, lib)
    assert cert.ok, cert.to_dict()


def test_tail_to_loop_shape(corpus):
    tail = parse_program((corpus / "tail.qp").read_text())
    loop = parse_program((corpus / "tail_loop.qp").read_text())
    assert tail_to_loop(tail) == loop


@pytest.mark.parametrize("text", [
    "skip",
    "mu Y . if M[q] (0 -> Y) [] (1 -> skip) fi",
    "mu Y . if M[q] (0 -> skip) [] (1 -> Y; H[q]) fi",
])
def test_tail_schema_mismatch(text):
    with pytest.raises(SchemaMismatch):
        tail_to_loop(parse_program(text))


def test_check_tail(lib):
    rng = np.random.default_rng(11)
    prog, lib2 = random_tail((q, r), rng, lib)
    assert check_tail(prog, lib2).verdict == "equal"
    diverging = parse_program("mu Y . if MT[q] (0 -> skip) [] (1 -> H[q]; Y) fi")
    assert check_tail(diverging, lib).verdict == "inconclusive"


def test_random_finite_defer(lib):
    rng = np.random.default_rng(5)
    for _ in range(5):
        p, lib2 = random_finite_program((q, r), rng, lib)
        d = defer_measurements(p, lib2, cfg=Config())
        assert d.cert.ok
