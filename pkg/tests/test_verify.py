import numpy as np
import pytest

from qlaws.cli.parser import parse_program
from qlaws.config import Config
from qlaws.verify import (
    EQUAL,
    INCONCLUSIVE,
    NOT_EQUAL,
    REFINES,
    REFINEMENT_CLAUSES,
    VIOLATES,
    check_eq,
    check_refines,
    hausdorff,
    unroll,
    verify_refinement_laws,
)

P = parse_program


def test_unitary_metric(lib):
    rep = check_eq(P("X[q]"), P("Z[q]"), lib)
    # ||X - Z||_F = 2
    assert rep.verdict == NOT_EQUAL and np.isclose(rep.residual, 2.0)
    assert rep.metric == "unitary-frobenius"


def test_program_metric_ignores_phase(lib):
    rep = check_eq(P("X[q]"), P("Z[q]"), lib, layer="program")
    # Choi matrices of X and Z are orthogonal rank-one projectors scaled by 2: distance sqrt(8)
    assert np.isclose(rep.residual, np.sqrt(8))
    assert check_eq(P("Z[q]; X[q]"), P("Y[q]"), lib, layer="program").equal
    assert not check_eq(P("Z[q]; X[q]"), P("Y[q]"), lib).equal


def test_circuit_layer_needs_circuits(lib):
    with pytest.raises(ValueError):
        check_eq(P("q := |0>"), P("skip"), lib, layer="circuit")


def test_init_restriction(lib):
    # equal only on inputs where q starts in |0>
    a, b = P("q := |0>; CNOT[q, r]"), P("q := |0>; skip")
    assert check_eq(a, b, lib).equal
    assert check_eq(a, b, lib, restrict=False).equal
    assert check_eq(P("q := |0>; X[q]"), P("q := |1>"), lib).equal


def test_inconclusive(lib):
    rep = check_eq(P("while MT[q] do skip od"), P("abort"), lib)
    assert rep.verdict == INCONCLUSIVE and not rep.truncation.converged


def test_hausdorff():
    d = np.array([[0.0, 3.0], [1.0, 5.0]])
    # row minima 0 and 1, column minima 0 and 3
    assert hausdorff(d) == 3.0


def test_nondeterministic_sets(lib):
    assert check_eq(P("X[q] |_| skip"), P("skip |_| X[q]"), lib).verdict == EQUAL
    assert check_eq(P("X[q] |_| skip"), P("skip"), lib).verdict == NOT_EQUAL


def test_refinement(lib):
    rep = check_refines(P("skip |_| X[q]"), P("skip"), lib)
    assert rep.verdict == VIOLATES and rep.violating is not None
    assert check_refines(P("skip"), P("skip |_| X[q]"), lib).verdict == REFINES
    rep = check_refines(P("skip |p:0.3| X[q]"), P("skip |_| X[q]"), lib)
    assert rep.refines
    assert np.allclose(sorted(rep.weights[0]), [0.3, 0.7], atol=1e-6)
    assert not check_refines(P("H[q]"), P("skip |_| X[q]"), lib).refines


def test_unroll_approximates_loop(lib):
    loop = P("while M[q] do H[q] od")
    deep = unroll("M", loop.reg, loop.body, 60)
    assert check_eq(deep, loop, lib, Config(eps_eq=1e-8)).equal
    assert not check_eq(unroll("M", loop.reg, loop.body, 2), loop, lib).equal


def test_refinement_clauses_small():
    reps = verify_refinement_laws(seed=1, trials=3)
    assert set(reps) == set(REFINEMENT_CLAUSES)
    for rep in reps.values():
        assert rep.ok, rep.to_dict()
