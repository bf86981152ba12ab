import numpy as np
import pytest

from qlaws.cli.parser import parse_program
from qlaws.config import Config
from qlaws.laws import (
    CATALOG,
    LAYERS,
    RTL,
    NoMatch,
    SideConditionFailed,
    SynthesisFailed,
    apply_law,
    get_law,
    manifest,
)
from qlaws.laws.harness import verify_law
from qlaws.linalg import random_measurement
from qlaws.semantics import circ_sem
from qlaws.syntax import Var, format_path


def test_manifest():
    rows = manifest()
    assert len(rows) >= 50
    assert len({r["id"] for r in rows}) == len(rows)
    assert {r["layer"] for r in rows} == set(LAYERS)
    assert all(r["title"] for r in rows)
    with pytest.raises(KeyError):
        get_law("nope")


@pytest.mark.parametrize("law_id", sorted(CATALOG))
def test_law_quick(law_id):
    """A handful of seeded instances per law; the full run is acceptance criterion 1."""
    rep = verify_law(CATALOG[law_id], trials=4, seed=7)
    assert rep.ok, rep.failures
    assert rep.max_residual <= 1e-9


def test_qif_idem_by_hand(lib):
    p = parse_program("qif [q] (|+> -> H[r]) [] (|-> -> H[r]) fiq")
    res = apply_law(CATALOG["CL-QifIdem"], p, lib, path=())
    assert res.program == parse_program("H[r]")


def test_seq_comm_swaps_disjoint(lib):
    res = apply_law(CATALOG["PL-SeqComm"], parse_program("X[q]; H[r]"), lib, path=())
    assert res.program == parse_program("H[r]; X[q]")
    with pytest.raises(SideConditionFailed):
        apply_law(CATALOG["PL-SeqComm"], parse_program("X[q]; H[q]"), lib, path=())


def test_no_match(lib):
    with pytest.raises(NoMatch):
        apply_law(CATALOG["CL-QifIdem"], parse_program("X[r]"), lib, path=())


def test_gate_fuse_synthesis(lib):
    p = parse_program("H[q]; S[q]")
    with pytest.raises(SynthesisFailed):
        apply_law(CATALOG["CL-GateFuse"], p, lib, path=(), cfg=Config(auto_register=False))
    res = apply_law(CATALOG["CL-GateFuse"], p, lib, path=())
    name = res.program.name
    assert name not in lib.gates and name in res.lib.gates
    s, h = lib.gate_matrix("S", (2,)), lib.gate_matrix("H", (2,))
    assert np.allclose(res.lib.gate_matrix(name, (2,)), s @ h)
    # fusing back to an existing gate needs no synthesis
    res = apply_law(CATALOG["CL-GateFuse"], parse_program("X[q]; X[q]"), lib, path=(),
                    cfg=Config(auto_register=False))
    assert res.program == parse_program("I[q]")


def test_if_assoc_needs_projective(lib):
    m = random_measurement(2, 2, np.random.default_rng(0))
    _, lib2 = lib.register_meas(m, (2,), name="N")
    p = parse_program("if N[q] (0 -> skip) [] (1 -> if N[q] (0 -> X[r]) [] (1 -> H[r]) fi) fi")
    with pytest.raises(SideConditionFailed):
        apply_law(CATALOG["PL-IfAssoc"], p, lib2, path=())
    proj = parse_program("if M[q] (0 -> skip) [] (1 -> if M[q] (0 -> X[r]) [] (1 -> H[r]) fi) fi")
    res = apply_law(CATALOG["PL-IfAssoc"], proj, lib, path=())
    assert res.program == parse_program("if M[q] (0 -> skip) [] (1 -> H[r]) fi")


def test_windowed_match_in_spine(lib):
    p = parse_program("Z[r]; X[q]; X[q]; H[r]")
    res = apply_law(CATALOG["CL-GateFuse"], p, lib, path=(1,), offset=0)
    assert res.program == parse_program("Z[r]; I[q]; H[r]")
    u = circ_sem(p, lib, space=(Var("q"), Var("r"))).unitary
    v = circ_sem(res.program, lib, space=(Var("q"), Var("r"))).unitary
    assert np.allclose(u, v)


def test_search_finds_site(lib):
    p = parse_program("H[r]; X[q] <- r -> X[q]")
    res = apply_law(CATALOG["CL-QifIdem"], p, lib)
    assert format_path(res.path) == "1"
    assert res.program == parse_program("H[r]; X[q]")


def test_right_to_left(lib):
    res = apply_law(CATALOG["ND-Comm"], parse_program("skip |_| X[q]"), lib, path=(), direction=RTL)
    assert res.program == parse_program("X[q] |_| skip")
