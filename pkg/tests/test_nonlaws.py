import json

import numpy as np
import pytest

from qlaws.cli.workspace import load_workspace
from qlaws.laws.harness import HARNESS_CFG
from qlaws.laws.nonlaws import MIN_RESIDUAL, NECESSITY, NONLAWS, necessity_witness, search_nonlaw
from qlaws.linalg import Superop
from qlaws.measrel import is_projective
from qlaws.semantics import semantic_set
from qlaws.syntax import qv
from qlaws.verify import check_eq


@pytest.fixture(scope="module")
def committed(corpus):
    return {w["name"]: w for w in json.loads((corpus / "witnesses.json").read_text())}


def test_every_search_has_a_committed_witness(committed):
    names = set(NONLAWS) | {f"necessity:{k}" for k in NECESSITY}
    assert names == set(committed)


@pytest.mark.parametrize("name", sorted(NONLAWS))
def test_committed_nonlaw_reproduces(name, committed, corpus):
    w = committed[name]
    ws = load_workspace(corpus)
    (a, lib_a), (b, lib_b) = ws.load_program(w["lhs"]), ws.load_program(w["rhs"])
    rep = check_eq(a.program, b.program, lib_a.merge(lib_b), HARNESS_CFG)
    assert rep.verdict == "not-equal"
    assert rep.residual >= MIN_RESIDUAL
    assert np.isclose(rep.residual, w["residual"], rtol=1e-6)


@pytest.mark.parametrize("name", sorted(NONLAWS))
def test_search_regenerates_same_witness(name, committed):
    w = search_nonlaw(name, seed=committed[name]["seed"])
    assert w is not None and w.trial == committed[name]["trial"]
    assert np.isclose(w.residual, committed[name]["residual"], rtol=1e-6)


def test_ifassoc_witness_uses_nonprojective_measurement(committed, corpus):
    ws = load_workspace(corpus)
    parsed, lib = ws.load_program(committed["IfAssoc-nonprojective"]["lhs"])
    name = parsed.program.meas
    dims = tuple(v.dim for v in parsed.program.reg)
    assert not is_projective(lib.kraus(name, dims))


def test_nd5_sets_differ_by_hand(committed, corpus):
    # independent check: some element of one side is far from every element of the other
    ws = load_workspace(corpus)
    w = committed["Nd5-quantum"]
    (a, la), (b, lb) = ws.load_program(w["lhs"]), ws.load_program(w["rhs"])
    lib = la.merge(lb)
    space = sorted(qv(a.program) | qv(b.program), key=lambda v: v.name)
    sa = semantic_set(a.program, lib, HARNESS_CFG, space).elems
    sb = semantic_set(b.program, lib, HARNESS_CFG, space).elems
    dense = lambda s: [e.choi() for e in s]  # noqa: E731
    gaps = [min(np.linalg.norm(x - y) for y in dense(sb)) for x in dense(sa)]
    gaps += [min(np.linalg.norm(x - y) for y in dense(sa)) for x in dense(sb)]
    assert max(gaps) >= MIN_RESIDUAL
    assert all(isinstance(e, Superop) for e in sa)


@pytest.mark.parametrize("law_id", sorted(NECESSITY))
def test_necessity(law_id, committed, corpus):
    w = committed[f"necessity:{law_id}"]
    got = necessity_witness(law_id, seed=w["seed"])
    assert got is not None and got.trial == w["trial"]
    assert got.side_residual > 0
    assert np.isclose(got.residual, w["residual"], rtol=1e-6)
    ws = load_workspace(corpus)
    (a, la), (b, lb) = ws.load_program(w["lhs"]), ws.load_program(w["rhs"])
    rep = check_eq(a.program, b.program, la.merge(lb), HARNESS_CFG)
    assert rep.verdict == "not-equal" and rep.residual >= MIN_RESIDUAL
