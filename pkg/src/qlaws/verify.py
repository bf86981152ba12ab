"""Semantic equivalence and refinement oracles.

Equivalence compares denotations on the union of the variables of both
sides:

* two circuits by the Frobenius distance of their unitaries (no global-phase
  quotient);
* deterministic programs by the Frobenius distance of their Choi matrices;
* nondeterministic programs by the Hausdorff distance between their finite
  sets of operations under the same metric.

When both programs start with the same initializations of disjoint
registers, the remainder is compared only on the inputs those
initializations can produce.  This is exact: the Choi distance of the whole
programs equals the restricted distance times ``sqrt(d)`` for the
initialized dimension ``d``, and it keeps large sandwich comparisons cheap.

Refinement ``P ⊑ Q`` holds when every operation of ``P`` is a convex
combination of operations of ``Q``; the weights are found by nonnegative
least squares over the real embedding of Choi matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from qlaws.config import DEFAULT, Config
from qlaws.linalg import Superop, choi_coords, embed, pairwise_choi_distances
from qlaws.semantics import Truncation, circ_sem, semantic_set
from qlaws.syntax import (
    Abort,
    IfMeas,
    Init,
    NdChoice,
    Node,
    ProbChoice,
    Skip,
    Var,
    canonical,
    is_circuit,
    qv,
    reg_dim,
    flatten_seq,
    seq,
)

EQUAL, NOT_EQUAL, INCONCLUSIVE = "equal", "not-equal", "inconclusive"
REFINES, VIOLATES = "refines", "violates"


@dataclass(frozen=True)
class EqReport:
    verdict: str
    residual: float
    metric: str
    space: tuple
    truncation: Truncation = field(default_factory=Truncation)
    restricted: bool = False

    @property
    def equal(self) -> bool:
        return self.verdict == EQUAL

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "residual": self.residual,
            "metric": self.metric,
            "space": [[v.name, v.dim] for v in self.space],
            "restricted_input": self.restricted,
            "truncation": {
                "loop_depth": self.truncation.loop_depth,
                "rec_depth": self.truncation.rec_depth,
                "converged": self.truncation.converged,
                "residual": self.truncation.residual,
            },
        }


def hausdorff(dist: np.ndarray) -> float:
    """Symmetric set distance from a matrix of pairwise distances."""
    if dist.size == 0:
        return 0.0 if dist.shape[0] == dist.shape[1] else np.inf
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def common_init_prefix(a: Node, b: Node) -> tuple[list, Node, Node]:
    """Initializations of disjoint registers that both programs start with."""
    ia, ib = flatten_seq(a), flatten_seq(b)
    prefix = []
    used: set = set()
    for x, y in zip(ia, ib):
        if not (isinstance(x, Init) and x == y) or used & set(x.reg):
            break
        prefix.append(x)
        used |= set(x.reg)
    k = len(prefix)
    return prefix, seq(*ia[k:]), seq(*ib[k:])


def init_isometry(inits: list, space: tuple) -> tuple[np.ndarray, int]:
    """Isometry ``|psi_1> (x) ... (x) I_rest`` onto ``space`` and the fixed dimension."""
    d = reg_dim(space)
    op = np.eye(d, dtype=complex)
    fixed = 1
    for node in inits:
        dr = reg_dim(node.reg)
        e0 = np.zeros(dr)
        e0[0] = 1
        op = embed(np.outer(node.state.vec, e0), node.reg, space) @ op
        fixed *= dr
    # keep the input columns whose initialized digits are 0
    regvars = {v for n in inits for v in n.reg}
    dims = [v.dim for v in space]
    idx = np.arange(d).reshape(dims)
    sl = tuple(0 if v in regvars else slice(None) for v in space)
    cols = idx[sl].reshape(-1)
    return op[:, cols], fixed


def check_eq(a: Node, b: Node, lib, cfg: Config = DEFAULT, space=None,
             restrict: bool = True, layer: str | None = None) -> EqReport:
    """Semantic equivalence of two circuits or programs.

    ``layer`` forces the metric: ``"circuit"`` compares unitaries (both sides
    must be circuits), ``"program"`` compares Choi matrices even for circuits.
    By default circuits are compared as unitaries.
    """
    space = canonical(qv(a) | qv(b) | set(space or ()))
    both_circuits = is_circuit(a) and is_circuit(b)
    if layer == "circuit" and not both_circuits:
        raise ValueError("the circuit metric needs two circuits")
    if layer not in (None, "circuit", "program"):
        raise ValueError(f"unknown layer {layer!r}")
    if both_circuits and layer != "program":
        ua = circ_sem(a, lib, cfg, space).unitary
        ub = circ_sem(b, lib, cfg, space).unitary
        r = float(np.linalg.norm(ua - ub))
        return EqReport(EQUAL if r <= cfg.eps_eq else NOT_EQUAL, r, "unitary-frobenius", space)
    kin, scale, restricted = None, 1.0, False
    if restrict:
        prefix, ra, rb = common_init_prefix(a, b)
        if prefix:
            kin, fixed = init_isometry(prefix, space)
            scale = float(np.sqrt(fixed))
            a, b, restricted = ra, rb, True
    sa = semantic_set(a, lib, cfg, space, kin)
    sb = semantic_set(b, lib, cfg, space, kin)
    trunc = sa.truncation.merge(sb.truncation)
    if len(sa.elems) == 1 and len(sb.elems) == 1:
        ca, cb = choi_coords([sa.elems[0], sb.elems[0]])
        r = float(np.linalg.norm(ca - cb)) * scale
        metric = "choi-frobenius"
    else:
        r = hausdorff(pairwise_choi_distances(sa.elems, sb.elems)) * scale
        metric = "choi-hausdorff"
    if not trunc.converged:
        verdict = INCONCLUSIVE
    else:
        verdict = EQUAL if r <= cfg.eps_eq else NOT_EQUAL
    return EqReport(verdict, r, metric, space, trunc, restricted)


# ---------------------------------------------------------------------------
# refinement


@dataclass(frozen=True)
class RefineReport:
    verdict: str
    weights: tuple  # one weight vector per element of the refining program
    residuals: tuple
    violating: int | None
    truncation: Truncation = field(default_factory=Truncation)
    note: str = "finite semantic sets: the closure of the convex hull is the hull itself"

    @property
    def refines(self) -> bool:
        return self.verdict == REFINES

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "weights": [list(map(float, w)) for w in self.weights],
            "residuals": list(map(float, self.residuals)),
            "violating_element": self.violating,
            "converged": self.truncation.converged,
            "note": self.note,
        }


def _real(c: np.ndarray) -> np.ndarray:
    return np.concatenate([c.real.reshape(-1), c.imag.reshape(-1)])


def convex_weights(target: Superop, hull: list) -> tuple[np.ndarray, float]:
    """Best convex weights expressing ``target`` over ``hull`` and the residual.

    The residual is the Choi Frobenius distance of the weighted sum plus the
    deviation of the weights from summing to one.
    """
    coords = choi_coords([target, *hull])
    b = _real(coords[0])
    cols = np.stack([_real(c) for c in coords[1:]], axis=1)
    lam = max(1.0, float(np.abs(cols).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    a_ext = np.vstack([cols, lam * np.ones((1, len(hull)))])
    b_ext = np.concatenate([b, [lam]])
    w, _ = nnls(a_ext, b_ext, maxiter=50 * max(10, len(hull)))
    resid = float(np.linalg.norm(cols @ w - b) + abs(w.sum() - 1))
    return w, resid


def check_refines(p: Node, q: Node, lib, cfg: Config = DEFAULT, space=None) -> RefineReport:
    """Whether ``p`` refines ``q``: each operation of ``p`` lies in the hull of ``q``."""
    space = canonical(qv(p) | qv(q) | set(space or ()))
    sp = semantic_set(p, lib, cfg, space)
    sq = semantic_set(q, lib, cfg, space)
    trunc = sp.truncation.merge(sq.truncation)
    weights, resid = [], []
    violating = None
    for i, e in enumerate(sp.elems):
        w, r = convex_weights(e, list(sq.elems))
        weights.append(tuple(w))
        resid.append(r)
        if r > cfg.eps_ref and violating is None:
            violating = i
    if not trunc.converged:
        verdict = INCONCLUSIVE
    else:
        verdict = REFINES if violating is None else VIOLATES
    return RefineReport(verdict, tuple(weights), tuple(resid), violating, trunc)


# ---------------------------------------------------------------------------
# refinement laws


def resolve(node: Node, rng) -> Node:
    """One deterministic resolution of every nondeterministic choice in ``node``."""
    if isinstance(node, NdChoice):
        return resolve(node.left if rng.random() < 0.5 else node.right, rng)
    kids = node.children()
    if not kids:
        return node
    return node.with_children(tuple(resolve(k, rng) for k in kids))


def unroll(meas: str, reg, body: Node, depth: int) -> Node:
    """The loop ``meas[reg] * body`` cut off after ``depth`` rounds (``abort`` below)."""
    out: Node = Abort()
    for _ in range(depth):
        out = IfMeas(meas, tuple(reg), (Skip(), seq(body, out)))
    return out


@dataclass
class ClauseReport:
    clause: str
    trials: int = 0
    passed: int = 0
    max_residual: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.trials

    def to_dict(self) -> dict:
        return {"clause": self.clause, "trials": self.trials, "passed": self.passed,
                "max_residual": self.max_residual, "failures": self.failures[:5]}


def _refined_pair(rng, lib, vars_):
    """``(P, Q)`` with ``P ⊑ Q`` by construction: P resolves Q, or mixes two resolutions."""
    from qlaws.randprog import random_program

    q, lib = random_program(vars_, 3, rng, lib, nondet=True, if_prob=0.3)
    if not isinstance(q, NdChoice) and rng.random() < 0.5:
        other, lib = random_program(vars_, 2, rng, lib)
        q = NdChoice(q, other)
    a, b = resolve(q, rng), resolve(q, rng)
    p = a if rng.random() < 0.5 else ProbChoice(float(rng.uniform(0.1, 0.9)), a, b)
    return p, q, lib


def _refinement_instances(clause: str, rng, lib):
    """``(lhs, rhs, lib)`` for one instance of a refinement clause."""
    from qlaws.randprog import random_ket, random_meas, random_program

    vars_ = (Var("q"), Var("r"))
    q0 = (vars_[0],)
    if clause == "prob-nd":
        a, lib = random_program(vars_, 3, rng, lib)
        b, lib = random_program(vars_, 3, rng, lib)
        p = float(rng.uniform(0.05, 0.95))
        return [(ProbChoice(p, a, b), NdChoice(a, b))], lib
    if clause == "test-seq":
        m, lib = random_meas(q0, rng, lib)
        body, lib = random_program(vars_, 3, rng, lib, nondet=True)
        return [(seq(IfMeas(m, q0, (Skip(), Skip())), body), IfMeas(m, q0, (body, body)))], lib
    if clause == "init-if-choice":
        m, lib = random_meas(q0, rng, lib)
        init = Init(q0, random_ket(2, rng))
        a, lib = random_program(vars_, 3, rng, lib)
        b, lib = random_program(vars_, 3, rng, lib)
        lhs = seq(init, IfMeas(m, q0, (seq(init, a), seq(init, b))))
        return [(lhs, seq(init, NdChoice(a, b)))], lib
    p, q, lib = _refined_pair(rng, lib, vars_)
    r, lib = random_program(vars_, 2, rng, lib)
    if clause == "mono-seq":
        return [(seq(p, r), seq(q, r)), (seq(r, p), seq(r, q))], lib
    if clause == "mono-if":
        m, lib = random_meas(q0, rng, lib)
        return [(IfMeas(m, q0, (p, r)), IfMeas(m, q0, (q, r))),
                (IfMeas(m, q0, (r, p)), IfMeas(m, q0, (r, q)))], lib
    if clause == "mono-loop":
        m, lib = random_meas(q0, rng, lib)
        k = int(rng.integers(1, 4))
        return [(unroll(m, q0, p, k), unroll(m, q0, q, k))], lib
    if clause == "mono-nd":
        return [(NdChoice(p, r), NdChoice(q, r)), (NdChoice(r, p), NdChoice(r, q))], lib
    if clause == "mono-prob":
        w = float(rng.uniform(0.05, 0.95))
        return [(ProbChoice(w, p, r), ProbChoice(w, q, r)), (ProbChoice(w, r, p), ProbChoice(w, r, q))], lib
    raise KeyError(clause)


REFINEMENT_CLAUSES = (
    "mono-seq",  # P ⊑ Q gives P;R ⊑ Q;R and R;P ⊑ R;Q
    "mono-if",  # refinement inside either branch of a measurement
    "mono-loop",  # refinement of a loop body, through finite unrollings
    "mono-nd",  # refinement under |_|
    "prob-nd",  # P |p| Q ⊑ P |_| Q
    "mono-prob",  # refinement under |p|
    "test-seq",  # [M]; P ⊑ if M (P) (P)
    "init-if-choice",  # after a reset, branching on M refines the plain choice
)


def verify_refinement_laws(seed: int = 42, trials: int = 50, lib=None, cfg: Config = DEFAULT,
                           clauses=REFINEMENT_CLAUSES) -> dict:
    """Check each refinement clause on random loop-free instances by convex feasibility."""
    import zlib

    from qlaws.library import Library

    base = lib or Library.standard()
    out = {}
    for clause in clauses:
        rep = ClauseReport(clause)
        for t in range(trials):
            rng = np.random.default_rng([seed, zlib.crc32(clause.encode()), t])
            pairs, lib_t = _refinement_instances(clause, rng, base)
            rep.trials += 1
            good = True
            for lhs, rhs in pairs:
                r = check_refines(lhs, rhs, lib_t, cfg)
                rep.max_residual = max(rep.max_residual, max(r.residuals, default=0.0))
                if not r.refines:
                    good = False
                    rep.failures.append({"trial": t, "verdict": r.verdict,
                                         "residual": max(r.residuals, default=0.0)})
            rep.passed += good
        out[clause] = rep
    return out
