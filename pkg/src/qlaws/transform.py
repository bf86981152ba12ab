"""Constructive transformation passes.

* :func:`normalize_circuit` rewrites a circuit into a sequence of flat qifs
  (guard in the standard basis, branches are gate sequences or ``skip``);
* :func:`normalize_program` rewrites a finite program into one if-statement
  over a synthesized measurement whose branches are circuits or ``abort``;
* :func:`defer_measurements` moves every measurement of a finite program to
  the end: a circuit on the program variables plus fresh auxiliaries,
  followed by one computational measurement of the auxiliaries that decides
  between ``skip`` and ``abort``;
* :func:`tail_to_loop` turns tail recursion into a while-loop.

Each pass returns a certificate carrying the output, the extended library,
the fresh variables, the synthesized library entries, machine-checked shape
flags and the oracle residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qlaws.config import DEFAULT, Config, DimensionCapError
from qlaws.laws.core import SynthesisFailed
from qlaws.linalg import completeness_residual, dilate_measurement, embed
from qlaws.semantics import circ_sem
from qlaws.syntax import (
    Abort,
    Call,
    Gate,
    IfMeas,
    Init,
    Ket,
    Mu,
    NdChoice,
    Node,
    ProbChoice,
    Qif,
    Seq,
    Skip,
    Var,
    While,
    basis_matrix,
    canonical,
    flatten_seq,
    free_calls,
    fresh_vars,
    is_circuit,
    qv,
    reg_dim,
    reg_dims,
    seq,
    seq_items,
    standard_basis,
)
from qlaws.verify import EqReport, check_eq

SKIP, ABORT = "skip", "abort"


class TransformError(ValueError):
    """Input outside the domain of a pass."""


class SchemaMismatch(TransformError):
    pass


@dataclass
class NormalFormCert:
    output: Node
    lib: object
    fresh: tuple = ()
    registered: tuple = ()
    shape: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)
    report: EqReport | None = None
    detail: dict = field(default_factory=dict)

    @property
    def residual(self) -> float | None:
        return None if self.report is None else self.report.residual

    @property
    def ok(self) -> bool:
        shape_ok = all(self.shape.values())
        return shape_ok and (self.report is None or self.report.equal)

    def to_dict(self) -> dict:
        return {
            "fresh": [[v.name, v.dim] for v in self.fresh],
            "registered": list(self.registered),
            "shape": dict(self.shape),
            "steps": list(self.steps),
            "detail": dict(self.detail),
            "oracle": None if self.report is None else self.report.to_dict(),
            "ok": self.ok,
        }


class _Synth:
    """Library extension shared by one pass."""

    def __init__(self, lib, cfg: Config):
        self.lib = lib
        self.cfg = cfg
        self.names: list[str] = []

    def _note(self, name: str, before) -> str:
        if self.lib is not before and name not in self.names:
            self.names.append(name)
        return name

    def gate(self, matrix, dims, prefix: str) -> str:
        before = self.lib
        found = before.find_gate(np.asarray(matrix, dtype=complex), dims)
        if found is None and not self.cfg.auto_register:
            raise SynthesisFailed(f"gate {prefix} would have to be synthesized (auto_register is off)")
        name, self.lib = before.register_gate(matrix, dims, prefix=prefix)
        return self._note(name, before)

    def meas(self, kraus, dims, prefix: str) -> str:
        before = self.lib
        found = before.find_meas(np.asarray(kraus, dtype=complex), dims)
        if found is None and not self.cfg.auto_register:
            raise SynthesisFailed(f"measurement {prefix} would have to be synthesized (auto_register is off)")
        name, self.lib = before.register_meas(kraus, dims, prefix=prefix)
        return self._note(name, before)


def _cap(vars_, cfg: Config) -> None:
    d = reg_dim(canonical(vars_))
    if d > cfg.dmax:
        raise DimensionCapError(f"the transformed program lives on dimension {d}, above the cap {cfg.dmax}")


# ---------------------------------------------------------------------------
# circuit normal form


def is_gate_sequence(node: Node) -> bool:
    if isinstance(node, (Skip, Gate)):
        return True
    if isinstance(node, Seq):
        return is_gate_sequence(node.first) and is_gate_sequence(node.second)
    return False


def _is_standard(basis) -> bool:
    d = len(basis)
    return all(k.basis_index() == i for i, k in enumerate(basis)) and all(k.dim == d for k in basis)


def is_flat_qif(node: Node) -> bool:
    return (isinstance(node, Qif) and _is_standard(node.basis)
            and all(is_gate_sequence(b) for b in node.branches))


def is_circuit_normal(node: Node) -> bool:
    return all(is_flat_qif(x) for x in flatten_seq(node))


def normalize_circuit(circuit: Node, lib, universe=(), cfg: Config = DEFAULT,
                      verify: bool = True) -> NormalFormCert:
    """Equivalent sequence of flat qifs.

    Gates are wrapped in a qif over one external qubit with identical
    branches; a qif with a non-standard guard basis is conjugated by the
    synthesized basis change and each of its (normalized) branches is fused
    into a flat qif over the joint guard.  Flat qifs already present are
    kept unchanged, so the pass is the identity on normal forms.
    """
    if not is_circuit(circuit):
        raise TransformError("normalize_circuit expects a circuit")
    syn = _Synth(lib, cfg)
    taken = frozenset(universe) | qv(circuit)
    aux: list[Var] = []
    steps: list = []

    def external() -> Var:
        if not aux:
            (v,), _ = fresh_vars(taken, 1)
            aux.append(v)
        return aux[0]

    def wrap(g: Node) -> Qif:
        r = external()
        steps.append({"case": "gate", "law": "CL-QifIdem", "gate": getattr(g, "name", "skip")})
        return Qif((r,), standard_basis(2), (g, g))

    def go(n: Node) -> list[Node]:
        if isinstance(n, Skip):
            return []
        if is_flat_qif(n):
            return [n]
        if isinstance(n, Gate):
            return [wrap(n)]
        if isinstance(n, Seq):
            return go(n.first) + go(n.second)
        assert isinstance(n, Qif)
        guard = n.reg
        d = reg_dim(guard)
        pre, post = [], []
        if not _is_standard(n.basis):
            u = basis_matrix(n.basis)
            g1 = syn.gate(u, reg_dims(guard), "G")
            g2 = syn.gate(u.conj().T, reg_dims(guard), "G")
            steps.append({"case": "qif", "law": "CL-ChangeBasis", "guard": [v.name for v in guard],
                          "into": g2, "out": g1})
            pre, post = [wrap(Gate(g2, guard))], [wrap(Gate(g1, guard))]
        body = []
        for i, branch in enumerate(n.branches):
            for flat in go(branch):
                r = flat.reg
                dr = reg_dim(r)
                kids = [Skip()] * (d * dr)
                kids[i * dr:(i + 1) * dr] = flat.branches
                body.append(Qif(tuple(guard) + tuple(r), standard_basis(d * dr), tuple(kids)))
            steps.append({"case": "qif", "law": "CL-Split", "branch": i})
        return pre + body + post

    if is_circuit_normal(circuit) and not isinstance(circuit, Skip):
        out = circuit
    else:
        items = go(circuit) or [wrap(Skip())]
        out = seq(*items)
    fresh = tuple(aux)
    _cap(qv(circuit) | set(fresh), cfg)
    shape = {
        "flat_qif_sequence": is_circuit_normal(out),
        "fresh_disjoint": not (set(fresh) & taken),
        "variables": qv(out) <= qv(circuit) | set(fresh),
    }
    cert = NormalFormCert(out, syn.lib, fresh, tuple(syn.names), shape, steps)
    if verify:
        cert.report = check_eq(circuit, out, syn.lib, cfg, layer="circuit")
    return cert


# ---------------------------------------------------------------------------
# program normal form


@dataclass
class _PNF:
    reg: tuple
    kraus: np.ndarray  # (outcomes, d, d) on reg
    branches: list

    def on(self, space: tuple) -> np.ndarray:
        return np.stack([embed(k, self.reg, space) for k in self.kraus])


_TRIVIAL = np.array([[[1.0]], [[0.0]]], dtype=complex)


def _check_finite(node: Node) -> None:
    if isinstance(node, (While, Mu, Call)):
        raise TransformError("the pass needs a finite program (no loops or recursion)")
    if isinstance(node, (NdChoice, ProbChoice)):
        raise TransformError("the pass needs a deterministic program (no choice)")
    for k in node.children():
        _check_finite(k)


def _prune(kraus, branches, tol=1e-14):
    keep = [i for i, k in enumerate(kraus) if np.linalg.norm(k) > tol]
    return kraus[keep], [branches[i] for i in keep]


def normalize_program(program: Node, lib, universe=(), cfg: Config = DEFAULT,
                      verify: bool = True) -> NormalFormCert:
    """Equivalent single if-statement whose branches are circuits or ``abort``.

    Circuits, ``skip`` and ``abort`` start from the trivial measurement
    ``{I, 0}``; an initialization ``q := |psi>`` is the measurement
    ``{|psi><i|}`` with ``skip`` branches.  Composition multiplies Kraus
    operators (``N_n U_m M_m`` after a circuit branch, ``M_m`` alone after an
    ``abort`` branch) and nested ifs multiply ``N_{m,n} M_m``.  Outcomes whose
    Kraus operator vanishes are dropped while combining.
    """
    _check_finite(program)
    syn = _Synth(lib, cfg)
    steps: list = []

    def unitary(c: Node, space) -> np.ndarray:
        return circ_sem(c, syn.lib, cfg, space).unitary

    def go(n: Node) -> _PNF:
        if isinstance(n, Abort):
            return _PNF((), _TRIVIAL, [Abort(), Skip()])
        if is_circuit(n):
            return _PNF((), _TRIVIAL, [n, Abort()])
        if isinstance(n, Init):
            d = reg_dim(n.reg)
            ks = np.stack([np.outer(n.state.vec, np.eye(d)[i]) for i in range(d)])
            return _PNF(canonical(n.reg), np.stack([embed(k, n.reg, canonical(n.reg)) for k in ks]),
                        [Skip()] * d)
        if isinstance(n, Seq):
            a, b = go(n.first), go(n.second)
            space = canonical(set(a.reg) | set(b.reg) | {v for c in a.branches for v in qv(c)})
            _cap(space, cfg)
            ma, nb = a.on(space), b.on(space)
            ks, br = [], []
            for m, c in zip(ma, a.branches):
                if isinstance(c, Abort):
                    ks.append(m)
                    br.append(Abort())
                    continue
                um = unitary(c, space) @ m
                for nn, dn in zip(nb, b.branches):
                    ks.append(nn @ um)
                    br.append(dn)
            kraus, br = _prune(np.stack(ks), br)
            steps.append({"case": "seq", "outcomes": len(br)})
            return _PNF(space, kraus, br)
        if isinstance(n, IfMeas):
            subs = [go(p) for p in n.branches]
            space = canonical(set(n.reg).union(*[set(s.reg) for s in subs]))
            _cap(space, cfg)
            top = syn.lib.kraus(n.meas, reg_dims(n.reg))
            ks, br = [], []
            for m, s in zip(top, subs):
                mm = embed(m, n.reg, space)
                for k, c in zip(s.on(space), s.branches):
                    ks.append(k @ mm)
                    br.append(c)
            kraus, br = _prune(np.stack(ks), br)
            steps.append({"case": "if", "outcomes": len(br)})
            return _PNF(space, kraus, br)
        raise TransformError(f"unsupported node {type(n).__name__}")

    nf = go(program)
    fresh: tuple = ()
    reg, kraus, branches = nf.reg, nf.kraus, list(nf.branches)
    if not reg:
        qubits = [v for v in canonical(qv(program)) if v.dim == 2]
        if qubits:
            q = qubits[0]
        else:
            (q,), _ = fresh_vars(frozenset(universe) | qv(program), 1)
            fresh = (q,)
        reg = (q,)
        kraus = np.stack([embed(k, (), reg) for k in kraus])
        branches = [Gate("I", reg) if isinstance(c, Skip) else c for c in branches]
        steps.append({"case": "trivial", "qubit": q.name})
    comp = completeness_residual(kraus)
    if comp > cfg.eps_comp:
        raise TransformError(f"synthesized measurement is incomplete (residual {comp:.3g})")
    name = syn.meas(kraus, reg_dims(reg), "K")
    out = IfMeas(name, reg, tuple(branches))
    shape = {
        "single_if": isinstance(out, IfMeas),
        "branches_circuit_or_abort": all(isinstance(c, Abort) or is_circuit(c) for c in out.branches),
        "complete": comp <= cfg.eps_comp,
        "variables": qv(out) <= qv(program) | set(fresh),
    }
    cert = NormalFormCert(out, syn.lib, fresh, tuple(syn.names), shape, steps,
                          detail={"completeness_residual": comp})
    if verify:
        cert.report = check_eq(program, out, syn.lib, cfg, layer="program")
    return cert


# ---------------------------------------------------------------------------
# deferred measurements


@dataclass
class Deferred:
    """``aux := |0>; P  ==  aux := |0>; circuit; if[aux](m -> classifier[m]); aux := |0>``."""

    program: Node
    circuit: Node
    aux: tuple
    classifier: tuple  # "skip" | "abort" per computational outcome of aux
    cert: NormalFormCert

    def resets(self) -> list[Node]:
        return [Init((v,), Ket.basis(0, v.dim)) for v in self.aux]

    def decision(self) -> Node:
        return IfMeas("M", self.aux, tuple(Skip() if c == SKIP else Abort() for c in self.classifier))

    def sandwich(self) -> tuple[Node, Node]:
        lhs = seq(*self.resets(), self.program)
        rhs = seq(*self.resets(), self.circuit, self.decision(), *self.resets())
        return lhs, rhs


def state_prep(vec: np.ndarray) -> np.ndarray:
    """A unitary whose first column is ``vec``."""
    d = vec.shape[0]
    m = np.eye(d, dtype=complex)
    m[:, 0] = vec
    q, _ = np.linalg.qr(m)
    # qr returns vec up to a phase in the first column
    q[:, 0] = vec
    return q


def deferred_aux_dim(program: Node, lib) -> int:
    """Dimension of the auxiliary register :func:`defer_measurements` allocates."""

    def go(n: Node) -> int:
        if isinstance(n, Abort) or is_circuit(n):
            return 1
        if isinstance(n, Init):
            return reg_dim(n.reg)
        if isinstance(n, Seq):
            return go(n.first) * go(n.second)
        if isinstance(n, IfMeas):
            k = lib.outcomes(n.meas, reg_dims(n.reg))
            return k * int(np.prod([go(p) for p in n.branches]))
        raise TransformError(f"unsupported node {type(n).__name__}")

    return max(go(program), 2)


def defer_measurements(program: Node, lib, universe=(), cfg: Config = DEFAULT,
                       verify: bool = True) -> Deferred:
    """Circuit plus a final auxiliary measurement equal to ``program``.

    Auxiliaries are allocated on demand: ``skip``, ``abort`` and circuits
    need none unless they are the whole program.  Initializations swap in a
    freshly prepared auxiliary; an if-statement dilates its measurement onto
    a fresh outcome register and runs the branch circuits in a qif over it.
    """
    _check_finite(program)
    if reg_dim(canonical(qv(program))) * deferred_aux_dim(program, lib) > cfg.dmax:
        raise DimensionCapError("deferring the measurements would exceed the dimension cap "
                                f"{cfg.dmax}")
    syn = _Synth(lib, cfg)
    taken = set(universe) | set(qv(program))
    steps: list = []

    def fresh(dim: int) -> Var:
        (v,), _ = fresh_vars(taken, 1, dim=dim)
        taken.add(v)
        return v

    # each result: (circuit, aux tuple, classifier over reg_dim(aux) outcomes)
    def go(n: Node):
        if isinstance(n, Abort):
            return Skip(), (), (ABORT,)
        if is_circuit(n):
            return n, (), (SKIP,)
        if isinstance(n, Init):
            a = tuple(fresh(v.dim) for v in n.reg)
            prep = syn.gate(state_prep(n.state.vec), reg_dims(n.reg), "Uphi")
            steps.append({"case": "init", "aux": [v.name for v in a]})
            circ = seq(Gate(prep, a), Gate("SWAP", a + tuple(n.reg)))
            return circ, a, (SKIP,) * reg_dim(a)
        if isinstance(n, Seq):
            c1, a1, k1 = go(n.first)
            c2, a2, k2 = go(n.second)
            cls = tuple(SKIP if x == SKIP and y == SKIP else ABORT for x in k1 for y in k2)
            return seq(*[c for c in (c1, c2) if not isinstance(c, Skip)]), a1 + a2, cls
        if isinstance(n, IfMeas):
            kraus = syn.lib.kraus(n.meas, reg_dims(n.reg))
            k = kraus.shape[0]
            subs = [go(p) for p in n.branches]
            a = fresh(k)
            u = syn.gate(dilate_measurement(kraus, cfg.eps_comp), reg_dims(n.reg) + (k,), "UM")
            rs = [s[1] for s in subs]
            aux = (a,) + tuple(v for r in rs for v in r)
            cls = []
            # digits of an outcome of (a, r_0, r_1, ...): branch i reads only r_i
            sizes = [reg_dim(r) for r in rs]
            for idx in np.ndindex(*((k,) + tuple(sizes))):
                i = idx[0]
                j = idx[1 + i]
                cls.append(subs[i][2][j])
            steps.append({"case": "if", "meas": n.meas, "aux": a.name, "outcomes": k})
            body = Qif((a,), standard_basis(k), tuple(s[0] for s in subs))
            return seq(Gate(u, tuple(n.reg) + (a,)), body), aux, tuple(cls)
        raise TransformError(f"unsupported node {type(n).__name__}")

    circ, aux, cls = go(program)
    if not aux:
        a = fresh(2)
        aux, cls = (a,), cls * 2
        steps.append({"case": "trivial", "aux": a.name})
    _cap(qv(program) | set(aux), cfg)
    if set(aux) & qv(program):
        raise AssertionError("auxiliary variables must be fresh")
    shape = {
        "circuit": is_circuit(circ),
        "classifier": len(cls) == reg_dim(aux) and set(cls) <= {SKIP, ABORT},
        "variables": qv(circ) <= qv(program) | set(aux),
        "fresh_disjoint": not (set(aux) & qv(program)),
    }
    cert = NormalFormCert(circ, syn.lib, tuple(aux), tuple(syn.names), shape, steps)
    out = Deferred(program, circ, tuple(aux), tuple(cls), cert)
    if verify:
        lhs, rhs = out.sandwich()
        cert.report = check_eq(lhs, rhs, syn.lib, cfg, layer="program")
    return out


# ---------------------------------------------------------------------------
# tail recursion


def _recursion_free(node: Node) -> bool:
    return not free_calls(node) and not any(isinstance(x, Mu) for x in _walk(node))


def _walk(node: Node):
    yield node
    for k in node.children():
        yield from _walk(k)


def tail_to_loop(program: Node) -> Node:
    """``mu X.(Q <M> (P; X))`` becomes ``(M * P); Q``."""
    if not (isinstance(program, Mu) and isinstance(program.body, IfMeas)
            and len(program.body.branches) == 2):
        raise SchemaMismatch("expected mu X . if M[q] (0 -> Q) [] (1 -> P; X) fi")
    x = program.ident
    q, go = program.body.branches
    items = seq_items(go)
    if items[-1] != Call(x):
        raise SchemaMismatch("the recursive call must be the last statement of branch 1")
    p = seq(*items[:-1])
    if not (_recursion_free(p) and _recursion_free(q)):
        raise SchemaMismatch("loop body and continuation must be free of recursion")
    m = program.body
    return Seq(While(m.meas, m.reg, p), q)


TAIL_DEPTH = 64


def check_tail(program: Node, lib, cfg: Config = DEFAULT, depth: int = TAIL_DEPTH,
               tol: float = 1e-8) -> EqReport:
    """Truncated recursion semantics against the loop semantics of the rewrite.

    Both unrollings stop at ``depth``; a non-converged side makes the
    verdict inconclusive.
    """
    loop = tail_to_loop(program)
    c = cfg.replace(loop_cap=depth, rec_cap=depth, eps_eq=tol)
    return check_eq(program, loop, lib, c, layer="program")


__all__ = [
    "ABORT",
    "SKIP",
    "Deferred",
    "NormalFormCert",
    "SchemaMismatch",
    "TransformError",
    "check_tail",
    "defer_measurements",
    "deferred_aux_dim",
    "is_circuit_normal",
    "is_flat_qif",
    "is_gate_sequence",
    "normalize_circuit",
    "normalize_program",
    "state_prep",
    "tail_to_loop",
]
