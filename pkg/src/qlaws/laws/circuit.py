"""Laws of the circuit layer: quantum if-statements, gates and quantum choice."""

from __future__ import annotations

import numpy as np

from qlaws.laws.core import FnRule, Law, Meta, PatternRule, SynthesisFailed
from qlaws.laws.util import (
    Instance,
    add_gate,
    as_reg,
    basis_change,
    common_first,
    common_last,
    disjoint,
    gate_matrix,
    kets,
    normalize_basis,
    only_branch,
    split_first,
    strip_first,
    strip_last,
)
from qlaws.randprog import random_basis, random_circuit, random_gate
from qlaws.syntax import (
    Gate,
    Ket,
    Qif,
    Seq,
    Skip,
    Var,
    basis_matrix,
    is_circuit,
    qv,
    reg_dim,
    reg_dims,
    seq,
    seq_items,
    standard_basis,
)

C1, C2, C3 = Meta("C1", "circ"), Meta("C2", "circ"), Meta("C3", "circ")


def _circ_qif(n):
    return isinstance(n, Qif) and is_circuit(n)


# -- changing basis ----------------------------------------------------------


def _cb_match(n, ctx):
    return {"q": n.reg, "psi": n.basis, "Cs": n.branches} if _circ_qif(n) else None


def _cb_build(b, ctx):
    d = reg_dim(b["q"])
    phi = tuple(ctx.param("basis") or standard_basis(d))
    if len(phi) != d:
        raise SynthesisFailed("target basis has the wrong size")
    u = basis_change(phi, b["psi"])
    dims = reg_dims(b["q"])
    name, ctx = add_gate(ctx, u, dims, "B")
    dname, ctx = add_gate(ctx, u.conj().T, dims, "B")
    b = {**b, "U": name, "Ud": dname, "phi": phi}
    return seq(Gate(dname, b["q"]), Qif(b["q"], phi, b["Cs"]), Gate(name, b["q"])), ctx, b


def _cb_back_match(n, ctx):
    items = seq_items(n)
    if len(items) != 3:
        return None
    g1, qf, g2 = items
    if not (isinstance(g1, Gate) and _circ_qif(qf) and isinstance(g2, Gate)):
        return None
    if not (g1.reg == qf.reg == g2.reg):
        return None
    return {"q": qf.reg, "phi": qf.basis, "Cs": qf.branches, "Ud": g1, "U": g2}


def _cb_back_side(b, ctx):
    u = gate_matrix(ctx, b["U"])
    v = gate_matrix(ctx, b["Ud"])
    r = float(np.linalg.norm(v - u.conj().T))
    return r <= ctx.cfg.eps_orth, r


def _cb_back_build(b, ctx):
    u = gate_matrix(ctx, b["U"])
    psi = kets(u @ basis_matrix(b["phi"]))
    return Qif(b["q"], psi, b["Cs"])


# -- symmetry ----------------------------------------------------------------


def _sym_build(b, ctx):
    d = len(b["Cs"])
    perm = tuple(ctx.param("perm") or range(d - 1, -1, -1))
    if sorted(perm) != list(range(d)):
        raise SynthesisFailed("perm must be a permutation of the branch indices")
    return Qif(b["q"], tuple(b["psi"][i] for i in perm), tuple(b["Cs"][i] for i in perm))


# -- idempotence -------------------------------------------------------------


def _idem_match(n, ctx):
    if _circ_qif(n) and all(c == n.branches[0] for c in n.branches):
        return {"q": n.reg, "C": n.branches[0]}
    return None


def _idem_back_match(n, ctx):
    return {"C": n} if is_circuit(n) and ctx.param("reg") is not None else None


def _idem_back_side(b, ctx):
    q = as_reg(ctx.param("reg"))
    return bool(q) and disjoint(q, qv(b["C"]))


def _idem_back_build(b, ctx):
    q = as_reg(ctx.param("reg"))
    d = reg_dim(q)
    basis = tuple(ctx.param("basis") or standard_basis(d))
    return Qif(q, basis, (b["C"],) * d)


# -- distributivity ----------------------------------------------------------


def _dist_match(n, ctx):
    if not (_circ_qif(n) and len(n.branches) == 2 and isinstance(n.branches[1], Qif)):
        return None
    inner = n.branches[1]
    if len(inner.branches) != 2:
        return None
    return {"q1": n.reg, "B1": n.basis, "C": n.branches[0], "q2": inner.reg, "B2": inner.basis,
            "C0": inner.branches[0], "C1": inner.branches[1]}


def _dist_side(b, ctx):
    return disjoint(b["q2"], qv(b["C"]))


def _dist_build(b, ctx):
    q1, B1 = b["q1"], b["B1"]
    return Qif(b["q2"], b["B2"], (Qif(q1, B1, (b["C"], b["C0"])), Qif(q1, B1, (b["C"], b["C1"]))))


def _dist_back_match(n, ctx):
    if not (_circ_qif(n) and len(n.branches) == 2):
        return None
    a, c = n.branches
    if not (isinstance(a, Qif) and isinstance(c, Qif) and a.reg == c.reg and a.basis == c.basis):
        return None
    if len(a.branches) != 2 or len(c.branches) != 2 or a.branches[0] != c.branches[0]:
        return None
    return {"q2": n.reg, "B2": n.basis, "q1": a.reg, "B1": a.basis, "C": a.branches[0],
            "C0": a.branches[1], "C1": c.branches[1]}


def _dist_back_build(b, ctx):
    return Qif(b["q1"], b["B1"], (b["C"], Qif(b["q2"], b["B2"], (b["C0"], b["C1"]))))


# -- nested qif --------------------------------------------------------------


def _nest_match(n, ctx):
    if not _circ_qif(n):
        return None
    inner = n.branches
    if not all(isinstance(c, Qif) for c in inner):
        return None
    q1, B1 = inner[0].reg, inner[0].basis
    if not all(c.reg == q1 and c.basis == B1 for c in inner):
        return None
    return {"q2": n.reg, "B2": n.basis, "q1": q1, "B1": B1, "rows": tuple(c.branches for c in inner)}


def _nest_build(b, ctx):
    basis, branches = [], []
    for j, psi in enumerate(b["B2"]):
        for i, phi in enumerate(b["B1"]):
            basis.append(Ket.from_array(np.kron(psi.vec, phi.vec)))
            branches.append(b["rows"][j][i])
    return Qif(b["q2"] + b["q1"], tuple(basis), tuple(branches))


def _nest_back_match(n, ctx):
    if not (_circ_qif(n) and len(n.reg) >= 2):
        return None
    if n.basis != standard_basis(reg_dim(n.reg)):
        return None
    k = int(ctx.param("split", 1))
    if not 0 < k < len(n.reg):
        return None
    return {"outer": n.reg[:k], "inner": n.reg[k:], "Cs": n.branches}


def _nest_back_build(b, ctx):
    do, di = reg_dim(b["outer"]), reg_dim(b["inner"])
    rows = [Qif(b["inner"], standard_basis(di), tuple(b["Cs"][j * di:(j + 1) * di])) for j in range(do)]
    return Qif(b["outer"], standard_basis(do), tuple(rows))


# -- unit and identity -------------------------------------------------------


def _unit_match(n, ctx):
    if isinstance(n, Seq) and is_circuit(n):
        if n.first == Skip():
            return {"C": n.second}
        if n.second == Skip():
            return {"C": n.first}
    return None


def _unit_back_build(b, ctx):
    return Seq(b["C"], Skip()) if ctx.param("form") == "right" else Seq(Skip(), b["C"])


def _ident_match(n, ctx):
    return {"g": n} if isinstance(n, Gate) else None


def _ident_side(b, ctx):
    u = gate_matrix(ctx, b["g"])
    r = float(np.linalg.norm(u - np.eye(u.shape[0])))
    return r <= ctx.cfg.eps_eq, r


def _ident_back_match(n, ctx):
    return {} if n == Skip() else None


def _ident_back_build(b, ctx):
    q = as_reg(ctx.param("reg"))
    if not q:
        raise SynthesisFailed("identity introduction needs a register parameter")
    return Gate("I", q)


# -- gate fusion and parallel composition -------------------------------------


def _fuse_match(n, ctx):
    if isinstance(n, Seq) and isinstance(n.first, Gate) and isinstance(n.second, Gate):
        if n.first.reg == n.second.reg:
            return {"U1": n.first, "U2": n.second}
    return None


def _fuse_build(b, ctx):
    g1, g2 = b["U1"], b["U2"]
    w = gate_matrix(ctx, g2) @ gate_matrix(ctx, g1)
    name, ctx = add_gate(ctx, w, reg_dims(g1.reg), "G", f"{g2.name}_{g1.name}")
    return Gate(name, g1.reg), ctx, {**b, "W": name}


def _fuse_back_match(n, ctx):
    return {"W": n} if isinstance(n, Gate) else None


def _fuse_back_build(b, ctx):
    first = ctx.param("first")
    if not first:
        raise SynthesisFailed("splitting a gate needs the name of the first factor")
    w = b["W"]
    dims = reg_dims(w.reg)
    u1 = ctx.lib.gate_matrix(first, dims)
    u2 = gate_matrix(ctx, w) @ u1.conj().T
    name, ctx = add_gate(ctx, u2, dims, "G")
    return seq(Gate(first, w.reg), Gate(name, w.reg)), ctx, {**b, "U2": name}


def _par_match(n, ctx):
    if isinstance(n, Seq) and isinstance(n.first, Gate) and isinstance(n.second, Gate):
        if disjoint(n.first.reg, n.second.reg):
            return {"U1": n.first, "U2": n.second}
    return None


def _par_build(b, ctx):
    g1, g2 = b["U1"], b["U2"]
    w = np.kron(gate_matrix(ctx, g1), gate_matrix(ctx, g2))
    reg = g1.reg + g2.reg
    name, ctx = add_gate(ctx, w, reg_dims(reg), "G", f"{g1.name}_x_{g2.name}")
    return Gate(name, reg), ctx, {**b, "W": name}


def factor_kron(w: np.ndarray, da: int, db: int, tol: float = 1e-9):
    """Factors ``A (x) B = w`` with unitary ``A``, ``B``, or None."""
    t = w.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    u, s, vh = np.linalg.svd(t)
    if len(s) > 1 and s[1] > tol * max(1.0, s[0]):
        return None
    a = np.sqrt(da) * u[:, 0].reshape(da, da)
    bm = (s[0] / np.sqrt(da)) * vh[0].reshape(db, db)
    if np.linalg.norm(np.kron(a, bm) - w) > 1e-8:
        return None
    return a, bm


def _par_back_match(n, ctx):
    if not (isinstance(n, Gate) and len(n.reg) >= 2):
        return None
    return {"W": n}


def _par_back_build(b, ctx):
    w = b["W"]
    u = gate_matrix(ctx, w)
    splits = [int(ctx.param("split"))] if ctx.param("split") else range(1, len(w.reg))
    for k in splits:
        ra, rb = w.reg[:k], w.reg[k:]
        f = factor_kron(u, reg_dim(ra), reg_dim(rb))
        if f is None:
            continue
        na, ctx = add_gate(ctx, f[0], reg_dims(ra), "G")
        nb, ctx = add_gate(ctx, f[1], reg_dims(rb), "G")
        return seq(Gate(na, ra), Gate(nb, rb)), ctx, {**b, "U1": na, "U2": nb}
    raise SynthesisFailed(f"gate {w.name} is not a tensor product across its register")


# -- qif sequentiality and distributivity -------------------------------------


def _qseq_match(n, ctx):
    if isinstance(n, Seq) and _circ_qif(n.first) and _circ_qif(n.second):
        a, c = n.first, n.second
        if a.reg == c.reg and a.basis == c.basis:
            return {"q": a.reg, "B": a.basis, "Cs": a.branches, "Ds": c.branches}
    return None


def _qseq_build(b, ctx):
    return Qif(b["q"], b["B"], tuple(Seq(c, d) for c, d in zip(b["Cs"], b["Ds"])))


def _qseq_back_match(n, ctx):
    if _circ_qif(n) and any(isinstance(c, Seq) for c in n.branches):
        return {"q": n.reg, "B": n.basis, "Bs": n.branches}
    return None


def _qseq_back_build(b, ctx):
    pairs = [split_first(c) for c in b["Bs"]]
    return Seq(Qif(b["q"], b["B"], tuple(p[0] for p in pairs)),
               Qif(b["q"], b["B"], tuple(p[1] for p in pairs)))


def _dseq_match(n, ctx):
    if not (isinstance(n, Seq) and is_circuit(n)):
        return None
    side = ctx.param("side")
    if side in (None, "left") and _circ_qif(n.second) and disjoint(n.second.reg, qv(n.first)):
        return {"side": "left", "C": n.first, "Q": n.second}
    if side in (None, "right") and _circ_qif(n.first) and disjoint(n.first.reg, qv(n.second)):
        return {"side": "right", "C": n.second, "Q": n.first}
    return None


def _dseq_side(b, ctx):
    return disjoint(b["Q"].reg, qv(b["C"]))


def _dseq_build(b, ctx):
    q, c = b["Q"], b["C"]
    if b["side"] == "left":
        return Qif(q.reg, q.basis, tuple(Seq(c, x) for x in q.branches))
    return Qif(q.reg, q.basis, tuple(Seq(x, c) for x in q.branches))


def _dseq_back_match(n, ctx):
    if not _circ_qif(n):
        return None
    side = ctx.param("side")
    if side in (None, "left"):
        c = common_first(n.branches)
        if c is not None and any(isinstance(x, Seq) for x in n.branches):
            return {"side": "left", "C": c, "Q": n}
    if side in (None, "right"):
        c = common_last(n.branches)
        if c is not None and any(isinstance(x, Seq) for x in n.branches):
            return {"side": "right", "C": c, "Q": n}
    return None


def _dseq_back_build(b, ctx):
    q, c = b["Q"], b["C"]
    if b["side"] == "left":
        return Seq(c, Qif(q.reg, q.basis, tuple(strip_first(x) for x in q.branches)))
    return Seq(Qif(q.reg, q.basis, tuple(strip_last(x) for x in q.branches)), c)


# -- merging and splitting ---------------------------------------------------


def _merge_match(n, ctx):
    if not _circ_qif(n):
        return None
    i = only_branch(n.branches)
    if i is None or not isinstance(n.branches[i], Seq):
        return None
    return {"q": n.reg, "B": n.basis, "i": i, "C1": n.branches[i].first, "C2": n.branches[i].second}


def _one_hot(q, B, i, c):
    br = [Skip()] * len(B)
    br[i] = c
    return Qif(q, B, tuple(br))


def _merge_build(b, ctx):
    return Seq(_one_hot(b["q"], b["B"], b["i"], b["C1"]), _one_hot(b["q"], b["B"], b["i"], b["C2"]))


def _merge_back_match(n, ctx):
    if not (isinstance(n, Seq) and _circ_qif(n.first) and _circ_qif(n.second)):
        return None
    a, c = n.first, n.second
    if a.reg != c.reg or a.basis != c.basis:
        return None
    i, j = only_branch(a.branches), only_branch(c.branches)
    if i is None or i != j:
        return None
    return {"q": a.reg, "B": a.basis, "i": i, "C1": a.branches[i], "C2": c.branches[i]}


def _merge_back_build(b, ctx):
    return _one_hot(b["q"], b["B"], b["i"], Seq(b["C1"], b["C2"]))


def _split_match(n, ctx):
    return {"Q": n} if _circ_qif(n) and len(n.branches) >= 2 else None


def _split_build(b, ctx):
    q = b["Q"]
    return seq(*(_one_hot(q.reg, q.basis, i, c) for i, c in enumerate(q.branches)))


def _split_items(items, ctx):
    first = items[0]
    if not _circ_qif(first):
        return None
    d = len(first.basis)
    if len(items) < d:
        return None
    branches = []
    for i, it in enumerate(items[:d]):
        if not (_circ_qif(it) and it.reg == first.reg and it.basis == first.basis):
            return None
        if any(c != Skip() for j, c in enumerate(it.branches) if j != i):
            return None
        branches.append(it.branches[i])
    return {"q": first.reg, "B": first.basis, "Cs": tuple(branches)}, d


def _split_back_match(n, ctx):
    got = _split_items(seq_items(n), ctx) if isinstance(n, Seq) else None
    if got is None or got[1] != len(seq_items(n)):
        return None
    return got[0]


def _split_back_build(b, ctx):
    return Qif(b["q"], b["B"], b["Cs"])


# -- quantum choice ----------------------------------------------------------


def _coin_ok(c, q) -> bool:
    return is_circuit(c) and not isinstance(c, Seq) and bool(qv(c)) and qv(c) <= set(q)


def _csym_match(n, ctx):
    if isinstance(n, Seq) and isinstance(n.first, Gate) and _circ_qif(n.second):
        if n.first.reg == n.second.reg:
            return {"U": n.first, "Q": n.second}
    return None


def _csym_build(b, ctx):
    u, q = gate_matrix(ctx, b["U"]), b["Q"]
    basis, branches = normalize_basis(kets(u.conj().T @ basis_matrix(q.basis)), q.branches)
    return Seq(Qif(q.reg, basis, branches), b["U"])


def _csym_back_match(n, ctx):
    if isinstance(n, Seq) and _circ_qif(n.first) and isinstance(n.second, Gate):
        if n.second.reg == n.first.reg:
            return {"U": n.second, "Q": n.first}
    return None


def _csym_back_build(b, ctx):
    u, q = gate_matrix(ctx, b["U"]), b["Q"]
    basis, branches = normalize_basis(kets(u @ basis_matrix(q.basis)), q.branches)
    return Seq(b["U"], Qif(q.reg, basis, branches))


def _cseq_items(items, ctx):
    if len(items) < 3:
        return None
    form = ctx.param("form")
    a, m, z = items[:3]
    if form in (None, "pre") and _circ_qif(m) and _circ_qif(z) and _coin_ok(a, m.reg):
        if m.reg == z.reg and m.basis == z.basis:
            return {"form": "pre", "B": a, "Q1": m, "Q2": z}, 3
    if form in (None, "post") and _circ_qif(a) and _circ_qif(m) and _coin_ok(z, a.reg):
        if a.reg == m.reg and a.basis == m.basis:
            return {"form": "post", "B": z, "Q1": a, "Q2": m}, 3
    return None


def _cseq_build(b, ctx):
    q1, q2 = b["Q1"], b["Q2"]
    merged = Qif(q1.reg, q1.basis, tuple(Seq(c, d) for c, d in zip(q1.branches, q2.branches)))
    return Seq(b["B"], merged) if b["form"] == "pre" else Seq(merged, b["B"])


def _cseq_back_items(items, ctx):
    if len(items) < 2:
        return None
    form = ctx.param("form")
    a, z = items[:2]
    if form in (None, "pre") and _circ_qif(z) and _coin_ok(a, z.reg) and any(isinstance(c, Seq) for c in z.branches):
        return {"form": "pre", "B": a, "Q": z}, 2
    if form in (None, "post") and _circ_qif(a) and _coin_ok(z, a.reg) and any(isinstance(c, Seq) for c in a.branches):
        return {"form": "post", "B": z, "Q": a}, 2
    return None


def _cseq_back_build(b, ctx):
    q = b["Q"]
    pairs = [split_first(c) for c in q.branches]
    q1 = Qif(q.reg, q.basis, tuple(p[0] for p in pairs))
    q2 = Qif(q.reg, q.basis, tuple(p[1] for p in pairs))
    return seq(b["B"], q1, q2) if b["form"] == "pre" else seq(q1, q2, b["B"])


DIST_FORMS = ("pre-left", "pre-right", "post-left", "post-right")


def _cdist_items(items, ctx):
    if len(items) < 3:
        return None
    forms = [ctx.param("form")] if ctx.param("form") else DIST_FORMS
    x, y, z = items[:3]
    for form in forms:
        if form == "pre-left":
            c, coin, q = x, y, z
        elif form == "pre-right":
            coin, q, c = x, y, z
        elif form == "post-left":
            c, q, coin = x, y, z
        else:
            q, coin, c = x, y, z
        if _circ_qif(q) and _coin_ok(coin, q.reg) and is_circuit(c) and disjoint(q.reg, qv(c)):
            return {"form": form, "C": c, "D": coin, "Q": q}, 3
    return None


def _cdist_build(b, ctx):
    q, c, d, form = b["Q"], b["C"], b["D"], b["form"]
    left = form.endswith("left")
    new = Qif(q.reg, q.basis, tuple(Seq(c, x) if left else Seq(x, c) for x in q.branches))
    return Seq(d, new) if form.startswith("pre") else Seq(new, d)


def _cdist_back_items(items, ctx):
    if len(items) < 2:
        return None
    forms = [ctx.param("form")] if ctx.param("form") else DIST_FORMS
    x, y = items[:2]
    for form in forms:
        coin, q = (x, y) if form.startswith("pre") else (y, x)
        if not (_circ_qif(q) and _coin_ok(coin, q.reg)):
            continue
        if not any(isinstance(br, Seq) for br in q.branches):
            continue
        c = common_first(q.branches) if form.endswith("left") else common_last(q.branches)
        if c is not None and is_circuit(c) and disjoint(q.reg, qv(c)):
            return {"form": form, "C": c, "D": coin, "Q": q}, 2
    return None


def _cdist_back_build(b, ctx):
    q, c, d, form = b["Q"], b["C"], b["D"], b["form"]
    if form.endswith("left"):
        inner = Qif(q.reg, q.basis, tuple(strip_first(x) for x in q.branches))
    else:
        inner = Qif(q.reg, q.basis, tuple(strip_last(x) for x in q.branches))
    return {
        "pre-left": lambda: seq(c, d, inner),
        "pre-right": lambda: seq(d, inner, c),
        "post-left": lambda: seq(c, inner, d),
        "post-right": lambda: seq(inner, d, c),
    }[form]()


def _single(n, ctx, fn):
    items = seq_items(n) if isinstance(n, Seq) else [n]
    got = fn(items, ctx)
    if got is None or got[1] != len(items):
        return None
    return got[0]


# ---------------------------------------------------------------------------
# generators

Q = Var("q")
R = Var("r")
S = Var("s")


def _rc(vars_, rng, lib, depth=3):
    return random_circuit(vars_, depth, rng, lib)


def _rqif(guard, rest, rng, lib, depth=2):
    d = reg_dim(guard)
    branches = []
    for _ in range(d):
        c, lib = _rc(rest, rng, lib, depth)
        branches.append(c)
    return Qif(guard, random_basis(d, rng), tuple(branches)), lib


def _guard_and_rest(rng):
    if rng.random() < 0.25:
        return (Var("q", 3),), (R,)
    return (Q,), (R, S) if rng.random() < 0.5 else (R,)


def gen_change_basis(rng, lib):
    guard, rest = _guard_and_rest(rng)
    node, lib = _rqif(guard, rest, rng, lib)
    params = {}
    if rng.random() < 0.5:
        params["basis"] = random_basis(reg_dim(guard), rng, 0.0)
    return Instance(node, lib, params)


def gen_qif_sym(rng, lib):
    guard, rest = _guard_and_rest(rng)
    node, lib = _rqif(guard, rest, rng, lib)
    return Instance(node, lib)


def gen_qif_idem(rng, lib):
    guard, rest = _guard_and_rest(rng)
    c, lib = _rc(rest, rng, lib)
    d = reg_dim(guard)
    return Instance(Qif(guard, random_basis(d, rng), (c,) * d), lib, back_params={"reg": guard})


def gen_qif_distrib(rng, lib):
    c, lib = _rc((S,), rng, lib)
    c0, lib = _rc((S,), rng, lib)
    c1, lib = _rc((S,), rng, lib)
    inner = Qif((R,), random_basis(2, rng), (c0, c1))
    return Instance(Qif((Q,), random_basis(2, rng), (c, inner)), lib)


def gen_qif_nested(rng, lib):
    b1 = random_basis(2, rng)
    rows = []
    for _ in range(2):
        cs = []
        for _ in range(2):
            c, lib = _rc((S,), rng, lib)
            cs.append(c)
        rows.append(Qif((R,), b1, tuple(cs)))
    return Instance(Qif((Q,), random_basis(2, rng), tuple(rows)), lib)


def gen_seq_unit(rng, lib):
    c, lib = _rc((Q, R), rng, lib)
    node = Seq(Skip(), c) if rng.random() < 0.5 else Seq(c, Skip())
    return Instance(node, lib, back_params={"form": "left"})


def gen_identity(rng, lib):
    reg = (Q,) if rng.random() < 0.5 else (Q, R)
    return Instance(Gate("I", reg), lib, back_params={"reg": reg})


def gen_gate_fuse(rng, lib):
    reg = (Q,) if rng.random() < 0.5 else (Q, R)
    g1, lib = random_gate(reg, rng, lib)
    g2, lib = random_gate(reg, rng, lib)
    return Instance(Seq(g1, g2), lib, back_params={"first": g1.name})


def gen_gate_par(rng, lib):
    g1, lib = random_gate((Q,), rng, lib)
    g2, lib = random_gate((R, S) if rng.random() < 0.5 else (R,), rng, lib)
    return Instance(Seq(g1, g2), lib)


def gen_seq_comm(rng, lib):
    pre, lib = random_gate((S,), rng, lib)
    c1, lib = _rc((Q,), rng, lib, 2)
    c2, lib = _rc((R,), rng, lib, 2)
    return Instance(seq(pre, c1, c2), lib, path=(), offset=1)


def gen_seq_assoc(rng, lib):
    cs = []
    for _ in range(3):
        c, lib = _rc((Q, R), rng, lib, 2)
        cs.append(c)
    return Instance(Seq(Seq(cs[0], cs[1]), cs[2]), lib)


def gen_qif_seq(rng, lib):
    guard, rest = _guard_and_rest(rng)
    a, lib = _rqif(guard, rest, rng, lib)
    cs = []
    for _ in range(len(a.branches)):
        c, lib = _rc(rest, rng, lib, 2)
        cs.append(c)
    return Instance(Seq(a, Qif(a.reg, a.basis, tuple(cs))), lib)


def gen_qif_dist_seq(rng, lib):
    guard, rest = _guard_and_rest(rng)
    a, lib = _rqif(guard, rest, rng, lib)
    c, lib = _rc(rest, rng, lib, 2)
    left = rng.random() < 0.5
    node = Seq(c, a) if left else Seq(a, c)
    side = "left" if left else "right"
    return Instance(node, lib, {"side": side}, back_params={"side": side})


def gen_merge(rng, lib):
    guard, rest = _guard_and_rest(rng)
    d = reg_dim(guard)
    c1, lib = _rc(rest, rng, lib, 2)
    c2, lib = _rc(rest, rng, lib, 2)
    if c1 == Skip():
        c1 = Gate("I", rest)
    if c2 == Skip():
        c2 = Gate("I", rest)
    return Instance(_one_hot(guard, random_basis(d, rng), int(rng.integers(d)), Seq(c1, c2)), lib)


def gen_split(rng, lib):
    guard, rest = _guard_and_rest(rng)
    node, lib = _rqif(guard, rest, rng, lib)
    return Instance(node, lib)


def gen_choice_sym(rng, lib):
    guard, rest = (Q,), (R, S) if rng.random() < 0.5 else (R,)
    a, lib = _rqif(guard, rest, rng, lib)
    if rng.random() < 0.4:
        a = Qif(a.reg, standard_basis(2), a.branches)
    g, lib = random_gate(guard, rng, lib)
    return Instance(Seq(g, a), lib)


def gen_choice_seq(rng, lib):
    guard, rest = _guard_and_rest(rng)
    a, lib = _rqif(guard, rest, rng, lib)
    cs = []
    for _ in range(len(a.branches)):
        c, lib = _rc(rest, rng, lib, 2)
        cs.append(c)
    coin, lib = random_gate(guard, rng, lib)
    second = Qif(a.reg, a.basis, tuple(cs))
    form = "pre" if rng.random() < 0.5 else "post"
    node = seq(coin, a, second) if form == "pre" else seq(a, second, coin)
    return Instance(node, lib, {"form": form}, offset=0, back_params={"form": form})


def gen_choice_dist(rng, lib):
    guard, rest = _guard_and_rest(rng)
    a, lib = _rqif(guard, rest, rng, lib)
    c, lib = _rc(rest, rng, lib, 2)
    coin, lib = random_gate(guard, rng, lib)
    form = DIST_FORMS[int(rng.integers(4))]
    node = {
        "pre-left": lambda: seq(c, coin, a),
        "pre-right": lambda: seq(coin, a, c),
        "post-left": lambda: seq(c, a, coin),
        "post-right": lambda: seq(a, coin, c),
    }[form]()
    return Instance(node, lib, {"form": form}, offset=0, back_params={"form": form})


# ---------------------------------------------------------------------------
# catalog


def laws() -> list[Law]:
    circ_pair = [("disjoint variables", lambda b, c: disjoint(qv(b["C1"]), qv(b["C2"])))]
    return [
        Law("CL-ChangeBasis", "circuit", "changing the guard basis of a qif",
            "circuit laws: basis change via a synthesized unitary",
            FnRule(_cb_match, _cb_build),
            FnRule(_cb_back_match, _cb_back_build, [("inverse pair", _cb_back_side)], windowed=True, width=3),
            gen_change_basis),
        Law("CL-QifSym", "circuit", "permuting qif branches with their basis states",
            "circuit laws: symmetry of qif",
            FnRule(_cb_match, _sym_build), FnRule(_cb_match, _sym_build), gen_qif_sym),
        Law("CL-QifIdem", "circuit", "qif with identical branches",
            "circuit laws: idempotence of qif",
            FnRule(_idem_match, lambda b, c: b["C"]),
            FnRule(_idem_back_match, _idem_back_build, [("fresh guard register", _idem_back_side)]),
            gen_qif_idem),
        Law("CL-QifDistrib", "circuit", "distributing a qif over an inner qif",
            "circuit laws: distributivity of qif (guard of the inner qif outside C)",
            FnRule(_dist_match, _dist_build, [("inner guard outside C", _dist_side)]),
            FnRule(_dist_back_match, _dist_back_build, [("inner guard outside C", _dist_side)]),
            gen_qif_distrib),
        Law("CL-QifNested", "circuit", "flattening nested qifs into one over the joint guard",
            "circuit laws: nested qif",
            FnRule(_nest_match, _nest_build), FnRule(_nest_back_match, _nest_back_build),
            gen_qif_nested),
        Law("CL-SeqUnit", "circuit", "skip as unit of circuit composition",
            "circuit laws: unit",
            FnRule(_unit_match, lambda b, c: b["C"], windowed=True, width=2),
            FnRule(lambda n, c: {"C": n} if is_circuit(n) else None, _unit_back_build),
            gen_seq_unit),
        Law("CL-Identity", "circuit", "identity gate is skip",
            "circuit laws: identity",
            FnRule(_ident_match, lambda b, c: Skip(), [("identity matrix", _ident_side)]),
            FnRule(_ident_back_match, _ident_back_build), gen_identity),
        Law("CL-GateFuse", "circuit", "fusing two gates on the same register",
            "circuit laws: sequential composition of gates",
            FnRule(_fuse_match, _fuse_build, windowed=True, width=2),
            FnRule(_fuse_back_match, _fuse_back_build), gen_gate_fuse),
        Law("CL-GatePar", "circuit", "gates on disjoint registers as one tensor-product gate",
            "circuit laws: parallel composition of gates",
            FnRule(_par_match, _par_build, windowed=True, width=2),
            FnRule(_par_back_match, _par_back_build), gen_gate_par),
        Law("CL-SeqComm", "circuit", "commuting circuits on disjoint variables",
            "circuit laws: commutativity",
            PatternRule(Seq(C1, C2), Seq(C2, C1), circ_pair),
            PatternRule(Seq(C1, C2), Seq(C2, C1), circ_pair), gen_seq_comm),
        Law("CL-SeqAssoc", "circuit", "regrouping circuit composition",
            "circuit laws: associativity",
            PatternRule(Seq(Seq(C1, C2), C3), Seq(C1, Seq(C2, C3)), windowed=False),
            PatternRule(Seq(C1, Seq(C2, C3)), Seq(Seq(C1, C2), C3), windowed=False), gen_seq_assoc),
        Law("CL-QifSeq", "circuit", "merging consecutive qifs with the same guard",
            "circuit laws: sequentiality of qif",
            FnRule(_qseq_match, _qseq_build, windowed=True, width=2),
            FnRule(_qseq_back_match, _qseq_back_build), gen_qif_seq),
        Law("CL-QifDistSeq", "circuit", "pushing a circuit into every qif branch",
            "circuit laws: distributivity of composition over qif",
            FnRule(_dseq_match, _dseq_build, [("guard outside C", _dseq_side)], windowed=True, width=2),
            FnRule(_dseq_back_match, _dseq_back_build, [("guard outside C", _dseq_side)]),
            gen_qif_dist_seq),
        Law("CL-Merge", "circuit", "merging single-branch qifs",
            "circuit laws: merging",
            FnRule(_merge_match, _merge_build),
            FnRule(_merge_back_match, _merge_back_build, windowed=True, width=2), gen_merge),
        Law("CL-Split", "circuit", "splitting a qif into single-branch qifs",
            "circuit laws: splitting",
            FnRule(_split_match, _split_build),
            FnRule(_split_back_match, _split_back_build, match_items=_split_items), gen_split),
        Law("CL-ChoiceSym", "circuit", "moving a coin from before to after a quantum choice",
            "circuit laws: symmetry of quantum choice",
            FnRule(_csym_match, _csym_build, windowed=True, width=2),
            FnRule(_csym_back_match, _csym_back_build, windowed=True, width=2), gen_choice_sym),
        Law("CL-ChoiceSeq", "circuit", "sequencing quantum choices with the same coin",
            "circuit laws: sequentiality of quantum choice",
            FnRule(lambda n, c: _single(n, c, _cseq_items), _cseq_build, match_items=_cseq_items),
            FnRule(lambda n, c: _single(n, c, _cseq_back_items), _cseq_back_build,
                   match_items=_cseq_back_items),
            gen_choice_seq),
        Law("CL-ChoiceDist", "circuit", "distributing a circuit over a quantum choice",
            "circuit laws: distributivity of quantum choice",
            FnRule(lambda n, c: _single(n, c, _cdist_items), _cdist_build, match_items=_cdist_items),
            FnRule(lambda n, c: _single(n, c, _cdist_back_items), _cdist_back_build,
                   match_items=_cdist_back_items),
            gen_choice_dist),
    ]
