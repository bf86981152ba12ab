"""Laws of the program layer: initialization, measurement-controlled if,
sequential composition, swaps and lifting of circuit equalities."""

from __future__ import annotations

import numpy as np

from qlaws import measrel
from qlaws.laws import gen
from qlaws.laws.core import FnRule, Law, Meta, PatternRule, SynthesisFailed
from qlaws.laws.util import (
    Instance,
    add_meas,
    as_reg,
    circuit_unitary,
    common_first,
    common_last,
    disjoint,
    kraus,
    kraus_on,
    split_first,
    strip_first,
    strip_last,
    union_space,
)
from qlaws.randprog import random_circuit, random_gate, random_ket, random_program
from qlaws.syntax import (
    Abort,
    Gate,
    IfMeas,
    Init,
    Ket,
    Qif,
    Seq,
    Skip,
    Var,
    free_calls,
    is_circuit,
    is_deterministic,
    qv,
    reg_dim,
    reg_dims,
    rename_vars,
    seq,
    seq_items,
)

P1, P2, P3 = Meta("P1"), Meta("P2"), Meta("P3")


def closed(*nodes) -> bool:
    return all(not free_calls(n) for n in nodes)


def _eps(ctx):
    return ctx.cfg.eps_rel


def _pair_items(test):
    """Window rule helper: match the first two spine items with ``test(a, b, ctx)``."""

    def match_items(items, ctx):
        if len(items) < 2:
            return None
        b = test(items[0], items[1], ctx)
        return None if b is None else (b, 2)

    def match(n, ctx):
        if isinstance(n, Seq):
            return test(n.first, n.second, ctx)
        return None

    return match, match_items


def _pair_rule(test, build, sides=None):
    m, mi = _pair_items(test)
    return FnRule(m, build, sides, match_items=mi)


def _is_if(n, outcomes: int | None = None):
    return isinstance(n, IfMeas) and (outcomes is None or len(n.branches) == outcomes)


# -- initialization ------------------------------------------------------------


def _ic_test(a, b, ctx):
    if isinstance(a, Init) and isinstance(b, Init):
        if set(a.reg) <= set(b.reg):
            return {"form": "overwrite", "A": a, "B": b}
        if disjoint(a.reg, b.reg):
            return {"form": "merge", "A": a, "B": b}
    return None


def _ic_build(b, ctx):
    a, c = b["A"], b["B"]
    if b["form"] == "overwrite":
        return c
    return Init(a.reg + c.reg, Ket.from_array(np.kron(a.state.vec, c.state.vec)))


def factor_state(vec: np.ndarray, da: int, db: int, tol: float = 1e-9):
    u, s, vh = np.linalg.svd(vec.reshape(da, db))
    if len(s) > 1 and s[1] > tol:
        return None
    a = u[:, 0]
    k = int(np.argmax(np.abs(a)))
    phase = a[k] / abs(a[k])
    a = a / phase
    bvec = s[0] * vh[0] * phase
    return a, bvec


def _ic_back_match(n, ctx):
    if not (isinstance(n, Init) and len(n.reg) >= 2):
        return None
    splits = [int(ctx.param("split"))] if ctx.param("split") else range(1, len(n.reg))
    for k in splits:
        ra, rb = n.reg[:k], n.reg[k:]
        f = factor_state(n.state.vec, reg_dim(ra), reg_dim(rb))
        if f is not None:
            return {"ra": ra, "rb": rb, "f": f}
    return None


def _ic_back_build(b, ctx):
    a, c = b["f"]
    return Seq(Init(b["ra"], Ket.from_array(a)), Init(b["rb"], Ket.from_array(c)))


def _iu_test(a, c, ctx):
    if isinstance(a, Init) and is_circuit(c) and qv(c) <= set(a.reg):
        return {"A": a, "C": c}
    return None


def _iu_build(b, ctx):
    a = b["A"]
    u = circuit_unitary(ctx, b["C"], a.reg)
    return Init(a.reg, Ket.from_array(u @ a.state.vec))


def _iu_back_match(n, ctx):
    c = ctx.param("circuit")
    if isinstance(n, Init) and c is not None and is_circuit(c) and qv(c) <= set(n.reg):
        return {"A": n, "C": c}
    return None


def _iu_back_build(b, ctx):
    a = b["A"]
    u = circuit_unitary(ctx, b["C"], a.reg)
    return Seq(Init(a.reg, Ket.from_array(u.conj().T @ a.state.vec)), b["C"])


def _iq_test(a, q, ctx):
    if isinstance(a, Init) and isinstance(q, Qif) and q.reg == a.reg:
        overlaps = [abs(np.vdot(k.vec, a.state.vec)) for k in q.basis]
        return {"A": a, "Q": q, "j": int(np.argmax(overlaps)), "ov": overlaps}
    return None


def _iq_side(b, ctx):
    r = max([o for i, o in enumerate(b["ov"]) if i != b["j"]], default=0.0)
    return r <= ctx.cfg.eps_orth, r


def _iq_build(b, ctx):
    return Seq(b["A"], b["Q"].branches[b["j"]])


def _ii_test(a, m, ctx):
    if isinstance(a, Init) and _is_if(m) and set(m.reg) <= set(a.reg):
        ops = kraus_on(ctx, m.meas, m.reg, a.reg)
        psi = a.state.vec
        norms = [np.linalg.norm(k @ psi) for k in ops]
        j = int(np.argmax(norms))
        return {"A": a, "M": m, "j": j, "img": ops[j] @ psi}
    return None


def _ii_side(b, ctx):
    v = measrel.proportion(b["img"], b["A"].state.vec, 1.0, _eps(ctx))
    return v.holds, v.residual


def _ii_build(b, ctx):
    return Seq(b["A"], b["M"].branches[b["j"]])


def _digits(k: int, dims) -> tuple:
    return tuple(int(x) for x in np.unravel_index(k, dims))


def _ie_test(m, a, ctx):
    if _is_if(m) and m.meas == "M" and isinstance(a, Init) and set(m.reg) <= set(a.reg) and m.reg != a.reg:
        return {"M": m, "A": a}
    return None


def _ie_side(b, ctx):
    return all(disjoint(b["A"].reg, qv(p)) for p in b["M"].branches)


def _ie_build(b, ctx):
    m, a = b["M"], b["A"]
    r = a.reg
    pos = [r.index(v) for v in m.reg]
    branches = []
    for k in range(reg_dim(r)):
        dig = _digits(k, reg_dims(r))
        sub = tuple(dig[p] for p in pos)
        branches.append(m.branches[int(np.ravel_multi_index(sub, reg_dims(m.reg)))])
    return Seq(IfMeas("M", r, tuple(branches)), a)


def _ie_back_test(m, a, ctx):
    q = as_reg(ctx.param("reg"))
    if not (_is_if(m) and m.meas == "M" and isinstance(a, Init) and m.reg == a.reg):
        return None
    if not q or not set(q) < set(m.reg):
        return None
    r = m.reg
    pos = [r.index(v) for v in q]
    groups: dict = {}
    for k, br in enumerate(m.branches):
        dig = _digits(k, reg_dims(r))
        key = int(np.ravel_multi_index(tuple(dig[p] for p in pos), reg_dims(q)))
        if groups.setdefault(key, br) != br:
            return None
    return {"M": m, "A": a, "q": q, "groups": groups}


def _ie_back_build(b, ctx):
    q, g = b["q"], b["groups"]
    return Seq(IfMeas("M", q, tuple(g[i] for i in range(reg_dim(q)))), b["A"])


# -- if-statements ---------------------------------------------------------------


def _tf_match(n, ctx):
    if _is_if(n, 2):
        k = kraus(ctx, n.meas, n.reg)
        if measrel.is_trivial_true(k, _eps(ctx)):
            return {"keep": n.branches[1]}
        if measrel.is_trivial_false(k, _eps(ctx)):
            return {"keep": n.branches[0]}
    return None


def _tf_back_build(b, ctx):
    q = as_reg(ctx.param("reg"))
    if not q:
        raise SynthesisFailed("needs the register of the trivial measurement")
    other = ctx.param("other") or Abort()
    if ctx.param("form") == "false":
        return IfMeas("MF", q, (b["P"], other))
    return IfMeas("MT", q, (other, b["P"]))


def _idem_match(n, ctx):
    if _is_if(n) and all(p == n.branches[0] for p in n.branches):
        return {"M": n, "P": n.branches[0]}
    return None


def _idem_build(b, ctx):
    m = b["M"]
    return Seq(IfMeas(m.meas, m.reg, (Skip(),) * len(m.branches)), b["P"])


def _idem_back_test(m, p, ctx):
    if _is_if(m) and all(x == Skip() for x in m.branches):
        return {"M": m, "P": p}
    return None


def _idem_back_build(b, ctx):
    m = b["M"]
    return IfMeas(m.meas, m.reg, (b["P"],) * len(m.branches))


def _det_side(key):
    return (f"{key} deterministic", lambda b, c: is_deterministic(b[key]))


def _compl_match(n, ctx):
    return {"M": n} if _is_if(n, 2) else None


def _compl_build(b, ctx):
    m = b["M"]
    k = kraus(ctx, m.meas, m.reg)
    name = m.meas[:-5] if m.meas.endswith("_perp") else f"{m.meas}_perp"
    cname, ctx = add_meas(ctx, measrel.complement(k), reg_dims(m.reg), "C", name)
    return IfMeas(cname, m.reg, (m.branches[1], m.branches[0])), ctx, {**b, "perp": cname}


def _assoc_match(n, ctx):
    if not _is_if(n, 2):
        return None
    form = ctx.param("form")
    a, c = n.branches
    if form in (None, "right") and _is_if(c, 2) and (c.meas, c.reg) == (n.meas, n.reg):
        return {"form": "right", "M": n, "P": a, "R": c.branches[1], "Q": c.branches[0]}
    if form in (None, "left") and _is_if(a, 2) and (a.meas, a.reg) == (n.meas, n.reg):
        return {"form": "left", "M": n, "P": a.branches[0], "R": c, "Q": a.branches[1]}
    return None


def _proj_side(key="M"):
    def side(b, ctx):
        m = b[key]
        k = kraus(ctx, m.meas, m.reg)
        return measrel.is_projective(k, _eps(ctx)), float(max(np.linalg.norm(x @ x - x) for x in k))
    return ("projective measurement", side)


def _assoc_build(b, ctx):
    m = b["M"]
    return IfMeas(m.meas, m.reg, (b["P"], b["R"]))


def _assoc_back_match(n, ctx):
    return {"M": n} if _is_if(n, 2) else None


def _assoc_back_build(b, ctx):
    m = b["M"]
    q = ctx.param("middle") or Abort()
    p, r = m.branches
    if ctx.param("form") == "left":
        return IfMeas(m.meas, m.reg, (IfMeas(m.meas, m.reg, (p, q)), r))
    return IfMeas(m.meas, m.reg, (p, IfMeas(m.meas, m.reg, (q, r))))


def _ops_union(ctx, *ifs):
    space = union_space(*(x.reg for x in ifs))
    return space, [kraus_on(ctx, x.meas, x.reg, space) for x in ifs]


def _elim_entail_test(a, c, ctx):
    if ctx.param("form") not in (None, "entail"):
        return None
    if _is_if(a, 2) and a.branches == (Abort(), Skip()) and _is_if(c, 2):
        return {"form": "entail", "Mi": a, "Ni": c}
    return None


def _elim_entail_side(b, ctx):
    _, (m, n) = _ops_union(ctx, b["Mi"], b["Ni"])
    v = measrel.entails(m, n, _eps(ctx))
    return v.holds, v.residual


def _elim_entail_build(b, ctx):
    space, (m, n) = _ops_union(ctx, b["Mi"], b["Ni"])
    k = measrel.pseudo_meet(m, n)
    name, ctx = add_meas(ctx, k, reg_dims(space), "K")
    return Seq(IfMeas(name, space, (Abort(), Skip())), b["Ni"].branches[1]), ctx, {**b, "K": name}


def _elim_weak_match(n, ctx):
    if ctx.param("form") not in (None, "weaker"):
        return None
    if _is_if(n, 2) and _is_if(n.branches[1], 2):
        return {"form": "weaker", "Ni": n, "Mi": n.branches[1]}
    return None


def _elim_weak_side(b, ctx):
    _, (m, n) = _ops_union(ctx, b["Mi"], b["Ni"])
    v = measrel.weaker(m, n, _eps(ctx))
    return v.holds, v.residual


def _elim_weak_build(b, ctx):
    n = b["Ni"]
    return IfMeas(n.meas, n.reg, (n.branches[0], b["Mi"].branches[1]))


class _EitherRule(FnRule):
    """Tries a window rule, then a structural rule; sides depend on the form found."""

    def __init__(self, window, structural):
        self.window, self.structural = window, structural
        super().__init__(self._match, self._build, match_items=self._match_items_impl)

    def _match(self, n, ctx):
        b = self.structural.match(n, ctx)
        if b is not None:
            return {**b, "_rule": self.structural}
        b = self.window.match(n, ctx)
        return None if b is None else {**b, "_rule": self.window}

    def _match_items_impl(self, items, ctx):
        got = self.window.match_items(items, ctx)
        if got is None:
            return None
        return {**got[0], "_rule": self.window}, got[1]

    def check(self, b, ctx):
        return b["_rule"].check(b, ctx)

    def _build(self, b, ctx):
        return b["_rule"].build(b, ctx)


# -- nested if ---------------------------------------------------------------------


def _reduce_match(n, ctx):
    if not _is_if(n):
        return None
    inner = n.branches
    if not all(_is_if(x) for x in inner):
        return None
    if n.meas == "M" and all(x.meas == "M" for x in inner):
        r = inner[0].reg
        if all(x.reg == r for x in inner) and disjoint(r, n.reg):
            return {"form": "computational", "M": n, "r": r}
    if len(inner) == 2 and all(len(x.branches) == 2 for x in inner) and inner[0].branches == inner[1].branches:
        k, l_ = inner
        if k.reg == l_.reg == n.reg:
            return {"form": "general", "M": n, "K": k, "L": l_, "P": k.branches[0], "Q": k.branches[1]}
    return None


def _reduce_side(b, ctx):
    if b["form"] == "computational":
        return True
    if not (is_deterministic(b["P"]) and is_deterministic(b["Q"])):
        return False, 1.0
    return _reduce_synth(b, ctx) is not None, 1.0


def _reduce_synth(b, ctx):
    m, k, l_ = (kraus(ctx, x.meas, x.reg) for x in (b["M"], b["K"], b["L"]))
    tol = _eps(ctx)
    n0 = measrel.merge_split(k[0] @ m[0], l_[0] @ m[1], tol)
    n1 = measrel.merge_split(k[1] @ m[0], l_[1] @ m[1], tol)
    if n0 is None or n1 is None:
        return None
    return np.stack([n0, n1])


def _reduce_build(b, ctx):
    m = b["M"]
    if b["form"] == "computational":
        branches = tuple(p for x in m.branches for p in x.branches)
        return IfMeas("M", m.reg + b["r"], branches)
    n = _reduce_synth(b, ctx)
    name, ctx = add_meas(ctx, n, reg_dims(m.reg), "N")
    return IfMeas(name, m.reg, (b["P"], b["Q"])), ctx, {**b, "N": name}


def _reduce_back_match(n, ctx):
    if _is_if(n) and n.meas == "M" and len(n.reg) >= 2:
        k = int(ctx.param("split", 1))
        if 0 < k < len(n.reg):
            return {"M": n, "k": k}
    return None


def _reduce_back_build(b, ctx):
    m, k = b["M"], b["k"]
    q, r = m.reg[:k], m.reg[k:]
    dr = reg_dim(r)
    return IfMeas("M", q, tuple(IfMeas("M", r, m.branches[i * dr:(i + 1) * dr]) for i in range(reg_dim(q))))


def _ldist_match(n, ctx):
    if _is_if(n, 2) and _is_if(n.branches[1], 2):
        inner = n.branches[1]
        return {"N": n, "M": inner, "R": n.branches[0], "P": inner.branches[0], "Q": inner.branches[1]}
    return None


def _ldist_build(b, ctx):
    n, m = b["N"], b["M"]
    return IfMeas(m.meas, m.reg, (IfMeas(n.meas, n.reg, (b["R"], b["P"])), IfMeas(n.meas, n.reg, (b["R"], b["Q"]))))


def _ldist_back_match(n, ctx):
    if _is_if(n, 2) and all(_is_if(x, 2) for x in n.branches):
        a, c = n.branches
        if (a.meas, a.reg) == (c.meas, c.reg) and a.branches[0] == c.branches[0]:
            return {"M": n, "N": a, "R": a.branches[0], "P": a.branches[1], "Q": c.branches[1]}
    return None


def _ldist_back_build(b, ctx):
    n, m = b["N"], b["M"]
    return IfMeas(n.meas, n.reg, (b["R"], IfMeas(m.meas, m.reg, (b["P"], b["Q"]))))


def _rdist_match(n, ctx):
    if _is_if(n, 2) and _is_if(n.branches[0], 2):
        inner = n.branches[0]
        return {"N": n, "M": inner, "R": n.branches[1], "P": inner.branches[0], "Q": inner.branches[1]}
    return None


def _rdist_build(b, ctx):
    n, m = b["N"], b["M"]
    return IfMeas(m.meas, m.reg, (IfMeas(n.meas, n.reg, (b["P"], b["R"])), IfMeas(n.meas, n.reg, (b["Q"], b["R"]))))


def _rdist_back_match(n, ctx):
    if _is_if(n, 2) and all(_is_if(x, 2) for x in n.branches):
        a, c = n.branches
        if (a.meas, a.reg) == (c.meas, c.reg) and a.branches[1] == c.branches[1]:
            return {"M": n, "N": a, "R": a.branches[1], "P": a.branches[0], "Q": c.branches[0]}
    return None


def _rdist_back_build(b, ctx):
    n, m = b["N"], b["M"]
    return IfMeas(n.meas, n.reg, (IfMeas(m.meas, m.reg, (b["P"], b["Q"])), b["R"]))


def _mn(b, ctx):
    _, (m, n) = _ops_union(ctx, b["M"], b["N"])
    return m, n


def _ldist_side(b, ctx):
    m, n = _mn(b, ctx)
    tol = _eps(ctx)
    c = measrel.commute_left(m, n, tol)
    a = measrel.test_decomposition_checks(m, n, m, m, tol)["lower_absorb"]
    return c.holds and a.holds, max(c.residual, a.residual)


def _rdist_side(b, ctx):
    m, n = _mn(b, ctx)
    tol = _eps(ctx)
    c = measrel.commute_right(m, n, tol)
    a = measrel.test_decomposition_checks(m, n, m, m, tol)["upper_absorb"]
    return c.holds and a.holds, max(c.residual, a.residual)


def _proj_pair(m, n, tol):
    return measrel.is_projective(m, tol) and measrel.is_projective(n, tol)


def _ldistp_side(b, ctx):
    m, n = _mn(b, ctx)
    tol = _eps(ctx)
    if not _proj_pair(m, n, tol):
        return False, 1.0
    e1 = measrel.entails(m, n, tol)
    e2 = measrel.entails(measrel.complement(m), n, tol)
    return e1.holds or e2.holds, min(e1.residual, e2.residual)


def _rdistp_side(b, ctx):
    m, n = _mn(b, ctx)
    tol = _eps(ctx)
    if not _proj_pair(m, n, tol):
        return False, 1.0
    e1 = measrel.entails(n, m, tol)
    e2 = measrel.entails(n, measrel.complement(m), tol)
    return e1.holds or e2.holds, min(e1.residual, e2.residual)


# -- sequential composition ----------------------------------------------------------


def _unit_test(a, c, ctx):
    if a == Skip():
        return {"out": c}
    if c == Skip():
        return {"out": a}
    if a == Abort() or c == Abort():
        return {"out": Abort()}
    return None


def _unit_back_build(b, ctx):
    form = ctx.param("form", "skip-left")
    p = b["P"]
    other = ctx.param("other") or Skip()
    if form == "skip-right":
        return Seq(p, Skip())
    if form == "abort-left":
        if p != Abort():
            raise SynthesisFailed("only abort can be expanded to abort;P")
        return Seq(Abort(), other)
    if form == "abort-right":
        if p != Abort():
            raise SynthesisFailed("only abort can be expanded to P;abort")
        return Seq(other, Abort())
    return Seq(Skip(), p)


def _comm_sides():
    return [("disjoint variables", lambda b, c: disjoint(qv(b["P1"]), qv(b["P2"]))),
            ("no free recursion calls", lambda b, c: closed(b["P1"], b["P2"]))]


def _ifseq_test(a, c, ctx):
    if _is_if(a) and _is_if(c) and (a.meas, a.reg) == (c.meas, c.reg):
        return {"M": a, "Ps": a.branches, "Qs": c.branches}
    return None


def _branches_avoid(key):
    def side(b, ctx):
        reg = b["M"].reg
        return all(disjoint(reg, qv(p)) and closed(p) for p in b[key])
    return ("measured register outside the first branches", side)


def _ifseq_build(b, ctx):
    m = b["M"]
    return IfMeas(m.meas, m.reg, tuple(Seq(p, q) for p, q in zip(b["Ps"], b["Qs"])))


def _ifsplit_match(n, ctx):
    if _is_if(n) and any(isinstance(p, Seq) for p in n.branches):
        pairs = [split_first(p) for p in n.branches]
        return {"M": n, "Ps": tuple(p[0] for p in pairs), "Qs": tuple(p[1] for p in pairs)}
    return None


def _ifsplit_build(b, ctx):
    m = b["M"]
    return Seq(IfMeas(m.meas, m.reg, b["Ps"]), IfMeas(m.meas, m.reg, b["Qs"]))


def _rdist_seq_test(m, p, ctx):
    return {"M": m, "P": p} if _is_if(m) else None


def _rdist_seq_build(b, ctx):
    m = b["M"]
    return IfMeas(m.meas, m.reg, tuple(Seq(x, b["P"]) for x in m.branches))


def _rdist_seq_back_match(n, ctx):
    if _is_if(n) and all(isinstance(x, Seq) for x in n.branches):
        p = common_last(n.branches)
        if p is not None:
            return {"M": n, "P": p}
    return None


def _rdist_seq_back_build(b, ctx):
    m = b["M"]
    return Seq(IfMeas(m.meas, m.reg, tuple(strip_last(x) for x in m.branches)), b["P"])


def _ldist_seq_test(arity):
    def test(p, m, ctx):
        if _is_if(m) and (arity is None or len(m.branches) == arity):
            return {"M": m, "P": p}
        return None
    return test


def _ldist_seq_side(b, ctx):
    return disjoint(b["M"].reg, qv(b["P"])) and closed(b["P"])


def _ldist_seq_build(b, ctx):
    m = b["M"]
    return IfMeas(m.meas, m.reg, tuple(Seq(b["P"], x) for x in m.branches))


def _ldist_seq_back_match(arity):
    def match(n, ctx):
        if _is_if(n) and (arity is None or len(n.branches) == arity) and all(isinstance(x, Seq) for x in n.branches):
            p = common_first(n.branches)
            if p is not None:
                return {"M": n, "P": p}
        return None
    return match


def _ldist_seq_back_build(b, ctx):
    m = b["M"]
    return Seq(b["P"], IfMeas(m.meas, m.reg, tuple(strip_first(x) for x in m.branches)))


def _ld2_test(c, m, ctx):
    if not (is_circuit(c) and c != Skip() and _is_if(m)):
        return None
    form = ctx.param("form", "general")
    if form == "absorb":
        if qv(c) <= set(m.reg):
            return {"form": "absorb", "C": c, "M": m}
        return None
    if len(m.branches) == 2:
        return {"form": "general", "C": c, "M": m}
    return None


def _ld2_general_reg(c, m):
    extra = sorted(qv(c) - set(m.reg), key=lambda v: v.name)
    return tuple(m.reg) + tuple(extra)


def _ld2_synth(b, ctx):
    c, m = b["C"], b["M"]
    if b["form"] == "absorb":
        u = circuit_unitary(ctx, c, m.reg)
        return m.reg, np.stack([k @ u for k in kraus(ctx, m.meas, m.reg)])
    reg = _ld2_general_reg(c, m)
    u = circuit_unitary(ctx, c, reg)
    ops = kraus_on(ctx, m.meas, m.reg, reg)
    return reg, np.stack([u.conj().T @ k @ u for k in ops])


def _ld2_side(b, ctx):
    if b["form"] == "absorb":
        return True
    from qlaws.verify import check_eq

    reg, n = _ld2_synth(b, ctx)
    name, ctx2 = add_meas(ctx, n, reg_dims(reg), "N")
    m, c = b["M"], b["C"]
    worst = 0.0
    for branches in ((Skip(), Abort()), (Abort(), Skip())):
        lhs = Seq(c, IfMeas(m.meas, m.reg, branches))
        rhs = Seq(IfMeas(name, reg, branches), c)
        r = check_eq(lhs, rhs, ctx2.lib, ctx2.cfg)
        worst = max(worst, r.residual)
    return worst <= ctx.cfg.eps_eq, worst


def _ld2_build(b, ctx):
    reg, n = _ld2_synth(b, ctx)
    name, ctx = add_meas(ctx, n, reg_dims(reg), "N")
    m, c = b["M"], b["C"]
    b = {**b, "N": name}
    if b["form"] == "absorb":
        return IfMeas(name, reg, m.branches), ctx, b
    return IfMeas(name, reg, tuple(Seq(c, x) for x in m.branches)), ctx, b


def _ld2_back_match(n, ctx):
    if not _is_if(n):
        return None
    if ctx.param("form") == "absorb":
        g = ctx.param("gate")
        if g is None:
            return None
        return {"form": "absorb", "N": n, "C": Gate(g, n.reg)}
    if len(n.branches) == 2 and all(isinstance(x, Seq) for x in n.branches):
        c = common_first(n.branches)
        if c is not None and is_circuit(c) and qv(c) <= set(n.reg):
            return {"form": "general", "N": n, "C": c}
    return None


def _ld2_back_build(b, ctx):
    n, c = b["N"], b["C"]
    u = circuit_unitary(ctx, c, n.reg)
    ops = kraus(ctx, n.meas, n.reg)
    if b["form"] == "absorb":
        m = np.stack([k @ u.conj().T for k in ops])
        name, ctx = add_meas(ctx, m, reg_dims(n.reg), "M")
        return Seq(c, IfMeas(name, n.reg, n.branches)), ctx, {**b, "M": name}
    m = np.stack([u @ k @ u.conj().T for k in ops])
    name, ctx = add_meas(ctx, m, reg_dims(n.reg), "M")
    return Seq(c, IfMeas(name, n.reg, tuple(strip_first(x) for x in n.branches))), ctx, {**b, "M": name}


def _qa_test(q, m, ctx):
    if isinstance(q, Qif) and is_circuit(q) and _is_if(m, len(q.basis)) and m.reg == q.reg:
        return {"Q": q, "M": m}
    return None


def _qa_side(b, ctx):
    ops = kraus(ctx, b["M"].meas, b["M"].reg)
    worst = 0.0
    for k, ket in zip(ops, b["Q"].basis):
        v = measrel.proportion(k, np.outer(ket.vec, ket.vec.conj()), 1.0, _eps(ctx))
        if not v.holds:
            return False, max(v.residual, 1e-16)
        worst = max(worst, v.residual)
    return True, worst


def _qa_build(b, ctx):
    q, m = b["Q"], b["M"]
    return IfMeas(m.meas, m.reg, tuple(Seq(c, p) for c, p in zip(q.branches, m.branches)))


def _qa_back_match(n, ctx):
    if not _is_if(n):
        return None
    ops = kraus(ctx, n.meas, n.reg)
    d = reg_dim(n.reg)
    if len(ops) != d:
        return None
    kets = []
    for k in ops:
        w, v = np.linalg.eigh(k.conj().T @ k)
        if abs(w[-1] - 1) > 1e-9 or (d > 1 and abs(w[-2]) > 1e-9):
            return None
        kets.append(Ket.from_array(v[:, -1]))
    pairs = []
    for br in n.branches:
        head, rest = split_first(br)
        if isinstance(br, Seq) and is_circuit(head) and disjoint(n.reg, qv(head)):
            pairs.append((head, rest))
        else:
            pairs.append((Skip(), br))
    if all(c == Skip() for c, _ in pairs):
        return None
    return {"M": n, "basis": tuple(kets), "pairs": pairs}


def _qa_back_build(b, ctx):
    m = b["M"]
    q = Qif(m.reg, b["basis"], tuple(c for c, _ in b["pairs"]))
    return Seq(q, IfMeas(m.meas, m.reg, tuple(p for _, p in b["pairs"])))


def _restrict_test(m, a, ctx):
    if _is_if(m) and isinstance(a, Init) and set(m.reg) <= set(a.reg):
        if all(p == m.branches[0] for p in m.branches):
            return {"M": m, "A": a, "P": m.branches[0]}
    return None


def _restrict_side(b, ctx):
    return disjoint(b["A"].reg, qv(b["P"])) and closed(b["P"])


def _restrict_back_test(a, p, ctx):
    if isinstance(a, Init) and disjoint(a.reg, qv(p)):
        return {"A": a, "P": p}
    return None


def _restrict_back_build(b, ctx):
    a = b["A"]
    name = ctx.param("meas", "M")
    n = ctx.lib.outcomes(name, reg_dims(a.reg))
    return Seq(IfMeas(name, a.reg, (b["P"],) * n), a)


# -- swaps --------------------------------------------------------------------------


def _halves(g):
    k = len(g.reg) // 2
    return g.reg[:k], g.reg[k:]


def _swap_match(n, ctx):
    form = ctx.param("form")
    if form in (None, "sym") and isinstance(n, Gate) and n.name == "SWAP":
        return {"form": "sym", "S": n}
    return None


def _swap_comm_test(s, p, ctx):
    if ctx.param("form") not in (None, "comm"):
        return None
    if isinstance(s, Gate) and s.name == "SWAP" and closed(p) and qv(p):
        a, c = _halves(s)
        if qv(p) <= set(a):
            return {"form": "comm", "S": s, "P": p, "map": dict(zip(a, c))}
        if qv(p) <= set(c):
            return {"form": "comm", "S": s, "P": p, "map": dict(zip(c, a))}
    return None


def _swap_build(b, ctx):
    s = b["S"]
    if b["form"] == "sym":
        a, c = _halves(s)
        return Gate("SWAP", c + a)
    return Seq(rename_vars(b["P"], b["map"]), s)


def _swap_back_test(p, s, ctx):
    if ctx.param("form") not in (None, "comm"):
        return None
    if isinstance(s, Gate) and s.name == "SWAP" and closed(p) and qv(p):
        a, c = _halves(s)
        if qv(p) <= set(c):
            return {"form": "comm", "S": s, "P": p, "map": dict(zip(c, a))}
        if qv(p) <= set(a):
            return {"form": "comm", "S": s, "P": p, "map": dict(zip(a, c))}
    return None


def _swap_back_build(b, ctx):
    return Seq(b["S"], rename_vars(b["P"], b["map"]))


def _sc_items(items, ctx):
    if len(items) < 3:
        return None
    a, c, s = items[:3]
    if isinstance(a, Init) and isinstance(c, Init) and isinstance(s, Gate) and s.name == "SWAP":
        if s.reg == a.reg + c.reg and reg_dims(a.reg) == reg_dims(c.reg):
            return {"A": a, "B": c}, 3
    return None


def _sc_build(b, ctx):
    a, c = b["A"], b["B"]
    return Seq(Init(a.reg, c.state), Init(c.reg, a.state))


def _sc_back_test(a, c, ctx):
    if isinstance(a, Init) and isinstance(c, Init) and disjoint(a.reg, c.reg) and reg_dims(a.reg) == reg_dims(c.reg):
        return {"A": a, "B": c}
    return None


def _sc_back_build(b, ctx):
    a, c = b["A"], b["B"]
    return seq(Init(a.reg, c.state), Init(c.reg, a.state), Gate("SWAP", a.reg + c.reg))


# -- lifting ------------------------------------------------------------------------


def _lift_match(n, ctx):
    d = ctx.param("replacement")
    if is_circuit(n) and d is not None and is_circuit(d):
        return {"C": n, "D": d}
    return None


def _lift_items(items, ctx):
    w = ctx.param("width")
    d = ctx.param("replacement")
    if w is None or d is None or not is_circuit(d):
        return None
    w = int(w)
    if w < 2 or len(items) < w or not all(is_circuit(x) for x in items[:w]):
        return None
    return {"C": seq(*items[:w]), "D": d}, w


def _lift_side(b, ctx):
    from qlaws.verify import check_eq

    r = check_eq(b["C"], b["D"], ctx.lib, ctx.cfg)
    return r.equal, r.residual


# ---------------------------------------------------------------------------
# generators

Q, R, S = Var("q"), Var("r"), Var("s")


def _rp(vars_, rng, lib, depth=2, **kw):
    return random_program(vars_, depth, rng, lib, **kw)


def _rc(vars_, rng, lib, depth=2):
    return random_circuit(vars_, depth, rng, lib)


def _meas(lib, kr, reg, prefix="Mg"):
    return lib.register_meas(kr, reg_dims(reg), prefix=prefix)


def gen_init_cancel(rng, lib):
    if rng.random() < 0.5:
        reg2 = (Q, R) if rng.random() < 0.5 else (Q,)
        a = Init((Q,), random_ket(2, rng))
        c = Init(reg2, random_ket(reg_dim(reg2), rng))
    else:
        a = Init((Q,), random_ket(2, rng))
        c = Init((R,), random_ket(2, rng))
    tail, lib = _rp((Q, R), rng, lib)
    return Instance(seq(a, c, tail), lib, offset=0)


def gen_init_unitary(rng, lib):
    reg = (Q, R) if rng.random() < 0.5 else (Q,)
    c, lib = _rc(reg, rng, lib, 3)
    a = Init(reg, random_ket(reg_dim(reg), rng))
    return Instance(Seq(a, c), lib, offset=0, back_params={"circuit": c})


def gen_init_qif(rng, lib):
    from qlaws.randprog import random_basis

    basis = random_basis(2, rng)
    j = int(rng.integers(2))
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
    psi = Ket.from_array(phase * basis[j].vec)
    branches = []
    for _ in range(2):
        c, lib = _rc((R, S), rng, lib)
        branches.append(c)
    return Instance(Seq(Init((Q,), psi), Qif((Q,), basis, tuple(branches))), lib, offset=0)


def gen_init_if(rng, lib):
    reg = (Q, R) if rng.random() < 0.3 else (Q,)
    psi = random_ket(reg_dim(reg), rng).vec
    mreg = reg
    if len(reg) == 2 and rng.random() < 0.5:
        a = random_ket(2, rng).vec
        psi = np.kron(a, random_ket(2, rng).vec)
        mreg = (Q,)
        k = gen.eigen_measurement(a, rng)
    else:
        k = gen.eigen_measurement(psi, rng)
    if rng.random() < 0.5:
        k = k[::-1].copy()
    name, lib = _meas(lib, k, mreg)
    b0, lib = _rp((Q, R, S), rng, lib)
    b1, lib = _rp((Q, R, S), rng, lib)
    return Instance(Seq(Init(reg, Ket.from_array(psi)), IfMeas(name, mreg, (b0, b1))), lib, offset=0)


def gen_if_expand(rng, lib):
    r = (Q, R) if rng.random() < 0.5 else (R, Q)
    branches = []
    for _ in range(2):
        p, lib = _rp((S,), rng, lib)
        branches.append(p)
    a = Init(r, random_ket(4, rng))
    return Instance(Seq(IfMeas("M", (Q,), tuple(branches)), a), lib, offset=0, back_params={"reg": (Q,)})


def gen_if_tf(rng, lib):
    p, lib = _rp((Q, R), rng, lib)
    c, lib = _rp((Q, R), rng, lib)
    name = "MT" if rng.random() < 0.5 else "MF"
    node = IfMeas(name, (Q,), (c, p) if name == "MT" else (p, c))
    return Instance(node, lib, back_params={"reg": (R,)})


def gen_if_idem(rng, lib):
    p, lib = _rp((Q, R), rng, lib, 3)
    k = gen.projective(2, rng) if rng.random() < 0.5 else gen.nonprojective(2, rng)
    name, lib = _meas(lib, k, (Q,))
    return Instance(IfMeas(name, (Q,), (p, p)), lib)


def gen_if_compl(rng, lib):
    p, lib = _rp((Q, R), rng, lib)
    c, lib = _rp((Q, R), rng, lib)
    k = gen.nonprojective(2, rng)
    name, lib = _meas(lib, k, (Q,))
    return Instance(IfMeas(name, (Q,), (p, c)), lib)


def gen_if_assoc(rng, lib, projective=True):
    reg = (Q,) if rng.random() < 0.5 else (Q, R)
    k = gen.projective(reg_dim(reg), rng) if projective else gen.nonprojective(reg_dim(reg), rng)
    name, lib = _meas(lib, k, reg)
    ps = []
    for _ in range(3):
        p, lib = _rp((Q, R, S), rng, lib)
        ps.append(p)
    p, q, r = ps
    if rng.random() < 0.5:
        node = IfMeas(name, reg, (p, IfMeas(name, reg, (q, r))))
        form = "right"
    else:
        node = IfMeas(name, reg, (IfMeas(name, reg, (p, q)), r))
        form = "left"
    return Instance(node, lib, {"form": form}, back_params={"form": form, "middle": q})


def gen_if_elim(rng, lib):
    reg = (Q,)
    if rng.random() < 0.5:
        m, n = gen.entails_pair(2, rng, rng.random() < 0.3)
        mn, lib = _meas(lib, m, reg)
        nn, lib = _meas(lib, n, reg)
        p, lib = _rp((Q, R), rng, lib)
        q, lib = _rp((Q, R), rng, lib)
        node = seq(IfMeas(mn, reg, (Abort(), Skip())), IfMeas(nn, reg, (p, q)))
        return Instance(node, lib, {"form": "entail"}, offset=0)
    m, n = gen.weaker_pair(2, rng, rng.random() < 0.3)
    mn, lib = _meas(lib, m, reg)
    nn, lib = _meas(lib, n, reg)
    ps = []
    for _ in range(3):
        p, lib = _rp((Q, R), rng, lib)
        ps.append(p)
    node = IfMeas(nn, reg, (ps[0], IfMeas(mn, reg, (ps[1], ps[2]))))
    return Instance(node, lib, {"form": "weaker"})


def gen_nest_reduce(rng, lib):
    if rng.random() < 0.4:
        rows = []
        for _ in range(2):
            bs = []
            for _ in range(2):
                p, lib = _rp((S,), rng, lib)
                bs.append(p)
            rows.append(IfMeas("M", (R,), tuple(bs)))
        return Instance(IfMeas("M", (Q,), tuple(rows)), lib)
    m, k, l_, _ = gen.reduce_quad(2, rng)
    mn, lib = _meas(lib, m, (Q,))
    kn, lib = _meas(lib, k, (Q,))
    ln, lib = _meas(lib, l_, (Q,))
    p, lib = _rp((Q, R), rng, lib)
    q, lib = _rp((Q, R), rng, lib)
    node = IfMeas(mn, (Q,), (IfMeas(kn, (Q,), (p, q)), IfMeas(ln, (Q,), (p, q))))
    return Instance(node, lib)


def _dist_instance(rng, lib, pair, left: bool):
    d = 2
    m, n = pair(d, rng)
    mn, lib = _meas(lib, m, (Q,))
    nn, lib = _meas(lib, n, (Q,))
    ps = []
    for _ in range(3):
        p, lib = _rp((Q, R), rng, lib)
        ps.append(p)
    r, p, q = ps
    if left:
        node = IfMeas(nn, (Q,), (r, IfMeas(mn, (Q,), (p, q))))
    else:
        node = IfMeas(nn, (Q,), (IfMeas(mn, (Q,), (p, q)), r))
    return Instance(node, lib)


def gen_nest_ldist(rng, lib):
    return _dist_instance(rng, lib, gen.ldist_pair, True)


def gen_nest_rdist(rng, lib):
    return _dist_instance(rng, lib, gen.rdist_pair, False)


def _proj_entail_pair(d, rng, flip_m=False, flip_n=False):
    m, n = gen.entails_pair(d, rng, projective=True)
    if flip_m:
        m = m[::-1].copy()
    if flip_n:
        n = n[::-1].copy()
    return m, n


def gen_nest_ldistp(rng, lib):
    flip = rng.random() < 0.5
    # M entails N, or the complement of M entails N
    return _dist_instance(rng, lib, lambda d, g: _proj_entail_pair(d, g, flip_m=flip), True)


def gen_nest_rdistp(rng, lib):
    flip = rng.random() < 0.5

    def pair(d, g):
        n, m = gen.entails_pair(d, g, projective=True)  # N entails M
        if flip:
            m = m[::-1].copy()
        return m, n

    return _dist_instance(rng, lib, pair, False)


def gen_seq_unit_zero(rng, lib):
    p, lib = _rp((Q, R), rng, lib, 3)
    x = [Skip(), Abort()][int(rng.integers(2))]
    node = Seq(x, p) if rng.random() < 0.5 else Seq(p, x)
    return Instance(node, lib)


def gen_pl_seq_comm(rng, lib):
    a, lib = _rp((Q,), rng, lib, 3, nondet=True)
    c, lib = _rp((R, S), rng, lib, 3)
    return Instance(Seq(a, c), lib)


def gen_pl_seq_assoc(rng, lib):
    ps = []
    for _ in range(3):
        p, lib = _rp((Q, R), rng, lib)
        ps.append(p)
    return Instance(Seq(Seq(ps[0], ps[1]), ps[2]), lib)


def _rand_if(rng, lib, reg, n_out=2, projective=True):
    if projective:
        k = gen.projective(reg_dim(reg), rng, n_out)
    else:
        from qlaws.linalg import random_measurement

        k = random_measurement(reg_dim(reg), n_out, rng)
    return _meas(lib, k, reg)


def gen_if_seq(rng, lib):
    n_out = 2 if rng.random() < 0.7 else 3
    reg = (Q,) if n_out == 2 else (Var("q", 3),)
    name, lib = _rand_if(rng, lib, reg, n_out)
    ps, qs = [], []
    for _ in range(n_out):
        p, lib = _rp((R, S), rng, lib)
        q, lib = _rp(reg + (R,), rng, lib)
        ps.append(p)
        qs.append(q)
    return Instance(Seq(IfMeas(name, reg, tuple(ps)), IfMeas(name, reg, tuple(qs))), lib, offset=0)


def gen_if_rdist(rng, lib):
    name, lib = _rand_if(rng, lib, (Q,), 2, rng.random() < 0.5)
    ps = []
    for _ in range(2):
        p, lib = _rp((Q, R), rng, lib)
        ps.append(p)
    tail, lib = _rp((Q, R), rng, lib)
    return Instance(Seq(IfMeas(name, (Q,), tuple(ps)), tail), lib, offset=0)


def gen_if_ldist1(rng, lib, arity=2):
    reg = (Q,) if arity == 2 else (Var("q", 3),)
    name, lib = _rand_if(rng, lib, reg, arity, rng.random() < 0.5)
    ps = []
    for _ in range(arity):
        p, lib = _rp(reg + (R,), rng, lib)
        ps.append(p)
    head, lib = _rp((R, S), rng, lib)
    return Instance(Seq(head, IfMeas(name, reg, tuple(ps))), lib, offset=0)


def gen_if_ldist_gen(rng, lib):
    return gen_if_ldist1(rng, lib, 2 if rng.random() < 0.5 else 3)


def gen_if_ldist2(rng, lib):
    name, lib = _rand_if(rng, lib, (Q,), 2, rng.random() < 0.5)
    ps = []
    for _ in range(2):
        p, lib = _rp((Q, R), rng, lib)
        ps.append(p)
    if rng.random() < 0.5:
        c, lib = random_gate((Q,), rng, lib)
        return Instance(Seq(c, IfMeas(name, (Q,), tuple(ps))), lib, {"form": "absorb"}, offset=0,
                        back_params={"form": "absorb", "gate": c.name})
    c, lib = _rc((Q, R), rng, lib, 2)
    if c == Skip():
        c = Gate("H", (R,))
    return Instance(Seq(c, IfMeas(name, (Q,), tuple(ps))), lib, {"form": "general"}, offset=0)


def gen_qif_absorb(rng, lib):
    from qlaws.randprog import random_basis
    from qlaws.syntax import basis_matrix

    reg = (Q,) if rng.random() < 0.7 else (Var("q", 3),)
    d = reg_dim(reg)
    basis = random_basis(d, rng)
    k = gen.basis_measurement(basis_matrix(basis))
    name, lib = _meas(lib, k, reg)
    cs, ps = [], []
    for _ in range(d):
        c, lib = _rc((R, S) if d == 2 else (R,), rng, lib)
        p, lib = _rp(reg + (R,), rng, lib)
        cs.append(c)
        ps.append(p)
    return Instance(Seq(Qif(reg, basis, tuple(cs)), IfMeas(name, reg, tuple(ps))), lib, offset=0)


def gen_if_split(rng, lib):
    n_out = 2 if rng.random() < 0.7 else 3
    reg = (Q,) if n_out == 2 else (Var("q", 3),)
    name, lib = _rand_if(rng, lib, reg, n_out)
    branches = []
    for _ in range(n_out):
        p, lib = _rp((R, S), rng, lib, 1)
        q, lib = _rp(reg + (R,), rng, lib)
        branches.append(Seq(p, q))
    return Instance(IfMeas(name, reg, tuple(branches)), lib)


def gen_if_restrict(rng, lib):
    reg = (Q,)
    name, lib = _rand_if(rng, lib, reg, 2, rng.random() < 0.5)
    p, lib = _rp((R, S), rng, lib, 3)
    wide = (Q, R) if rng.random() < 0.3 else reg
    if wide != reg:
        p, lib = _rp((S,), rng, lib, 3)
    a = Init(wide, random_ket(reg_dim(wide), rng))
    return Instance(Seq(IfMeas(name, reg, (p, p)), a), lib, offset=0, back_params={"meas": name} if wide == reg else {})


def gen_swap_comm(rng, lib):
    if rng.random() < 0.3:
        return Instance(Gate("SWAP", (Q, R)), lib, {"form": "sym"}, back_params={"form": "sym"})
    half = (Q,) if rng.random() < 0.5 else (R,)
    p, lib = _rp(half, rng, lib, 3)
    if not qv(p):
        p = Gate("X", half)
    return Instance(Seq(Gate("SWAP", (Q, R)), p), lib, {"form": "comm"}, back_params={"form": "comm"})


def gen_swap_cancel(rng, lib):
    if rng.random() < 0.5:
        a, c = Init((Q,), random_ket(2, rng)), Init((R,), random_ket(2, rng))
        node = seq(a, c, Gate("SWAP", (Q, R)))
    else:
        a, c = Init((Q, S), random_ket(4, rng)), Init((R, Var("t")), random_ket(4, rng))
        node = seq(a, c, Gate("SWAP", (Q, S, R, Var("t"))))
    return Instance(node, lib, offset=0)


def gen_lifting(rng, lib):
    c, lib = _rc((Q, R), rng, lib, 4)
    if c == Skip():
        c = Gate("H", (Q,))
    space = tuple(sorted(qv(c), key=lambda v: v.name))
    u = circuit_unitary_lib(lib, c, space)
    name, lib = lib.register_gate(u, reg_dims(space), prefix="L")
    d = Gate(name, space)
    pre = Init((Q,), random_ket(2, rng))
    post, lib = _rp((Q, R), rng, lib)
    prog = seq(pre, c, post)
    path = (1, 0)
    return Instance(prog, lib, {"replacement": d}, path=path, back_params={"replacement": c})


def circuit_unitary_lib(lib, c, space):
    from qlaws.semantics import circ_sem

    return circ_sem(c, lib, space=space).unitary


# ---------------------------------------------------------------------------
# catalog


def laws() -> list[Law]:
    det = _det_side
    return [
        Law("PL-InitCancel", "program", "overwriting or merging consecutive initializations",
            "program laws: cancellation of initializations",
            _pair_rule(_ic_test, _ic_build),
            FnRule(_ic_back_match, _ic_back_build), gen_init_cancel),
        Law("PL-InitUnitary", "program", "absorbing a circuit into the preceding initialization",
            "program laws: unitary elimination after initialization",
            _pair_rule(_iu_test, _iu_build),
            FnRule(_iu_back_match, _iu_back_build), gen_init_unitary),
        Law("PL-InitQif", "program", "resolving a qif whose guard holds a basis state",
            "program laws: qif elimination after initialization",
            _pair_rule(_iq_test, _iq_build, [("state along one guard basis vector", _iq_side)]),
            None, gen_init_qif),
        Law("PL-InitIf", "program", "resolving a measurement whose outcome is certain",
            "program laws: if elimination after initialization",
            _pair_rule(_ii_test, _ii_build, [("state fixed by one measurement operator", _ii_side)]),
            None, gen_init_if),
        Law("PL-IfExpand", "program", "measuring a larger register that is reinitialized",
            "program laws: if expansion before reinitialization",
            _pair_rule(_ie_test, _ie_build, [("register outside branches", _ie_side)]),
            _pair_rule(_ie_back_test, _ie_back_build, [("register outside branches", _ie_side)]),
            gen_if_expand),
        Law("PL-IfTF", "program", "if over a measurement with a certain outcome",
            "program laws: truth and falsity",
            FnRule(_tf_match, lambda b, c: b["keep"]),
            FnRule(lambda n, c: {"P": n}, _tf_back_build), gen_if_tf),
        Law("PL-IfIdem", "program", "if with identical branches",
            "program laws: idempotence of if",
            FnRule(_idem_match, _idem_build, [det("P")]),
            _pair_rule(_idem_back_test, _idem_back_build, [det("P")]), gen_if_idem),
        Law("PL-IfCompl", "program", "swapping branches with the complement measurement",
            "program laws: complementation",
            FnRule(_compl_match, _compl_build), FnRule(_compl_match, _compl_build), gen_if_compl),
        Law("PL-IfAssoc", "program", "repeated projective measurement in a branch",
            "program laws: associativity of if for projective measurements",
            FnRule(_assoc_match, _assoc_build, [_proj_side()]),
            FnRule(_assoc_back_match, _assoc_back_build, [_proj_side()]), gen_if_assoc),
        Law("PL-IfElim", "program", "if elimination by entailment or weakening",
            "program laws: if elimination with entailment / weaker measurement",
            _EitherRule(_pair_rule(_elim_entail_test, _elim_entail_build, [("entailment", _elim_entail_side)]),
                        FnRule(_elim_weak_match, _elim_weak_build, [("weaker", _elim_weak_side)])),
            None, gen_if_elim),
        Law("PL-NestReduce", "program", "collapsing nested ifs into one measurement",
            "nested if laws: reduction",
            FnRule(_reduce_match, _reduce_build, [("decomposition of the inner tests", _reduce_side)]),
            FnRule(_reduce_back_match, _reduce_back_build), gen_nest_reduce),
        Law("PL-NestLDist", "program", "left distributivity of nested ifs",
            "nested if laws: left distributivity",
            FnRule(_ldist_match, _ldist_build, [det("R"), ("left commutation and absorption", _ldist_side)]),
            FnRule(_ldist_back_match, _ldist_back_build, [det("R"), ("left commutation and absorption", _ldist_side)]),
            gen_nest_ldist),
        Law("PL-NestRDist", "program", "right distributivity of nested ifs",
            "nested if laws: right distributivity",
            FnRule(_rdist_match, _rdist_build, [det("R"), ("right commutation and absorption", _rdist_side)]),
            FnRule(_rdist_back_match, _rdist_back_build, [det("R"), ("right commutation and absorption", _rdist_side)]),
            gen_nest_rdist),
        Law("PL-NestLDistP", "program", "left distributivity of nested projective ifs",
            "nested if laws: left distributivity for projections",
            FnRule(_ldist_match, _ldist_build, [det("R"), ("projective entailment", _ldistp_side)]),
            FnRule(_ldist_back_match, _ldist_back_build, [det("R"), ("projective entailment", _ldistp_side)]),
            gen_nest_ldistp),
        Law("PL-NestRDistP", "program", "right distributivity of nested projective ifs",
            "nested if laws: right distributivity for projections",
            FnRule(_rdist_match, _rdist_build, [det("R"), ("projective entailment", _rdistp_side)]),
            FnRule(_rdist_back_match, _rdist_back_build, [det("R"), ("projective entailment", _rdistp_side)]),
            gen_nest_rdistp),
        Law("PL-SeqUnitZero", "program", "skip as unit and abort as zero of composition",
            "sequential composition laws: unit and zero",
            _pair_rule(_unit_test, lambda b, c: b["out"]),
            FnRule(lambda n, c: {"P": n}, _unit_back_build), gen_seq_unit_zero),
        Law("PL-SeqComm", "program", "commuting programs on disjoint variables",
            "sequential composition laws: commutativity",
            PatternRule(Seq(P1, P2), Seq(P2, P1), _comm_sides()),
            PatternRule(Seq(P1, P2), Seq(P2, P1), _comm_sides()), gen_pl_seq_comm),
        Law("PL-SeqAssoc", "program", "regrouping sequential composition",
            "sequential composition laws: associativity",
            PatternRule(Seq(Seq(P1, P2), P3), Seq(P1, Seq(P2, P3)), windowed=False),
            PatternRule(Seq(P1, Seq(P2, P3)), Seq(Seq(P1, P2), P3), windowed=False), gen_pl_seq_assoc),
        Law("PL-IfSeq", "program", "merging consecutive ifs over one projective measurement",
            "sequential composition laws: sequentiality of if",
            _pair_rule(_ifseq_test, _ifseq_build, [_proj_side(), _branches_avoid("Ps")]),
            FnRule(_ifsplit_match, _ifsplit_build, [_proj_side(), _branches_avoid("Ps")]), gen_if_seq),
        Law("PL-IfRDist", "program", "pushing a following program into the branches",
            "sequential composition laws: right distributivity",
            _pair_rule(_rdist_seq_test, _rdist_seq_build, [det("P")]),
            FnRule(_rdist_seq_back_match, _rdist_seq_back_build, [det("P")]), gen_if_rdist),
        Law("PL-IfLDist1", "program", "pushing a preceding program into binary branches",
            "sequential composition laws: left distributivity I",
            _pair_rule(_ldist_seq_test(2), _ldist_seq_build, [det("P"), ("register outside P", _ldist_seq_side)]),
            FnRule(_ldist_seq_back_match(2), _ldist_seq_back_build,
                   [det("P"), ("register outside P", _ldist_seq_side)]),
            gen_if_ldist1),
        Law("PL-IfLDist2", "program", "pushing a circuit through a measurement",
            "sequential composition laws: left distributivity II",
            _pair_rule(_ld2_test, _ld2_build, [("conjugated measurement", _ld2_side)]),
            FnRule(_ld2_back_match, _ld2_back_build), gen_if_ldist2),
        Law("PL-QifAbsorb", "program", "qif followed by a measurement in its guard basis",
            "program laws: qif absorbed by a basis measurement",
            _pair_rule(_qa_test, _qa_build, [("measurement in the guard basis", _qa_side)]),
            FnRule(_qa_back_match, _qa_back_build), gen_qif_absorb),
        Law("PL-IfSplit", "program", "splitting every branch of a projective if",
            "deferred-measurement lemmas: sequentiality",
            FnRule(_ifsplit_match, _ifsplit_build, [_proj_side(), _branches_avoid("Ps")]),
            _pair_rule(_ifseq_test, _ifseq_build, [_proj_side(), _branches_avoid("Ps")]), gen_if_split),
        Law("PL-IfLDistGen", "program", "pushing a preceding program into any number of branches",
            "deferred-measurement lemmas: left distributivity",
            _pair_rule(_ldist_seq_test(None), _ldist_seq_build, [det("P"), ("register outside P", _ldist_seq_side)]),
            FnRule(_ldist_seq_back_match(None), _ldist_seq_back_build,
                   [det("P"), ("register outside P", _ldist_seq_side)]),
            gen_if_ldist_gen),
        Law("PL-IfRestrict", "program", "dropping a measurement on a register that is reinitialized",
            "deferred-measurement lemmas: if restriction",
            _pair_rule(_restrict_test, lambda b, c: Seq(b["A"], b["P"]), [det("P"), ("register outside P", _restrict_side)]),
            _pair_rule(_restrict_back_test, _restrict_back_build, [det("P")]), gen_if_restrict),
        Law("PL-SwapComm", "program", "swaps are symmetric and move programs between halves",
            "deferred-measurement lemmas: swap commutation",
            _EitherRule(_pair_rule(_swap_comm_test, _swap_build), FnRule(_swap_match, _swap_build)),
            _EitherRule(_pair_rule(_swap_back_test, _swap_back_build), FnRule(_swap_match, _swap_build)),
            gen_swap_comm),
        Law("PL-SwapCancel", "program", "swapping freshly initialized registers",
            "deferred-measurement lemmas: swap cancellation",
            FnRule(lambda n, c: _single_items(n, c, _sc_items), _sc_build, match_items=_sc_items),
            _pair_rule(_sc_back_test, _sc_back_build), gen_swap_cancel),
        Law("PL-Lifting", "program", "replacing an embedded circuit by an equal circuit",
            "congruence: lifting circuit equalities into programs",
            FnRule(_lift_match, lambda b, c: b["D"], [("circuits equal", _lift_side)],
                   match_items=_lift_items),
            FnRule(_lift_match, lambda b, c: b["D"], [("circuits equal", _lift_side)],
                   match_items=_lift_items), gen_lifting),
    ]


def _single_items(n, ctx, fn):
    items = seq_items(n) if isinstance(n, Seq) else [n]
    got = fn(items, ctx)
    if got is None or got[1] != len(items):
        return None
    return got[0]
