"""Laws of loops and recursion."""

from __future__ import annotations

import numpy as np

from qlaws import measrel
from qlaws.laws import gen
from qlaws.laws.core import FnRule, Law, SynthesisFailed
from qlaws.laws.util import Instance, add_meas, kraus, kraus_on, split_last, union_space
from qlaws.linalg import random_unitary
from qlaws.randprog import random_circuit, random_program
from qlaws.semantics import circ_sem
from qlaws.syntax import (
    Call,
    Gate,
    IfMeas,
    Mu,
    Seq,
    Skip,
    Var,
    fresh_ident,
    free_calls,
    reg_dims,
    seq,
    seq_items,
    subst,
    uniquify_binders,
    While,
)

Q, R = Var("q"), Var("r")


def _eps(ctx):
    return ctx.cfg.eps_rel


def _while(n):
    return isinstance(n, While)


def _fresh(ctx, *nodes):
    from qlaws.syntax import idents

    taken = set(ctx.taken_idents)
    for n in nodes:
        taken |= idents(n)
    return fresh_ident(taken)


def _body_then_call(node, ident):
    """``P`` when ``node`` is ``P;Call(ident)`` with ``ident`` not free in ``P``."""
    items = seq_items(node)
    if items[-1] != Call(ident):
        return None
    body = seq(*items[:-1]) if len(items) > 1 else Skip()
    return None if ident in free_calls(body) else body


# -- recursion and loops ---------------------------------------------------------


def _rec_match(n, ctx):
    return {"W": n} if _while(n) else None


def _rec_build(b, ctx):
    w = b["W"]
    x = _fresh(ctx, w, ctx.root) if ctx.root is not None else _fresh(ctx, w)
    return Mu(x, IfMeas(w.meas, w.reg, (Skip(), seq(w.body, Call(x)))))


def _rec_back_match(n, ctx):
    if isinstance(n, Mu) and isinstance(n.body, IfMeas) and len(n.body.branches) == 2:
        stop, go = n.body.branches
        p = _body_then_call(go, n.ident)
        if stop == Skip() and p is not None:
            return {"M": n.body, "P": p}
    return None


def _rec_back_build(b, ctx):
    m = b["M"]
    return While(m.meas, m.reg, b["P"])


def _fix_build(b, ctx):
    w = b["W"]
    return IfMeas(w.meas, w.reg, (Skip(), seq(w.body, w)))


def _fix_back_match(n, ctx):
    if isinstance(n, IfMeas) and len(n.branches) == 2 and n.branches[0] == Skip():
        head, last = split_last(n.branches[1])
        if _while(last) and (last.meas, last.reg) == (n.meas, n.reg) and head == last.body:
            return {"W": last}
    return None


def _guarded_while(n):
    """``N |> (M * P)``, i.e. an if whose outcome-1 branch is a loop."""
    if isinstance(n, IfMeas) and len(n.branches) == 2 and n.branches[0] == Skip():
        return n.branches[1]
    return None


def _ops(ctx, *pairs):
    space = union_space(*(r for _, r in pairs))
    return [kraus_on(ctx, name, r, space) for name, r in pairs]


def _unfold_match(n, ctx):
    w = _guarded_while(n)
    if _while(w):
        return {"N": n, "W": w}
    return None


def _unfold_side(b, ctx):
    n, w = b["N"], b["W"]
    m_ops, n_ops = _ops(ctx, (w.meas, w.reg), (n.meas, n.reg))
    v = measrel.weaker(m_ops, n_ops, _eps(ctx))
    return v.holds, v.residual


def _unfold_build(b, ctx):
    n, w = b["N"], b["W"]
    return IfMeas(n.meas, n.reg, (Skip(), seq(w.body, w)))


def _unfold_back_match(n, ctx):
    body = _guarded_while(n)
    if body is None:
        return None
    head, last = split_last(body)
    if _while(last) and head == last.body:
        return {"N": n, "W": last}
    return None


def _unfold_back_build(b, ctx):
    n = b["N"]
    return IfMeas(n.meas, n.reg, (Skip(), b["W"]))


def _elim_side(b, ctx):
    n, w = b["N"], b["W"]
    m_ops, n_ops = _ops(ctx, (w.meas, w.reg), (n.meas, n.reg))
    v = measrel.weaker(measrel.complement(m_ops), n_ops, _eps(ctx))
    return v.holds, v.residual


def _elim_build(b, ctx):
    n = b["N"]
    return IfMeas(n.meas, n.reg, (Skip(), Skip()))


def _post_match(n, ctx):
    if not _while(n):
        return None
    name = ctx.param("meas")
    reg = tuple(ctx.param("reg") or n.reg)
    return {"W": n, "Nname": name, "Nreg": reg}


def _post_synth(b, ctx):
    w = b["W"]
    if b["Nname"] is not None:
        return b["Nname"], ctx
    k = kraus(ctx, w.meas, w.reg)
    if not measrel.is_projective(k, _eps(ctx)):
        raise SynthesisFailed("a default postcondition needs a projective loop measurement")
    return add_meas(ctx, measrel.complement(k), reg_dims(w.reg), "C", f"{w.meas}_perp")


def _post_side(b, ctx):
    w = b["W"]
    if b["Nname"] is None:
        return measrel.is_projective(kraus(ctx, w.meas, w.reg), _eps(ctx))
    n_ops, m_ops = _ops(ctx, (b["Nname"], b["Nreg"]), (w.meas, w.reg))
    v = measrel.weaker(n_ops, measrel.complement(m_ops), _eps(ctx))
    return v.holds, v.residual


def _post_build(b, ctx):
    name, ctx = _post_synth(b, ctx)
    reg = b["Nreg"]
    return Seq(b["W"], IfMeas(name, reg, (Skip(), Skip()))), ctx, {**b, "N": name}


def _post_back_test(items, ctx):
    if len(items) < 2:
        return None
    w, t = items[0], items[1]
    if _while(w) and isinstance(t, IfMeas) and t.branches == (Skip(), Skip()):
        return {"W": w, "Nname": t.meas, "Nreg": t.reg}, 2
    return None


def _post_back_match(n, ctx):
    if isinstance(n, Seq):
        got = _post_back_test(seq_items(n), ctx)
        if got is not None and got[1] == len(seq_items(n)):
            return got[0]
    return None


# -- recursion -------------------------------------------------------------------


def alpha_key(node):
    """Canonical form up to renaming of bound recursion identifiers."""
    counter = [0]

    def go(n, env):
        if isinstance(n, Call):
            return Call(env.get(n.ident, n.ident))
        if isinstance(n, Mu):
            name = f"#b{counter[0]}"
            counter[0] += 1
            return Mu(name, go(n.body, {**env, n.ident: name}))
        kids = n.children()
        if not kids:
            return n
        return n.with_children(tuple(go(k, env) for k in kids))

    return go(node, {})


def unfold_mu(m: Mu, taken=()) -> object:
    body = subst(m.body, m.ident, m)
    return uniquify_binders(body, set(taken))


def _mu_match(n, ctx):
    return {"X": n} if isinstance(n, Mu) else None


def _mu_build(b, ctx):
    return unfold_mu(b["X"])


def _mu_back_match(n, ctx):
    m = ctx.param("mu")
    if isinstance(m, Mu) and alpha_key(unfold_mu(m)) == alpha_key(n):
        return {"X": m}
    return None


def _tail_match(n, ctx):
    if isinstance(n, Mu) and isinstance(n.body, IfMeas) and len(n.body.branches) == 2:
        q, go = n.body.branches
        p = _body_then_call(go, n.ident)
        if p is not None and n.ident not in free_calls(q):
            return {"M": n.body, "P": p, "Q": q}
    return None


def _tail_build(b, ctx):
    m = b["M"]
    return Seq(While(m.meas, m.reg, b["P"]), b["Q"])


def _tail_back_match(n, ctx):
    if isinstance(n, Seq):
        items = seq_items(n)
        if _while(items[0]):
            return {"W": items[0], "Q": seq(*items[1:])}
    return None


def _tail_back_build(b, ctx):
    w = b["W"]
    x = _fresh(ctx, w, b["Q"]) if ctx.root is None else _fresh(ctx, ctx.root)
    return Mu(x, IfMeas(w.meas, w.reg, (b["Q"], seq(w.body, Call(x)))))


# ---------------------------------------------------------------------------
# generators


def loop_rate(lib, w: While, space) -> float:
    """Spectral radius of the map applied by one more loop round."""
    m1 = kraus_on_lib(lib, w.meas, w.reg, space)[1]
    a = circ_sem(w.body, lib, space=space).unitary @ m1
    return float(max(abs(np.linalg.eigvals(np.kron(a, a.conj())))))


def kraus_on_lib(lib, name, reg, space):
    from qlaws.linalg import embed_kraus

    return embed_kraus(lib.kraus(name, reg_dims(reg)), tuple(reg), tuple(space))


def _loop(rng, lib, k=None, body_vars=(Q, R), max_rate: float = 0.9):
    """A loop on ``q`` whose remaining mass shrinks geometrically at a bounded rate."""
    if k is None:
        k = gen.nonprojective(2, rng)
    name, lib = lib.register_meas(k, (2,), prefix="Ml")
    base = lib
    for _ in range(200):
        body, lib = random_circuit(body_vars, 2, rng, base)
        u, lib = lib.register_gate(random_unitary(2, rng), (2,), prefix="Ub")
        w = While(name, (Q,), seq(body, Gate(u, (Q,))))
        if loop_rate(lib, w, body_vars) <= max_rate:
            break
    return w, lib


def gen_loop_rec(rng, lib):
    w, lib = _loop(rng, lib)
    return Instance(w, lib)


def gen_fix(rng, lib):
    w, lib = _loop(rng, lib)
    return Instance(w, lib)


def gen_unfold(rng, lib):
    m, n = gen.weaker_pair(2, rng, rng.random() < 0.3)
    w, lib = _loop(rng, lib, m)
    nn, lib = lib.register_meas(n, (2,), prefix="Nu")
    return Instance(IfMeas(nn, (Q,), (Skip(), w)), lib)


def gen_elim(rng, lib):
    a, n = gen.weaker_pair(2, rng, rng.random() < 0.3)
    w, lib = _loop(rng, lib, measrel.complement(a))
    nn, lib = lib.register_meas(n, (2,), prefix="Ne")
    return Instance(IfMeas(nn, (Q,), (Skip(), w)), lib)


def gen_post(rng, lib):
    m, nk = gen.post_pair(2, rng, rng.random() < 0.3)
    w, lib = _loop(rng, lib, m)
    nn, lib = lib.register_meas(nk, (2,), prefix="Np")
    return Instance(w, lib, {"meas": nn})


def gen_mu_unfold(rng, lib):
    m, lib = lib.register_meas(gen.nonprojective(2, rng), (2,), prefix="Mm")
    p, lib = random_circuit((Q, R), 2, rng, lib)
    q, lib = random_program((Q, R), 1, rng, lib, if_prob=0.0, abort_prob=0.0)
    node = Mu("X", IfMeas(m, (Q,), (q, seq(p, Call("X")))))
    return Instance(node, lib, back_params={"mu": node})


def gen_tail(rng, lib):
    m, lib = lib.register_meas(gen.nonprojective(2, rng), (2,), prefix="Mt")
    p, lib = random_circuit((Q, R), 2, rng, lib)
    q, lib = random_program((Q, R), 2, rng, lib)
    return Instance(Mu("X", IfMeas(m, (Q,), (q, seq(p, Call("X"))))), lib)


# ---------------------------------------------------------------------------
# catalog


def laws() -> list[Law]:
    return [
        Law("RL-LoopRec", "loop", "a while-loop as the least fixpoint of its unfolding",
            "loop laws: loops as recursion",
            FnRule(_rec_match, _rec_build), FnRule(_rec_back_match, _rec_back_build), gen_loop_rec),
        Law("RL-Fix", "loop", "unrolling one iteration of a while-loop",
            "loop laws: fixpoint",
            FnRule(_rec_match, _fix_build), FnRule(_fix_back_match, lambda b, c: b["W"]), gen_fix),
        Law("RL-Unfold", "loop", "running the body once when the guard is known to hold",
            "loop laws: unfolding under a stronger test",
            FnRule(_unfold_match, _unfold_build, [("loop test weaker than the guard", _unfold_side)]),
            FnRule(_unfold_back_match, _unfold_back_build, [("loop test weaker than the guard", _unfold_side)]),
            gen_unfold),
        Law("RL-Elim", "loop", "dropping a loop whose test is known to fail",
            "loop laws: elimination under a contradicting test",
            FnRule(_unfold_match, _elim_build, [("complement of the loop test weaker than the guard", _elim_side)]),
            None, gen_elim),
        Law("RL-Post", "loop", "asserting a consequence of the exit condition",
            "loop laws: postcondition",
            FnRule(_post_match, _post_build, [("test weaker than the exit condition", _post_side)]),
            FnRule(_post_back_match, lambda b, c: b["W"], [("test weaker than the exit condition", _post_side)],
                   match_items=_post_back_test),
            gen_post),
        Law("RL-MuUnfold", "loop", "unfolding a recursive definition once",
            "recursion laws: unfolding",
            FnRule(_mu_match, _mu_build), FnRule(_mu_back_match, lambda b, c: b["X"]), gen_mu_unfold),
        Law("RL-Tail", "loop", "tail recursion as a while-loop",
            "recursion laws: tail recursion",
            FnRule(_tail_match, _tail_build),
            FnRule(_tail_back_match, _tail_back_build, match_items=lambda items, c: _tail_items(items, c)),
            gen_tail),
    ]


def _tail_items(items, ctx):
    if len(items) >= 2 and _while(items[0]):
        return {"W": items[0], "Q": items[1]}, 2
    return None
