"""Counterexample searches for equations that fail in general.

Two kinds of search live here:

* non-laws: equations that hold classically or for projective
  measurements but fail in general (if-associativity with a generic
  measurement, distributing choice over if);
* necessity checks: a catalog law is rewritten with its side condition
  ignored, on instances where the condition fails, to show the condition is
  not vacuous.
"""

from __future__ import annotations

from dataclasses import dataclass

from qlaws.config import Config
from qlaws.laws.core import LTR, Ctx, _splice, match_law
from qlaws.laws.gen import nonprojective
from qlaws.laws.harness import HARNESS_CFG, law_rng
from qlaws.library import Library
from qlaws.linalg import random_measurement, random_unitary
from qlaws.randprog import random_circuit, random_program
from qlaws.syntax import Gate, IfMeas, NdChoice, Node, Skip, Var, While, get_at, replace_at, seq
from qlaws.verify import check_eq

Q, R = Var("q"), Var("r")
MIN_RESIDUAL = 1e-3


@dataclass
class Witness:
    name: str
    lhs: Node
    rhs: Node
    lib: Library
    residual: float
    seed: int
    trial: int
    side_residual: float | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual, "seed": self.seed, "trial": self.trial,
                "side_residual": self.side_residual}


def _progs(rng, lib, k, vars_=(Q, R), depth=2):
    out = []
    for _ in range(k):
        p, lib = random_program(vars_, depth, rng, lib)
        out.append(p)
    return out, lib


def ifassoc_instance(rng, lib):
    """``P <M> (Q <M> R)`` against ``P <M> R`` for a non-projective ``M``."""
    name, lib = lib.register_meas(nonprojective(2, rng), (2,), prefix="Mn")
    (p, q, r), lib = _progs(rng, lib, 3)
    lhs = IfMeas(name, (Q,), (p, IfMeas(name, (Q,), (q, r))))
    rhs = IfMeas(name, (Q,), (p, r))
    return lhs, rhs, lib


def nd5_instance(rng, lib):
    """``(P <M> Q) |_| R`` against ``(P |_| R) <M> (Q |_| R)``."""
    name, lib = lib.register_meas(random_measurement(2, 2, rng), (2,), prefix="Mc")
    (p, q, r), lib = _progs(rng, lib, 3)
    lhs = NdChoice(IfMeas(name, (Q,), (p, q)), r)
    rhs = IfMeas(name, (Q,), (NdChoice(p, r), NdChoice(q, r)))
    return lhs, rhs, lib


NONLAWS = {"IfAssoc-nonprojective": ifassoc_instance, "Nd5-quantum": nd5_instance}


def search_nonlaw(name: str, seed: int = 42, trials: int = 200, cfg: Config = HARNESS_CFG,
                  min_residual: float = MIN_RESIDUAL) -> Witness | None:
    """First seeded instance whose two sides differ by at least ``min_residual``."""
    make = NONLAWS[name]
    for t in range(trials):
        rng = law_rng(name, seed, t)
        lhs, rhs, lib = make(rng, Library.standard())
        r = check_eq(lhs, rhs, lib, cfg)
        if r.verdict == "not-equal" and r.residual >= min_residual:
            return Witness(name, lhs, rhs, lib, r.residual, seed, t)
    return None


# ---------------------------------------------------------------------------
# necessity of side conditions


def force_apply(law, program: Node, lib, path=(), offset=None, params=None, cfg: Config = HARNESS_CFG):
    """Rewrite with ``law`` ignoring its side conditions.

    Returns ``(new_program, lib, side_failures)``.
    """
    ctx = Ctx(lib=lib, cfg=cfg, params=dict(params or {}), root=program)
    got = match_law(law, program, path, offset, LTR, ctx)
    if got is None:
        raise ValueError(f"{law.id} does not match")
    b, width = got
    rule = law.rule(LTR)
    failures = rule.check(b, ctx)
    new, ctx2, _ = rule.build(b, ctx)
    node = get_at(program, path)
    if width is not None:
        new = _splice(node, offset, width, new)
    return replace_at(program, path, new), ctx2.lib, failures


def _loop(rng, lib, meas):
    body, lib = random_circuit((Q, R), 2, rng, lib)
    u, lib = lib.register_gate(random_unitary(2, rng), (2,), prefix="Ub")
    return While(meas, (Q,), seq(body, Gate(u, (Q,)))), lib


def _nec_ifassoc(rng, lib):
    lhs, _, lib = ifassoc_instance(rng, lib)
    return lhs, lib, {}


def _nec_nest_ldist(rng, lib):
    m, lib = lib.register_meas(random_measurement(2, 2, rng), (2,), prefix="Mx")
    n, lib = lib.register_meas(random_measurement(2, 2, rng), (2,), prefix="Nx")
    (r, p, q), lib = _progs(rng, lib, 3)
    return IfMeas(n, (Q,), (r, IfMeas(m, (Q,), (p, q)))), lib, {}


def _nec_unfold(rng, lib):
    m, lib = lib.register_meas(random_measurement(2, 2, rng), (2,), prefix="Mx")
    n, lib = lib.register_meas(random_measurement(2, 2, rng), (2,), prefix="Nx")
    w, lib = _loop(rng, lib, m)
    return IfMeas(n, (Q,), (Skip(), w)), lib, {}


NECESSITY = {
    "PL-IfAssoc": _nec_ifassoc,
    "PL-NestLDist": _nec_nest_ldist,
    "RL-Unfold": _nec_unfold,
    "RL-Elim": _nec_unfold,
}


def necessity_witness(law_id: str, seed: int = 42, trials: int = 100,
                      cfg: Config = HARNESS_CFG) -> Witness | None:
    """An instance where the side condition fails and the forced rewrite changes the meaning."""
    from qlaws.laws import CATALOG

    law = CATALOG[law_id]
    make = NECESSITY[law_id]
    for t in range(trials):
        rng = law_rng(f"necessity:{law_id}", seed, t)
        prog, lib, params = make(rng, Library.standard())
        try:
            out, lib2, failures = force_apply(law, prog, lib, params=params, cfg=cfg)
        except ValueError:
            continue
        if not failures:
            continue
        r = check_eq(prog, out, lib2, cfg)
        if r.verdict == "not-equal" and r.residual >= MIN_RESIDUAL:
            side = float(max(f[1] for f in failures))
            return Witness(f"necessity:{law_id}", prog, out, lib2, r.residual, seed, t, side)
    return None


__all__ = ["NECESSITY", "NONLAWS", "Witness", "force_apply", "necessity_witness", "search_nonlaw"]
