"""Helpers shared by the law catalogs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from qlaws.laws.core import Ctx, NoMatch, SynthesisFailed
from qlaws.linalg import embed, embed_kraus
from qlaws.semantics import circ_sem
from qlaws.syntax import (
    Gate,
    Ket,
    Node,
    Seq,
    Skip,
    basis_matrix,
    canonical,
    reg_dims,
    seq,
    seq_items,
)


@dataclass
class Instance:
    """A generated law instance: where and how to apply the rule."""

    program: Node
    lib: object
    params: dict = field(default_factory=dict)
    path: tuple | None = ()
    offset: int | None = None
    back_params: dict = field(default_factory=dict)


def disjoint(a, b) -> bool:
    return not (set(a) & set(b))


def gate_matrix(ctx: Ctx, g: Gate) -> np.ndarray:
    return ctx.lib.gate_matrix(g.name, reg_dims(g.reg))


def circuit_unitary(ctx: Ctx, c: Node, reg) -> np.ndarray:
    return circ_sem(c, ctx.lib, ctx.cfg, tuple(reg)).unitary


def kraus(ctx: Ctx, name: str, reg) -> np.ndarray:
    return ctx.lib.kraus(name, reg_dims(reg))


def kraus_on(ctx: Ctx, name: str, reg, space) -> np.ndarray:
    return embed_kraus(kraus(ctx, name, reg), tuple(reg), tuple(space))


def union_space(*regs) -> tuple:
    out = set()
    for r in regs:
        out |= set(r)
    return canonical(out)


def op_on(op, reg, space) -> np.ndarray:
    return embed(op, tuple(reg), tuple(space))


def add_gate(ctx: Ctx, matrix, dims, prefix: str, name: str | None = None):
    """Name for ``matrix`` in the library, registering it if allowed."""
    matrix = np.asarray(matrix, dtype=complex)
    found = ctx.lib.find_gate(matrix, dims)
    if found is not None:
        return found, ctx
    if not ctx.cfg.auto_register:
        raise SynthesisFailed(f"gate {name or prefix} is not in the library and auto-registration is off")
    n, lib = ctx.lib.register_gate(matrix, dims, prefix=prefix, name=name)
    return n, ctx.with_lib(lib)


def add_meas(ctx: Ctx, kr, dims, prefix: str, name: str | None = None):
    kr = np.asarray(kr, dtype=complex)
    found = ctx.lib.find_meas(kr, dims)
    if found is not None:
        return found, ctx
    if not ctx.cfg.auto_register:
        raise SynthesisFailed(f"measurement {name or prefix} is not in the library and auto-registration is off")
    n, lib = ctx.lib.register_meas(kr, dims, prefix=prefix, name=name)
    return n, ctx.with_lib(lib)


def split_first(node: Node) -> tuple[Node, Node]:
    items = seq_items(node)
    return items[0], seq(*items[1:])


def split_last(node: Node) -> tuple[Node, Node]:
    items = seq_items(node)
    return seq(*items[:-1]), items[-1]


def common_first(branches) -> Node | None:
    """The first spine item shared by all branches, or None."""
    heads = [seq_items(b)[0] for b in branches]
    return heads[0] if all(h == heads[0] for h in heads) else None


def common_last(branches) -> Node | None:
    tails = [seq_items(b)[-1] for b in branches]
    return tails[0] if all(t == tails[0] for t in tails) else None


def strip_first(branch: Node) -> Node:
    return seq(*seq_items(branch)[1:])


def strip_last(branch: Node) -> Node:
    return seq(*seq_items(branch)[:-1])


def kets(columns: np.ndarray) -> tuple:
    return tuple(Ket.from_array(columns[:, i]) for i in range(columns.shape[1]))


def normalize_basis(basis: tuple, branches: tuple) -> tuple[tuple, tuple]:
    """Reorder a guard basis that is the standard basis up to phases and order.

    Branch semantics depend only on the projectors onto the basis states,
    so phases are dropped and branches permuted with their states.
    """
    d = len(basis)
    perm = [None] * d
    for i, k in enumerate(basis):
        v = k.vec
        j = int(np.argmax(np.abs(v)))
        if abs(abs(v[j]) - 1) > 1e-12 or np.linalg.norm(np.delete(v, j)) > 1e-12 or perm[j] is not None:
            return basis, branches
        perm[j] = i
    return tuple(Ket.basis(j, d) for j in range(d)), tuple(branches[perm[j]] for j in range(d))


def only_branch(branches) -> int | None:
    """Index of the single non-skip branch (None if zero or several)."""
    idx = [i for i, b in enumerate(branches) if b != Skip()]
    return idx[0] if len(idx) == 1 else None


def basis_change(src: tuple, dst: tuple) -> np.ndarray:
    """Unitary ``U`` with ``U src_i = dst_i``."""
    return basis_matrix(dst) @ basis_matrix(src).conj().T


def need(cond: bool, what: str = "shape") -> None:
    if not cond:
        raise NoMatch(what)


def as_reg(value) -> tuple:
    if value is None:
        return ()
    return tuple(value) if isinstance(value, (tuple, list)) else (value,)


def first_ok(*attempts):
    """First non-None result among zero-argument callables."""
    for a in attempts:
        r = a()
        if r is not None:
            return r
    return None


def with_params(ctx: Ctx, **kw) -> Ctx:
    return replace(ctx, params={**ctx.params, **kw})


def is_seq(n) -> bool:
    return isinstance(n, Seq)
