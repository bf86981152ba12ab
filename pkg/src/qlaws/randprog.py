"""Random gates, measurements, circuits and programs for property checks.

Every generator takes a ``numpy.random.Generator`` and a library and returns
the new object together with the library extended by any synthesized
entries.
"""

from __future__ import annotations

import numpy as np

from qlaws.linalg import random_measurement, random_projective, random_unitary
from qlaws.syntax import (
    Abort,
    Gate,
    IfMeas,
    Init,
    Ket,
    NdChoice,
    Qif,
    Skip,
    Var,
    While,
    reg_dim,
    reg_dims,
    seq,
)

QUBIT_GATES_1 = ("X", "Y", "Z", "H", "S", "T")
QUBIT_GATES_2 = ("CNOT", "CZ")


def pick_reg(vars_, rng, size: int | None = None) -> tuple:
    vars_ = list(vars_)
    if size is None:
        size = int(rng.integers(1, min(2, len(vars_)) + 1))
    idx = rng.choice(len(vars_), size=size, replace=False)
    return tuple(vars_[i] for i in idx)


def random_gate(reg, rng, lib, prefix: str = "R"):
    """A named gate on ``reg``: a standard qubit gate or a fresh random unitary."""
    dims = reg_dims(reg)
    if all(d == 2 for d in dims) and rng.random() < 0.5:
        pool = QUBIT_GATES_1 if len(reg) == 1 else QUBIT_GATES_2 if len(reg) == 2 else ()
        if pool:
            return Gate(str(rng.choice(pool)), tuple(reg)), lib
    name, lib = lib.register_gate(random_unitary(reg_dim(reg), rng), dims, prefix=prefix)
    return Gate(name, tuple(reg)), lib


def random_basis(d: int, rng, standard_prob: float = 0.3) -> tuple:
    if rng.random() < standard_prob:
        return tuple(Ket.basis(i, d) for i in range(d))
    u = random_unitary(d, rng)
    return tuple(Ket.from_array(u[:, i], clean=False) for i in range(d))


def random_ket(d: int, rng) -> Ket:
    if rng.random() < 0.3:
        return Ket.basis(int(rng.integers(d)), d)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return Ket.from_array(v / np.linalg.norm(v), clean=False)


def random_meas(reg, rng, lib, outcomes: int = 2, projective: bool | None = None, prefix: str = "Mr"):
    d = reg_dim(reg)
    if projective is None:
        projective = rng.random() < 0.5
    if projective and outcomes <= d:
        kraus = random_projective(d, outcomes, rng)
    else:
        kraus = random_measurement(d, outcomes, rng)
    return lib.register_meas(kraus, reg_dims(reg), prefix=prefix)


def random_circuit(vars_, depth: int, rng, lib, qif_prob: float = 0.3):
    """Random circuit on (a subset of) ``vars_`` with at most ``depth`` statements."""
    vars_ = tuple(vars_)
    items = []
    for _ in range(max(1, depth)):
        r = rng.random()
        if r < 0.1:
            items.append(Skip())
            continue
        if r < 0.1 + qif_prob and len(vars_) >= 2 and depth > 1:
            guard = pick_reg(vars_, rng, 1)
            rest = tuple(v for v in vars_ if v not in guard)
            d = reg_dim(guard)
            branches = []
            for _ in range(d):
                sub, lib = random_circuit(rest, max(1, depth // 2), rng, lib, qif_prob / 2)
                branches.append(sub)
            items.append(Qif(guard, random_basis(d, rng), tuple(branches)))
            continue
        g, lib = random_gate(pick_reg(vars_, rng), rng, lib)
        items.append(g)
    return seq(*items), lib


def random_program(vars_, depth: int, rng, lib, *, loops: bool = False, nondet: bool = False,
                   abort_prob: float = 0.05, init_prob: float = 0.15, if_prob: float = 0.25,
                   max_outcomes: int = 2):
    """Random program built from circuits, initializations, ifs and aborts.

    ``loops`` allows terminating while-loops (the loop measurement is
    generic, so the loop exits with positive probability every round);
    ``nondet`` allows nondeterministic choice outside loops.
    """
    vars_ = tuple(vars_)
    items = []
    for _ in range(max(1, depth)):
        r = rng.random()
        if r < abort_prob:
            items.append(Abort())
        elif r < abort_prob + init_prob:
            reg = pick_reg(vars_, rng, 1)
            items.append(Init(reg, random_ket(reg_dim(reg), rng)))
        elif r < abort_prob + init_prob + if_prob and depth > 1:
            reg = pick_reg(vars_, rng, 1)
            n = int(rng.integers(2, max_outcomes + 1))
            name, lib = random_meas(reg, rng, lib, outcomes=n)
            branches = []
            for _ in range(n):
                sub, lib = random_program(vars_, max(1, depth // 2), rng, lib, loops=loops,
                                          nondet=nondet, abort_prob=abort_prob, init_prob=init_prob,
                                          if_prob=if_prob / 2, max_outcomes=max_outcomes)
                branches.append(sub)
            items.append(IfMeas(name, reg, tuple(branches)))
        elif loops and r < abort_prob + init_prob + if_prob + 0.1 and depth > 1:
            reg = pick_reg(vars_, rng, 1)
            name, lib = random_meas(reg, rng, lib, projective=False)
            body, lib = random_circuit(vars_, max(1, depth // 2), rng, lib)
            items.append(While(name, reg, body))
        elif nondet and r < abort_prob + init_prob + if_prob + 0.2 and depth > 1:
            a, lib = random_program(vars_, max(1, depth // 2), rng, lib, nondet=False)
            b, lib = random_program(vars_, max(1, depth // 2), rng, lib, nondet=False)
            items.append(NdChoice(a, b))
        else:
            c, lib = random_circuit(vars_, 1, rng, lib)
            items.append(c)
    return seq(*items), lib


def qubits(*names: str) -> tuple:
    return tuple(Var(n, 2) for n in names)


def count_nodes(node, kind) -> int:
    return isinstance(node, kind) + sum(count_nodes(k, kind) for k in node.children())


def random_finite_program(vars_, rng, lib, statements: int = 6, max_meas: int = 2,
                          accept=None, attempts: int = 200):
    """Loop-free program with at most ``max_meas`` measurements.

    ``accept(program, lib)`` can impose further conditions (for example a
    dimension budget); instances are redrawn until it holds.
    """
    base = lib
    for _ in range(attempts):
        p, lib = random_program(vars_, statements, rng, base)
        if count_nodes(p, IfMeas) <= max_meas and (accept is None or accept(p, lib)):
            return p, lib
    raise RuntimeError("no acceptable program drawn")


def random_tail(vars_, rng, lib, depth: int = 2):
    """A tail-recursive program ``mu X . if M[q] (0 -> Q) [] (1 -> P; X) fi``."""
    from qlaws.syntax import Call, Mu

    reg = pick_reg(vars_, rng, 1)
    name, lib = random_meas(reg, rng, lib, projective=bool(rng.random() < 0.3))
    p, lib = random_program(vars_, depth, rng, lib)
    q, lib = random_program(vars_, depth, rng, lib)
    return Mu("X", IfMeas(name, reg, (q, seq(p, Call("X"))))), lib
