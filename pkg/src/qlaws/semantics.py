"""Denotations of circuits and programs.

* A circuit denotes a unitary on its variables in canonical (name-sorted)
  order.
* A deterministic program denotes a quantum operation.  It is computed by
  pushing a stack of Kraus operators through the program: every statement
  multiplies the stack from the left, so the same evaluator serves for the
  full operation (start from the identity) and for its restriction to a
  subspace of inputs (start from an isometry).
* A nondeterministic program denotes a finite set of quantum operations, one
  per resolution of its choices, with duplicates removed.

Loops are unrolled until the weight still inside the loop, which bounds the
Choi trace norm of every later term together, falls below ``cfg.loop_tol``;
recursion iterates the syntactic approximations ``F^(n)`` until successive approximations differ by less than
``cfg.loop_tol`` in Choi trace norm.  When the iteration cap is reached first
the result carries ``converged=False``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from qlaws.config import DEFAULT, Config, DimensionCapError
from qlaws.linalg import (
    Superop,
    choi_coords,
    embed,
    pairwise_choi_distances,
    transfer_to_choi,
)
from qlaws.syntax import (
    Abort,
    Call,
    Gate,
    IfMeas,
    Init,
    Mu,
    NdChoice,
    Node,
    ProbChoice,
    Qif,
    Seq,
    Skip,
    While,
    canonical,
    free_calls,
    is_circuit,
    is_deterministic,
    qv,
    reg_dim,
    reg_dims,
)

_TRANSFER_MAX_DIM = 16


class NondeterminismError(ValueError):
    """Raised when a nondeterministic node reaches a deterministic evaluator."""


@dataclass(frozen=True)
class Truncation:
    """How far loops and recursion were unrolled, and whether that sufficed."""

    loop_depth: int = 0
    rec_depth: int = 0
    converged: bool = True
    residual: float = 0.0

    def merge(self, other: "Truncation") -> "Truncation":
        return Truncation(
            max(self.loop_depth, other.loop_depth),
            max(self.rec_depth, other.rec_depth),
            self.converged and other.converged,
            max(self.residual, other.residual),
        )


@dataclass(frozen=True, eq=False)
class CircDen:
    unitary: np.ndarray
    space: tuple


@dataclass(frozen=True, eq=False)
class ProgDen:
    superop: Superop
    space: tuple
    truncation: Truncation = field(default_factory=Truncation)


@dataclass(frozen=True, eq=False)
class NdDen:
    elems: tuple
    space: tuple
    truncation: Truncation = field(default_factory=Truncation)


def _check_cap(space, cfg: Config) -> int:
    d = reg_dim(space)
    if d > cfg.dmax:
        raise DimensionCapError(
            f"state space of dimension {d} over {[v.name for v in space]} exceeds the cap {cfg.dmax}"
        )
    return d


# ---------------------------------------------------------------------------
# circuits


def _circuit_matrix(node: Node, lib, space: tuple, cache: dict) -> np.ndarray:
    key = (node, space)
    hit = cache.get(key)
    if hit is not None:
        return hit
    d = reg_dim(space)
    if isinstance(node, Skip):
        out = np.eye(d, dtype=complex)
    elif isinstance(node, Gate):
        out = embed(lib.gate_matrix(node.name, reg_dims(node.reg)), node.reg, space)
    elif isinstance(node, Seq):
        out = _circuit_matrix(node.second, lib, space, cache) @ _circuit_matrix(node.first, lib, space, cache)
    elif isinstance(node, Qif):
        out = np.zeros((d, d), dtype=complex)
        for ket, branch in zip(node.basis, node.branches):
            proj = embed(np.outer(ket.vec, ket.vec.conj()), node.reg, space)
            out += proj @ _circuit_matrix(branch, lib, space, cache)
    else:
        raise TypeError(f"{type(node).__name__} is not a circuit")
    cache[key] = out
    return out


def circ_sem(circuit: Node, lib, cfg: Config = DEFAULT, space=None) -> CircDen:
    """Unitary denotation of a circuit on ``space`` (default: its variables)."""
    if not is_circuit(circuit):
        raise TypeError("circ_sem expects a circuit")
    space = canonical(qv(circuit)) if space is None else tuple(space)
    _check_cap(space, cfg)
    return CircDen(_circuit_matrix(circuit, lib, space, {}), space)


# ---------------------------------------------------------------------------
# programs


class _Evaluator:
    """Pushes Kraus stacks of shape ``(n, d, d_in)`` through programs."""

    def __init__(self, lib, cfg: Config, space: tuple):
        self.lib = lib
        self.cfg = cfg
        self.space = space
        self.d = _check_cap(space, cfg)
        self.trunc = Truncation()
        self._circ_cache: dict = {}
        self._meas_cache: dict = {}
        self._loop_cache: dict = {}

    # -- building blocks ---------------------------------------------------
    def circuit(self, node: Node) -> np.ndarray:
        return _circuit_matrix(node, self.lib, self.space, self._circ_cache)

    def meas(self, name: str, reg: tuple) -> np.ndarray:
        key = (name, reg)
        hit = self._meas_cache.get(key)
        if hit is None:
            kraus = self.lib.kraus(name, reg_dims(reg))
            hit = np.stack([embed(k, reg, self.space) for k in kraus])
            self._meas_cache[key] = hit
        return hit

    def init_ops(self, node: Init) -> np.ndarray:
        key = ("init", node)
        hit = self._meas_cache.get(key)
        if hit is None:
            psi = node.state.vec
            dr = reg_dim(node.reg)
            ops = []
            for n in range(dr):
                bra = np.zeros(dr)
                bra[n] = 1
                ops.append(embed(np.outer(psi, bra), node.reg, self.space))
            hit = np.stack(ops)
            self._meas_cache[key] = hit
        return hit

    @staticmethod
    def left(ops: np.ndarray, k: np.ndarray) -> np.ndarray:
        """All products ``A_j K_i`` as one stack."""
        if len(k) == 0 or len(ops) == 0:
            return np.zeros((0, ops.shape[1], k.shape[2]), dtype=complex)
        return (ops[:, None] @ k[None]).reshape(-1, ops.shape[1], k.shape[2])

    @staticmethod
    def compress(k: np.ndarray) -> np.ndarray:
        n = k.shape[0]
        if n > 8 and n > min(k.shape[1] * k.shape[2] // 2, 16):
            return Superop(k).compress().kraus
        return k

    # -- evaluation --------------------------------------------------------
    def run(self, node: Node, k: np.ndarray, env: dict) -> np.ndarray:
        if len(k) == 0:
            return k
        if isinstance(node, Skip):
            return k
        if isinstance(node, Abort):
            return k[:0]
        if isinstance(node, (Gate, Qif)) or (isinstance(node, Seq) and is_circuit(node)):
            return self.circuit(node) @ k
        if isinstance(node, Seq):
            return self.run(node.second, self.run(node.first, k, env), env)
        if isinstance(node, Init):
            return self.compress(self.left(self.init_ops(node), k))
        if isinstance(node, IfMeas):
            ops = self.meas(node.meas, node.reg)
            parts = [self.run(branch, op @ k, env) for op, branch in zip(ops, node.branches)]
            return self.compress(np.concatenate(parts))
        if isinstance(node, While):
            loop = self.loop(node, env)
            return self.compress(self.left(loop, k))
        if isinstance(node, Mu):
            fix = self.fixpoint(node, env)
            return self.compress(self.left(fix, k))
        if isinstance(node, Call):
            if node.ident not in env:
                raise ValueError(f"unbound identifier {node.ident}")
            return self.compress(self.left(env[node.ident], k))
        if isinstance(node, (NdChoice, ProbChoice)):
            raise NondeterminismError("deterministic semantics applied to a nondeterministic program")
        raise TypeError(f"unknown node {type(node).__name__}")

    def full(self, node: Node, env: dict) -> np.ndarray:
        return Superop(self.run(node, np.eye(self.d, dtype=complex)[None], env)).compress().kraus

    def loop(self, node: While, env: dict) -> np.ndarray:
        """Kraus operators of the truncated loop on the whole space."""
        cacheable = not free_calls(node)
        if cacheable and node in self._loop_cache:
            return self._loop_cache[node]
        if not is_deterministic(node.body):
            raise NondeterminismError("nondeterministic choice inside a loop body is not supported")
        ops = self.meas(node.meas, node.reg)
        body = Superop(self.full(node.body, env))
        e0, e1 = Superop(ops[0]), Superop(ops[1])
        d = self.d
        tol, cap = self.cfg.loop_tol, self.cfg.loop_cap
        converged = False
        steps = 0
        residual = np.inf
        if d <= _TRANSFER_MAX_DIM:
            step = body.transfer() @ e1.transfer()
            t0 = e0.transfer()
            cur = np.eye(d * d, dtype=complex)
            acc = np.zeros((d * d, d * d), dtype=complex)
            vec_id = np.eye(d, dtype=complex).reshape(-1)
            for steps in range(1, cap + 1):
                term = t0 @ cur
                acc += term
                cur = step @ cur
                remaining = float(np.trace((cur @ vec_id).reshape(d, d)).real)
                residual = remaining
                if remaining < tol:
                    converged = True
                    break
            kraus = Superop.from_choi(transfer_to_choi(acc, d, d), d, d).kraus
        else:
            cur = np.eye(d, dtype=complex)[None]
            parts = []
            for steps in range(1, cap + 1):
                term = e0.kraus[0] @ cur
                parts.append(term)
                cur = self.compress(self.left(body.kraus, e1.kraus[0] @ cur))
                remaining = float(np.sum(np.abs(cur) ** 2))
                residual = remaining
                if remaining < tol:
                    converged = True
                    break
            kraus = Superop(np.concatenate(parts)).compress().kraus
        self.trunc = self.trunc.merge(Truncation(steps, 0, converged, residual))
        if cacheable:
            self._loop_cache[node] = kraus
        return kraus

    def fixpoint(self, node: Mu, env: dict) -> np.ndarray:
        """Kraus operators of the least fixpoint, via F^(0)=abort, F^(n+1)=F(F^(n))."""
        if not is_deterministic(node.body):
            raise NondeterminismError("nondeterministic choice inside recursion is not supported")
        d = self.d
        tol, cap = self.cfg.loop_tol, self.cfg.mu_cap
        current = np.zeros((0, d, d), dtype=complex)
        converged = False
        steps = 0
        inc = np.inf
        for steps in range(1, cap + 1):
            nxt = self.full(node.body, {**env, node.ident: current})
            a, b = choi_coords([Superop(nxt), Superop(current)])
            diff = a - b
            inc = float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)))) if diff.size else 0.0
            current = nxt
            if inc < tol:
                converged = True
                break
        self.trunc = self.trunc.merge(Truncation(0, steps, converged, inc))
        return current


def _space_for(node: Node, space) -> tuple:
    return canonical(qv(node)) if space is None else tuple(space)


def _input(kin, d: int) -> np.ndarray:
    if kin is None:
        return np.eye(d, dtype=complex)[None]
    kin = np.asarray(kin, dtype=complex)
    return kin[None] if kin.ndim == 2 else kin


def prog_sem(program: Node, lib, cfg: Config = DEFAULT, space=None, kin=None) -> ProgDen:
    """Quantum operation denoted by a deterministic program.

    Parameters
    ----------
    space:
        Register the operation acts on; defaults to the program's variables in
        canonical order.  Must contain every variable of the program.
    kin:
        Optional operator (or stack) ``J`` with ``d`` rows; the result is then
        the operation ``rho -> [[P]](J rho J^dagger)``.
    """
    space = _space_for(program, space)
    if not set(qv(program)) <= set(space):
        raise ValueError("evaluation space misses variables of the program")
    ev = _Evaluator(lib, cfg, space)
    out = ev.run(program, _input(kin, ev.d), {})
    return ProgDen(Superop(out).compress(), space, ev.trunc)


# ---------------------------------------------------------------------------
# nondeterministic programs


def dedup(ops: list, tol: float) -> list:
    """Drop operations whose Choi matrix is within ``tol`` of an earlier one."""
    if len(ops) <= 1:
        return list(ops)
    dist = pairwise_choi_distances([Superop(k) for k in ops])
    keep = []
    for i in range(len(ops)):
        if all(dist[i, j] > tol for j in keep):
            keep.append(i)
    return [ops[i] for i in keep]


def _nd_run(ev: _Evaluator, node: Node, k: np.ndarray) -> list:
    if is_deterministic(node):
        return [ev.run(node, k, {})]
    tol = ev.cfg.dedup_tol
    if isinstance(node, Seq):
        out = []
        for mid in _nd_run(ev, node.first, k):
            out.extend(_nd_run(ev, node.second, mid))
        return dedup(out, tol)
    if isinstance(node, NdChoice):
        return dedup(_nd_run(ev, node.left, k) + _nd_run(ev, node.right, k), tol)
    if isinstance(node, ProbChoice):
        p = float(node.p)
        lefts = _nd_run(ev, node.left, k)
        rights = _nd_run(ev, node.right, k)
        out = []
        for a in lefts:
            for b in rights:
                out.append(np.concatenate([np.sqrt(p) * a, np.sqrt(1 - p) * b]))
        return dedup(out, tol)
    if isinstance(node, IfMeas):
        ops = ev.meas(node.meas, node.reg)
        options = [_nd_run(ev, branch, op @ k) for op, branch in zip(ops, node.branches)]
        out = [np.concatenate(choice) for choice in itertools.product(*options)]
        return dedup(out, tol)
    raise NondeterminismError(
        f"nondeterministic choice inside {type(node).__name__} cannot be enumerated finitely"
    )


def nd_sem(program: Node, lib, cfg: Config = DEFAULT, space=None, kin=None) -> NdDen:
    """Finite set of operations, one for each resolution of the choices."""
    space = _space_for(program, space)
    ev = _Evaluator(lib, cfg, space)
    elems = _nd_run(ev, program, _input(kin, ev.d))
    return NdDen(tuple(Superop(e).compress() for e in elems), space, ev.trunc)


def semantic_set(program: Node, lib, cfg: Config = DEFAULT, space=None, kin=None) -> NdDen:
    """``nd_sem`` for any program; deterministic programs give a singleton."""
    if is_deterministic(program):
        den = prog_sem(program, lib, cfg, space, kin)
        return NdDen((den.superop,), den.space, den.truncation)
    return nd_sem(program, lib, cfg, space, kin)
