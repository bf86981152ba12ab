"""Abstract syntax of quantum circuits and quantum programs.

Circuits and programs share one tree.  A program built only from ``Skip``,
``Gate``, ``Seq`` and ``Qif`` nodes *is* a circuit, so no wrapper node is
needed when a circuit is used as a program statement.

Every node is an immutable, hashable dataclass.  Children are addressed by
integer paths: ``Seq`` has children 0 and 1, ``Qif``/``IfMeas`` branches are
indexed by outcome order, loop and recursion bodies have index 0 and the two
operands of a choice have indices 0 and 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

INV_SQRT2 = 1.0 / math.sqrt(2.0)
_SNAP_TARGETS = (0.0, 1.0, -1.0, 0.5, -0.5, INV_SQRT2, -INV_SQRT2)


# ---------------------------------------------------------------------------
# variables, registers and states


@dataclass(frozen=True, order=True)
class Var:
    """A quantum variable with the dimension of its state space."""

    name: str
    dim: int = 2

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be nonempty")
        if self.dim < 2:
            raise ValueError(f"variable {self.name} has dimension {self.dim} < 2")

    def __str__(self) -> str:
        return self.name


Register = tuple  # tuple[Var, ...]


def reg_dims(reg: Sequence[Var]) -> tuple[int, ...]:
    return tuple(v.dim for v in reg)


def reg_dim(reg: Sequence[Var]) -> int:
    return int(np.prod(reg_dims(reg), dtype=np.int64)) if reg else 1


def canonical(vs: Iterable[Var]) -> tuple[Var, ...]:
    """Variables sorted by name, the wire order of every denotation."""
    return tuple(sorted(set(vs), key=lambda v: v.name))


def snap(values: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Round entries that are numerically 0, +-1, +-1/2 or +-1/sqrt(2)."""
    values = np.asarray(values, dtype=complex)
    out = values.copy()
    for part in ("real", "imag"):
        comp = getattr(values, part).copy()
        for target in _SNAP_TARGETS:
            comp[np.abs(comp - target) < tol] = target
        if part == "real":
            out = comp + 1j * out.imag
        else:
            out = out.real + 1j * comp
    return out


@dataclass(frozen=True)
class Ket:
    """A pure state stored as an exact tuple of complex amplitudes."""

    amps: tuple

    @classmethod
    def from_array(cls, values, clean: bool = True) -> "Ket":
        arr = np.asarray(values, dtype=complex).reshape(-1)
        if clean:
            arr = snap(arr)
        return cls(tuple(complex(x) + 0.0 for x in arr))

    @classmethod
    def basis(cls, index: int, dim: int) -> "Ket":
        amps = [0j] * dim
        amps[index] = 1 + 0j
        return cls(tuple(amps))

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.amps, dtype=complex)

    @property
    def dim(self) -> int:
        return len(self.amps)

    def basis_index(self) -> int | None:
        """Index ``k`` when this ket is exactly the standard basis vector e_k."""
        nonzero = [i for i, a in enumerate(self.amps) if a != 0]
        if len(nonzero) == 1 and self.amps[nonzero[0]] == 1:
            return nonzero[0]
        return None


def standard_basis(dim: int) -> tuple[Ket, ...]:
    return tuple(Ket.basis(i, dim) for i in range(dim))


def basis_matrix(basis: Sequence[Ket]) -> np.ndarray:
    """Matrix whose columns are the basis vectors."""
    return np.stack([k.vec for k in basis], axis=1)


# ---------------------------------------------------------------------------
# nodes


class Node:
    """Base class of all syntax nodes."""

    def children(self) -> tuple["Node", ...]:
        return ()

    def with_children(self, kids: Sequence["Node"]) -> "Node":
        if kids:
            raise ValueError(f"{type(self).__name__} has no children")
        return self

    def __str__(self) -> str:  # pragma: no cover - convenience only
        from qlaws.cli.printer import show

        return show(self)


@dataclass(frozen=True)
class Skip(Node):
    pass


@dataclass(frozen=True)
class Abort(Node):
    pass


@dataclass(frozen=True)
class Gate(Node):
    name: str
    reg: tuple


@dataclass(frozen=True)
class Seq(Node):
    first: Node
    second: Node

    def children(self):
        return (self.first, self.second)

    def with_children(self, kids):
        return Seq(kids[0], kids[1])


@dataclass(frozen=True)
class Qif(Node):
    """Quantum case statement guarded by ``reg`` in the basis ``basis``."""

    reg: tuple
    basis: tuple
    branches: tuple

    def children(self):
        return tuple(self.branches)

    def with_children(self, kids):
        return Qif(self.reg, self.basis, tuple(kids))


@dataclass(frozen=True)
class Init(Node):
    reg: tuple
    state: Ket


@dataclass(frozen=True)
class IfMeas(Node):
    """Measurement-controlled case statement; branch ``m`` runs on outcome m."""

    meas: str
    reg: tuple
    branches: tuple

    def children(self):
        return tuple(self.branches)

    def with_children(self, kids):
        return IfMeas(self.meas, self.reg, tuple(kids))


@dataclass(frozen=True)
class While(Node):
    """Loop that runs ``body`` while the binary measurement yields 1."""

    meas: str
    reg: tuple
    body: Node

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return While(self.meas, self.reg, kids[0])


@dataclass(frozen=True)
class Mu(Node):
    ident: str
    body: Node

    def children(self):
        return (self.body,)

    def with_children(self, kids):
        return Mu(self.ident, kids[0])


@dataclass(frozen=True)
class Call(Node):
    ident: str


@dataclass(frozen=True)
class NdChoice(Node):
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return NdChoice(kids[0], kids[1])


@dataclass(frozen=True)
class ProbChoice(Node):
    p: float
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)

    def with_children(self, kids):
        return ProbChoice(self.p, kids[0], kids[1])


# ---------------------------------------------------------------------------
# constructors and structural helpers


def seq(*items: Node) -> Node:
    """Right-nested sequential composition; ``seq()`` is ``skip``."""
    items = [i for i in items]
    if not items:
        return Skip()
    out = items[-1]
    for item in reversed(items[:-1]):
        out = Seq(item, out)
    return out


def seq_items(node: Node) -> list[Node]:
    """Items of the right spine of a sequence: ``a;(b;c)`` gives [a, b, c]."""
    items = []
    while isinstance(node, Seq):
        items.append(node.first)
        node = node.second
    items.append(node)
    return items


def flatten_seq(node: Node) -> list[Node]:
    """All non-sequence leaves of a sequence, regardless of grouping."""
    if isinstance(node, Seq):
        return flatten_seq(node.first) + flatten_seq(node.second)
    return [node]


def qif2(reg, c0: Node, c1: Node, basis=None) -> Qif:
    reg = tuple(reg) if isinstance(reg, (tuple, list)) else (reg,)
    if basis is None:
        basis = standard_basis(reg_dim(reg))
    return Qif(reg, tuple(basis), (c0, c1))


def if2(meas: str, reg, p0: Node, p1: Node) -> IfMeas:
    reg = tuple(reg) if isinstance(reg, (tuple, list)) else (reg,)
    return IfMeas(meas, reg, (p0, p1))


def cond_then(meas: str, reg, body: Node) -> IfMeas:
    """``M[q] |> P``: run ``body`` on outcome 1, skip on outcome 0."""
    return if2(meas, reg, Skip(), body)


def qv(node: Node) -> frozenset:
    """Quantum variables occurring in ``node``."""
    if isinstance(node, (Gate, Init)):
        return frozenset(node.reg)
    if isinstance(node, (Qif, IfMeas, While)):
        out = set(node.reg)
        for kid in node.children():
            out |= qv(kid)
        return frozenset(out)
    out = set()
    for kid in node.children():
        out |= qv(kid)
    return frozenset(out)


def is_circuit(node: Node) -> bool:
    if isinstance(node, (Skip, Gate)):
        return True
    if isinstance(node, Seq):
        return is_circuit(node.first) and is_circuit(node.second)
    if isinstance(node, Qif):
        return all(is_circuit(b) for b in node.branches)
    return False


def is_deterministic(node: Node) -> bool:
    if isinstance(node, (NdChoice, ProbChoice)):
        return False
    return all(is_deterministic(k) for k in node.children())


def has_nondeterminism(node: Node) -> bool:
    return not is_deterministic(node)


def is_finite(node: Node) -> bool:
    """True when the program has no loops and no recursion."""
    if isinstance(node, (While, Mu, Call)):
        return False
    return all(is_finite(k) for k in node.children())


def free_calls(node: Node, bound: frozenset = frozenset()) -> frozenset:
    if isinstance(node, Call):
        return frozenset() if node.ident in bound else frozenset({node.ident})
    if isinstance(node, Mu):
        return free_calls(node.body, bound | {node.ident})
    out = frozenset()
    for kid in node.children():
        out |= free_calls(kid, bound)
    return out


def idents(node: Node) -> frozenset:
    """Every recursion identifier used as a binder or a call."""
    out = set()
    if isinstance(node, Mu):
        out.add(node.ident)
    if isinstance(node, Call):
        out.add(node.ident)
    for kid in node.children():
        out |= idents(kid)
    return frozenset(out)


def subst(body: Node, ident: str, replacement: Node) -> Node:
    """Replace every free ``Call(ident)`` in ``body`` by ``replacement``."""
    if isinstance(body, Call):
        return replacement if body.ident == ident else body
    if isinstance(body, Mu) and body.ident == ident:
        return body
    kids = body.children()
    if not kids:
        return body
    new = tuple(subst(k, ident, replacement) for k in kids)
    if all(a is b for a, b in zip(new, kids)):
        return body
    return body.with_children(new)


def fresh_ident(taken: Iterable[str], base: str = "X") -> str:
    taken = set(taken)
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def rename_idents(node: Node, mapping: dict) -> Node:
    if isinstance(node, Call):
        return Call(mapping.get(node.ident, node.ident))
    if isinstance(node, Mu):
        return Mu(mapping.get(node.ident, node.ident), rename_idents(node.body, mapping))
    kids = node.children()
    if not kids:
        return node
    return node.with_children(tuple(rename_idents(k, mapping) for k in kids))


def uniquify_binders(node: Node, taken: set | None = None) -> Node:
    """Alpha-rename ``mu`` binders so that no identifier is bound twice."""
    taken = set() if taken is None else taken

    def go(n: Node, env: dict) -> Node:
        if isinstance(n, Call):
            return Call(env.get(n.ident, n.ident))
        if isinstance(n, Mu):
            new = n.ident if n.ident not in taken else fresh_ident(taken, n.ident)
            taken.add(new)
            return Mu(new, go(n.body, {**env, n.ident: new}))
        kids = n.children()
        if not kids:
            return n
        return n.with_children(tuple(go(k, env) for k in kids))

    return go(node, {})


def rename_vars(node: Node, mapping: dict) -> Node:
    """Substitute variables according to ``mapping`` (Var -> Var)."""
    if hasattr(node, "reg"):
        node = replace(node, reg=tuple(mapping.get(v, v) for v in node.reg))
    kids = node.children()
    if not kids:
        return node
    return node.with_children(tuple(rename_vars(k, mapping) for k in kids))


def fresh_vars(universe: Iterable[Var], count: int, dim: int = 2, prefix: str = "#aux"):
    """Allocate ``count`` variables named ``#aux0``, ``#aux1``, ...

    Names already present in ``universe`` are skipped.  Returns the new
    variables together with the extended universe.
    """
    universe = frozenset(universe)
    names = {v.name for v in universe}
    out = []
    i = 0
    while len(out) < count:
        name = f"{prefix}{i}"
        if name not in names:
            out.append(Var(name, dim))
            names.add(name)
        i += 1
    return out, universe | frozenset(out)


def size(node: Node) -> int:
    return 1 + sum(size(k) for k in node.children())


# ---------------------------------------------------------------------------
# paths


Path = tuple  # tuple[int, ...]


def get_at(node: Node, path: Sequence[int]) -> Node:
    for i in path:
        kids = node.children()
        if not 0 <= i < len(kids):
            raise IndexError(f"path index {i} invalid at {type(node).__name__}")
        node = kids[i]
    return node


def replace_at(node: Node, path: Sequence[int], new: Node) -> Node:
    if not path:
        return new
    kids = list(node.children())
    i = path[0]
    if not 0 <= i < len(kids):
        raise IndexError(f"path index {i} invalid at {type(node).__name__}")
    kids[i] = replace_at(kids[i], path[1:], new)
    return node.with_children(tuple(kids))


def iter_paths(node: Node, prefix: tuple = ()) -> Iterator[tuple]:
    """Pre-order enumeration of ``(path, subterm)`` pairs."""
    yield prefix, node
    for i, kid in enumerate(node.children()):
        yield from iter_paths(kid, prefix + (i,))


def parse_path(text: str) -> tuple:
    text = text.strip()
    if text in ("", ".", "root"):
        return ()
    return tuple(int(p) for p in text.replace("/", ".").split(".") if p != "")


def format_path(path: Sequence[int]) -> str:
    return ".".join(str(i) for i in path) if path else "root"


# ---------------------------------------------------------------------------
# well-formedness


@dataclass(frozen=True)
class Diagnostic:
    path: tuple
    reason: str

    def __str__(self) -> str:
        return f"{format_path(self.path)}: {self.reason}"


def _distinct(reg) -> bool:
    return len(set(reg)) == len(reg)


def check_wellformed(node: Node, lib, tol: float = 1e-8) -> list[Diagnostic]:
    """All violations of the typing rules; an empty list means well-formed.

    ``lib`` is a :class:`qlaws.library.Library` used to resolve gate and
    measurement names.
    """
    diags: list[Diagnostic] = []
    names: dict[str, int] = {}
    for v in qv(node):
        if v.name in names and names[v.name] != v.dim:
            diags.append(Diagnostic((), f"variable {v.name} used with two dimensions"))
        names[v.name] = v.dim

    def report(path, reason):
        diags.append(Diagnostic(tuple(path), reason))

    def go(n: Node, path: tuple, scope: frozenset, circuit_only: bool):
        if circuit_only and not isinstance(n, (Skip, Gate, Seq, Qif)):
            report(path, f"{type(n).__name__} is not allowed inside a qif branch")
        if isinstance(n, Gate):
            if not n.reg or not _distinct(n.reg):
                report(path, f"gate {n.name} needs a register of distinct variables")
            else:
                problem = lib.check_gate(n.name, reg_dims(n.reg))
                if problem:
                    report(path, problem)
        elif isinstance(n, Qif):
            if not n.reg or not _distinct(n.reg):
                report(path, "qif guard must be a register of distinct variables")
            d = reg_dim(n.reg)
            if len(n.basis) != d or len(n.branches) != d:
                report(path, f"qif over a guard of dimension {d} needs {d} basis states and branches")
            elif any(k.dim != d for k in n.basis):
                report(path, "guard basis vector has the wrong length")
            else:
                B = basis_matrix(n.basis)
                if np.linalg.norm(B.conj().T @ B - np.eye(d)) > tol:
                    report(path, "guard basis is not orthonormal")
            guard = set(n.reg)
            for i, b in enumerate(n.branches):
                if guard & qv(b):
                    report(path + (i,), "guard occurs in branch")
        elif isinstance(n, Init):
            if not n.reg or not _distinct(n.reg):
                report(path, "initialization needs a register of distinct variables")
            elif n.state.dim != reg_dim(n.reg):
                report(path, "initial state has the wrong dimension")
            elif abs(np.linalg.norm(n.state.vec) - 1) > tol:
                report(path, "initial state is not normalized")
        elif isinstance(n, (IfMeas, While)):
            if not n.reg or not _distinct(n.reg):
                report(path, "measured register must consist of distinct variables")
            else:
                problem = lib.check_meas(n.meas, reg_dims(n.reg))
                if problem:
                    report(path, problem)
                else:
                    outcomes = lib.outcomes(n.meas, reg_dims(n.reg))
                    if isinstance(n, While) and outcomes != 2:
                        report(path, f"loop measurement {n.meas} must be binary")
                    if isinstance(n, IfMeas) and outcomes != len(n.branches):
                        report(path, f"measurement {n.meas} has {outcomes} outcomes but {len(n.branches)} branches")
        elif isinstance(n, Call):
            if n.ident not in scope:
                report(path, f"unbound identifier {n.ident}")
        elif isinstance(n, ProbChoice):
            if not 0.0 <= n.p <= 1.0:
                report(path, "probability outside [0, 1]")
        inner = circuit_only or isinstance(n, Qif)
        new_scope = scope | {n.ident} if isinstance(n, Mu) else scope
        for i, kid in enumerate(n.children()):
            go(kid, path + (i,), new_scope, inner)

    go(node, (), frozenset(), False)
    return diags


class IllFormed(ValueError):
    def __init__(self, diags):
        self.diags = list(diags)
        super().__init__("; ".join(str(d) for d in self.diags))


def require_wellformed(node: Node, lib, tol: float = 1e-8) -> None:
    diags = check_wellformed(node, lib, tol)
    if diags:
        raise IllFormed(diags)


def node_fields(node: Node) -> dict:
    return {f.name: getattr(node, f.name) for f in fields(node)}
