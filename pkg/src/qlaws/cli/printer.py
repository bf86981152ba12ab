"""Pretty printer for the ASCII program syntax.

``show`` prints core syntax only, so ``parse(show_file(p))`` gives back
``p`` exactly.  Amplitudes are printed with ``repr`` and therefore survive
the round trip bit for bit.
"""

from __future__ import annotations

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
    While,
    canonical,
    qv,
)

# precedence levels: the operand of an operator is parenthesized when its
# own level is lower than the level the operator requires
SEQ, CHOICE, ATOM = 0, 1, 2


def show_complex(z: complex) -> str:
    re, im = float(z.real), float(z.imag)
    if im == 0:
        return repr(re)
    if re == 0:
        return f"{im!r}j"
    sign = "+" if im >= 0 else "-"
    return f"{re!r}{sign}{abs(im)!r}j"


def show_ket(k: Ket) -> str:
    i = k.basis_index()
    if i is not None:
        return f"|{i}>"
    return "|[" + ", ".join(show_complex(a) for a in k.amps) + "]>"


def show_reg(reg) -> str:
    return ", ".join(v.name for v in reg)


def _level(n: Node) -> int:
    if isinstance(n, (Seq, Mu)):
        return SEQ
    if isinstance(n, (NdChoice, ProbChoice)):
        return CHOICE
    return ATOM


def _wrap(n: Node, need: int) -> str:
    text = show(n)
    return f"({text})" if _level(n) < need else text


def show(n: Node) -> str:
    if isinstance(n, Skip):
        return "skip"
    if isinstance(n, Abort):
        return "abort"
    if isinstance(n, Gate):
        return f"{n.name}[{show_reg(n.reg)}]"
    if isinstance(n, Call):
        return n.ident
    if isinstance(n, Init):
        return f"{show_reg(n.reg)} := {show_ket(n.state)}"
    if isinstance(n, Seq):
        return f"{_wrap(n.first, CHOICE)}; {_wrap(n.second, SEQ)}"
    if isinstance(n, NdChoice):
        return f"{_wrap(n.left, CHOICE)} |_| {_wrap(n.right, ATOM)}"
    if isinstance(n, ProbChoice):
        return f"{_wrap(n.left, CHOICE)} |p:{float(n.p)!r}| {_wrap(n.right, ATOM)}"
    if isinstance(n, Qif):
        arms = " [] ".join(f"({show_ket(k)} -> {show(b)})" for k, b in zip(n.basis, n.branches))
        return f"qif [{show_reg(n.reg)}] {arms} fiq"
    if isinstance(n, IfMeas):
        arms = " [] ".join(f"({i} -> {show(b)})" for i, b in enumerate(n.branches))
        return f"if {n.meas}[{show_reg(n.reg)}] {arms} fi"
    if isinstance(n, While):
        return f"while {n.meas}[{show_reg(n.reg)}] = 1 do {show(n.body)} od"
    if isinstance(n, Mu):
        return f"mu {n.ident} . {show(n.body)}"
    raise TypeError(f"cannot print {type(n).__name__}")


def declarations(node: Node) -> str:
    """``var`` lines for every variable that is not a qubit."""
    lines = [f"var {v.name} : {v.dim};" for v in canonical(qv(node)) if v.dim != 2]
    return "\n".join(lines)


def show_file(node: Node, uses=()) -> str:
    head = [f'use "{u}";' for u in uses]
    decl = declarations(node)
    if decl:
        head.append(decl)
    return "\n".join(head + [show(node)]) + "\n"
