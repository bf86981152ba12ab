"""Recursive-descent parser for the ASCII program syntax.

Core syntax (what the printer emits)::

    skip   abort   H[q]   CNOT[q, r]   q := |0>   q, r := |[0.5, 0.5, 0.5, 0.5]>
    P; Q
    qif [q] (|0> -> C0) [] (|1> -> C1) fiq
    if M[q] (0 -> P0) [] (1 -> P1) fi
    while M[q] = 1 do P od
    mu X . P        X
    P |_| Q         P |p:0.25| Q

Sugar, desugared while parsing::

    C0 <- q -> C1        qif over the standard basis of q
    C0 <- G[q] -> C1     G[q]; (C0 <- q -> C1)
    P0 <| M[q] |> P1     if M[q] (0 -> P0) [] (1 -> P1) fi
    M[q] |> P            skip <| M[q] |> P
    [M[q]]  (M[q]]  [M[q])   the tests skip/skip, abort/skip, skip/abort
    M[q] * P             while M[q] = 1 do P od
    if [q] (...) fi      computational measurement M

Declarations precede the program: ``var c : 8;`` fixes a dimension
(undeclared variables are qubits) and ``use "lib.json";`` loads an extra
gate and measurement library relative to the file.  ``//`` starts a comment.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field

import numpy as np

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
    check_wellformed,
    iter_paths,
    reg_dim,
    seq,
    standard_basis,
)

KEYWORDS = {"skip", "abort", "qif", "fiq", "if", "fi", "while", "do", "od", "mu", "var", "use"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<pchoice>\|p:[^|]*\|)
  | (?P<nd>\|_\|)
  | (?P<rtri>\|>)
  | (?P<ket>\|[^|>\n]*>)
  | (?P<ltri><\|)
  | (?P<larrow><-)
  | (?P<arrow>->)
  | (?P<assign>:=)
  | (?P<box>\[\])
  | (?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_#][A-Za-z0-9_#']*)
  | (?P<sym>[;,:.()\[\]*=])
""", re.VERBOSE)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos, line, start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            if kind == "sym":
                kind = chunk
            elif kind == "name" and chunk in KEYWORDS:
                kind = chunk
            toks.append(Tok(kind, chunk, line, pos - start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - start + 1))
    return toks


@dataclass
class Parsed:
    program: Node
    variables: dict  # name -> Var
    uses: list = field(default_factory=list)
    positions: dict = field(default_factory=dict)  # path -> (line, col)

    def position(self, path) -> tuple[int, int]:
        path = tuple(path)
        while path not in self.positions and path:
            path = path[:-1]
        return self.positions.get(path, (1, 1))


def parse_ket(label: str, dim: int, line: int = 1, col: int = 1) -> Ket:
    body = label[1:-1].strip()
    if body in ("+", "-"):
        if dim != 2:
            raise ParseError(f"|{body}> needs a qubit register, got dimension {dim}", line, col)
        s = 1.0 if body == "+" else -1.0
        return Ket.from_array(np.array([1.0, s]) / np.sqrt(2))
    if body.isdigit():
        k = int(body)
        if k >= dim:
            raise ParseError(f"basis index {k} out of range for dimension {dim}", line, col)
        return Ket.basis(k, dim)
    if body.startswith("["):
        try:
            amps = ast.literal_eval(body)
            amps = [complex(a) for a in amps]
        except (ValueError, SyntaxError, TypeError):
            raise ParseError(f"bad amplitude list {body}", line, col) from None
        if len(amps) != dim:
            raise ParseError(f"ket has {len(amps)} amplitudes but the register has dimension {dim}", line, col)
        return Ket(tuple(a + 0.0 for a in amps))
    raise ParseError(f"bad ket {label}", line, col)


class _Parser:
    def __init__(self, text: str, variables: dict | None = None):
        self.toks = tokenize(text)
        self.i = 0
        self.vars: dict[str, Var] = dict(variables or {})
        self.uses: list[str] = []
        self.pos: dict[int, tuple] = {}

    # -- token helpers -----------------------------------------------------
    def peek(self, k: int = 0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *kinds) -> bool:
        return self.peek().kind in kinds

    def take(self, kind: str | None = None) -> Tok:
        t = self.peek()
        if kind is not None and t.kind != kind:
            want = "end of input" if kind == "eof" else repr(kind)
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise ParseError(f"expected {want}, found {got}", t.line, t.col)
        self.i += 1
        return t

    def error(self, msg: str, tok: Tok | None = None):
        t = tok or self.peek()
        raise ParseError(msg, t.line, t.col)

    def mark(self, node: Node, tok: Tok) -> Node:
        self.pos.setdefault(id(node), (tok.line, tok.col))
        return node

    # -- declarations ------------------------------------------------------
    def declarations(self):
        while self.at("var", "use"):
            if self.take().kind == "use":
                self.uses.append(self.take("string").text[1:-1])
                self.take(";")
                continue
            while True:
                t = self.take("name")
                dim = 2
                if self.at(":"):
                    self.take(":")
                    d = self.take("num")
                    if not d.text.isdigit() or int(d.text) < 1:
                        self.error("dimension must be a positive integer", d)
                    dim = int(d.text)
                old = self.vars.get(t.text)
                if old is not None and old.dim != dim:
                    self.error(f"variable {t.text} declared twice with different dimensions", t)
                self.vars[t.text] = Var(t.text, dim)
                if not self.at(","):
                    break
                self.take(",")
            self.take(";")

    def var(self, tok: Tok) -> Var:
        if tok.kind != "name":
            self.error(f"expected a variable, found {tok.text!r}", tok)
        v = self.vars.get(tok.text)
        if v is None:
            v = self.vars[tok.text] = Var(tok.text, 2)
        return v

    def reg(self, close: str = "]") -> tuple:
        out = [self.var(self.take("name"))]
        while self.at(","):
            self.take(",")
            out.append(self.var(self.take("name")))
        if close:
            self.take(close)
        return tuple(out)

    # -- programs ----------------------------------------------------------
    def program(self) -> Node:
        t = self.peek()
        items = [self.choice()]
        while self.at(";"):
            self.take(";")
            if self.at("eof", ")", "od", "fi", "fiq"):
                break  # tolerate a trailing separator
            items.append(self.choice())
        return self.mark(seq(*items), t) if len(items) > 1 else items[0]

    def choice(self) -> Node:
        t = self.peek()
        left = self.cond()
        while self.at("nd", "pchoice"):
            op = self.take()
            right = self.cond()
            if op.kind == "nd":
                left = NdChoice(left, right)
            else:
                try:
                    p = float(op.text[3:-1])
                except ValueError:
                    self.error(f"bad probability in {op.text}", op)
                if not 0.0 <= p <= 1.0:
                    self.error("probability outside [0, 1]", op)
                left = ProbChoice(p, left, right)
            self.mark(left, t)
        return left

    def cond(self) -> Node:
        t = self.peek()
        left = self.unary()
        if self.at("ltri"):
            self.take()
            name = self.take("name")
            self.take("[")
            reg = self.reg()
            self.take("rtri")
            right = self.cond()
            return self.mark(IfMeas(name.text, reg, (left, right)), t)
        if self.at("larrow"):
            self.take()
            pre = None
            if self.peek().kind == "name" and self.peek(1).kind == "[":
                g = self.take("name")
                self.take("[")
                greg = self.reg()
                pre = self.mark(Gate(g.text, greg), g)
                reg = greg
            else:
                reg = self.reg(close="")
            self.take("arrow")
            right = self.cond()
            q = self.mark(Qif(reg, standard_basis(reg_dim(reg)), (left, right)), t)
            if reg_dim(reg) != 2:
                self.error("C0 <- q -> C1 needs a qubit guard", t)
            return self.mark(Seq(pre, q), t) if pre is not None else q
        return left

    def unary(self) -> Node:
        t = self.peek()
        if t.kind == "mu":
            self.take()
            x = self.take("name")
            self.take(".")
            return self.mark(Mu(x.text, self.program()), t)
        if t.kind == "name" and self.peek(1).kind == "[":
            # gate, or a measurement used by |> or *
            save = self.i
            self.take()
            self.take("[")
            reg = self.reg()
            if self.at("rtri"):
                self.take()
                return self.mark(IfMeas(t.text, reg, (Skip(), self.unary())), t)
            if self.at("*"):
                self.take()
                return self.mark(While(t.text, reg, self.unary()), t)
            self.i = save
        return self.atom()

    def _test_ahead(self) -> bool:
        # [M[q]] (M[q]] [M[q]) : bracket, name, [ ... ], closing bracket
        if self.peek(1).kind != "name" or self.peek(2).kind != "[":
            return False
        k = 3
        while self.peek(k).kind not in ("]", "eof"):
            k += 1
        return self.peek(k).kind == "]" and self.peek(k + 1).kind in ("]", ")")

    def atom(self) -> Node:
        t = self.peek()
        k = t.kind
        if k in ("[", "(") and self._test_ahead():
            self.take()
            name = self.take("name")
            self.take("[")
            reg = self.reg()
            close = self.take()
            zero = Skip() if k == "[" else Abort()
            one = Skip() if close.kind == "]" else Abort()
            if k == "(" and close.kind == ")":
                self.error("(M) is not a test; use [M], (M] or [M)", t)
            return self.mark(IfMeas(name.text, reg, (zero, one)), t)
        if k == "(":
            self.take()
            node = self.program()
            self.take(")")
            return node
        if k == "skip":
            self.take()
            return self.mark(Skip(), t)
        if k == "abort":
            self.take()
            return self.mark(Abort(), t)
        if k == "qif":
            return self.qif()
        if k == "if":
            return self.ifmeas()
        if k == "while":
            self.take()
            name = self.take("name")
            self.take("[")
            reg = self.reg()
            if self.at("="):
                self.take("=")
                one = self.take("num")
                if one.text != "1":
                    self.error("a loop runs while the outcome is 1", one)
            self.take("do")
            body = self.program()
            self.take("od")
            return self.mark(While(name.text, reg, body), t)
        if k == "name":
            nxt = self.peek(1).kind
            if nxt == "[":
                self.take()
                self.take("[")
                return self.mark(Gate(t.text, self.reg()), t)
            if nxt in ("assign", ","):
                reg = self.reg(close="")
                self.take("assign")
                kt = self.take("ket")
                return self.mark(Init(reg, parse_ket(kt.text, reg_dim(reg), kt.line, kt.col)), t)
            self.take()
            return self.mark(Call(t.text), t)
        self.error("expected a program" if k != "eof" else "unexpected end of input", t)

    def _arms(self, label):
        arms = []
        while self.at("("):
            open_ = self.take("(")
            key = label()
            self.take("arrow")
            body = self.program()
            self.take(")")
            arms.append((key, body, open_))
            if self.at("box"):
                self.take()
        if not arms:
            self.error("expected at least one branch")
        return arms

    def qif(self) -> Node:
        t = self.take("qif")
        self.take("[")
        reg = self.reg()
        d = reg_dim(reg)
        arms = self._arms(lambda: self.take("ket"))
        self.take("fiq")
        if len(arms) != d:
            self.error(f"qif over a guard of dimension {d} needs {d} branches", t)
        basis = tuple(parse_ket(k.text, d, k.line, k.col) for k, _, _ in arms)
        return self.mark(Qif(reg, basis, tuple(b for _, b, _ in arms)), t)

    def ifmeas(self) -> Node:
        t = self.take("if")
        if self.at("["):
            name = "M"
            self.take("[")
        else:
            name = self.take("name").text
            self.take("[")
        reg = self.reg()
        if self.at("="):
            self.take("=")
        arms = self._arms(lambda: self.take("num"))
        self.take("fi")
        labels = []
        for key, _, open_ in arms:
            if not key.text.isdigit():
                self.error("branch labels are outcome indices 0, 1, ...", key)
            labels.append(int(key.text))
        if sorted(labels) != list(range(len(labels))):
            self.error("branch labels must be 0..n-1, each once", t)
        order = sorted(range(len(arms)), key=lambda j: labels[j])
        return self.mark(IfMeas(name, reg, tuple(arms[j][1] for j in order)), t)


def parse(text: str, variables: dict | None = None) -> Parsed:
    """Parse a program file (declarations, then one program)."""
    p = _Parser(text, variables)
    p.declarations()
    prog = p.program()
    p.take("eof")
    positions = {}
    for path, node in iter_paths(prog):
        hit = p.pos.get(id(node))
        if hit is not None:
            positions[path] = hit
    return Parsed(prog, p.vars, p.uses, positions)


def parse_program(text: str, variables: dict | None = None) -> Node:
    return parse(text, variables).program


def diagnose(parsed: Parsed, lib) -> list[str]:
    """Well-formedness problems as ``line:col: message`` strings."""
    out = []
    for d in check_wellformed(parsed.program, lib):
        line, col = parsed.position(d.path)
        out.append(f"{line}:{col}: {d.reason}")
    return out


__all__ = ["ParseError", "Parsed", "diagnose", "parse", "parse_ket", "parse_program", "tokenize"]
