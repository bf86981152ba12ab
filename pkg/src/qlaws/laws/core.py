"""Generic machinery for rewrite laws.

A :class:`Law` holds one or two :class:`Rule` objects (left-to-right and,
for bidirectional laws, right-to-left).  A rule matches either a whole
subterm (structural mode) or a window of consecutive items of a sequence
spine (window mode), which realizes matching modulo associativity of ``;``.
Matching only binds metavariables; side conditions are evaluated separately
and the rewrite action may synthesize new library entries or variables.

Two rule flavours exist:

* :class:`PatternRule` - lhs/rhs schemas over :class:`Meta` placeholders;
* :class:`FnRule` - hand-written match/build functions for variadic shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Any, Callable

from qlaws.config import DEFAULT, Config
from qlaws.syntax import (
    Node,
    Seq,
    check_wellformed,
    format_path,
    get_at,
    idents,
    is_circuit,
    is_deterministic,
    qv,
    replace_at,
    seq,
    seq_items,
)

LTR, RTL = "ltr", "rtl"


class LawError(Exception):
    """Base class of rewrite failures."""


class NoMatch(LawError):
    pass


class SideConditionFailed(LawError):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(f"{n} (residual {r:.3g})" for n, r in self.failures))


class SynthesisFailed(LawError):
    pass


# ---------------------------------------------------------------------------
# context


@dataclass(frozen=True)
class Ctx:
    """Everything a rewrite may consult or extend."""

    lib: Any
    cfg: Config = DEFAULT
    universe: frozenset = frozenset()
    params: dict = field(default_factory=dict)
    root: Node | None = None

    def param(self, key, default=None):
        return self.params.get(key, default)

    def with_lib(self, lib) -> "Ctx":
        return replace(self, lib=lib)

    def with_universe(self, universe) -> "Ctx":
        return replace(self, universe=frozenset(universe))

    @property
    def taken_idents(self) -> frozenset:
        return idents(self.root) if self.root is not None else frozenset()


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Meta:
    """Metavariable of a pattern.

    ``kind`` restricts what may bind: ``prog`` (any program), ``circ``
    (circuits), ``det`` (deterministic programs) or ``any`` (non-node
    values such as registers, bases and names).
    """

    name: str
    kind: str = "prog"


def _kind_ok(kind: str, value) -> bool:
    if kind == "any":
        return True
    if not isinstance(value, Node):
        return False
    if kind == "circ":
        return is_circuit(value)
    if kind == "det":
        return is_deterministic(value)
    return True


def match_pattern(pat, term, b: dict) -> dict | None:
    if isinstance(pat, Meta):
        if pat.name in b:
            return b if b[pat.name] == term else None
        if not _kind_ok(pat.kind, term):
            return None
        return {**b, pat.name: term}
    if isinstance(pat, Node):
        if type(pat) is not type(term):
            return None
        for f in fields(pat):
            b = match_pattern(getattr(pat, f.name), getattr(term, f.name), b)
            if b is None:
                return None
        return b
    if isinstance(pat, tuple):
        if not isinstance(term, tuple) or len(pat) != len(term):
            return None
        for p, t in zip(pat, term):
            b = match_pattern(p, t, b)
            if b is None:
                return None
        return b
    return b if pat == term else None


def instantiate(pat, b: dict):
    if isinstance(pat, Meta):
        return b[pat.name]
    if isinstance(pat, Node) and is_dataclass(pat):
        return type(pat)(**{f.name: instantiate(getattr(pat, f.name), b) for f in fields(pat)})
    if isinstance(pat, tuple):
        return tuple(instantiate(p, b) for p in pat)
    return pat


def metas(pat) -> set:
    if isinstance(pat, Meta):
        return {pat.name}
    if isinstance(pat, Node) and is_dataclass(pat):
        out = set()
        for f in fields(pat):
            out |= metas(getattr(pat, f.name))
        return out
    if isinstance(pat, tuple):
        out = set()
        for p in pat:
            out |= metas(p)
        return out
    return set()


# ---------------------------------------------------------------------------
# rules

Side = Callable[[dict, Ctx], "tuple[bool, float] | bool"]


class Rule:
    """One rewrite direction.  Subclasses supply ``match`` and ``build``."""

    #: number of spine items consumed in window mode, or None when the rule
    #: decides itself (``match_items``) or is structural only
    width: int | None = None
    windowed: bool = False

    def __init__(self, sides: list | None = None, synth: Callable | None = None):
        self.sides = list(sides or [])
        self.synth = synth

    def match(self, node: Node, ctx: Ctx) -> dict | None:
        raise NotImplementedError

    def match_items(self, items: list, ctx: Ctx) -> tuple[dict, int] | None:
        """Window match against ``items`` (a suffix of a spine); returns consumed count."""
        if not self.windowed:
            return None
        widths = [self.width] if self.width else range(2, len(items) + 1)
        for w in widths:
            if w is None or w > len(items) or w < 2:
                continue
            b = self.match(seq(*items[:w]), ctx)
            if b is not None:
                return b, w
        return None

    def check(self, b: dict, ctx: Ctx) -> list:
        failures = []
        for name, fn in self.sides:
            out = fn(b, ctx)
            ok, resid = (out, 0.0 if out else 1.0) if isinstance(out, bool) else out
            if not ok:
                failures.append((name, float(resid)))
        return failures

    def build(self, b: dict, ctx: Ctx) -> tuple[Node, Ctx, dict]:
        raise NotImplementedError


class PatternRule(Rule):
    def __init__(self, lhs, rhs, sides=None, synth=None, windowed: bool | None = None):
        super().__init__(sides, synth)
        self.lhs, self.rhs = lhs, rhs
        if windowed is None:
            windowed = isinstance(lhs, Seq)
        self.windowed = windowed
        self.width = len(seq_items(lhs)) if isinstance(lhs, Seq) else None

    def match(self, node, ctx):
        return match_pattern(self.lhs, node, {})

    def build(self, b, ctx):
        if self.synth is not None:
            b, ctx = self.synth(b, ctx)
        return instantiate(self.rhs, b), ctx, b


class FnRule(Rule):
    """Rule given by functions ``match(node, ctx)`` and ``build(b, ctx)``.

    ``build`` returns the new node or ``(node, ctx, bindings)``.
    """

    def __init__(self, match, build, sides=None, windowed: bool = False, width: int | None = None,
                 match_items=None):
        super().__init__(sides)
        self._match, self._build = match, build
        self.windowed, self.width = windowed or match_items is not None, width
        self._match_items = match_items

    def match(self, node, ctx):
        return self._match(node, ctx)

    def match_items(self, items, ctx):
        if self._match_items is not None:
            return self._match_items(items, ctx)
        return super().match_items(items, ctx)

    def build(self, b, ctx):
        out = self._build(b, ctx)
        if isinstance(out, tuple):
            return out
        return out, ctx, b


# ---------------------------------------------------------------------------
# laws


@dataclass
class Law:
    id: str
    layer: str
    title: str
    anchor: str
    forward: Rule
    backward: Rule | None = None
    generator: Callable | None = None
    enabled: bool = True
    notes: str = ""

    @property
    def bidirectional(self) -> bool:
        return self.backward is not None

    def rule(self, direction: str) -> Rule:
        if direction == LTR:
            return self.forward
        if self.backward is None:
            raise NoMatch(f"{self.id} is applied left-to-right only")
        return self.backward


@dataclass(frozen=True)
class RewriteResult:
    program: Node
    law: str
    path: tuple
    offset: int | None
    direction: str
    bindings: dict
    lib: Any
    universe: frozenset
    ctx: Ctx | None = None

    def summary(self) -> dict:
        return {"law": self.law, "path": format_path(self.path), "offset": self.offset,
                "direction": self.direction}


def _spine_at(node: Node) -> list | None:
    return seq_items(node) if isinstance(node, Seq) else None


def match_law(law: Law, program: Node, path=(), offset: int | None = None,
              direction: str = LTR, ctx: Ctx | None = None):
    """Bindings of ``law`` at ``path`` (and ``offset`` inside a sequence spine).

    Side conditions are not evaluated.  Returns ``(bindings, width)`` where
    ``width`` is the number of spine items consumed (``None`` for a
    structural match) or ``None`` when nothing matches.
    """
    rule = law.rule(direction)
    ctx = ctx or Ctx(lib=None)
    node = get_at(program, path)
    if offset is None:
        b = rule.match(node, ctx)
        return None if b is None else (b, None)
    items = _spine_at(node)
    if items is None or not rule.windowed or not 0 <= offset < len(items):
        return None
    got = rule.match_items(items[offset:], ctx)
    if got is None:
        return None
    b, w = got
    return b, w


def _splice(node: Node, offset: int, width: int, new: Node) -> Node:
    items = seq_items(node)
    before, after = items[:offset], items[offset + width:]
    if not after:
        return seq(*before, new)
    return seq(*before, *seq_items(new), *after) if isinstance(new, Seq) else seq(*before, new, *after)


def apply_at(law: Law, program: Node, path, offset, direction, ctx: Ctx) -> RewriteResult:
    ctx = replace(ctx, root=program, universe=ctx.universe | qv(program))
    got = match_law(law, program, path, offset, direction, ctx)
    if got is None:
        raise NoMatch(f"{law.id} does not match at {format_path(tuple(path))}"
                      + ("" if offset is None else f" offset {offset}"))
    b, width = got
    rule = law.rule(direction)
    failures = rule.check(b, ctx)
    if failures:
        raise SideConditionFailed(failures)
    new, ctx2, b = rule.build(b, ctx)
    node = get_at(program, path)
    replaced = new if width is None else _splice(node, offset, width, new)
    out = replace_at(program, path, replaced)
    diags = check_wellformed(out, ctx2.lib, ctx2.cfg.eps_orth)
    if diags:
        raise SynthesisFailed(f"{law.id} produced an ill-formed program: {diags[0]}")
    universe = ctx2.universe | qv(out)
    return RewriteResult(out, law.id, tuple(path), offset, direction, b, ctx2.lib, universe, ctx2)


def candidate_sites(program: Node):
    """Every ``(path, offset)`` in pre-order, structural site before windows."""
    from qlaws.syntax import iter_paths

    for path, node in iter_paths(program):
        yield path, None
        if isinstance(node, Seq):
            for k in range(len(seq_items(node)) - 1):
                yield path, k


def apply_law(law: Law, program: Node, lib, path=None, offset=None, direction: str = LTR,
              cfg: Config = DEFAULT, params: dict | None = None, universe=frozenset()) -> RewriteResult:
    """Apply ``law`` at ``path`` or, when ``path`` is None, at the first site where it applies."""
    ctx = Ctx(lib=lib, cfg=cfg, universe=frozenset(universe), params=dict(params or {}))
    if path is not None:
        return apply_at(law, program, tuple(path), offset, direction, ctx)
    last: LawError | None = None
    for p, k in candidate_sites(program):
        try:
            return apply_at(law, program, p, k, direction, ctx)
        except SideConditionFailed as e:
            last = e
        except NoMatch:
            continue
    if last is not None:
        raise last
    raise NoMatch(f"{law.id} matches nowhere")


# ---------------------------------------------------------------------------
# traces


@dataclass
class LawTrace:
    steps: list = field(default_factory=list)

    def add(self, res: RewriteResult, params: dict | None = None) -> None:
        entry = res.summary()
        if params:
            entry["params"] = params
        self.steps.append(entry)

    def to_list(self) -> list:
        return list(self.steps)


def replay(program: Node, steps: list, lib, catalog: dict, cfg: Config = DEFAULT,
           universe=frozenset(), param_decoder=None):
    """Re-apply recorded steps; returns the final program, library and results."""
    from qlaws.syntax import parse_path

    results = []
    for st in steps:
        law = catalog[st["law"]]
        path = st.get("path")
        path = None if path is None else (parse_path(path) if isinstance(path, str) else tuple(path))
        params = st.get("params") or {}
        if param_decoder is not None:
            params = param_decoder(params, lib)
        res = apply_law(law, program, lib, path, st.get("offset"), st.get("direction", LTR), cfg,
                        params, universe)
        program, lib, universe = res.program, res.lib, res.universe
        results.append(res)
    return program, lib, results
