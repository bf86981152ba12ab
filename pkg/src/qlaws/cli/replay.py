"""Replay of recorded derivations.

A replay script is a JSON document::

    {
      "description": "...",
      "program": "qec.qp",
      "goal": "q1 := |0>; q2 := |0>",
      "steps": [
        {"law": "ND-DistSeq", "path": "1.1.1.1", "params": {"form": "right"}},
        {"law": "PL-Lifting", "at": "CNOT[q, q2]", "params": {"replacement": "..."}},
        ...
      ]
    }

A step names its site either by ``path`` (and ``offset`` for a window of a
sequence) or by ``at``, a program fragment located by the first match in
pre-order (a fragment that is a sequence matches consecutive items of a
sequence spine).  Parameters that denote programs, registers or bases are
written in the program syntax.  After the last step the result is compared
with ``goal`` by the semantic oracle.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from qlaws.cli.parser import parse, parse_ket
from qlaws.cli.printer import show
from qlaws.laws import CATALOG, LTR, LawError
from qlaws.laws.core import apply_law
from qlaws.syntax import Node, Seq, Var, format_path, iter_paths, parse_path, seq_items
from qlaws.verify import check_eq

PROGRAM_PARAMS = {"replacement", "other", "middle", "circuit", "mu"}
INT_PARAMS = {"split", "branch", "width"}


class ReplayError(ValueError):
    pass


def decode_params(params: dict, variables: dict) -> dict:
    """Turn textual parameters into programs, registers, bases and integers."""
    out = {}
    for key, val in (params or {}).items():
        if key in PROGRAM_PARAMS and isinstance(val, str):
            out[key] = parse(val, variables).program
        elif key == "reg":
            names = val.split(",") if isinstance(val, str) else list(val)
            # undeclared names are qubits, as in program text
            out[key] = tuple(variables.get(n.strip(), Var(n.strip())) for n in names)
        elif key == "basis":
            labels = list(val)
            out[key] = tuple(parse_ket(k if k.startswith("|") else f"|{k}>", len(labels)) for k in labels)
        elif key in INT_PARAMS:
            out[key] = int(val)
        elif key == "perm":
            out[key] = tuple(int(x) for x in val)
        else:
            out[key] = val
    return out


def locate(program: Node, fragment: Node) -> tuple[tuple, int | None]:
    """First site of ``fragment`` in pre-order: ``(path, offset)``."""
    want = seq_items(fragment) if isinstance(fragment, Seq) else None
    for path, node in iter_paths(program):
        if node == fragment:
            return path, None
        if want is not None and isinstance(node, Seq):
            items = seq_items(node)
            for k in range(len(items) - len(want) + 1):
                if items[k:k + len(want)] == want:
                    return path, k
    raise ReplayError(f"fragment not found: {show(fragment)}")


@dataclass
class StepRecord:
    index: int
    law: str
    path: str
    offset: int | None
    direction: str
    program: str
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ReplayReport:
    script: str
    steps: list = field(default_factory=list)
    failed_step: int | None = None
    error: str | None = None
    final: Node | None = None
    goal: Node | None = None
    check: object = None
    seconds: float = 0.0
    lib: object = None

    @property
    def verdict(self) -> str:
        if self.error is not None:
            return "failed"
        return self.check.verdict if self.check is not None else "no-goal"

    @property
    def ok(self) -> bool:
        return self.error is None and (self.check is None or self.check.equal)

    def to_dict(self) -> dict:
        return {
            "script": self.script,
            "verdict": self.verdict,
            "steps_applied": len(self.steps),
            "failed_step": self.failed_step,
            "error": self.error,
            "final": None if self.final is None else show(self.final),
            "goal": None if self.goal is None else show(self.goal),
            "check": None if self.check is None else self.check.to_dict(),
            "seconds": round(self.seconds, 3),
            "trace": [s.to_dict() for s in self.steps],
        }


def load_script(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise ReplayError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ReplayError(f"{path}: {e}") from None


def run_replay(path: str | Path, ws) -> ReplayReport:
    """Apply every step of the script at ``path``; stop at the first failure."""
    t0 = time.perf_counter()
    path = Path(path)
    script = load_script(ws.resolve(path))
    base = ws.resolve(path).parent
    parsed, lib = ws.load_program(base / script["program"])
    variables = dict(parsed.variables)
    program = parsed.program
    rep = ReplayReport(str(path), lib=lib)
    universe = frozenset()
    for i, st in enumerate(script.get("steps", [])):
        try:
            law = CATALOG[st["law"]]
        except KeyError:
            rep.failed_step, rep.error = i, f"unknown law {st.get('law')}"
            break
        try:
            params = decode_params(st.get("params", {}), variables)
            if "path" in st:
                p = parse_path(st["path"]) if isinstance(st["path"], str) else tuple(st["path"])
                off = st.get("offset")
            elif "at" in st:
                p, off = locate(program, parse(st["at"], variables).program)
            else:
                p, off = None, None
            res = apply_law(law, program, lib, p, off, st.get("direction", LTR), ws.cfg, params, universe)
        except (LawError, ReplayError, ValueError) as e:
            rep.failed_step, rep.error = i, f"{st['law']}: {type(e).__name__}: {e}"
            break
        program, lib, universe = res.program, res.lib, res.universe
        rep.steps.append(StepRecord(i, law.id, format_path(res.path), res.offset, res.direction,
                                    show(program), st.get("note", "")))
    rep.final, rep.lib = program, lib
    if rep.error is None and "goal" in script:
        rep.goal = parse(script["goal"], variables).program
        rep.check = check_eq(program, rep.goal, lib, ws.cfg)
    rep.seconds = time.perf_counter() - t0
    return rep
