"""Randomized soundness checks of the law catalog.

Every trial draws an instance from the law's generator, rewrites it and
compares both sides with the semantic oracle.  Bidirectional laws are also
rewritten back from the output.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from qlaws.config import DEFAULT, Config
from qlaws.laws.core import LTR, RTL, Law, LawError, NoMatch, apply_law
from qlaws.library import Library
from qlaws.verify import check_eq

#: loops and recursion converge geometrically; the catalog check truncates tighter
HARNESS_CFG = DEFAULT.replace(loop_tol=1e-13, loop_cap=4000)


@dataclass
class LawReport:
    law: str
    trials: int = 0
    passed: int = 0
    back_passed: int = 0
    back_skipped: int = 0
    inconclusive: int = 0
    max_residual: float = 0.0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures and self.passed + self.inconclusive == self.trials

    def to_dict(self) -> dict:
        return {"law": self.law, "trials": self.trials, "passed": self.passed,
                "back_passed": self.back_passed, "back_skipped": self.back_skipped,
                "inconclusive": self.inconclusive, "max_residual": self.max_residual,
                "failures": self.failures[:5], "seconds": round(self.seconds, 3)}


def law_rng(law_id: str, seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(law_id.encode()), trial])


def _compare(a, b, lib, cfg, rep: LawReport, what: str, trial: int) -> bool:
    r = check_eq(a, b, lib, cfg)
    rep.max_residual = max(rep.max_residual, r.residual)
    if r.verdict == "inconclusive":
        rep.inconclusive += 1
        return False
    if not r.equal:
        rep.failures.append({"trial": trial, "stage": what, "residual": r.residual})
        return False
    return True


def verify_law(law: Law, trials: int = 100, seed: int = 42, cfg: Config = HARNESS_CFG,
               lib: Library | None = None) -> LawReport:
    base = lib or Library.standard()
    rep = LawReport(law.id)
    t0 = time.perf_counter()
    for t in range(trials):
        rng = law_rng(law.id, seed, t)
        inst = law.generator(rng, base)
        rep.trials += 1
        try:
            res = apply_law(law, inst.program, inst.lib, inst.path, inst.offset, LTR, cfg, inst.params)
        except LawError as e:
            rep.failures.append({"trial": t, "stage": "forward", "error": f"{type(e).__name__}: {e}"})
            continue
        if not _compare(inst.program, res.program, res.lib, cfg, rep, "forward", t):
            continue
        rep.passed += 1
        if not law.bidirectional:
            continue
        try:
            back = apply_law(law, res.program, res.lib, None, None, RTL, cfg, inst.back_params)
        except NoMatch:
            rep.back_skipped += 1
            continue
        except LawError as e:
            rep.failures.append({"trial": t, "stage": "backward", "error": f"{type(e).__name__}: {e}"})
            continue
        if _compare(res.program, back.program, back.lib, cfg, rep, "backward", t):
            rep.back_passed += 1
    rep.seconds = time.perf_counter() - t0
    return rep


def verify_all(laws=None, trials: int = 100, seed: int = 42, cfg: Config = HARNESS_CFG) -> list[LawReport]:
    from qlaws.laws import CATALOG

    laws = list(CATALOG.values()) if laws is None else laws
    return [verify_law(law, trials, seed, cfg) for law in laws if law.enabled and law.generator]
