"""Refinement, and laws that fail without their side conditions.

A program refines a nondeterministic one when each of its resolutions is a
convex mix of the other's.  The weights are the certificate.

Some laws only hold under a side condition.  The committed witnesses are
concrete instances where dropping the condition breaks equality by a wide
margin; they are regenerated here from their seeds.
"""

import json

from _common import CORPUS, WS, banner, show
from qlaws.cli.parser import parse_program
from qlaws.laws.nonlaws import NONLAWS, search_nonlaw
from qlaws.verify import check_eq, check_refines

P = parse_program
lib = WS.lib

banner("refinement")
for a, b in [("skip |p:0.3| X[q]", "skip |_| X[q]"), ("skip |_| X[q]", "skip"), ("H[q]", "skip |_| X[q]")]:
    rep = check_refines(P(a), P(b), lib)
    extra = f", weights {[round(float(w), 3) for w in rep.weights[0]]}" if rep.refines else ""
    print(f"{a:>20}  refines  {b:<16} -> {rep.verdict}{extra}")

banner("non-law witnesses")
for w in json.loads((CORPUS / "witnesses.json").read_text()):
    (a, la), (b, lb) = WS.load_program(w["lhs"]), WS.load_program(w["rhs"])
    rep = check_eq(a.program, b.program, la.merge(lb))
    print(f"{w['name']:<24} {rep.verdict}, residual {rep.residual:.3f}")
name = next(iter(NONLAWS))
w = search_nonlaw(name, seed=42)
print(f"\nregenerated {name}: trial {w.trial}, residual {w.residual:.3f}")
print(f"  lhs: {show(w.lhs)}\n  rhs: {show(w.rhs)}")
