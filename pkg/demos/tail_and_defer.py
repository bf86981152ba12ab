"""Tail recursion to loops, and deferring measurements.

A recursion whose only recursive call sits at the end of one branch is a
while loop in disguise.  Both sides are unrolled to a fixed depth and
compared; a recursion that never terminates comes back inconclusive rather
than equal.

A finite program with mid-circuit measurements is equal to a single circuit
on fresh auxiliary qubits, followed by one computational measurement of the
auxiliaries that either continues or aborts.
"""

from _common import banner, load, show
from qlaws.cli.parser import parse_program
from qlaws.transform import check_tail, defer_measurements, tail_to_loop
from qlaws.verify import check_eq

prog, lib = load("tail.qp")
banner("tail recursion")
print(show(prog))
print("  ->", show(tail_to_loop(prog)))
rep = check_tail(prog, lib)
print(f"  {rep.verdict}, residual {rep.residual:.2g}")
expected, _ = load("tail_loop.qp")
print(f"  matches tail_loop.qp: {check_eq(tail_to_loop(prog), expected, lib).equal}")

spin = parse_program("mu Y . if MT[q] (0 -> skip) [] (1 -> skip; Y) fi")
print(f"\n{show(spin)}\n  -> {check_tail(spin, lib).verdict} (never leaves the loop on |1>)")

prog, lib = load("deferred.qp")
d = defer_measurements(prog, lib)
banner("deferred measurements")
print(show(prog))
print(f"  circuit    : {show(d.circuit)}")
print(f"  auxiliaries: {[str(v) for v in d.aux]}")
print(f"  decision   : {show(d.decision())}")
lhs, rhs = d.sandwich()
rep = check_eq(lhs, rhs, d.cert.lib)
print(f"  sandwich   : {rep.verdict}, residual {rep.residual:.2g}")
