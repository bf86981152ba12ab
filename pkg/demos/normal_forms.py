"""Normal forms for circuits and finite programs.

A circuit becomes a sequence of flat quantum ifs: each one branches on a
register in the computational basis, and every branch is a gate sequence.
Bare gates are wrapped under a fresh control qubit and nested quantum ifs
are flattened onto the joint control register.  A finite program becomes a single measurement
followed by circuits or abort.  Each result comes with a certificate: the
equivalence check against the input.
"""

from _common import banner, load, show
from qlaws.cli.parser import parse_program
from qlaws.transform import normalize_circuit, normalize_program

lib = load("toffoli.qp")[1]
circuits = [
    "H[q]; CNOT[q, r]",
    "qif [q] (|0> -> H[r]) [] (|1> -> qif [r] (|0> -> skip) [] (|1> -> X[s]) fiq) fiq",
]
for text in circuits:
    prog = parse_program(text)
    cert = normalize_circuit(prog, lib)
    banner("circuit normal form")
    print(show(prog))
    print("  ->", show(cert.output))
    print(f"  fresh vars {[str(v) for v in cert.fresh]}, residual {cert.residual:.2g}")

prog, lib = load("deferred.qp")
cert = normalize_program(prog, lib)
banner("program normal form of deferred.qp")
print(show(prog))
print("  ->", show(cert.output))
print(f"  check: {cert.report.verdict}, residual {cert.residual:.2g}")

# two measurements merge into one four-outcome measurement
p = parse_program("H[q]; if M[q] (0 -> X[r]) [] (1 -> skip) fi; if M[r] (0 -> abort) [] (1 -> H[q]) fi")
cert = normalize_program(p, lib)
banner("two measurements")
print(show(p), "\n  ->", show(cert.output))
print(f"  check: {cert.report.verdict}, residual {cert.residual:.2g}")
