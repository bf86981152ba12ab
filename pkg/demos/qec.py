"""Bit-flip code, rewritten law by law.

The shipped program decodes with a nested measurement.  Replaying its
derivation shows where it goes wrong: after an X error on q1 the syndrome
bit q2 reads 0, so q1 is never reset and the program cannot reach
``q1 := |0>; q2 := |0>``.  The corrected variant adds a final reset of q1
and the same derivation closes.
"""

from _common import WS, banner, show
from qlaws.cli.replay import run_replay

for script in ("qec.replay", "qec_corrected.replay"):
    banner(script)
    rep = run_replay(script, WS)
    print(f"steps applied : {len(rep.steps)} in {rep.seconds:.2f}s")
    laws = sorted({s.law for s in rep.steps})
    print(f"laws used     : {', '.join(laws)}")
    print(f"final program : {show(rep.final)}")
    print(f"goal          : {show(rep.goal)}")
    print(f"verdict       : {rep.verdict} (residual {rep.check.residual:.3g})")
