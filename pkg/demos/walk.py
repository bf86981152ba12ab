"""Hadamard walk on a cycle of eight sites.

The absorbing walk stops when the position reaches site 0.  Its denotation
is a loop limit; the truncation record says how deep the unrolling went and
whether the mass still inside the loop fell below tolerance.  Every starting
site is absorbed with probability one.

With a second boundary at site 7 wrapped around the first loop, mass that
stops at site 0 is sent back into the inner loop forever, so only inputs
already at site 7 terminate and the truncation is reported as not converged.
"""

import json

import numpy as np

from _common import CORPUS, banner, load, show
from qlaws.config import Config
from qlaws.semantics import prog_sem
from qlaws.syntax import canonical, qv

cfg = Config(**json.loads((CORPUS / "walk_config.json").read_text()))

for name in ("walk_absorbing.qp", "walk_two_boundaries.qp"):
    prog, lib = load(name)
    space = canonical(qv(prog))
    den = prog_sem(prog, lib, cfg, space=space)
    t = den.truncation
    banner(name)
    print(show(prog))
    print(f"unrolled to depth {t.loop_depth}, converged={t.converged}, truncation residual {t.residual:.2g}")
    dims = [v.dim for v in space]
    pos = [v.name for v in space].index("p")
    print("termination probability by starting site (coin |0>):")
    for site in range(8):
        idx = [0] * len(space)
        idx[pos] = site
        k = np.ravel_multi_index(idx, dims)
        rho = np.zeros((np.prod(dims),) * 2, dtype=complex)
        rho[k, k] = 1.0
        print(f"  site {site}: {np.trace(den.superop.apply(rho)).real:.4f}")
