"""Regenerate src/qlaws/corpus/example_gates.json: rotation gates used by the Deutsch gate demo."""

from pathlib import Path

import numpy as np

from qlaws.library import Library


def rxb(theta):
    """i times the x rotation by 2 theta."""
    c, s = np.cos(theta), np.sin(theta)
    return 1j * np.array([[c, -1j * s], [-1j * s, c]])


lib = Library()
for name, theta in (("RXB_PI2", np.pi / 2), ("RXB_PI3", np.pi / 3)):
    lib = lib.with_gate(name, (2,), rxb(theta))
out = Path(__file__).resolve().parents[1] / "src" / "qlaws" / "corpus" / "example_gates.json"
lib.dump(out)
print(f"wrote {out}")
