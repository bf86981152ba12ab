"""Regenerate src/qlaws/corpus/stdlib.json, the bundled gate and measurement library."""

import json
from pathlib import Path

import numpy as np

r = 1 / np.sqrt(2)
I2 = np.eye(2)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1]).astype(complex)
H = r * np.array([[1, 1], [1, -1]], dtype=complex)
S = np.diag([1, 1j])
T = np.diag([1, np.exp(1j * np.pi / 4)])


def controlled(u, n_ctrl=1):
    d = u.shape[0]
    full = np.eye(d * 2**n_ctrl, dtype=complex)
    full[-d:, -d:] = u
    return full


def shift(d, k):
    m = np.zeros((d, d), dtype=complex)
    for n in range(d):
        m[(n + k) % d, n] = 1
    return m


gates = {
    "X": ([2], X), "Y": ([2], Y), "Z": ([2], Z), "H": ([2], H),
    "S": ([2], S), "Sdg": ([2], S.conj().T), "T": ([2], T), "Tdg": ([2], T.conj().T),
    "CNOT": ([2, 2], controlled(X)), "CZ": ([2, 2], controlled(Z)),
    "CCX": ([2, 2, 2], controlled(X, 2)),
    "TL": ([8], shift(8, -1)), "TR": ([8], shift(8, 1)),
}
plus = r * np.array([1, 1])
minus = r * np.array([1, -1])
e0 = np.zeros(8); e0[0] = 1
e7 = np.zeros(8); e7[7] = 1
meas = {
    "MH": ([2], [np.outer(plus, plus), np.outer(minus, minus)]),
    "ML": ([8], [np.outer(e0, e0), np.eye(8) - np.outer(e0, e0)]),
    "NR": ([8], [np.outer(e7, e7), np.eye(8) - np.outer(e7, e7)]),
}


def enc(a):
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


doc = {
    "gates": [{"name": k, "dims": d, "matrix": enc(m)} for k, (d, m) in gates.items()],
    "measurements": [{"name": k, "dims": d, "outcomes": len(ops), "kraus": [enc(o) for o in ops]}
                     for k, (d, ops) in meas.items()],
}
out = Path(__file__).resolve().parents[1] / "src" / "qlaws" / "corpus" / "stdlib.json"
out.write_text(json.dumps(doc, indent=1) + "\n")
print(f"wrote {out}")
