"""Named gates and measurements.

A :class:`Library` maps names to unitary matrices and to Kraus families, each
with declared dimensions.  A few entries are polymorphic and exist for every
register type:

``I``      identity
``SWAP``   exchange of the first and second half of the register
``M``      measurement in the computational basis (one outcome per basis state)
``MT``     binary measurement whose outcome is always 1
``MF``     binary measurement whose outcome is always 0

Libraries are immutable; ``with_gate``/``with_meas`` and the ``register_*``
helpers return extended copies.  Synthesized entries receive names derived
from a hash of their matrices, so repeated synthesis is deterministic.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from qlaws.linalg import completeness_residual, is_unitary

POLY_GATES = ("I", "SWAP")
POLY_MEAS = ("M", "MT", "MF")


@dataclass(frozen=True)
class GateDef:
    name: str
    dims: tuple
    matrix: np.ndarray


@dataclass(frozen=True)
class MeasDef:
    name: str
    dims: tuple
    kraus: np.ndarray  # (outcomes, d, d)

    @property
    def outcomes(self) -> int:
        return self.kraus.shape[0]


def _fingerprint(arr: np.ndarray) -> str:
    a = np.round(np.asarray(arr, dtype=complex), 10) + (0.0 + 0.0j)
    return hashlib.sha1(a.tobytes() + str(a.shape).encode()).hexdigest()[:8]


def swap_matrix(dims: tuple) -> np.ndarray:
    """Exchange of the two halves of a register with dims ``a + a``."""
    k = len(dims) // 2
    if len(dims) % 2 or dims[:k] != dims[k:]:
        raise ValueError("SWAP needs a register made of two halves of equal type")
    n = len(dims)
    d = int(np.prod(dims))
    t = np.eye(d, dtype=complex).reshape(list(dims) * 2)
    perm = list(range(k, n)) + list(range(k))
    t = t.transpose(perm + list(range(n, 2 * n)))
    return t.reshape(d, d)


def computational_kraus(dims: tuple) -> np.ndarray:
    d = int(np.prod(dims))
    out = np.zeros((d, d, d), dtype=complex)
    for k in range(d):
        out[k, k, k] = 1.0
    return out


class Library:
    """Immutable collection of named gates and measurements."""

    def __init__(self, gates: Mapping[str, GateDef] | None = None,
                 measurements: Mapping[str, MeasDef] | None = None):
        self._gates = MappingProxyType(dict(gates or {}))
        self._meas = MappingProxyType(dict(measurements or {}))

    # -- lookup ------------------------------------------------------------
    @property
    def gates(self) -> Mapping[str, GateDef]:
        return self._gates

    @property
    def measurements(self) -> Mapping[str, MeasDef]:
        return self._meas

    def has_gate(self, name: str) -> bool:
        return name in POLY_GATES or name in self._gates

    def has_meas(self, name: str) -> bool:
        return name in POLY_MEAS or name in self._meas

    def check_gate(self, name: str, dims: tuple) -> str | None:
        if name == "I":
            return None
        if name == "SWAP":
            k = len(dims) // 2
            if len(dims) % 2 or dims[:k] != dims[k:]:
                return "SWAP needs two registers of the same type"
            return None
        g = self._gates.get(name)
        if g is None:
            return f"unknown gate {name}"
        if tuple(g.dims) != tuple(dims):
            return f"gate {name} has type {tuple(g.dims)} but register has {tuple(dims)}"
        return None

    def check_meas(self, name: str, dims: tuple) -> str | None:
        if name in POLY_MEAS:
            return None
        m = self._meas.get(name)
        if m is None:
            return f"unknown measurement {name}"
        if tuple(m.dims) != tuple(dims):
            return f"measurement {name} has type {tuple(m.dims)} but register has {tuple(dims)}"
        return None

    def gate_matrix(self, name: str, dims: tuple) -> np.ndarray:
        dims = tuple(dims)
        problem = self.check_gate(name, dims)
        if problem:
            raise KeyError(problem)
        if name == "I":
            return np.eye(int(np.prod(dims)), dtype=complex)
        if name == "SWAP":
            return swap_matrix(dims)
        return self._gates[name].matrix

    def kraus(self, name: str, dims: tuple) -> np.ndarray:
        dims = tuple(dims)
        problem = self.check_meas(name, dims)
        if problem:
            raise KeyError(problem)
        d = int(np.prod(dims))
        if name == "M":
            return computational_kraus(dims)
        if name == "MT":
            return np.stack([np.zeros((d, d), dtype=complex), np.eye(d, dtype=complex)])
        if name == "MF":
            return np.stack([np.eye(d, dtype=complex), np.zeros((d, d), dtype=complex)])
        return self._meas[name].kraus

    def outcomes(self, name: str, dims: tuple) -> int:
        return self.kraus(name, dims).shape[0]

    # -- extension ---------------------------------------------------------
    def with_gate(self, name: str, dims, matrix, tol: float = 1e-8) -> "Library":
        matrix = np.asarray(matrix, dtype=complex)
        dims = tuple(int(x) for x in dims)
        d = int(np.prod(dims))
        if name in POLY_GATES:
            raise ValueError(f"{name} is a reserved gate name")
        if matrix.shape != (d, d):
            raise ValueError(f"gate {name}: matrix shape {matrix.shape} does not match dims {dims}")
        if not is_unitary(matrix, tol):
            raise ValueError(f"gate {name} is not unitary")
        old = self._gates.get(name)
        if old is not None:
            if old.dims == dims and np.allclose(old.matrix, matrix, atol=1e-12):
                return self
            raise ValueError(f"gate {name} is already defined differently")
        gates = dict(self._gates)
        gates[name] = GateDef(name, dims, matrix)
        return Library(gates, self._meas)

    def with_meas(self, name: str, dims, kraus, tol: float = 1e-8) -> "Library":
        kraus = np.asarray(kraus, dtype=complex)
        dims = tuple(int(x) for x in dims)
        d = int(np.prod(dims))
        if name in POLY_MEAS:
            raise ValueError(f"{name} is a reserved measurement name")
        if kraus.ndim != 3 or kraus.shape[1:] != (d, d):
            raise ValueError(f"measurement {name}: Kraus shape {kraus.shape} does not match dims {dims}")
        if completeness_residual(kraus) > tol:
            raise ValueError(f"measurement {name} violates the completeness equation")
        old = self._meas.get(name)
        if old is not None:
            if old.dims == dims and old.kraus.shape == kraus.shape and np.allclose(old.kraus, kraus, atol=1e-12):
                return self
            raise ValueError(f"measurement {name} is already defined differently")
        meas = dict(self._meas)
        meas[name] = MeasDef(name, dims, kraus)
        return Library(self._gates, meas)

    def find_gate(self, matrix: np.ndarray, dims, tol: float = 1e-12) -> str | None:
        """Name of an existing gate with exactly this matrix and type."""
        dims = tuple(dims)
        if np.allclose(matrix, np.eye(matrix.shape[0]), atol=tol, rtol=0):
            return "I"
        for g in self._gates.values():
            if g.dims == dims and np.allclose(g.matrix, matrix, atol=tol, rtol=0):
                return g.name
        return None

    def find_meas(self, kraus: np.ndarray, dims, tol: float = 1e-12) -> str | None:
        dims = tuple(dims)
        for m in self._meas.values():
            if m.dims == dims and m.kraus.shape == kraus.shape and np.allclose(m.kraus, kraus, atol=tol, rtol=0):
                return m.name
        for name in POLY_MEAS:
            ref = self.kraus(name, dims)
            if ref.shape == kraus.shape and np.allclose(ref, kraus, atol=tol, rtol=0):
                return name
        return None

    def register_gate(self, matrix, dims, prefix: str = "U", name: str | None = None):
        """Return ``(name, library)`` for a gate, reusing an equal existing entry."""
        matrix = np.asarray(matrix, dtype=complex)
        found = self.find_gate(matrix, dims)
        if found is not None:
            return found, self
        if name is None or (name in self._gates):
            name = f"{prefix}_{_fingerprint(matrix)}"
        return name, self.with_gate(name, dims, matrix)

    def register_meas(self, kraus, dims, prefix: str = "K", name: str | None = None):
        kraus = np.asarray(kraus, dtype=complex)
        found = self.find_meas(kraus, dims)
        if found is not None:
            return found, self
        if name is None or (name in self._meas):
            name = f"{prefix}_{_fingerprint(kraus)}"
        return name, self.with_meas(name, dims, kraus)

    def merge(self, other: "Library") -> "Library":
        lib = self
        for g in other.gates.values():
            lib = lib.with_gate(g.name, g.dims, g.matrix)
        for m in other.measurements.values():
            lib = lib.with_meas(m.name, m.dims, m.kraus)
        return lib

    def extension_of(self, base: "Library") -> "Library":
        """Entries of ``self`` that ``base`` lacks."""
        return Library({n: g for n, g in self._gates.items() if n not in base.gates},
                       {n: m for n, m in self._meas.items() if n not in base.measurements})

    def __len__(self) -> int:
        return len(self._gates) + len(self._meas)

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        def mat(a):
            return [[[float(z.real), float(z.imag)] for z in row] for row in a]

        return {
            "gates": [{"name": g.name, "dims": list(g.dims), "matrix": mat(g.matrix)}
                      for g in self._gates.values()],
            "measurements": [{"name": m.name, "dims": list(m.dims), "outcomes": m.outcomes,
                              "kraus": [mat(k) for k in m.kraus]}
                             for m in self._meas.values()],
        }

    @classmethod
    def from_json(cls, data: dict, tol: float = 1e-8) -> "Library":
        def mat(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)

        lib = cls()
        for g in data.get("gates", []):
            lib = lib.with_gate(g["name"], g["dims"], mat(g["matrix"]), tol)
        for m in data.get("measurements", []):
            kraus = np.stack([mat(k) for k in m["kraus"]])
            if "outcomes" in m and m["outcomes"] != kraus.shape[0]:
                raise ValueError(f"measurement {m['name']}: outcome count does not match Kraus list")
            lib = lib.with_meas(m["name"], m["dims"], kraus, tol)
        return lib

    @classmethod
    def load(cls, path: str | Path) -> "Library":
        return cls.from_json(json.loads(Path(path).read_text()))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def standard(cls) -> "Library":
        """Bundled library of common qubit gates and measurements."""
        text = resources.files("qlaws.corpus").joinpath("stdlib.json").read_text()
        return cls.from_json(json.loads(text))

    def __repr__(self) -> str:
        return f"Library({len(self._gates)} gates, {len(self._meas)} measurements)"
