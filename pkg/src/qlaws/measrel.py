"""Numeric tests of the relations between measurements used as side conditions.

Operators ``A`` and ``B`` are *k-proportional* when ``A = cB`` for a scalar
with ``|c| = k``.  Left and right absorption, orthogonality, entailment,
weakening, contradiction and commutation are all phrased through it.  Binary
measurements are arrays of shape ``(2, d, d)`` holding ``M_0`` and ``M_1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qlaws.linalg import psd_sqrt

EPS_REL = 1e-8


@dataclass(frozen=True)
class RelVerdict:
    relation: str
    holds: bool
    witness: complex | None = None
    residual: float = 0.0

    def __bool__(self) -> bool:
        return bool(self.holds)


def _same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")


def _binary(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 3 or m.shape[0] != 2:
        raise ValueError("a binary measurement is needed")
    return m


def proportion(a, b, k: float, tol: float = EPS_REL) -> RelVerdict:
    """``A = c B`` for some ``c`` with ``|c| = k``; least-squares witness ``c``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _same_shape(a, b)
    nb = np.linalg.norm(b)
    if nb <= tol:
        na = float(np.linalg.norm(a))
        return RelVerdict("proportion", na <= tol, 0j, na)
    c = complex(np.vdot(b, a) / nb**2)
    fit = float(np.linalg.norm(a - c * b))
    scale = float(abs(abs(c) - k))
    holds = fit <= tol * max(1.0, nb) and scale <= tol
    return RelVerdict("proportion", holds, c, max(fit / max(1.0, nb), scale))


def proportional(a, b, tol: float = EPS_REL) -> RelVerdict:
    """``A = c B`` for an unconstrained scalar ``c``."""
    v = proportion(a, b, 0.0, tol)
    if v.witness is None:
        return v
    nb = np.linalg.norm(b)
    if nb <= tol:
        return RelVerdict("proportional", v.holds, 0j, v.residual)
    fit = float(np.linalg.norm(np.asarray(a) - v.witness * np.asarray(b)))
    return RelVerdict("proportional", fit <= tol * max(1.0, nb), v.witness, fit / max(1.0, nb))


def absorb_left(a, b, k: float, tol: float = EPS_REL) -> RelVerdict:
    """``AB`` is k-proportional to ``B``."""
    v = proportion(np.asarray(a) @ np.asarray(b), b, k, tol)
    return RelVerdict("absorb_left", v.holds, v.witness, v.residual)


def absorb_right(a, b, k: float, tol: float = EPS_REL) -> RelVerdict:
    """``AB`` is k-proportional to ``A``."""
    v = proportion(np.asarray(a) @ np.asarray(b), a, k, tol)
    return RelVerdict("absorb_right", v.holds, v.witness, v.residual)


def orthogonal(a, b, tol: float = EPS_REL) -> RelVerdict:
    r = float(np.linalg.norm(np.asarray(a) @ np.asarray(b)))
    return RelVerdict("orthogonal", r <= tol, None, r)


def complement(m) -> np.ndarray:
    """Binary measurement with the two outcomes exchanged."""
    m = _binary(m)
    return m[::-1].copy()


def entails(m, n, tol: float = EPS_REL) -> RelVerdict:
    """``N_0 M_1 = 0``."""
    m, n = _binary(m), _binary(n)
    v = orthogonal(n[0], m[1], tol)
    return RelVerdict("entails", v.holds, None, v.residual)


def weaker(m, n, tol: float = EPS_REL) -> RelVerdict:
    """``M_1 N_1`` is 1-proportional to ``N_1``."""
    m, n = _binary(m), _binary(n)
    v = absorb_left(m[1], n[1], 1.0, tol)
    return RelVerdict("weaker", v.holds, v.witness, v.residual)


def contradicts(m, n, tol: float = EPS_REL) -> RelVerdict:
    """``M`` weaker than the complement of ``N``."""
    v = weaker(m, complement(n), tol)
    return RelVerdict("contradicts", v.holds, v.witness, v.residual)


def pseudo_meet(m, n) -> np.ndarray:
    """``K_1 = N_1 M_1`` and ``K_0 = sqrt(M_0^+ M_0 + M_1^+ N_0^+ N_0 M_1)``."""
    m, n = _binary(m), _binary(n)
    k1 = n[1] @ m[1]
    inner = m[0].conj().T @ m[0] + m[1].conj().T @ n[0].conj().T @ n[0] @ m[1]
    return np.stack([psd_sqrt(inner), k1])


def _commutes(a, b, tol):
    r = float(np.linalg.norm(a @ b - b @ a))
    return bool(r <= tol * max(1.0, np.linalg.norm(a) * np.linalg.norm(b))), r


def commute_left(m, n, tol: float = EPS_REL) -> RelVerdict:
    """``M_0`` and ``M_1`` both commute with ``N_1``."""
    m, n = _binary(m), _binary(n)
    h0, r0 = _commutes(m[0], n[1], tol)
    h1, r1 = _commutes(m[1], n[1], tol)
    return RelVerdict("commute_left", h0 and h1, None, max(r0, r1))


def commute_right(m, n, tol: float = EPS_REL) -> RelVerdict:
    """``M_0`` and ``M_1`` both commute with ``N_0``."""
    m, n = _binary(m), _binary(n)
    h0, r0 = _commutes(m[0], n[0], tol)
    h1, r1 = _commutes(m[1], n[0], tol)
    return RelVerdict("commute_right", h0 and h1, None, max(r0, r1))


def is_projective(m, tol: float = EPS_REL) -> bool:
    m = np.asarray(m, dtype=complex)
    return all(
        np.linalg.norm(p @ p - p) <= tol and np.linalg.norm(p.conj().T - p) <= tol for p in m
    )


def is_trivial_true(m, tol: float = EPS_REL) -> bool:
    """Binary measurement whose outcome is certainly 1 (``M_1`` unitary-free: ``M_0 = 0``)."""
    m = _binary(m)
    return bool(np.linalg.norm(m[0]) <= tol and np.linalg.norm(m[1] - np.eye(m.shape[1])) <= tol)


def is_trivial_false(m, tol: float = EPS_REL) -> bool:
    return is_trivial_true(complement(m), tol)


# ---------------------------------------------------------------------------
# decomposition checks


def _pair(x0, y0, x1, y1, tol, name):
    """``x0 = c0 y0``, ``x1 = c1 y1`` with ``|c0|^2 + |c1|^2 = 1``.

    ``y0`` and ``y1`` are the same target operator in every use below.
    """
    target = y0
    nt = np.linalg.norm(target)
    if nt <= tol:
        r = float(max(np.linalg.norm(x0), np.linalg.norm(x1)))
        return RelVerdict(name, r <= tol, None, r)
    p0 = proportional(x0, target, tol)
    p1 = proportional(x1, y1, tol)
    c0 = p0.witness if p0.witness is not None else 0j
    c1 = p1.witness if p1.witness is not None else 0j
    norm_gap = abs(abs(c0) ** 2 + abs(c1) ** 2 - 1)
    holds = p0.holds and p1.holds and norm_gap <= tol
    return RelVerdict(name, holds, complex(c0), max(p0.residual, p1.residual, norm_gap))


def test_decomposition_checks(m, n, k, l, tol: float = EPS_REL) -> dict:
    """Operator conditions for four decompositions of tests along ``M``.

    ``lower_split``:  [N) == [K) <M| |> [L)   iff K0 M0 ~ c0 N0, L0 M1 ~ c1 N0
    ``upper_split``:  (N] == (K] <M| |> (L]   iff K1 M0 ~ c0 N1, L1 M1 ~ c1 N1
    ``lower_absorb``: [N) == [M];[N)          iff N0 M0 ~ c0 N0, N0 M1 ~ c1 N0
    ``upper_absorb``: (N] == [M];(N]          iff N1 M0 ~ c0 N1, N1 M1 ~ c1 N1
    each with |c0|^2 + |c1|^2 = 1.  ``K`` and ``L`` are ignored by the last two.
    """
    m, n, k, l = (_binary(x) for x in (m, n, k, l))
    return {
        "lower_split": _pair(k[0] @ m[0], n[0], l[0] @ m[1], n[0], tol, "lower_split"),
        "upper_split": _pair(k[1] @ m[0], n[1], l[1] @ m[1], n[1], tol, "upper_split"),
        "lower_absorb": _pair(n[0] @ m[0], n[0], n[0] @ m[1], n[0], tol, "lower_absorb"),
        "upper_absorb": _pair(n[1] @ m[0], n[1], n[1] @ m[1], n[1], tol, "upper_absorb"),
    }


test_decomposition_checks.__test__ = False  # not a pytest test despite the name


def merge_split(a, b, tol: float = EPS_REL):
    """Operator ``N`` with ``N rho N^+ = A rho A^+ + B rho B^+`` when A and B are parallel.

    Returns ``None`` when ``A`` and ``B`` are not proportional.
    """
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na <= tol:
        return np.asarray(b, dtype=complex)
    if nb <= tol:
        return np.asarray(a, dtype=complex)
    v = proportional(b, a, tol)
    if not v.holds:
        return None
    t = v.witness
    return np.asarray(a, dtype=complex) * np.sqrt(1 + abs(t) ** 2)
