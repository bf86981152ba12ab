"""Constructive generators of measurements that satisfy relation premises.

Each function returns Kraus arrays; the caller registers them in a library.
"""

from __future__ import annotations

import numpy as np

from qlaws.linalg import psd_sqrt, random_measurement, random_projective, random_unitary


def _contraction(d: int, rng, scale: float = 0.9) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * g / np.linalg.norm(g, 2)


def complete_from(m1: np.ndarray, rng=None) -> np.ndarray:
    """Binary measurement with the given ``M_1`` and ``M_0 = V sqrt(I - M_1^+ M_1)``."""
    d = m1.shape[0]
    m0 = psd_sqrt(np.eye(d) - m1.conj().T @ m1, floor=1e-13)
    if rng is not None:
        m0 = random_unitary(d, rng) @ m0
    return np.stack([m0, m1])


def weaker_pair(d: int, rng, projective: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """``(M, N)`` with ``M_1 N_1 = N_1``, i.e. M is weaker than N."""
    v = random_unitary(d, rng)
    k = int(rng.integers(1, d))  # dimension of the subspace Y holding range(N_1)
    py = v[:, :k] @ v[:, :k].conj().T
    pperp = np.eye(d) - py
    if projective:
        # X contains Y
        extra = int(rng.integers(0, d - k))
        px = v[:, :k + extra] @ v[:, :k + extra].conj().T
        return np.stack([np.eye(d) - px, px]), np.stack([np.eye(d) - py, py])
    c = pperp @ _contraction(d, rng) @ pperp
    m1 = py + c
    m = complete_from(m1, rng)
    n1 = py @ _contraction(d, rng, float(rng.uniform(0.3, 0.95)))
    n = complete_from(n1, rng)
    return m, n


def entails_pair(d: int, rng, projective: bool = False):
    """``(M, N)`` with ``N_0 M_1 = 0``."""
    n, m = weaker_pair(d, rng, projective)
    return m, n


def post_pair(d: int, rng, projective: bool = False):
    """``(M, N)`` with ``N_1 M_0`` 1-proportional to ``M_0`` and ``M_0`` far from zero."""
    v = random_unitary(d, rng)
    k = int(rng.integers(1, d))  # rank of M_0
    py = v[:, :k] @ v[:, :k].conj().T
    if projective:
        m = np.stack([py, np.eye(d) - py])
    else:
        w = random_unitary(d, rng)[:, :k]
        s = np.diag(rng.uniform(0.7, 1.0, k))
        m0 = v[:, :k] @ s @ w.conj().T
        m = np.stack([m0, psd_sqrt(np.eye(d) - m0.conj().T @ m0, floor=1e-13)])
    pperp = np.eye(d) - py
    n1 = py + pperp @ _contraction(d, rng) @ pperp
    return m, complete_from(n1, rng)


def ldist_pair(d: int, rng):
    """``(M, N)`` whose operators commute with ``N_0 M_i`` proportional to ``N_0``."""
    v = random_unitary(d, rng)
    s = rng.random(d) < 0.5
    if s.all() or not s.any():
        s[0], s[-1] = True, False
    n0 = np.where(s, rng.uniform(0.2, 1.0, d), 0.0)
    c0 = rng.uniform(0.1, 0.9)
    m0 = np.where(s, c0, rng.uniform(0.0, 1.0, d))
    diag = lambda a: v @ np.diag(a) @ v.conj().T  # noqa: E731
    n = np.stack([diag(n0), diag(np.sqrt(1 - n0 ** 2))])
    m = np.stack([diag(m0), diag(np.sqrt(1 - m0 ** 2))])
    return m, n


def rdist_pair(d: int, rng):
    """``(M, N)`` with ``M_i`` commuting with ``N_0`` and ``N_1 M_i`` proportional to ``N_1``."""
    m, n = ldist_pair(d, rng)
    return m, n[::-1].copy()


def reduce_quad(d: int, rng):
    """``(M, K, L, N)`` with ``[N) == [K) <M|> [L)`` and ``(N] == (K] <M|> (L]``."""
    n = random_measurement(d, 2, rng)
    a, b = rng.uniform(0.2, 0.8, 2)
    e0 = a * n[0].conj().T @ n[0] + b * n[1].conj().T @ n[1]
    r0 = psd_sqrt(e0)
    r1 = psd_sqrt(np.eye(d) - e0)
    m0 = random_unitary(d, rng) @ r0
    m1 = random_unitary(d, rng) @ r1
    i0, i1 = np.linalg.inv(m0), np.linalg.inv(m1)
    k = np.stack([np.sqrt(a) * n[0] @ i0, np.sqrt(b) * n[1] @ i0])
    l_ = np.stack([np.sqrt(1 - a) * n[0] @ i1, np.sqrt(1 - b) * n[1] @ i1])
    return np.stack([m0, m1]), k, l_, n


def basis_measurement(basis_cols: np.ndarray) -> np.ndarray:
    return np.stack([np.outer(basis_cols[:, i], basis_cols[:, i].conj()) for i in range(basis_cols.shape[1])])


def eigen_measurement(psi: np.ndarray, rng, projective: bool | None = None) -> np.ndarray:
    """Binary measurement with ``M_1 psi = psi`` (outcome 1 certain on psi)."""
    d = psi.shape[0]
    p = np.outer(psi, psi.conj())
    if projective or (projective is None and rng.random() < 0.5):
        return np.stack([np.eye(d) - p, p])
    perp = np.eye(d) - p
    c = perp @ _contraction(d, rng) @ perp
    return complete_from(p + c, rng)


def nonprojective(d: int, rng) -> np.ndarray:
    while True:
        m = random_measurement(d, 2, rng)
        if min(np.linalg.norm(x @ x - x) for x in m) > 1e-2:
            return m


def projective(d: int, rng, outcomes: int = 2) -> np.ndarray:
    return random_projective(d, outcomes, rng)
