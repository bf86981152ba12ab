"""Dense linear algebra over named registers.

Operators act on tensor products of variables.  A register fixes the order of
the tensor factors; :func:`embed` pads an operator with identities and permutes
wires so that it acts on a larger register.

Quantum operations are stored as stacks of Kraus operators with shape
``(n, d_out, d_in)`` (:class:`Superop`).  The Choi matrix uses the row-major
vectorisation ``vec(K)[a*d_in + i] = K[a, i]`` so that
``choi = sum_k vec(K_k) vec(K_k)^dagger``.  Distances between Choi matrices are
computed in the span of the Kraus vectors, which never needs the full
``(d_out d_in)^2`` matrix.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from qlaws.syntax import Var, reg_dim, reg_dims

# ---------------------------------------------------------------------------
# wire permutations


def embed(op: np.ndarray, src: Sequence[Var], dst: Sequence[Var]) -> np.ndarray:
    """Extend ``op`` acting on ``src`` to the register ``dst``.

    Variables of ``dst`` missing from ``src`` receive the identity and the
    tensor factors are reordered to follow ``dst``.
    """
    src, dst = tuple(src), tuple(dst)
    if src == dst:
        return op
    missing = set(src) - set(dst)
    if missing:
        raise ValueError(f"cannot embed: {sorted(v.name for v in missing)} not in target")
    d_src = reg_dim(src)
    if op.shape != (d_src, d_src):
        raise ValueError(f"operator shape {op.shape} does not match register dimension {d_src}")
    rest = [v for v in dst if v not in src]
    order = list(src) + rest
    full = np.kron(op, np.eye(reg_dim(rest))) if rest else op
    n = len(order)
    pos = {v: i for i, v in enumerate(order)}
    perm = [pos[v] for v in dst]
    dims = list(reg_dims(order))
    t = full.reshape(dims + dims).transpose(perm + [n + p for p in perm])
    d = reg_dim(dst)
    return t.reshape(d, d)


def embed_ket(vec: np.ndarray, src: Sequence[Var], dst: Sequence[Var]) -> np.ndarray:
    """Reorder the tensor factors of a vector on ``src`` to the order ``dst``.

    ``src`` and ``dst`` must contain the same variables.
    """
    src, dst = tuple(src), tuple(dst)
    if set(src) != set(dst):
        raise ValueError("vector reordering needs equal variable sets")
    if src == dst:
        return vec
    pos = {v: i for i, v in enumerate(src)}
    t = vec.reshape(reg_dims(src)).transpose([pos[v] for v in dst])
    return t.reshape(-1)


def embed_kraus(kraus: np.ndarray, src: Sequence[Var], dst: Sequence[Var]) -> np.ndarray:
    return np.stack([embed(k, src, dst) for k in kraus]) if len(kraus) else np.zeros(
        (0, reg_dim(dst), reg_dim(dst)), dtype=complex
    )


def outer(ket: np.ndarray, bra: np.ndarray) -> np.ndarray:
    return np.outer(ket, np.conj(bra))


# ---------------------------------------------------------------------------
# positivity


def is_hermitian(a: np.ndarray, tol: float = 1e-8) -> bool:
    return np.linalg.norm(a - a.conj().T) <= tol * max(1.0, np.linalg.norm(a))


def loewner_leq(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    """``A`` below ``B`` in the Loewner order: B - A positive semidefinite."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("Loewner comparison needs operators of equal shape")
    if not (is_hermitian(a, tol) and is_hermitian(b, tol)):
        raise ValueError("Loewner comparison needs hermitian operators")
    diff = b - a
    diff = (diff + diff.conj().T) / 2
    return bool(np.linalg.eigvalsh(diff)[0] >= -tol)


def psd_sqrt(a: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Square root of a positive semidefinite matrix via eigendecomposition.

    Eigenvalues at or below ``floor`` are treated as exact zeros.
    """
    a = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(a)
    w = np.where(w <= floor, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def completeness_residual(kraus: np.ndarray) -> float:
    """Frobenius distance of sum_i M_i^dagger M_i from the identity."""
    d = kraus.shape[2]
    total = np.einsum("kai,kaj->ij", kraus.conj(), kraus)
    return float(np.linalg.norm(total - np.eye(d)))


def is_unitary(u: np.ndarray, tol: float = 1e-9) -> bool:
    return u.shape[0] == u.shape[1] and np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol


# ---------------------------------------------------------------------------
# quantum operations


class Superop:
    """Completely positive map given by Kraus operators.

    Parameters
    ----------
    kraus:
        Array of shape ``(n, d_out, d_in)``; ``n`` may be zero (the zero map).
    """

    __slots__ = ("kraus",)

    def __init__(self, kraus):
        k = np.asarray(kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3:
            raise ValueError("Kraus operators must form an array of shape (n, d_out, d_in)")
        self.kraus = k

    # -- constructors -----------------------------------------------------
    @classmethod
    def identity(cls, d: int) -> "Superop":
        return cls(np.eye(d, dtype=complex)[None])

    @classmethod
    def zero(cls, d_out: int, d_in: int | None = None) -> "Superop":
        return cls(np.zeros((0, d_out, d_out if d_in is None else d_in), dtype=complex))

    @classmethod
    def unitary(cls, u: np.ndarray) -> "Superop":
        return cls(np.asarray(u, dtype=complex)[None])

    @classmethod
    def from_choi(cls, choi: np.ndarray, d_out: int, d_in: int, tol: float = 1e-14) -> "Superop":
        choi = (choi + choi.conj().T) / 2
        w, v = np.linalg.eigh(choi)
        keep = w > tol * max(1.0, abs(w).max(initial=0.0))
        ops = (v[:, keep] * np.sqrt(w[keep])).T.reshape(-1, d_out, d_in)
        return cls(ops)

    @classmethod
    def from_transfer(cls, t: np.ndarray, d_out: int, d_in: int) -> "Superop":
        return cls.from_choi(transfer_to_choi(t, d_out, d_in), d_out, d_in)

    # -- shape -------------------------------------------------------------
    @property
    def d_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def d_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def rank_bound(self) -> int:
        return self.kraus.shape[0]

    def __repr__(self) -> str:
        return f"Superop(n={self.kraus.shape[0]}, {self.d_out}x{self.d_in})"

    # -- algebra -----------------------------------------------------------
    def then(self, other: "Superop") -> "Superop":
        """``other`` applied after ``self``."""
        return Superop(np.einsum("jab,kbc->jkac", other.kraus, self.kraus).reshape(
            -1, other.d_out, self.d_in))

    def compose(self, other: "Superop") -> "Superop":
        """``self`` applied after ``other`` (function composition)."""
        return other.then(self)

    def __add__(self, other: "Superop") -> "Superop":
        if (self.d_out, self.d_in) != (other.d_out, other.d_in):
            raise ValueError("cannot add quantum operations of different shapes")
        return Superop(np.concatenate([self.kraus, other.kraus]))

    def scale(self, p: float) -> "Superop":
        if p < 0:
            raise ValueError("only nonnegative scalings keep complete positivity")
        return Superop(self.kraus * np.sqrt(p))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return np.einsum("kab,bc,kdc->ad", self.kraus, rho, self.kraus.conj())

    def choi(self) -> np.ndarray:
        vecs = self.kraus.reshape(self.kraus.shape[0], -1)
        return vecs.T @ vecs.conj()

    def transfer(self) -> np.ndarray:
        """Matrix acting on row-major vectorised density operators."""
        n, a, b = self.kraus.shape
        return np.einsum("kai,kbj->abij", self.kraus, self.kraus.conj()).reshape(a * a, b * b)

    def choi_trace(self) -> float:
        """Trace of the Choi matrix, equal to its trace norm for a CP map."""
        return float(np.sum(np.abs(self.kraus) ** 2))

    def compress(self, tol: float = 1e-12) -> "Superop":
        """Equivalent Kraus family with linearly independent operators.

        A dropped operator changes the Choi matrix by its squared norm, so
        operators whose squared norm is below ``tol**2`` or a 1e-14 fraction
        of the largest one are discarded.
        """
        n = self.kraus.shape[0]
        if n <= 1:
            return self
        vecs = self.kraus.reshape(n, -1)
        if n <= vecs.shape[1]:
            # any unitary mix U^+ V of the Kraus vectors is the same map; the
            # eigenvectors of the small Gram matrix make the rows orthogonal
            _, u = np.linalg.eigh(vecs @ vecs.conj().T)
            rows = u.conj().T @ vecs
            energy = np.sum(np.abs(rows) ** 2, axis=1)
        else:
            # more operators than entries: any R with R^+ R = V^+ V will do
            energy, u = np.linalg.eigh(vecs.conj().T @ vecs)
            energy = np.clip(energy, 0.0, None)
            rows = np.sqrt(energy)[:, None] * u.conj().T
        keep = energy > max(tol**2, 1e-14 * float(energy.max(initial=0.0)))
        return Superop(rows[keep].reshape(-1, self.d_out, self.d_in))

    def embed(self, src, dst) -> "Superop":
        return Superop(embed_kraus(self.kraus, src, dst))


def transfer_to_choi(t: np.ndarray, d_out: int, d_in: int) -> np.ndarray:
    return t.reshape(d_out, d_out, d_in, d_in).transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in)


def choi_of(kraus) -> np.ndarray:
    return Superop(kraus).choi()


def apply_superop(s: Superop, rho: np.ndarray) -> np.ndarray:
    return s.apply(rho)


def choi_coords(ops: Sequence[Superop]) -> list[np.ndarray]:
    """Choi matrices of several operations expressed in one orthonormal basis.

    All Choi matrices live in the span of the vectorised Kraus operators.
    With an orthonormal basis ``Q`` of that span, ``Q^dagger C Q`` is an
    isometric image of each Choi matrix, so Frobenius distances, traces and
    linear relations between the small matrices equal those of the originals.
    """
    shapes = {(s.d_out, s.d_in) for s in ops}
    if len(shapes) > 1:
        raise ValueError("Choi comparison needs operations of one shape")
    counts = [s.kraus.shape[0] for s in ops]
    if sum(counts) == 0:
        return [np.zeros((0, 0), dtype=complex) for _ in ops]
    stacked = np.concatenate([s.kraus.reshape(s.kraus.shape[0], s.d_out * s.d_in) for s in ops])
    # Coordinates of every Kraus vector in an orthonormal basis of their span.
    _, r = np.linalg.qr(stacked.T, mode="reduced")
    out = []
    start = 0
    for c in counts:
        block = r[:, start:start + c]
        out.append(block @ block.conj().T)
        start += c
    return out


def choi_distance(a: Superop, b: Superop) -> float:
    """Frobenius distance between the Choi matrices of two operations."""
    ca, cb = choi_coords([a, b])
    return float(np.linalg.norm(ca - cb))


def choi_trace_norm_diff(a: Superop, b: Superop) -> float:
    ca, cb = choi_coords([a, b])
    if ca.size == 0:
        return 0.0
    diff = ca - cb
    return float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def pairwise_choi_distances(ops: Sequence[Superop], others: Sequence[Superop] | None = None) -> np.ndarray:
    """Matrix of Choi distances between ``ops`` and ``others`` (default: ops)."""
    left = list(ops)
    right = left if others is None else list(others)
    coords = choi_coords(left + (right if others is not None else []))
    cl = coords[: len(left)]
    cr = cl if others is None else coords[len(left):]
    out = np.zeros((len(cl), len(cr)))
    for i, x in enumerate(cl):
        for j, y in enumerate(cr):
            out[i, j] = np.linalg.norm(x - y)
    return out


def is_cp_tni(s: Superop, tol: float = 1e-8) -> bool:
    """Trace non-increasing check: sum K^dagger K below the identity."""
    if s.kraus.shape[0] == 0:
        return True
    total = np.einsum("kai,kaj->ij", s.kraus.conj(), s.kraus)
    return loewner_leq(total, np.eye(s.d_in), tol)


# ---------------------------------------------------------------------------
# dilation of measurements


def dilate_measurement(kraus, tol: float = 1e-8) -> np.ndarray:
    """Unitary implementing a measurement with an auxiliary outcome register.

    For Kraus operators ``M_0..M_{n-1}`` on a space of dimension ``d`` the
    result ``U`` acts on ``system (x) aux`` (aux of dimension ``n``, system
    first) and satisfies ``(I (x) <i|) U (|psi> (x) |0>) = M_i |psi>``.
    The columns ``|b, 0>`` hold the isometry ``sum_i M_i (x) |i>``; the other
    columns are an orthonormal basis of its complement.
    """
    kraus = np.asarray(kraus, dtype=complex)
    n, d, _ = kraus.shape
    if completeness_residual(kraus) > tol:
        raise ValueError("measurement violates the completeness equation")
    # iso[(a, i), b] = M_i[a, b]
    iso = kraus.transpose(1, 0, 2).reshape(d * n, d)
    u = np.zeros((d * n, d * n), dtype=complex)
    cols = np.arange(d) * n
    u[:, cols] = iso
    if n > 1:
        comp = scipy.linalg.null_space(iso.conj().T)
        others = np.setdiff1d(np.arange(d * n), cols)
        u[:, others] = comp
    return u


# ---------------------------------------------------------------------------
# random objects


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.array([[np.exp(2j * np.pi * rng.random())]])


def random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_isometry(d_out: int, d_in: int, rng: np.random.Generator) -> np.ndarray:
    return random_unitary(d_out, rng)[:, :d_in]


def random_measurement(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Generic complete measurement with ``n`` outcomes (a random isometry split)."""
    v = random_isometry(d * n, d, rng)
    return v.reshape(n, d, d)


def random_projective(d: int, n: int, rng: np.random.Generator, ranks=None) -> np.ndarray:
    """Projective measurement from a random orthonormal basis split into blocks."""
    if ranks is None:
        cuts = np.sort(rng.choice(np.arange(1, d), size=n - 1, replace=False)) if n > 1 else []
        edges = [0, *cuts, d]
        ranks = [edges[i + 1] - edges[i] for i in range(n)]
    if sum(ranks) != d:
        raise ValueError("block ranks must add up to the dimension")
    u = random_unitary(d, rng)
    out = []
    start = 0
    for r in ranks:
        cols = u[:, start:start + r]
        out.append(cols @ cols.conj().T)
        start += r
    return np.stack(out)
