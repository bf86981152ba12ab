import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlaws.linalg import (
    Superop,
    choi_distance,
    choi_of,
    completeness_residual,
    dilate_measurement,
    embed,
    embed_ket,
    is_cp_tni,
    is_unitary,
    loewner_leq,
    psd_sqrt,
    random_density,
    random_measurement,
    random_projective,
    random_unitary,
)
from qlaws.syntax import Var

q, r, c = Var("q"), Var("r"), Var("c", 3)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)

seeds = st.integers(0, 2**32 - 1)


def test_embed_is_kron_with_identity():
    assert np.allclose(embed(X, (q,), (q, r)), np.kron(X, np.eye(2)))
    assert np.allclose(embed(X, (q,), (r, q)), np.kron(np.eye(2), X))
    assert np.allclose(embed(X, (q,), (c, q)), np.kron(np.eye(3), X))


def test_embed_reorders_factors():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    assert np.allclose(embed(np.kron(a, b), (q, c), (c, q)), np.kron(b, a))
    with pytest.raises(ValueError):
        embed(X, (q,), (r,))


def test_embed_ket_reorders():
    a, b = np.array([1, 2]), np.array([3, 4, 5])
    assert np.allclose(embed_ket(np.kron(a, b), (q, c), (c, q)), np.kron(b, a))


def test_psd_sqrt_squares_back():
    rho = random_density(5, np.random.default_rng(1), rank=2)
    s = psd_sqrt(rho)
    assert np.allclose(s @ s, rho) and np.allclose(s, s.conj().T)
    assert np.linalg.eigvalsh(s).min() > -1e-12


def test_loewner():
    assert loewner_leq(np.diag([0.2, 0.5]), np.eye(2))
    assert not loewner_leq(np.diag([1.2, 0.5]), np.eye(2))


def test_choi_of_identity_is_max_entangled():
    phi = np.eye(2).reshape(-1)
    assert np.allclose(Superop.identity(2).choi(), np.outer(phi, phi))
    assert np.allclose(choi_of([np.eye(2)]), np.outer(phi, phi))


def test_choi_distance_known_value():
    # ||vec X vec X^+ - vec Z vec Z^+||_F = sqrt(2 * 2^2) since <vec X, vec Z> = 0
    assert np.isclose(choi_distance(Superop.unitary(X), Superop.unitary(Z)), np.sqrt(8))
    # global phase is invisible
    assert choi_distance(Superop.unitary(X), Superop.unitary(1j * X)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 5), st.integers(1, 3))
def test_choi_distance_matches_dense(seed, d, n):
    rng = np.random.default_rng(seed)
    a = Superop(random_measurement(d, n, rng))
    b = Superop(random_measurement(d, n + 1, rng))
    assert np.isclose(choi_distance(a, b), np.linalg.norm(a.choi() - b.choi()), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4))
def test_superop_composition_matches_matrices(seed, d):
    rng = np.random.default_rng(seed)
    u, v = random_unitary(d, rng), random_unitary(d, rng)
    rho = random_density(d, rng)
    got = Superop.unitary(u).then(Superop.unitary(v)).apply(rho)
    assert np.allclose(got, v @ u @ rho @ u.conj().T @ v.conj().T)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4), st.integers(1, 4))
def test_random_measurements_complete(seed, d, n):
    rng = np.random.default_rng(seed)
    k = random_measurement(d, n, rng)
    assert completeness_residual(k) < 1e-10
    assert is_cp_tni(Superop(k))
    p = random_projective(d, min(n, d), rng)
    for i in range(len(p)):
        assert np.allclose(p[i] @ p[i], p[i])


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4), st.integers(1, 4))
def test_dilation_reproduces_branches(seed, d, n):
    rng = np.random.default_rng(seed)
    k = random_measurement(d, n, rng)
    u = dilate_measurement(k)
    assert is_unitary(u, 1e-10)
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    out = (u @ np.kron(psi, np.eye(n)[0])).reshape(d, n)
    for i in range(n):
        assert np.allclose(out[:, i], k[i] @ psi)


def test_dilation_rejects_incomplete():
    with pytest.raises(ValueError):
        dilate_measurement(np.stack([np.eye(2) * 0.5]))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4), st.integers(1, 40))
def test_compress_keeps_choi(seed, d, n):
    # n above d*d exercises the wide branch; rank-deficient stacks shrink to their rank
    rng = np.random.default_rng(seed)
    base = random_measurement(d, min(n, 3), rng)
    mix = rng.normal(size=(n, len(base))) + 1j * rng.normal(size=(n, len(base)))
    s = Superop(np.einsum("nk,kab->nab", mix, base))
    c = s.compress()
    assert np.allclose(c.choi(), s.choi(), atol=1e-10)
    assert c.kraus.shape[0] <= min(n, len(base))
