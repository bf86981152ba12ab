import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qlaws.linalg import random_projective, random_unitary
from qlaws.measrel import (
    absorb_left,
    commute_left,
    complement,
    contradicts,
    entails,
    is_projective,
    is_trivial_false,
    is_trivial_true,
    merge_split,
    orthogonal,
    proportion,
    proportional,
    pseudo_meet,
    test_decomposition_checks as decomposition,
    weaker,
)

P0, P1 = np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)
MZ = np.stack([P0, P1])
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
MX = np.stack([H @ P0 @ H, H @ P1 @ H])
MT = np.stack([np.zeros((2, 2)), np.eye(2)])


def test_proportion():
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    v = proportion(2j * a, a, 2.0)
    assert v and np.isclose(v.witness, 2j)
    assert not proportion(2 * a, a, 1.0)
    assert proportional(3 * a, a) and not proportional(a, a.T)


def test_basic_relations():
    assert orthogonal(P0, P1) and not orthogonal(P0, P0)
    assert absorb_left(P0, P0, 1.0)
    assert np.allclose(complement(MZ), MZ[::-1])
    # M_Z entails itself; the complement contradicts it
    assert entails(MZ, MZ) and contradicts(MZ, complement(MZ))
    assert weaker(MT, MZ) and not weaker(MZ, MT)
    assert not entails(MZ, MX)


def test_commutation():
    assert commute_left(MZ, MZ) and not commute_left(MZ, MX)


def test_trivial_and_projective():
    assert is_trivial_true(MT) and is_trivial_false(MT[::-1]) and not is_trivial_true(MZ)
    assert is_projective(MZ) and not is_projective(np.stack([np.sqrt(0.5) * np.eye(2)] * 2))


def test_pseudo_meet_complete():
    k = pseudo_meet(MZ, MX)
    assert np.allclose(k[0].conj().T @ k[0] + k[1].conj().T @ k[1], np.eye(2))


def test_decomposition_absorb():
    got = decomposition(MZ, MZ, MZ, MZ)
    assert got["lower_absorb"] and got["upper_absorb"]
    assert not decomposition(MX, MZ, MZ, MZ)["lower_absorb"]


def test_merge_split():
    a = np.array([[1, 0], [0, 0.5]])
    n = merge_split(a, 2 * a)
    assert np.allclose(n.conj().T @ n, a.conj().T @ a * 5)
    assert merge_split(P0, P1) is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_projective_measurements_self_consistent(seed, d):
    rng = np.random.default_rng(seed)
    m = random_projective(d, 2, rng)
    assert is_projective(m)
    assert orthogonal(m[0], m[1])
    assert entails(m, m) and commute_left(m, m)
    u = random_unitary(d, rng)
    rotated = np.stack([u @ k @ u.conj().T for k in m])
    assert commute_left(m, rotated).holds == bool(
        np.allclose(m[1] @ rotated[1], rotated[1] @ m[1], atol=1e-8))
