import numpy as np
import pytest

from qlaws.library import Library, swap_matrix

X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_standard_contents(lib):
    for g in ("X", "Y", "Z", "H", "S", "T", "CNOT", "CCX"):
        assert lib.has_gate(g), g
    assert np.allclose(lib.gate_matrix("H", (2,)) @ lib.gate_matrix("H", (2,)), np.eye(2))
    assert lib.outcomes("M", (2, 3)) == 6


def test_swap_matrix():
    s = swap_matrix((2, 2))
    a, b = np.array([1, 2]), np.array([3, 5])
    assert np.allclose(s @ np.kron(a, b), np.kron(b, a))
    with pytest.raises(ValueError):
        swap_matrix((2, 3))


def test_polymorphic_measurements(lib):
    assert np.allclose(lib.kraus("MT", (3,))[1], np.eye(3))
    assert np.allclose(lib.kraus("MF", (2,))[0], np.eye(2))


def test_rejects_bad_entries():
    lib = Library()
    with pytest.raises(ValueError):
        lib.with_gate("A", (2,), np.ones((2, 2)))
    with pytest.raises(ValueError):
        lib.with_meas("B", (2,), np.stack([np.eye(2) * 0.5]))
    with pytest.raises(ValueError):
        lib.with_gate("I", (2,), np.eye(2))
    lib = lib.with_gate("A", (2,), X)
    with pytest.raises(ValueError):
        lib.with_gate("A", (2,), np.eye(2) * 1j)


def test_register_reuses_equal_entries(lib):
    name, same = lib.register_gate(X, (2,))
    assert name == "X" and same is lib
    u = np.diag([1, np.exp(0.3j)])
    n1, lib1 = lib.register_gate(u, (2,))
    n2, lib2 = lib1.register_gate(u, (2,))
    assert n1 == n2 and lib2 is lib1 and n1.startswith("U_")
    assert lib.register_meas(lib.kraus("M", (2,)), (2,))[0] == "M"


def test_json_round_trip_and_extension(lib, tmp_path):
    _, big = lib.register_gate(np.diag([1, 1j * np.exp(0.1j)]), (2,))
    k = np.stack([np.diag([1, 0.6]), np.diag([0, 0.8])]).astype(complex)
    _, big = big.register_meas(k, (2,))
    ext = big.extension_of(lib)
    assert len(ext) == 2
    path = tmp_path / "ext.json"
    ext.dump(path)
    back = Library.load(path)
    assert set(back.gates) == set(ext.gates) and set(back.measurements) == set(ext.measurements)
    for name, g in ext.gates.items():
        assert np.allclose(back.gates[name].matrix, g.matrix)
    assert len(lib.merge(back)) == len(big)
