# test/test_oracle.py
"""稠密态矢量引擎的测试。"""

import networkx as nx
import numpy as np
import pytest

from duqc.errors import CapExceededError, InvalidParameterError, NormalizationError
from duqc.gates import CZ, H, SWAP, X, Y, Z, random_unitary_4
from duqc.oracle import (PauliString, Statevector, apply_single, apply_two_qubit,
                         assemble_unitary, check_cap, cluster_state, evolve,
                         expectation_local, expectation_pauli, product_state,
                         sample_outcomes, verify_stabilizers)

BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return Statevector(n, amps / np.linalg.norm(amps))


def test_default_state_is_all_zero():
    s = Statevector(3)
    assert s.amplitudes[0] == 1
    assert s.norm_sq() == pytest.approx(1.0)


def test_bell_correlations():
    bell = Statevector(2, BELL)
    assert expectation_pauli(bell, PauliString(((0, 'Z'), (1, 'Z')))) == pytest.approx(1.0)
    assert expectation_pauli(bell, PauliString(((0, 'X'), (1, 'X')))) == pytest.approx(1.0)
    assert expectation_pauli(bell, PauliString(((0, 'Y'), (1, 'Y')))) == pytest.approx(-1.0)
    assert abs(expectation_local(bell, {0: Z})) < 1e-12


def test_qubit_zero_is_most_significant():
    s = Statevector(2)
    apply_single(s, X, 1)
    assert s.amplitudes[1] == pytest.approx(1.0)
    apply_two_qubit(s, SWAP, 0, 1)
    assert s.amplitudes[2] == pytest.approx(1.0)


def test_two_qubit_gate_matches_kron():
    rng = np.random.default_rng(0)
    g = random_unitary_4(rng)
    psi = random_state(3, 1)
    expected = np.kron(np.eye(2), g) @ psi.amplitudes
    apply_two_qubit(psi, g, 1, 2)
    assert np.allclose(psi.amplitudes, expected)


def test_gate_order_follows_first_qubit():
    g = random_unitary_4(5)
    a = random_state(2, 2)
    b = a.copy()
    apply_two_qubit(a, g, 1, 0)
    expected = SWAP @ g @ SWAP @ b.amplitudes
    assert np.allclose(a.amplitudes, expected)


@pytest.mark.parametrize("seed", range(5))
def test_relabeling_commutes_with_gates(seed):
    rng = np.random.default_rng(seed)
    n = 4
    perm = list(rng.permutation(n))
    psi = random_state(n, seed)
    g = random_unitary_4(rng)
    relabeled = psi.relabeled(perm)
    apply_two_qubit(relabeled, g, perm[0], perm[2])
    apply_two_qubit(psi, g, 0, 2)
    direct = psi.relabeled(perm).canonical()
    assert np.allclose(relabeled.canonical().amplitudes, direct.amplitudes)


@pytest.mark.parametrize("seed", range(5))
def test_pauli_expectation_matches_local(seed):
    psi = random_state(4, seed)
    labels = {0: 'X', 2: 'Y', 3: 'Z'}
    mats = {'X': X, 'Y': Y, 'Z': Z}
    direct = expectation_local(psi, {q: mats[p] for q, p in labels.items()})
    assert expectation_pauli(psi, PauliString.from_dict(labels)) == pytest.approx(direct)


def test_pauli_string_rejects_duplicates():
    with pytest.raises(InvalidParameterError):
        PauliString(((0, 'X'), (0, 'Z')))


def test_pauli_requires_normalized_state():
    s = Statevector(1, np.array([2.0, 0.0]))
    with pytest.raises(NormalizationError):
        expectation_pauli(s, PauliString(((0, 'Z'),)))


def test_local_expectation_normalizes():
    s = Statevector(1, np.array([3.0, 0.0]))
    assert expectation_local(s, {0: Z}) == pytest.approx(1.0)


def test_ring_cluster_state_stabilizers():
    graph = nx.cycle_graph(5)
    state = cluster_state(graph)
    results = verify_stabilizers(state, graph)
    assert all(r.passed for r in results)


def test_wrong_graph_fails_stabilizers():
    state = cluster_state(nx.cycle_graph(4))
    results = verify_stabilizers(state, nx.path_graph(4))
    assert not all(r.passed for r in results)


def test_check_cap():
    check_cap(4, 4)
    with pytest.raises(CapExceededError) as err:
        check_cap(5, 4)
    assert err.value.exit_code == 4


def test_sampling_is_reproducible_and_respects_support():
    plus = np.array([1, 1]) / np.sqrt(2)
    state = product_state([plus, np.array([1, 0])])
    a = sample_outcomes(state, 200, seed=9)
    b = sample_outcomes(state, 200, seed=9)
    assert a == b
    assert all(s[1] == '0' for s in a)
    assert {s[0] for s in a} == {'0', '1'}


def test_zero_shots():
    assert sample_outcomes(Statevector(2), 0, seed=1) == []


def test_sampling_frequencies():
    amps = np.sqrt(np.array([0.1, 0.2, 0.3, 0.4]))
    state = Statevector(2, amps)
    shots = 20000
    samples = sample_outcomes(state, shots, seed=4)
    for idx, p in enumerate([0.1, 0.2, 0.3, 0.4]):
        freq = samples.count(format(idx, '02b')) / shots
        sigma = np.sqrt(p * (1 - p) / shots)
        assert abs(freq - p) < 5 * sigma


def test_dump_and_load(tmp_path):
    psi = random_state(3, 0).relabeled([2, 0, 1])
    path = str(tmp_path / 'state.bin')
    psi.dump(path)
    loaded = Statevector.load(path)
    assert loaded.site_order == psi.site_order
    assert np.allclose(loaded.amplitudes, psi.amplitudes)


class _TwoGates:
    num_qubits = 2

    def iter_gates(self):
        yield np.kron(H, np.eye(2)), 0, 1
        yield CZ, 0, 1


def test_assemble_unitary():
    u = assemble_unitary(_TwoGates())
    assert np.allclose(u, CZ @ np.kron(H, np.eye(2)))


def test_evolve_applies_in_order():
    s = evolve(Statevector(2), [(np.kron(H, H), 0, 1), (CZ, 0, 1)])
    expected = CZ @ np.kron(H, H) @ np.array([1, 0, 0, 0])
    assert np.allclose(s.amplitudes, expected)
