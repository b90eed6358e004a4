# test/test_compile1d.py
"""SWAP 传送带编译器：长程 CZ、通用嵌入与一维团簇态。"""

import networkx as nx
import numpy as np
import pytest

from duqc.circuit1d import LocalObservable, expectation_oracle, evolve_oracle
from duqc.compile1d import (TargetCircuit, cluster_circuit_1d, cluster_size_to_m,
                            compile_long_range_cz, compile_universal, helix_vertex,
                            meeting_layer, position)
from duqc.errors import InvalidParameterError, UnreachablePairError
from duqc.gates import H, haar_single
from duqc.oracle import assemble_unitary, verify_stabilizers
from duqc.solvable_states import epr_chain

P0 = np.diag([1.0, 0.0])


def cz_diagonal(num_qubits, pairs):
    """以位点编号给出的若干 CZ 的对角矩阵，比特 0 为最高位。"""
    dim = 1 << num_qubits
    diag = np.ones(dim, dtype=complex)
    for i in range(dim):
        for a, b in pairs:
            bit_a = (i >> (num_qubits - a)) & 1
            bit_b = (i >> (num_qubits - b)) & 1
            if bit_a and bit_b:
                diag[i] *= -1
    return np.diag(diag)


def test_swap_conveyor_positions():
    # 右行者每层右移，左行者每层左移，2N 层后回到原位
    assert position(2, 1, 6) == 3
    assert position(1, 1, 6) == 6
    for origin in range(1, 7):
        assert position(origin, 6, 6) == origin


def test_meeting_layer():
    assert meeting_layer(1, 2, 6) == 3
    assert meeting_layer(2, 3, 6) == 1
    assert meeting_layer(3, 2, 6) == 1
    with pytest.raises(UnreachablePairError):
        meeting_layer(1, 3, 6)
    with pytest.raises(UnreachablePairError):
        meeting_layer(2, 2, 6)


@pytest.mark.parametrize("N,a,b", [
    (2, 1, 2), (2, 1, 4), (2, 2, 3),
    (3, 1, 4), (3, 2, 5), (3, 6, 1),
    (4, 1, 8), (4, 3, 6), (4, 2, 7),
])
def test_long_range_cz(N, a, b):
    c = compile_long_range_cz(N, a, b)
    assert c.depth == 2 * N
    U = assemble_unitary(c)
    assert np.allclose(U, cz_diagonal(2 * N, [(a, b)]), atol=1e-10)


def test_parallel_long_range_cz():
    pairs = [(1, 4), (3, 8), (5, 2)]
    c = compile_long_range_cz(4, pairs)
    U = assemble_unitary(c)
    assert np.allclose(U, cz_diagonal(8, pairs), atol=1e-10)


def test_unreachable_pair_is_reported():
    with pytest.raises(UnreachablePairError):
        compile_long_range_cz(3, 1, 3)


def test_duplicate_pair_rejected():
    with pytest.raises(InvalidParameterError):
        compile_long_range_cz(3, [(1, 4), (4, 1)])


def test_site_out_of_range():
    with pytest.raises(InvalidParameterError):
        compile_long_range_cz(2, 1, 6)


def random_target(num_qubits, num_ops, seed):
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(num_ops):
        if num_qubits > 1 and rng.random() < 0.4:
            q = int(rng.integers(num_qubits - 1))
            ops.append(('cz', q, q + 1))
        else:
            ops.append(('u', int(rng.integers(num_qubits)), haar_single(rng)))
    return TargetCircuit(num_qubits, ops)


def test_universal_single_hadamard():
    target = TargetCircuit(1, [('u', 0, H)])
    emb = compile_universal(target)
    obs = LocalObservable(emb.readout_site, (P0,))
    value = expectation_oracle(emb.circuit, epr_chain(emb.circuit.num_cells), obs)
    assert abs(value - 0.5) < 1e-10


@pytest.mark.parametrize("num_qubits,num_ops,seed", [(2, 6, 0), (3, 8, 1), (3, 12, 2)])
def test_universal_embedding_reproduces_readout(num_qubits, num_ops, seed):
    target = random_target(num_qubits, num_ops, seed)
    emb = compile_universal(target)
    assert emb.logical_origins == list(range(1, num_qubits + 1))
    obs = LocalObservable(emb.readout_site, (P0,))
    value = expectation_oracle(emb.circuit, epr_chain(emb.circuit.num_cells), obs)
    assert abs(value - target.readout_value()) < 1e-10


def test_universal_prologue_clears_epr_pairs():
    emb = compile_universal(TargetCircuit(2, []))
    state = evolve_oracle(emb.circuit, epr_chain(emb.circuit.num_cells)).normalized()
    assert abs(abs(state.amplitudes[0]) - 1.0) < 1e-10


def test_target_rejects_long_range_cz():
    with pytest.raises(InvalidParameterError):
        TargetCircuit(3, [('cz', 0, 2)])


def test_universal_needs_enough_cells():
    with pytest.raises(InvalidParameterError):
        compile_universal(TargetCircuit(3, []), N=2)


def test_helix_edges_join_opposite_parity():
    m = 2
    side = 2 * m
    content_of = {helix_vertex(x, m): x for x in range(side * side)}
    assert len(content_of) == side * side
    for u, v in nx.grid_2d_graph(side, side, periodic=True).edges:
        assert (content_of[u] - content_of[v]) % 2 == 1


@pytest.mark.parametrize("m", [1, 2])
def test_cluster_circuit_1d_stabilizers(m):
    cc = cluster_circuit_1d(m)
    assert cc.circuit.num_qubits == (2 * m) ** 2
    assert cc.circuit.depth == cc.circuit.num_cells - m + 1
    state = evolve_oracle(cc.circuit, epr_chain(cc.circuit.num_cells)).normalized()
    results = verify_stabilizers(state, cc.graph, cc.vertex_to_qubit())
    assert all(r.passed for r in results)


def test_cluster_size_to_m():
    assert cluster_size_to_m(4) == 1
    assert cluster_size_to_m(16) == 2
    assert cluster_size_to_m(36) == 3
    for bad in (12, 9, 0):
        with pytest.raises(InvalidParameterError):
            cluster_size_to_m(bad)
