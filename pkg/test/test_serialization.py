# test/test_serialization.py
"""JSON/CSV 读写：门、张量、线路生成器与文件错误。"""

import csv
import json

import numpy as np
import pytest

from duqc.circuit1d import build_brickwork
from duqc.circuit2d import (KickedIsing2DParams, Lattice2D, build_2d_duqc,
                            honeycomb_mask, kicked_ising_2d_floquet)
from duqc.errors import InvalidParameterError, SerializationError
from duqc.gates import (SWAP, DualUnitaryParams, build_dual_unitary, haar_single,
                        is_dual_unitary, random_dual_unitary)
from duqc.serialization import (circuit1d_from_json, circuit1d_to_json,
                                circuit2d_from_json, circuit2d_to_json,
                                decode_complex_array, dual_params_to_json, encode_complex_array,
                                gate_from_json, gate_to_json, load_circuit, read_json,
                                tensor_from_json, tensor_to_json, write_csv, write_json)
from duqc.solvable_states import random_solvable_tensor


def same_gates(a, b):
    ga, gb = list(a.iter_gates()), list(b.iter_gates())
    assert len(ga) == len(gb)
    for (m1, qa, qb), (m2, ra, rb) in zip(ga, gb):
        assert (qa, qb) == (ra, rb)
        assert np.allclose(m1, m2, atol=1e-12)


def test_complex_encoding():
    m = np.array([[1 + 2j, 0], [0, -1j]])
    data = encode_complex_array(m)
    assert data[0][0] == [1.0, 2.0]
    assert np.array_equal(decode_complex_array(data, (2, 2)), m)
    with pytest.raises(SerializationError):
        decode_complex_array([[1, 2, 3]])
    with pytest.raises(SerializationError):
        decode_complex_array(data, (4, 4))


def test_matrix_gate():
    g = random_dual_unitary(3)
    assert np.allclose(gate_from_json(gate_to_json(g)), g)


def test_dual_params_gate_defaults_to_identity_singles():
    g = gate_from_json({'kind': 'dual_params', 'phi': 0.4})
    assert is_dual_unitary(g)
    with pytest.raises(SerializationError):
        gate_from_json({'kind': 'dual_params', 'phi': 'abc'})


def test_dual_params_json():
    rng = np.random.default_rng(2)
    p = DualUnitaryParams(phi=0.3, alpha=0.7, u1=haar_single(rng), v2=haar_single(rng))
    data = json.loads(json.dumps(dual_params_to_json(p)))
    assert np.allclose(gate_from_json(data), build_dual_unitary(p), atol=1e-12)


def test_dual_params_rejects_non_unitary_single():
    with pytest.raises(InvalidParameterError):
        gate_from_json({'kind': 'dual_params', 'u1': encode_complex_array(2 * np.eye(2))})


@pytest.mark.parametrize("obj", [
    {'kind': 'named', 'family': 'xxz', 'J': 0.3},
    {'kind': 'named', 'family': 'kicked-ising', 'h': 0.7},
])
def test_named_gates_are_dual_unitary(obj):
    assert is_dual_unitary(gate_from_json(obj))


@pytest.mark.parametrize("obj", [
    {},
    {'kind': 'bogus'},
    {'kind': 'named', 'family': 'heisenberg'},
    {'kind': 'matrix', 'matrix': encode_complex_array(np.eye(2))},
    [1, 2],
])
def test_bad_gate_json(obj):
    with pytest.raises(SerializationError):
        gate_from_json(obj)


def test_tensor_json():
    A = random_solvable_tensor(2, seed=1)
    B = tensor_from_json(json.loads(json.dumps(tensor_to_json(A))))
    assert B.chi == 2
    assert np.allclose(A.blocks, B.blocks)
    with pytest.raises(SerializationError):
        tensor_from_json({'chi': 2, 'blocks': {'00': []}})


def test_circuit1d_explicit_layers():
    c = build_brickwork(3, 3, 5)
    back = circuit1d_from_json(json.loads(json.dumps(circuit1d_to_json(c))))
    assert back.depth == 3
    same_gates(c, back)
    assert circuit1d_from_json(circuit1d_to_json(c), depth=2).depth == 2


def test_circuit1d_generators():
    random = circuit1d_from_json({'qubits': 6, 'depth': 4, 'generator': {'kind': 'random', 'seed': 9}})
    same_gates(random, build_brickwork(3, 4, 9))
    uniform = circuit1d_from_json({'qubits': 4, 'generator': {'kind': 'uniform', 'gate': gate_to_json(SWAP)}},
                                  depth=2)
    same_gates(uniform, build_brickwork(2, 2, SWAP))


@pytest.mark.parametrize("obj", [
    {'qubits': 5, 'layers': []},
    {'qubits': 4, 'generator': {'kind': 'random', 'seed': 1}},
    {'qubits': 4, 'depth': 1, 'generator': {'kind': 'spiral'}},
    {'qubits': 4, 'depth': 1, 'layers': [{'tau': 3, 'gates': []}]},
])
def test_bad_circuit1d_json(obj):
    with pytest.raises(SerializationError):
        circuit1d_from_json(obj)


def test_circuit1d_wrong_parity_bond():
    obj = {'qubits': 4, 'layers': [{'tau': 1, 'gates': [{'bond': 1, 'gate': gate_to_json(SWAP)}]}]}
    with pytest.raises(InvalidParameterError):
        circuit1d_from_json(obj)


def test_circuit2d_explicit_layers_with_mask():
    lat = Lattice2D(4, 4, honeycomb_mask(4, 4))
    c = build_2d_duqc(lat, 4, 2, 3)
    data = json.loads(json.dumps(circuit2d_to_json(c)))
    assert data['qubits'] == 16
    back = circuit2d_from_json(data)
    assert back.lattice.edge_mask == lat.edge_mask
    assert [b.role for b in back.blocks] == ['U1', 'U24', 'U3', 'U24']
    same_gates(c, back)


def test_circuit2d_generators():
    lat = Lattice2D(4, 4)
    random = circuit2d_from_json({'rows': 4, 'cols': 4, 'depth': 3, 'generator': {'kind': 'random', 'seed': 6}})
    same_gates(random, build_2d_duqc(lat, 3, 6, 7))
    kicked = circuit2d_from_json({'rows': 4, 'cols': 4, 'generator': {'kind': 'kicked-ising', 'h': 0.2}},
                                 depth=6)
    same_gates(kicked, kicked_ising_2d_floquet(KickedIsing2DParams(h=0.2), 2, lat).truncated(6))


def test_read_json_errors(tmp_path):
    with pytest.raises(SerializationError):
        read_json(str(tmp_path / 'missing.json'))
    bad = tmp_path / 'bad.json'
    bad.write_text('{"kind": ', encoding='utf-8')
    with pytest.raises(SerializationError):
        read_json(str(bad))


def test_load_circuit_dispatches_on_shape(tmp_path):
    path = tmp_path / 'c2.json'
    path.write_text(json.dumps({'rows': 4, 'cols': 2, 'depth': 2,
                                'generator': {'kind': 'random', 'seed': 0}}), encoding='utf-8')
    assert load_circuit(str(path)).lattice.num_qubits == 8
    path = tmp_path / 'c1.json'
    path.write_text(json.dumps({'qubits': 4, 'depth': 2,
                                'generator': {'kind': 'random', 'seed': 0}}), encoding='utf-8')
    assert load_circuit(str(path), 1).depth == 1


def test_writers_create_directories(tmp_path):
    path = tmp_path / 'out' / 'r.json'
    write_json(str(path), {'value': [1.0, 0.0], 'label': '期望值'})
    assert json.loads(path.read_text(encoding='utf-8'))['label'] == '期望值'
    path = tmp_path / 'out' / 'r.csv'
    write_csv(str(path), ['a', 'b'], [[1, 2], [3, 4]])
    with open(path, encoding='utf-8', newline='') as f:
        assert list(csv.reader(f)) == [['a', 'b'], ['1', '2'], ['3', '4']]
