# duqc/serialization.py
"""门、张量、线路与结果的 JSON/CSV 读写。

复数统一写成 [re, im]；矩阵按行优先嵌套。
"""

import csv
import json
import logging
import os
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .circuit1d import CircuitSchedule1D, build_brickwork
from .circuit2d import (Block2D, CircuitSchedule2D, Lattice2D, Layer2D,
                        KickedIsing2DParams, build_2d_duqc, kicked_ising_2d_floquet)
from .errors import SerializationError
from .gates import (DualUnitaryParams, GateFamily, NamedGateParams,
                    build_dual_unitary, named_gate)
from .solvable_states import PERIODIC, SolvableTensor

logger = logging.getLogger(__name__)

CELL_KEYS = ('00', '01', '10', '11')


def encode_complex_array(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def decode_complex_array(data, shape: Optional[tuple] = None) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
        if arr.shape[-1] != 2:
            raise ValueError("最后一维必须是 [re, im]")
        out = arr[..., 0] + 1j * arr[..., 1]
    except (TypeError, ValueError, IndexError) as e:
        raise SerializationError(f"无法解析复数数组: {e}")
    if shape is not None and out.shape != shape:
        raise SerializationError(f"数组形状应为 {shape}，实际为 {out.shape}")
    return out


def _require(obj: Dict, *keys: str) -> List[Any]:
    if not isinstance(obj, dict):
        raise SerializationError(f"期望 JSON 对象，得到 {type(obj).__name__}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise SerializationError(f"缺少字段: {', '.join(missing)}")
    return [obj[k] for k in keys]


def gate_to_json(g: np.ndarray) -> Dict:
    return {'kind': 'matrix', 'matrix': encode_complex_array(g)}


def dual_params_to_json(p: DualUnitaryParams) -> Dict:
    return {
        'kind': 'dual_params', 'phi': p.phi, 'alpha': p.alpha,
        **{name: encode_complex_array(m) for name, m in zip(('u1', 'u2', 'v1', 'v2'), p.singles())},
    }


def gate_from_json(obj: Dict) -> np.ndarray:
    """解析门 JSON：matrix、dual_params 或 named。

    Raises:
        SerializationError: 结构非法
        InvalidParameterError: 参数非法（例如单比特门不是幺正的）
    """
    kind, = _require(obj, 'kind')
    if kind == 'matrix':
        matrix, = _require(obj, 'matrix')
        return decode_complex_array(matrix, (4, 4))
    if kind == 'dual_params':
        singles = {}
        for name in ('u1', 'u2', 'v1', 'v2'):
            singles[name] = (decode_complex_array(obj[name], (2, 2)) if name in obj
                             else np.eye(2, dtype=complex))
        try:
            phi, alpha = float(obj.get('phi', 0.0)), float(obj.get('alpha', 0.0))
        except (TypeError, ValueError):
            raise SerializationError("phi/alpha 必须为实数")
        return build_dual_unitary(DualUnitaryParams(phi=phi, alpha=alpha, **singles))
    if kind == 'named':
        family, = _require(obj, 'family')
        try:
            family = GateFamily(family)
        except ValueError:
            raise SerializationError(f"未知的门族: {family}")
        return named_gate(NamedGateParams(family, float(obj.get('J', 0.0)), float(obj.get('h', 0.0))))
    raise SerializationError(f"未知的门类型: {kind}")


def tensor_to_json(A: SolvableTensor) -> Dict:
    cb = A.cell_blocks()
    return {'chi': A.chi, 'blocks': {key: encode_complex_array(cb[c]) for c, key in enumerate(CELL_KEYS)}}


def tensor_from_json(obj: Dict) -> SolvableTensor:
    chi, blocks = _require(obj, 'chi', 'blocks')
    try:
        chi = int(chi)
    except (TypeError, ValueError):
        raise SerializationError(f"chi 必须为整数: {chi}")
    _require(blocks, *CELL_KEYS)
    cb = np.stack([decode_complex_array(blocks[key], (chi, chi)) for key in CELL_KEYS])
    return SolvableTensor(cb.reshape(2, 2, chi, chi))


def circuit1d_to_json(c: CircuitSchedule1D) -> Dict:
    """显式展开所有门；惰性线路会被逐门生成。"""
    layers = []
    for tau in range(1, c.depth + 1):
        layers.append({'tau': tau, 'gates': [{'bond': site, 'gate': gate_to_json(g)}
                                             for site, g in c.layer(tau).items()]})
    return {'qubits': c.num_qubits, 'boundary': c.boundary, 'depth': c.depth, 'layers': layers}


def circuit1d_from_json(obj: Dict, depth: Optional[int] = None) -> CircuitSchedule1D:
    """解析一维线路。

    除显式的 layers 之外，也接受 {"generator": {"kind": "random", "seed": s}}
    或 {"generator": {"kind": "uniform", "gate": <门>}}，此时需要 depth。

    Args:
        obj: 线路 JSON
        depth: 覆盖 JSON 中的 depth（用于命令行 --t）

    Returns:
        CircuitSchedule1D
    """
    qubits, = _require(obj, 'qubits')
    qubits = int(qubits)
    if qubits < 2 or qubits % 2:
        raise SerializationError(f"qubits 必须为正偶数: {qubits}")
    boundary = obj.get('boundary', PERIODIC)
    N = qubits // 2
    if 'generator' in obj:
        gen = obj['generator']
        kind, = _require(gen, 'kind')
        t = depth if depth is not None else obj.get('depth')
        if t is None:
            raise SerializationError("生成式线路需要 depth")
        if kind == 'random':
            seed, = _require(gen, 'seed')
            return build_brickwork(N, int(t), int(seed), boundary)
        if kind == 'uniform':
            gate, = _require(gen, 'gate')
            return build_brickwork(N, int(t), gate_from_json(gate), boundary)
        raise SerializationError(f"未知的线路生成器: {kind}")
    layers_json, = _require(obj, 'layers')
    total = max([int(layer.get('tau', i + 1)) for i, layer in enumerate(layers_json)] + [0])
    total = int(obj.get('depth', total))
    layers: List[Dict[int, np.ndarray]] = [{} for _ in range(total)]
    for i, layer in enumerate(layers_json):
        tau = int(layer.get('tau', i + 1))
        if not 1 <= tau <= total:
            raise SerializationError(f"层号 {tau} 超出 [1, {total}]")
        for entry in layer.get('gates', []):
            bond, gate = _require(entry, 'bond', 'gate')
            layers[tau - 1][int(bond)] = gate_from_json(gate)
    c = CircuitSchedule1D(N, total, boundary, layers=layers)
    if depth is not None:
        c = c.truncated(depth)
    return c


def circuit2d_to_json(c: CircuitSchedule2D) -> Dict:
    lat = c.lattice
    blocks = []
    for tau, block in enumerate(c.blocks, start=1):
        subs = []
        for layer in block.sublayers:
            gates = [{'bond': {'from': list(site), 'to': list(lat.partner(layer.role, site))},
                      'gate': gate_to_json(g)} for site, g in layer.gates.items()]
            subs.append({'role': layer.role, 'gates': gates})
        blocks.append({'tau': tau, 'role': block.role, 'layers': subs})
    mask = [[list(site), list(lat.partner('U2', site))] for site in sorted(lat.edge_mask)]
    return {'rows': lat.rows, 'cols': lat.cols, 'qubits': lat.num_qubits,
            'boundary': PERIODIC, 'edge_mask': mask, 'layers': blocks}


def circuit2d_from_json(obj: Dict, depth: Optional[int] = None) -> CircuitSchedule2D:
    """解析二维线路；也接受 random 与 kicked-ising 两种生成器。"""
    rows, cols = _require(obj, 'rows', 'cols')
    mask = [tuple(tuple(s) for s in edge) for edge in obj.get('edge_mask', [])]
    lat = Lattice2D(int(rows), int(cols), frozenset(mask))
    if 'generator' in obj:
        gen = obj['generator']
        kind, = _require(gen, 'kind')
        t = depth if depth is not None else obj.get('depth')
        if t is None:
            raise SerializationError("生成式线路需要 depth")
        if kind == 'random':
            seed, = _require(gen, 'seed')
            u24 = gen.get('u24_seed', int(seed) + 1)
            return build_2d_duqc(lat, int(t), int(seed), None if u24 is None else int(u24))
        if kind == 'kicked-ising':
            p = KickedIsing2DParams(J=float(gen.get('J', np.pi / 4)), h=float(gen.get('h', 0.0)),
                                    b=float(gen.get('b', np.pi / 4)),
                                    J_k=None if gen.get('J_k') is None else float(gen['J_k']))
            periods = -(-int(t) // 4)
            return kicked_ising_2d_floquet(p, periods, lat).truncated(int(t))
        raise SerializationError(f"未知的线路生成器: {kind}")
    blocks_json, = _require(obj, 'layers')
    blocks = []
    for entry in blocks_json:
        role, subs_json = _require(entry, 'role', 'layers')
        subs = []
        for sub in subs_json:
            sub_role, = _require(sub, 'role')
            gates = {}
            for g in sub.get('gates', []):
                bond, gate = _require(g, 'bond', 'gate')
                start, = _require(bond, 'from')
                gates[tuple(int(x) for x in start)] = gate_from_json(gate)
            subs.append(Layer2D(sub_role, gates))
        blocks.append(Block2D(role, subs))
    c = CircuitSchedule2D(lat, blocks)
    return c if depth is None else c.truncated(depth)


def is_2d(obj: Dict) -> bool:
    return isinstance(obj, dict) and 'rows' in obj and 'cols' in obj


def read_json(path: str) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise SerializationError(f"文件不存在: {path}")
    except json.JSONDecodeError as e:
        raise SerializationError(f"JSON 格式错误 {path}: {e}")


def write_json(path: Optional[str], data: Any):
    """写入 JSON；path 为 None 时打印到标准输出。"""
    text = json.dumps(data, ensure_ascii=False, indent=2)
    if path is None:
        print(text)
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text + '\n')
    logger.info(f"已写入 {path}")


def write_csv(path: Optional[str], header: Sequence[str], rows: Iterable[Sequence]):
    if path is None:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
        return
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"已写入 {path}")


def load_circuit(path: str, depth: Optional[int] = None) -> Union[CircuitSchedule1D, CircuitSchedule2D]:
    obj = read_json(path)
    if is_2d(obj):
        return circuit2d_from_json(obj, depth)
    return circuit1d_from_json(obj, depth)


def load_tensor(path: str) -> SolvableTensor:
    return tensor_from_json(read_json(path))
