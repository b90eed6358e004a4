# duqc/compile1d.py
"""一维对偶幺正线路的构造性编译器。

全部基于 SWAP 传送带：全 SWAP 砖墙中，初始位于偶数位点的比特
（右行者）每层右移一格，初始位于奇数位点的比特（左行者）每层左移一格，
右行者总是所在键的左端。右行者 p 与左行者 q 在第
L = (((q − p) mod 2N) + 1)/2 层首次同处一个键，此后每 N 层相遇一次；
2N 层后所有比特回到原位。把相遇处的 SWAP 换成 SWAP·CZ^α·(v1⊗v2)
即可在传送带上实现任意近邻门。
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from .circuit1d import CircuitSchedule1D
from .errors import InvalidParameterError, UnreachablePairError
from .gates import CZ, H, I2, SWAP, DualUnitaryParams, build_dual_unitary
from .oracle import Statevector, apply_single, apply_two_qubit, expectation_local

logger = logging.getLogger(__name__)

SWAP_CZ = SWAP @ CZ
# 把 EPR 对 (|00⟩+|11⟩)/√2 变为 |00⟩
H_H_SWAP_CZ_IH = build_dual_unitary(DualUnitaryParams(alpha=1.0, u1=H, u2=H, v1=I2, v2=H))


def is_right_mover(origin: int) -> bool:
    return origin % 2 == 0


def position(origin: int, layers: int, num_sites: int) -> int:
    """初始位于 origin 的比特经过 layers 层 SWAP 之后所在的位点。"""
    step = layers if is_right_mover(origin) else -layers
    return ((origin - 1 + step) % num_sites) + 1


def meeting_layer(a: int, b: int, num_sites: int) -> int:
    """a、b 两个初始位点在传送带上首次相遇的层号（1..N）。

    Raises:
        UnreachablePairError: 同奇偶的位点永不相遇
    """
    if a == b:
        raise UnreachablePairError(f"位点 {a} 不能与自身作用")
    if a % 2 == b % 2:
        raise UnreachablePairError(f"位点 {a} 与 {b} 奇偶相同，在 SWAP 传送带上永不相遇")
    p, q = (a, b) if is_right_mover(a) else (b, a)
    d = (q - p) % num_sites
    return (d + 1) // 2


def _bond_of(origin: int, layer: int, num_sites: int) -> int:
    """第 layer 层时 origin 所在键的左端位点。"""
    pos = position(origin, layer - 1, num_sites)
    return pos if is_right_mover(origin) else ((pos - 2) % num_sites) + 1


def _swap_layers(N: int, depth: int) -> List[Dict[int, np.ndarray]]:
    n = 2 * N
    layers = []
    for tau in range(1, depth + 1):
        start = 2 if tau % 2 == 1 else 1
        layers.append({s: SWAP for s in range(start, n + 1, 2)})
    return layers


def _check_site(N: int, site: int):
    if not 1 <= site <= 2 * N:
        raise InvalidParameterError(f"位点 {site} 超出 [1, {2 * N}]")


def compile_long_range_cz(N: int, a, b: Optional[int] = None) -> CircuitSchedule1D:
    """用 2N 层 SWAP 传送带实现 CZ_{a,b}（可并行多对）。

    Args:
        N: 元胞数
        a: 位点，或 [(a, b), ...] 形式的多对位点
        b: 第二个位点（a 为单个位点时）

    Returns:
        2N 层的周期线路，总幺正等于目标 CZ 的乘积
    """
    if N < 1:
        raise InvalidParameterError("N 至少为 1")
    pairs = [(a, b)] if b is not None else [tuple(p) for p in a]
    n = 2 * N
    layers = _swap_layers(N, n)
    touched = set()
    for x, y in pairs:
        _check_site(N, x)
        _check_site(N, y)
        key = frozenset((x, y))
        if key in touched:
            raise InvalidParameterError(f"CZ({x}, {y}) 重复")
        touched.add(key)
        L = meeting_layer(x, y, n)
        site = _bond_of(x, L, n)
        layers[L - 1][site] = SWAP_CZ
        logger.debug(f"CZ({x}, {y}) 安排在第 {L} 层键 {site}")
    return CircuitSchedule1D(N, n, layers=layers)


@dataclass
class TargetCircuit:
    """n 比特目标线路：初态 |0…0⟩，ops 为 ('u', q, 2×2) 或 ('cz', q, q+1)。"""

    num_qubits: int
    ops: List[Tuple] = field(default_factory=list)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise InvalidParameterError("目标线路至少需要 1 个比特")
        for op in self.ops:
            kind = op[0]
            if kind == 'u':
                q, m = op[1], np.asarray(op[2], dtype=complex)
                if not 0 <= q < self.num_qubits or m.shape != (2, 2):
                    raise InvalidParameterError(f"非法的单比特门: {op[:2]}")
            elif kind == 'cz':
                q1, q2 = sorted(op[1:3])
                if q1 < 0 or q2 >= self.num_qubits:
                    raise InvalidParameterError(f"CZ 比特越界: {op}")
                if q2 - q1 != 1:
                    raise InvalidParameterError(f"目标线路只允许近邻 CZ，得到 {op}")
            else:
                raise InvalidParameterError(f"未知的操作类型: {kind}")

    def readout_value(self) -> float:
        """直接模拟得到的 c_n = ⟨ψ|(I+Z_0)/2|ψ⟩。"""
        state = Statevector(self.num_qubits)
        for op in self.ops:
            if op[0] == 'u':
                apply_single(state, op[2], op[1])
            else:
                apply_two_qubit(state, CZ, op[1], op[2])
        return float(expectation_local(state, {0: np.array([[1, 0], [0, 0]])}).real)


@dataclass
class UniversalEmbedding:
    circuit: CircuitSchedule1D
    readout_site: int
    logical_origins: List[int]


def compile_universal(target: TargetCircuit, N: Optional[int] = None) -> UniversalEmbedding:
    """把近邻 CZ + 单比特门线路嵌入到以 EPR 链为初态的周期对偶幺正线路中。

    前 N−1 层为 SWAP；第 N 层所有 EPR 对恰好同处一个键，用
    (H⊗H)·SWAP·CZ·(I⊗H) 把每一对变成 |00⟩。之后逻辑比特 j 由初始位于
    位点 j+1 的比特承载（左右行者交替），单比特门并入其下一次经过的门的
    v 槽，CZ 安排在两者下一次相遇的门上。

    Args:
        target: 目标线路
        N: 元胞数，默认取 max(target.num_qubits, 2)

    Returns:
        UniversalEmbedding：线路、读出位点以及逻辑比特的初始位点
    """
    n_logical = target.num_qubits
    N = max(n_logical, 2) if N is None else N
    if n_logical > N:
        raise InvalidParameterError(f"逻辑比特数 {n_logical} 超过 N={N}")
    n = 2 * N
    origins = [j + 1 for j in range(n_logical)]
    cursor = [N + 1] * n_logical
    # (layer, bond) -> 参数；未出现的键为 SWAP
    slots: Dict[Tuple[int, int], Dict] = {}

    def slot(layer: int, bond: int) -> Dict:
        return slots.setdefault((layer, bond), {'alpha': 0.0, 'v1': I2.copy(), 'v2': I2.copy()})

    for op in target.ops:
        if op[0] == 'u':
            q, m = op[1], np.asarray(op[2], dtype=complex)
            o = origins[q]
            layer = cursor[q]
            s = slot(layer, _bond_of(o, layer, n))
            key = 'v1' if is_right_mover(o) else 'v2'
            s[key] = m @ s[key]
        else:
            q1, q2 = op[1], op[2]
            o1, o2 = origins[q1], origins[q2]
            first = meeting_layer(o1, o2, n)
            start = max(cursor[q1], cursor[q2])
            layer = first + max(0, -(-(start - first) // N)) * N
            s = slot(layer, _bond_of(o1, layer, n))
            if s['alpha']:
                raise InvalidParameterError(f"第 {layer} 层同一个键上出现两次 CZ")
            s['alpha'] = 1.0
            cursor[q1] = cursor[q2] = layer + 1

    depth = max([N] + [layer for layer, _ in slots])
    layers = _swap_layers(N, depth)
    prologue = H_H_SWAP_CZ_IH
    for site in list(layers[N - 1]):
        layers[N - 1][site] = prologue
    for (layer, bond), s in slots.items():
        params = DualUnitaryParams(alpha=s['alpha'], v1=s['v1'], v2=s['v2'])
        layers[layer - 1][bond] = build_dual_unitary(params)
    readout = position(origins[0], depth, n)
    logger.info(f"通用嵌入: {n_logical} 个逻辑比特, 2N={n}, 深度 {depth}, 读出位点 {readout}")
    return UniversalEmbedding(CircuitSchedule1D(N, depth, layers=layers), readout, origins)


@dataclass
class ClusterCircuit1D:
    """一维团簇态线路以及末态位点到 2m×2m 格点顶点的映射。"""

    circuit: CircuitSchedule1D
    m: int
    graph: nx.Graph
    site_to_vertex: Dict[int, Tuple[int, int]]

    def vertex_to_qubit(self) -> Dict[Tuple[int, int], int]:
        return {v: s - 1 for s, v in self.site_to_vertex.items()}


def helix_vertex(x: int, m: int) -> Tuple[int, int]:
    """比特 x（初始位点 x+1）对应的格点顶点 (r, c)。

    按螺旋方式编号使所有环面边连接奇偶相反的比特。
    """
    side = 2 * m
    r = x // side
    c = (x % side - r) % side
    return r, c


def cluster_circuit_1d(m: int) -> ClusterCircuit1D:
    """在 2N = (2m)² 个比特的 EPR 链上制备 2m×2m 周期方格团簇态。

    第 1 层：每个键上 SWAP·CZ^a·(H⊗I)，H 把每个 EPR 对变成两顶点图态，
    a=1 当且仅当该键上的两个比特在格点上相邻；之后在每条环面边两端
    首次相遇的层放置 SWAP·CZ，其余为 SWAP。深度 N − m + 1。

    Args:
        m: 格点边长的一半

    Returns:
        ClusterCircuit1D
    """
    if m < 1:
        raise InvalidParameterError(f"m 至少为 1，实际为 {m}")
    side = 2 * m
    n = side * side
    N = n // 2
    depth = N - m + 1
    graph = nx.grid_2d_graph(side, side, periodic=True)
    vertex_of = {x: helix_vertex(x, m) for x in range(n)}
    content_of = {v: x for x, v in vertex_of.items()}
    epr_pairs = {frozenset((x, x + 1)) for x in range(0, n, 2)}

    layers = _swap_layers(N, depth)
    first = layers[0]
    h_left = build_dual_unitary(DualUnitaryParams(alpha=0.0, v1=H))
    h_left_cz = build_dual_unitary(DualUnitaryParams(alpha=1.0, v1=H))
    for site in first:
        first[site] = h_left

    for u, v in graph.edges:
        x, y = content_of[u], content_of[v]
        if frozenset((x, y)) in epr_pairs:
            continue
        L = meeting_layer(x + 1, y + 1, n)
        if L > depth:
            raise InvalidParameterError(f"边 {u}-{v} 在第 {L} 层才相遇，超过深度 {depth}")
        bond = _bond_of(x + 1, L, n)
        layers[L - 1][bond] = h_left_cz if L == 1 else SWAP_CZ
    site_to_vertex = {position(x + 1, depth, n): vertex_of[x] for x in range(n)}
    logger.info(f"一维团簇线路: m={m}, {n} 个比特, 深度 {depth}")
    return ClusterCircuit1D(CircuitSchedule1D(N, depth, layers=layers), m, graph, site_to_vertex)


def cluster_size_to_m(num_qubits: int) -> int:
    """2N = (2m)² 时返回 m，否则报错。"""
    side = int(round(np.sqrt(num_qubits)))
    if side * side != num_qubits or side % 2 != 0 or side == 0:
        raise InvalidParameterError(f"{num_qubits} 不是偶数的完全平方 (2m)²")
    return side // 2
