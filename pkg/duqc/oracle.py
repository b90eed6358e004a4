# duqc/oracle.py
"""稠密态矢量引擎，一维/二维模块共用的暴力参照实现。

包括两比特门的位掩码就地更新、Pauli 串与局域算符期望值、
团簇态稳定子校验、小系统完整幺正矩阵组装以及采样。

比特位约定：site_order[q] 给出量子比特 q 在振幅下标中的位位置
（从最低位数起）。默认 site_order[q] = n−1−q，即第 0 个比特为最高位，
与 np.kron 的顺序一致。
"""

import json
import logging
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .config import get_config, oracle_cap, tolerance
from .errors import (CapExceededError, InvalidParameterError,
                     NormalizationError)
from .gates import PAULI, X, Z

logger = logging.getLogger(__name__)

GatePlacement = Tuple[np.ndarray, int, int]


def check_cap(num_qubits: int, cap: Optional[int] = None, what: str = "oracle"):
    """比特数超过上限时抛出 CapExceededError。"""
    cap = oracle_cap() if cap is None else cap
    if num_qubits > cap:
        raise CapExceededError(num_qubits, cap, what)


class Statevector:
    """n 比特稠密振幅向量。

    Attributes:
        num_qubits: 比特数 n
        amplitudes: 长度 2^n 的复数向量（可带额外的列维度，用于组装幺正矩阵）
        site_order: 比特 → 位位置的双射
    """

    def __init__(self, num_qubits: int, amplitudes: Optional[np.ndarray] = None,
                 site_order: Optional[Sequence[int]] = None):
        if num_qubits < 1:
            raise InvalidParameterError("比特数至少为 1")
        self.num_qubits = num_qubits
        dim = 1 << num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(dim, dtype=complex)
            amplitudes[0] = 1.0
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape[0] != dim:
            raise InvalidParameterError(
                f"振幅长度 {amplitudes.shape[0]} 与 2^{num_qubits} 不符")
        self.amplitudes = amplitudes
        if site_order is None:
            site_order = [num_qubits - 1 - q for q in range(num_qubits)]
        site_order = [int(p) for p in site_order]
        if sorted(site_order) != list(range(num_qubits)):
            raise InvalidParameterError("site_order 不是双射")
        self.site_order = site_order

    def copy(self) -> 'Statevector':
        return Statevector(self.num_qubits, self.amplitudes.copy(), list(self.site_order))

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> 'Statevector':
        n2 = self.norm_sq()
        if n2 <= 0:
            raise NormalizationError("零范数态无法归一化")
        return Statevector(self.num_qubits, self.amplitudes / np.sqrt(n2), list(self.site_order))

    def bit(self, q: int) -> int:
        if not 0 <= q < self.num_qubits:
            raise InvalidParameterError(f"比特下标 {q} 越界 (n={self.num_qubits})")
        return self.site_order[q]

    def relabeled(self, perm: Sequence[int]) -> 'Statevector':
        """比特重新编号：旧比特 q 改称 perm[q]，振幅不动。"""
        if sorted(perm) != list(range(self.num_qubits)):
            raise InvalidParameterError("perm 不是置换")
        order = [0] * self.num_qubits
        for q, p in enumerate(perm):
            order[p] = self.site_order[q]
        return Statevector(self.num_qubits, self.amplitudes, order)

    def canonical(self) -> 'Statevector':
        """把振幅物理重排成默认 site_order。"""
        n = self.num_qubits
        tensor = self.amplitudes.reshape((2,) * n)
        axes = [n - 1 - self.site_order[q] for q in range(n)]
        data = np.ascontiguousarray(np.transpose(tensor, axes)).reshape(-1)
        return Statevector(n, data)

    def probabilities(self) -> np.ndarray:
        """按默认比特顺序排列的测量概率。"""
        return np.abs(self.canonical().amplitudes) ** 2

    def dump(self, path: str):
        """写出小端 (re, im) 双精度二进制文件及 JSON 附属文件。"""
        self.amplitudes.astype('<c16').tofile(path)
        with open(path + '.json', 'w', encoding='utf-8') as f:
            json.dump({'n': self.num_qubits, 'site_order': self.site_order}, f)
        logger.info(f"态矢量已写出: {path} (n={self.num_qubits})")

    @classmethod
    def load(cls, path: str) -> 'Statevector':
        with open(path + '.json', 'r', encoding='utf-8') as f:
            meta = json.load(f)
        data = np.fromfile(path, dtype='<c16').astype(complex)
        return cls(meta['n'], data, meta['site_order'])


def product_state(single_states: Sequence[np.ndarray]) -> Statevector:
    """单比特态的张量积。"""
    amp = np.ones(1, dtype=complex)
    for s in single_states:
        amp = np.kron(amp, np.asarray(s, dtype=complex))
    return Statevector(len(single_states), amp)


def _pair_indices(num_qubits: int, pa: int, pb: int):
    idx = np.arange(1 << num_qubits)
    bases = idx[(((idx >> pa) & 1) == 0) & (((idx >> pb) & 1) == 0)]
    return (bases, bases | (1 << pb), bases | (1 << pa), bases | (1 << pa) | (1 << pb))


def apply_two_qubit(state: Statevector, g: np.ndarray, site_a: int, site_b: int) -> Statevector:
    """就地作用两比特门，site_a 对应门基底中的第一个（高位）比特。

    Args:
        state: 态矢量（就地修改）
        g: 4×4 矩阵
        site_a: 第一个比特
        site_b: 第二个比特

    Returns:
        同一个 state 对象
    """
    if site_a == site_b:
        raise InvalidParameterError("两比特门的作用位点必须不同")
    pa, pb = state.bit(site_a), state.bit(site_b)
    i00, i01, i10, i11 = _pair_indices(state.num_qubits, pa, pb)
    psi = state.amplitudes
    v = np.stack([psi[i00], psi[i01], psi[i10], psi[i11]])
    r = np.tensordot(np.asarray(g, dtype=complex), v, axes=(1, 0))
    psi[i00], psi[i01], psi[i10], psi[i11] = r[0], r[1], r[2], r[3]
    return state


def apply_single(state: Statevector, m: np.ndarray, site: int) -> Statevector:
    """就地作用单比特门（也可以是非幺正的 2×2 算符）。"""
    p = state.bit(site)
    idx = np.arange(1 << state.num_qubits)
    i0 = idx[((idx >> p) & 1) == 0]
    i1 = i0 | (1 << p)
    psi = state.amplitudes
    v = np.stack([psi[i0], psi[i1]])
    r = np.tensordot(np.asarray(m, dtype=complex), v, axes=(1, 0))
    psi[i0], psi[i1] = r[0], r[1]
    return state


def evolve(state: Statevector, placements: Iterable[GatePlacement]) -> Statevector:
    """按时间顺序作用一串 (gate, site_a, site_b)。"""
    for g, a, b in placements:
        apply_two_qubit(state, g, a, b)
    return state


def _require_normalized(state: Statevector, tol: Optional[float] = None):
    tol = tolerance('normalization') if tol is None else tol
    if abs(state.norm_sq() - 1.0) > tol:
        raise NormalizationError(f"态矢量未归一化: ‖ψ‖² = {state.norm_sq():.3e}")


@dataclass(frozen=True)
class PauliString:
    """Pauli 串，terms 为 (site, 'I'|'X'|'Y'|'Z') 列表。"""

    terms: Tuple[Tuple[int, str], ...]

    def __post_init__(self):
        sites = [s for s, _ in self.terms]
        if len(sites) != len(set(sites)):
            raise InvalidParameterError("Pauli 串中的位点必须互不相同")
        for _, p in self.terms:
            if p not in PAULI:
                raise InvalidParameterError(f"未知的 Pauli 算符: {p}")

    @classmethod
    def from_dict(cls, ops: Mapping[int, str]) -> 'PauliString':
        return cls(tuple(sorted(ops.items())))


def expectation_pauli(state: Statevector, p: PauliString, check_norm: bool = True) -> complex:
    """⟨ψ|P|ψ⟩，基于位掩码的逐振幅求和。

    P|i⟩ = i^{nY} (−1)^{popcount(i & (zmask|ymask))} |i ⊕ (xmask|ymask)⟩。
    """
    if check_norm:
        _require_normalized(state)
    xmask = zmask = ymask = 0
    for site, op in p.terms:
        bit = 1 << state.bit(site)
        if op == 'X':
            xmask |= bit
        elif op == 'Z':
            zmask |= bit
        elif op == 'Y':
            ymask |= bit
    flip = xmask | ymask
    phase_mask = zmask | ymask
    idx = np.arange(1 << state.num_qubits)
    parity = np.zeros_like(idx)
    m, pos = phase_mask, 0
    while m:
        if m & 1:
            parity ^= (idx >> pos) & 1
        m >>= 1
        pos += 1
    n_y = bin(ymask).count('1')
    phase = (1j ** n_y) * (1 - 2 * parity)
    psi = state.amplitudes
    value = np.sum(np.conj(psi[idx ^ flip]) * phase * psi)
    return complex(value)


def apply_local_operator(state: Statevector, factors: Mapping[int, np.ndarray]) -> Statevector:
    """返回作用了 ⊗ factors 之后的新态（不修改原态）。"""
    out = state.copy()
    for site, m in factors.items():
        apply_single(out, m, site)
    return out


def expectation_local(state: Statevector, factors: Mapping[int, np.ndarray]) -> complex:
    """归一化期望 ⟨ψ|O|ψ⟩/⟨ψ|ψ⟩，O 为单比特算符的张量积。"""
    n2 = state.norm_sq()
    if n2 <= 0:
        raise NormalizationError("零范数态的期望值无定义")
    o_psi = apply_local_operator(state, factors)
    return complex(np.vdot(state.amplitudes, o_psi.amplitudes) / n2)


@dataclass
class StabilizerResult:
    vertex: object
    qubit: int
    value: float
    passed: bool


def cluster_stabilizer(graph: nx.Graph, vertex, node_to_qubit: Mapping) -> PauliString:
    """K_v = X_v ∏_{u∼v} Z_u。"""
    ops = {node_to_qubit[vertex]: 'X'}
    for u in graph.neighbors(vertex):
        ops[node_to_qubit[u]] = 'Z'
    return PauliString.from_dict(ops)


def verify_stabilizers(state: Statevector, graph: nx.Graph,
                       node_to_qubit: Optional[Mapping] = None,
                       tol: Optional[float] = None) -> List[StabilizerResult]:
    """逐顶点检查 ⟨X_v ∏_{u∼v} Z_u⟩ = 1。

    Args:
        state: 归一化态矢量
        graph: 格点邻接图（简单图）
        node_to_qubit: 顶点 → 比特映射，默认顶点本身即比特下标
        tol: 通过阈值，默认 tolerance.compare

    Returns:
        每个顶点一条 StabilizerResult
    """
    tol = tolerance('compare') if tol is None else tol
    if node_to_qubit is None:
        node_to_qubit = {v: v for v in graph.nodes}
    if graph.number_of_nodes() != state.num_qubits:
        raise InvalidParameterError(
            f"图有 {graph.number_of_nodes()} 个顶点，态有 {state.num_qubits} 个比特")
    results = []
    for v in graph.nodes:
        value = expectation_pauli(state, cluster_stabilizer(graph, v, node_to_qubit)).real
        results.append(StabilizerResult(v, node_to_qubit[v], value, abs(value - 1.0) <= tol))
    failed = sum(not r.passed for r in results)
    if failed:
        logger.info(f"稳定子校验: {failed}/{len(results)} 个顶点未通过")
    return results


def cluster_state(graph: nx.Graph, node_to_qubit: Optional[Mapping] = None) -> Statevector:
    """直接构造图态 ∏ CZ_{uv} |+⟩^{⊗n}。"""
    if node_to_qubit is None:
        node_to_qubit = {v: v for v in graph.nodes}
    n = graph.number_of_nodes()
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    state = product_state([plus] * n)
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    for u, v in graph.edges:
        apply_two_qubit(state, cz, node_to_qubit[u], node_to_qubit[v])
    return state


def assemble_unitary(schedule, cap: Optional[int] = None) -> np.ndarray:
    """按时间顺序组装完整的 2^n × 2^n 幺正矩阵。

    Args:
        schedule: 提供 num_qubits 与 iter_gates() 的线路对象
        cap: 比特上限，默认 oracle.assemble_cap

    Returns:
        复数矩阵，列按默认比特顺序排列
    """
    cap = get_config()['oracle']['assemble_cap'] if cap is None else cap
    n = schedule.num_qubits
    check_cap(n, cap, "assemble_unitary")
    state = Statevector(n, np.eye(1 << n, dtype=complex))
    evolve(state, schedule.iter_gates())
    return state.amplitudes


def sample_outcomes(state: Statevector, shots: int, seed=None) -> List[str]:
    """从 |ψ|² 中独立同分布地抽取计算基测量结果（逆 CDF 法）。

    Returns:
        比特串列表，第 q 个字符为比特 q 的测量值
    """
    if shots < 0:
        raise InvalidParameterError("shots 不能为负")
    _require_normalized(state)
    if shots == 0:
        return []
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    probs = state.probabilities()
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    picks = np.searchsorted(cdf, rng.random(shots), side='right')
    picks = np.minimum(picks, len(cdf) - 1)
    n = state.num_qubits
    return [format(int(i), f'0{n}b') for i in picks]


if __name__ == '__main__':
    bell = Statevector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
    print(f"⟨ZZ⟩ = {expectation_pauli(bell, PauliString(((0, 'Z'), (1, 'Z'))))}")
    print(f"⟨XX⟩ = {expectation_local(bell, {0: X, 1: X})}, ⟨Z⊗I⟩ = {expectation_local(bell, {0: Z})}")
