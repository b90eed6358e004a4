# duqc/solvable_states.py
"""可解矩阵乘积初态。

张量 A^{(i,j)} 作用在两格点元胞上，2N 个比特的态为
Tr(A^{(i1,i2)} A^{(i3,i4)} ... A^{(i_{2N−1},i_{2N})})。

转移矩阵约定：E = Σ_{ij} A^{(i,j)} ⊗ conj(A^{(i,j)})，即
E[(α,α'),(β,β')] = Σ A_{αβ} conj(A)_{α'β'}，乘积按元胞从左到右组合。
|I⟩ = vec(I_χ)/√χ 同时是 E 的左、右不动向量。
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import unitary_group

from .config import get_config, tolerance
from .errors import InvalidParameterError, NotSolvableError, SpectrumError
from .oracle import Statevector, check_cap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolvableTensor:
    """MPS 张量，blocks 形状为 (2, 2, χ, χ)，blocks[i, j] = A^{(i,j)}。"""

    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        if b.ndim != 4 or b.shape[:2] != (2, 2) or b.shape[2] != b.shape[3]:
            raise InvalidParameterError(f"blocks 形状应为 (2, 2, χ, χ)，实际为 {b.shape}")
        if not np.all(np.isfinite(b)):
            raise InvalidParameterError("blocks 含有 NaN/Inf")
        object.__setattr__(self, 'blocks', b)

    @property
    def chi(self) -> int:
        return self.blocks.shape[2]

    def cell_blocks(self) -> np.ndarray:
        """按元胞指标 c = 2i + j 排列的 (4, χ, χ) 数组。"""
        return self.blocks.reshape(4, self.chi, self.chi)

    def transfer_matrix(self) -> np.ndarray:
        cb = self.cell_blocks()
        return sum(np.kron(a, a.conj()) for a in cb)

    def scaled(self, factor: float) -> 'SolvableTensor':
        return SolvableTensor(self.blocks * factor)


@dataclass(frozen=True)
class SolvableReport:
    residual_19: float
    residual_21: float
    passed: bool


@dataclass(frozen=True)
class TransferSpectrum:
    """转移矩阵的完整本征分解。

    Attributes:
        eigenvalues: 按模长降序排列
        eigenvectors: 对应的右本征向量（按列）
        unique_max: 最大模本征值是否唯一
        max_eigvec: 归一化并固定相位的主本征向量
        condition: 本征向量矩阵的条件数 κ(S)
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    unique_max: bool
    max_eigvec: np.ndarray
    condition: float

    @property
    def lambda0(self) -> complex:
        return complex(self.eigenvalues[0])

    @property
    def lambda1(self) -> Optional[complex]:
        if len(self.eigenvalues) < 2:
            return None
        return complex(self.eigenvalues[1])

    @property
    def lambda1_mod(self) -> float:
        """|λ1|；χ = 1 时不存在 λ1，返回 0。"""
        lam = self.lambda1
        return 0.0 if lam is None else abs(lam)


PERIODIC = 'periodic'
FIXED = 'fixed'


@dataclass(frozen=True)
class SolvableState:
    """2N 比特的可解初态。

    Attributes:
        tensor: MPS 张量
        num_cells: 元胞数 N
        boundary: 'periodic' 或 'fixed'
        alpha, beta: 固定边界时的左右虚拟指标
    """

    tensor: SolvableTensor
    num_cells: int
    boundary: str = PERIODIC
    alpha: int = 0
    beta: int = 0

    def __post_init__(self):
        if self.num_cells < 1:
            raise InvalidParameterError("num_cells 至少为 1")
        if self.boundary not in (PERIODIC, FIXED):
            raise InvalidParameterError(f"未知边界条件: {self.boundary}")
        chi = self.tensor.chi
        if not (0 <= self.alpha < chi and 0 <= self.beta < chi):
            raise InvalidParameterError("固定边界指标超出 χ 范围")

    @property
    def num_qubits(self) -> int:
        return 2 * self.num_cells

    def with_cells(self, num_cells: int) -> 'SolvableState':
        return SolvableState(self.tensor, num_cells, self.boundary, self.alpha, self.beta)


def epr_tensor() -> SolvableTensor:
    blocks = np.zeros((2, 2, 1, 1), dtype=complex)
    blocks[0, 0, 0, 0] = blocks[1, 1, 0, 0] = 1 / np.sqrt(2)
    return SolvableTensor(blocks)


def epr_chain(N: int) -> SolvableState:
    """EPR 链 (|00⟩+|11⟩)^{⊗N}/2^{N/2}，χ = 1。"""
    if N < 1:
        raise InvalidParameterError(f"N 至少为 1，实际为 {N}")
    return SolvableState(epr_tensor(), N)


def check_solvable(A: SolvableTensor, tol: Optional[float] = None) -> SolvableReport:
    """检查可解条件。

    residual_19: max |Σ_k A^{(i,k)} A^{(j,k)†} − δ_ij I/2|
    residual_21: max |Σ_i A^{(i,k)†} A^{(i,k')} − δ_kk' I/2|
    后者即 √2·A 重排成的 2χ×2χ 矩阵列正交，是前者在有限维下的必然结果。
    """
    tol = tolerance('solvable') if tol is None else tol
    b = A.blocks
    eye = np.eye(A.chi)
    r19 = r21 = 0.0
    for i in range(2):
        for j in range(2):
            s19 = sum(b[i, k] @ b[j, k].conj().T for k in range(2))
            s21 = sum(b[m, i].conj().T @ b[m, j] for m in range(2))
            target = 0.5 * eye if i == j else 0 * eye
            r19 = max(r19, float(np.max(np.abs(s19 - target))))
            r21 = max(r21, float(np.max(np.abs(s21 - target))))
    return SolvableReport(r19, r21, r19 <= tol and r21 <= tol)


def require_solvable(A: SolvableTensor, tol: Optional[float] = None) -> SolvableReport:
    report = check_solvable(A, tol)
    if not report.passed:
        raise NotSolvableError(
            f"初态张量不可解: residual_19={report.residual_19:.3e}, "
            f"residual_21={report.residual_21:.3e}", report)
    return report


def transfer_spectrum(A: SolvableTensor, gap: Optional[float] = None) -> TransferSpectrum:
    """对 χ²×χ² 转移矩阵做完整本征分解。

    Args:
        A: MPS 张量
        gap: 判定唯一最大本征值的相对间隙，默认读配置

    Returns:
        TransferSpectrum
    """
    gap = get_config()['spectrum']['gap'] if gap is None else gap
    E = A.transfer_matrix()
    try:
        vals, vecs = np.linalg.eig(E)
    except np.linalg.LinAlgError as e:
        raise SpectrumError(f"转移矩阵本征分解失败: {e}")
    order = np.argsort(-np.abs(vals), kind='stable')
    vals, vecs = vals[order], vecs[:, order]
    if len(vals) == 1:
        unique = True
    else:
        unique = (abs(vals[0]) - abs(vals[1])) > gap * abs(vals[0])
    v0 = vecs[:, 0]
    pivot = v0[np.argmax(np.abs(v0))]
    v0 = v0 * (abs(pivot) / pivot) / np.linalg.norm(v0)
    try:
        cond = float(np.linalg.cond(vecs))
    except np.linalg.LinAlgError:
        cond = float('inf')
    return TransferSpectrum(vals, vecs, bool(unique), v0, cond)


def identity_vector(chi: int) -> np.ndarray:
    """|I⟩ = Σ_α |αα⟩/√χ。"""
    return np.eye(chi, dtype=complex).reshape(-1) / np.sqrt(chi)


def fixed_vector_residual(A: SolvableTensor) -> Tuple[float, float]:
    """(‖E|I⟩ − |I⟩‖_max, ‖⟨I|E − ⟨I|‖_max)。"""
    E = A.transfer_matrix()
    v = identity_vector(A.chi)
    return (float(np.max(np.abs(E @ v - v))), float(np.max(np.abs(v @ E - v))))


def power_residuals(A: SolvableTensor, max_power: int) -> List[float]:
    """‖E^M − |I⟩⟨I|‖_max，M = 1..max_power。"""
    E = A.transfer_matrix()
    v = identity_vector(A.chi)
    proj = np.outer(v, v)
    out = []
    current = np.eye(E.shape[0], dtype=complex)
    for _ in range(max_power):
        current = current @ E
        out.append(float(np.max(np.abs(current - proj))))
    return out


def random_solvable_tensor(chi: int, seed=None, max_retries: Optional[int] = None) -> SolvableTensor:
    """由 Haar 随机 2χ×2χ 幺正矩阵 M 生成可解张量 A^{(i,k)}_{αβ} = M_{(iα),(kβ)}/√2。

    转移谱最大本征值不唯一时重新采样。

    Args:
        chi: 键维数 χ ≥ 1
        seed: 整数种子或 numpy Generator
        max_retries: 最大重采样次数

    Returns:
        SolvableTensor
    """
    if chi < 1:
        raise InvalidParameterError(f"χ 至少为 1，实际为 {chi}")
    max_retries = get_config()['spectrum']['max_retries'] if max_retries is None else max_retries
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for attempt in range(max_retries):
        M = unitary_group.rvs(2 * chi, random_state=rng)
        M = np.asarray(M, dtype=complex).reshape(2 * chi, 2 * chi)
        blocks = M.reshape(2, chi, 2, chi).transpose(0, 2, 1, 3) / np.sqrt(2)
        tensor = SolvableTensor(blocks)
        if transfer_spectrum(tensor).unique_max:
            return tensor
        logger.debug(f"第 {attempt + 1} 次采样谱简并，重新采样")
    raise SpectrumError(f"{max_retries} 次重采样后转移谱仍然简并 (χ={chi})")


def state_norm_sq(s: SolvableState) -> float:
    """周期边界 Tr(E^N)，固定边界 ⟨αα|E^N|ββ⟩。"""
    E = s.tensor.transfer_matrix()
    EN = np.linalg.matrix_power(E, s.num_cells)
    if s.boundary == PERIODIC:
        return float(np.trace(EN).real)
    chi = s.tensor.chi
    return float(EN[s.alpha * chi + s.alpha, s.beta * chi + s.beta].real)


def _chain_products(tensor: SolvableTensor, num_cells: int) -> np.ndarray:
    """所有元胞构型下的矩阵乘积，形状 (4^L, χ, χ)，第一元胞为最高位。"""
    cb = tensor.cell_blocks()
    cur = cb
    for _ in range(num_cells - 1):
        d = cur.shape[0]
        cur = np.einsum('dab,cbe->dcae', cur, cb).reshape(d * 4, tensor.chi, tensor.chi)
    return cur


def region_statevector(tensor: SolvableTensor, num_cells: int,
                       boundary_matrix: np.ndarray) -> Statevector:
    """振幅为 Σ_{αβ} (A^{c1}...A^{cL})_{αβ} B_{αβ} 的 2L 比特态。"""
    prods = _chain_products(tensor, num_cells)
    amps = np.einsum('dab,ab->d', prods, boundary_matrix)
    return Statevector(2 * num_cells, amps)


def to_statevector(s: SolvableState, cap: Optional[int] = None) -> Statevector:
    """显式展开为未归一化的 2N 比特态矢量。"""
    check_cap(s.num_qubits, cap, "to_statevector")
    chi = s.tensor.chi
    if s.boundary == PERIODIC:
        B = np.eye(chi, dtype=complex)
    else:
        B = np.zeros((chi, chi), dtype=complex)
        B[s.alpha, s.beta] = 1.0
    return region_statevector(s.tensor, s.num_cells, B)


@dataclass
class RegionMixture:
    """把元胞区间之外的部分精确收缩成若干区间态的加权混合。

    ⟨Ψ|O|Ψ⟩ = Σ_m weights[m]·⟨Φ_m|O|Φ_m⟩，O 只作用在区间内；
    Φ_m 的振幅为 Tr(R(c) B_m^T)，B_m = boundaries[m]。
    代价只依赖区间长度 L 和 χ，与 N 无关。
    """

    num_cells: int
    weights: List[float] = field(default_factory=list)
    boundaries: List[np.ndarray] = field(default_factory=list)

    def statevectors(self, tensor: SolvableTensor) -> List[Statevector]:
        return [region_statevector(tensor, self.num_cells, B) for B in self.boundaries]


def _gram_from_environment(env: np.ndarray, chi: int) -> np.ndarray:
    """env[(β,β'),(α,α')] → G[(α',β'),(α,β)]。"""
    e = env.reshape(chi, chi, chi, chi)  # β β' α α'
    G = np.einsum("bdac->cdab", e).reshape(chi * chi, chi * chi)
    return 0.5 * (G + G.conj().T)


def region_mixture(s: SolvableState, start_cell: int, num_cells: int,
                   rel_cutoff: float = 1e-14) -> RegionMixture:
    """计算区间 [start_cell, start_cell + num_cells) 的环境混合（元胞下标从 1 开始）。

    周期边界下区间可以绕环；固定边界下区间必须位于链内。
    """
    N = s.num_cells
    L = num_cells
    if not 1 <= L <= N:
        raise InvalidParameterError(f"区间长度 {L} 超出 [1, {N}]")
    chi = s.tensor.chi
    E = s.tensor.transfer_matrix()
    if s.boundary == PERIODIC:
        env = np.linalg.matrix_power(E, N - L)
        G = _gram_from_environment(env, chi)
    else:
        if start_cell < 1 or start_cell + L - 1 > N:
            raise InvalidParameterError("固定边界下区间不能越过链端")
        left = np.linalg.matrix_power(E, start_cell - 1)
        right = np.linalg.matrix_power(E, N - (start_cell + L - 1))
        a0, b0 = s.alpha, s.beta
        ell = left[a0 * chi + a0, :].reshape(chi, chi)   # [α, α']
        r = right[:, b0 * chi + b0].reshape(chi, chi)    # [β, β']
        G = np.einsum('ac,bd->cdab', ell, r).reshape(chi * chi, chi * chi)
        G = 0.5 * (G + G.conj().T)
    w, V = np.linalg.eigh(G)
    keep = w > rel_cutoff * max(float(np.max(w)), 0.0)
    mixture = RegionMixture(L)
    for weight, vec in zip(w[keep], V[:, keep].T):
        mixture.weights.append(float(weight))
        mixture.boundaries.append(vec.conj().reshape(chi, chi))
    return mixture


if __name__ == '__main__':
    A = random_solvable_tensor(2, seed=7)
    spec = transfer_spectrum(A)
    print(f"check_solvable: {check_solvable(A)}")
    print(f"|λ0|={abs(spec.lambda0):.6f}, |λ1|={spec.lambda1_mod:.6f}")
