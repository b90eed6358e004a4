# duqc/gates.py
"""两比特门的构造、分类与变换。

GateMatrix 在本包中就是 4×4 复数 numpy 数组，基底顺序为
|00⟩,|01⟩,|10⟩,|11⟩，第一个比特为高位。提供对偶门映射、
幺正性/对偶幺正性判定以及 XXZ、自对偶踢伊辛等命名门族。
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from .config import tolerance
from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)

PAULI = {'I': I2, 'X': X, 'Y': Y, 'Z': Z}

I4 = np.eye(4, dtype=complex)
SWAP = np.array([[1, 0, 0, 0],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


def cz_power(alpha: float) -> np.ndarray:
    """CZ^α = diag(1, 1, 1, e^{iπα})，α = 1 时即为 CZ。"""
    return np.diag([1, 1, 1, np.exp(1j * np.pi * alpha)])


def as_gate(g, name: str = "gate") -> np.ndarray:
    """把输入整理成 4×4 复数矩阵并检查有限性。

    Args:
        g: 任意可转换为数组的对象
        name: 出错时使用的名字

    Returns:
        4×4 complex ndarray
    """
    arr = np.asarray(g, dtype=complex)
    if arr.shape != (4, 4):
        raise InvalidParameterError(f"{name} 的形状应为 (4, 4)，实际为 {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} 含有 NaN/Inf")
    return arr


def _unitary_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def unitarity_residual(g: np.ndarray) -> float:
    """‖g†g − I‖_max。"""
    return _unitary_residual(np.asarray(g, dtype=complex))


def is_unitary(g: np.ndarray, tol: Optional[float] = None) -> bool:
    tol = tolerance('unitarity') if tol is None else tol
    return unitarity_residual(g) <= tol


def dual_of(g: np.ndarray) -> np.ndarray:
    """对偶门映射 ⟨k l|Ũ|i j⟩ = ⟨j l|U|i k⟩。

    纯粹的元素置换，因此是对合：dual_of(dual_of(g)) == g。
    """
    u = np.asarray(g, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum('jlik->klij', u).reshape(4, 4)


def dual_unitarity_residual(g: np.ndarray) -> float:
    return _unitary_residual(dual_of(g))


def is_dual_unitary(g: np.ndarray, tol: Optional[float] = None) -> bool:
    """g 本身幺正且其对偶门也幺正。"""
    tol = tolerance('unitarity') if tol is None else tol
    return unitarity_residual(g) <= tol and dual_unitarity_residual(g) <= tol


def contraction_residuals(g: np.ndarray) -> Tuple[float, float]:
    """以四指标张量收缩的形式检查时间方向与空间方向的幺正恒等式。

    时间方向：对两个输出指标求和；空间方向：对第二个输出指标和
    第二个输入指标求和（即从左往右看门）。

    Returns:
        (时间方向残差, 空间方向残差)
    """
    u = np.asarray(g, dtype=complex).reshape(2, 2, 2, 2)
    delta = np.einsum('ac,bd->abcd', I2, I2)
    time_like = np.einsum('abcd,abef->cdef', u.conj(), u)
    # 空间方向：输入 (i, k)，输出 (j, l) 指 ⟨j l|U|i k⟩
    space_like = np.einsum('jlik,mlnk->jimn', u.conj(), u)
    return (float(np.max(np.abs(time_like - delta))),
            float(np.max(np.abs(space_like - delta))))


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """返回 min_θ ‖a − e^{iθ} b‖_max 的近似值（按 b 最大元素对齐相位）。"""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) == 0:
        return float(np.max(np.abs(a)))
    phase = a[idx] / b[idx]
    if abs(phase) > 0:
        phase = phase / abs(phase)
    else:
        phase = 1.0
    return float(np.max(np.abs(a - phase * b)))


def haar_single(rng: np.random.Generator) -> np.ndarray:
    """Haar 随机 2×2 幺正矩阵。"""
    return unitary_group.rvs(2, random_state=rng)


@dataclass(frozen=True)
class DualUnitaryParams:
    """对偶幺正门族 e^{iφ}(u1⊗u2)·SWAP·CZ^α·(v1⊗v2) 的参数。"""

    phi: float = 0.0
    alpha: float = 0.0
    u1: np.ndarray = field(default_factory=lambda: I2.copy())
    u2: np.ndarray = field(default_factory=lambda: I2.copy())
    v1: np.ndarray = field(default_factory=lambda: I2.copy())
    v2: np.ndarray = field(default_factory=lambda: I2.copy())

    def singles(self) -> Tuple[np.ndarray, ...]:
        return (self.u1, self.u2, self.v1, self.v2)

    def validate(self, tol: Optional[float] = None):
        tol = tolerance('unitarity') if tol is None else tol
        if not (np.isfinite(self.phi) and np.isfinite(self.alpha)):
            raise InvalidParameterError("phi/alpha 必须为有限实数")
        for name, m in zip(('u1', 'u2', 'v1', 'v2'), self.singles()):
            m = np.asarray(m, dtype=complex)
            if m.shape != (2, 2):
                raise InvalidParameterError(f"{name} 的形状应为 (2, 2)")
            if _unitary_residual(m) > tol:
                raise InvalidParameterError(f"单比特门 {name} 不是幺正的")


def build_dual_unitary(params: DualUnitaryParams) -> np.ndarray:
    """构造 e^{iφ}(u1⊗u2)·SWAP·CZ^α·(v1⊗v2)。

    Args:
        params: 门参数

    Returns:
        4×4 对偶幺正矩阵
    """
    params.validate()
    u = np.kron(np.asarray(params.u1, dtype=complex), np.asarray(params.u2, dtype=complex))
    v = np.kron(np.asarray(params.v1, dtype=complex), np.asarray(params.v2, dtype=complex))
    return np.exp(1j * params.phi) * (u @ SWAP @ cz_power(params.alpha) @ v)


def _xxz_kernel(J: float) -> np.ndarray:
    return expm(-1j * np.pi / 4 * (np.kron(X, X) + np.kron(Y, Y) + J * np.kron(Z, Z)))


def alternative_form(params: DualUnitaryParams, printed: bool = False) -> np.ndarray:
    """XXZ 核形式 e^{iφ'}(u1⊗u2)·e^{−iπ/4(XX+YY+JZZ)}·(v1'⊗v2')。

    printed=False 使用由 SWAP·CZ^α 直接展开得到的参数：
    φ' = φ + π(1+α)/4，J = 1 − α，v' = e^{−iπαZ/4} v。
    printed=True 使用文献中给出的参数：φ' = φ − πα/4，J = α + 1，
    v' = e^{iπαZ/4} v，便于比较二者差异。
    """
    a = params.alpha
    if printed:
        phi_p = params.phi - np.pi * a / 4
        J = a + 1
        rot = expm(1j * np.pi / 4 * a * Z)
    else:
        phi_p = params.phi + np.pi * (1 + a) / 4
        J = 1 - a
        rot = expm(-1j * np.pi / 4 * a * Z)
    u = np.kron(params.u1, params.u2)
    v = np.kron(rot @ params.v1, rot @ params.v2)
    return np.exp(1j * phi_p) * (u @ _xxz_kernel(J) @ v)


def alternative_form_deviation(params: DualUnitaryParams) -> dict:
    """比较 XXZ 核形式与 build_dual_unitary 的结果。"""
    g = build_dual_unitary(params)
    derived = alternative_form(params)
    printed = alternative_form(params, printed=True)
    report = {
        'derived_exact': float(np.max(np.abs(derived - g))),
        'printed_exact': float(np.max(np.abs(printed - g))),
        'printed_up_to_phase': equal_up_to_phase(printed, g),
    }
    logger.debug(f"XXZ 核形式偏差: {report}")
    return report


class GateFamily(str, enum.Enum):
    XXZ = "xxz"
    KICKED_ISING = "kicked-ising"


@dataclass(frozen=True)
class NamedGateParams:
    family: GateFamily
    J: float = 0.0
    h: float = 0.0


def kicked_ising_gate(h: float) -> np.ndarray:
    """一维自对偶踢伊辛链的两比特门（因式分解的右端形式）。"""
    q = np.pi / 4
    left = np.kron(expm(-1j * h * Z) @ expm(1j * q * X), expm(1j * q * X))
    y_rot = np.kron(expm(-1j * q * Y), expm(-1j * q * Y))
    kernel = _xxz_kernel(0.0)
    z_rot = np.kron(expm(1j * q * Z), expm(1j * q * Z))
    right = np.kron(expm(1j * q * Y) @ expm(-1j * h * Z), expm(1j * q * Y))
    return np.exp(-1j * q) * (left @ y_rot @ kernel @ z_rot @ right)


def named_gate(p: NamedGateParams) -> np.ndarray:
    """命名门族。

    Args:
        p: family 为 xxz 时使用 J，为 kicked-ising 时使用 h

    Returns:
        4×4 对偶幺正矩阵
    """
    try:
        family = GateFamily(p.family)
    except ValueError:
        raise InvalidParameterError(f"未知的门族: {p.family}")
    if not (np.isfinite(p.J) and np.isfinite(p.h)):
        raise InvalidParameterError("J/h 必须为有限实数")
    if family is GateFamily.XXZ:
        return _xxz_kernel(p.J)
    return kicked_ising_gate(p.h)


def random_dual_unitary_params(rng: np.random.Generator) -> DualUnitaryParams:
    phi = rng.uniform(0, 2 * np.pi)
    alpha = rng.uniform(0, 2)
    u1, u2, v1, v2 = (haar_single(rng) for _ in range(4))
    return DualUnitaryParams(phi=phi, alpha=alpha, u1=u1, u2=u2, v1=v1, v2=v2)


def random_dual_unitary(seed) -> np.ndarray:
    """给定种子生成可复现的随机对偶幺正门。

    Args:
        seed: 整数种子或 numpy Generator

    Returns:
        4×4 对偶幺正矩阵
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return build_dual_unitary(random_dual_unitary_params(rng))


def random_unitary_4(seed) -> np.ndarray:
    """Haar 随机两比特幺正门（用于二维 k 方向）。"""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return unitary_group.rvs(4, random_state=rng)


if __name__ == '__main__':
    g = random_dual_unitary(0)
    print(f"随机门对偶幺正: {is_dual_unitary(g)}")
    print(f"CZ 对偶幺正: {is_dual_unitary(CZ)}")
