# duqc/circuit1d.py
"""一维砖墙对偶幺正线路。

位点编号从 1 开始，共 2N 个位点。第 τ 层（τ 从 1 开始）：
τ 为奇数时门作用在键 (2i, 2i+1)，周期边界下包含绕环键 (2N, 1)；
τ 为偶数时门作用在键 (2i−1, 2i)。键用其左端位点标识，
门基底中的第一个比特对应键的左端。

本模块提供线路构造、稠密 oracle 期望值、带误差预算的快速路径、
折叠转移矩阵 E(t) 以及开边界阶梯收缩。编译器见 compile1d。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import (Callable, Dict, Iterator, List, Mapping, Optional,
                    Sequence, Tuple, Union)

import numpy as np

from .config import get_config
from .errors import (CapExceededError, InvalidParameterError,
                     NotDualUnitaryError, SpectrumError)
from .gates import PAULI, P0, as_gate, is_dual_unitary, random_dual_unitary
from .oracle import (Statevector, apply_single, check_cap,
                     evolve, expectation_local)
from .solvable_states import (FIXED, PERIODIC, SolvableState, TransferSpectrum,
                              region_mixture, require_solvable, to_statevector,
                              transfer_spectrum)

logger = logging.getLogger(__name__)

OPEN = 'open'

GateFn = Callable[[int, int], Optional[np.ndarray]]


def is_left_site(site: int, tau: int) -> bool:
    """site 是否为第 tau 层某个键的左端（只看奇偶）。"""
    return site % 2 == 0 if tau % 2 == 1 else site % 2 == 1


def seeded_gate(seed: int, tau: int, site: int) -> np.ndarray:
    """由 (seed, τ, site) 唯一确定的随机对偶幺正门。"""
    return random_dual_unitary(np.random.default_rng([seed, tau, site]))


class CircuitSchedule1D:
    """一维砖墙线路的时间序列。

    门可以显式给出（layers[τ−1] 为 {左端位点: 门}，缺省的键表示不放门），
    也可以由 gate_fn(τ, site) 惰性生成，后者不需要为大 N 展开所有门。
    """

    def __init__(self, num_cells: int, depth: int, boundary: str = PERIODIC,
                 layers: Optional[Sequence[Mapping[int, np.ndarray]]] = None,
                 gate_fn: Optional[GateFn] = None,
                 require_dual_unitary: bool = True):
        if num_cells < 1:
            raise InvalidParameterError(f"N 至少为 1，实际为 {num_cells}")
        if depth < 0:
            raise InvalidParameterError(f"线路深度不能为负: {depth}")
        if boundary not in (PERIODIC, OPEN):
            raise InvalidParameterError(f"未知边界条件: {boundary}")
        if (layers is None) == (gate_fn is None):
            raise InvalidParameterError("layers 与 gate_fn 必须且只能给出一个")
        self.num_cells = num_cells
        self.depth = depth
        self.boundary = boundary
        self.require_dual_unitary = require_dual_unitary
        self._gate_fn = gate_fn
        self._layers: Optional[List[Dict[int, np.ndarray]]] = None
        if layers is not None:
            if len(layers) != depth:
                raise InvalidParameterError(f"给出了 {len(layers)} 层，但深度为 {depth}")
            self._layers = []
            for tau, layer in enumerate(layers, start=1):
                checked = {}
                for site, g in layer.items():
                    site = int(site)
                    self._check_bond(tau, site)
                    checked[site] = self._check_gate(tau, site, g)
                self._layers.append(checked)

    @property
    def num_qubits(self) -> int:
        return 2 * self.num_cells

    @property
    def is_explicit(self) -> bool:
        return self._layers is not None

    def right_of(self, site: int) -> int:
        return site + 1 if site < self.num_qubits else 1

    def bonds(self, tau: int) -> List[int]:
        """第 tau 层所有键的左端位点。"""
        n = self.num_qubits
        start = 2 if tau % 2 == 1 else 1
        sites = list(range(start, n + 1, 2))
        if self.boundary == OPEN and tau % 2 == 1:
            sites = [s for s in sites if s != n]
        return sites

    def _check_bond(self, tau: int, site: int):
        if not 1 <= tau <= self.depth:
            raise InvalidParameterError(f"层号 {tau} 超出 [1, {self.depth}]")
        if site not in self.bonds(tau):
            raise InvalidParameterError(
                f"第 {tau} 层不存在以位点 {site} 为左端的键（奇偶或开边界不符）")

    def _check_gate(self, tau: int, site: int, g) -> np.ndarray:
        g = as_gate(g, f"第 {tau} 层位点 {site} 的门")
        if self.require_dual_unitary and not is_dual_unitary(g):
            raise NotDualUnitaryError(
                f"第 {tau} 层键 ({site}, {self.right_of(site)}) 上的门不是对偶幺正的",
                layer=tau, bond=(site, self.right_of(site)))
        return g

    def gate(self, tau: int, site: int) -> Optional[np.ndarray]:
        """第 tau 层以 site 为左端的门，未放置时返回 None。"""
        if self._layers is not None:
            return self._layers[tau - 1].get(site)
        g = self._gate_fn(tau, site)
        return None if g is None else self._check_gate(tau, site, g)

    def is_complete(self) -> bool:
        """每一层的每个键上都放了门。"""
        if self._layers is None:
            return True
        return all(set(self._layers[tau - 1]) == set(self.bonds(tau))
                   for tau in range(1, self.depth + 1))

    def layer(self, tau: int) -> Dict[int, np.ndarray]:
        out = {}
        for site in self.bonds(tau):
            g = self.gate(tau, site)
            if g is not None:
                out[site] = g
        return out

    def iter_gates(self) -> Iterator[Tuple[np.ndarray, int, int]]:
        """按时间顺序产生 (门, 比特a, 比特b)，比特下标从 0 开始。"""
        for tau in range(1, self.depth + 1):
            for site, g in self.layer(tau).items():
                yield g, site - 1, self.right_of(site) - 1

    def gate_count(self) -> int:
        return sum(len(self.layer(tau)) for tau in range(1, self.depth + 1))

    def truncated(self, depth: int) -> 'CircuitSchedule1D':
        """前 depth 层组成的线路。"""
        if not 0 <= depth <= self.depth:
            raise InvalidParameterError(f"截断深度 {depth} 超出 [0, {self.depth}]")
        if self._layers is not None:
            return CircuitSchedule1D(self.num_cells, depth, self.boundary,
                                     layers=self._layers[:depth],
                                     require_dual_unitary=self.require_dual_unitary)
        return CircuitSchedule1D(self.num_cells, depth, self.boundary,
                                 gate_fn=self._gate_fn,
                                 require_dual_unitary=self.require_dual_unitary)


GateSource = Union[int, np.random.Generator, np.ndarray, GateFn,
                   Sequence[Mapping[int, np.ndarray]]]


def build_brickwork(N: int, t: int, gate_source: GateSource,
                    boundary: str = PERIODIC) -> CircuitSchedule1D:
    """构造一维砖墙对偶幺正线路。

    Args:
        N: 元胞数（2N 个比特）
        t: 层数
        gate_source: 整数种子/Generator（逐键随机对偶幺正门）、单个 4×4 门
            （所有键相同）、函数 (τ, site) → 门，或显式的层列表
        boundary: 'periodic' 或 'open'

    Returns:
        CircuitSchedule1D
    """
    if isinstance(gate_source, np.random.Generator):
        gate_source = int(gate_source.integers(0, 2 ** 63 - 1))
    if isinstance(gate_source, (int, np.integer)):
        seed = int(gate_source)
        if seed < 0:
            raise InvalidParameterError("种子必须为非负整数")
        return CircuitSchedule1D(N, t, boundary, gate_fn=lambda tau, s: seeded_gate(seed, tau, s))
    if isinstance(gate_source, np.ndarray) and gate_source.shape == (4, 4):
        g = as_gate(gate_source)
        if not is_dual_unitary(g):
            raise NotDualUnitaryError("统一放置的门不是对偶幺正的")
        return CircuitSchedule1D(N, t, boundary, gate_fn=lambda tau, s: g)
    if callable(gate_source):
        return CircuitSchedule1D(N, t, boundary, gate_fn=gate_source)
    return CircuitSchedule1D(N, t, boundary, layers=list(gate_source))


@dataclass(frozen=True)
class LocalObservable:
    """从 start_site 起连续 l 个位点上的单比特算符张量积。"""

    start_site: int
    factors: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.factors) < 1:
            raise InvalidParameterError("可观测量至少包含一个因子")
        fs = tuple(np.asarray(f, dtype=complex) for f in self.factors)
        for f in fs:
            if f.shape != (2, 2) or not np.all(np.isfinite(f)):
                raise InvalidParameterError("可观测量因子必须是有限的 2×2 矩阵")
        object.__setattr__(self, 'factors', fs)

    @property
    def length(self) -> int:
        return len(self.factors)

    @classmethod
    def pauli(cls, labels: str, start_site: int) -> 'LocalObservable':
        """例如 pauli('ZZ', 4) 表示 Z_4 Z_5。"""
        return cls(start_site, tuple(PAULI[c] for c in labels.upper()))

    def sites(self, num_sites: int) -> List[int]:
        return [((self.start_site - 1 + i) % num_sites) + 1 for i in range(self.length)]

    def site_factors(self, num_sites: int) -> Dict[int, np.ndarray]:
        """{比特下标(从 0 开始): 因子}。"""
        return {s - 1: f for s, f in zip(self.sites(num_sites), self.factors)}

    def trace_value(self) -> complex:
        """Tr(⊗ factors)/2^l。"""
        return complex(np.prod([np.trace(f) / 2 for f in self.factors]))

    def operator_norm(self) -> float:
        return float(np.prod([np.linalg.norm(f, 2) for f in self.factors]))


@dataclass(frozen=True)
class ErrorBudget:
    lambda1_mod: float
    N: int
    l: int
    t: int
    bound: float
    exponent: int = 0
    constant: float = 0.0


@dataclass(frozen=True)
class FastResult:
    value: complex
    budget: ErrorBudget
    regime: str
    method: str = 'fast'

    def to_dict(self) -> dict:
        return {
            'value': [self.value.real, self.value.imag],
            'method': self.method,
            'bound': self.budget.bound,
            'regime': self.regime,
        }


@dataclass(frozen=True)
class LateTimeSignal:
    """快速路径不作任何断言。"""

    reason: str
    N: int
    l: int
    t: int
    regime: str = 'late'

    def to_dict(self) -> dict:
        return {'value': None, 'method': 'fast', 'bound': None,
                'regime': self.regime, 'reason': self.reason}


def _budget_constant(spec: TransferSpectrum, prefactor: Optional[float] = None) -> float:
    """C = prefactor·χ²·κ(S)，κ 为转移矩阵本征向量矩阵的条件数。"""
    prefactor = get_config()['fast_path']['budget_prefactor'] if prefactor is None else prefactor
    return prefactor * len(spec.eigenvalues) * spec.condition


def error_budget(spec: TransferSpectrum, N: int, l: int, t: int,
                 prefactor: Optional[float] = None) -> ErrorBudget:
    """快速路径的误差上界 C·(|λ1|^m + |λ1|^N)。

    λ1 是一个元胞（两个位点）的转移矩阵 E 的次大本征值，指数按元胞计：
    m = N − ⌈l/2⌉ − t − 1 是光锥之外剩余元胞数的下界，约为 (2N − l − 2t)/2。
    因此按位点数 2N − l − 2t 计，误差每个位点衰减 |λ1|^{1/2}。
    C = prefactor·χ²·κ(S)。

    Args:
        spec: 初态转移谱
        N, l, t: 元胞数、可观测量长度、时间

    Returns:
        ErrorBudget；χ = 1（EPR）时 bound 为 0
    """
    if not spec.unique_max:
        raise SpectrumError("转移矩阵最大本征值不唯一，无法给出误差预算")
    if len(spec.eigenvalues) == 1:
        return ErrorBudget(0.0, N, l, t, 0.0)
    lam = spec.lambda1_mod
    constant = _budget_constant(spec, prefactor)
    m = max(N - math.ceil(l / 2) - t - 1, 0)
    bound = constant * (lam ** m + lam ** N)
    return ErrorBudget(lam, N, l, t, float(bound), m, float(constant))


@dataclass
class CausalCone:
    """反向光锥。bonds[τ−1] 为第 τ 层光锥内的键（左端位点，已折回 1..2N）。"""

    bottom: Tuple[int, int]
    full: bool
    bonds: List[List[int]] = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.bottom[1] - self.bottom[0] + 1


def cone_interval(num_qubits: int, boundary: str, start: int, length: int,
                  t: int, with_bonds: bool = False) -> CausalCone:
    """从 t 时刻的区间 [start, start+length−1] 反向追踪光锥。

    周期边界下端点不折回（可以越出 1..2N），宽度达到 2N 即视为覆盖全环。
    """
    a, b = start, start + length - 1
    n = num_qubits
    full = length >= n
    layers: List[List[int]] = [[] for _ in range(t)]
    for tau in range(t, 0, -1):
        if not full:
            if not is_left_site(a, tau) and not (boundary == OPEN and a == 1):
                a -= 1
            if is_left_site(b, tau) and not (boundary == OPEN and b == n):
                b += 1
            if boundary == PERIODIC and b - a + 1 >= n:
                full = True
        if with_bonds:
            if full:
                layers[tau - 1] = list(range(2 if tau % 2 == 1 else 1, n + 1, 2))
                if boundary == OPEN and tau % 2 == 1:
                    layers[tau - 1] = [s for s in layers[tau - 1] if s != n]
            else:
                first = a if is_left_site(a, tau) else a + 1
                layers[tau - 1] = [((s - 1) % n) + 1 for s in range(first, b, 2)]
    if full and boundary == PERIODIC:
        a, b = 1, n
    return CausalCone((a, b), full, layers)


def causal_cone(c: CircuitSchedule1D, obs: LocalObservable) -> CausalCone:
    return cone_interval(c.num_qubits, c.boundary, obs.start_site, obs.length,
                         c.depth, with_bonds=True)


def _check_observable(c: CircuitSchedule1D, obs: LocalObservable):
    if not 1 <= obs.start_site <= c.num_qubits:
        raise InvalidParameterError(f"可观测量起点 {obs.start_site} 超出 [1, {c.num_qubits}]")
    if obs.length > c.num_qubits:
        raise InvalidParameterError("可观测量长度超过系统大小")
    if c.boundary == OPEN and obs.start_site + obs.length - 1 > c.num_qubits:
        raise InvalidParameterError("开边界下可观测量不能越过链端")


def _check_state(c: CircuitSchedule1D, init: SolvableState):
    if init.num_cells != c.num_cells:
        raise InvalidParameterError(
            f"初态元胞数 {init.num_cells} 与线路 {c.num_cells} 不一致")


def evolve_oracle(c: CircuitSchedule1D, init: SolvableState,
                  cap: Optional[int] = None) -> Statevector:
    """稠密逐层演化（未归一化的初态保持未归一化）。"""
    _check_state(c, init)
    check_cap(c.num_qubits, cap, "evolve_oracle")
    state = to_statevector(init, cap)
    return evolve(state, c.iter_gates())


def expectation_oracle(c: CircuitSchedule1D, init: SolvableState, obs: LocalObservable,
                       cap: Optional[int] = None) -> complex:
    """⟨Ψ_t|O|Ψ_t⟩/⟨Ψ_t|Ψ_t⟩，稠密收缩。"""
    _check_observable(c, obs)
    state = evolve_oracle(c, init, cap)
    return expectation_local(state, obs.site_factors(c.num_qubits))


def _region_of_cone(num_cells: int, cone: CausalCone) -> Tuple[int, int]:
    """光锥底部覆盖的元胞区间 (起始元胞, 元胞数)。"""
    if cone.full:
        return 1, num_cells
    a, b = cone.bottom
    first, last = (a + 1) // 2, (b + 1) // 2
    L = last - first + 1
    if L >= num_cells:
        return 1, num_cells
    return ((first - 1) % num_cells) + 1, L


def expectation_cone(c: CircuitSchedule1D, init: SolvableState, obs: LocalObservable,
                     cap: Optional[int] = None) -> complex:
    """精确收缩光锥：光锥之外的门由幺正性消去，光锥之外的初态由转移矩阵收缩。

    代价为 2^{O(光锥宽度)}，与 N 无关；对周期边界和固定边界的初态均精确。
    """
    _check_observable(c, obs)
    _check_state(c, init)
    cone = causal_cone(c, obs)
    start_cell, L = _region_of_cone(c.num_cells, cone)
    check_cap(2 * L, cap, "光锥区域")
    n = c.num_qubits
    origin = 2 * start_cell - 1

    def local(site: int) -> int:
        return (site - origin) % n

    placements = []
    for tau in range(1, c.depth + 1):
        for site in cone.bonds[tau - 1]:
            g = c.gate(tau, site)
            if g is not None:
                placements.append((g, local(site), local(c.right_of(site))))
    factors = {local(s + 1): f for s, f in obs.site_factors(n).items()}

    mixture = region_mixture(init, start_cell, L)
    num = 0j
    den = 0.0
    for weight, phi in zip(mixture.weights, mixture.statevectors(init.tensor)):
        evolve(phi, placements)
        o_phi = phi.copy()
        for q, f in factors.items():
            apply_single(o_phi, f, q)
        num += weight * np.vdot(phi.amplitudes, o_phi.amplitudes)
        den += weight * phi.norm_sq()
    if den <= 0:
        raise InvalidParameterError("初态范数为零")
    return complex(num / den)


def fast_regime(c: CircuitSchedule1D, init: SolvableState, obs: LocalObservable) -> Tuple[str, str]:
    """判定快速路径所处的区域，返回 (regime, 说明)。"""
    N, l, t = c.num_cells, obs.length, c.depth
    if 2 * t < l + 2:
        return 'pre-cone', f"t={t} < l/2+1"
    cone = cone_interval(c.num_qubits, c.boundary, obs.start_site, l, t)
    if cone.full:
        return 'late', f"光锥宽度达到 2N={c.num_qubits}，在环上自相交"
    if init.tensor.chi > 1:
        delta = get_config()['fast_path']['delta']
        limit = math.floor((1 - delta) * N) - l / 2
        if t > limit:
            return 'late', f"t={t} > ⌊(1−δ)N⌋ − l/2 = {limit}"
    return 'early', f"早期区域，光锥宽度 {cone.width}"


def expectation_fast(c: CircuitSchedule1D, init: SolvableState,
                     obs: LocalObservable) -> Union[FastResult, LateTimeSignal]:
    """带误差预算的快速路径期望值。

    早期区域返回 Tr(O)/2^l；t < l/2+1 时精确收缩常数大小的光锥；
    其余情形返回 LateTimeSignal。

    Args:
        c: 周期边界的完整砖墙线路
        init: 可解初态（周期边界）
        obs: 局域可观测量

    Returns:
        FastResult 或 LateTimeSignal
    """
    if c.boundary != PERIODIC or init.boundary != PERIODIC:
        raise InvalidParameterError("快速路径只适用于周期边界；开边界请用 obc_boundary_expectation")
    if not c.is_complete():
        raise InvalidParameterError("快速路径要求每个键都放置对偶幺正门")
    _check_observable(c, obs)
    _check_state(c, init)
    require_solvable(init.tensor)
    N, l, t = c.num_cells, obs.length, c.depth
    spec = transfer_spectrum(init.tensor)
    regime, why = fast_regime(c, init, obs)
    logger.debug(f"快速路径区域: {regime} ({why})")
    if regime == 'late':
        return LateTimeSignal(why, N, l, t)
    if regime == 'pre-cone':
        value = expectation_cone(c, init, obs)
        return FastResult(value, ErrorBudget(spec.lambda1_mod, N, l, t, 0.0), regime)
    return FastResult(obs.trace_value(), error_budget(spec, N, l, t), regime)


@dataclass
class FoldedTransfer:
    t: int
    matrix: np.ndarray
    fixed_vec: np.ndarray
    right_residual: float
    left_residual: float


def _staircase_tensor(c: CircuitSchedule1D, init: SolvableState, t: int) -> np.ndarray:
    """元胞 1 上方沿右行对角线的 t 个门与一个 MPS 张量组成的阶梯。

    返回 S[α, Y, β, X, p_l, p_r]：α/β 为左/右虚拟键，Y 为向左穿出的 t 根线，
    X 为从右侧穿入的 t 根线，p 为最终的两个物理比特。
    """
    chi = init.tensor.chi
    b = init.tensor.blocks  # [y1, s, α, β]
    T = np.einsum('ysab->abys', b)  # [α, β, y1, s]
    T = T.reshape(chi, chi, 2, 1, 2)  # [α, β, Y, X, m]
    for tau in range(1, t + 1):
        site = tau + 1
        g = c.gate(tau, site)
        if g is None:
            raise InvalidParameterError(f"第 {tau} 层位点 {site} 缺少门")
        g4 = g.reshape(2, 2, 2, 2)  # [o1, o2, i1, i2]
        T = np.einsum('abYXm,pqmx->abYXxpq', T, g4)
        A, B, Yd, Xd = T.shape[:4]
        if tau < t:
            T = T.transpose(0, 1, 2, 5, 3, 4, 6).reshape(A, B, Yd * 2, Xd * 2, 2)
        else:
            T = T.reshape(A, B, Yd, Xd * 2, 2, 2)
    return T.transpose(0, 2, 1, 3, 4, 5)


def folded_transfer(c: CircuitSchedule1D, init: SolvableState, t: Optional[int] = None) -> FoldedTransfer:
    """构造时间演化后的空间方向转移矩阵 E(t) 并检查 |I(t)⟩ 是左右不动向量。

    Args:
        c: 线路（取元胞 1 上方阶梯中的门）
        init: 可解初态
        t: 时间，默认为线路深度

    Returns:
        FoldedTransfer
    """
    t = c.depth if t is None else t
    max_t = get_config()['folded_transfer']['max_t']
    if t < 1 or t > c.depth:
        raise InvalidParameterError(f"t={t} 超出 [1, {c.depth}]")
    if t > max_t:
        raise CapExceededError(2 * t, 2 * max_t, "folded_transfer")
    chi = init.tensor.chi
    S = _staircase_tensor(c, init, t)
    dim = chi * 2 ** t
    S = S.reshape(dim, dim, 4)
    E = np.einsum('ijp,klp->ikjl', S, S.conj()).reshape(dim * dim, dim * dim)
    v = np.eye(dim, dtype=complex).reshape(-1) / np.sqrt(dim)
    right = float(np.max(np.abs(E @ v - v)))
    left = float(np.max(np.abs(v @ E - v)))
    return FoldedTransfer(t, E, v, right, left)


class _LiveWires:
    """活跃位点上的约化密度矩阵，张量轴依次为各位点的 ket 轴、bra 轴。

    不在 sites 中的位点视为最大混态，且与活跃位点没有关联。
    """

    def __init__(self, sites: Sequence[int], rho: np.ndarray):
        self.sites = list(sites)
        self.rho = np.asarray(rho, dtype=complex).reshape((2,) * (2 * len(self.sites)))

    def add_mixed(self, site: int):
        k = len(self.sites)
        rho = np.multiply.outer(self.rho, np.eye(2, dtype=complex) / 2)
        self.rho = rho.transpose(list(range(k)) + [2 * k] + list(range(k, 2 * k)) + [2 * k + 1])
        self.sites.append(site)

    def apply(self, g: np.ndarray, site_a: int, site_b: int):
        k = len(self.sites)
        i, j = self.sites.index(site_a), self.sites.index(site_b)
        g4 = g.reshape(2, 2, 2, 2)
        rho = np.moveaxis(np.tensordot(g4, self.rho, axes=([2, 3], [i, j])), [0, 1], [i, j])
        self.rho = np.moveaxis(np.tensordot(g4.conj(), rho, axes=([2, 3], [k + i, k + j])),
                               [0, 1], [k + i, k + j])

    def trace_out(self, site: int):
        i = self.sites.index(site)
        self.rho = np.trace(self.rho, axis1=i, axis2=len(self.sites) + i)
        self.sites.pop(i)

    def expectation(self, factors: Mapping[int, np.ndarray]) -> complex:
        for site in factors:
            if site not in self.sites:
                self.add_mixed(site)
        rho = self.rho
        for site, f in factors.items():
            i = self.sites.index(site)
            rho = np.moveaxis(np.tensordot(f, rho, axes=([1], [i])), 0, i)
        dim = 2 ** len(self.sites)
        return complex(np.trace(rho.reshape(dim, dim)))


def _initial_wires(init: SolvableState, sites: List[int], cap: Optional[int]) -> _LiveWires:
    """初态在 sites 上的约化密度矩阵（其余位点求迹）。"""
    if not sites:
        return _LiveWires([], np.ones(()))
    first, last = (sites[0] + 1) // 2, (sites[-1] + 1) // 2
    L = last - first + 1
    check_cap(2 * L, cap, "边界阶梯初态")
    keep = [s - (2 * first - 1) for s in sites]
    dim = 2 ** len(keep)
    rho = np.zeros((dim, dim), dtype=complex)
    norm = 0.0
    mixture = region_mixture(init, first, L)
    for weight, phi in zip(mixture.weights, mixture.statevectors(init.tensor)):
        psi = np.moveaxis(phi.amplitudes.reshape((2,) * (2 * L)), keep, list(range(len(keep))))
        psi = psi.reshape(dim, -1)
        rho += weight * (psi @ psi.conj().T)
        norm += weight * phi.norm_sq()
    if norm <= 0:
        raise InvalidParameterError("初态范数为零")
    return _LiveWires(sites, rho / norm)


def _ladder_budget(init: SolvableState, N: int, l: int, t: int,
                   distances: Sequence[int]) -> ErrorBudget:
    """开边界的误差上界 C·Σ|λ1|^m，m 为光锥底部到各个未触及链端之间的完整元胞数。"""
    spec = transfer_spectrum(init.tensor)
    if not spec.unique_max:
        raise SpectrumError("转移矩阵最大本征值不唯一，无法给出误差预算")
    if len(spec.eigenvalues) == 1:
        return ErrorBudget(0.0, N, l, t, 0.0)
    lam = spec.lambda1_mod
    constant = _budget_constant(spec)
    bound = constant * sum(lam ** m for m in distances)
    return ErrorBudget(lam, N, l, t, float(bound), min(distances), float(constant))


def obc_boundary_expectation(c: CircuitSchedule1D, init: SolvableState,
                             obs: LocalObservable,
                             cap: Optional[int] = None) -> Union[FastResult, LateTimeSignal]:
    """开边界线路的边界阶梯收缩。

    设可观测量位于链的左半。从门 (τ, x) 的右输出沿右行对角线上升，
    到 t 时刻落在位点 x+1+(t−τ)；落点在可观测量右侧的门可由对偶幺正性
    自右向左逐条对角线消去，落点在左侧的门不在反向光锥内。剩下的只有
    落点位于可观测量上的几条对角线，它们在链端经空闲位点首尾相连，
    组成宽度只与 l 有关的阶梯。沿时间方向逐层演化阶梯上活跃导线的
    约化密度矩阵，其余导线一律是最大混态。右半的情形镜像处理。

    EPR 型初态（χ = 1）下结果精确；χ > 1 时，把远处链端的转移矩阵
    替换为不动点引入的误差记入预算。代价随 t 线性增长、随 l 指数增长，与 N 无关。

    Args:
        c: 开边界砖墙线路，每个键都放置对偶幺正门
        init: 固定边界 (α, β) 的可解初态
        obs: 支撑在链的左半或右半的局域可观测量
        cap: 初态约化区间的比特数上限

    Returns:
        FastResult（method='obc-ladder'）或 LateTimeSignal
    """
    if c.boundary != OPEN:
        raise InvalidParameterError("obc_boundary_expectation 需要开边界线路")
    if init.boundary != FIXED:
        raise InvalidParameterError("开边界初态需要固定边界指标 (α, β)")
    if not c.is_complete() or not c.require_dual_unitary:
        raise InvalidParameterError("边界阶梯收缩要求每个键都放置经过校验的对偶幺正门")
    _check_observable(c, obs)
    _check_state(c, init)
    require_solvable(init.tensor)
    N, l, t = c.num_cells, obs.length, c.depth
    n = c.num_qubits
    s, e = obs.start_site, obs.start_site + l - 1
    if e <= N:
        left_end = True
    elif s > N:
        left_end = False
    else:
        return LateTimeSignal("可观测量跨越链的中点", N, l, t)
    a, b = cone_interval(n, OPEN, s, l, t).bottom
    if (left_end and b == n) or (not left_end and a == 1):
        return LateTimeSignal("光锥触及远端链端", N, l, t)

    def on_ladder(tau: int, x: int) -> bool:
        top = x + 1 + (t - tau) if left_end else x - (t - tau)
        return s <= top <= e

    def ladder_bonds(tau: int) -> List[int]:
        shift = t - tau
        lo, hi = (s - 1 - shift, e - 1 - shift) if left_end else (s + shift, e + shift)
        return [x for x in range(max(lo, 1), min(hi, n - 1) + 1) if is_left_site(x, tau)]

    def needed(site: int, tau: int) -> bool:
        # 开边界下链端位点每隔一层空闲一次
        for nxt in (tau + 1, tau + 2):
            x = site if is_left_site(site, nxt) else site - 1
            if 1 <= x <= n - 1:
                break
        if nxt > t:
            return s <= site <= e
        return on_ladder(nxt, x)

    lo, hi = max(1, s - t - 1), min(n, e + t + 1)
    wires = _initial_wires(init, [y for y in range(lo, hi + 1) if needed(y, 0)], cap)
    width = len(wires.sites)
    for tau in range(1, t + 1):
        for x in ladder_bonds(tau):
            g = c.gate(tau, x)
            if g is None:
                raise InvalidParameterError(f"第 {tau} 层位点 {x} 缺少门")
            for y in (x, x + 1):
                if y not in wires.sites:
                    wires.add_mixed(y)
            wires.apply(g, x, x + 1)
        width = max(width, len(wires.sites))
        for y in list(wires.sites):
            if not needed(y, tau):
                wires.trace_out(y)
    value = wires.expectation({q + 1: f for q, f in obs.site_factors(n).items()})
    logger.debug(f"边界阶梯收缩完成: 最大活跃导线数 {width}")

    distances = [N - (b + 1) // 2] if left_end else [(a - 1) // 2]
    if left_end and a > 1:
        distances.append((a - 1) // 2)
    if not left_end and b < n:
        distances.append(N - (b + 1) // 2)
    budget = _ladder_budget(init, N, l, t, distances)
    regime = 'pre-cone' if 2 * t < l + 2 else 'early'
    return FastResult(value, budget, regime, method='obc-ladder')


if __name__ == '__main__':
    from .solvable_states import epr_chain
    circuit = build_brickwork(4, 2, 0)
    obs = LocalObservable(4, (P0, P0))
    print(f"fast:   {expectation_fast(circuit, epr_chain(4), obs)}")
    print(f"oracle: {expectation_oracle(circuit, epr_chain(4), obs):.6f}")
