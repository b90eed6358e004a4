# duqc/circuit2d.py
"""二维对偶幺正线路（2N×2M 环面）。

格点 (j, k) 从 1 开始编号，比特下标按行优先 q = (j−1)·cols + (k−1)。
j 方向为可解初态链的方向：U1 作用在 ((2j,k),(2j+1,k))，U3 作用在
((2j−1,k),(2j,k))，两者必须是对偶幺正门；k 方向的 U2 作用在
((j,2k−1),(j,2k))，U4 作用在 ((j,2k),(j,2k+1))，可以是任意两比特幺正门。
时间顺序为 U1, U^{2,4}, U3, U^{2,4}, U1, ...，其中 U^{2,4} 是 U2、U4 的任意非空乘积。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.linalg import expm

from .circuit1d import ErrorBudget, LateTimeSignal, FastResult, is_left_site
from .config import get_config
from .errors import InvalidParameterError, NotDualUnitaryError
from .gates import (CZ, H, I2, SWAP, X, Z, DualUnitaryParams, as_gate,
                    build_dual_unitary, is_dual_unitary, is_unitary,
                    random_dual_unitary, random_unitary_4)
from .oracle import (Statevector, apply_single, check_cap, evolve,
                     expectation_local)
from .solvable_states import (SolvableState, SolvableTensor, region_mixture,
                              require_solvable, state_norm_sq, to_statevector,
                              transfer_spectrum)

logger = logging.getLogger(__name__)

Site = Tuple[int, int]
J_ROLES = ('U1', 'U3')
K_ROLES = ('U2', 'U4')


def _cap_2d() -> int:
    return int(get_config()['oracle']['qubit_cap_2d'])


@dataclass(frozen=True)
class Lattice2D:
    """2N×2M 周期格点，edge_mask 为始终关闭的 k 方向键（以左端格点标识）。"""

    rows: int
    cols: int
    edge_mask: FrozenSet[Site] = frozenset()

    def __post_init__(self):
        for name, v in (('rows', self.rows), ('cols', self.cols)):
            if v < 2 or v % 2:
                raise InvalidParameterError(f"{name} 必须是不小于 2 的偶数，实际为 {v}")
        normalized = set()
        for edge in self.edge_mask:
            normalized.add(self._normalize_edge(edge))
        object.__setattr__(self, 'edge_mask', frozenset(normalized))

    def _normalize_edge(self, edge) -> Site:
        edge = tuple(edge)
        if len(edge) == 2 and all(isinstance(x, (int, np.integer)) for x in edge):
            return (int(edge[0]), int(edge[1]))
        (j1, k1), (j2, k2) = edge
        if j1 != j2:
            raise InvalidParameterError(f"只能屏蔽 k 方向的键，得到 {edge}")
        if (k1 % self.cols) + 1 == k2:
            return (j1, k1)
        if (k2 % self.cols) + 1 == k1:
            return (j1, k2)
        raise InvalidParameterError(f"{edge} 不是近邻的 k 方向键")

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols

    @property
    def N(self) -> int:
        return self.rows // 2

    @property
    def M(self) -> int:
        return self.cols // 2

    def qubit(self, site: Site) -> int:
        j, k = site
        return (j - 1) * self.cols + (k - 1)

    def wrap(self, site: Site) -> Site:
        j, k = site
        return ((j - 1) % self.rows + 1, (k - 1) % self.cols + 1)

    def partner(self, role: str, site: Site) -> Site:
        j, k = site
        if role in J_ROLES:
            return self.wrap((j + 1, k))
        return self.wrap((j, k + 1))

    def bonds(self, role: str) -> List[Site]:
        """该角色所有键的左端格点。"""
        if role == 'U1':
            return [(j, k) for j in range(2, self.rows + 1, 2) for k in range(1, self.cols + 1)]
        if role == 'U3':
            return [(j, k) for j in range(1, self.rows + 1, 2) for k in range(1, self.cols + 1)]
        if role == 'U2':
            return [(j, k) for j in range(1, self.rows + 1) for k in range(1, self.cols + 1, 2)]
        if role == 'U4':
            return [(j, k) for j in range(1, self.rows + 1) for k in range(2, self.cols + 1, 2)]
        raise InvalidParameterError(f"未知的层角色: {role}")

    def is_masked(self, site: Site) -> bool:
        return site in self.edge_mask

    def graph(self) -> nx.Graph:
        """去掉屏蔽键之后的格点图。"""
        g = nx.Graph()
        g.add_nodes_from((j, k) for j in range(1, self.rows + 1) for k in range(1, self.cols + 1))
        for role in ('U1', 'U3', 'U2', 'U4'):
            for site in self.bonds(role):
                if role in K_ROLES and self.is_masked(site):
                    continue
                g.add_edge(site, self.partner(role, site))
        return g


def honeycomb_mask(rows: int, cols: int) -> FrozenSet[Site]:
    """砖墙形蜂窝格点：奇数行屏蔽 U4 键，偶数行屏蔽 U2 键，每个顶点度为 3。"""
    mask = set()
    for j in range(1, rows + 1):
        start = 2 if j % 2 == 1 else 1
        for k in range(start, cols + 1, 2):
            mask.add((j, k))
    return frozenset(mask)


@dataclass
class Layer2D:
    role: str
    gates: Dict[Site, np.ndarray] = field(default_factory=dict)


@dataclass
class Block2D:
    """公式意义下的一个时间步：U1、U3，或由若干 U2/U4 子层组成的 U24。"""

    role: str
    sublayers: List[Layer2D]


class CircuitSchedule2D:
    """二维线路：blocks 按时间顺序排列，depth 为时间步数。"""

    def __init__(self, lattice: Lattice2D, blocks: Sequence[Block2D]):
        self.lattice = lattice
        self.blocks = list(blocks)
        self._validate()

    @property
    def depth(self) -> int:
        return len(self.blocks)

    @property
    def num_qubits(self) -> int:
        return self.lattice.num_qubits

    def _validate(self):
        expect_j = 'U1'
        prev = None
        for idx, block in enumerate(self.blocks, start=1):
            if block.role in J_ROLES:
                if block.role != expect_j:
                    raise InvalidParameterError(f"第 {idx} 步应为 {expect_j}，实际为 {block.role}")
                if prev in J_ROLES:
                    raise InvalidParameterError(f"第 {idx} 步之前缺少 U24 层")
                if len(block.sublayers) != 1 or block.sublayers[0].role != block.role:
                    raise InvalidParameterError(f"第 {idx} 步的 {block.role} 层结构非法")
                expect_j = 'U3' if block.role == 'U1' else 'U1'
            elif block.role == 'U24':
                if prev is None or prev == 'U24':
                    raise InvalidParameterError(f"第 {idx} 步的 U24 必须紧跟在 U1/U3 之后")
                if not block.sublayers or any(s.role not in K_ROLES for s in block.sublayers):
                    raise InvalidParameterError(f"第 {idx} 步的 U24 必须是非空的 U2/U4 乘积")
            else:
                raise InvalidParameterError(f"未知的时间步角色: {block.role}")
            prev = block.role
            for layer in block.sublayers:
                self._validate_layer(idx, layer)
        if self.depth % 4:
            logger.info(f"二维线路深度 {self.depth} 不是 4 的倍数（截断的前缀）")

    def _validate_layer(self, idx: int, layer: Layer2D):
        allowed = set(self.lattice.bonds(layer.role))
        for site, g in list(layer.gates.items()):
            if site not in allowed:
                raise InvalidParameterError(f"第 {idx} 步 {layer.role} 层不存在以 {site} 为左端的键")
            g = as_gate(g, f"第 {idx} 步 {layer.role} 层 {site} 处的门")
            if layer.role in J_ROLES:
                if not is_dual_unitary(g):
                    raise NotDualUnitaryError(
                        f"第 {idx} 步 {layer.role} 层 {site} 处的门不是对偶幺正的",
                        layer=idx, bond=(site, self.lattice.partner(layer.role, site)))
            else:
                if self.lattice.is_masked(site):
                    raise InvalidParameterError(f"键 {site} 已被屏蔽，不能放置门")
                if not is_unitary(g):
                    raise InvalidParameterError(f"第 {idx} 步 {layer.role} 层 {site} 处的门不是幺正的")
            layer.gates[site] = g

    def is_complete(self) -> bool:
        """U1/U3 层的每个键上都放了门。"""
        return all(set(layer.gates) == set(self.lattice.bonds(layer.role))
                   for _, layer in self.iter_layers() if layer.role in J_ROLES)

    def iter_layers(self) -> Iterator[Tuple[int, Layer2D]]:
        for idx, block in enumerate(self.blocks, start=1):
            for layer in block.sublayers:
                yield idx, layer

    def iter_site_gates(self) -> Iterator[Tuple[np.ndarray, Site, Site]]:
        for _, layer in self.iter_layers():
            for site, g in layer.gates.items():
                yield g, site, self.lattice.partner(layer.role, site)

    def iter_gates(self) -> Iterator[Tuple[np.ndarray, int, int]]:
        """按时间顺序产生 (门, 比特a, 比特b)。"""
        lat = self.lattice
        for g, a, b in self.iter_site_gates():
            yield g, lat.qubit(a), lat.qubit(b)

    def truncated(self, depth: int) -> 'CircuitSchedule2D':
        if not 0 <= depth <= self.depth:
            raise InvalidParameterError(f"截断深度 {depth} 超出 [0, {self.depth}]")
        return CircuitSchedule2D(self.lattice, self.blocks[:depth])


DEFAULT_WORDS = (('U2',), ('U4',))


def _gate_factory(source, kind: str) -> Optional[Callable[[int, int, Site], np.ndarray]]:
    """把种子/统一门/函数统一成 (步号, 子层号, 格点) → 门。"""
    if source is None:
        return None
    if isinstance(source, np.random.Generator):
        source = int(source.integers(0, 2 ** 63 - 1))
    if isinstance(source, (int, np.integer)):
        seed = int(source)
        if kind == 'du':
            return lambda idx, sub, s: random_dual_unitary(np.random.default_rng([seed, idx, sub, *s]))
        return lambda idx, sub, s: random_unitary_4(np.random.default_rng([seed, idx, sub, *s]))
    if isinstance(source, np.ndarray):
        g = as_gate(source)
        return lambda idx, sub, s: g
    if callable(source):
        return source
    raise InvalidParameterError(f"无法识别的门来源: {type(source)}")


def build_2d_duqc(lat: Lattice2D, t: int, du_source, u24_source=None,
                  words: Sequence[Sequence[str]] = DEFAULT_WORDS) -> CircuitSchedule2D:
    """构造 t 个时间步的二维对偶幺正线路。

    Args:
        lat: 格点（屏蔽键上不放门）
        t: 时间步数；不是 4 的倍数时为截断前缀
        du_source: U1/U3 的门来源：种子、统一的 4×4 门或函数 (步号, 子层号, 格点) → 门
        u24_source: U2/U4 的门来源，None 表示恒等
        words: 两个 U24 时间步各自的 U2/U4 序列（按时间顺序），默认 (U2,) 与 (U4,)

    Returns:
        CircuitSchedule2D
    """
    if t < 0:
        raise InvalidParameterError(f"t 不能为负: {t}")
    du = _gate_factory(du_source, 'du')
    if du is None:
        raise InvalidParameterError("必须给出 U1/U3 的门来源")
    uk = _gate_factory(u24_source, 'u')
    if len(words) != 2 or any(not w for w in words):
        raise InvalidParameterError("words 必须是两个非空的 U2/U4 序列")
    blocks = []
    for idx in range(1, t + 1):
        phase = (idx - 1) % 4
        if phase in (0, 2):
            role = 'U1' if phase == 0 else 'U3'
            layer = Layer2D(role, {s: du(idx, 0, s) for s in lat.bonds(role)})
            blocks.append(Block2D(role, [layer]))
        else:
            word = words[0] if phase == 1 else words[1]
            subs = []
            for sub, role in enumerate(word):
                gates = {}
                if uk is not None:
                    gates = {s: uk(idx, sub, s) for s in lat.bonds(role) if not lat.is_masked(s)}
                subs.append(Layer2D(role, gates))
            blocks.append(Block2D('U24', subs))
    return CircuitSchedule2D(lat, blocks)


@dataclass(frozen=True)
class RowsState2D:
    """按列排布的可解初态 |Ψ_A⟩^{⊗2M}：每一列是沿 j 方向的 N 元胞链。"""

    lattice: Lattice2D
    tensor: SolvableTensor

    @property
    def chain(self) -> SolvableState:
        return SolvableState(self.tensor, self.lattice.N)


def solvable_rows_state(lat: Lattice2D, A: SolvableTensor) -> RowsState2D:
    require_solvable(A)
    return RowsState2D(lat, A)


def rows_norm_sq(init: RowsState2D) -> float:
    return state_norm_sq(init.chain) ** init.lattice.cols


def rows_statevector(init: RowsState2D, cap: Optional[int] = None) -> Statevector:
    """展开为按行优先比特顺序排列的态矢量（未归一化）。"""
    lat = init.lattice
    cap = _cap_2d() if cap is None else cap
    check_cap(lat.num_qubits, cap, "二维 oracle")
    column = to_statevector(init.chain, cap).amplitudes
    amps = np.ones(1, dtype=complex)
    for _ in range(lat.cols):
        amps = np.kron(amps, column)
    n = lat.num_qubits
    order = [0] * n
    for j in range(1, lat.rows + 1):
        for k in range(1, lat.cols + 1):
            kron_index = (k - 1) * lat.rows + (j - 1)
            order[lat.qubit((j, k))] = n - 1 - kron_index
    return Statevector(n, amps, order).canonical()


def evolve_oracle_2d(c: CircuitSchedule2D, init: RowsState2D,
                     cap: Optional[int] = None) -> Statevector:
    if init.lattice.rows != c.lattice.rows or init.lattice.cols != c.lattice.cols:
        raise InvalidParameterError("初态与线路的格点尺寸不一致")
    state = rows_statevector(init, cap)
    return evolve(state, c.iter_gates())


def expectation_oracle_2d(c: CircuitSchedule2D, init: RowsState2D,
                          factors: Mapping[Site, np.ndarray],
                          cap: Optional[int] = None) -> complex:
    state = evolve_oracle_2d(c, init, cap)
    lat = c.lattice
    return expectation_local(state, {lat.qubit(lat.wrap(s)): f for s, f in factors.items()})


@dataclass(frozen=True)
class BlockObservable:
    """以 (i0, j0) 为左上角的 l×l 块观测量，factors[a][b] 作用在 (i0+a, j0+b)。"""

    i0: int
    j0: int
    factors: Tuple[Tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        l = len(self.factors)
        if l < 1 or any(len(row) != l for row in self.factors):
            raise InvalidParameterError("块观测量必须是 l×l 的")
        fs = tuple(tuple(np.asarray(f, dtype=complex) for f in row) for row in self.factors)
        for row in fs:
            for f in row:
                if f.shape != (2, 2):
                    raise InvalidParameterError("块观测量因子必须是 2×2 矩阵")
        object.__setattr__(self, 'factors', fs)

    @property
    def length(self) -> int:
        return len(self.factors)

    @classmethod
    def single(cls, site: Site, op: np.ndarray) -> 'BlockObservable':
        return cls(site[0], site[1], ((op,),))

    def site_factors(self, lat: Lattice2D) -> Dict[Site, np.ndarray]:
        return {lat.wrap((self.i0 + a, self.j0 + b)): f
                for a, row in enumerate(self.factors) for b, f in enumerate(row)}

    def trace_value(self) -> complex:
        return complex(np.prod([np.trace(f) / 2 for row in self.factors for f in row]))


@dataclass
class Cone2D:
    j_range: Tuple[int, int]
    k_range: Tuple[int, int]
    j_full: bool
    k_full: bool


# 子层角色与一维奇偶约定的对应：左端位点为偶数的层视为奇数层
_PARITY_TAU = {'U1': 1, 'U3': 2, 'U2': 2, 'U4': 1}


def cone_2d(c: CircuitSchedule2D, i0: int, j0: int, l: int, lk: Optional[int] = None) -> Cone2D:
    """l×lk 矩形（默认 l×l）的反向光锥在初始时刻的 j、k 范围（端点不折回）。"""
    lat = c.lattice
    lk = l if lk is None else lk
    aj, bj, ak, bk = i0, i0 + l - 1, j0, j0 + lk - 1
    j_full, k_full = l >= lat.rows, lk >= lat.cols
    layers = [layer for _, layer in c.iter_layers()]
    for layer in reversed(layers):
        tau = _PARITY_TAU[layer.role]
        if layer.role in J_ROLES and not j_full:
            if not is_left_site(aj, tau):
                aj -= 1
            if is_left_site(bj, tau):
                bj += 1
            j_full = bj - aj + 1 >= lat.rows
        elif layer.role in K_ROLES and not k_full:
            if not is_left_site(ak, tau):
                ak -= 1
            if is_left_site(bk, tau):
                bk += 1
            k_full = bk - ak + 1 >= lat.cols
    return Cone2D((aj, bj), (ak, bk), j_full, k_full)


def expectation_cone_2d(c: CircuitSchedule2D, init: RowsState2D, obs: BlockObservable,
                        cap: Optional[int] = None) -> complex:
    """精确收缩二维光锥。

    每一列光锥外的初态由转移矩阵收缩成混合态，并用辅助比特纯化；
    区域内的门全部作用，区域外的门由幺正性消去。
    """
    lat = c.lattice
    N = lat.N
    cone = cone_2d(c, obs.i0, obs.j0, obs.length)
    if cone.j_full:
        start_cell, L = 1, N
    else:
        aj, bj = cone.j_range
        first, last = (aj + 1) // 2, (bj + 1) // 2
        L = last - first + 1
        start_cell, L = (1, N) if L >= N else (((first - 1) % N) + 1, L)
    if cone.k_full:
        columns = list(range(1, lat.cols + 1))
    else:
        ak, bk = cone.k_range
        columns = [((k - 1) % lat.cols) + 1 for k in range(ak, bk + 1)]

    mixture = region_mixture(init.chain, start_cell, L)
    comps = [np.sqrt(w) * phi.amplitudes
             for w, phi in zip(mixture.weights, mixture.statevectors(init.tensor))]
    n_anc = int(math.ceil(math.log2(len(comps)))) if len(comps) > 1 else 0
    column_vec = np.zeros((1 << (2 * L), 1 << n_anc), dtype=complex)
    for m, vec in enumerate(comps):
        column_vec[:, m] = vec
    column_vec = column_vec.reshape(-1)
    per_col = 2 * L + n_anc
    total = per_col * len(columns)
    check_cap(total, _cap_2d() if cap is None else cap, "二维光锥区域")

    amps = np.ones(1, dtype=complex)
    for _ in columns:
        amps = np.kron(amps, column_vec)
    state = Statevector(total, amps)

    origin = 2 * start_cell - 1
    col_index = {k: i for i, k in enumerate(columns)}
    region_rows = {((origin - 1 + r) % lat.rows) + 1: r for r in range(2 * L)}

    def local(site: Site) -> Optional[int]:
        j, k = site
        if j not in region_rows or k not in col_index:
            return None
        return col_index[k] * per_col + region_rows[j]

    placements = []
    for g, a, b in c.iter_site_gates():
        qa, qb = local(a), local(b)
        if qa is not None and qb is not None:
            placements.append((g, qa, qb))
    evolve(state, placements)
    factors = {}
    for s, f in obs.site_factors(lat).items():
        q = local(s)
        if q is None:
            raise InvalidParameterError(f"观测量格点 {s} 不在光锥区域内")
        factors[q] = f
    return expectation_local(state, factors)


def fast_regime_2d(c: CircuitSchedule2D, init: RowsState2D, obs: BlockObservable) -> Tuple[str, str]:
    t, l, N = c.depth, obs.length, c.lattice.N
    if t < l + 1:
        return 'pre-cone', f"t={t} < l+1"
    cone = cone_2d(c, obs.i0, obs.j0, l)
    if cone.j_full or cone.k_full:
        return 'late', "光锥在环面上自相交"
    if init.tensor.chi > 1:
        delta = get_config()['fast_path']['delta']
        limit = math.floor(2 * (1 - delta) * N) - l
        if t > limit:
            return 'late', f"t={t} > ⌊2(1−δ)N⌋ − l = {limit}"
    return 'early', "早期区域"


def error_budget_2d(init: RowsState2D, l: int, t: int) -> ErrorBudget:
    """O(M·|λ1|^{⌊δN⌋}) 误差上界，常数与一维相同。"""
    lat = init.lattice
    spec = transfer_spectrum(init.tensor)
    if len(spec.eigenvalues) == 1:
        return ErrorBudget(0.0, lat.N, l, t, 0.0)
    cfg = get_config()['fast_path']
    exponent = math.floor(cfg['delta'] * lat.N)
    constant = cfg['budget_prefactor'] * len(spec.eigenvalues) * spec.condition
    bound = lat.M * constant * spec.lambda1_mod ** exponent
    return ErrorBudget(spec.lambda1_mod, lat.N, l, t, float(bound), exponent, float(constant))


def expectation_fast_2d(c: CircuitSchedule2D, init: RowsState2D,
                        obs: BlockObservable) -> Union[FastResult, LateTimeSignal]:
    """二维快速路径：早期区域返回 Tr(O)/2^{l²}，t < l+1 时精确收缩光锥。"""
    require_solvable(init.tensor)
    if not c.is_complete():
        raise InvalidParameterError("快速路径要求 U1/U3 层的每个键都放置对偶幺正门")
    t, l = c.depth, obs.length
    regime, why = fast_regime_2d(c, init, obs)
    logger.debug(f"二维快速路径区域: {regime} ({why})")
    if regime == 'late':
        return LateTimeSignal(why, c.lattice.N, l, t)
    if regime == 'pre-cone':
        value = expectation_cone_2d(c, init, obs)
        return FastResult(value, ErrorBudget(0.0, c.lattice.N, l, t, 0.0), regime)
    return FastResult(obs.trace_value(), error_budget_2d(init, l, t), regime)


@dataclass(frozen=True)
class CorrelationQuery:
    """site=(i, j)；direction 'j' 为 C1（沿第一坐标），'k' 为 C2（沿第二坐标）。"""

    site: Site
    direction: str
    r: int
    op: np.ndarray = field(default_factory=lambda: Z.copy())

    def __post_init__(self):
        if self.direction not in ('j', 'k'):
            raise InvalidParameterError(f"未知的方向: {self.direction}")
        if self.r < 0:
            raise InvalidParameterError("间距 r 不能为负")

    def partner(self) -> Site:
        i, j = self.site
        return (i + self.r, j) if self.direction == 'j' else (i, j + self.r)


@dataclass(frozen=True)
class CorrelationResult:
    direction: str
    site: Site
    r: int
    t: int
    value: complex
    method: str
    certified_zero: bool

    def to_row(self) -> List:
        return ['C1' if self.direction == 'j' else 'C2', self.site[0], self.site[1],
                self.r, self.t, self.value.real, self.value.imag,
                self.method, self.certified_zero]


CSV_HEADER = ['direction', 'i', 'j', 'r', 't', 're', 'im', 'method', 'certified_zero']


def _correlation_oracle(c: CircuitSchedule2D, init: RowsState2D, q: CorrelationQuery,
                        cap: Optional[int] = None) -> complex:
    state = evolve_oracle_2d(c, init, cap)
    lat = c.lattice
    a, b = lat.wrap(q.site), lat.wrap(q.partner())
    tr = np.trace(q.op) / 2
    if a == b:
        pair = expectation_local(state, {lat.qubit(a): q.op @ q.op})
    else:
        pair = expectation_local(state, {lat.qubit(a): q.op, lat.qubit(b): q.op})
    return complex(pair - tr * tr)


def _regime_holds(c: CircuitSchedule2D, q: CorrelationQuery) -> bool:
    """2N ≥ 2t − r，且两点之间区间的反向光锥不在环面上自相交。

    小环面上光锥绕回时两个算符可能落在同一个 EPR 对的两端
    （例如 4 行、全 SWAP、t=2、r=1），此时零关联不成立。
    """
    if q.r < 1 or c.lattice.rows < 2 * c.depth - q.r or not c.is_complete():
        return False
    i, j = q.site
    if q.direction == 'j':
        return not cone_2d(c, i, j, q.r + 1, lk=1).j_full
    cone = cone_2d(c, i, j, 1, lk=q.r + 1)
    return not (cone.j_full or cone.k_full)


def correlation_c1(c: CircuitSchedule2D, init: RowsState2D, q: CorrelationQuery,
                   verify: bool = False) -> CorrelationResult:
    """C1(r,t) = ⟨O_{i,j} O_{i+r,j}⟩ − (Tr O/2)²。

    EPR 初态且满足 _regime_holds 时直接给出 0 并附带证明标记，否则用 oracle。
    """
    if q.direction != 'j':
        raise InvalidParameterError("C1 只沿 j 方向")
    t = c.depth
    if _regime_holds(c, q) and init.tensor.chi == 1:
        if verify:
            value = _correlation_oracle(c, init, q)
            if abs(value) > get_config()['tolerance']['compare']:
                logger.warning(f"C1 解析值 0 与 oracle {value:.3e} 不符")
        return CorrelationResult('j', q.site, q.r, t, 0j, 'analytic', True)
    return CorrelationResult('j', q.site, q.r, t, _correlation_oracle(c, init, q), 'oracle', False)


def c2_may_be_nonzero(r: int, t: int, j: int) -> bool:
    """C2 可能非零的三种情形：r = t+1 且 j 为奇数，r = t，r = t−1 且 j 为偶数。"""
    return (r == t + 1 and j % 2 == 1) or r == t or (r == t - 1 and j % 2 == 0)


def correlation_c2_oracle(c: CircuitSchedule2D, init: RowsState2D, q: CorrelationQuery,
                          cap: Optional[int] = None) -> CorrelationResult:
    """C2(r,t) = ⟨O_{i,j} O_{i,j+r}⟩ − (Tr O/2)²。

    先做情形筛选：EPR 初态、满足 _regime_holds 且不属于三种情形时给出确定的 0，
    其余情况只能用稠密 oracle。
    """
    if q.direction != 'k':
        raise InvalidParameterError("C2 只沿 k 方向")
    t = c.depth
    if (_regime_holds(c, q) and init.tensor.chi == 1
            and not c2_may_be_nonzero(q.r, t, q.site[1])):
        return CorrelationResult('k', q.site, q.r, t, 0j, 'case-filter', True)
    return CorrelationResult('k', q.site, q.r, t, _correlation_oracle(c, init, q, cap), 'oracle', False)


@dataclass
class ClusterCircuit2D:
    circuit: CircuitSchedule2D
    graph: nx.Graph
    vertex_to_qubit: Dict[Site, int]


def cluster_circuit_2d(lat: Lattice2D) -> ClusterCircuit2D:
    """四个时间步把 EPR 列制备成周期方格团簇态。

    U1：SWAP·CZ·(H⊗I)；U2：CZ；U3：SWAP；U4：CZ。
    j 方向上偶数行的内容最终下移两行，奇数行上移两行。

    Returns:
        ClusterCircuit2D：线路、格点图（顶点为内容坐标）以及顶点到末态比特的映射
    """
    if lat.rows != lat.cols:
        raise InvalidParameterError(f"团簇线路需要方形格点，得到 {lat.rows}×{lat.cols}")
    if lat.rows < 4:
        raise InvalidParameterError("团簇线路需要边长至少为 4")
    if lat.edge_mask:
        raise InvalidParameterError("团簇线路不支持屏蔽键")
    swap_cz_h = build_dual_unitary(DualUnitaryParams(alpha=1.0, v1=H))
    blocks = [
        Block2D('U1', [Layer2D('U1', {s: swap_cz_h for s in lat.bonds('U1')})]),
        Block2D('U24', [Layer2D('U2', {s: CZ for s in lat.bonds('U2')})]),
        Block2D('U3', [Layer2D('U3', {s: SWAP for s in lat.bonds('U3')})]),
        Block2D('U24', [Layer2D('U4', {s: CZ for s in lat.bonds('U4')})]),
    ]
    graph = nx.grid_2d_graph(range(1, lat.rows + 1), range(1, lat.cols + 1), periodic=True)
    mapping = {}
    for j, k in graph.nodes:
        final_j = j + 2 if j % 2 == 0 else j - 2
        mapping[(j, k)] = lat.qubit(lat.wrap((final_j, k)))
    logger.info(f"二维团簇线路: {lat.rows}×{lat.cols}, 深度 4")
    return ClusterCircuit2D(CircuitSchedule2D(lat, blocks), graph, mapping)


@dataclass(frozen=True)
class KickedIsing2DParams:
    J: float = np.pi / 4
    h: float = 0.0
    b: float = np.pi / 4
    J_k: Optional[float] = None
    self_dual: bool = True

    @property
    def k_coupling(self) -> float:
        return self.J if self.J_k is None else self.J_k

    def validate(self):
        for name in ('J', 'h', 'b'):
            if not np.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} 必须为有限实数")
        if self.self_dual:
            if not np.isclose(abs(self.J), np.pi / 4, atol=1e-12):
                raise InvalidParameterError(f"自对偶点要求 |J| = π/4，得到 {self.J}")
            if not np.isclose(abs(self.b), np.pi / 4, atol=1e-12):
                raise InvalidParameterError(f"自对偶点要求 |b| = π/4，得到 {self.b}")


def _zz(J: float) -> np.ndarray:
    return expm(-1j * J * np.kron(Z, Z))


def kicked_ising_kernel(p: KickedIsing2DParams) -> np.ndarray:
    """U_KI 的两比特核：D·(K⊗K)·D，D = e^{−i(J Z⊗Z + h Z⊗I)}，K = e^{−ibX}。"""
    D = expm(-1j * (p.J * np.kron(Z, Z) + p.h * np.kron(Z, I2)))
    K = expm(-1j * p.b * X)
    return D @ np.kron(K, K) @ D


def kicked_ising_2d_floquet(p: KickedIsing2DParams, t: int,
                            lat: Optional[Lattice2D] = None) -> CircuitSchedule2D:
    """二维自对偶踢伊辛模型的 t 个周期 (U_I2 U_I4 U_KI3 U_I2 U_I4 U_KI1)^t。

    每个周期按时间顺序为 U1(KI1 核), U24(U4, U2), U3(KI3 核), U24(U4, U2)。

    Args:
        p: 模型参数；k 方向耦合 J_k 可以取任意实数
        t: 周期数
        lat: 格点，默认 4×4

    Returns:
        深度为 4t 的 CircuitSchedule2D
    """
    p.validate()
    if t < 0:
        raise InvalidParameterError("周期数不能为负")
    lat = Lattice2D(4, 4) if lat is None else lat
    kernel = kicked_ising_kernel(p)
    if not is_dual_unitary(kernel):
        raise NotDualUnitaryError("U_KI 核不是对偶幺正的（检查自对偶条件）")
    zz = _zz(p.k_coupling)

    def k_block() -> Block2D:
        return Block2D('U24', [
            Layer2D('U4', {s: zz for s in lat.bonds('U4') if not lat.is_masked(s)}),
            Layer2D('U2', {s: zz for s in lat.bonds('U2') if not lat.is_masked(s)}),
        ])

    blocks = []
    for _ in range(t):
        blocks.append(Block2D('U1', [Layer2D('U1', {s: kernel for s in lat.bonds('U1')})]))
        blocks.append(k_block())
        blocks.append(Block2D('U3', [Layer2D('U3', {s: kernel for s in lat.bonds('U3')})]))
        blocks.append(k_block())
    return CircuitSchedule2D(lat, blocks)


class KickedIsingFactors:
    """直接作用 U_K、U_I1..U_I4 因子（对角相位 + 单比特转动），用于校验线路。"""

    def __init__(self, p: KickedIsing2DParams, lat: Lattice2D):
        self.p = p
        self.lat = lat
        n = lat.num_qubits
        idx = np.arange(1 << n)
        self._z = {q: 1 - 2 * ((idx >> (n - 1 - q)) & 1) for q in range(n)}
        self._kick = expm(-1j * p.b * X)

    def _energy(self, role: str) -> np.ndarray:
        lat, p = self.lat, self.p
        energy = np.zeros(1 << lat.num_qubits)
        coupling = p.J if role in J_ROLES else p.k_coupling
        for site in lat.bonds(role):
            if role in K_ROLES and lat.is_masked(site):
                continue
            qa, qb = lat.qubit(site), lat.qubit(lat.partner(role, site))
            energy += coupling * self._z[qa] * self._z[qb]
            if role in J_ROLES:
                energy += p.h * self._z[qa]
        return energy

    def apply_ising(self, state: Statevector, role: str) -> Statevector:
        """U_I1 ↔ U1 键，U_I2 ↔ U2，U_I3 ↔ U3，U_I4 ↔ U4。"""
        state.amplitudes *= np.exp(-1j * self._energy(role))
        return state

    def apply_kick(self, state: Statevector) -> Statevector:
        for q in range(self.lat.num_qubits):
            apply_single(state, self._kick, q)
        return state

    def apply_sequence(self, state: Statevector, factors: Iterable[str]) -> Statevector:
        """按时间顺序作用因子序列，'K' 为踢，'U1'..'U4' 为对应的伊辛项。"""
        for f in factors:
            if f == 'K':
                self.apply_kick(state)
            else:
                self.apply_ising(state, f)
        return state

    def apply_floquet(self, state: Statevector) -> Statevector:
        """一个周期 U_K·U_I1·U_I2·U_I3·U_I4（最右边先作用）。"""
        return self.apply_sequence(state, ['U4', 'U3', 'U2', 'U1', 'K'])


# 一个电路周期对应的因子序列（时间顺序）：U_KI1, U_I4, U_I2, U_KI3, U_I4, U_I2
PERIOD_FACTORS = ['U1', 'K', 'U1', 'U4', 'U2', 'U3', 'K', 'U3', 'U4', 'U2']
# U_KI^{2t+1} = U_K U_I1 (周期)^t U_I2 U_I4 U_I3：周期之前与之后的因子（时间顺序）
ODD_POWER_BEFORE = ['U3', 'U4', 'U2']
ODD_POWER_AFTER = ['U1', 'K']


def random_state(n: int, seed) -> Statevector:
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return Statevector(n, amps / np.linalg.norm(amps))
