# duqc/cli.py
"""命令行入口。

子命令：verify-gate、expval、cluster、corr、compile、bench、sample。
退出码：0 成功，1 校验未通过，2 输入错误，3 快速路径不作断言（晚期区域），4 超出资源上限。
"""

import argparse
import json
import logging
import re
import sys
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .circuit1d import (OPEN, LateTimeSignal, LocalObservable, build_brickwork,
                        evolve_oracle, expectation_fast, expectation_oracle,
                        obc_boundary_expectation)
from .circuit2d import (CSV_HEADER, BlockObservable, CircuitSchedule2D,
                        CorrelationQuery, KickedIsing2DParams, Lattice2D,
                        build_2d_duqc, cluster_circuit_2d, correlation_c1,
                        correlation_c2_oracle, evolve_oracle_2d,
                        expectation_fast_2d, expectation_oracle_2d,
                        kicked_ising_2d_floquet, solvable_rows_state)
from .compile1d import (TargetCircuit, cluster_circuit_1d, cluster_size_to_m,
                        compile_long_range_cz, compile_universal)
from .config import get_config, override, reset_config, setup_logging
from .errors import DUQCError, InvalidParameterError, SerializationError
from .gates import (P0, P1, PAULI, contraction_residuals, dual_unitarity_residual,
                    unitarity_residual)
from .oracle import sample_outcomes, verify_stabilizers
from .serialization import (circuit1d_to_json, circuit2d_to_json, decode_complex_array,
                            gate_from_json, load_circuit, load_tensor, read_json,
                            write_csv, write_json)
from .solvable_states import (FIXED, PERIODIC, SolvableState, SolvableTensor,
                              epr_chain, epr_tensor)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_NO_CLAIM = 3

SINGLE_OPS = dict(PAULI, P0=P0, P1=P1)
_TOKEN = re.compile(r'P[01]|[IXYZ]')


@dataclass(frozen=True)
class DecisionInstance:
    """承诺问题实例：真值要么 ≥ a，要么 ≤ b。"""

    a: float
    b: float
    estimate: float
    bound: float = 0.0

    def __post_init__(self):
        if not self.a > self.b:
            raise InvalidParameterError(f"需要 a > b，得到 a={self.a}, b={self.b}")

    @property
    def verdict(self) -> str:
        if self.bound >= (self.a - self.b) / 2:
            return 'indeterminate'
        return '>=a' if self.estimate >= (self.a + self.b) / 2 else '<=b'

    def to_dict(self) -> dict:
        return {'a': self.a, 'b': self.b, 'estimate': self.estimate, 'verdict': self.verdict}


def parse_labels(labels: str) -> List[np.ndarray]:
    tokens = _TOKEN.findall(labels.upper())
    if not tokens or ''.join(tokens) != labels.upper():
        raise InvalidParameterError(f"无法解析算符串: {labels!r}")
    return [SINGLE_OPS[t] for t in tokens]


def parse_observable_1d(spec: str, num_sites: int) -> LocalObservable:
    """'Z@3'、'ZZ@4,5'、'P0@1'，或 'file:<path>'（{"start": s, "factors": [...]}）。"""
    if spec.startswith('file:'):
        obj = read_json(spec[5:])
        try:
            factors = [decode_complex_array(f, (2, 2)) for f in obj['factors']]
            return LocalObservable(int(obj['start']), tuple(factors))
        except (KeyError, TypeError) as e:
            raise SerializationError(f"可观测量文件格式错误: {e}")
    if '@' not in spec:
        raise InvalidParameterError(f"可观测量应写成 <算符>@<位点>，得到 {spec!r}")
    labels, where = spec.split('@', 1)
    factors = parse_labels(labels)
    try:
        sites = [int(s) for s in where.split(',')]
    except ValueError:
        raise InvalidParameterError(f"无法解析位点: {where!r}")
    if len(sites) not in (1, len(factors)):
        raise InvalidParameterError(f"{len(factors)} 个因子对应 {len(sites)} 个位点")
    for prev, cur in zip(sites, sites[1:]):
        if cur != prev % num_sites + 1:
            raise InvalidParameterError(f"位点必须连续: {where}")
    return LocalObservable(sites[0], tuple(factors))


def parse_observable_2d(spec: str) -> BlockObservable:
    """'<l² 个算符>@<i>:<j>'，按行优先填入以 (i, j) 为左上角的 l×l 块。"""
    if '@' not in spec or ':' not in spec:
        raise InvalidParameterError(f"二维可观测量应写成 <算符>@<i>:<j>，得到 {spec!r}")
    labels, where = spec.split('@', 1)
    factors = parse_labels(labels)
    l = int(round(np.sqrt(len(factors))))
    if l * l != len(factors):
        raise InvalidParameterError(f"二维块观测量需要 l² 个因子，得到 {len(factors)}")
    try:
        i0, j0 = (int(x) for x in where.split(':'))
    except ValueError:
        raise InvalidParameterError(f"无法解析格点: {where!r}")
    rows = tuple(tuple(factors[a * l:(a + 1) * l]) for a in range(l))
    return BlockObservable(i0, j0, rows)


def parse_site(spec: str) -> Tuple[int, int]:
    try:
        i, j = (int(x) for x in spec.split(':'))
    except ValueError:
        raise InvalidParameterError(f"格点应写成 i:j，得到 {spec!r}")
    return i, j


def parse_int_list(spec: str) -> List[int]:
    try:
        return [int(x) for x in spec.split(',') if x.strip()]
    except ValueError:
        raise InvalidParameterError(f"无法解析整数列表: {spec!r}")


def tensor_from_spec(spec: str) -> SolvableTensor:
    if spec == 'epr':
        return epr_tensor()
    if spec.startswith('solvable:'):
        return load_tensor(spec[len('solvable:'):])
    raise InvalidParameterError(f"未知的初态: {spec!r}")


def build_state(spec: str, num_cells: int, boundary: str = PERIODIC) -> SolvableState:
    """'epr' 或 'solvable:<张量 JSON 路径>'；开边界线路使用固定边界 α=β=0。"""
    tensor = tensor_from_spec(spec)
    return SolvableState(tensor, num_cells, FIXED if boundary == OPEN else PERIODIC)


def _value_json(value: complex) -> List[float]:
    return [float(np.real(value)), float(np.imag(value))]


def _emit(args, data: Dict):
    """按配置的输出格式写出；csv 时每个顶层字段一行，值为 JSON 文本。"""
    if get_config()['output']['format'] == 'csv':
        rows = [[key, json.dumps(value, ensure_ascii=False)] for key, value in data.items()]
        write_csv(args.out, ['key', 'value'], rows)
    else:
        write_json(args.out, data)


def cmd_verify_gate(args) -> int:
    g = gate_from_json(read_json(args.gate))
    tol = args.tol if args.tol is not None else get_config()['tolerance']['unitarity']
    u_res = unitarity_residual(g)
    d_res = dual_unitarity_residual(g)
    time_like, space_like = contraction_residuals(g)
    report = {
        'unitary': bool(u_res <= tol),
        'dual_unitary': bool(u_res <= tol and d_res <= tol),
        'residuals': {'unitarity': u_res, 'dual_unitarity': d_res,
                      'time_like': time_like, 'space_like': space_like},
    }
    _emit(args, report)
    return EXIT_OK


def _fast_any(c, init, obs):
    if isinstance(c, CircuitSchedule2D):
        return expectation_fast_2d(c, init, obs)
    if c.boundary == OPEN:
        return obc_boundary_expectation(c, init, obs)
    return expectation_fast(c, init, obs)


def _oracle_any(c, init, obs, cap: Optional[int]) -> complex:
    if isinstance(c, CircuitSchedule2D):
        return expectation_oracle_2d(c, init, obs.site_factors(c.lattice), cap)
    return expectation_oracle(c, init, obs, cap)


def _prepare_expval(args):
    c = load_circuit(args.circuit, args.t)
    if isinstance(c, CircuitSchedule2D):
        init = solvable_rows_state(c.lattice, tensor_from_spec(args.state))
        obs = parse_observable_2d(args.obs)
    else:
        init = build_state(args.state, c.num_cells, c.boundary)
        obs = parse_observable_1d(args.obs, c.num_qubits)
    return c, init, obs


def cmd_expval(args) -> int:
    c, init, obs = _prepare_expval(args)
    cap = args.cap
    out: Dict = {}
    code = EXIT_OK
    estimate, bound = None, 0.0
    if args.method in ('fast', 'both'):
        fast = _fast_any(c, init, obs)
        out = fast.to_dict()
        if isinstance(fast, LateTimeSignal):
            code = EXIT_NO_CLAIM
            logger.info(f"快速路径不作断言: {fast.reason}")
        else:
            estimate, bound = fast.value, fast.budget.bound
    if args.method in ('oracle', 'both'):
        value = _oracle_any(c, init, obs, cap)
        if args.method == 'oracle':
            out = {'value': _value_json(value), 'method': 'oracle', 'bound': 0.0, 'regime': None}
            estimate, bound = value, 0.0
        else:
            tol = args.tol if args.tol is not None else get_config()['tolerance']['compare']
            out = {'fast': out, 'oracle': {'value': _value_json(value), 'method': 'oracle'}}
            if estimate is not None:
                delta = abs(estimate - value)
                allowed = tol + bound
                out.update({'delta': delta, 'tolerance': allowed, 'pass': bool(delta <= allowed)})
                if delta > allowed:
                    code = EXIT_FAILED
            out['regime'] = out['fast'].get('regime')
    if args.dump_state:
        state = (evolve_oracle_2d(c, init, cap) if isinstance(c, CircuitSchedule2D)
                 else evolve_oracle(c, init, cap))
        state.normalized().dump(args.dump_state)
    if args.decide and estimate is not None:
        a, b = args.decide
        out['decision'] = DecisionInstance(a, b, float(np.real(estimate)), bound).to_dict()
    _emit(args, out)
    return code


def cmd_cluster(args) -> int:
    if args.dim == '1d':
        m = cluster_size_to_m(args.size)
        cc = cluster_circuit_1d(m)
        state = evolve_oracle(cc.circuit, epr_chain(cc.circuit.num_cells), args.cap).normalized()
        results = verify_stabilizers(state, cc.graph, cc.vertex_to_qubit(), args.tol)
    else:
        lat = Lattice2D(args.size, args.size)
        cc = cluster_circuit_2d(lat)
        init = solvable_rows_state(lat, epr_tensor())
        state = evolve_oracle_2d(cc.circuit, init, args.cap).normalized()
        results = verify_stabilizers(state, cc.graph, cc.vertex_to_qubit, args.tol)
    passed = all(r.passed for r in results)
    report = {
        'dim': args.dim, 'size': args.size, 'pass': passed,
        'stabilizers': [{'vertex': list(r.vertex), 'qubit': r.qubit,
                         'value': r.value, 'passed': r.passed} for r in results],
    }
    _emit(args, report)
    return EXIT_OK if passed else EXIT_FAILED


def _corr_circuit(args, lat: Lattice2D) -> CircuitSchedule2D:
    if args.kicked is not None:
        p = KickedIsing2DParams(h=args.kicked, J_k=args.jk)
        periods = -(-args.t // 4)
        return kicked_ising_2d_floquet(p, periods, lat).truncated(args.t)
    return build_2d_duqc(lat, args.t, args.seed, args.seed + 1)


def cmd_corr(args) -> int:
    lat = Lattice2D(args.rows, args.cols)
    c = _corr_circuit(args, lat)
    init = solvable_rows_state(lat, tensor_from_spec(args.state))
    op = parse_labels(args.op)
    if len(op) != 1:
        raise InvalidParameterError("关联函数只支持单比特算符")
    site = parse_site(args.site)
    rows = []
    for r in parse_int_list(args.r):
        q = CorrelationQuery(site, args.direction, r, op[0])
        res = correlation_c1(c, init, q) if args.direction == 'j' else correlation_c2_oracle(c, init, q, args.cap)
        rows.append(res.to_row())
    write_csv(args.out, CSV_HEADER, rows)
    return EXIT_OK


def _parse_target(obj) -> TargetCircuit:
    ops = []
    for op in obj.get('ops', []):
        if op[0] == 'u':
            ops.append(('u', int(op[1]), decode_complex_array(op[2], (2, 2))))
        elif op[0] == 'cz':
            ops.append(('cz', int(op[1]), int(op[2])))
        else:
            raise SerializationError(f"未知的目标操作: {op[0]}")
    return TargetCircuit(int(obj['num_qubits']), ops)


def cmd_compile(args) -> int:
    extra = {}
    if args.kind == 'cz':
        pairs = [tuple(parse_int_list(p)) for p in args.pairs.split(';')]
        c = compile_long_range_cz(args.N, pairs)
    elif args.kind == 'universal':
        emb = compile_universal(_parse_target(read_json(args.target)), args.N)
        c = emb.circuit
        extra = {'readout_site': emb.readout_site, 'logical_origins': emb.logical_origins}
    elif args.kind == 'cluster1d':
        cc = cluster_circuit_1d(args.m)
        c = cc.circuit
        extra = {'site_to_vertex': {str(s): list(v) for s, v in cc.site_to_vertex.items()}}
    else:
        c = cluster_circuit_2d(Lattice2D(args.size, args.size)).circuit
    data = circuit2d_to_json(c) if isinstance(c, CircuitSchedule2D) else circuit1d_to_json(c)
    data.update(extra)
    _emit(args, data)
    return EXIT_OK


BENCH_HEADER = ['mode', 'qubits', 't', 'seconds', 're', 'im']


def cmd_bench(args) -> int:
    rows = []
    obs = LocalObservable.pauli(args.obs_labels, 1)
    for n in parse_int_list(args.sizes):
        if n % 2:
            raise InvalidParameterError(f"比特数必须为偶数: {n}")
        N = n // 2
        c = build_brickwork(N, args.t, args.seed)
        init = epr_chain(N)
        start = time.perf_counter()
        if args.mode == 'fast':
            res = expectation_fast(c, init, obs)
            value = None if isinstance(res, LateTimeSignal) else res.value
        else:
            value = expectation_oracle(c, init, obs, args.cap)
        elapsed = time.perf_counter() - start
        re_part, im_part = ('', '') if value is None else _value_json(value)
        rows.append([args.mode, n, args.t, elapsed, re_part, im_part])
        logger.info(f"bench {args.mode}: 2N={n}, t={args.t}, {elapsed:.4f}s")
    write_csv(args.out, BENCH_HEADER, rows)
    return EXIT_OK


def cmd_sample(args) -> int:
    c = load_circuit(args.circuit, args.t)
    if isinstance(c, CircuitSchedule2D):
        init = solvable_rows_state(c.lattice, tensor_from_spec(args.state))
        state = evolve_oracle_2d(c, init, args.cap)
    else:
        state = evolve_oracle(c, build_state(args.state, c.num_cells, c.boundary), args.cap)
    samples = sample_outcomes(state.normalized(), args.shots, args.seed)
    text = ''.join(s + '\n' for s in samples)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info(f"已写入 {len(samples)} 个样本到 {args.out}")
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help="随机种子")
    common.add_argument('--tol', type=float, default=None, help="比较容差")
    common.add_argument('--cap', type=int, default=None, help="稠密 oracle 的比特上限")
    common.add_argument('--out', default=None, help="输出路径，缺省为标准输出")
    common.add_argument('--format', choices=('json', 'csv'), default=None, help="输出格式")
    common.add_argument('--config', default=None, help="yaml 配置文件")
    common.add_argument('--log-level', default='WARNING', help="日志级别")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog='duqc', description="对偶幺正量子线路模拟与校验工具")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('verify-gate', parents=[common], help="检查门的幺正性与对偶幺正性")
    p.add_argument('gate', help="门 JSON 文件")
    p.set_defaults(func=cmd_verify_gate)

    p = sub.add_parser('expval', parents=[common], help="局域可观测量的期望值")
    p.add_argument('--circuit', required=True)
    p.add_argument('--state', default='epr', help="epr 或 solvable:<张量 JSON>")
    p.add_argument('--obs', required=True, help="例如 Z@3、ZZ@4,5、P0@1；二维为 ZZZZ@1:1")
    p.add_argument('--method', choices=('fast', 'oracle', 'both'), default='fast',
                   help="both 同时运行两者，|fast − oracle| ≤ tol + bound 判为通过（bound 为快速路径的误差预算）")
    p.add_argument('--t', type=int, default=None, help="截断到前 t 层")
    p.add_argument('--dump-state', default=None, help="把演化后的态矢量写入该路径")
    p.add_argument('--decide', type=float, nargs=2, metavar=('A', 'B'), default=None,
                   help="承诺阈值 a > b，输出判定结果")
    p.set_defaults(func=cmd_expval)

    p = sub.add_parser('cluster', parents=[common], help="制备团簇态并校验稳定子")
    p.add_argument('--dim', choices=('1d', '2d'), required=True)
    p.add_argument('--size', type=int, required=True, help="1d 为比特数 (2m)²，2d 为格点边长")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser('corr', parents=[common], help="二维两点关联函数 C1/C2")
    p.add_argument('--rows', type=int, default=4)
    p.add_argument('--cols', type=int, default=4)
    p.add_argument('--t', type=int, required=True)
    p.add_argument('--direction', choices=('j', 'k'), required=True)
    p.add_argument('--site', default='1:1', help="i:j")
    p.add_argument('--r', default='1', help="逗号分隔的间距")
    p.add_argument('--op', default='Z')
    p.add_argument('--state', default='epr')
    p.add_argument('--kicked', type=float, default=None, help="使用踢伊辛线路，给出纵场 h")
    p.add_argument('--jk', type=float, default=None, help="踢伊辛 k 方向耦合")
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser('compile', parents=[common], help="构造性编译，输出线路 JSON")
    p.add_argument('kind', choices=('cz', 'universal', 'cluster1d', 'cluster2d'))
    p.add_argument('--N', type=int, default=None)
    p.add_argument('--pairs', default=None, help="例如 '1,4;2,5'")
    p.add_argument('--target', default=None, help="目标线路 JSON")
    p.add_argument('--m', type=int, default=1)
    p.add_argument('--size', type=int, default=4)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser('bench', parents=[common], help="快速路径与 oracle 的耗时扫描")
    p.add_argument('--mode', choices=('fast', 'oracle'), default='fast')
    p.add_argument('--sizes', default='8,10,12', help="逗号分隔的比特数 2N")
    p.add_argument('--t', type=int, default=2)
    p.add_argument('--obs-labels', default='Z')
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('sample', parents=[common], help="计算基测量采样")
    p.add_argument('--circuit', required=True)
    p.add_argument('--state', default='epr', help="epr 或 solvable:<张量 JSON>；二维线路按行使用同一张量")
    p.add_argument('--shots', type=int, required=True)
    p.add_argument('--t', type=int, default=None)
    p.set_defaults(func=cmd_sample)
    return parser


def _apply_overrides(args):
    if args.config:
        reset_config(args.config)
    if args.cap is not None:
        if args.cap < 1:
            raise InvalidParameterError(f"比特上限必须为正: {args.cap}")
        override('oracle', 'qubit_cap', args.cap)
        override('oracle', 'qubit_cap_2d', args.cap)
    if args.format is not None:
        override('output', 'format', args.format)


def _check_compile_args(args):
    if args.command != 'compile':
        return
    if args.kind == 'cz' and (args.N is None or not args.pairs):
        raise InvalidParameterError("compile cz 需要 --N 与 --pairs")
    if args.kind == 'universal' and not args.target:
        raise InvalidParameterError("compile universal 需要 --target")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数。"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(getattr(logging, str(args.log_level).upper(), logging.WARNING))
    try:
        _apply_overrides(args)
        _check_compile_args(args)
        return args.func(args)
    except DUQCError as e:
        logger.error(str(e))
        print(f"错误: {e}", file=sys.stderr)
        return e.exit_code
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        logger.error(f"输入错误: {e}")
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
