# test/test_circuit1d.py
"""一维对偶幺正线路：快速路径、误差预算、折叠转移矩阵与开边界。"""

import time

import numpy as np
import pytest

from duqc.circuit1d import (OPEN, CircuitSchedule1D, FastResult, LateTimeSignal,
                            LocalObservable, build_brickwork, causal_cone,
                            error_budget, expectation_cone, expectation_fast,
                            expectation_oracle, fast_regime, folded_transfer,
                            obc_boundary_expectation)
from duqc.errors import CapExceededError, InvalidParameterError, NotDualUnitaryError
from duqc.gates import CZ, P0, SWAP
from duqc.solvable_states import (FIXED, SolvableState, TransferSpectrum, epr_chain,
                                  epr_tensor, random_solvable_tensor, transfer_spectrum)


def random_pauli_observable(rng, num_sites, max_len=2):
    l = int(rng.integers(1, max_len + 1))
    labels = ''.join(rng.choice(list('XYZ')) for _ in range(l))
    start = int(rng.integers(1, num_sites + 1))
    return LocalObservable.pauli(labels, start)


def test_epr_single_site_z_is_zero():
    c = build_brickwork(4, 2, 0)
    result = expectation_fast(c, epr_chain(4), LocalObservable.pauli('Z', 3))
    assert isinstance(result, FastResult)
    assert result.regime == 'early'
    assert result.value == 0
    assert result.budget.bound == 0


@pytest.mark.parametrize("chi", [1, 2])
def test_fast_path_handles_huge_chain(chi):
    N = 500_000
    c = build_brickwork(N, 100, 1)
    init = SolvableState(random_solvable_tensor(chi, seed=4) if chi > 1 else epr_tensor(), N)
    start = time.perf_counter()
    result = expectation_fast(c, init, LocalObservable.pauli('Z', 12345))
    elapsed = time.perf_counter() - start
    assert isinstance(result, FastResult)
    assert result.value == 0
    assert result.regime == 'early'
    assert elapsed < 0.1


def test_projector_pair_gives_quarter():
    c = build_brickwork(4, 3, 5)
    P0 = np.diag([1.0, 0.0])
    result = expectation_fast(c, epr_chain(4), LocalObservable(2, (P0, P0)))
    assert result.value == pytest.approx(0.25)
    assert abs(expectation_oracle(c, epr_chain(4), LocalObservable(2, (P0, P0))) - 0.25) < 1e-10


@pytest.mark.parametrize("seed", range(200))
def test_fast_path_agrees_with_oracle_for_epr(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, 6))
    t = int(rng.integers(1, N + 2))
    c = build_brickwork(N, t, seed)
    obs = random_pauli_observable(rng, 2 * N)
    result = expectation_fast(c, epr_chain(N), obs)
    if isinstance(result, LateTimeSignal):
        return
    exact = expectation_oracle(c, epr_chain(N), obs)
    assert abs(result.value - exact) <= result.budget.bound + 1e-10


@pytest.mark.parametrize("seed", range(40))
def test_fast_path_within_budget_for_random_tensor(seed):
    rng = np.random.default_rng(1000 + seed)
    N = int(rng.integers(4, 7))
    t = int(rng.integers(1, N))
    A = random_solvable_tensor(2, seed=seed)
    init = SolvableState(A, N)
    c = build_brickwork(N, t, seed)
    obs = random_pauli_observable(rng, 2 * N, max_len=1)
    result = expectation_fast(c, init, obs)
    if isinstance(result, LateTimeSignal):
        return
    exact = expectation_oracle(c, init, obs)
    assert abs(result.value - exact) <= result.budget.bound + 1e-10


def test_all_swap_counterexample_is_late():
    # 全 SWAP、2N=6、ZZ 位于 (2,3)、t=2：光锥恰好绕环一周
    c = build_brickwork(3, 2, SWAP)
    obs = LocalObservable.pauli('ZZ', 2)
    result = expectation_fast(c, epr_chain(3), obs)
    assert isinstance(result, LateTimeSignal)
    assert expectation_oracle(c, epr_chain(3), obs) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(10))
def test_pre_cone_regime_is_exact(seed):
    A = random_solvable_tensor(2, seed=seed)
    init = SolvableState(A, 4)
    c = build_brickwork(4, 1, seed)
    obs = LocalObservable.pauli('X', 3)
    result = expectation_fast(c, init, obs)
    assert result.regime == 'pre-cone'
    assert abs(result.value - expectation_oracle(c, init, obs)) < 1e-10


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("boundary", ['periodic', FIXED])
def test_cone_contraction_is_exact(seed, boundary):
    A = random_solvable_tensor(2, seed=seed)
    init = SolvableState(A, 5, boundary, alpha=1, beta=1)
    c = build_brickwork(5, 3, seed)
    obs = LocalObservable.pauli('ZX', 4)
    assert abs(expectation_cone(c, init, obs) - expectation_oracle(c, init, obs)) < 1e-10


def test_late_regime_for_random_tensor():
    A = random_solvable_tensor(2, seed=0)
    c = build_brickwork(5, 4, 0)
    regime, _ = fast_regime(c, SolvableState(A, 5), LocalObservable.pauli('Z', 1))
    assert regime == 'late'


def test_error_budget_formula():
    spec = TransferSpectrum(np.array([1.0, 0.5, 0.1, 0.05]), np.eye(4), True,
                            np.eye(4)[:, 0], 1.0)
    budget = error_budget(spec, 10, 2, 4)
    assert budget.exponent == 4
    assert budget.constant == pytest.approx(8.0)
    assert budget.bound == pytest.approx(8.0 * (0.5 ** 4 + 0.5 ** 10))


def test_error_budget_is_zero_for_epr():
    spec = transfer_spectrum(epr_chain(3).tensor)
    assert error_budget(spec, 3, 1, 1).bound == 0


def _well_separated_tensor():
    for seed in range(100):
        A = random_solvable_tensor(2, seed=seed)
        spec = transfer_spectrum(A)
        if spec.lambda1_mod < 0.6 and spec.condition < 5:
            return A, spec
    raise AssertionError("没有找到谱隙足够大的张量")


def test_finite_size_error_decays_with_n():
    A, spec = _well_separated_tensor()
    obs = LocalObservable.pauli('Z', 3)
    errors = []
    for N in range(4, 15):
        c = build_brickwork(N, 2, 77)
        exact = expectation_cone(c, SolvableState(A, N), obs)
        err = abs(exact - obs.trace_value())
        errors.append(err)
        assert err <= error_budget(spec, N, 1, 2).bound + 1e-12
    assert errors[-1] < 0.1


def _real_gap_tensor():
    for seed in range(200):
        A = random_solvable_tensor(2, seed=seed)
        spec = transfer_spectrum(A)
        lam1 = spec.lambda1
        lam2 = abs(spec.eigenvalues[2]) if len(spec.eigenvalues) > 2 else 0.0
        if abs(lam1.imag) < 1e-9 and 0.3 < abs(lam1) < 0.7 and lam2 < 0.5 * abs(lam1):
            return A, spec
    raise AssertionError("没有找到次大本征值为实数的张量")


def test_finite_size_error_slope_matches_lambda1():
    A, spec = _real_gap_tensor()
    obs = LocalObservable.pauli('Z', 3)
    sizes, logs = [], []
    for N in range(6, 15):
        c = build_brickwork(N, 2, 77)
        err = abs(expectation_cone(c, SolvableState(A, N), obs) - obs.trace_value())
        if err > 1e-13:
            sizes.append(N)
            logs.append(np.log(err))
    assert len(sizes) >= 5
    slope = np.polyfit(sizes, logs, 1)[0]
    # 每增加一个元胞（两个位点），误差乘以 |λ1|
    assert abs(slope / np.log(spec.lambda1_mod) - 1) < 0.2


def test_causal_cone_bonds():
    c = build_brickwork(4, 2, 0)
    cone = causal_cone(c, LocalObservable.pauli('Z', 4))
    # τ=2 的键左端为奇数位点，位点 4 属于键 (3,4)
    assert cone.bonds[1] == [3]
    assert cone.bonds[0] == [2, 4]
    assert cone.bottom == (2, 5)
    assert not cone.full


@pytest.mark.parametrize("t", [1, 2])
@pytest.mark.parametrize("seed", range(3))
def test_folded_transfer_fixed_vector(t, seed):
    A = random_solvable_tensor(2, seed=seed)
    c = build_brickwork(4, 3, seed)
    ft = folded_transfer(c, SolvableState(A, 4), t)
    assert ft.right_residual < 1e-10
    assert ft.left_residual < 1e-10
    vals, vecs = np.linalg.eig(ft.matrix)
    order = np.argsort(-np.abs(vals))
    lam1 = abs(vals[order[1]])
    cond = np.linalg.cond(vecs)
    proj = np.outer(ft.fixed_vec, ft.fixed_vec.conj())
    power = np.eye(ft.matrix.shape[0], dtype=complex)
    for M in range(1, 9):
        power = power @ ft.matrix
        residual = np.max(np.abs(power - proj))
        assert residual <= ft.matrix.shape[0] * cond * lam1 ** M + 1e-8


def test_folded_transfer_respects_cap():
    c = build_brickwork(6, 6, 0)
    with pytest.raises(CapExceededError):
        folded_transfer(c, epr_chain(6), 5)


def epr_fixed(N):
    return SolvableState(epr_tensor(), N, FIXED)


@pytest.mark.parametrize("seed", range(50))
def test_open_boundary_ladder_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    N = 4
    t = int(rng.integers(1, 4))
    c = build_brickwork(N, t, seed, boundary=OPEN)
    l = int(rng.integers(1, N + 1))
    start = int(rng.integers(1, N - l + 2)) + N * int(rng.integers(2))
    obs = LocalObservable.pauli(''.join(rng.choice(list('XYZ'), size=l)), start)
    result = obc_boundary_expectation(c, epr_fixed(N), obs)
    assert isinstance(result, FastResult)
    assert result.method == 'obc-ladder'
    assert result.budget.bound == 0
    assert abs(result.value - expectation_oracle(c, epr_fixed(N), obs)) < 1e-10


@pytest.mark.parametrize("t", range(1, 4))
def test_open_boundary_ladder_with_long_observable(t):
    # 四个位点的可观测量在链端附近留下不可消去的门
    N = 5
    for labels in ('XXXX', 'ZYXZ'):
        obs = LocalObservable.pauli(labels, 2)
        for seed in (1, 2):
            c = build_brickwork(N, t, seed, boundary=OPEN)
            result = obc_boundary_expectation(c, epr_fixed(N), obs)
            assert abs(result.value - expectation_oracle(c, epr_fixed(N), obs)) < 1e-10


@pytest.mark.parametrize("t", range(1, 7))
@pytest.mark.parametrize("start", [1, 39])
def test_open_boundary_swap_gates_give_trace_value(t, start):
    N = 20
    c = build_brickwork(N, t, SWAP, boundary=OPEN)
    for obs in (LocalObservable.pauli('ZZ', start), LocalObservable(start, (P0, P0)),
                LocalObservable.pauli('X', start)):
        result = obc_boundary_expectation(c, epr_fixed(N), obs)
        assert abs(result.value - obs.trace_value()) < 1e-12


def test_open_boundary_identity_gives_one():
    c = build_brickwork(6, 4, 3, boundary=OPEN)
    result = obc_boundary_expectation(c, epr_fixed(6), LocalObservable.pauli('III', 1))
    assert result.value == pytest.approx(1.0)


def test_open_boundary_ladder_is_polynomial_in_t():
    obs = LocalObservable.pauli('XZY', 1)
    start = time.perf_counter()
    values = [obc_boundary_expectation(build_brickwork(N, 30, 7, boundary=OPEN), epr_fixed(N), obs)
              for N in (40, 60)]
    elapsed = time.perf_counter() - start
    assert all(isinstance(v, FastResult) for v in values)
    # EPR 初态下结果与链长无关
    assert abs(values[0].value - values[1].value) < 1e-12
    assert abs(values[1].value) <= 1 + 1e-12
    assert elapsed < 10


def test_open_boundary_budget_for_random_tensor():
    A = random_solvable_tensor(2, seed=3)
    c = build_brickwork(6, 2, 0, boundary=OPEN)
    result = obc_boundary_expectation(c, SolvableState(A, 6, FIXED), LocalObservable.pauli('Z', 1))
    assert isinstance(result, FastResult)
    # 光锥底部为位点 1..3，右侧还剩 4 个完整元胞
    assert result.budget.exponent == 4
    assert result.budget.bound > 0


def test_open_boundary_far_end_is_late():
    c = build_brickwork(2, 4, 0, boundary=OPEN)
    result = obc_boundary_expectation(c, epr_fixed(2), LocalObservable.pauli('Z', 1))
    assert isinstance(result, LateTimeSignal)


def test_open_boundary_rejects_middle_observable():
    init = SolvableState(random_solvable_tensor(2, seed=0), 3, FIXED)
    c = build_brickwork(3, 1, 0, boundary=OPEN)
    result = obc_boundary_expectation(c, init, LocalObservable.pauli('ZZ', 3))
    assert isinstance(result, LateTimeSignal)


def test_non_dual_unitary_gate_rejected():
    with pytest.raises(NotDualUnitaryError):
        build_brickwork(2, 1, CZ)


def test_wrong_bond_parity_rejected():
    with pytest.raises(InvalidParameterError):
        CircuitSchedule1D(2, 1, layers=[{1: SWAP}])


def test_open_chain_has_no_wrap_bond():
    c = CircuitSchedule1D(2, 1, OPEN, layers=[{2: SWAP}])
    assert c.bonds(1) == [2]
    with pytest.raises(InvalidParameterError):
        CircuitSchedule1D(2, 1, OPEN, layers=[{4: SWAP}])


def test_seeded_circuits_are_reproducible():
    a = build_brickwork(3, 2, 42)
    b = build_brickwork(3, 2, 42)
    for (ga, qa, qb), (gb, ra, rb) in zip(a.iter_gates(), b.iter_gates()):
        assert np.array_equal(ga, gb)
        assert (qa, qb) == (ra, rb)


def test_observable_out_of_range():
    c = build_brickwork(2, 1, 0)
    with pytest.raises(InvalidParameterError):
        expectation_oracle(c, epr_chain(2), LocalObservable.pauli('Z', 5))


def test_truncation_keeps_prefix():
    c = build_brickwork(3, 4, 9)
    short = c.truncated(2)
    assert short.depth == 2
    assert np.array_equal(short.gate(2, 1), c.gate(2, 1))
