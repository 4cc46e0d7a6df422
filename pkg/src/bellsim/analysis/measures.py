"""
Bell 비국소성 정량화 (단위: bit)

- kl_divergence / channel_divergence: 고전 채널 상대 엔트로피 (입력별 KL 의 최댓값)
- rel_entropy_nonlocality: 국소 폴리토프까지의 최소 채널 발산, 두 독립 solver 로 교차 검증
- minimal_extension_state: 상태에서 LOCC 로 얻을 수 있는 비국소성의 하한 (seesaw)
- dpi_monotonicity_check / dpi_sweep: LOSR 슈퍼프로세스에 대한 단조성 검사
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
import torch

from bellsim.core import SimConfig, ValidationError, DimensionMismatchError, echo
from bellsim.core.tensor import inv_sqrt_psd
from bellsim.builder.states import DensityMatrix, Povm, chsh_optimal_povms
from bellsim.builder.channels import QuantumChannel, classical_channel, has_classical_output
from bellsim.builder.instruments import local_filter_protocol
from bellsim.builder.generators import Seed, make_rng
from bellsim.engine.divergence import (
    MinimaxProblem, kl_bits, projected_subgradient, mirror_descent, multi_restart, floor_weights,
)
from bellsim.engine import seesaw
from bellsim.process.model import Process
from bellsim.process.superprocess import Superprocess, SuperprocessForm, apply_superprocess, losr_superprocess
from .locality import (
    Behavior, Scenario, CHSH_SCENARIO, is_local, vertex_matrix, behavior_from_state, behavior_from_prelocc,
    behavior_to_channel, channel_to_behavior, noisy_pr_box, tsirelson_behavior, chsh_value,
    mix_behaviors, random_local_behavior, horodecki_optimal_povms,
)


@dataclass
class MeasureResult:
    """
    :param value: 측정값 (bit, 0 이상으로 클램프)
    :param argmin_weights: 최적 국소 모델의 꼭짓점 가중치
    :param gap: 두 독립 solver 값의 차이 (최적성 간격 추정)
    :param converged: gap ≤ SOLVER_GAP_TOL
    """
    value: float
    argmin_weights: Optional[np.ndarray] = None
    gap: float = 0.0
    iterations: int = 0
    converged: bool = True
    details: dict = field(default_factory=dict)


def _check_distribution(p: np.ndarray, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -SimConfig.EPS_CLAMP) or abs(p.sum() - 1.0) > SimConfig.EPS_TRACE:
        raise ValidationError(f"❌ {name} 가 정규화된 확률 분포가 아닙니다 (합 {p.sum():.12f}).", invariant="normalized")
    return np.clip(p, 0.0, None)


def kl_divergence(p, q) -> float:
    """D(p‖q) = Σ p (log₂ p − log₂ q),  0 log 0 = 0,  지지집합 위반이면 +inf"""
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    if p.shape != q.shape:
        raise DimensionMismatchError(f"❌ 분포 크기가 다릅니다: {p.shape} vs {q.shape}")
    return kl_bits(p, q)


def channel_divergence(n: Behavior, m: Behavior) -> float:
    """max_{x0,y0} D(n(·|x0,y0) ‖ m(·|x0,y0))"""
    if n.scenario != m.scenario:
        raise ValidationError(f"❌ 시나리오가 다릅니다: {n.scenario.shape} vs {m.scenario.shape}", invariant="scenario")
    return max(kl_divergence(n.table[x0, y0].reshape(-1), m.table[x0, y0].reshape(-1))
               for x0 in range(n.scenario.n_x0) for y0 in range(n.scenario.n_y0))


def minimax_problem(b: Behavior) -> MinimaxProblem:
    s = b.scenario
    v, _ = vertex_matrix(s)
    return MinimaxProblem(target=b.table.reshape(s.n_inputs, -1),
                          vertices=v.reshape(s.n_inputs, s.n_x1 * s.n_y1, -1))


def rel_entropy_nonlocality(b: Behavior, restarts: int = None, seed: int = None,
                            max_iters: int = None) -> MeasureResult:
    """
    E(b) = min_{M ∈ 국소 폴리토프} max_{x0,y0} D(b ‖ M)

    LP 가 국소라고 하면 그 가중치로 바로 0 을 돌려준다.
    아니면 사영 gradient (solver A) 와 mirror descent (solver B) 를 각각 여러 번 재시작해 돌리고
    둘의 차이를 간격으로 보고한다.
    """
    restarts = SimConfig.MEASURE_RESTARTS if restarts is None else restarts
    seed = SimConfig.SEED if seed is None else seed
    problem = minimax_problem(b)

    lp = is_local(b)
    if lp.local:
        value = problem.value(floor_weights(lp.weights))
        value = value if np.isfinite(value) else 0.0
        return MeasureResult(value=value if value > 1e-9 else 0.0, argmin_weights=lp.weights,
                             gap=0.0, iterations=lp.pivots, converged=True, details={"route": "lp"})

    seeds = []
    if lp.weights is not None:
        seeds.append(lp.weights)
    echo(f"🚀 상대 엔트로피 계산: 꼭짓점 {problem.n_vertices}개, 재시작 {restarts}회")
    run_a = multi_restart(problem, projected_subgradient, restarts, seed, seeds=seeds, max_iters=max_iters)
    run_b = multi_restart(problem, mirror_descent, restarts, seed + 1, seeds=seeds, max_iters=max_iters)
    best = run_a if run_a.value <= run_b.value else run_b
    gap = abs(run_a.value - run_b.value)
    converged = gap <= SimConfig.SOLVER_GAP_TOL
    if not converged:
        echo(f"⚠️ 두 solver 값 차이 {gap:.2e} > {SimConfig.SOLVER_GAP_TOL} (수렴 실패로 표시)", force=True)
    return MeasureResult(
        value=best.value, argmin_weights=best.weights, gap=gap,
        iterations=run_a.iterations + run_b.iterations, converged=converged,
        details={"route": "minimax", "solver_a": run_a.value, "solver_b": run_b.value},
    )


# ----------------------------------------------------------------------
# 최소 확장 (seesaw 하한)
# ----------------------------------------------------------------------

def _povms_from_effects(effects: np.ndarray) -> List[Povm]:
    """torch 에서 나온 효과를 다시 정확한 POVM 으로 맞춘다 (S^{-1/2} 재정규화)"""
    out = []
    for setting in effects:
        herm = [(e + e.conj().T) / 2 for e in setting]
        root = inv_sqrt_psd(sum(herm))
        fixed = [root @ e @ root for e in herm]
        fixed = [(e + e.conj().T) / 2 for e in fixed]
        out.append(Povm(tuple(fixed), [setting.shape[-1]]))
    return out


def _deterministic_povms(d: int, n_settings: int, n_out: int) -> List[Povm]:
    """항상 결과 0 을 내는 측정 (필터 실패 가지용)"""
    effects = [np.eye(d)] + [np.zeros((d, d))] * (n_out - 1)
    return [Povm(tuple(effects), [d]) for _ in range(n_settings)]


def _inner_local_model(table: np.ndarray, scenario: Scenario, iters: int = 150) -> torch.Tensor:
    """고정된 측정에 대한 최적 국소 모델 q (가벼운 단일 시작 solver)"""
    b = Behavior(scenario, np.clip(table, 0.0, None) / np.clip(table, 0.0, None).sum(axis=(2, 3), keepdims=True))
    problem = minimax_problem(b)
    n = problem.n_vertices
    run = projected_subgradient(problem, np.full(n, 1.0 / n), max_iters=iters)
    q = problem.mixture(run.weights).reshape(scenario.shape)
    return torch.as_tensor(q, dtype=torch.float64, device=SimConfig.DEVICE)


def _evaluate(state: DensityMatrix, scenario: Scenario, ma: np.ndarray, mb: np.ndarray,
              filters=None) -> tuple:
    """numpy Born 경로로 행동을 만들고 기본 설정의 상대 엔트로피를 잰다"""
    a_povms, b_povms = _povms_from_effects(ma), _povms_from_effects(mb)
    if filters is None:
        b = behavior_from_state(state, a_povms, b_povms)
    else:
        da, db = state.dims.dims
        fail_a = _deterministic_povms(da, scenario.n_x0, scenario.n_x1)
        fail_b = _deterministic_povms(db, scenario.n_y0, scenario.n_y1)
        b = behavior_from_prelocc(state, local_filter_protocol(*filters),
                                  {(0, 0): a_povms, None: fail_a}, {(0, 0): b_povms, None: fail_b})
    return rel_entropy_nonlocality(b), b


def _seesaw(state: DensityMatrix, scenario: Scenario, start: seesaw.SeesawParams, rounds: int,
            rho: torch.Tensor) -> tuple:
    """(내부 국소 모델 최소화 → 측정 상승) 교대. 마지막 라운드의 가벼운 목적값과 매개변수를 돌려준다."""
    params = start
    value = -np.inf
    for _ in range(rounds):
        with torch.no_grad():
            table = params.table(rho).cpu().numpy()
        q = _inner_local_model(table, scenario)
        params = seesaw.ascend(params, rho, q)
        with torch.no_grad():
            value = float(seesaw.smoothed_max_kl(params.table(rho), q, 1e-3))
    return value, params


def minimal_extension_state(state: DensityMatrix, scenario: Scenario = CHSH_SCENARIO, use_filter: bool = False,
                            restarts: int = None, rounds: int = None, seed: Seed = None) -> MeasureResult:
    """
    상태 ρ 에 국소 측정(과 선택적으로 국소 필터 한 라운드)을 적용해 얻는 행동들의
    상대 엔트로피 최댓값. 모든 후보가 실현 가능한 점이므로 반환값은 하한이다.

    :param scenario: 측정 설정 수 (n_x0, n_y0) 와 결과 수 (n_x1, n_y1)
    :param use_filter: True 면 필터 없는 seesaw 결과에서 시작해 필터 라운드까지 최적화
    """
    if len(state.dims) != 2 or max(state.dims.dims) > 4:
        raise DimensionMismatchError(f"❌ 한쪽 차원이 4 이하인 이분 상태가 필요합니다: {state.dims.dims}")
    restarts = SimConfig.SEESAW_RESTARTS if restarts is None else restarts
    rounds = SimConfig.SEESAW_ROUNDS if rounds is None else rounds
    rng = make_rng(seed)
    da, db = state.dims.dims
    rho = seesaw.to_tensor(state.matrix)

    # 알려진 실현 가능점: CHSH 최적 각도 (2x2 CHSH 일 때)
    candidates = []
    if scenario == CHSH_SCENARIO and (da, db) == (2, 2):
        for a_povms, b_povms in (chsh_optimal_povms(), horodecki_optimal_povms(state)):
            starts = seesaw.params_from_effects([m.effects for m in a_povms], [m.effects for m in b_povms])
            candidates.append(starts)

    best_light, best_params = -np.inf, None
    starts = candidates + [
        seesaw.random_params(da, db, scenario.n_x0, scenario.n_y0, scenario.n_x1, scenario.n_y1, rng)
        for _ in range(restarts)
    ]
    for i, start in enumerate(starts):
        light, params = _seesaw(state, scenario, start, rounds, rho)
        echo(f"   seesaw 시작점 {i}: 근사값 {light:.6f}")
        if light > best_light:
            best_light, best_params = light, params

    evaluated = [_evaluate(state, scenario, *c.numpy_effects()) for c in candidates]
    evaluated.append(_evaluate(state, scenario, *best_params.numpy_effects()))
    result, behavior = max(evaluated, key=lambda rb: rb[0].value)
    details = {"mode": "measure", "light_value": best_light}

    if use_filter:
        filtered_start = best_params.with_identity_filters()
        light, params = _seesaw(state, scenario, filtered_start, rounds, rho)
        ma, mb = params.numpy_effects()
        f_result, f_behavior = _evaluate(state, scenario, ma, mb, filters=params.numpy_filters())
        details["filtered_value"] = f_result.value
        if f_result.value > result.value:
            result, behavior = f_result, f_behavior
            details["mode"] = "filter"

    echo(f"📊 최소 확장 하한: {result.value:.6f} bit ({details['mode']})")
    return MeasureResult(value=result.value, argmin_weights=result.argmin_weights, gap=result.gap,
                         iterations=result.iterations, converged=result.converged,
                         details={**details, "behavior": behavior})


# ----------------------------------------------------------------------
# 단조성
# ----------------------------------------------------------------------

def transform_behavior(b: Behavior, sp: Superprocess) -> Behavior:
    """LOSR 슈퍼프로세스를 고전 채널로 본 행동에 적용"""
    if sp.form is not SuperprocessForm.LOSR:
        raise ValidationError("❌ 행동 변환에는 LOSR 형태 슈퍼프로세스가 필요합니다.", invariant="form")
    out = apply_superprocess(sp, Process(behavior_to_channel(b), 0.0))
    if not has_classical_output(out.channel):
        raise ValidationError("❌ 슈퍼프로세스 출력이 고전 채널이 아닙니다.", invariant="classical-output")
    return channel_to_behavior(out.channel)


def dpi_monotonicity_check(b: Behavior, sp: Superprocess) -> bool:
    """E(Θ[b]) ≤ E(b) + 2·max(간격, DPI_SLACK)"""
    before = rel_entropy_nonlocality(b)
    after = rel_entropy_nonlocality(transform_behavior(b, sp))
    slack = 2 * max(before.gap, after.gap, SimConfig.DPI_SLACK)
    return after.value <= before.value + slack


def random_stochastic(n_in: int, n_out: int, rng: np.random.Generator) -> np.ndarray:
    """열-확률 행렬 P[y, x]"""
    return rng.dirichlet(np.ones(n_out), size=n_in).T


def random_classical_superprocess(scenario: Scenario, seed: Seed = None, n_members: int = 2) -> Superprocess:
    """같은 시나리오로 보내는 무작위 고전 LOSR 슈퍼프로세스 (입력/출력 재라벨링 + 잡음)"""
    rng = make_rng(seed)
    weights = rng.dirichlet(np.ones(n_members))
    s = scenario
    members = []
    for t in weights:
        members.append((
            float(t),
            classical_channel(random_stochastic(s.n_x0, s.n_x0, rng)),
            classical_channel(random_stochastic(s.n_y0, s.n_y0, rng)),
            classical_channel(random_stochastic(s.n_x1, s.n_x1, rng)),
            classical_channel(random_stochastic(s.n_y1, s.n_y1, rng)),
        ))
    weights_sum = sum(m[0] for m in members)
    members = [(m[0] / weights_sum,) + m[1:] for m in members]
    return losr_superprocess(members)


def random_nonlocal_behavior(seed: Seed = None) -> Behavior:
    """PR 상자 / Tsirelson 행동 / 국소 행동을 섞은 CHSH 위반 행동"""
    rng = make_rng(seed)
    v = rng.uniform(0.6, 1.0)
    base = noisy_pr_box(v) if rng.uniform() < 0.5 else tsirelson_behavior()
    lam = rng.uniform(0.0, 0.15)
    return mix_behaviors([1 - lam, lam], [base, random_local_behavior(CHSH_SCENARIO, rng)])


def dpi_sweep(n: int = 10, seed: Seed = None, restarts: int = 2) -> pd.DataFrame:
    """
    무작위 (비국소 행동, LOSR 슈퍼프로세스) 쌍에 대한 단조성 검사 표
    """
    rng = make_rng(seed)
    rows = []
    with SimConfig.override(MEASURE_RESTARTS=restarts):
        for i in range(n):
            b = random_nonlocal_behavior(rng)
            sp = random_classical_superprocess(b.scenario, rng)
            before = rel_entropy_nonlocality(b)
            after = rel_entropy_nonlocality(transform_behavior(b, sp))
            slack = 2 * max(before.gap, after.gap, SimConfig.DPI_SLACK)
            rows.append({
                "instance": i,
                "before": before.value,
                "after": after.value,
                "slack": slack,
                "monotone": after.value <= before.value + slack,
            })
    df = pd.DataFrame(rows)
    echo(f"📊 단조성 스윕: {int(df['monotone'].sum())}/{len(df)} 통과")
    return df


def maximal_extension_upper_bound(target: QuantumChannel, classical: Behavior, sp: Superprocess) -> MeasureResult:
    """
    Υ[C] = target (1e-8) 을 확인한 뒤 E(C) 를 최대 확장의 상한으로 돌려준다
    """
    out = apply_superprocess(sp, Process(behavior_to_channel(classical), 0.0)).channel
    if out.choi.shape != target.choi.shape or float(np.max(np.abs(out.choi - target.choi))) > SimConfig.EPS_CPTP:
        raise ValidationError("❌ 주어진 슈퍼프로세스가 고전 채널을 목표 채널로 보내지 않습니다.",
                              invariant="extension-preimage")
    result = rel_entropy_nonlocality(classical)
    result.details["bound"] = "upper"
    return result


def process_nonlocality(process: Process) -> MeasureResult:
    """
    고전 프로세스의 Bell 비국소성: 순간이면 상대 엔트로피, 지연이 있으면 0 (자유 객체)
    """
    if not process.classical:
        raise ValidationError("❌ 프로세스 비국소성은 고전 채널에서만 정의됩니다.", invariant="classical-process")
    if not process.instantaneous:
        return MeasureResult(value=0.0, details={"route": "delayed"})
    return rel_entropy_nonlocality(process.behavior())


class NonlocalityAnalyzer:
    """
    여러 행동의 국소성/CHSH/상대 엔트로피를 모아 표로 정리하는 클래스
    """
    def __init__(self, restarts: int = None):
        self.restarts = restarts
        self.entries = []

    def add_behavior(self, name: str, behavior: Behavior):
        self.entries.append((name, behavior))
        echo(f"📥 행동 등록: {name} {behavior.scenario.shape}")

    def analyze(self) -> pd.DataFrame:
        rows = []
        for name, b in self.entries:
            res = rel_entropy_nonlocality(b, restarts=self.restarts)
            rows.append({
                "name": name,
                "local": is_local(b).local,
                "chsh": chsh_value(b) if b.scenario == CHSH_SCENARIO else np.nan,
                "rel_entropy": res.value,
                "gap": res.gap,
                "converged": res.converged,
            })
        return pd.DataFrame(rows)
