"""
Bell 시나리오, 행동(behavior), 국소 폴리토프 LP 판정, CHSH 평가,
Born 규칙 / pre-LOCC 행동 생성, 국소 필터로 숨은 비국소성 드러내기 데모
"""
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import torch

from bellsim.core import SimConfig, ValidationError, DimensionMismatchError, SolverError, echo
from bellsim.core.tensor import DimFactorization
from bellsim.builder.states import DensityMatrix, Povm, PAULIS, phi_plus, chsh_optimal_povms, trivial_povm
from bellsim.builder.channels import QuantumChannel, has_classical_output
from bellsim.builder.instruments import PreLoccProtocol, run_protocol, local_filter_protocol
from bellsim.builder.generators import Seed, make_rng
from bellsim.engine.simplex import phase_one


@dataclass(frozen=True)
class Scenario:
    """입력 알파벳 n_x0, n_y0 / 출력 알파벳 n_x1, n_y1"""
    n_x0: int
    n_y0: int
    n_x1: int
    n_y1: int

    def __post_init__(self):
        if min(self.n_x0, self.n_y0, self.n_x1, self.n_y1) < 1:
            raise ValidationError(f"❌ 시나리오 크기는 모두 1 이상이어야 합니다: {self.shape}", invariant="scenario>=1")

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.n_x0, self.n_y0, self.n_x1, self.n_y1)

    @property
    def n_vertices(self) -> int:
        return self.n_x1 ** self.n_x0 * self.n_y1 ** self.n_y0

    @property
    def n_inputs(self) -> int:
        return self.n_x0 * self.n_y0


CHSH_SCENARIO = Scenario(2, 2, 2, 2)


@dataclass(frozen=True, eq=False)
class Behavior:
    """
    조건부 확률표 p(x1, y1 | x0, y0), 배열 순서 (x0, y0, x1, y1)
    """
    scenario: Scenario
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.shape != self.scenario.shape:
            raise DimensionMismatchError(f"❌ 확률표 크기 {t.shape} ≠ 시나리오 {self.scenario.shape}")
        if np.any(t < -SimConfig.EPS_CLAMP):
            raise ValidationError(f"❌ 음수 확률이 있습니다 (최소 {t.min():.3e}).", invariant="nonnegative")
        t = np.clip(t, 0.0, None)
        sums = t.sum(axis=(2, 3))
        err = float(np.max(np.abs(sums - 1.0)))
        if err > SimConfig.EPS_TRACE:
            raise ValidationError(f"❌ 입력쌍별 확률 합이 1 이 아닙니다 (오차 {err:.2e}).", invariant="normalized")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def distribution(self, x0: int, y0: int) -> np.ndarray:
        return self.table[x0, y0].reshape(-1)

    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def marginal_a(self) -> np.ndarray:
        """p(x1 | x0, y0) (y0 의존성이 있으면 신호)"""
        return self.table.sum(axis=3)

    def marginal_b(self) -> np.ndarray:
        return self.table.sum(axis=2)

    def is_no_signalling(self, tol: float = 1e-9) -> bool:
        ma, mb = self.marginal_a(), self.marginal_b()
        a_ok = np.max(np.abs(ma - ma[:, :1, :]), initial=0.0) <= tol
        b_ok = np.max(np.abs(mb - mb[:1, :, :]), initial=0.0) <= tol
        return bool(a_ok and b_ok)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"x0": x0, "y0": y0, "x1": x1, "y1": y1, "p": float(self.table[x0, y0, x1, y1])}
            for x0, y0, x1, y1 in itertools.product(*(range(n) for n in self.scenario.shape))
        ]
        return pd.DataFrame(rows, columns=["x0", "y0", "x1", "y1", "p"])

    @classmethod
    def from_table(cls, table) -> "Behavior":
        t = np.asarray(table, dtype=float)
        if t.ndim != 4:
            raise DimensionMismatchError(f"❌ 확률표는 4차원 (x0,y0,x1,y1) 이어야 합니다: ndim={t.ndim}")
        return cls(Scenario(*t.shape), t)


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """
    Σ c(x0,y0,x1,y1) p(x1,y1|x0,y0) ≤ bound  (bound = 결정적 꼭짓점 위 최댓값)
    """
    scenario: Scenario
    coefficients: np.ndarray
    bound: Optional[float] = None
    name: str = "bell"

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != self.scenario.shape:
            raise DimensionMismatchError(f"❌ 계수 배열 크기 {c.shape} ≠ 시나리오 {self.scenario.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "bound", self.local_bound() if self.bound is None else float(self.bound))

    def local_bound(self) -> float:
        v, _ = vertex_matrix(self.scenario)
        return float(np.max(self.coefficients.reshape(-1) @ v))

    def value(self, behavior: Behavior) -> float:
        return float(np.sum(self.coefficients * behavior.table))

    def violation(self, behavior: Behavior) -> float:
        return self.value(behavior) - self.bound


@dataclass
class LocalityResult:
    local: bool
    weights: Optional[np.ndarray] = None
    certificate: Optional[BellFunctional] = None
    pivots: int = 0
    residual: float = 0.0


# ----------------------------------------------------------------------
# 결정적 꼭짓점
# ----------------------------------------------------------------------

def deterministic_behavior(scenario: Scenario, a_strategy: Sequence[int], b_strategy: Sequence[int]) -> Behavior:
    """x1 = a(x0), y1 = b(y0) 인 결정적 곱 전략"""
    t = np.zeros(scenario.shape)
    for x0 in range(scenario.n_x0):
        for y0 in range(scenario.n_y0):
            t[x0, y0, a_strategy[x0], b_strategy[y0]] = 1.0
    return Behavior(scenario, t)


def _strategies(scenario: Scenario):
    a_all = list(itertools.product(range(scenario.n_x1), repeat=scenario.n_x0))
    b_all = list(itertools.product(range(scenario.n_y1), repeat=scenario.n_y0))
    return [(a, b) for a in a_all for b in b_all]


def _check_vertex_count(scenario: Scenario):
    if scenario.n_vertices > SimConfig.LP_MAX_VERTICES:
        raise ValidationError(
            f"❌ 꼭짓점 수 {scenario.n_vertices} 가 상한 {SimConfig.LP_MAX_VERTICES} 을 넘습니다.",
            invariant="vertex-count")


@lru_cache(maxsize=32)
def vertex_matrix(scenario: Scenario):
    """
    :return: (V, strategies)  V 는 (확률표 원소 수 x 꼭짓점 수) 0/1 행렬
    """
    _check_vertex_count(scenario)
    strategies = _strategies(scenario)
    v = np.zeros((int(np.prod(scenario.shape)), len(strategies)))
    for j, (a, b) in enumerate(strategies):
        t = np.zeros(scenario.shape)
        for x0 in range(scenario.n_x0):
            for y0 in range(scenario.n_y0):
                t[x0, y0, a[x0], b[y0]] = 1.0
        v[:, j] = t.reshape(-1)
    v.setflags(write=False)
    return v, strategies


def enumerate_local_vertices(scenario: Scenario) -> List[Behavior]:
    _check_vertex_count(scenario)
    return [deterministic_behavior(scenario, a, b) for a, b in _strategies(scenario)]


# ----------------------------------------------------------------------
# CHSH
# ----------------------------------------------------------------------

def chsh_functionals() -> List[BellFunctional]:
    """
    부호 대칭 8개: 음수 부호 위치 4가지 x 전체 부호 2가지, 국소 한계는 모두 2
    """
    out = []
    parity = np.array([[1.0, -1.0], [-1.0, 1.0]])
    for minus in itertools.product(range(2), range(2)):
        for overall in (1.0, -1.0):
            c = np.zeros(CHSH_SCENARIO.shape)
            for x0, y0 in itertools.product(range(2), range(2)):
                s = -1.0 if (x0, y0) == minus else 1.0
                c[x0, y0] = overall * s * parity
            out.append(BellFunctional(CHSH_SCENARIO, c, bound=2.0, name=f"chsh{minus}{'+' if overall > 0 else '-'}"))
    return out


def chsh_value(behavior: Behavior) -> float:
    """max |S| over 8 개 대칭형"""
    if behavior.scenario != CHSH_SCENARIO:
        raise ValidationError(f"❌ CHSH 값은 (2,2,2,2) 시나리오에서만 정의됩니다: {behavior.scenario.shape}",
                              invariant="chsh-scenario")
    return max(f.value(behavior) for f in chsh_functionals())


# ----------------------------------------------------------------------
# LP 국소성 판정
# ----------------------------------------------------------------------

def is_local(behavior: Behavior) -> LocalityResult:
    """
    꼭짓점 가중치 LP (Bland 단체법).
    국소 → 가중치 (재구성 L∞ ≤ 1e-7), 비국소 → 분리 Bell 함수 (위반 ≥ LP_TOL)
    CHSH 시나리오에서는 위반된 CHSH 부등식이 있으면 그것을 증명서로 먼저 돌려준다.
    """
    scenario = behavior.scenario
    tol = SimConfig.LP_TOL
    if scenario == CHSH_SCENARIO:
        best = max(chsh_functionals(), key=lambda f: f.violation(behavior))
        if best.violation(behavior) > tol:
            echo(f"🔍 CHSH 위반 {best.value(behavior):.6f} > 2 → 비국소 ({best.name})")
            return LocalityResult(local=False, certificate=best)

    v, _ = vertex_matrix(scenario)
    a = np.vstack([v, np.ones((1, v.shape[1]))])
    b = np.concatenate([behavior.flat(), [1.0]])
    lp = phase_one(a, b, tol=tol)
    if lp.feasible:
        w = lp.x / lp.x.sum()
        residual = float(np.max(np.abs(v @ w - behavior.flat())))
        if residual > 1e-7:
            raise SolverError(f"❌ LP 가중치가 확률표를 재현하지 못합니다 (L∞ {residual:.2e}).")
        return LocalityResult(local=True, weights=w, pivots=lp.pivots, residual=residual)

    y_tab = lp.dual[:-1].reshape(scenario.shape)
    certificate = BellFunctional(scenario, y_tab, name="farkas")
    if certificate.violation(behavior) <= tol:
        raise SolverError("❌ Farkas 증명서의 위반량이 허용오차보다 작습니다 (수치 불안정).")
    return LocalityResult(local=False, certificate=certificate, pivots=lp.pivots, residual=lp.objective)


# ----------------------------------------------------------------------
# 행동 생성기
# ----------------------------------------------------------------------

def uniform_behavior(scenario: Scenario = CHSH_SCENARIO) -> Behavior:
    t = np.full(scenario.shape, 1.0 / (scenario.n_x1 * scenario.n_y1))
    return Behavior(scenario, t)


def pr_box() -> Behavior:
    """x1 ⊕ y1 = x0·y0, 주변분포 균등"""
    t = np.zeros(CHSH_SCENARIO.shape)
    for x0, y0, x1, y1 in itertools.product(range(2), repeat=4):
        if (x1 ^ y1) == (x0 & y0):
            t[x0, y0, x1, y1] = 0.5
    return Behavior(CHSH_SCENARIO, t)


def noisy_pr_box(visibility: float) -> Behavior:
    """v·PR + (1-v)·균등 (v > 1/2 이면 CHSH 위반)"""
    t = visibility * pr_box().table + (1 - visibility) * uniform_behavior().table
    return Behavior(CHSH_SCENARIO, t)


def tsirelson_behavior() -> Behavior:
    a_povms, b_povms = chsh_optimal_povms()
    return behavior_from_state(phi_plus(), a_povms, b_povms)


def mix_behaviors(weights: Sequence[float], behaviors: Sequence[Behavior]) -> Behavior:
    t = sum(w * b.table for w, b in zip(weights, behaviors))
    return Behavior(behaviors[0].scenario, t)


def random_local_behavior(scenario: Scenario = CHSH_SCENARIO, seed: Seed = None, n_terms: int = 6) -> Behavior:
    rng = make_rng(seed)
    v, _ = vertex_matrix(scenario)
    idx = rng.choice(v.shape[1], size=min(n_terms, v.shape[1]), replace=False)
    w = rng.dirichlet(np.ones(len(idx)))
    return Behavior(scenario, (v[:, idx] @ w).reshape(scenario.shape))


def relabel(behavior: Behavior, x0=None, y0=None, x1=None, y1=None) -> Behavior:
    """
    입력/출력 라벨 순열 (None 은 항등). new[π(x0), π(y0), π(x1), π(y1)] = old[x0, y0, x1, y1]
    """
    perms = []
    for perm, n in zip((x0, y0, x1, y1), behavior.scenario.shape):
        perm = list(range(n)) if perm is None else list(perm)
        if sorted(perm) != list(range(n)):
            raise ValidationError(f"❌ 올바른 순열이 아닙니다: {perm}", invariant="permutation")
        perms.append(np.argsort(perm))
    t = behavior.table[np.ix_(*perms)]
    return Behavior(behavior.scenario, t)


def _check_povms(povms: Sequence[Povm], d: int, who: str) -> int:
    if not povms:
        raise ValidationError(f"❌ {who} 의 POVM 목록이 비었습니다.", invariant="povm-nonempty")
    n_out = len(povms[0])
    for m in povms:
        if m.dims.total != d:
            raise DimensionMismatchError(f"❌ {who} POVM 차원 {m.dims.total} ≠ 상태 인자 차원 {d}")
        if len(m) != n_out:
            raise DimensionMismatchError(f"❌ {who} 의 POVM 결과 수가 입력마다 다릅니다.")
    return n_out


def born_table(state: DensityMatrix, a_povms: Sequence[Povm], b_povms: Sequence[Povm]) -> np.ndarray:
    if len(state.dims) != 2:
        raise DimensionMismatchError("❌ Born 규칙 행동에는 (A | B) 이분 상태가 필요합니다.")
    da, db = state.dims.dims
    _check_povms(a_povms, da, "Alice")
    _check_povms(b_povms, db, "Bob")
    ma = np.array([m.effects for m in a_povms])
    mb = np.array([m.effects for m in b_povms])
    r = state.matrix.reshape(da, db, da, db)
    return np.real(np.einsum("abcd,xica,yjdb->xyij", r, ma, mb))


def behavior_from_state(state: DensityMatrix, a_povms: Sequence[Povm], b_povms: Sequence[Povm]) -> Behavior:
    """
    W(x1,y1|x0,y0) = Tr[ρ (M_{x1}^{x0} ⊗ N_{y1}^{y0})]
    """
    t = born_table(state, a_povms, b_povms)
    t = np.where(np.abs(t) < SimConfig.EPS_CLAMP, 0.0, t)
    t = t / t.sum(axis=(2, 3), keepdims=True)
    return Behavior(Scenario(*t.shape), t)


def _povms_for(choice, transcript: Tuple[int, ...]) -> Sequence[Povm]:
    """POVM 목록 그대로이거나 transcript → 목록 사전 (키 None 은 기본값)"""
    if isinstance(choice, dict):
        if tuple(transcript) in choice:
            return choice[tuple(transcript)]
        if None in choice:
            return choice[None]
        raise ValidationError(f"❌ transcript {transcript} 에 대한 POVM 이 없습니다.", invariant="transcript-povm")
    return choice


def behavior_from_prelocc(input_state: DensityMatrix, protocol: PreLoccProtocol,
                          a_povms_by_transcript, b_povms_by_transcript) -> Behavior:
    """
    W = Σ_t p(t) · Born(ρ_t, M^{(t)}, N^{(t)})
    빈 프로토콜이면 behavior_from_state 와 같다.

    :param a_povms_by_transcript: POVM 목록 또는 {transcript: 목록, None: 기본 목록}
    """
    branches = run_protocol(input_state, protocol)
    table = None
    scenario = None
    for br in branches:
        b = behavior_from_state(br.state, _povms_for(a_povms_by_transcript, br.transcript),
                                _povms_for(b_povms_by_transcript, br.transcript))
        if scenario is None:
            scenario = b.scenario
        elif b.scenario != scenario:
            raise DimensionMismatchError(
                f"❌ transcript {br.transcript} 의 시나리오 {b.scenario.shape} 가 다른 가지 {scenario.shape} 와 다릅니다.")
        term = br.probability * b.table
        table = term if table is None else table + term
    table = table / table.sum(axis=(2, 3), keepdims=True)
    return Behavior(scenario, table)



# ----------------------------------------------------------------------
# 행동 ↔ 고전 채널
# ----------------------------------------------------------------------

def behavior_to_channel(behavior: Behavior) -> QuantumChannel:
    """
    (X0, Y0) → (X1, Y1) 고전 채널 (대각 Choi = 확률표 평탄화)
    """
    n_x0, n_y0, n_x1, n_y1 = behavior.scenario.shape
    choi = np.diag(behavior.flat()).astype(complex)
    return QuantumChannel(choi, DimFactorization((n_x0, n_y0), ("A0", "B0")),
                          DimFactorization((n_x1, n_y1), ("A1", "B1")))


def channel_to_behavior(channel: QuantumChannel) -> Behavior:
    """
    출력이 고전인 이분 채널을 계산 기저 입력에 대한 확률표로 읽는다
    """
    if not channel.is_bipartite():
        raise DimensionMismatchError("❌ 행동으로 읽으려면 (A0,B0)→(A1,B1) 이분 채널이어야 합니다.")
    if not has_classical_output(channel):
        raise ValidationError("❌ 출력이 고전 레지스터가 아닌 채널은 행동으로 바꿀 수 없습니다.",
                              invariant="classical-output")
    shape = channel.in_dims.dims + channel.out_dims.dims
    table = np.real(np.diag(channel.choi)).reshape(shape)
    table = np.where(np.abs(table) < SimConfig.EPS_CLAMP, 0.0, table)
    return Behavior(Scenario(*shape), table)
# ----------------------------------------------------------------------
# Horodecki 기준, 각도 탐색, 필터 데모
# ----------------------------------------------------------------------

def correlation_matrix(state: DensityMatrix) -> np.ndarray:
    """T_ij = Tr[ρ σ_i ⊗ σ_j]"""
    if state.dims.dims != (2, 2):
        raise DimensionMismatchError(f"❌ 2⊗2 상태가 필요합니다: {state.dims.dims}")
    return np.array([[np.real(np.trace(state.matrix @ np.kron(si, sj))) for sj in PAULIS] for si in PAULIS])


def horodecki_chsh(state: DensityMatrix) -> float:
    """2√(t1 + t2), t1 ≥ t2 는 TᵀT 의 가장 큰 두 고유값"""
    t = correlation_matrix(state)
    vals = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return float(2.0 * np.sqrt(max(vals[0] + vals[1], 0.0)))


def bloch_povm(n: Sequence[float]) -> Povm:
    """단위 벡터 n 방향 관측량 n·σ 의 projective 측정 (결과 0 = +1)"""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    obs = sum(n[k] * PAULIS[k] for k in range(3))
    return Povm(((np.eye(2) + obs) / 2, (np.eye(2) - obs) / 2), [2])


def horodecki_optimal_povms(state: DensityMatrix):
    """
    T = U Σ Vᵀ 의 위 두 특이벡터로 CHSH 최적 측정 방향을 만든다
    (b0,b1 = cosα v1 ± sinα v2, tanα = s2/s1,  a0 = u1, a1 = u2)
    """
    t = correlation_matrix(state)
    u, s, vt = np.linalg.svd(t)
    s1, s2 = s[0], s[1]
    norm = np.hypot(s1, s2)
    if norm < 1e-15:
        z = [0.0, 0.0, 1.0]
        return [bloch_povm(z)] * 2, [bloch_povm(z)] * 2
    ca, sa = s1 / norm, s2 / norm
    b0 = ca * vt[0] + sa * vt[1]
    b1 = ca * vt[0] - sa * vt[1]
    return [bloch_povm(u[:, 0]), bloch_povm(u[:, 1])], [bloch_povm(b0), bloch_povm(b1)]


def chsh_angle_search(state: DensityMatrix, n_grid: int = 64, refine: bool = True,
                      seed: Seed = None) -> float:
    """
    임의 Bloch 방향 projective 측정에 대한 CHSH 최댓값 수치 탐색
    (무작위 격자로 시작점 선택 → torch LBFGS 국소 정밀화 → Born 규칙으로 재평가)
    """
    t = correlation_matrix(state)
    rng = make_rng(seed)
    tt = torch.as_tensor(t, dtype=torch.float64)

    def s_value(dirs: torch.Tensor) -> torch.Tensor:
        d = dirs / dirs.norm(dim=-1, keepdim=True)
        a0, a1, b0, b1 = d[..., 0, :], d[..., 1, :], d[..., 2, :], d[..., 3, :]
        ta = lambda a, b: torch.einsum("...i,ij,...j->...", a, tt, b)
        return ta(a0, b0) + ta(a0, b1) + ta(a1, b0) - ta(a1, b1)

    grid = torch.as_tensor(rng.normal(size=(n_grid, 4, 3)), dtype=torch.float64)
    with torch.no_grad():
        scores = s_value(grid)
    order = torch.argsort(scores, descending=True)[:4]

    best_dirs, best = None, -np.inf
    for idx in order.tolist():
        dirs = grid[idx].clone().requires_grad_(refine)
        if refine:
            opt = torch.optim.LBFGS([dirs], max_iter=200, line_search_fn="strong_wolfe",
                                    tolerance_grad=1e-12, tolerance_change=1e-14)

            def closure():
                opt.zero_grad()
                loss = -s_value(dirs)
                loss.backward()
                return loss
            opt.step(closure)
        with torch.no_grad():
            val = float(s_value(dirs))
        if val > best:
            best, best_dirs = val, dirs.detach().numpy()

    a_povms = [bloch_povm(best_dirs[0]), bloch_povm(best_dirs[1])]
    b_povms = [bloch_povm(best_dirs[2]), bloch_povm(best_dirs[3])]
    return chsh_value(behavior_from_state(state, a_povms, b_povms))


def filtering_demo_state() -> DensityMatrix:
    """
    ρ = ½|ψ⟩⟨ψ| + ½|00⟩⟨00|,  |ψ⟩ = cos(π/8)|01⟩ + sin(π/8)|10⟩
    Horodecki 값 1.0 (어떤 측정으로도 CHSH 위반 없음)
    """
    a, b = np.cos(np.pi / 8), np.sin(np.pi / 8)
    psi = np.array([0, a, b, 0], dtype=complex)
    m = 0.5 * np.outer(psi, psi.conj())
    m[0, 0] += 0.5
    return DensityMatrix(m, DimFactorization((2, 2), ("A", "B")))


def demo_hidden_nonlocality(kappa: float = 0.5) -> Dict[str, float]:
    """
    국소 필터 F_A = diag(κ sin(π/8), 1), F_B = diag(κ cos(π/8), 1) 로 숨은 비국소성을 드러낸다

    :param kappa: 필터 세기 (0 < κ ≤ 1)
    :return: pre_chsh (필터 전 Horodecki 값), post_chsh (필터 성공 후), filter_success_prob,
             behavior_chsh (실패 가지 포함 전체 행동의 CHSH 값)
    """
    if not 0.0 < kappa <= 1.0:
        raise ValidationError(f"❌ κ 는 (0, 1] 범위여야 합니다: {kappa}", invariant="filter-strength")
    rho = filtering_demo_state()
    a, b = np.cos(np.pi / 8), np.sin(np.pi / 8)
    f_a = np.diag([kappa * b, 1.0]).astype(complex)
    f_b = np.diag([kappa * a, 1.0]).astype(complex)
    protocol = local_filter_protocol(f_a, f_b)

    branches = run_protocol(rho, protocol)
    success = next(br for br in branches if br.transcript == (0, 0))
    pre = horodecki_chsh(rho)
    post = horodecki_chsh(success.state)

    a_opt, b_opt = horodecki_optimal_povms(success.state)
    fail = [trivial_povm(2), trivial_povm(2)]
    mixed = behavior_from_prelocc(rho, protocol, {(0, 0): a_opt, None: fail}, {(0, 0): b_opt, None: fail})
    report = {
        "pre_chsh": pre,
        "post_chsh": post,
        "filter_success_prob": success.probability,
        "behavior_chsh": chsh_value(mixed),
        "kappa": kappa,
    }
    echo(f"📊 필터 데모: pre={pre:.6f}, post={post:.6f}, 성공확률={success.probability:.6f}")
    return report
