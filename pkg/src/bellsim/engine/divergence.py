"""
min_w max_s KL(p_s ‖ (V w)_s) 를 푸는 두 가지 독립 solver

- projected_subgradient: 유클리드 simplex 사영 + Armijo backtracking
- mirror_descent: 지수 가중치(exponentiated gradient) 갱신

두 solver 모두 log-sum-exp 평활화(τ_k = τ0/√k)된 목적함수의 gradient 를 쓰고,
반복마다 진짜 (평활화 안 된) 목적값이 가장 작은 점을 기록한다.
가중치는 매 단계 WEIGHT_FLOOR 로 바닥을 깐 뒤 재정규화해서 내부점에 머문다.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from bellsim.core import SimConfig, echo

LN2 = np.log(2.0)


def kl_bits(p: np.ndarray, q: np.ndarray) -> float:
    """밑 2 KL, 0 log 0 = 0, p>0 & q=0 이면 +inf (정규화 검사는 호출하는 쪽에서)"""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))) / LN2)


@dataclass
class MinimaxProblem:
    """
    :param target: (S, O) 입력쌍별 목표 분포 p_s
    :param vertices: (S, O, V) 꼭짓점 분포
    """
    target: np.ndarray
    vertices: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[2]

    def mixture(self, w: np.ndarray) -> np.ndarray:
        return self.vertices @ w

    def divergences(self, w: np.ndarray) -> np.ndarray:
        q = self.mixture(w)
        return np.array([kl_bits(self.target[s], q[s]) for s in range(self.target.shape[0])])

    def value(self, w: np.ndarray) -> float:
        return float(np.max(self.divergences(w)))

    def smoothed(self, w: np.ndarray, tau: float):
        """평활화 목적값과 gradient (τ log Σ exp(D_s/τ))"""
        q = self.mixture(w)
        d = self.divergences(w)
        if not np.all(np.isfinite(d)):
            return float("inf"), np.zeros_like(w)
        z = (d - d.max()) / tau
        e = np.exp(z)
        pi = e / e.sum()
        val = float(d.max() + tau * np.log(e.sum()))
        # ∂D_s/∂w_v = -Σ_o p_so V_sov / (q_so ln2)
        ratio = np.where(self.target > 0, self.target / np.maximum(q, 1e-300), 0.0)
        grad_s = -np.einsum("so,sov->sv", ratio, self.vertices) / LN2
        return val, pi @ grad_s


@dataclass
class SolverRun:
    value: float
    weights: np.ndarray
    iterations: int
    history: List[float] = field(default_factory=list)


def floor_weights(w: np.ndarray, floor: float = None) -> np.ndarray:
    floor = SimConfig.WEIGHT_FLOOR if floor is None else floor
    w = np.maximum(w, floor)
    return w / w.sum()


def project_simplex(v: np.ndarray) -> np.ndarray:
    """유클리드 simplex 사영 (정렬 기반)"""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(v) + 1)
    cond = u - (css - 1) / idx > 0
    rho = idx[cond][-1]
    theta = (css[cond][-1] - 1) / rho
    return np.maximum(v - theta, 0.0)


def _descend(problem: MinimaxProblem, w0: np.ndarray, step: Callable, max_iters: int,
             tau0: float, patience: int = 300) -> SolverRun:
    """공통 반복 루프: τ_k 스케줄, backtracking, best 추적, 정체 시 조기 종료"""
    w = floor_weights(w0)
    best_w, best = w.copy(), problem.value(w)
    stall = 0
    k = 0
    for k in range(1, max_iters + 1):
        tau = tau0 / np.sqrt(k)
        f, g = problem.smoothed(w, tau)
        w = step(w, f, g, tau)
        v = problem.value(w)
        if v < best - 1e-12:
            best, best_w, stall = v, w.copy(), 0
        else:
            stall += 1
        if best <= 0.0 or stall >= patience:
            break
    return SolverRun(value=max(best, 0.0), weights=best_w, iterations=k)


def projected_subgradient(problem: MinimaxProblem, w0: np.ndarray, max_iters: int = None,
                          tau0: float = None, eta0: float = 1.0) -> SolverRun:
    """solver A: 사영 gradient + Armijo backtracking"""
    max_iters = SimConfig.MEASURE_MAX_ITERS if max_iters is None else max_iters
    tau0 = SimConfig.TAU0 if tau0 is None else tau0

    def step(w, f, g, tau):
        eta = eta0
        for _ in range(40):
            cand = floor_weights(project_simplex(w - eta * g))
            fc, _ = problem.smoothed(cand, tau)
            if fc <= f - 1e-4 * np.dot(g, w - cand):
                return cand
            eta *= 0.5
        return w

    return _descend(problem, w0, step, max_iters, tau0)


def mirror_descent(problem: MinimaxProblem, w0: np.ndarray, max_iters: int = None,
                   tau0: float = None, eta0: float = 2.0) -> SolverRun:
    """solver B: exponentiated gradient (엔트로피 mirror map) + backtracking"""
    max_iters = SimConfig.MEASURE_MAX_ITERS if max_iters is None else max_iters
    tau0 = SimConfig.TAU0 if tau0 is None else tau0

    def step(w, f, g, tau):
        eta = eta0
        for _ in range(40):
            z = -eta * (g - g.min())
            cand = floor_weights(w * np.exp(z))
            fc, _ = problem.smoothed(cand, tau)
            if fc <= f - 1e-4 * np.dot(g, w - cand):
                return cand
            eta *= 0.5
        return w

    return _descend(problem, w0, step, max_iters, tau0)


def multi_restart(problem: MinimaxProblem, solver: Callable, restarts: int, seed: int,
                  seeds: Optional[List[np.ndarray]] = None, **kwargs) -> SolverRun:
    """
    여러 시작점에서 solver 를 돌려 가장 좋은 결과를 고른다 (동률이면 앞선 restart)

    :param seeds: 추가로 시도할 시작 가중치 목록 (예: LP 가 준 국소 모델)
    """
    rng = np.random.default_rng(seed)
    n = problem.n_vertices
    starts = [np.full(n, 1.0 / n)]
    starts += [rng.dirichlet(np.ones(n)) for _ in range(max(restarts - 1, 0))]
    starts += list(seeds or [])
    best: Optional[SolverRun] = None
    total = 0
    for i, w0 in enumerate(starts):
        run = solver(problem, w0, **kwargs)
        total += run.iterations
        echo(f"   restart {i}: value={run.value:.8f} ({run.iterations} iters)")
        if best is None or run.value < best.value:
            best = run
    best.iterations = total
    return best
