"""
자체 구현 Phase-I 단체법 (Bland 규칙)

    find  x ≥ 0  s.t.  A x = b
    ⇔  min 1ᵀa  s.t.  A x + a = b,  x, a ≥ 0

최적값이 tol 보다 크면 infeasible 이고, 이때의 쌍대해 y = c_Bᵀ B⁻¹ 가 Farkas 증명서가 된다:
    yᵀ A_j ≤ 0 (모든 원래 열 j),  yᵀ b = 최적값 > 0
"""
from dataclasses import dataclass

import numpy as np

from bellsim.core import SimConfig, SolverError, echo

PIVOT_EPS = 1e-12


@dataclass
class LpResult:
    feasible: bool
    x: np.ndarray
    dual: np.ndarray
    objective: float
    pivots: int


def phase_one(a: np.ndarray, b: np.ndarray, tol: float = None, max_pivots: int = None) -> LpResult:
    """
    등식 제약 실현 가능성 LP

    :param a: (m x n) 제약 행렬
    :param b: (m,) 우변
    :param tol: 실현 가능 판정 허용오차 (기본 SimConfig.LP_TOL)
    :param max_pivots: pivot 상한 (넘으면 SolverError)
    :return: LpResult (x 는 길이 n, dual 은 원래 행 부호 기준 길이 m)
    """
    tol = SimConfig.LP_TOL if tol is None else tol
    max_pivots = SimConfig.LP_MAX_PIVOTS if max_pivots is None else max_pivots
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = a.shape

    # b ≥ 0 으로 맞추기 (행 부호 기억)
    sign = np.where(b < 0, -1.0, 1.0)
    a = a * sign[:, None]
    b = b * sign

    # tableau = [A | I | b], 인공변수 열이 곧 B⁻¹ 를 담는다
    tab = np.hstack([a, np.eye(m), b[:, None]])
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))

    pivots = 0
    while True:
        c_b = cost[basis]
        reduced = cost - c_b @ tab[:, :-1]
        # Bland: 가장 작은 인덱스의 음수 reduced cost 열이 들어온다
        entering = next((j for j in range(n + m) if reduced[j] < -PIVOT_EPS), None)
        if entering is None:
            break
        col = tab[:, entering]
        rows = [i for i in range(m) if col[i] > PIVOT_EPS]
        if not rows:
            raise SolverError("❌ Phase-I LP 가 비유계로 나왔습니다 (수치 이상).")
        ratios = [tab[i, -1] / col[i] for i in rows]
        best = min(ratios)
        # 동률이면 basis 인덱스가 가장 작은 행이 나간다
        leaving = min((i for i, r in zip(rows, ratios) if r <= best + PIVOT_EPS), key=lambda i: basis[i])

        tab[leaving] /= tab[leaving, entering]
        for i in range(m):
            if i != leaving and tab[i, entering] != 0.0:
                tab[i] -= tab[i, entering] * tab[leaving]
        basis[leaving] = entering
        pivots += 1
        if pivots > max_pivots:
            raise SolverError(f"❌ 단체법이 {max_pivots} pivot 안에 끝나지 않았습니다.")

    c_b = cost[basis]
    objective = float(c_b @ tab[:, -1])
    dual = (c_b @ tab[:, n:n + m]) * sign
    x = np.zeros(n)
    for i, j in enumerate(basis):
        if j < n:
            x[j] = max(tab[i, -1], 0.0)
    feasible = objective <= tol
    echo(f"🔍 Phase-I 단체법: pivot {pivots}회, 잔여 {objective:.3e} → {'실현 가능' if feasible else '불가능'}")
    return LpResult(feasible=feasible, x=x, dual=dual, objective=objective, pivots=pivots)
