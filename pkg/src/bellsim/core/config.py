import os
from contextlib import contextmanager

import torch


class SimConfig:
    """
    프로젝트 전체의 수치 허용오차와 솔버 설정을 관리하는 컨트롤 타워
    """
    # .env 파일 로드 시도
    try:
        from dotenv import load_dotenv
        load_dotenv()
    except ImportError:
        pass

    # ==========================================
    # 시스템 설정
    # ==========================================
    DEVICE = 'cuda' if torch.cuda.is_available() else 'cpu'
    SAVE_DIR = os.environ.get("BELLSIM_SAVE_DIR", "data/results")
    VERBOSE = os.environ.get("BELLSIM_VERBOSE", "0") not in ("0", "", "false", "False")
    SEED = int(os.environ.get("BELLSIM_SEED", "1234"))

    # 결과 DB (기본: SAVE_DIR 아래 sqlite 파일)
    DB_URL = os.environ.get("BELLSIM_DB_URL", f"sqlite:///{SAVE_DIR}/bellsim_runs.db")
    ENABLE_DB = False  # True: CLI 측정 결과를 DB에 기록

    # ==========================================
    # 선형대수 허용오차
    # ==========================================
    EPS_PSD = 1e-9     # 최소 고유값 >= -EPS_PSD 이면 PSD
    EPS_HERM = 1e-10   # max |m - m†| 엔트리 기준
    EPS_TRACE = 1e-9   # 밀도행렬 trace == 1 허용오차
    EPS_CPTP = 1e-8    # Tr_out J == I, Σ K†K == I 허용오차
    EPS_CLAMP = 1e-12  # 이 이내의 음수 확률은 0으로 클램프

    # ==========================================
    # LP (국소 폴리토프 멤버십)
    # ==========================================
    LP_TOL = 1e-8
    LP_MAX_VERTICES = 10 ** 6
    LP_MAX_PIVOTS = 50000

    # ==========================================
    # 상대 엔트로피 솔버 (Bell 비국소성)
    # ==========================================
    MEASURE_RESTARTS = 4       # 랜덤 재시작 횟수 (첫 번째는 항상 균등 혼합)
    MEASURE_MAX_ITERS = 3000   # 재시작당 최대 반복
    WEIGHT_FLOOR = 1e-12       # 꼭짓점 가중치 하한 (지지집합 불일치 방지)
    TAU0 = 1.0                 # log-sum-exp 온도 τ_k = TAU0/√k
    SOLVER_GAP_TOL = 1e-4      # 두 독립 솔버의 값 차이가 이 이하이면 수렴
    DPI_SLACK = 1e-6           # 단조성 검사 절대 여유

    # ==========================================
    # Seesaw (최소 확장 하한)
    # ==========================================
    SEESAW_RESTARTS = 16
    SEESAW_ROUNDS = 15   # (내부 최소화 -> POVM 상승) 교대 횟수
    SEESAW_STEPS = 30    # 라운드당 Adam 스텝
    SEESAW_LR = 0.05

    @staticmethod
    def setup():
        """결과 저장 폴더 생성"""
        os.makedirs(SimConfig.SAVE_DIR, exist_ok=True)

    @staticmethod
    @contextmanager
    def override(**kwargs):
        """
        설정값을 일시적으로 바꾸는 컨텍스트 매니저 (CLI 플래그, 테스트용)

        :param kwargs: 바꿀 속성 이름과 값 (예: LP_TOL=1e-7)
        """
        previous = {}
        for key, value in kwargs.items():
            if not hasattr(SimConfig, key):
                raise AttributeError(f"❌ 알 수 없는 설정 항목: {key}")
            previous[key] = getattr(SimConfig, key)
            setattr(SimConfig, key, value)
        try:
            yield SimConfig
        finally:
            for key, value in previous.items():
                setattr(SimConfig, key, value)
