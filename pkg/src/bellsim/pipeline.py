# src/bellsim/pipeline.py
import os
import time
import datetime
from dataclasses import dataclass

import numpy as np
import pandas as pd

from bellsim.core import SimConfig, ValidationError
from bellsim.core.tensor import DimFactorization
from bellsim.builder.states import DensityMatrix, phi_plus, werner_state, chsh_optimal_povms
from bellsim.builder.channels import kraus_to_choi, measurement_channel, bipartite_identity, swap_channel
from bellsim.builder.instruments import local_filter_protocol
from bellsim.builder.generators import (
    Seed, make_rng, random_state, random_povm, random_channel, random_separable_state,
)
from bellsim.analysis.locality import (
    CHSH_SCENARIO, is_local, chsh_value, behavior_from_state, enumerate_local_vertices, random_local_behavior,
    pr_box, tsirelson_behavior, uniform_behavior, horodecki_chsh, chsh_angle_search, demo_hidden_nonlocality,
)
from bellsim.analysis.measures import (
    rel_entropy_nonlocality, channel_divergence, minimal_extension_state, dpi_sweep,
)
from bellsim.analysis.witness import (
    build_chsh_povm_witness, losr_min_witness_value, evaluate_witness, tsirelson_lose_channel,
    choi_separability, witness_to_channel_construction,
)
from bellsim.process.model import Process, check_realizable
from bellsim.process.lose import lose_construct
from bellsim.process.superprocess import (
    Superprocess, SuperprocessForm, LocalPost, apply_superprocess, check_superprocess_form,
    reduce_to_state_resource,
)


@dataclass
class AcceptanceSizes:
    """인스턴스 수 (기본값은 빠른 실행용, full() 은 전체 크기)"""
    random_mixtures: int = 40
    horodecki_states: int = 5
    separable_states: int = 10
    povm_pairs: int = 20
    local_behaviors: int = 6
    dpi_instances: int = 8
    prelocc_pipelines: int = 5
    construction_pairs: int = 4

    @classmethod
    def full(cls) -> "AcceptanceSizes":
        return cls(200, 20, 50, 100, 30, 50, 20, 10)


# ----------------------------------------------------------------------
# 무작위 PRE_LOCC 파이프라인 (상태 자원 환원 검사용)
# ----------------------------------------------------------------------

def _random_contraction(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g / (np.linalg.norm(g, 2) * 1.05)


def _random_post(rng: np.random.Generator) -> LocalPost:
    """입력 비트 x 로 2x2 메모리 측정을 고르는 국소 출력 단계"""
    a = measurement_channel([random_povm([2], 2, rng) for _ in range(2)])
    b = measurement_channel([random_povm([2], 2, rng) for _ in range(2)])
    return LocalPost(a, b)


def random_prelocc_pipeline(seed: Seed = None):
    """
    지연 있는 2x2 채널 프로세스 + 필터 pre-LOCC + transcript 별 측정으로 이뤄진 PRE_LOCC 슈퍼프로세스

    :return: (superprocess, process)
    """
    rng = make_rng(seed)
    channel = random_channel([2, 2], [2, 2], rng, n_kraus=2)
    process = Process(channel, delay=float(rng.integers(1, 5)))
    omega = random_state(DimFactorization((2, 1, 2, 1), ("A0", "EA", "B0", "EB")), rng)
    protocol = local_filter_protocol(_random_contraction(2, rng), _random_contraction(2, rng))
    posts = {(0, 0): _random_post(rng), (1, 1): _random_post(rng)}
    sp = Superprocess(SuperprocessForm.PRE_LOCC, protocol=protocol, resource_state=omega,
                      post_by_transcript=posts, default_post=_random_post(rng))
    return sp, process


# ----------------------------------------------------------------------
# 검사 항목
# ----------------------------------------------------------------------

def _row(criterion: str, value, expected: str, passed: bool, **extra) -> dict:
    row = {"criterion": criterion, "value": value, "expected": expected, "passed": bool(passed)}
    row.update(extra)
    return row


class AcceptancePipeline:
    def __init__(self, sizes: AcceptanceSizes = None, seed: int = None):
        print("🔧 검증 파이프라인 초기화 중...")
        self.sizes = sizes or AcceptanceSizes()
        self.rng = make_rng(SimConfig.SEED if seed is None else seed)

    def check_chsh_maximum(self) -> dict:
        a, b = chsh_optimal_povms()
        v = chsh_value(behavior_from_state(phi_plus(), a, b))
        return _row("chsh_maximum", v, "2√2 ± 1e-9", abs(v - 2 * np.sqrt(2)) <= 1e-9)

    def check_local_polytope(self) -> dict:
        vertices_ok = all(is_local(v).local for v in enumerate_local_vertices(CHSH_SCENARIO))
        mixtures_ok = all(is_local(random_local_behavior(CHSH_SCENARIO, self.rng)).local
                          for _ in range(self.sizes.random_mixtures))
        violations = []
        for b in (pr_box(), tsirelson_behavior()):
            res = is_local(b)
            violations.append(res.certificate.violation(b) if not res.local else -1.0)
        passed = vertices_ok and mixtures_ok and min(violations) >= 1e-8
        return _row("local_polytope", min(violations), "정점/혼합 국소, PR/Tsirelson 위반 ≥ 1e-8", passed)

    def check_horodecki(self) -> dict:
        worst = 0.0
        for _ in range(self.sizes.horodecki_states):
            rho = random_state(DimFactorization((2, 2), ("A", "B")), self.rng)
            worst = max(worst, abs(horodecki_chsh(rho) - chsh_angle_search(rho, seed=self.rng)))
        p0 = 1 / np.sqrt(2)
        threshold = horodecki_chsh(werner_state(p0 - 1e-6)) <= 2 < horodecki_chsh(werner_state(p0 + 1e-6))
        return _row("horodecki_consistency", worst, "|차이| ≤ 1e-4, Werner 문턱 1/√2", worst <= 1e-4 and threshold)

    def check_hidden_nonlocality(self) -> dict:
        report = demo_hidden_nonlocality()
        passed = report["pre_chsh"] <= 2 + 1e-9 and report["post_chsh"] >= 2.001
        return _row("hidden_nonlocality", report["post_chsh"], "pre ≤ 2, post ≥ 2.001", passed,
                    pre=report["pre_chsh"])

    def check_witness_separation(self) -> dict:
        w = build_chsh_povm_witness()
        losr_min = losr_min_witness_value(w)
        tsirelson = evaluate_witness(w, tsirelson_lose_channel())
        printed_min = losr_min_witness_value(build_chsh_povm_witness(normalization="paper_3_16"))
        expected = 0.75 - np.cos(np.pi / 8) ** 2
        passed = abs(losr_min) <= 1e-9 and abs(tsirelson - expected) <= 1e-6 and abs(printed_min + 2.25) <= 1e-9
        return _row("witness_separation", tsirelson, "LOSR 최소 0, Tsirelson 3/4 − cos²(π/8)", passed,
                    losr_min=losr_min, printed_min=printed_min)

    def check_fully_local_states(self) -> dict:
        all_local = True
        for _ in range(self.sizes.separable_states):
            rho = random_separable_state((2, 2), self.rng)
            for _ in range(self.sizes.povm_pairs):
                a = [random_povm([2], 2, self.rng) for _ in range(2)]
                b = [random_povm([2], 2, self.rng) for _ in range(2)]
                if not is_local(behavior_from_state(rho, a, b)).local:
                    all_local = False
        identity = kraus_to_choi([np.eye(2)], [2, 1], [1, 2])
        lam = choi_separability(identity).min_pt_eigenvalue
        return _row("separable_states_local", lam, "모두 국소, 항등 채널 PT 최소 고유값 −1",
                    all_local and abs(lam + 1) <= 1e-9)

    def check_relative_entropy(self) -> dict:
        local_values = [rel_entropy_nonlocality(random_local_behavior(CHSH_SCENARIO, self.rng)).value
                        for _ in range(self.sizes.local_behaviors)]
        pr = rel_entropy_nonlocality(pr_box())
        upper = channel_divergence(pr_box(), uniform_behavior())
        sweep = dpi_sweep(self.sizes.dpi_instances, self.rng)
        passed = (max(local_values) <= 1e-6 and pr.gap <= SimConfig.SOLVER_GAP_TOL
                  and pr.value <= upper + 1e-9 and bool(sweep["monotone"].all()))
        return _row("relative_entropy", pr.value, "국소 0, PR 간격 ≤ 1e-4, PR ≤ 1 bit, 단조성", passed,
                    pr_gap=pr.gap, dpi_violations=int((~sweep["monotone"]).sum()))

    def check_minimal_extension(self) -> dict:
        tsirelson = rel_entropy_nonlocality(tsirelson_behavior()).value
        ext = minimal_extension_state(phi_plus(), restarts=2, rounds=4, seed=self.rng).value
        sep = minimal_extension_state(random_separable_state((2, 2), self.rng), restarts=2, rounds=4,
                                      seed=self.rng).value
        passed = ext >= tsirelson - SimConfig.SOLVER_GAP_TOL and abs(sep) <= 1e-6
        return _row("minimal_extension", ext, "φ+ ≥ Tsirelson 값, 분리 가능 상태 0", passed, separable=sep)

    def check_process_algebra(self) -> dict:
        table = [
            (SuperprocessForm.LOSR, 0, 0, True), (SuperprocessForm.PRE_LOCC, 0, 0, True),
            (SuperprocessForm.LOSR, 5, 0, False), (SuperprocessForm.PRE_LOCC, 5, 0, True),
            (SuperprocessForm.GENERAL, 1, 3, True), (SuperprocessForm.GENERAL, 3, 1, False),
        ]
        forms_ok = all(check_superprocess_form(f, i, o) == want for f, i, o, want in table)
        worst = 0.0
        for _ in range(self.sizes.prelocc_pipelines):
            sp, p = random_prelocc_pipeline(self.rng)
            out = apply_superprocess(sp, p).channel
            omega, la, lb = reduce_to_state_resource(sp, p)
            worst = max(worst, float(np.max(np.abs(lose_construct(omega, la, lb).channel.choi - out.choi))))
        general = Superprocess(SuperprocessForm.GENERAL, pre=bipartite_identity(), post=bipartite_identity(),
                               pre_delay=1.0, post_delay=3.0)
        delay_ok = apply_superprocess(general, Process(bipartite_identity(), 2.0)).delay == 6.0
        swap_rejected = not check_realizable(Process(swap_channel(2), 0.0))
        passed = forms_ok and worst <= 1e-8 and delay_ok and swap_rejected
        return _row("process_algebra", worst, "형태 표 일치, 환원 L∞ ≤ 1e-8, 지연 합, SWAP 거부", passed)

    def check_witness_construction(self) -> dict:
        shapes = [([2, 1], [1, 2]), ([2, 2], [2, 2]), ([2, 2], [2, 1]), ([1, 2], [2, 2])]
        worst = 0.0
        for i in range(self.sizes.construction_pairs):
            in_dims, out_dims = shapes[i % len(shapes)]
            channel = random_channel(in_dims, out_dims, self.rng)
            d = int(np.prod(in_dims) * np.prod(out_dims))
            g = self.rng.normal(size=(d, d)) + 1j * self.rng.normal(size=(d, d))
            w = (g + g.conj().T) / 2
            c = witness_to_channel_construction(w, channel)
            worst = max(worst, abs(c.value - c.direct_value))
        return _row("witness_construction", worst, "|구성 − Tr[ρ_J W]| ≤ 1e-8", worst <= 1e-8)

    def run(self) -> pd.DataFrame:
        checks = [
            self.check_chsh_maximum, self.check_local_polytope, self.check_horodecki,
            self.check_hidden_nonlocality, self.check_witness_separation, self.check_fully_local_states,
            self.check_relative_entropy, self.check_minimal_extension, self.check_process_algebra,
            self.check_witness_construction,
        ]
        rows = []
        for i, check in enumerate(checks, start=1):
            name = check.__name__.replace("check_", "")
            print(f"\n=== [{i}/{len(checks)}] {name} ===")
            start = time.perf_counter()
            try:
                row = check()
            except (ValidationError, ArithmeticError) as e:
                print(f"   ❌ 오류 발생: {e}")
                row = _row(name, np.nan, "", False, error=str(e))
            row["seconds"] = time.perf_counter() - start
            print(f"   {'✅' if row['passed'] else '❌'} value={row['value']} ({row['seconds']:.2f}s)")
            rows.append(row)
        return pd.DataFrame(rows)


def run_acceptance(sizes: AcceptanceSizes = None, seed: int = None, save_csv: bool = False) -> pd.DataFrame:
    """
    모든 검사를 돌려 (criterion, value, expected, passed, seconds) 표를 만든다

    :param save_csv: True 면 SAVE_DIR 아래에 acceptance_<시각>.csv 로 저장
    """
    df = AcceptancePipeline(sizes, seed).run()
    n_pass = int(df["passed"].sum())
    print(f"\n📊 통과 {n_pass}/{len(df)}")
    if save_csv:
        SimConfig.setup()
        stamp = datetime.datetime.now().strftime("%Y%m%d_%H%M%S")
        path = os.path.join(SimConfig.SAVE_DIR, f"acceptance_{stamp}.csv")
        df.to_csv(path, index=False, encoding="utf-8-sig")
        print(f"   💾 저장 완료: {path}")
    return df
