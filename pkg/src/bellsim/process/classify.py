"""
프로세스의 자유/자원 분류

고전 프로세스  : 순간이면 국소 폴리토프 LP, 지연이 있으면 자유 (고전 통신으로 구현 가능)
양자 프로세스  : Choi 부분 전치가 음수면 얽힘 자원,
                명시적 LOSR 분해(또는 곱 채널)가 있으면 자유, 그 밖에는 판정 보류
"""
from dataclasses import dataclass, field
from typing import Optional

from bellsim.core import echo
from bellsim.builder.channels import is_signalling
from bellsim.analysis.locality import is_local
from bellsim.analysis.witness import choi_separability, witness_to_channel_construction
from .model import Process

RESOURCE_KINDS = ("none", "entanglement", "bell_nonlocality", "unknown")

# 증인 → 채널 구성은 상태 공간 D·|A0|·|B0| 를 만든다
_CONSTRUCTION_DIM_LIMIT = 1024


@dataclass
class ProcessClassification:
    """
    :param free: True / False / None (판정 불가)
    :param resource_kind: RESOURCE_KINDS 중 하나
    """
    instantaneous: bool
    free: Optional[bool]
    resource_kind: str
    evidence: dict = field(default_factory=dict)


def classify(process: Process, decomposition: Optional[list] = None) -> ProcessClassification:
    """
    :param decomposition: 선택. 양자 채널의 명시적 LOSR 분해 [(t_j, ℰ_j, ℱ_j)]
    """
    inst = process.instantaneous
    if process.classical:
        if not inst:
            return ProcessClassification(False, True, "none", {"route": "classical-delayed"})
        result = is_local(process.behavior())
        kind = "none" if result.local else "bell_nonlocality"
        evidence = {"route": "lp", "pivots": result.pivots}
        if result.certificate is not None:
            evidence["certificate"] = result.certificate
        return ProcessClassification(True, result.local, kind, evidence)

    verdict = choi_separability(process.channel, decomposition)
    evidence = {"route": "choi", "method": verdict.method, "min_pt_eigenvalue": verdict.min_pt_eigenvalue}
    if verdict.verdict == "entangled":
        a0, b0 = process.channel.in_dims.dims
        a1, b1 = process.channel.out_dims.dims
        if a0 * a1 * b0 * b1 * a0 * b0 <= _CONSTRUCTION_DIM_LIMIT:
            construction = witness_to_channel_construction(verdict.witness, process.channel)
            evidence["witness_value"] = construction.value
        echo(f"📊 얽힘 자원 프로세스 (PT 최소 고유값 {verdict.min_pt_eigenvalue:.6f})")
        return ProcessClassification(inst, False, "entanglement", evidence)

    if inst:
        a_to_b, b_to_a = is_signalling(process.channel)
        if a_to_b or b_to_a:
            evidence["signalling"] = (a_to_b, b_to_a)
            return ProcessClassification(True, False, "unknown", evidence)
    if verdict.certifies_losr or (verdict.verdict == "separable" and _trivial_inputs(process)):
        return ProcessClassification(inst, True, "none", evidence)
    return ProcessClassification(inst, None, "unknown", evidence)


def _trivial_inputs(process: Process) -> bool:
    """입력이 없는 (상태 준비) 채널은 Choi 가 분리 가능하면 곧 LOSR"""
    return process.channel.dim_in == 1
