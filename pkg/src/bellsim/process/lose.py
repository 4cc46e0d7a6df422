"""
국소 연산 + 공유 얽힘(LOSE) 구성

    𝒩(X) = (ℰ^{A0 A2 → A1} ⊗ ℱ^{B0 B2 → B1})(X ⊗ ω^{A2 B2})

ω 가 분리 가능하면 LOSR 채널, 얽혀 있으면 순간 얽힘 자원 프로세스가 된다.
"""
from typing import Sequence

import numpy as np

from bellsim.core import DimensionMismatchError
from bellsim.core.tensor import DimFactorization, as_dims, permute_systems
from bellsim.builder.states import DensityMatrix
from bellsim.builder.channels import QuantumChannel, kraus_to_choi
from bellsim.builder.wiring import Wires
from .model import Process


def _two_factor_local(channel: QuantumChannel, resource_dim: int, who: str) -> QuantumChannel:
    """국소 채널을 [입력, 자원] → 출력(한 인자) 꼴로 맞춘다"""
    dims = channel.in_dims.dims
    if len(dims) != 2:
        if channel.dim_in % resource_dim:
            raise DimensionMismatchError(f"❌ {who} 국소 채널 입력 {channel.dim_in} 을 자원 차원 {resource_dim} 로 나눌 수 없습니다.")
        dims = (channel.dim_in // resource_dim, resource_dim)
    if dims[1] != resource_dim:
        raise DimensionMismatchError(f"❌ {who} 국소 채널의 자원 인자 {dims[1]} ≠ 상태 인자 {resource_dim}")
    return channel.with_dims(DimFactorization(dims), DimFactorization((channel.dim_out,)))


def lose_construct(entangled_state: DensityMatrix, local_a: QuantumChannel, local_b: QuantumChannel) -> Process:
    """
    :param entangled_state: ω^{A2 B2} (이분 상태)
    :param local_a: ℰ: [A0, A2] → A1
    :param local_b: ℱ: [B0, B2] → B1
    :return: 순간(Δt = 0) 프로세스, 구성상 양방향 모두 신호 없음
    """
    if len(entangled_state.dims) != 2:
        raise DimensionMismatchError("❌ LOSE 자원 상태는 이분 상태여야 합니다.")
    a2, b2 = entangled_state.dims.dims
    local_a = _two_factor_local(local_a, a2, "Alice")
    local_b = _two_factor_local(local_b, b2, "Bob")
    a0, b0 = local_a.in_dims.dims[0], local_b.in_dims.dims[0]

    wires = Wires.choi_seed(DimFactorization((a0, b0), ("A0", "B0")))
    wires = wires.attach_state(entangled_state, ["A2", "B2"])
    wires = wires.apply(local_a, ["A0", "A2"], ["A1"])
    wires = wires.apply(local_b, ["B0", "B2"], ["B1"])
    wires = wires.reorder(["R:A0", "R:B0", "A1", "B1"])
    channel = QuantumChannel(wires.matrix, DimFactorization((a0, b0), ("A0", "B0")),
                             DimFactorization((local_a.dim_out, local_b.dim_out), ("A1", "B1")))
    return Process(channel, delay=0.0, spatially_separated=True)


def controlled_local(branches: Sequence[QuantumChannel], register_dim: int) -> QuantumChannel:
    """
    고전 레지스터 값 t 에 따라 branches[t] 를 적용하는 국소 채널
    [X, S, T] → Y,  Kraus = K_t ⊗ ⟨t|
    """
    if len(branches) != register_dim:
        raise DimensionMismatchError(f"❌ 가지 수 {len(branches)} ≠ 레지스터 차원 {register_dim}")
    first = branches[0]
    if any(ch.in_dims.dims != first.in_dims.dims or ch.dim_out != first.dim_out for ch in branches):
        raise DimensionMismatchError("❌ 모든 가지의 국소 채널 입출력 차원이 같아야 합니다.")
    kraus = []
    for t, ch in enumerate(branches):
        bra = np.zeros((1, register_dim))
        bra[0, t] = 1.0
        kraus += [np.kron(k, bra) for k in ch.kraus_ops]
    x, s = first.in_dims.dims
    return kraus_to_choi(kraus, DimFactorization((x, s * register_dim)), [first.dim_out])


def flagged_mixture(states: Sequence[DensityMatrix], probs: Sequence[float]) -> DensityMatrix:
    """
    ρ̄ = Σ_t p_t ρ_t ⊗ |t⟩⟨t|_{T_A} ⊗ |t⟩⟨t|_{T_B}  를 (Ã T_A | B̃ T_B) 로 묶는다
    """
    n = len(states)
    da, db = states[0].dims.dims
    if any(s.dims.dims != (da, db) for s in states):
        raise DimensionMismatchError("❌ 모든 transcript 가지의 상태 차원이 같아야 합니다.")
    total = None
    for t, (rho, p) in enumerate(zip(states, probs)):
        flag = np.zeros((n, n))
        flag[t, t] = 1.0
        joint = np.kron(np.kron(rho.matrix, flag), flag)
        # [Ã, B̃, T_A, T_B] → [Ã, T_A, B̃, T_B]
        dims = as_dims([da, db, n, n])
        term = p * permute_systems(joint, dims, [0, 2, 1, 3])
        total = term if total is None else total + term
    return DensityMatrix(total, DimFactorization((da * n, db * n), ("A", "B")))
