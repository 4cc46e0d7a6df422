"""
CPTP 채널 (Choi 행렬이 정식 표현, Kraus 는 선택) 과 채널 생성기

Choi 규약 (비정규화):
    J = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|),  인자 순서는 [입력 인자들..., 출력 인자들...]
    Tr J = dim(in),  정규화된 ρ_J = J / dim(in) 은 필요할 때 따로 계산한다.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from bellsim.core import SimConfig, ValidationError, DimensionMismatchError
from bellsim.core.tensor import (
    DimFactorization, as_dims, as_matrix, eig_hermitian, hermiticity_error, is_psd,
    partial_trace, permute_systems, projector, ket, sqrt_psd,
)
from .states import DensityMatrix, Povm, PAULIS


def _default_labels(dims: DimFactorization, suffix: str) -> DimFactorization:
    """두 인자짜리 분해에 기본 라벨(S0,S1)이 붙어 있으면 A{suffix}, B{suffix} 로 바꿔준다"""
    if len(dims) == 2 and dims.labels == ("S0", "S1"):
        return dims.relabel((f"A{suffix}", f"B{suffix}"))
    return dims


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """
    (in ⊗ out) 위의 Choi 행렬로 저장한 CPTP 맵
    양자계 채널은 in_dims = (A0, B0), out_dims = (A1, B1) 라벨을 가진다 (한쪽 차원이 1 이어도 됨)
    """
    choi: np.ndarray
    in_dims: DimFactorization
    out_dims: DimFactorization
    kraus: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        in_dims = _default_labels(as_dims(self.in_dims), "0")
        out_dims = _default_labels(as_dims(self.out_dims), "1")
        choi = as_matrix(self.choi)
        d_in, d_out = in_dims.total, out_dims.total
        if choi.shape != (d_in * d_out, d_in * d_out):
            raise DimensionMismatchError(
                f"❌ Choi 크기 {choi.shape} 가 입력 {in_dims.dims} / 출력 {out_dims.dims} 와 맞지 않습니다.")
        herr = hermiticity_error(choi)
        if herr > SimConfig.EPS_HERM:
            raise ValidationError(f"❌ Choi 행렬이 에르미트가 아닙니다 (오차 {herr:.2e}).", invariant="hermitian")
        if not is_psd(choi):
            raise ValidationError("❌ Choi 행렬이 PSD가 아닙니다 (완전 양성 위반).", invariant="completely-positive")
        reduced = partial_trace(choi, [d_in, d_out], [0])
        tp_err = float(np.max(np.abs(reduced - np.eye(d_in))))
        if tp_err > SimConfig.EPS_CPTP:
            raise ValidationError(
                f"❌ Tr_out J ≠ I_in (오차 {tp_err:.2e}): trace 보존 조건 위반입니다.", invariant="trace-preserving")
        choi = (choi + choi.conj().T) / 2
        choi.setflags(write=False)

        kraus = self.kraus
        if kraus is not None:
            kraus = tuple(as_matrix(k) for k in kraus)
            ref = kraus_choi_matrix(kraus, d_in, d_out)
            if float(np.max(np.abs(ref - choi))) > SimConfig.EPS_CPTP:
                raise ValidationError("❌ Kraus 집합과 Choi 행렬이 일치하지 않습니다.", invariant="kraus-choi")
        object.__setattr__(self, "choi", choi)
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)
        object.__setattr__(self, "kraus", kraus)

    @property
    def dim_in(self) -> int:
        return self.in_dims.total

    @property
    def dim_out(self) -> int:
        return self.out_dims.total

    @property
    def choi_dims(self) -> DimFactorization:
        return DimFactorization(self.in_dims.dims + self.out_dims.dims,
                                self.in_dims.labels + self.out_dims.labels)

    @cached_property
    def kraus_ops(self) -> tuple:
        """저장된 Kraus 가 없으면 Choi 에서 복원해서 캐시"""
        if self.kraus is not None:
            return self.kraus
        return tuple(choi_to_kraus(self))

    def normalized_choi(self) -> np.ndarray:
        """ρ_J = J / (|A0||B0|)"""
        return self.choi / self.dim_in

    def is_bipartite(self) -> bool:
        return len(self.in_dims) == 2 and len(self.out_dims) == 2

    def with_dims(self, in_dims, out_dims) -> "QuantumChannel":
        """같은 맵을 다른 인자 분해로 다시 본다 (총 차원은 같아야 함)"""
        in_dims, out_dims = as_dims(in_dims), as_dims(out_dims)
        if in_dims.total != self.dim_in or out_dims.total != self.dim_out:
            raise DimensionMismatchError(
                f"❌ 새 분해 {in_dims.dims}→{out_dims.dims} 의 총 차원이 {self.dim_in}→{self.dim_out} 과 다릅니다.")
        return QuantumChannel(self.choi, in_dims, out_dims, kraus=self.kraus)


def kraus_choi_matrix(kraus: Sequence[np.ndarray], d_in: int, d_out: int) -> np.ndarray:
    """J = Σ_k |K_k⟩⟩⟨⟨K_k|,  |K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩"""
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for k in kraus:
        k = as_matrix(k)
        if k.shape != (d_out, d_in):
            raise DimensionMismatchError(f"❌ Kraus 연산자 크기 {k.shape} ≠ ({d_out}, {d_in})")
        v = k.T.reshape(-1)
        choi += np.outer(v, v.conj())
    return choi


def kraus_to_choi(kraus: Sequence[np.ndarray], in_dims, out_dims) -> QuantumChannel:
    """
    Kraus 집합 → QuantumChannel

    :param kraus: (d_out x d_in) 행렬 목록, Σ K†K = I 여야 함
    :param in_dims: 입력 인자 분해 (리스트 또는 DimFactorization)
    :param out_dims: 출력 인자 분해
    """
    in_dims, out_dims = as_dims(in_dims), as_dims(out_dims)
    kraus = [as_matrix(k) for k in kraus]
    if not kraus:
        raise ValidationError("❌ Kraus 연산자가 하나도 없습니다.", invariant="trace-preserving")
    completeness = sum(k.conj().T @ k for k in kraus)
    err = float(np.max(np.abs(completeness - np.eye(in_dims.total))))
    if err > SimConfig.EPS_CPTP:
        raise ValidationError(f"❌ Σ K†K ≠ I (오차 {err:.2e}): trace 보존이 아닌 Kraus 집합입니다.",
                              invariant="trace-preserving")
    choi = kraus_choi_matrix(kraus, in_dims.total, out_dims.total)
    return QuantumChannel(choi, in_dims, out_dims, kraus=tuple(kraus))


def choi_to_kraus(channel: QuantumChannel, tol: float = None) -> List[np.ndarray]:
    """
    Choi 고유분해로 Kraus 복원 (rank 개 이하)
    """
    tol = SimConfig.EPS_PSD if tol is None else tol
    vals, vecs = eig_hermitian(channel.choi)
    d_in, d_out = channel.dim_in, channel.dim_out
    kraus = []
    for val, vec in zip(vals[::-1], vecs[:, ::-1].T):
        if val <= tol:
            break
        kraus.append(np.sqrt(val) * vec.reshape(d_in, d_out).T)
    if not kraus:
        raise ValidationError("❌ Choi 행렬의 rank 가 0 입니다.", invariant="completely-positive")
    return kraus


def apply_kraus(kraus: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    out = None
    for k in kraus:
        term = k @ rho @ k.conj().T
        out = term if out is None else out + term
    return out


def apply_choi(choi: np.ndarray, rho: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """N(ρ) = Tr_in[(ρᵀ ⊗ I_out) J]"""
    t = choi.reshape(d_in, d_out, d_in, d_out)
    return np.einsum("ij,iajb->ab", as_matrix(rho), t)


def apply_channel(channel: QuantumChannel, state: DensityMatrix, method: str = "kraus") -> DensityMatrix:
    """
    상태에 채널 적용

    :param method: "kraus" (Kraus 합) 또는 "choi" (Choi 축약)
    """
    if state.dim != channel.dim_in:
        raise DimensionMismatchError(
            f"❌ 상태 차원 {state.dim} 이 채널 입력 차원 {channel.dim_in} 과 다릅니다.")
    if method == "choi":
        out = apply_choi(channel.choi, state.matrix, channel.dim_in, channel.dim_out)
    elif method == "kraus":
        out = apply_kraus(channel.kraus_ops, state.matrix)
    else:
        raise ValidationError(f"❌ 알 수 없는 적용 방식: {method}", invariant="method")
    return DensityMatrix(out, channel.out_dims)


def is_signalling(channel: QuantumChannel) -> Tuple[bool, bool]:
    """
    양방향 신호 여부 (a_to_b, b_to_a)

    A→B: B1 주변분포가 A0 입력에 의존하면 True.
    Tr_{A1} J 가 I_{A0} ⊗ (Tr_{A0 A1} J / |A0|) 와 1e-8 안에서 같은지로 판정한다.
    """
    if not channel.is_bipartite():
        raise ValidationError("❌ 신호 판정에는 (A0,B0)→(A1,B1) 이분 라벨이 필요합니다.", invariant="bipartite-labels")
    a0, b0 = channel.in_dims.dims
    a1, b1 = channel.out_dims.dims
    dims = [a0, b0, a1, b1]
    tol = SimConfig.EPS_CPTP

    # A → B: Tr_{A1} J  vs  I_{A0} ⊗ Tr_{A0 A1} J / |A0|
    reduced = partial_trace(channel.choi, dims, [0, 1, 3])
    bob_part = partial_trace(channel.choi, dims, [1, 3]) / a0
    a_to_b = float(np.max(np.abs(reduced - np.kron(np.eye(a0), bob_part)))) > tol

    # B → A: Tr_{B1} J  vs  I_{B0} ⊗ Tr_{B0 B1} J / |B0|  (순서 [A0,B0,A1] 로 맞춤)
    reduced = partial_trace(channel.choi, dims, [0, 1, 2])
    alice_part = partial_trace(channel.choi, dims, [0, 2]) / b0
    expected = permute_systems(np.kron(np.eye(b0), alice_part), [b0, a0, a1], [1, 0, 2])
    b_to_a = float(np.max(np.abs(reduced - expected))) > tol
    return a_to_b, b_to_a


def is_classical(channel: QuantumChannel, tol: float = None) -> bool:
    """Choi 행렬이 대각이면 고전 채널 (입력 결잃음 + 출력 고전)"""
    tol = SimConfig.EPS_CPTP if tol is None else tol
    off = channel.choi - np.diag(np.diag(channel.choi))
    return float(np.max(np.abs(off))) <= tol if off.size else True


def has_classical_output(channel: QuantumChannel, tol: float = None) -> bool:
    """출력 레지스터가 고전(출력 인덱스가 다른 Choi 블록이 0)인지 확인"""
    tol = SimConfig.EPS_CPTP if tol is None else tol
    d_in, d_out = channel.dim_in, channel.dim_out
    blocks = channel.choi.reshape(d_in, d_out, d_in, d_out).transpose(1, 3, 0, 2)
    off = blocks[~np.eye(d_out, dtype=bool)]
    return float(np.max(np.abs(off), initial=0.0)) <= tol


# ----------------------------------------------------------------------
# 채널 생성기
# ----------------------------------------------------------------------

def identity_channel(d: int) -> QuantumChannel:
    return kraus_to_choi([np.eye(d)], [d], [d])


def bipartite_identity(da: int = 2, db: int = 2) -> QuantumChannel:
    """id_A ⊗ id_B : (A0,B0) → (A1,B1)"""
    return kraus_to_choi([np.eye(da * db)], [da, db], [da, db])


def unitary_channel(u: np.ndarray, dims=None) -> QuantumChannel:
    u = as_matrix(u)
    dims = dims if dims is not None else [u.shape[0]]
    return kraus_to_choi([u], dims, dims)


def replacement_channel(rho: DensityMatrix, in_dims=(1, 1)) -> QuantumChannel:
    """N_ρ(X) = Tr[X] ρ,  J = I_in ⊗ ρ"""
    in_dims = as_dims(in_dims)
    choi = np.kron(np.eye(in_dims.total), rho.matrix)
    return QuantumChannel(choi, in_dims, rho.dims.relabel(
        ("A1", "B1") if len(rho.dims) == 2 else rho.dims.labels))


def swap_channel(d: int = 2) -> QuantumChannel:
    swap = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    return kraus_to_choi([swap], [d, d], [d, d])


def depolarizing_channel(p: float, d: int = 2) -> QuantumChannel:
    """
    N(ρ) = (1-p) ρ + p Tr[ρ] I/d

    :param p: 0 ~ 1 (p=1 이면 완전 탈분극)
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"❌ 탈분극 확률은 [0,1] 이어야 합니다: {p}", invariant="depolarizing-range")
    if d == 2:
        kraus = [np.sqrt(1 - 3 * p / 4) * np.eye(2)] + [np.sqrt(p / 4) * s for s in PAULIS]
        return kraus_to_choi(kraus, [2], [2])
    ident = identity_channel(d).choi
    choi = (1 - p) * ident + p * np.eye(d * d) / d
    return QuantumChannel(choi, [d], [d])


def product_channel(e: QuantumChannel, f: QuantumChannel) -> QuantumChannel:
    """
    E ⊗ F : (A0,B0) → (A1,B1). 각 채널의 입력/출력 인자는 하나로 합쳐서 본다.
    """
    ea, eb = e.dim_in, e.dim_out
    fa, fb = f.dim_in, f.dim_out
    joint = np.kron(e.choi, f.choi)
    choi = permute_systems(joint, [ea, eb, fa, fb], [0, 2, 1, 3])
    kraus = None
    if e.kraus is not None and f.kraus is not None:
        kraus = tuple(np.kron(k, l) for k in e.kraus for l in f.kraus)
    return QuantumChannel(choi, DimFactorization((ea, fa), ("A0", "B0")),
                          DimFactorization((eb, fb), ("A1", "B1")), kraus=kraus)


def classical_channel(stochastic: np.ndarray) -> QuantumChannel:
    """
    열-확률 행렬 P[y, x] = p(y|x) 로 정의한 고전 채널 (대각 Choi)
    """
    p = np.asarray(stochastic, dtype=float)
    n_out, n_in = p.shape
    if np.any(p < -SimConfig.EPS_CLAMP) or np.max(np.abs(p.sum(axis=0) - 1.0)) > SimConfig.EPS_TRACE:
        raise ValidationError("❌ 확률 행렬의 열 합이 1 이 아니거나 음수가 있습니다.", invariant="stochastic")
    p = np.clip(p, 0.0, None)
    diag = p.T.reshape(-1)
    return QuantumChannel(np.diag(diag).astype(complex), [n_in], [n_out])


def measurement_channel(povms: Sequence[Povm]) -> QuantumChannel:
    """
    고전 입력 x0 로 POVM 을 고르고 결과 x1 을 고전 출력으로 내는 qc 채널
    (X0 ⊗ A) → X1,  Kraus = |x1⟩ (⟨x0| ⊗ ⟨k| √M_{x1}^{x0})
    """
    povms = list(povms)
    if not povms:
        raise ValidationError("❌ POVM 목록이 비었습니다.", invariant="povm-nonempty")
    n_in, n_out = len(povms), len(povms[0])
    d = povms[0].dims.total
    if any(len(m) != n_out or m.dims.total != d for m in povms):
        raise DimensionMismatchError("❌ 모든 POVM 의 결과 수와 차원이 같아야 합니다.")
    kraus = []
    for x0, povm in enumerate(povms):
        for x1, effect in enumerate(povm.effects):
            root = sqrt_psd(effect)
            for k in range(d):
                row = np.kron(ket(x0, n_in), ket(k, d) @ root)
                kraus.append(np.outer(ket(x1, n_out), row))
    return kraus_to_choi(kraus, [n_in, d], [n_out])


def povm_channel(povm: Povm) -> QuantumChannel:
    """입력 선택 없이 POVM 하나로 측정하는 qc 채널 A → X"""
    ch = measurement_channel([povm])
    return ch.with_dims([povm.dims.total], [len(povm)])


def dephasing_projector(d: int) -> List[np.ndarray]:
    return [projector(ket(i, d)) for i in range(d)]
