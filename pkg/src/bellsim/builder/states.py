"""
양자 상태(DensityMatrix)와 POVM 정의 및 자주 쓰는 상태 생성기
"""
from dataclasses import dataclass
from typing import List

import numpy as np

from bellsim.core import SimConfig, ValidationError, DimensionMismatchError
from bellsim.core.tensor import (
    DimFactorization, as_dims, as_matrix, hermiticity_error,
    is_psd, partial_trace, permute_systems, projector, tensor,
)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    에르미트, PSD, trace 1 인 복소 행렬 + 텐서 인자 정보
    """
    matrix: np.ndarray
    dims: DimFactorization

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = as_dims(self.dims)
        dims.check(m)
        herr = hermiticity_error(m)
        if herr > SimConfig.EPS_HERM:
            raise ValidationError(f"❌ 밀도행렬이 에르미트가 아닙니다 (오차 {herr:.2e}).", invariant="hermitian")
        if not is_psd(m):
            raise ValidationError("❌ 밀도행렬이 PSD가 아닙니다.", invariant="psd")
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > SimConfig.EPS_TRACE:
            raise ValidationError(f"❌ 밀도행렬의 trace가 1이 아닙니다 (Tr = {tr:.12f}).", invariant="unit-trace")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.dims.total

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def marginal(self, keep) -> "DensityMatrix":
        keep_list = [keep] if isinstance(keep, (int, str)) else list(keep)
        idx = sorted(self.dims.index_of(k) for k in keep_list)
        return DensityMatrix(partial_trace(self.matrix, self.dims, idx), self.dims.select(idx))


@dataclass(frozen=True, eq=False)
class Povm:
    """
    POVM: 에르미트 PSD 효과(effect)들의 합이 항등
    """
    effects: tuple
    dims: DimFactorization

    def __post_init__(self):
        dims = as_dims(self.dims)
        effects = tuple(as_matrix(e) for e in self.effects)
        if not effects:
            raise ValidationError("❌ POVM에는 최소 한 개의 효과가 필요합니다.", invariant="povm-nonempty")
        total = np.zeros((dims.total, dims.total), dtype=complex)
        for e in effects:
            dims.check(e)
            if not is_psd(e):
                raise ValidationError("❌ POVM 효과가 PSD가 아닙니다.", invariant="povm-psd")
            total = total + e
        err = float(np.max(np.abs(total - np.eye(dims.total))))
        if err > SimConfig.EPS_TRACE:
            raise ValidationError(f"❌ POVM 효과의 합이 항등이 아닙니다 (오차 {err:.2e}).",
                                  invariant="povm-completeness")
        for e in effects:
            e.setflags(write=False)
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "dims", dims)

    def __len__(self):
        return len(self.effects)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return np.array([np.real(np.trace(e @ rho)) for e in self.effects])


def pure_state(vector, dims=None) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return DensityMatrix(projector(v), dims if dims is not None else [len(v)])


def maximally_mixed(dims) -> DensityMatrix:
    dims = as_dims(dims)
    return DensityMatrix(np.eye(dims.total) / dims.total, dims)


def phi_plus(d: int = 2) -> DensityMatrix:
    """|φ+⟩ = Σ|ii⟩/√d (정규화된 최대 얽힘 상태)"""
    v = np.zeros(d * d, dtype=complex)
    for i in range(d):
        v[i * d + i] = 1.0
    return pure_state(v, DimFactorization((d, d), ("A", "B")))


def psi_minus() -> DensityMatrix:
    v = np.array([0, 1, -1, 0], dtype=complex)
    return pure_state(v, DimFactorization((2, 2), ("A", "B")))


def werner_state(p: float) -> DensityMatrix:
    """
    Werner 상태 p|ψ-⟩⟨ψ-| + (1-p) I/4  (singlet 규약)

    :param p: 0 ~ 1 사이 혼합 비율 (CHSH 위반 문턱값 p = 1/√2)
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"❌ Werner 파라미터는 [0,1] 범위여야 합니다: {p}", invariant="werner-range")
    m = p * psi_minus().matrix + (1 - p) * np.eye(4) / 4
    return DensityMatrix(m, DimFactorization((2, 2), ("A", "B")))


def product_state(rho: DensityMatrix, sigma: DensityMatrix) -> DensityMatrix:
    labels = rho.dims.labels + sigma.dims.labels
    if len(set(labels)) != len(labels):
        labels = tuple(f"S{i}" for i in range(len(labels)))
    return DensityMatrix(tensor(rho.matrix, sigma.matrix),
                         DimFactorization(rho.dims.dims + sigma.dims.dims, labels))


def combine_bipartite(rho: DensityMatrix, sigma: DensityMatrix) -> DensityMatrix:
    """
    ρ^{A1B1} ⊗ σ^{A1'B1'} 를 (A1 A1') | (B1 B1') 두 인자로 다시 묶는다
    (pre-LOCC 에서 Alice/Bob 이 각자 두 서브시스템을 들고 있는 상황)
    """
    if len(rho.dims) != 2 or len(sigma.dims) != 2:
        raise DimensionMismatchError("❌ 두 상태 모두 이분(bipartite) 상태여야 합니다.")
    a, b = rho.dims.dims
    a2, b2 = sigma.dims.dims
    joint = tensor(rho.matrix, sigma.matrix)
    regrouped = permute_systems(joint, [a, b, a2, b2], [0, 2, 1, 3])
    return DensityMatrix(regrouped, DimFactorization((a * a2, b * b2), ("A", "B")))


def projective_povm(basis: np.ndarray, dims=None) -> Povm:
    """정규직교 기저 벡터(열)로 만든 projective 측정"""
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[0]
    return Povm(tuple(projector(basis[:, k]) for k in range(basis.shape[1])), dims or [d])


def qubit_xz_povm(theta: float) -> Povm:
    """
    x-z 평면 각도 θ 방향 관측량 cosθ Z + sinθ X 의 2-결과 projective 측정
    (결과 0 = +1 고유값)
    """
    e0 = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
    e1 = np.array([-np.sin(theta / 2), np.cos(theta / 2)], dtype=complex)
    return Povm((projector(e0), projector(e1)), [2])


def chsh_optimal_povms() -> tuple:
    """
    |φ+⟩ 에서 CHSH 최대 위반(2√2)을 주는 측정 각도
    Alice: 0, π/2 / Bob: π/4, -π/4
    """
    a_povms = [qubit_xz_povm(0.0), qubit_xz_povm(np.pi / 2)]
    b_povms = [qubit_xz_povm(np.pi / 4), qubit_xz_povm(-np.pi / 4)]
    return a_povms, b_povms


def basis_povm(d: int) -> Povm:
    return projective_povm(np.eye(d), [d])


def trivial_povm(d: int) -> Povm:
    """결과가 항상 0 인 측정 (결과 1은 확률 0)"""
    return Povm((np.eye(d), np.zeros((d, d))), [d])


PAULIS: List[np.ndarray] = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]
