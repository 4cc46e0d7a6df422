"""
밀도행렬/채널 계산의 바닥이 되는 복소 선형대수 유틸리티

인덱스 규약 (모든 모듈 공통):
    텐서 인자는 subsystem-major 사전식 순서로 쌓는다.
    dims = [d_0, d_1, ..., d_{n-1}] 일 때 기저 |i_0 i_1 ... i_{n-1}⟩ 의 평탄 인덱스는
    i_0 * (d_1 ... d_{n-1}) + ... + i_{n-1}  (np.kron(a, b) 의 a-major 순서와 동일)
"""
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from .config import SimConfig
from .errors import DimensionMismatchError, ValidationError

Subsystem = Union[int, str]


@dataclass(frozen=True)
class DimFactorization:
    """
    행렬 공간의 텐서 인자 분해 (예: [|A0|, |B0|] + 라벨 ["A0", "B0"])
    """
    dims: Tuple[int, ...]
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValidationError("❌ 인자 분해에 최소 한 개의 차원이 필요합니다.", invariant="dims>=1")
        if any(d < 1 for d in dims):
            raise ValidationError(f"❌ 모든 차원은 1 이상이어야 합니다: {dims}", invariant="dims>=1")
        labels = tuple(self.labels) if self.labels else tuple(f"S{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise ValidationError(f"❌ 라벨 수({len(labels)})와 차원 수({len(dims)})가 다릅니다.",
                                  invariant="labels")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.dims)

    def index_of(self, subsystem: Subsystem) -> int:
        if isinstance(subsystem, str):
            if subsystem not in self.labels:
                raise DimensionMismatchError(f"❌ 라벨 '{subsystem}' 이(가) {self.labels} 에 없습니다.")
            return self.labels.index(subsystem)
        idx = int(subsystem)
        if not 0 <= idx < len(self.dims):
            raise DimensionMismatchError(f"❌ 서브시스템 인덱스 {idx} 가 범위를 벗어났습니다.")
        return idx

    def check(self, m: np.ndarray):
        """행렬 크기가 분해와 맞는지 확인"""
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != self.total:
            raise DimensionMismatchError(
                f"❌ 행렬 크기 {m.shape} 가 인자 분해 {self.dims} (총 {self.total}) 와 맞지 않습니다.")

    def select(self, indices: Sequence[int]) -> "DimFactorization":
        return DimFactorization(tuple(self.dims[i] for i in indices),
                                tuple(self.labels[i] for i in indices))

    def relabel(self, labels: Sequence[str]) -> "DimFactorization":
        return DimFactorization(self.dims, tuple(labels))


def as_dims(dims) -> DimFactorization:
    """리스트/튜플도 DimFactorization 으로 받아준다"""
    if isinstance(dims, DimFactorization):
        return dims
    return DimFactorization(tuple(dims))


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


def tensor(a, b) -> np.ndarray:
    """크로네커 곱 a ⊗ b ((i_a, i_b) 사전식, a-major)"""
    return np.kron(as_matrix(a), as_matrix(b))


def tensor_all(mats: Iterable) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, as_matrix(m))
    return out


def _resolve(dims: DimFactorization, subsystems) -> list:
    if isinstance(subsystems, (int, str)):
        subsystems = [subsystems]
    return sorted({dims.index_of(s) for s in subsystems})


def partial_trace(m, dims, keep) -> np.ndarray:
    """
    keep 에 없는 인자를 모두 trace out

    :param m: 정방 행렬
    :param dims: 인자 분해
    :param keep: 남길 서브시스템 (인덱스 또는 라벨, 빈 목록이면 1x1 전체 trace)
    :return: 남긴 인자들의 곱 공간 위의 행렬 (순서는 원래 순서 유지)
    """
    dims = as_dims(dims)
    m = as_matrix(m)
    dims.check(m)
    keep_idx = _resolve(dims, keep)
    n = len(dims)
    t = m.reshape(dims.dims + dims.dims)
    # 뒤쪽 인자부터 지워야 축 번호가 꼬이지 않는다
    current = n
    for i in reversed(range(n)):
        if i in keep_idx:
            continue
        t = np.trace(t, axis1=i, axis2=i + current)
        current -= 1
    d_keep = int(np.prod([dims.dims[i] for i in keep_idx])) if keep_idx else 1
    return t.reshape(d_keep, d_keep)


def partial_transpose(m, dims, subsystem) -> np.ndarray:
    """한 인자(또는 여러 인자)의 인덱스만 전치. 두 번 적용하면 원래 행렬."""
    dims = as_dims(dims)
    m = as_matrix(m)
    dims.check(m)
    n = len(dims)
    t = m.reshape(dims.dims + dims.dims)
    axes = list(range(2 * n))
    for i in _resolve(dims, subsystem):
        axes[i], axes[i + n] = axes[i + n], axes[i]
    return t.transpose(axes).reshape(dims.total, dims.total)


def permute_systems(m, dims, order: Sequence[Subsystem]) -> np.ndarray:
    """
    텐서 인자 순서를 재배열

    :param order: 새 순서 (예: [0, 2, 1, 3] 또는 ["A0", "A1", "B0", "B1"])
    """
    dims = as_dims(dims)
    m = as_matrix(m)
    dims.check(m)
    perm = [dims.index_of(s) for s in order]
    if sorted(perm) != list(range(len(dims))):
        raise DimensionMismatchError(f"❌ 잘못된 순열입니다: {order}")
    n = len(dims)
    t = m.reshape(dims.dims + dims.dims)
    t = t.transpose(perm + [p + n for p in perm])
    return t.reshape(dims.total, dims.total)


def permute_vector(v, dims, order: Sequence[Subsystem]) -> np.ndarray:
    dims = as_dims(dims)
    perm = [dims.index_of(s) for s in order]
    t = np.asarray(v, dtype=complex).reshape(dims.dims)
    return t.transpose(perm).reshape(-1)


def hermiticity_error(m) -> float:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m, tol: float = None) -> bool:
    tol = SimConfig.EPS_HERM if tol is None else tol
    return hermiticity_error(m) <= tol


def eig_hermitian(m):
    """
    에르미트 행렬 고유분해

    :return: (오름차순 실수 고유값, 고유벡터 열 행렬)
    """
    m = as_matrix(m)
    if not is_hermitian(m):
        raise ValidationError(
            f"❌ 에르미트 행렬이 아닙니다 (max|m-m†| = {hermiticity_error(m):.3e}).",
            invariant="hermitian")
    herm = (m + m.conj().T) / 2
    vals, vecs = np.linalg.eigh(herm)
    return vals, vecs


def min_eigenvalue(m) -> float:
    return float(eig_hermitian(m)[0][0])


def is_psd(m, tol: float = None) -> bool:
    tol = SimConfig.EPS_PSD if tol is None else tol
    if not is_hermitian(m):
        return False
    return min_eigenvalue(m) >= -tol


def sqrt_psd(m) -> np.ndarray:
    """PSD 행렬의 제곱근 (작은 음수 고유값은 0으로)"""
    vals, vecs = eig_hermitian(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def inv_sqrt_psd(m, floor: float = 1e-14) -> np.ndarray:
    vals, vecs = eig_hermitian(m)
    vals = np.where(vals > floor, vals, np.inf)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())
