"""
라벨 붙은 시스템 위의 연산자에 채널을 차례로 꽂아 넣는 배선(wiring) 도구

슈퍼프로세스/LOSE 구성에서 "어느 채널이 어느 선(wire)에 걸리는가" 를 라벨로 관리한다.
Choi 행렬 합성은 참조계 R 을 붙인 seed (Σ|i⟩⟨j| ⊗ |i⟩⟨j|) 에서 시작하면 된다.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from bellsim.core import ValidationError, DimensionMismatchError
from bellsim.core.tensor import DimFactorization, as_dims, partial_trace, permute_systems
from .channels import QuantumChannel
from .states import DensityMatrix


@dataclass(frozen=True, eq=False)
class Wires:
    """trace 1 이 아니어도 되는 연산자 + 라벨 달린 인자 분해"""
    matrix: np.ndarray
    dims: DimFactorization

    def __post_init__(self):
        dims = as_dims(self.dims)
        dims.check(np.asarray(self.matrix))
        if len(set(dims.labels)) != len(dims.labels):
            raise ValidationError(f"❌ 배선 라벨이 중복되었습니다: {dims.labels}", invariant="labels")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_state(cls, state: DensityMatrix, labels: Sequence[str] = None) -> "Wires":
        dims = state.dims if labels is None else state.dims.relabel(labels)
        return cls(np.array(state.matrix), dims)

    @classmethod
    def choi_seed(cls, in_dims: DimFactorization, prefix: str = "R:") -> "Wires":
        """
        비정규화 최대 얽힘 seed Σ|i⟩⟨j|_R ⊗ |i⟩⟨j|_in
        여기에 채널을 꽂고 나면 [R..., out...] 위의 행렬이 곧 합성 채널의 Choi 행렬이다.
        """
        d = in_dims.total
        v = np.zeros(d * d, dtype=complex)
        for i in range(d):
            v[i * d + i] = 1.0
        ref_labels = tuple(prefix + lab for lab in in_dims.labels)
        dims = DimFactorization(in_dims.dims + in_dims.dims, ref_labels + in_dims.labels)
        return cls(np.outer(v, v.conj()), dims)

    def attach(self, other: "Wires") -> "Wires":
        """다른 시스템을 텐서곱으로 뒤에 붙인다"""
        return Wires(np.kron(self.matrix, other.matrix),
                     DimFactorization(self.dims.dims + other.dims.dims, self.dims.labels + other.dims.labels))

    def attach_state(self, state: DensityMatrix, labels: Sequence[str]) -> "Wires":
        return self.attach(Wires.from_state(state, labels))

    def reorder(self, labels: Sequence[str]) -> "Wires":
        labels = list(labels)
        if sorted(labels) != sorted(self.dims.labels):
            raise DimensionMismatchError(f"❌ 재배열 라벨 {labels} 이 현재 라벨 {self.dims.labels} 과 다릅니다.")
        order = [self.dims.index_of(lab) for lab in labels]
        return Wires(permute_systems(self.matrix, self.dims, order),
                     DimFactorization(tuple(self.dims.dims[i] for i in order), tuple(labels)))

    def trace_out(self, labels: Sequence[str]) -> "Wires":
        keep = [i for i, lab in enumerate(self.dims.labels) if lab not in set(labels)]
        return Wires(partial_trace(self.matrix, self.dims, keep), self.dims.select(keep))

    def apply(self, channel: QuantumChannel, inputs: Sequence[str], outputs: Sequence[str]) -> "Wires":
        """
        inputs 라벨의 시스템에 채널을 적용하고 결과 시스템에 outputs 라벨을 붙인다

        :param inputs: 채널 입력 인자 순서대로의 라벨 (곱 차원 = 채널 입력 차원)
        :param outputs: 채널 출력 인자 라벨 (개수 = len(channel.out_dims))
        :return: [outputs..., 나머지...] 순서의 새 Wires
        """
        inputs, outputs = list(inputs), list(outputs)
        d_in = int(np.prod([self.dims.dims[self.dims.index_of(lab)] for lab in inputs]))
        if d_in != channel.dim_in:
            raise DimensionMismatchError(
                f"❌ 선 {inputs} 의 차원 {d_in} 이 채널 입력 차원 {channel.dim_in} 과 다릅니다.")
        if len(outputs) != len(channel.out_dims):
            raise DimensionMismatchError(
                f"❌ 출력 라벨 {outputs} 개수가 채널 출력 인자 수 {len(channel.out_dims)} 와 다릅니다.")
        rest = [lab for lab in self.dims.labels if lab not in set(inputs)]
        clash = set(outputs) & set(rest)
        if clash:
            raise ValidationError(f"❌ 출력 라벨 {sorted(clash)} 이 이미 사용 중입니다.", invariant="labels")
        ordered = self.reorder(inputs + rest)
        d_rest = ordered.dims.total // d_in
        out = None
        for k in channel.kraus_ops:
            big = np.kron(k, np.eye(d_rest))
            term = big @ ordered.matrix @ big.conj().T
            out = term if out is None else out + term
        rest_dims = tuple(ordered.dims.dims[len(inputs):])
        dims = DimFactorization(channel.out_dims.dims + rest_dims, tuple(outputs) + tuple(rest))
        return Wires(out, dims)

    def to_state(self) -> DensityMatrix:
        return DensityMatrix(self.matrix, self.dims)


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """순차 합성 second ∘ first (first 출력 = second 입력)"""
    if first.dim_out != second.dim_in:
        raise DimensionMismatchError(
            f"❌ 합성 불가: 첫 채널 출력 {first.dim_out} ≠ 둘째 채널 입력 {second.dim_in}")
    in_dims = first.in_dims.relabel([f"I{i}" for i in range(len(first.in_dims))])
    wires = Wires.choi_seed(in_dims)
    mid = [f"M{i}" for i in range(len(first.out_dims))]
    out = [f"O{i}" for i in range(len(second.out_dims))]
    wires = wires.apply(first, in_dims.labels, mid)
    wires = wires.apply(second, mid, out)
    wires = wires.reorder([f"R:{lab}" for lab in in_dims.labels] + out)
    return QuantumChannel(wires.matrix, first.in_dims, second.out_dims)
