"""
POVM 채널용 CHSH 증인(witness), Choi 분리 가능성 판정, 증인 → 채널 검사 구성

증인 계수:  coeff(x0,y0,x1,y1) = 3/16 − δw · [x1 ⊕ y1 = x0·y0]
    paper_3_16                      δw = 1
    corrected_3_16_delta_quarter    δw = 1/4  (기본값, 국소 꼭짓점 최솟값 0)
    custom                          임의 δw
"""
import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from bellsim.core import SimConfig, ValidationError, DimensionMismatchError, echo
from bellsim.core.tensor import (
    DimFactorization, as_matrix, eig_hermitian, partial_trace, partial_transpose,
    permute_systems, projector,
)
from bellsim.builder.states import DensityMatrix, Povm, phi_plus, chsh_optimal_povms
from bellsim.builder.channels import (
    QuantumChannel, apply_choi, has_classical_output, is_classical, kraus_to_choi,
    measurement_channel, povm_channel, product_channel,
)
from bellsim.builder.wiring import Wires
from bellsim.process.lose import lose_construct
from bellsim.process.superprocess import LocalMember, Superprocess, SuperprocessForm
from .locality import CHSH_SCENARIO, vertex_matrix

NORMALIZATIONS = {
    "paper_3_16": 1.0,
    "corrected_3_16_delta_quarter": 0.25,
}
PPT_EXACT_CUTS = {(2, 2), (2, 3), (3, 2)}


def _win(x0: int, y0: int, x1: int, y1: int) -> bool:
    return (x1 ^ y1) == (x0 & y0)


@dataclass(frozen=True, eq=False)
class WitnessOperator:
    """
    W = Σ_{x1,y1} W_{x1y1} ⊗ |x1 y1⟩⟨x1 y1|

    :param blocks: (2, 2, d, d) 배열, blocks[x1, y1] = W_{x1y1} (A0'B0' 위)
    :param psi: Alice 입력 상태 벡터 2개 (행)
    :param phi: Bob 입력 상태 벡터 2개 (행)
    """
    blocks: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    normalization: str = "corrected_3_16_delta_quarter"
    delta_weight: float = 0.25

    def __post_init__(self):
        blocks = np.asarray(self.blocks, dtype=complex)
        if blocks.ndim != 4 or blocks.shape[:2] != (2, 2):
            raise DimensionMismatchError(f"❌ 증인 블록 배열 크기가 (2,2,d,d) 가 아닙니다: {blocks.shape}")
        for b in blocks.reshape(4, *blocks.shape[2:]):
            if np.max(np.abs(b - b.conj().T)) > SimConfig.EPS_HERM:
                raise ValidationError("❌ 증인 블록이 에르미트가 아닙니다.", invariant="hermitian")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=complex))
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=complex))

    @property
    def dim(self) -> int:
        return self.blocks.shape[-1]

    def coefficient(self, x0: int, y0: int, x1: int, y1: int) -> float:
        return 3.0 / 16.0 - self.delta_weight * float(_win(x0, y0, x1, y1))

    def coefficients(self) -> np.ndarray:
        """(x0, y0, x1, y1) 순서의 계수 배열"""
        c = np.zeros(CHSH_SCENARIO.shape)
        for idx in itertools.product(range(2), repeat=4):
            c[idx] = self.coefficient(*idx)
        return c

    def operator(self) -> np.ndarray:
        """[A0', B0', X1, Y1] 순서의 블록 대각 연산자"""
        out = np.zeros((4 * self.dim, 4 * self.dim), dtype=complex)
        for x1, y1 in itertools.product(range(2), range(2)):
            flag = np.zeros((4, 4))
            flag[2 * x1 + y1, 2 * x1 + y1] = 1.0
            out += np.kron(self.blocks[x1, y1], flag)
        return out

    def block_traces(self) -> np.ndarray:
        return np.real(np.einsum("abii->ab", self.blocks))


@dataclass
class SeparabilityVerdict:
    """
    :param verdict: "separable" | "entangled" | "inconclusive"
    :param method: 판정 근거 ("diagonal", "npt", "product", "decomposition", "ppt_exact", "trivial_cut", "none")
    :param witness: NPT 일 때 (|v⟩⟨v|)^{T_B} 증인 (Choi 원래 순서 [A0,B0,A1,B1])
    """
    verdict: str
    method: str
    min_pt_eigenvalue: float = 0.0
    pt_eigenvalues: Optional[np.ndarray] = None
    witness: Optional[np.ndarray] = None
    decomposition: Optional[list] = None

    @property
    def certifies_losr(self) -> bool:
        """분해가 명시적으로 주어졌거나 곱 채널일 때만 LOSR 로 인정한다"""
        return self.verdict == "separable" and self.method in ("product", "decomposition")


@dataclass
class WitnessConstruction:
    """
    증인 W = rη − tζ 를 LOSR 슈퍼프로세스 + 고전 결과 확률로 바꾼 결과

    value = D · (r · p(1,1|ηᵀ) − t · p(1,1|ζᵀ)),  D = |A0||A1||B0||B1|
    """
    superprocess: Superprocess
    outcome: Tuple[int, int]
    r: float
    t: float
    p_eta: float
    p_zeta: float
    value: float
    direct_value: float
    details: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# CHSH 증인
# ----------------------------------------------------------------------

def _pure_vectors(states, who: str) -> np.ndarray:
    out = []
    for s in states:
        arr = np.asarray(s.matrix if isinstance(s, DensityMatrix) else s, dtype=complex)
        if arr.ndim == 2:
            vals, vecs = eig_hermitian(arr)
            if abs(vals[-1] - 1.0) > SimConfig.EPS_TRACE:
                raise ValidationError(f"❌ {who} 입력 상태가 순수 상태가 아닙니다.", invariant="pure-input")
            arr = vecs[:, -1]
        if abs(np.linalg.norm(arr) - 1.0) > SimConfig.EPS_TRACE:
            raise ValidationError(f"❌ {who} 입력 벡터가 정규화되어 있지 않습니다.", invariant="pure-input")
        out.append(arr)
    if len(out) != 2:
        raise ValidationError(f"❌ {who} 입력 상태는 정확히 2개여야 합니다.", invariant="two-inputs")
    if out[0].shape != out[1].shape:
        raise DimensionMismatchError(f"❌ {who} 입력 상태 두 개의 차원이 다릅니다.")
    return np.array(out)


def build_chsh_povm_witness(psi: Sequence = None, phi: Sequence = None,
                            normalization: str = "corrected_3_16_delta_quarter",
                            delta_weight: float = None) -> WitnessOperator:
    """
    W_{x1y1} = Σ_{x0,y0} coeff · (|ψ_x0⟩⟨ψ_x0| ⊗ |φ_y0⟩⟨φ_y0|)

    :param psi: Alice 입력 순수 상태 2개 (기본 계산 기저)
    :param phi: Bob 입력 순수 상태 2개
    :param normalization: "paper_3_16" | "corrected_3_16_delta_quarter" | "custom"
    :param delta_weight: custom 일 때의 δ 가중치
    """
    eye = np.eye(2)
    psi = _pure_vectors(psi if psi is not None else [eye[0], eye[1]], "Alice")
    phi = _pure_vectors(phi if phi is not None else [eye[0], eye[1]], "Bob")
    if normalization == "custom":
        if delta_weight is None:
            raise ValidationError("❌ custom 정규화에는 delta_weight 가 필요합니다.", invariant="normalization")
        dw = float(delta_weight)
    elif normalization in NORMALIZATIONS:
        dw = NORMALIZATIONS[normalization]
    else:
        raise ValidationError(f"❌ 알 수 없는 정규화: {normalization}", invariant="normalization")

    d = psi.shape[1] * phi.shape[1]
    blocks = np.zeros((2, 2, d, d), dtype=complex)
    for x0, y0, x1, y1 in itertools.product(range(2), repeat=4):
        coeff = 3.0 / 16.0 - dw * float(_win(x0, y0, x1, y1))
        blocks[x1, y1] += coeff * np.kron(projector(psi[x0]), projector(phi[y0]))
    return WitnessOperator(blocks, psi, phi, normalization, dw)


def _check_witness_channel(w: WitnessOperator, channel: QuantumChannel):
    if not has_classical_output(channel):
        raise ValidationError("❌ 증인 평가에는 출력이 고전 레지스터인 채널이 필요합니다.", invariant="classical-output")
    if channel.dim_in != w.dim or channel.dim_out != 4:
        raise DimensionMismatchError(
            f"❌ 채널 {channel.dim_in}→{channel.dim_out} 이 증인 ({w.dim}→4) 과 맞지 않습니다.")


def witness_probabilities(w: WitnessOperator, channel: QuantumChannel) -> np.ndarray:
    """p(x1,y1|x0,y0) = Tr[Π_{x1y1} 𝒩(ψ_x0 ⊗ φ_y0)]  (x0, y0, x1, y1 순서)"""
    _check_witness_channel(w, channel)
    table = np.zeros(CHSH_SCENARIO.shape)
    for x0, y0 in itertools.product(range(2), range(2)):
        rho = np.kron(projector(w.psi[x0]), projector(w.phi[y0]))
        out = apply_choi(channel.choi, rho, channel.dim_in, channel.dim_out)
        table[x0, y0] = np.real(np.diag(out)).reshape(2, 2)
    return table


def evaluate_witness(w: WitnessOperator, channel: QuantumChannel) -> float:
    """Σ p(x1,y1|x0,y0) · coeff"""
    return float(np.sum(witness_probabilities(w, channel) * w.coefficients()))


def witness_choi_contraction(w: WitnessOperator, channel: QuantumChannel) -> float:
    """Tr[W̃ J],  W̃ = Σ_b W_bᵀ ⊗ |b⟩⟨b| ([입력, 출력] 순서)"""
    _check_witness_channel(w, channel)
    total = 0.0
    d_in = channel.dim_in
    blocks = channel.choi.reshape(d_in, 4, d_in, 4)
    for x1, y1 in itertools.product(range(2), range(2)):
        b = 2 * x1 + y1
        total += np.real(np.trace(w.blocks[x1, y1].T @ blocks[:, b, :, b]))
    return float(total)


def losr_min_witness_value(w: WitnessOperator) -> float:
    """결정적 국소 전략 16개 위의 최솟값 (ψ, φ 가 정규직교일 때만)"""
    for vecs, who in ((w.psi, "Alice"), (w.phi, "Bob")):
        if abs(np.vdot(vecs[0], vecs[1])) > SimConfig.EPS_TRACE:
            raise ValidationError(f"❌ {who} 입력 상태가 정규직교가 아니면 국소 최솟값을 꼭짓점으로 계산할 수 없습니다.",
                                  invariant="orthonormal-inputs")
    v, _ = vertex_matrix(CHSH_SCENARIO)
    values = w.coefficients().reshape(-1) @ v
    return float(values.min())


def tsirelson_lose_channel() -> QuantumChannel:
    """|φ+⟩ + CHSH 최적 측정으로 만든 순간 qc 채널"""
    a_povms, b_povms = chsh_optimal_povms()
    return lose_construct(phi_plus(), measurement_channel(a_povms), measurement_channel(b_povms)).channel


# ----------------------------------------------------------------------
# Choi 분리 가능성
# ----------------------------------------------------------------------

def _cut_dims(channel: QuantumChannel):
    a0, b0 = channel.in_dims.dims
    a1, b1 = channel.out_dims.dims
    return a0, b0, a1, b1


def _check_decomposition(channel: QuantumChannel, decomposition) -> bool:
    """Σ t_j ℰ_j ⊗ ℱ_j 가 Choi 를 1e-8 안에서 재현하는지"""
    weights = np.array([t for t, _, _ in decomposition], dtype=float)
    if np.any(weights < -SimConfig.EPS_CLAMP) or abs(weights.sum() - 1.0) > SimConfig.EPS_TRACE:
        return False
    choi = sum(t * product_channel(e, f).choi for t, e, f in decomposition)
    return choi.shape == channel.choi.shape and float(np.max(np.abs(choi - channel.choi))) <= SimConfig.EPS_CPTP


def choi_separability(channel: QuantumChannel, decomposition: Optional[list] = None) -> SeparabilityVerdict:
    """
    (A0 A1 | B0 B1) 절단에서 Choi 행렬의 분리 가능성

    :param decomposition: 선택. [(t_j, ℰ_j, ℱ_j)] 명시적 LOSR 분해
    """
    if not channel.is_bipartite():
        raise ValidationError("❌ 분리 가능성 판정에는 (A0,B0)→(A1,B1) 이분 라벨이 필요합니다.",
                              invariant="bipartite-labels")
    if is_classical(channel):
        return SeparabilityVerdict("separable", "diagonal")

    a0, b0, a1, b1 = _cut_dims(channel)
    dims = [a0, a1, b0, b1]
    cut = permute_systems(channel.choi, [a0, b0, a1, b1], [0, 2, 1, 3])
    pt = partial_transpose(cut, dims, [2, 3])
    vals, vecs = eig_hermitian(pt)
    lam = float(vals[0])
    if lam < -SimConfig.EPS_PSD:
        w_cut = partial_transpose(projector(vecs[:, 0]), dims, [2, 3])
        witness = permute_systems(w_cut, dims, [0, 2, 1, 3])
        echo(f"🔍 Choi 부분 전치 최소 고유값 {lam:.6f} < 0 → 얽힘")
        return SeparabilityVerdict("entangled", "npt", lam, vals, witness=witness)

    tr_a = partial_trace(cut, dims, [0, 1])
    tr_b = partial_trace(cut, dims, [2, 3])
    total = float(np.real(np.trace(cut)))
    if float(np.max(np.abs(cut - np.kron(tr_a, tr_b) / total))) <= SimConfig.EPS_CPTP:
        return SeparabilityVerdict("separable", "product", lam, vals)
    if decomposition is not None and _check_decomposition(channel, decomposition):
        return SeparabilityVerdict("separable", "decomposition", lam, vals, decomposition=list(decomposition))

    side_a, side_b = a0 * a1, b0 * b1
    if min(side_a, side_b) == 1:
        return SeparabilityVerdict("separable", "trivial_cut", lam, vals)
    if (side_a, side_b) in PPT_EXACT_CUTS:
        return SeparabilityVerdict("separable", "ppt_exact", lam, vals)
    return SeparabilityVerdict("inconclusive", "none", lam, vals)


# ----------------------------------------------------------------------
# 증인 → 채널 검사
# ----------------------------------------------------------------------

def _entangling_pre(d_in: int, d_sys: int) -> QuantumChannel:
    """
    입력 A'(d_in) 을 메모리에 두고 φ+ 를 [시스템 A0, 메모리 Ã0] 에 준비
    출력 순서 [A0, E = (A', Ã0)]
    """
    v = np.zeros((d_sys * d_in * d_sys, d_in), dtype=complex)
    for a in range(d_in):
        for i in range(d_sys):
            v[i * (d_in * d_sys) + a * d_sys + i, a] = 1.0 / np.sqrt(d_sys)
    return kraus_to_choi([v], [d_in], DimFactorization((d_sys, d_in * d_sys), ("A0", "EA")))


def _bell_test_post(d0: int, d1: int) -> QuantumChannel:
    """
    [출력 A1, 메모리 (A'0, A'1, Ã0)] 를 최대 얽힘 Φ 에 투영 (결과 1 = 성공)
    Φ ∝ Σ_{i,k} |k⟩_{A1} |i⟩_{A'0} |k⟩_{A'1} |i⟩_{Ã0}
    """
    dims = (d1, d0, d1, d0)
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    for i in range(d0):
        for k in range(d1):
            v[np.ravel_multi_index((k, i, k, i), dims)] = 1.0
    v /= np.linalg.norm(v)
    proj = projector(v)
    d = proj.shape[0]
    return povm_channel(Povm((np.eye(d) - proj, proj), [d]))


def _split_witness(w: np.ndarray):
    vals, vecs = eig_hermitian(w)
    pos = (vecs * np.clip(vals, 0, None)) @ vecs.conj().T
    neg = (vecs * np.clip(-vals, 0, None)) @ vecs.conj().T
    return pos, neg


def _success_probability(member: LocalMember, channel: QuantumChannel, state: np.ndarray,
                         dims: DimFactorization) -> float:
    wires = Wires(state, dims)
    wires = wires.apply(member.pre_a, ["A'"], ["A0", "EA"])
    wires = wires.apply(member.pre_b, ["B'"], ["B0", "EB"])
    wires = wires.apply(channel, ["A0", "B0"], ["A1", "B1"])
    wires = wires.apply(member.post_a, ["A1", "EA"], ["XA"])
    wires = wires.apply(member.post_b, ["B1", "EB"], ["XB"])
    out = wires.reorder(["XA", "XB"]).matrix
    return float(np.real(out[3, 3]))


def witness_to_channel_construction(witness: np.ndarray, channel: QuantumChannel) -> WitnessConstruction:
    """
    Choi 공간의 얽힘 증인 W (순서 [A0,B0,A1,B1]) 를 LOSR 검사로 바꾼다.

    W = rη − tζ (양/음 고유 부분) 로 나누고, 양쪽이 φ+ 를 준비해 한쪽을 채널에 넣은 뒤
    출력과 메모리를 ηᵀ(또는 ζᵀ) 입력과 함께 최대 얽힘 투영한다.
    value = D(r p_η − t p_ζ) 가 Tr[ρ_J W] 와 1e-8 안에서 같아야 한다.
    """
    if not channel.is_bipartite():
        raise ValidationError("❌ 증인 구성에는 이분 채널이 필요합니다.", invariant="bipartite-labels")
    w = as_matrix(witness)
    a0, b0, a1, b1 = _cut_dims(channel)
    native = [a0, b0, a1, b1]
    DimFactorization(tuple(native)).check(w)
    if float(np.max(np.abs(w))) == 0.0:
        raise ValidationError("❌ 영 증인은 분해할 수 없습니다.", invariant="nonzero-witness")
    direct = float(np.real(np.trace(channel.normalized_choi() @ w)))

    pos, neg = _split_witness(permute_systems(w, native, [0, 2, 1, 3]))
    r, t = float(np.real(np.trace(pos))), float(np.real(np.trace(neg)))
    da, db = a0 * a1, b0 * b1
    member = LocalMember(1.0, _entangling_pre(da, a0), _entangling_pre(db, b0),
                         _bell_test_post(a0, a1), _bell_test_post(b0, b1))
    sp = Superprocess(SuperprocessForm.LOSR, members=(member,))

    in_dims = DimFactorization((da, db), ("A'", "B'"))
    p_eta = _success_probability(member, channel, (pos / r).T, in_dims) if r > 0 else 0.0
    p_zeta = _success_probability(member, channel, (neg / t).T, in_dims) if t > 0 else 0.0
    d_total = a0 * a1 * b0 * b1
    value = d_total * (r * p_eta - t * p_zeta)
    if abs(value - direct) > SimConfig.EPS_CPTP:
        raise ValidationError(f"❌ 구성 값 {value:.12f} 이 Tr[ρ_J W] = {direct:.12f} 와 다릅니다.",
                              invariant="witness-construction")
    if value >= 0:
        echo(f"⚠️ 증인이 이 채널에서 위반되지 않습니다 (값 {value:.6f} ≥ 0).")
    return WitnessConstruction(sp, (1, 1), r, t, p_eta, p_zeta, value, direct,
                               details={"normalization": d_total})
