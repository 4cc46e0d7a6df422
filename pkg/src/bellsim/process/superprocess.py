"""
슈퍼프로세스: 프로세스를 프로세스로 보내는 자유 연산

세 가지 형태를 다룬다.
    LOSR      Σ_λ t_λ (post_a ⊗ post_b) ∘ (𝒩 ⊗ id_E) ∘ (pre_a ⊗ pre_b), 지연 보존
    PRE_LOCC  입력 프로세스를 미리 써서 얻은 상태에 pre-LOCC 를 돌리고, 출력 시점에는 국소 연산만 (지연 0)
    GENERAL   post ∘ (𝒩 ⊗ id_E) ∘ pre, 지연은 더한다
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from bellsim.core import SimConfig, ValidationError, DimensionMismatchError, echo
from bellsim.core.tensor import DimFactorization
from bellsim.builder.states import DensityMatrix
from bellsim.builder.channels import QuantumChannel, identity_channel
from bellsim.builder.instruments import PreLoccProtocol, run_protocol
from bellsim.builder.wiring import Wires
from .model import Process
from .lose import lose_construct, controlled_local, flagged_mixture

class SuperprocessForm(str, Enum):
    LOSR = "losr"
    PRE_LOCC = "pre_locc"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class LocalMember:
    """
    LOSR 혼합의 한 항

    :param pre_a: A0' → [A0] 또는 [A0, E_A]
    :param post_a: [A1] 또는 [A1, E_A] → A1'
    """
    weight: float
    pre_a: QuantumChannel
    pre_b: QuantumChannel
    post_a: QuantumChannel
    post_b: QuantumChannel


@dataclass(frozen=True, eq=False)
class LocalPost:
    """PRE_LOCC 출력 단계의 국소 연산 쌍: post_a [A0', Ã] → A1', post_b [B0', B̃] → B1'"""
    post_a: QuantumChannel
    post_b: QuantumChannel


@dataclass(frozen=True, eq=False)
class Superprocess:
    """
    :param form: SuperprocessForm
    :param members: LOSR 형태의 혼합 구성원
    :param protocol: PRE_LOCC 형태의 pre-LOCC 프로토콜
    :param resource_state: PRE_LOCC 에서 입력 프로세스에 넣을 상태 [A0, E_A, B0, E_B] (기본 1x1 자명 상태)
    :param post_by_transcript: transcript → LocalPost (없으면 default_post)
    :param pre / post: GENERAL 형태의 전처리 채널 (출력 = 프로세스 입력 인자들 + 메모리) / 후처리 채널
    :param pre_delay / post_delay: GENERAL 전처리/후처리 단계의 지연
    """
    form: SuperprocessForm
    members: Tuple[LocalMember, ...] = ()
    protocol: Optional[PreLoccProtocol] = None
    resource_state: Optional[DensityMatrix] = None
    post_by_transcript: Dict[tuple, LocalPost] = field(default_factory=dict)
    default_post: Optional[LocalPost] = None
    pre: Optional[QuantumChannel] = None
    post: Optional[QuantumChannel] = None
    pre_delay: float = 0.0
    post_delay: float = 0.0

    def __post_init__(self):
        form = SuperprocessForm(self.form)
        object.__setattr__(self, "form", form)
        if form is SuperprocessForm.LOSR:
            self._check_losr()
        elif form is SuperprocessForm.PRE_LOCC:
            if self.protocol is None:
                object.__setattr__(self, "protocol", PreLoccProtocol())
            if self.resource_state is None:
                trivial = DensityMatrix(np.ones((1, 1)), DimFactorization((1, 1, 1, 1), ("A0", "EA", "B0", "EB")))
                object.__setattr__(self, "resource_state", trivial)
            if len(self.resource_state.dims) != 4:
                raise DimensionMismatchError("❌ PRE_LOCC 자원 상태는 [A0, E_A, B0, E_B] 네 인자여야 합니다.")
            if not self.post_by_transcript and self.default_post is None:
                raise ValidationError("❌ PRE_LOCC 형태에는 출력 단계 국소 연산이 필요합니다.", invariant="post-stage")
            posts = {tuple(k): v for k, v in self.post_by_transcript.items()}
            object.__setattr__(self, "post_by_transcript", posts)
        else:
            if self.pre is None or self.post is None:
                raise ValidationError("❌ GENERAL 형태에는 pre/post 채널이 모두 필요합니다.", invariant="general-stages")
            if not (self.pre_delay >= 0 and self.post_delay >= 0):
                raise ValidationError("❌ 단계 지연은 0 이상이어야 합니다.", invariant="delay>=0")

    def _check_losr(self):
        members = tuple(self.members)
        if not members:
            raise ValidationError("❌ LOSR 형태에는 구성원이 최소 하나 필요합니다.", invariant="losr-members")
        weights = np.array([m.weight for m in members], dtype=float)
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > SimConfig.EPS_TRACE:
            raise ValidationError(f"❌ LOSR 혼합 가중치가 확률 분포가 아닙니다: {weights}", invariant="losr-weights")
        for m in members:
            for pre, post, who in ((m.pre_a, m.post_a, "Alice"), (m.pre_b, m.post_b, "Bob")):
                if len(pre.out_dims) > 2:
                    raise DimensionMismatchError(f"❌ {who} 전처리 출력은 [입력] 또는 [입력, 메모리] 여야 합니다.")
        object.__setattr__(self, "members", members)

    def post_for(self, transcript) -> LocalPost:
        post = self.post_by_transcript.get(tuple(transcript), self.default_post)
        if post is None:
            raise ValidationError(f"❌ transcript {transcript} 의 출력 단계 연산이 없습니다.", invariant="post-stage")
        return post


# ----------------------------------------------------------------------
# 적용
# ----------------------------------------------------------------------

def _apply_member(member: LocalMember, channel: QuantumChannel) -> np.ndarray:
    a0p, b0p = member.pre_a.dim_in, member.pre_b.dim_in
    wires = Wires.choi_seed(DimFactorization((a0p, b0p), ("A0'", "B0'")))
    a_out = ["A0", "EA"] if len(member.pre_a.out_dims) == 2 else ["A0"]
    b_out = ["B0", "EB"] if len(member.pre_b.out_dims) == 2 else ["B0"]
    if member.pre_a.out_dims.dims[0] != channel.in_dims.dims[0] or member.pre_b.out_dims.dims[0] != channel.in_dims.dims[1]:
        raise DimensionMismatchError(
            f"❌ 전처리 출력 {member.pre_a.out_dims.dims[0]}, {member.pre_b.out_dims.dims[0]} 이 "
            f"프로세스 입력 {channel.in_dims.dims} 와 맞지 않습니다.")
    for pre, post, out_dim, who in ((member.pre_a, member.post_a, channel.out_dims.dims[0], "Alice"),
                                    (member.pre_b, member.post_b, channel.out_dims.dims[1], "Bob")):
        mem = pre.out_dims.dims[1] if len(pre.out_dims) == 2 else 1
        if post.dim_in != out_dim * mem:
            raise DimensionMismatchError(
                f"❌ {who} 후처리 입력 {post.dim_in} ≠ 프로세스 출력 {out_dim} × 메모리 {mem}")
    wires = wires.apply(member.pre_a, ["A0'"], a_out)
    wires = wires.apply(member.pre_b, ["B0'"], b_out)
    wires = wires.apply(channel, ["A0", "B0"], ["A1", "B1"])
    wires = wires.apply(_single_out(member.post_a), ["A1"] + a_out[1:], ["A1'"])
    wires = wires.apply(_single_out(member.post_b), ["B1"] + b_out[1:], ["B1'"])
    return wires.reorder(["R:A0'", "R:B0'", "A1'", "B1'"]).matrix


def _single_out(channel: QuantumChannel) -> QuantumChannel:
    if len(channel.out_dims) == 1:
        return channel
    return channel.with_dims(DimFactorization((channel.dim_in,)), DimFactorization((channel.dim_out,)))


def _apply_losr(sp: Superprocess, p: Process) -> Process:
    first = sp.members[0]
    choi = None
    for m in sp.members:
        if (m.pre_a.dim_in, m.pre_b.dim_in, m.post_a.dim_out, m.post_b.dim_out) != \
                (first.pre_a.dim_in, first.pre_b.dim_in, first.post_a.dim_out, first.post_b.dim_out):
            raise DimensionMismatchError("❌ LOSR 구성원들의 바깥 입출력 차원이 서로 다릅니다.")
        term = m.weight * _apply_member(m, p.channel)
        choi = term if choi is None else choi + term
    channel = QuantumChannel(choi, DimFactorization((first.pre_a.dim_in, first.pre_b.dim_in), ("A0", "B0")),
                             DimFactorization((first.post_a.dim_out, first.post_b.dim_out), ("A1", "B1")))
    return Process(channel, p.delay, p.spatially_separated)


def prelocc_branches(sp: Superprocess, p: Process):
    """
    자원 상태를 입력 프로세스에 통과시킨 뒤 (A1 E_A | B1 E_B) 로 묶어 pre-LOCC 를 실행한다

    :return: Branch 목록
    """
    omega = sp.resource_state
    a0, ea, b0, eb = omega.dims.dims
    if (a0, b0) != p.channel.in_dims.dims:
        raise DimensionMismatchError(f"❌ 자원 상태 입력 인자 {(a0, b0)} ≠ 프로세스 입력 {p.channel.in_dims.dims}")
    wires = Wires.from_state(omega, ["A0", "EA", "B0", "EB"])
    wires = wires.apply(p.channel, ["A0", "B0"], ["A1", "B1"])
    wires = wires.reorder(["A1", "EA", "B1", "EB"])
    a1, b1 = p.channel.out_dims.dims
    state = DensityMatrix(wires.matrix, DimFactorization((a1 * ea, b1 * eb), ("A", "B")))
    return run_protocol(state, sp.protocol)


def _apply_prelocc(sp: Superprocess, p: Process) -> Process:
    choi = None
    in_dims = out_dims = None
    for br in prelocc_branches(sp, p):
        post = sp.post_for(br.transcript)
        out = lose_construct(br.state, post.post_a, post.post_b).channel
        if in_dims is None:
            in_dims, out_dims = out.in_dims, out.out_dims
        elif out.in_dims.dims != in_dims.dims or out.out_dims.dims != out_dims.dims:
            raise DimensionMismatchError(f"❌ transcript {br.transcript} 의 출력 채널 차원이 다른 가지와 다릅니다.")
        term = br.probability * out.choi
        choi = term if choi is None else choi + term
    return Process(QuantumChannel(choi, in_dims, out_dims), 0.0, p.spatially_separated)


def _apply_general(sp: Superprocess, p: Process) -> Process:
    pre, post, ch = sp.pre, sp.post, p.channel
    n_in, n_out = len(ch.in_dims), len(ch.out_dims)
    if pre.out_dims.dims[:n_in] != ch.in_dims.dims or post.in_dims.dims[:n_out] != ch.out_dims.dims:
        raise DimensionMismatchError(
            f"❌ GENERAL 배선 불일치: pre 출력 {pre.out_dims.dims}, 프로세스 {ch.in_dims.dims}→{ch.out_dims.dims}, "
            f"post 입력 {post.in_dims.dims}")
    mem = pre.out_dims.dims[n_in:]
    if tuple(mem) != tuple(post.in_dims.dims[n_out:]):
        raise DimensionMismatchError(f"❌ pre 메모리 {mem} 와 post 메모리 {post.in_dims.dims[n_out:]} 가 다릅니다.")
    mem_labels = [f"E{i}" for i in range(len(mem))]
    in_labels = [f"I{i}" for i in range(len(pre.in_dims))]
    mid_in = [f"P{i}" for i in range(n_in)]
    mid_out = [f"Q{i}" for i in range(n_out)]
    out_labels = [f"O{i}" for i in range(len(post.out_dims))]

    wires = Wires.choi_seed(pre.in_dims.relabel(in_labels))
    wires = wires.apply(pre, in_labels, mid_in + mem_labels)
    wires = wires.apply(ch, mid_in, mid_out)
    wires = wires.apply(post, mid_out + mem_labels, out_labels)
    wires = wires.reorder([f"R:{lab}" for lab in in_labels] + out_labels)
    channel = QuantumChannel(wires.matrix, pre.in_dims, post.out_dims)
    delay = sp.pre_delay + p.delay + sp.post_delay
    return Process(channel, delay, p.spatially_separated)


def apply_superprocess(sp: Superprocess, p: Process) -> Process:
    """
    :return: 출력 프로세스 (지연: LOSR 보존, PRE_LOCC 0, GENERAL 합)
    """
    if sp.form is SuperprocessForm.LOSR:
        out = _apply_losr(sp, p)
    elif sp.form is SuperprocessForm.PRE_LOCC:
        out = _apply_prelocc(sp, p)
    else:
        out = _apply_general(sp, p)
    echo(f"🔍 슈퍼프로세스 {sp.form.value}: 지연 {p.delay} → {out.delay}")
    return out


def check_superprocess_form(form: SuperprocessForm, in_delay: float, out_delay: float) -> bool:
    """
    입력/출력 지연 조합에 대해 해당 형태의 슈퍼프로세스가 허용되는지

    - 0 → 0: LOSR 또는 PRE_LOCC
    - 양수 → 0: PRE_LOCC 만
    - out ≥ in: GENERAL
    """
    form = SuperprocessForm(form)
    if in_delay == 0 and out_delay == 0 and form in (SuperprocessForm.LOSR, SuperprocessForm.PRE_LOCC):
        return True
    if in_delay > 0 and out_delay == 0 and form is SuperprocessForm.PRE_LOCC:
        return True
    return form is SuperprocessForm.GENERAL and out_delay >= in_delay


# ----------------------------------------------------------------------
# 생성기
# ----------------------------------------------------------------------

def identity_superprocess(a0: int, b0: int, a1: int, b1: int) -> Superprocess:
    """아무것도 하지 않는 LOSR 슈퍼프로세스"""
    member = LocalMember(1.0, identity_channel(a0), identity_channel(b0), identity_channel(a1), identity_channel(b1))
    return Superprocess(SuperprocessForm.LOSR, members=(member,))


def losr_superprocess(members: Sequence[Tuple[float, QuantumChannel, QuantumChannel, QuantumChannel, QuantumChannel]]) -> Superprocess:
    return Superprocess(SuperprocessForm.LOSR, members=tuple(LocalMember(*m) for m in members))


def reduce_to_state_resource(sp: Superprocess, p: Process):
    """
    PRE_LOCC 파이프라인을 LOSE 꼴로 바꾼다.
    transcript 를 양쪽 고전 레지스터에 복사한 상태 ρ̄ 와, 레지스터로 제어되는 국소 연산을 돌려준다.

    :return: (ρ̄, local_a, local_b)  lose_construct(ρ̄, local_a, local_b) 가 apply_superprocess(sp, p) 와 같다
    """
    if sp.form is not SuperprocessForm.PRE_LOCC:
        raise ValidationError("❌ 상태 자원으로의 환원은 PRE_LOCC 형태에서만 정의됩니다.", invariant="form")
    branches = prelocc_branches(sp, p)
    dims = {br.state.dims.dims for br in branches}
    if len(dims) != 1:
        raise DimensionMismatchError(f"❌ transcript 가지마다 남은 시스템 차원이 다릅니다: {sorted(dims)}")
    states = [br.state for br in branches]
    probs = [br.probability for br in branches]
    omega = flagged_mixture(states, probs)
    posts = [sp.post_for(br.transcript) for br in branches]
    da, db = states[0].dims.dims
    local_a = controlled_local([_resource_split(q.post_a, da) for q in posts], len(branches))
    local_b = controlled_local([_resource_split(q.post_b, db) for q in posts], len(branches))
    return omega, local_a, local_b


def _resource_split(channel: QuantumChannel, resource_dim: int) -> QuantumChannel:
    if channel.dim_in % resource_dim:
        raise DimensionMismatchError(f"❌ 국소 연산 입력 {channel.dim_in} 을 {resource_dim} 로 나눌 수 없습니다.")
    return channel.with_dims(DimFactorization((channel.dim_in // resource_dim, resource_dim)),
                             DimFactorization((channel.dim_out,)))
