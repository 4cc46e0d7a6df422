"""
양자 instrument 와 유한 라운드 pre-LOCC 프로토콜

프로토콜은 (행위자, transcript → Instrument) 라운드의 나열이다.
각 라운드에서 한쪽이 지금까지의 고전 transcript 에 따라 instrument 를 고르고,
측정 결과가 transcript 에 덧붙는다.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from bellsim.core import SimConfig, ValidationError, DimensionMismatchError, echo
from bellsim.core.tensor import DimFactorization, as_matrix, sqrt_psd
from .states import DensityMatrix

Transcript = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Instrument:
    """
    결과별 CP 맵(Kraus 집합) 목록. 전체 합은 CPTP.

    :param branches: branches[k] = 결과 k 의 Kraus 목록, 모두 (d_out x d_in)
    :param labels: 고전 결과 라벨 (기본 0..n-1)
    """
    branches: tuple
    labels: tuple = field(default=())

    def __post_init__(self):
        branches = tuple(tuple(as_matrix(k) for k in kraus) for kraus in self.branches)
        if not branches or any(len(b) == 0 for b in branches):
            raise ValidationError("❌ instrument 의 각 결과에는 Kraus 연산자가 최소 하나 필요합니다.",
                                  invariant="instrument-nonempty")
        shape = branches[0][0].shape
        if any(k.shape != shape for b in branches for k in b):
            raise DimensionMismatchError("❌ instrument 의 모든 Kraus 연산자 크기가 같아야 합니다.")
        completeness = sum(k.conj().T @ k for b in branches for k in b)
        err = float(np.max(np.abs(completeness - np.eye(shape[1]))))
        if err > SimConfig.EPS_CPTP:
            raise ValidationError(f"❌ instrument 결과들의 Σ K†K ≠ I (오차 {err:.2e})", invariant="instrument-cptp")
        labels = tuple(self.labels) if self.labels else tuple(range(len(branches)))
        if len(labels) != len(branches):
            raise ValidationError("❌ 결과 라벨 수가 결과 수와 다릅니다.", invariant="labels")
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "labels", labels)

    @property
    def dim_in(self) -> int:
        return self.branches[0][0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.branches[0][0].shape[0]


def identity_instrument(d: int) -> Instrument:
    return Instrument(((np.eye(d),),))


def local_filter_instrument(f: np.ndarray) -> Instrument:
    """
    결과 0 = 필터 F 성공, 결과 1 = 실패 (Kraus √(I - F†F))
    F 의 연산자 norm 은 1 이하여야 한다.
    """
    f = as_matrix(f)
    rest = np.eye(f.shape[1]) - f.conj().T @ f
    vals = np.linalg.eigvalsh((rest + rest.conj().T) / 2)
    if vals[0] < -SimConfig.EPS_PSD:
        raise ValidationError("❌ 필터의 연산자 norm 이 1 보다 큽니다.", invariant="filter-norm")
    return Instrument(((f,), (sqrt_psd(rest),)))


def randomness_instrument(probs: Sequence[float], d: int) -> Instrument:
    """상태는 건드리지 않고 확률 p_k 로 결과 k 를 내는 instrument (공유 난수 분배용)"""
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > SimConfig.EPS_TRACE:
        raise ValidationError("❌ 확률 분포가 올바르지 않습니다.", invariant="distribution")
    return Instrument(tuple((np.sqrt(p) * np.eye(d),) for p in probs))


def discard_and_prepare_instrument(d_in: int, rho: np.ndarray) -> Instrument:
    """입력을 버리고 ρ 를 준비하는 결정적 instrument (Kraus √λ|v⟩⟨i|)"""
    rho = as_matrix(rho)
    vals, vecs = np.linalg.eigh(rho)
    kraus = []
    for lam, v in zip(vals, vecs.T):
        if lam <= SimConfig.EPS_PSD:
            continue
        for i in range(d_in):
            e = np.zeros(d_in)
            e[i] = 1.0
            kraus.append(np.sqrt(lam) * np.outer(v, e))
    return Instrument((tuple(kraus),))


@dataclass(frozen=True, eq=False)
class PreLoccRound:
    """
    :param party: "A" 또는 "B"
    :param instruments: transcript(튜플) → Instrument
    :param default: transcript 가 없을 때 쓸 instrument (None 이면 아무것도 안 함, 결과 0 기록)
    """
    party: str
    instruments: Dict[Transcript, Instrument] = field(default_factory=dict)
    default: Optional[Instrument] = None

    def __post_init__(self):
        if self.party not in ("A", "B"):
            raise ValidationError(f"❌ 행위자는 'A' 또는 'B' 여야 합니다: {self.party}", invariant="party")
        object.__setattr__(self, "instruments", {tuple(k): v for k, v in dict(self.instruments).items()})

    def instrument_for(self, transcript: Transcript, d: int) -> Instrument:
        inst = self.instruments.get(tuple(transcript), self.default)
        return inst if inst is not None else identity_instrument(d)


@dataclass(frozen=True, eq=False)
class PreLoccProtocol:
    rounds: Tuple[PreLoccRound, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))

    def __len__(self):
        return len(self.rounds)


@dataclass(frozen=True, eq=False)
class Branch:
    """프로토콜 실행 결과의 한 가지: transcript, 확률, 조건부 상태 (A | B 이분)"""
    transcript: Transcript
    probability: float
    state: Optional[DensityMatrix]


def _apply_local(matrix: np.ndarray, kraus: Sequence[np.ndarray], party: str, da: int, db: int) -> np.ndarray:
    out = None
    for k in kraus:
        big = np.kron(k, np.eye(db)) if party == "A" else np.kron(np.eye(da), k)
        term = big @ matrix @ big.conj().T
        out = term if out is None else out + term
    return out


def run_protocol(state: DensityMatrix, protocol: PreLoccProtocol, min_prob: float = 1e-12) -> List[Branch]:
    """
    프로토콜을 실행해 모든 transcript 가지를 펼친다

    :param state: 이분 상태 (Alice 인자 | Bob 인자)
    :param min_prob: 이보다 확률이 작은 가지는 버린다
    :return: Branch 목록 (확률 합 = 1)
    """
    if len(state.dims) != 2:
        raise DimensionMismatchError("❌ pre-LOCC 프로토콜 입력은 (A | B) 이분 상태여야 합니다.")
    # (transcript, 비정규화 행렬, da, db)
    frontier = [((), np.array(state.matrix), state.dims.dims[0], state.dims.dims[1])]
    for r, rnd in enumerate(protocol.rounds):
        nxt = []
        for transcript, m, da, db in frontier:
            d_party = da if rnd.party == "A" else db
            inst = rnd.instrument_for(transcript, d_party)
            if inst.dim_in != d_party:
                raise DimensionMismatchError(
                    f"❌ 라운드 {r} ({rnd.party}) instrument 입력 차원 {inst.dim_in} ≠ 시스템 차원 {d_party}")
            new_da = inst.dim_out if rnd.party == "A" else da
            new_db = inst.dim_out if rnd.party == "B" else db
            for label, kraus in zip(inst.labels, inst.branches):
                out = _apply_local(m, kraus, rnd.party, da, db)
                if np.real(np.trace(out)) <= min_prob:
                    continue
                nxt.append((transcript + (label,), out, new_da, new_db))
        frontier = nxt

    branches = []
    for transcript, m, da, db in frontier:
        p = float(np.real(np.trace(m)))
        branches.append(Branch(transcript, p, DensityMatrix(m / p, DimFactorization((da, db), ("A", "B")))))
    total = sum(b.probability for b in branches)
    if abs(total - 1.0) > 1e-8:
        echo(f"⚠️ 프로토콜 가지 확률 합이 1 에서 벗어났습니다: {total:.12f}")
    return branches


def shared_randomness_protocol(probs: Sequence[float], da: int) -> PreLoccProtocol:
    """Alice 가 난수 k 를 뽑아 알려주는 프로토콜 (Bob 은 transcript 로 k 를 안다)"""
    return PreLoccProtocol((PreLoccRound("A", default=randomness_instrument(probs, da)),))


def local_filter_protocol(f_a: np.ndarray, f_b: np.ndarray) -> PreLoccProtocol:
    """Alice 필터 → Bob 필터 두 라운드. 둘 다 성공한 transcript 는 (0, 0)."""
    return PreLoccProtocol((
        PreLoccRound("A", default=local_filter_instrument(f_a)),
        PreLoccRound("B", default=local_filter_instrument(f_b)),
    ))
