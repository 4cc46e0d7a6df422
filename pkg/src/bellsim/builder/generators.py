"""
테스트/스윕용 무작위 상태, POVM, 채널 생성기 (seed 고정 시 결정적)
"""
from typing import Sequence, Union

import numpy as np

from bellsim.core import SimConfig
from bellsim.core.tensor import DimFactorization, as_dims, inv_sqrt_psd
from .channels import QuantumChannel, kraus_to_choi, product_channel
from .states import DensityMatrix, Povm

Seed = Union[int, np.random.Generator, None]


def make_rng(seed: Seed = None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(SimConfig.SEED if seed is None else seed)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_state(dims, seed: Seed = None, rank: int = None) -> DensityMatrix:
    """
    Ginibre 방식 무작위 밀도행렬

    :param dims: 인자 분해 (예: [2, 2])
    :param rank: None 이면 full rank
    """
    dims = as_dims(dims)
    rng = make_rng(seed)
    d = dims.total
    g = _ginibre(rng, d, rank or d)
    m = g @ g.conj().T
    return DensityMatrix(m / np.real(np.trace(m)), dims)


def random_pure_vector(d: int, seed: Seed = None) -> np.ndarray:
    rng = make_rng(seed)
    v = _ginibre(rng, d, 1).reshape(-1)
    return v / np.linalg.norm(v)


def random_unitary(d: int, seed: Seed = None) -> np.ndarray:
    rng = make_rng(seed)
    q, r = np.linalg.qr(_ginibre(rng, d, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_povm(dims, n_effects: int, seed: Seed = None) -> Povm:
    """
    M_k = S^{-1/2} A_k†A_k S^{-1/2},  S = Σ A_k†A_k
    """
    dims = as_dims(dims)
    rng = make_rng(seed)
    d = dims.total
    blocks = [_ginibre(rng, d, d) for _ in range(n_effects)]
    grams = [a.conj().T @ a for a in blocks]
    s_inv = inv_sqrt_psd(sum(grams))
    effects = []
    for g in grams:
        e = s_inv @ g @ s_inv
        effects.append((e + e.conj().T) / 2)
    # 수치 오차를 마지막 효과에 몰아준다
    effects[-1] = np.eye(d) - sum(effects[:-1])
    return Povm(tuple(effects), dims)


def random_projective_povm(d: int, seed: Seed = None) -> Povm:
    u = random_unitary(d, seed)
    return Povm(tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(d)), [d])


def random_channel(in_dims, out_dims, seed: Seed = None, n_kraus: int = None) -> QuantumChannel:
    """
    무작위 isometry V (d_out·r x d_in) 를 잘라 Kraus 로 사용
    """
    in_dims, out_dims = as_dims(in_dims), as_dims(out_dims)
    rng = make_rng(seed)
    d_in, d_out = in_dims.total, out_dims.total
    r = n_kraus or d_in * d_out
    g = _ginibre(rng, d_out * r, d_in)
    v = g @ inv_sqrt_psd(g.conj().T @ g)
    kraus = [v[k * d_out:(k + 1) * d_out, :] for k in range(r)]
    return kraus_to_choi(kraus, in_dims, out_dims)


def random_separable_state(dims=(2, 2), seed: Seed = None, n_terms: int = 4) -> DensityMatrix:
    """곱상태 n_terms 개의 볼록 혼합 (정의상 분리 가능)"""
    dims = as_dims(dims)
    if dims.labels == ("S0", "S1"):
        dims = dims.relabel(("A", "B"))
    rng = make_rng(seed)
    da, db = dims.dims
    weights = rng.dirichlet(np.ones(n_terms))
    m = np.zeros((da * db, da * db), dtype=complex)
    for w in weights:
        ra = random_state([da], rng).matrix
        rb = random_state([db], rng).matrix
        m += w * np.kron(ra, rb)
    return DensityMatrix(m, dims)


def random_local_channel_mixture(in_dims: Sequence[int], out_dims: Sequence[int],
                                 seed: Seed = None, n_terms: int = 3):
    """
    Σ t_j E_j ⊗ F_j 형태의 LOSR 채널과 그 분해 [(t_j, E_j, F_j)] 를 함께 반환
    """
    rng = make_rng(seed)
    a0, b0 = in_dims
    a1, b1 = out_dims
    weights = rng.dirichlet(np.ones(n_terms))
    members = []
    choi = None
    for t in weights:
        e = random_channel([a0], [a1], rng, n_kraus=2)
        f = random_channel([b0], [b1], rng, n_kraus=2)
        members.append((float(t), e, f))
        term = t * product_channel(e, f).choi
        choi = term if choi is None else choi + term
    channel = QuantumChannel(choi, DimFactorization((a0, b0), ("A0", "B0")),
                             DimFactorization((a1, b1), ("A1", "B1")))
    return channel, members
