"""
Seesaw 용 torch 미분 가능 블록

POVM 매개변수화: 효과마다 행렬 A_k 를 두고
    S = Σ_k A_k†A_k = L L†,   M_k = L⁻¹ A_k†A_k L⁻†
로 만들면 항상 유효한 POVM 이 된다.
국소 필터는 F = G / (σ_max(G)(1 + 1e-9)) 로 연산자 norm ≤ 1 을 유지한다.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import torch

from bellsim.core import SimConfig
from bellsim.core.tensor import sqrt_psd

DTYPE = torch.complex128
LN2 = float(np.log(2.0))


def _device():
    return torch.device(SimConfig.DEVICE)


def to_tensor(m) -> torch.Tensor:
    return torch.as_tensor(np.asarray(m), dtype=DTYPE, device=_device())


def povm_effects(params: torch.Tensor) -> torch.Tensor:
    """
    :param params: (n_settings, n_out, d, d) 복소 텐서
    :return: (n_settings, n_out, d, d) POVM 효과

    S^{-1/2} 대신 Cholesky 인자 S = L L† 로 완성한다 (M_k = L⁻¹ A_k†A_k L⁻†).
    S 의 고유값이 겹쳐도 (예: S = I) gradient 가 깨지지 않는다.
    """
    grams = params.conj().transpose(-1, -2) @ params
    d = params.shape[-1]
    s = grams.sum(dim=1) + 1e-12 * torch.eye(d, dtype=DTYPE, device=params.device)
    chol = torch.linalg.cholesky(s).unsqueeze(1)
    y = torch.linalg.solve_triangular(chol, grams, upper=False)
    return torch.linalg.solve_triangular(chol, y.conj().transpose(-1, -2), upper=False).conj().transpose(-1, -2)


def filter_operator(g: torch.Tensor) -> torch.Tensor:
    norm = torch.linalg.matrix_norm(g, ord=2)
    return g / (norm * (1 + 1e-9))


def born_table(rho: torch.Tensor, ma: torch.Tensor, mb: torch.Tensor) -> torch.Tensor:
    """
    p[x0, y0, x1, y1] = Tr[ρ (M_{x1}^{x0} ⊗ N_{y1}^{y0})]
    """
    da, db = ma.shape[-1], mb.shape[-1]
    r = rho.reshape(da, db, da, db)
    return torch.einsum("abcd,xica,yjdb->xyij", r, ma, mb).real


def filtered_table(rho: torch.Tensor, ma: torch.Tensor, mb: torch.Tensor,
                   ga: torch.Tensor, gb: torch.Tensor):
    """
    양쪽 국소 필터 한 라운드 후의 행동 확률표.
    둘 다 성공한 가지는 측정, 나머지 가지는 결정적 (0,0) 출력.

    :return: (확률표, 성공 확률)
    """
    f = torch.kron(filter_operator(ga), filter_operator(gb))
    post = f @ rho @ f.conj().T
    success = torch.real(torch.trace(post))
    table = born_table(post / success, ma, mb)
    fail = torch.zeros_like(table)
    fail[:, :, 0, 0] = 1.0
    return success * table + (1 - success) * fail, success


def smoothed_max_kl(table: torch.Tensor, q: torch.Tensor, tau: float) -> torch.Tensor:
    """τ log Σ_s exp(KL(p_s‖q_s)/τ), KL 은 bit 단위"""
    p = table.reshape(table.shape[0] * table.shape[1], -1)
    qq = q.reshape(p.shape)
    safe_p = torch.clamp(p, min=1e-300)
    kl = torch.where(p > 0, p * (torch.log(safe_p) - torch.log(qq)), torch.zeros_like(p)).sum(dim=1) / LN2
    return tau * torch.logsumexp(kl / tau, dim=0)


@dataclass
class SeesawParams:
    a: torch.Tensor
    b: torch.Tensor
    ga: Optional[torch.Tensor] = None
    gb: Optional[torch.Tensor] = None

    def tensors(self) -> List[torch.Tensor]:
        return [t for t in (self.a, self.b, self.ga, self.gb) if t is not None]

    def detached(self) -> "SeesawParams":
        def c(t):
            return None if t is None else t.detach().clone().requires_grad_(True)
        return SeesawParams(c(self.a), c(self.b), c(self.ga), c(self.gb))

    def with_identity_filters(self) -> "SeesawParams":
        da, db = self.a.shape[-1], self.b.shape[-1]
        ga = torch.eye(da, dtype=DTYPE, device=self.a.device)
        gb = torch.eye(db, dtype=DTYPE, device=self.b.device)
        base = self.detached()
        return SeesawParams(base.a, base.b, ga.requires_grad_(True), gb.requires_grad_(True))

    def table(self, rho: torch.Tensor) -> torch.Tensor:
        ma, mb = povm_effects(self.a), povm_effects(self.b)
        if self.ga is None:
            return born_table(rho, ma, mb)
        return filtered_table(rho, ma, mb, self.ga, self.gb)[0]

    def numpy_effects(self):
        with torch.no_grad():
            ma = povm_effects(self.a).cpu().resolve_conj().numpy()
            mb = povm_effects(self.b).cpu().resolve_conj().numpy()
        return ma, mb

    def numpy_filters(self):
        if self.ga is None:
            return None
        with torch.no_grad():
            return filter_operator(self.ga).cpu().resolve_conj().numpy(), filter_operator(self.gb).cpu().resolve_conj().numpy()


def random_params(da: int, db: int, n_settings_a: int, n_settings_b: int, n_out_a: int, n_out_b: int,
                  rng: np.random.Generator) -> SeesawParams:
    def draw(n_set, n_out, d):
        z = rng.normal(size=(n_set, n_out, d, d)) + 1j * rng.normal(size=(n_set, n_out, d, d))
        return to_tensor(z).requires_grad_(True)
    return SeesawParams(draw(n_settings_a, n_out_a, da), draw(n_settings_b, n_out_b, db))


def params_from_effects(a_effects: Sequence[Sequence[np.ndarray]],
                        b_effects: Sequence[Sequence[np.ndarray]]) -> SeesawParams:
    """A_k = √M_k 로 두면 S = I 라서 주어진 POVM 이 그대로 재현된다"""
    def build(effects):
        arr = np.array([[sqrt_psd(e) for e in povm] for povm in effects])
        return to_tensor(arr).requires_grad_(True)
    return SeesawParams(build(a_effects), build(b_effects))


def ascend(params: SeesawParams, rho: torch.Tensor, q: torch.Tensor, steps: int = None,
           lr: float = None, tau: float = 0.05) -> SeesawParams:
    """
    국소 모델 q 를 고정하고 평활화된 max KL 을 Adam 으로 올린다
    """
    steps = SimConfig.SEESAW_STEPS if steps is None else steps
    lr = SimConfig.SEESAW_LR if lr is None else lr
    params = params.detached()
    opt = torch.optim.Adam(params.tensors(), lr=lr)
    for _ in range(steps):
        opt.zero_grad()
        loss = -smoothed_max_kl(params.table(rho), q, tau)
        loss.backward()
        opt.step()
    return params
