import numpy as np
import pytest

from bellsim.core import ValidationError, DimensionMismatchError
from bellsim.builder.states import DensityMatrix
from bellsim.builder.channels import (
    kraus_to_choi, product_channel, povm_channel, identity_channel,
)
from bellsim.builder.generators import random_channel, random_povm, random_pure_vector, random_local_channel_mixture
from bellsim.analysis.locality import pr_box, uniform_behavior, behavior_to_channel
from bellsim.analysis.witness import (
    build_chsh_povm_witness, evaluate_witness, witness_choi_contraction, witness_probabilities,
    losr_min_witness_value, tsirelson_lose_channel, choi_separability, witness_to_channel_construction,
)

TSIRELSON_WITNESS = 0.75 - np.cos(np.pi / 8) ** 2


def _random_qc_channel(seed):
    rng = np.random.default_rng(seed)
    return product_channel(povm_channel(random_povm([2], 2, rng)), povm_channel(random_povm([2], 2, rng)))


def test_block_traces():
    corrected = build_chsh_povm_witness()
    assert np.abs(corrected.block_traces() - [[0.0, 0.5], [0.5, 0.0]]).max() < 1e-12
    printed = build_chsh_povm_witness(normalization="paper_3_16")
    assert np.abs(printed.block_traces() - [[-2.25, -0.25], [-0.25, -2.25]]).max() < 1e-12
    assert corrected.operator().shape == (16, 16)
    assert np.abs(np.trace(corrected.operator()).real - 1.0) < 1e-12


def test_uniform_channel_value():
    ch = behavior_to_channel(uniform_behavior())
    assert abs(evaluate_witness(build_chsh_povm_witness(), ch) - 0.25) < 1e-12
    assert abs(evaluate_witness(build_chsh_povm_witness(normalization="paper_3_16"), ch) + 1.25) < 1e-12


def test_losr_minimum():
    assert abs(losr_min_witness_value(build_chsh_povm_witness())) < 1e-12
    assert abs(losr_min_witness_value(build_chsh_povm_witness(normalization="paper_3_16")) + 2.25) < 1e-12
    w = build_chsh_povm_witness(normalization="custom", delta_weight=0.0)
    assert abs(losr_min_witness_value(w) - 0.75) < 1e-12
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    skew = build_chsh_povm_witness(psi=[np.array([1.0, 0.0]), plus])
    with pytest.raises(ValidationError) as e:
        losr_min_witness_value(skew)
    assert e.value.invariant == "orthonormal-inputs"


def test_tsirelson_channel_violates_corrected_witness():
    w = build_chsh_povm_witness()
    value = evaluate_witness(w, tsirelson_lose_channel())
    assert abs(value - TSIRELSON_WITNESS) < 1e-9
    assert value < losr_min_witness_value(w)
    # PR 상자: 모든 입력에서 승리 → 3/4 − 1
    assert abs(evaluate_witness(w, behavior_to_channel(pr_box())) + 0.25) < 1e-12


def test_choi_contraction_matches_probabilities():
    for seed in range(3):
        psi = [random_pure_vector(2, seed=10 * seed + k) for k in range(2)]
        phi = [random_pure_vector(2, seed=10 * seed + 5 + k) for k in range(2)]
        w = build_chsh_povm_witness(psi, phi)
        ch = _random_qc_channel(seed)
        assert abs(witness_choi_contraction(w, ch) - evaluate_witness(w, ch)) < 1e-10
        table = witness_probabilities(w, ch)
        assert np.abs(table.sum(axis=(2, 3)) - 1).max() < 1e-10


def test_witness_input_checks():
    with pytest.raises(ValidationError) as e:
        build_chsh_povm_witness(normalization="loose")
    assert e.value.invariant == "normalization"
    with pytest.raises(ValidationError):
        build_chsh_povm_witness(normalization="custom")
    with pytest.raises(ValidationError):
        build_chsh_povm_witness(psi=[np.array([1.0, 1.0]), np.array([0.0, 1.0])])
    w = build_chsh_povm_witness()
    with pytest.raises(ValidationError):
        evaluate_witness(w, random_channel([2, 2], [2, 2], seed=0))
    with pytest.raises(DimensionMismatchError):
        evaluate_witness(w, product_channel(povm_channel(random_povm([3], 2, seed=1)),
                                            povm_channel(random_povm([2], 2, seed=2))))


def test_identity_channel_choi_is_entangled():
    ch = kraus_to_choi([np.eye(2)], [2, 1], [1, 2])
    verdict = choi_separability(ch)
    assert verdict.verdict == "entangled"
    assert verdict.method == "npt"
    assert abs(verdict.min_pt_eigenvalue + 1) < 1e-10
    assert not verdict.certifies_losr
    # Tr[J W] < 0
    assert np.real(np.trace(ch.choi @ verdict.witness)) < -1e-9


def test_separability_routes():
    assert choi_separability(behavior_to_channel(pr_box())).method == "diagonal"
    prod = product_channel(random_channel([2], [2], seed=3), random_channel([2], [2], seed=4))
    verdict = choi_separability(prod)
    assert verdict.verdict == "separable"
    assert verdict.method == "product"
    assert verdict.certifies_losr

    channel, members = random_local_channel_mixture([2, 2], [2, 2], seed=5)
    with_decomposition = choi_separability(channel, members)
    assert with_decomposition.method == "decomposition"
    assert with_decomposition.certifies_losr
    without = choi_separability(channel)
    assert without.min_pt_eigenvalue >= -1e-9
    assert without.verdict == "inconclusive"
    assert not without.certifies_losr
    with pytest.raises(ValidationError):
        choi_separability(identity_channel(2))


def test_witness_construction_reproduces_direct_value():
    rng = np.random.default_rng(6)
    ch = random_channel([2, 1], [1, 2], seed=7)
    for _ in range(3):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        w = m + m.conj().T
        ret = witness_to_channel_construction(w, ch)
        assert abs(ret.value - ret.direct_value) < 1e-8
        assert abs(ret.direct_value - np.real(np.trace(ch.normalized_choi() @ w))) < 1e-12
        assert -1e-12 <= ret.p_eta <= 1 + 1e-12
        assert -1e-12 <= ret.p_zeta <= 1 + 1e-12
        assert ret.details["normalization"] == 4


def test_witness_construction_detects_identity_channel():
    ch = kraus_to_choi([np.eye(2)], [2, 1], [1, 2])
    verdict = choi_separability(ch)
    ret = witness_to_channel_construction(verdict.witness, ch)
    assert ret.value < 0
    assert abs(ret.value + 0.5) < 1e-8
    assert ret.superprocess.form.value == "losr"
    with pytest.raises(ValidationError):
        witness_to_channel_construction(np.zeros((4, 4)), ch)
    with pytest.raises(DimensionMismatchError):
        witness_to_channel_construction(np.eye(3), ch)


def test_pure_input_from_density_matrix():
    rho0 = DensityMatrix(np.diag([1.0, 0.0]), [2])
    rho1 = DensityMatrix(np.diag([0.0, 1.0]), [2])
    w = build_chsh_povm_witness(psi=[rho0, rho1])
    assert np.abs(w.blocks - build_chsh_povm_witness().blocks).max() < 1e-12


def test_product_mixtures_are_never_entangled():
    rng = np.random.default_rng(12)
    for _ in range(500):
        channel, _ = random_local_channel_mixture([2, 2], [2, 2], rng)
        verdict = choi_separability(channel)
        assert verdict.verdict != "entangled"
        assert verdict.min_pt_eigenvalue >= -1e-9


@pytest.mark.parametrize("in_dims, out_dims", [
    ([2, 1], [1, 2]), ([2, 2], [2, 2]), ([2, 2], [2, 1]), ([1, 2], [2, 2]),
])
def test_witness_construction_on_channel_shapes(in_dims, out_dims):
    rng = np.random.default_rng(13)
    d = int(np.prod(in_dims) * np.prod(out_dims))
    for _ in range(10):
        ch = random_channel(in_dims, out_dims, rng)
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        w = (m + m.conj().T) / 2
        ret = witness_to_channel_construction(w, ch)
        assert abs(ret.value - np.real(np.trace(ch.normalized_choi() @ w))) < 1e-8
        assert ret.details["normalization"] == d
