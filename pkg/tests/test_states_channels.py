import numpy as np
import pytest

from bellsim.core import ValidationError, DimensionMismatchError
from bellsim.builder.states import (
    DensityMatrix, Povm, phi_plus, werner_state, maximally_mixed, combine_bipartite, qubit_xz_povm,
    chsh_optimal_povms,
)
from bellsim.builder.channels import (
    QuantumChannel, kraus_to_choi, choi_to_kraus, apply_channel, is_signalling, is_classical,
    has_classical_output, identity_channel, bipartite_identity, unitary_channel, swap_channel,
    depolarizing_channel, product_channel, classical_channel, measurement_channel, replacement_channel,
)
from bellsim.builder.wiring import compose
from bellsim.builder.generators import random_state, random_channel, random_unitary, random_povm


def test_density_matrix_invariants():
    with pytest.raises(ValidationError) as e:
        DensityMatrix(np.eye(2), [2])
    assert e.value.invariant == "unit-trace"
    with pytest.raises(ValidationError) as e:
        DensityMatrix(np.diag([1.5, -0.5]), [2])
    assert e.value.invariant == "psd"
    with pytest.raises(ValidationError) as e:
        DensityMatrix(np.array([[0.5, 0.3], [0.1, 0.5]]), [2])
    assert e.value.invariant == "hermitian"
    with pytest.raises(DimensionMismatchError):
        DensityMatrix(np.eye(4) / 4, [2, 3])
    with pytest.raises(ValidationError):
        werner_state(1.2)


def test_povm_invariants():
    with pytest.raises(ValidationError) as e:
        Povm((np.diag([1.0, 0.0]), np.diag([0.0, 0.5])), [2])
    assert e.value.invariant == "povm-completeness"
    povm = random_povm([3], 4, seed=0)
    assert np.abs(sum(povm.effects) - np.eye(3)).max() < 1e-9
    rho = random_state([3], seed=1)
    assert abs(povm.probabilities(rho.matrix).sum() - 1) < 1e-10


def test_states_basic():
    rho = phi_plus()
    assert abs(rho.purity() - 1) < 1e-12
    assert np.abs(rho.marginal("A").matrix - np.eye(2) / 2).max() < 1e-12
    joint = combine_bipartite(phi_plus(), maximally_mixed([2, 2]))
    assert joint.dims.dims == (4, 4)
    assert joint.dims.labels == ("A", "B")


def test_kraus_choi_round_trip():
    for seed in range(50):
        ch = random_channel([2], [3], seed=seed)
        assert abs(np.trace(ch.choi).real - ch.dim_in) < 1e-10
        kraus = choi_to_kraus(ch)
        ret = kraus_to_choi(kraus, [2], [3])
        assert np.abs(ret.choi - ch.choi).max() < 1e-9


def test_apply_channel_kraus_matches_choi():
    ch = random_channel([2, 2], [2, 2], seed=5, n_kraus=3)
    rho = random_state([2, 2], seed=6)
    r0 = apply_channel(ch, rho, method="kraus").matrix
    r1 = apply_channel(ch, rho, method="choi").matrix
    assert np.abs(r0 - r1).max() < 1e-10
    with pytest.raises(DimensionMismatchError):
        apply_channel(ch, random_state([2], seed=7))


def test_channel_rejects_non_trace_preserving():
    with pytest.raises(ValidationError) as e:
        kraus_to_choi([0.5 * np.eye(2)], [2], [2])
    assert e.value.invariant == "trace-preserving"
    with pytest.raises(ValidationError) as e:
        QuantumChannel(2 * identity_channel(2).choi, [2], [2])
    assert e.value.invariant == "trace-preserving"


def test_signalling():
    assert is_signalling(swap_channel(2)) == (True, True)
    assert is_signalling(bipartite_identity()) == (False, False)
    local = product_channel(depolarizing_channel(0.3), random_channel([2], [2], seed=8))
    assert is_signalling(local) == (False, False)
    # Alice 의 입력을 Bob 에게 보내고 Bob 의 입력은 버리는 채널: A→B 만 신호
    one_way = compose(bipartite_identity(), _send_a_to_b())
    assert is_signalling(one_way) == (True, False)


def _send_a_to_b():
    """(A0,B0) → (A1,B1): A1 = |0⟩, B1 = A0 (B0 는 버림)"""
    kraus = []
    for k in range(2):
        op = np.zeros((4, 4), dtype=complex)
        for a in range(2):
            # |a⟩_A0 |k⟩_B0 → |0⟩_A1 |a⟩_B1
            op[0 * 2 + a, a * 2 + k] = 1.0
        kraus.append(op)
    return kraus_to_choi(kraus, [2, 2], [2, 2])


def test_classical_channel():
    p = np.array([[0.7, 0.2], [0.3, 0.8]])
    ch = classical_channel(p)
    assert is_classical(ch)
    out = apply_channel(ch, DensityMatrix(np.diag([1.0, 0.0]), [2])).matrix
    assert np.abs(out - np.diag([0.7, 0.3])).max() < 1e-12
    with pytest.raises(ValidationError) as e:
        classical_channel(np.array([[0.7, 0.2], [0.2, 0.8]]))
    assert e.value.invariant == "stochastic"


def test_measurement_channel_output_is_classical():
    a_povms, _ = chsh_optimal_povms()
    ch = measurement_channel(a_povms)
    assert ch.in_dims.dims == (2, 2)
    assert ch.out_dims.dims == (2,)
    assert has_classical_output(ch)
    # X 기저 측정이 있으므로 입력 쪽은 고전이 아니다
    assert not is_classical(ch)
    assert not has_classical_output(identity_channel(2))


def test_depolarizing_and_replacement():
    rho = random_state([2], seed=9)
    out = apply_channel(depolarizing_channel(1.0), rho).matrix
    assert np.abs(out - np.eye(2) / 2).max() < 1e-12
    out3 = apply_channel(depolarizing_channel(1.0, d=3), random_state([3], seed=10)).matrix
    assert np.abs(out3 - np.eye(3) / 3).max() < 1e-12
    target = random_state([2, 2], seed=11)
    rep = replacement_channel(target, in_dims=(2, 2))
    got = apply_channel(rep, random_state([2, 2], seed=12)).matrix
    assert np.abs(got - target.matrix).max() < 1e-12


def test_compose():
    dep = depolarizing_channel(0.3)
    assert np.abs(compose(identity_channel(2), dep).choi - dep.choi).max() < 1e-12
    u = random_unitary(3, seed=13)
    ident = compose(unitary_channel(u.conj().T), unitary_channel(u))
    assert np.abs(ident.choi - identity_channel(3).choi).max() < 1e-10
    with pytest.raises(DimensionMismatchError):
        compose(identity_channel(3), dep)


def test_product_channel_kraus_and_choi_agree():
    e = random_channel([2], [2], seed=14, n_kraus=2)
    f = random_channel([2], [3], seed=15, n_kraus=2)
    prod = product_channel(e, f)
    assert prod.in_dims.labels == ("A0", "B0")
    assert prod.out_dims.dims == (2, 3)
    rho = random_state([2, 2], seed=16)
    r0 = apply_channel(prod, rho, method="kraus").matrix
    r1 = apply_channel(prod, rho, method="choi").matrix
    assert np.abs(r0 - r1).max() < 1e-10


def test_qubit_xz_povm_directions():
    z = qubit_xz_povm(0.0)
    assert np.abs(z.effects[0] - np.diag([1.0, 0.0])).max() < 1e-14
    x = qubit_xz_povm(np.pi / 2)
    assert np.abs(x.effects[0] - np.full((2, 2), 0.5)).max() < 1e-14
