import numpy as np
import pytest

from bellsim.core import ValidationError, DimensionMismatchError
from bellsim.core.tensor import DimFactorization
from bellsim.builder.states import phi_plus, werner_state, chsh_optimal_povms, basis_povm
from bellsim.builder.generators import random_state, random_separable_state, random_povm
from bellsim.builder.instruments import PreLoccProtocol
from bellsim.analysis.locality import (
    Scenario, CHSH_SCENARIO, Behavior, BellFunctional, is_local, chsh_value, chsh_functionals, vertex_matrix,
    enumerate_local_vertices, uniform_behavior, pr_box, noisy_pr_box, tsirelson_behavior, mix_behaviors,
    random_local_behavior, relabel, behavior_from_state, behavior_from_prelocc, behavior_to_channel,
    channel_to_behavior, horodecki_chsh, chsh_angle_search, demo_hidden_nonlocality, filtering_demo_state,
)


def test_behavior_invariants():
    t = np.full(CHSH_SCENARIO.shape, 0.25)
    t[0, 0, 0, 0] = 0.5
    with pytest.raises(ValidationError) as e:
        Behavior(CHSH_SCENARIO, t)
    assert e.value.invariant == "normalized"
    t = uniform_behavior().table.copy()
    t[0, 0, 0, 0], t[0, 0, 0, 1] = -0.1, 0.6
    with pytest.raises(ValidationError) as e:
        Behavior(CHSH_SCENARIO, t)
    assert e.value.invariant == "nonnegative"
    with pytest.raises(DimensionMismatchError):
        Behavior(Scenario(2, 2, 3, 2), uniform_behavior().table)
    with pytest.raises(ValidationError):
        Scenario(0, 2, 2, 2)


def test_chsh_maximum_is_tsirelson_bound():
    assert abs(chsh_value(tsirelson_behavior()) - 2 * np.sqrt(2)) < 1e-9
    assert abs(chsh_value(pr_box()) - 4) < 1e-12
    assert abs(chsh_value(uniform_behavior())) < 1e-12
    assert len(chsh_functionals()) == 8
    assert all(f.bound == 2.0 for f in chsh_functionals())


def test_deterministic_vertices_are_local():
    vertices = enumerate_local_vertices(CHSH_SCENARIO)
    assert len(vertices) == 16
    for v in vertices:
        ret = is_local(v)
        assert ret.local
        assert ret.residual <= 1e-7
        assert chsh_value(v) <= 2 + 1e-12
    v, strategies = vertex_matrix(Scenario(3, 2, 2, 3))
    assert v.shape == (3 * 2 * 2 * 3, 2 ** 3 * 3 ** 2)
    assert len(strategies) == Scenario(3, 2, 2, 3).n_vertices


def test_random_local_mixtures_are_local():
    rng = np.random.default_rng(0)
    for scenario in (CHSH_SCENARIO, Scenario(3, 2, 2, 2), Scenario(2, 2, 3, 2)):
        for _ in range(5):
            b = random_local_behavior(scenario, rng)
            ret = is_local(b)
            assert ret.local
            v, _ = vertex_matrix(scenario)
            assert np.abs(v @ ret.weights - b.flat()).max() < 1e-7


def test_nonlocal_certificates():
    for b in (pr_box(), tsirelson_behavior(), noisy_pr_box(0.6)):
        ret = is_local(b)
        assert not ret.local
        assert ret.certificate.violation(b) >= 1e-8
        for v in enumerate_local_vertices(CHSH_SCENARIO):
            assert ret.certificate.value(v) <= ret.certificate.bound + 1e-9
    assert is_local(noisy_pr_box(0.5)).local


def test_farkas_certificate_outside_chsh_scenario():
    # 세 번째 입력은 무시하는 PR 상자 (CHSH 대칭형이 아닌 시나리오)
    t = np.zeros((3, 2, 2, 2))
    t[:2] = pr_box().table
    t[2] = uniform_behavior().table[0]
    b = Behavior(Scenario(3, 2, 2, 2), t)
    ret = is_local(b)
    assert not ret.local
    assert ret.certificate.name == "farkas"
    assert ret.certificate.violation(b) >= 1e-8
    v, _ = vertex_matrix(b.scenario)
    assert (ret.certificate.coefficients.reshape(-1) @ v).max() <= ret.certificate.bound + 1e-9


def test_bell_functional_bound():
    f = BellFunctional(CHSH_SCENARIO, chsh_functionals()[0].coefficients)
    assert abs(f.bound - 2) < 1e-12


def test_no_signalling_and_relabel():
    assert pr_box().is_no_signalling()
    assert tsirelson_behavior().is_no_signalling()
    flipped = relabel(pr_box(), x1=[1, 0])
    assert abs(chsh_value(flipped) - 4) < 1e-12
    twice = relabel(flipped, x1=[1, 0])
    assert np.abs(twice.table - pr_box().table).max() < 1e-15
    with pytest.raises(ValidationError):
        relabel(pr_box(), x0=[0, 0])


def test_mixture_and_frame():
    b = mix_behaviors([0.5, 0.5], [pr_box(), uniform_behavior()])
    assert np.abs(b.table - noisy_pr_box(0.5).table).max() < 1e-15
    df = b.to_frame()
    assert list(df.columns) == ["x0", "y0", "x1", "y1", "p"]
    assert len(df) == 16
    assert abs(df["p"].sum() - 4) < 1e-12


def test_born_rule_separable_states_are_local():
    rng = np.random.default_rng(1)
    for _ in range(3):
        rho = random_separable_state((2, 2), rng)
        for _ in range(5):
            a = [random_povm([2], 2, rng) for _ in range(2)]
            b = [random_povm([2], 2, rng) for _ in range(2)]
            assert is_local(behavior_from_state(rho, a, b)).local


def test_born_rule_dimension_checks():
    a, b = chsh_optimal_povms()
    with pytest.raises(DimensionMismatchError):
        behavior_from_state(random_state(DimFactorization((3, 2)), seed=0), a, b)
    three = [random_povm([2], 3, seed=1), random_povm([2], 2, seed=2)]
    with pytest.raises(DimensionMismatchError):
        behavior_from_state(phi_plus(), three, b)


def test_empty_prelocc_matches_born_rule():
    a, b = chsh_optimal_povms()
    direct = behavior_from_state(phi_plus(), a, b)
    via = behavior_from_prelocc(phi_plus(), PreLoccProtocol(), a, b)
    assert np.abs(direct.table - via.table).max() < 1e-12


def test_behavior_channel_round_trip():
    for b in (pr_box(), tsirelson_behavior(), random_local_behavior(Scenario(2, 3, 2, 2), seed=3)):
        ch = behavior_to_channel(b)
        assert ch.in_dims.labels == ("A0", "B0")
        assert np.abs(channel_to_behavior(ch).table - b.table).max() < 1e-12


def test_horodecki_matches_angle_search():
    for seed in range(3):
        rho = random_state(DimFactorization((2, 2), ("A", "B")), seed=seed)
        assert abs(horodecki_chsh(rho) - chsh_angle_search(rho, seed=seed)) < 1e-4
    assert abs(horodecki_chsh(phi_plus()) - 2 * np.sqrt(2)) < 1e-12


def test_werner_threshold():
    for p in (0.3, 0.6, 0.9):
        assert abs(horodecki_chsh(werner_state(p)) - 2 * np.sqrt(2) * p) < 1e-12
    p0 = 1 / np.sqrt(2)
    assert horodecki_chsh(werner_state(p0 - 1e-6)) <= 2
    assert horodecki_chsh(werner_state(p0 + 1e-6)) > 2


def test_hidden_nonlocality_demo():
    assert abs(horodecki_chsh(filtering_demo_state()) - 1.0) < 1e-12
    report = demo_hidden_nonlocality(kappa=0.5)
    assert report["pre_chsh"] <= 2 + 1e-9
    assert abs(report["post_chsh"] - 2 * np.sqrt(2) * 8 / 9) < 1e-9
    assert report["post_chsh"] >= 2.001
    assert abs(report["filter_success_prob"] - 0.03515625) < 1e-10
    with pytest.raises(ValidationError):
        demo_hidden_nonlocality(kappa=0.0)


def test_computational_basis_measurement_is_local():
    b = behavior_from_state(phi_plus(), [basis_povm(2)] * 2, [basis_povm(2)] * 2)
    assert is_local(b).local
    assert abs(chsh_value(b) - 2) < 1e-12
