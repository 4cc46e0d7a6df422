import numpy as np
import pytest

from bellsim.core import ValidationError
from bellsim.core.tensor import DimFactorization
from bellsim.builder.states import phi_plus
from bellsim.builder.channels import classical_channel, swap_channel
from bellsim.builder.generators import random_separable_state
from bellsim.analysis.locality import (
    CHSH_SCENARIO, pr_box, uniform_behavior, noisy_pr_box, tsirelson_behavior, random_local_behavior, relabel,
    behavior_to_channel,
)
from bellsim.analysis.measures import (
    kl_divergence, channel_divergence, rel_entropy_nonlocality, transform_behavior, dpi_monotonicity_check,
    random_classical_superprocess, dpi_sweep, process_nonlocality, maximal_extension_upper_bound,
    minimal_extension_state, NonlocalityAnalyzer,
)
from bellsim.process.model import Process
from bellsim.process.superprocess import identity_superprocess, losr_superprocess

PR_VALUE = np.log2(4 / 3)


def test_kl_divergence():
    assert abs(kl_divergence([0.5, 0.5], [0.25, 0.75]) - (0.5 * np.log2(2) + 0.5 * np.log2(2 / 3))) < 1e-12
    assert kl_divergence([1.0, 0.0], [0.0, 1.0]) == float("inf")
    assert kl_divergence([0.0, 1.0], [0.5, 0.5]) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        kl_divergence([0.5, 0.6], [0.5, 0.5])


def test_channel_divergence():
    assert abs(channel_divergence(pr_box(), uniform_behavior()) - 1) < 1e-12
    assert channel_divergence(pr_box(), pr_box()) == 0
    assert channel_divergence(uniform_behavior(), pr_box()) == float("inf")


def test_local_behaviors_have_zero_measure():
    rng = np.random.default_rng(0)
    for _ in range(4):
        ret = rel_entropy_nonlocality(random_local_behavior(CHSH_SCENARIO, rng))
        assert ret.value <= 1e-6
        assert ret.converged
        assert ret.details["route"] == "lp"
    assert rel_entropy_nonlocality(uniform_behavior()).value == 0


def test_pr_box_relative_entropy(fast_solvers):
    ret = rel_entropy_nonlocality(pr_box(), seed=1)
    # 모든 후보가 국소 모델이므로 값은 최적값 아래로 내려갈 수 없다
    assert ret.value >= PR_VALUE - 1e-6
    assert ret.value <= PR_VALUE + 1e-2
    assert ret.value <= channel_divergence(pr_box(), uniform_behavior()) + 1e-9
    assert abs(ret.argmin_weights.sum() - 1) < 1e-9
    assert ret.details["route"] == "minimax"


def test_measure_is_relabelling_invariant(fast_solvers):
    a = rel_entropy_nonlocality(noisy_pr_box(0.8), seed=2).value
    b = rel_entropy_nonlocality(relabel(noisy_pr_box(0.8), x0=[1, 0], y1=[1, 0]), seed=2).value
    assert a > 0
    assert abs(a - b) < 1e-2


def test_transform_behavior_identity():
    sp = identity_superprocess(2, 2, 2, 2)
    b = tsirelson_behavior()
    assert np.abs(transform_behavior(b, sp).table - b.table).max() < 1e-10


def test_transform_behavior_noise_reduces_chsh():
    # 양쪽 출력 비트를 확률 0.1 로 뒤집는 LOSR 후처리
    ident = classical_channel(np.eye(2))
    noisy = classical_channel(np.array([[0.9, 0.1], [0.1, 0.9]]))
    sp = losr_superprocess([(1.0, ident, ident, noisy, noisy)])
    out = transform_behavior(pr_box(), sp)
    # 상관 E → 0.8² E
    assert abs(out.table[0, 0, 0, 0] - (0.25 + 0.25 * 0.64)) < 1e-12


def test_dpi_monotonicity(fast_solvers):
    b = noisy_pr_box(0.9)
    sp = random_classical_superprocess(CHSH_SCENARIO, seed=3)
    assert dpi_monotonicity_check(b, sp)


def test_dpi_sweep(fast_solvers):
    df = dpi_sweep(n=2, seed=4, restarts=1)
    assert list(df.columns) == ["instance", "before", "after", "slack", "monotone"]
    assert len(df) == 2
    assert df["monotone"].all()


def test_process_nonlocality():
    delayed = Process(pr_box(), delay=float("inf"))
    assert process_nonlocality(delayed).value == 0
    assert process_nonlocality(delayed).details["route"] == "delayed"
    assert process_nonlocality(Process(uniform_behavior())).value == 0
    with pytest.raises(ValidationError):
        process_nonlocality(Process(swap_channel(2)))


def test_maximal_extension_upper_bound():
    sp = identity_superprocess(2, 2, 2, 2)
    local = random_local_behavior(CHSH_SCENARIO, seed=5)
    ret = maximal_extension_upper_bound(behavior_to_channel(local), local, sp)
    assert ret.value <= 1e-6
    assert ret.details["bound"] == "upper"
    with pytest.raises(ValidationError):
        maximal_extension_upper_bound(behavior_to_channel(pr_box()), local, sp)


def test_minimal_extension_of_maximally_entangled_state(fast_solvers):
    tsirelson = rel_entropy_nonlocality(tsirelson_behavior()).value
    ret = minimal_extension_state(phi_plus(), restarts=1, rounds=2, seed=6)
    assert ret.value >= tsirelson - 1e-3
    assert ret.details["mode"] == "measure"
    assert ret.details["behavior"].scenario == CHSH_SCENARIO


def test_minimal_extension_of_separable_state(fast_solvers):
    rho = random_separable_state((2, 2), seed=7)
    ret = minimal_extension_state(rho, restarts=1, rounds=2, seed=8)
    assert abs(ret.value) <= 1e-6


def test_analyzer_table(fast_solvers):
    analyzer = NonlocalityAnalyzer(restarts=1)
    analyzer.add_behavior("uniform", uniform_behavior())
    analyzer.add_behavior("local", random_local_behavior(CHSH_SCENARIO, seed=9))
    df = analyzer.analyze()
    assert list(df["name"]) == ["uniform", "local"]
    assert df["local"].all()
    assert (df["rel_entropy"] <= 1e-6).all()


def test_pr_box_solvers_agree():
    ret = rel_entropy_nonlocality(pr_box())
    assert ret.converged
    assert abs(ret.details["solver_a"] - ret.details["solver_b"]) < 1e-4
    assert abs(ret.value - PR_VALUE) < 1e-4


@pytest.mark.slow
def test_dpi_sweep_full_size():
    df = dpi_sweep(n=50, seed=13, restarts=2)
    assert len(df) == 50
    assert df["monotone"].all()
