import math

import numpy as np
import pytest

from bellsim.core import ValidationError, DimensionMismatchError
from bellsim.builder.channels import (
    bipartite_identity, swap_channel, identity_channel, is_signalling, classical_channel,
)
from bellsim.builder.generators import random_channel, random_state
from bellsim.analysis.locality import (
    CHSH_SCENARIO, pr_box, tsirelson_behavior, behavior_to_channel, random_local_behavior,
)
from bellsim.analysis.measures import random_classical_superprocess
from bellsim.analysis.witness import tsirelson_lose_channel
from bellsim.process.model import Process, check_realizable
from bellsim.process.lose import lose_construct
from bellsim.process.classify import classify
from bellsim.process.superprocess import (
    Superprocess, SuperprocessForm, LocalPost, apply_superprocess, check_superprocess_form,
    identity_superprocess, losr_superprocess, reduce_to_state_resource,
)
from bellsim.pipeline import random_prelocc_pipeline


def test_process_validation():
    p = Process(pr_box())
    assert p.classical
    assert p.instantaneous
    assert p.channel.in_dims.labels == ("A0", "B0")
    with pytest.raises(ValidationError) as e:
        Process(pr_box(), delay=-1.0)
    assert e.value.invariant == "delay>=0"
    with pytest.raises(ValidationError):
        Process(pr_box(), delay=float("nan"))
    with pytest.raises(ValidationError):
        Process(identity_channel(2))
    delayed = p.with_delay(math.inf)
    assert not delayed.instantaneous
    assert delayed.delay == math.inf


def test_realizability():
    assert not check_realizable(Process(swap_channel(2)))
    assert check_realizable(Process(swap_channel(2), delay=1.0))
    assert check_realizable(Process(swap_channel(2), spatially_separated=False))
    assert check_realizable(Process(pr_box()))
    assert check_realizable(Process(bipartite_identity()))


def test_superprocess_form_table():
    assert check_superprocess_form(SuperprocessForm.LOSR, 0, 0)
    assert check_superprocess_form(SuperprocessForm.PRE_LOCC, 0, 0)
    assert check_superprocess_form(SuperprocessForm.PRE_LOCC, 5, 0)
    assert not check_superprocess_form(SuperprocessForm.LOSR, 5, 0)
    assert check_superprocess_form(SuperprocessForm.GENERAL, 1, 3)
    assert not check_superprocess_form(SuperprocessForm.GENERAL, 3, 1)
    assert check_superprocess_form("general", 2, 2)


def test_general_superprocess_adds_delays():
    ch = random_channel([2, 2], [2, 2], seed=0)
    sp = Superprocess(SuperprocessForm.GENERAL, pre=bipartite_identity(), post=bipartite_identity(),
                      pre_delay=1.0, post_delay=3.0)
    out = apply_superprocess(sp, Process(ch, delay=2.0))
    assert out.delay == 6.0
    assert np.abs(out.channel.choi - ch.choi).max() < 1e-10
    with pytest.raises(ValidationError):
        Superprocess(SuperprocessForm.GENERAL, pre=bipartite_identity())
    with pytest.raises(ValidationError):
        Superprocess(SuperprocessForm.GENERAL, pre=bipartite_identity(), post=bipartite_identity(), pre_delay=-1)


def test_identity_superprocess_preserves_process():
    ch = random_channel([2, 2], [2, 2], seed=1, n_kraus=2)
    out = apply_superprocess(identity_superprocess(2, 2, 2, 2), Process(ch, delay=4.0))
    assert out.delay == 4.0
    assert np.abs(out.channel.choi - ch.choi).max() < 1e-10


def test_losr_superprocess_validation():
    ident = classical_channel(np.eye(2))
    with pytest.raises(ValidationError) as e:
        losr_superprocess([(0.7, ident, ident, ident, ident)])
    assert e.value.invariant == "losr-weights"
    with pytest.raises(ValidationError):
        Superprocess(SuperprocessForm.LOSR)
    # Alice 출력 비트만 뒤집는 국소 후처리
    flip = classical_channel(np.array([[0.0, 1.0], [1.0, 0.0]]))
    sp = losr_superprocess([(1.0, ident, ident, flip, ident)])
    out = apply_superprocess(sp, Process(pr_box()))
    assert np.abs(out.behavior().table[:, :, ::-1, :] - pr_box().table).max() < 1e-12


def test_lose_tsirelson_channel():
    ch = tsirelson_lose_channel()
    assert is_signalling(ch) == (False, False)
    assert np.abs(ch.choi - behavior_to_channel(tsirelson_behavior()).choi).max() < 1e-9


def test_lose_construct_is_non_signalling():
    rng = np.random.default_rng(2)
    omega = random_state([2, 2], rng)
    la = random_channel([2, 2], [2], rng)
    lb = random_channel([2, 2], [3], rng)
    p = lose_construct(omega, la, lb)
    assert p.instantaneous
    assert p.channel.out_dims.dims == (2, 3)
    assert is_signalling(p.channel) == (False, False)
    assert check_realizable(p)


@pytest.mark.parametrize("seed", range(20))
def test_prelocc_reduces_to_state_resource(seed):
    sp, process = random_prelocc_pipeline(seed)
    assert process.delay > 0
    out = apply_superprocess(sp, process)
    assert out.delay == 0.0
    omega, local_a, local_b = reduce_to_state_resource(sp, process)
    reduced = lose_construct(omega, local_a, local_b)
    assert np.abs(reduced.channel.choi - out.channel.choi).max() < 1e-9
    assert is_signalling(out.channel) == (False, False)


def test_reduction_requires_prelocc_form():
    with pytest.raises(ValidationError) as e:
        reduce_to_state_resource(identity_superprocess(2, 2, 2, 2), Process(pr_box()))
    assert e.value.invariant == "form"
    with pytest.raises(ValidationError) as e:
        Superprocess(SuperprocessForm.PRE_LOCC)
    assert e.value.invariant == "post-stage"


def test_prelocc_default_resource_state():
    # 자원 상태가 자명하면 입력 프로세스를 쓰지 않고 국소 연산만 남는다
    post = LocalPost(random_channel([2], [2], seed=3), random_channel([2], [2], seed=4))
    sp = Superprocess(SuperprocessForm.PRE_LOCC, default_post=post)
    trivial = Process(random_channel([1, 1], [1, 1], seed=5), delay=2.0)
    out = apply_superprocess(sp, trivial)
    assert out.delay == 0.0
    assert out.channel.in_dims.dims == (2, 2)
    assert is_signalling(out.channel) == (False, False)


def test_losr_memory_must_match_process_output():
    # Alice 전처리가 메모리 2 를 남기므로 후처리 입력은 2 × 2 여야 한다
    pre_a = random_channel([2], [2, 2], seed=6)
    ident = identity_channel(2)
    good = losr_superprocess([(1.0, pre_a, ident, random_channel([4], [2], seed=7), ident)])
    out = apply_superprocess(good, Process(random_channel([2, 2], [2, 2], seed=8)))
    assert out.channel.in_dims.dims == (2, 2)
    assert out.channel.out_dims.dims == (2, 2)

    short = losr_superprocess([(1.0, pre_a, ident, random_channel([2], [2], seed=9), ident)])
    with pytest.raises(DimensionMismatchError):
        apply_superprocess(short, Process(random_channel([2, 2], [2, 2], seed=8)))


def test_losr_output_never_signals():
    rng = np.random.default_rng(10)
    for _ in range(10):
        members = [(t, random_channel([2], [2, 2], rng), random_channel([2], [2], rng),
                    random_channel([4], [2], rng), random_channel([2], [2], rng))
                   for t in rng.dirichlet(np.ones(2))]
        out = apply_superprocess(losr_superprocess(members), Process(bipartite_identity(), delay=1.0))
        assert is_signalling(out.channel) == (False, False)


def test_losr_preserves_free_processes():
    rng = np.random.default_rng(11)
    for _ in range(30):
        sp = random_classical_superprocess(CHSH_SCENARIO, rng)
        local = Process(random_local_behavior(CHSH_SCENARIO, rng))
        assert classify(local).free
        assert classify(apply_superprocess(sp, local)).free
        delayed = Process(pr_box(), delay=math.inf)
        assert classify(delayed).free
        out = apply_superprocess(sp, delayed)
        assert out.delay == math.inf
        assert classify(out).free
