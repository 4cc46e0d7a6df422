import numpy as np
import pytest

from bellsim.core import ValidationError, DimensionMismatchError
from bellsim.core.tensor import (
    DimFactorization, partial_trace, partial_transpose, permute_systems, is_psd, min_eigenvalue, sqrt_psd,
)
from bellsim.builder.generators import random_state


def _rand_herm(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g + g.conj().T


def test_partial_trace_product():
    rng = np.random.default_rng(0)
    a = _rand_herm(rng, 2)
    b = _rand_herm(rng, 3)
    m = np.kron(a, b)
    assert np.abs(partial_trace(m, [2, 3], [0]) - a * np.trace(b)).max() < 1e-12
    assert np.abs(partial_trace(m, [2, 3], [1]) - b * np.trace(a)).max() < 1e-12
    assert abs(partial_trace(m, [2, 3], [])[0, 0] - np.trace(m)) < 1e-12


def test_partial_trace_labels_and_middle_factor():
    rng = np.random.default_rng(1)
    a, b, c = _rand_herm(rng, 2), _rand_herm(rng, 3), _rand_herm(rng, 2)
    dims = DimFactorization((2, 3, 2), ("A", "B", "C"))
    m = np.kron(np.kron(a, b), c)
    ret = partial_trace(m, dims, ["A", "C"])
    assert np.abs(ret - np.kron(a, c) * np.trace(b)).max() < 1e-12


def test_partial_transpose_involution():
    rho = random_state([2, 3], seed=2).matrix
    once = partial_transpose(rho, [2, 3], 1)
    assert np.abs(partial_transpose(once, [2, 3], 1) - rho).max() < 1e-14
    # 전체 전치는 두 인자를 모두 전치한 것과 같다
    assert np.abs(partial_transpose(rho, [2, 3], [0, 1]) - rho.T).max() < 1e-14


def test_permute_systems_swaps_kron():
    rng = np.random.default_rng(3)
    a, b = _rand_herm(rng, 2), _rand_herm(rng, 3)
    ret = permute_systems(np.kron(a, b), [2, 3], [1, 0])
    assert np.abs(ret - np.kron(b, a)).max() < 1e-14
    with pytest.raises(DimensionMismatchError):
        permute_systems(np.kron(a, b), [2, 3], [0, 0])


def test_dim_factorization_invariants():
    with pytest.raises(ValidationError) as e:
        DimFactorization((2, 0))
    assert e.value.invariant == "dims>=1"
    with pytest.raises(ValidationError):
        DimFactorization((2, 2), ("A",))
    dims = DimFactorization((2, 2))
    assert dims.labels == ("S0", "S1")
    with pytest.raises(DimensionMismatchError):
        dims.check(np.eye(3))


def test_psd_helpers():
    rho = random_state([3], seed=4).matrix
    assert is_psd(rho)
    root = sqrt_psd(rho)
    assert np.abs(root @ root - rho).max() < 1e-10
    assert abs(min_eigenvalue(np.diag([1.0, -0.5])) + 0.5) < 1e-14
    assert not is_psd(np.diag([1.0, -1e-3]))
