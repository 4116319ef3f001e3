import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmutp.distance import (
    CollinearPairSpec, collinear_pair_matrices, crosscheck_precision, tensor_square_distance_batch,
    trace_distance, trace_distance_batch, trace_distance_collinear, trace_distance_pure,
    trace_distance_pure_tensor,
)
from nmutp.exceptions import ValidationError
from nmutp.linalg import kron, partial_trace_second, trace_norm
from nmutp.states import DensityMatrix, bloch_batch_to_density, pure_state

from conftest import random_density


def _pure_pair_with_overlap(c):
    return pure_state([1, 0]), pure_state([math.sqrt(c), math.sqrt(1 - c)])


def test_identical_and_orthogonal():
    x = pure_state([1, 0])
    assert trace_distance(x, x) == 0.0
    assert trace_distance(x, pure_state([0, 1])) == pytest.approx(2.0, abs=1e-15)


def test_bloch_example():
    x, y = (DensityMatrix(m) for m in bloch_batch_to_density([[0.8, 0, 0], [0, 0.5, 0]]))
    assert trace_distance(x, y) == pytest.approx(0.943398, abs=1e-6)


@pytest.mark.parametrize("c,base,tensor", [(1.0, 0.0, 0.0), (0.0, 2.0, 2.0), (0.75, 1.0, 1.322876)])
def test_pure_closed_forms(c, base, tensor):
    assert trace_distance_pure(c) == pytest.approx(base, abs=1e-6)
    assert trace_distance_pure_tensor(c) == pytest.approx(tensor, abs=1e-6)
    x, y = _pure_pair_with_overlap(c)
    assert trace_distance(x, y) == pytest.approx(trace_distance_pure(c), abs=1e-14)
    assert trace_norm(kron(x.mat, x.mat) - kron(y.mat, y.mat)) == pytest.approx(
        trace_distance_pure_tensor(c), abs=1e-14)


def test_overlap_range():
    with pytest.raises(ValidationError):
        trace_distance_pure(1.5)
    with pytest.raises(ValidationError):
        trace_distance_pure_tensor(-0.1)


@pytest.mark.parametrize("r,z,sign,expect", [
    (0.6, 0.6, 1, (0.0, 0.0)),
    (0.8, 0.5, 1, (0.3, 0.495)),
    (0.8, 0.5, -1, (1.3, 1.495)),
])
def test_collinear_closed_form(r, z, sign, expect):
    direction = np.array([1.0, 2.0, -2.0]) / 3.0
    spec = CollinearPairSpec(tuple(direction), r, z, sign)
    assert trace_distance_collinear(spec) == pytest.approx(expect, abs=1e-15)
    x, y = collinear_pair_matrices(direction[None], [r], [z], [sign])
    assert trace_distance_batch(x, y, "jacobi")[0] == pytest.approx(expect[0], abs=1e-14)
    assert tensor_square_distance_batch(x, y, "jacobi")[0] == pytest.approx(expect[1], abs=1e-14)


def test_collinear_spec_validation():
    with pytest.raises(ValidationError):
        CollinearPairSpec((1, 1, 0), 0.5, 0.5)
    with pytest.raises(ValidationError):
        CollinearPairSpec((1, 0, 0), 1.5, 0.5)
    with pytest.raises(ValidationError):
        CollinearPairSpec((1, 0, 0), 0.5, 0.5, sign=0)


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        trace_distance(pure_state([1, 0]), pure_state([1, 0, 0]))
    with pytest.raises(ValidationError):
        trace_distance_batch(np.zeros((2, 2, 2)), np.zeros((3, 2, 2)))


def test_tensor_chunking_does_not_change_results(rng):
    x = np.stack([random_density(rng, 3) for _ in range(40)])
    y = np.stack([random_density(rng, 3) for _ in range(40)])
    a = tensor_square_distance_batch(x, y, max_elements=81 * 7)
    b = tensor_square_distance_batch(x, y)
    np.testing.assert_array_equal(a, b)


# metric and monotonicity properties on random states ---------------------

dims = st.integers(2, 4)
seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=dims)
def test_metric_properties(seed, d):
    rng = np.random.default_rng(seed)
    x, y, z = (DensityMatrix(random_density(rng, d)) for _ in range(3))
    dxy = trace_distance(x, y)
    assert 0.0 <= dxy <= 2.0 + 1e-12
    assert dxy == pytest.approx(trace_distance(y, x), abs=1e-13)
    assert dxy <= trace_distance(x, z) + trace_distance(z, y) + 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=dims)
def test_unitary_invariance(seed, d):
    rng = np.random.default_rng(seed)
    x, y = random_density(rng, d), random_density(rng, d)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    rot = lambda m: q @ m @ q.conj().T  # noqa: E731
    assert trace_norm(rot(x) - rot(y)) == pytest.approx(trace_norm(x - y), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=dims)
def test_ancilla_invariance_and_partial_trace_monotonicity(seed, d):
    rng = np.random.default_rng(seed)
    x, y = random_density(rng, d), random_density(rng, d)
    alpha = random_density(rng, 2)
    base = trace_norm(x - y)
    assert trace_norm(np.kron(x, alpha) - np.kron(y, alpha)) == pytest.approx(base, abs=1e-12)
    joint_x, joint_y = np.kron(x, random_density(rng, 2)), np.kron(y, random_density(rng, 2))
    reduced = trace_norm(partial_trace_second(joint_x, d, 2) - partial_trace_second(joint_y, d, 2))
    assert reduced <= trace_norm(joint_x - joint_y) + 1e-12


@settings(max_examples=30, deadline=None)
@given(seed=seeds, d=dims)
def test_tensor_square_dominates(seed, d):
    rng = np.random.default_rng(seed)
    x, y = random_density(rng, d), random_density(rng, d)
    two = tensor_square_distance_batch(x[None], y[None], "jacobi")[0]
    assert trace_norm(x - y) <= two + 1e-12


def test_crosscheck_small(stream):
    out = crosscheck_precision("collinear", stream(), 2000)
    assert out["worst_error"] <= 1e-12 and out["tensor_checked"]
    out = crosscheck_precision("pure", stream(), 300, d=6)
    assert out["worst_error"] <= 1e-12 and not out["tensor_checked"]
    with pytest.raises(ValidationError):
        crosscheck_precision("mixed", stream(), 10)
