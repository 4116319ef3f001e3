import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmutp.exceptions import ValidationError
from nmutp.linalg import SIGMA_X, hermitian_eigenvalues
from nmutp.states import (
    BlochVector, DensityMatrix, ProbVector, SimplexAngles, UnitaryMatrix, bloch_to_density,
    density_from_spectrum, density_to_bloch, maximally_mixed, pure_state, purity,
    simplex_from_angles,
)

from conftest import random_density


def test_bloch_origin_is_maximally_mixed():
    np.testing.assert_allclose(bloch_to_density(BlochVector(0, 0, 0)).mat, np.eye(2) / 2)


def test_bloch_pole():
    np.testing.assert_allclose(bloch_to_density(BlochVector(1, 0, 0)).mat, np.diag([1, 0]), atol=1e-16)


def test_bloch_equator():
    out = bloch_to_density(BlochVector(1, math.pi / 2, 0)).mat
    np.testing.assert_allclose(out, (np.eye(2) + SIGMA_X) / 2, atol=1e-16)


@pytest.mark.parametrize("args", [(1.1, 0, 0), (-0.1, 0, 0), (0.5, 4.0, 0), (0.5, 1.0, 7.0)])
def test_bloch_vector_ranges(args):
    with pytest.raises(ValidationError):
        BlochVector(*args)


@settings(max_examples=80, deadline=None)
@given(r=st.floats(0, 1), theta=st.floats(0, math.pi), phi=st.floats(0, 2 * math.pi))
def test_bloch_roundtrip_and_purity(r, theta, phi):
    b = BlochVector(r, theta, phi)
    x = bloch_to_density(b)
    assert purity(x) == pytest.approx((1 + r * r) / 2, abs=1e-14)
    back = density_to_bloch(x)
    np.testing.assert_allclose(back.cartesian, b.cartesian, atol=1e-14)


@pytest.mark.parametrize("angle,expect", [(math.pi / 4, (0.5, 0.5)), (0.0, (1.0, 0.0))])
def test_simplex_qubit(angle, expect):
    np.testing.assert_allclose(simplex_from_angles(SimplexAngles([angle])).probs, expect, atol=1e-16)


def test_simplex_qutrit():
    p = simplex_from_angles(SimplexAngles([math.pi / 6, math.pi / 3])).probs
    np.testing.assert_allclose(p, [0.1875, 0.0625, 0.75], atol=1e-15)
    assert p.sum() == pytest.approx(1.0, abs=1e-15)


def test_simplex_angle_range():
    with pytest.raises(ValidationError):
        SimplexAngles([2.0])
    with pytest.raises(ValidationError):
        SimplexAngles([])


def test_prob_vector_validation():
    with pytest.raises(ValidationError):
        ProbVector([0.5, 0.6])
    with pytest.raises(ValidationError):
        ProbVector([1.5, -0.5])


def test_unitary_validation():
    UnitaryMatrix(SIGMA_X)
    with pytest.raises(ValidationError):
        UnitaryMatrix(np.array([[1, 1], [0, 1]]))


def test_spectrum_uniform_gives_maximally_mixed(rng):
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    out = density_from_spectrum(ProbVector(np.full(3, 1 / 3)), UnitaryMatrix(q))
    np.testing.assert_allclose(out.mat, np.eye(3) / 3, atol=1e-15)


def test_spectrum_pure_first_projector():
    out = density_from_spectrum(ProbVector([1.0, 0.0, 0.0]), UnitaryMatrix(np.eye(3)))
    np.testing.assert_array_equal(out.mat, np.diag([1.0, 0, 0]))


def test_spectrum_roundtrip(rng):
    for d in (2, 3, 5, 8):
        p = rng.dirichlet(np.ones(d))
        q, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
        x = density_from_spectrum(ProbVector(p), UnitaryMatrix(q))
        assert np.max(np.abs(hermitian_eigenvalues(x.mat) - np.sort(p))) <= 1e-12


@pytest.mark.parametrize("d", [2, 3, 4])
def test_maximally_mixed(d):
    x = maximally_mixed(d)
    np.testing.assert_allclose(x.mat, np.eye(d) / d)
    assert purity(x) == pytest.approx(1 / d, abs=1e-15)


def test_maximally_mixed_rejects_small():
    with pytest.raises(ValidationError):
        maximally_mixed(1)


def test_purity_examples():
    assert purity(pure_state([1, 1j])) == pytest.approx(1.0, abs=1e-15)
    assert purity(maximally_mixed(2)) == pytest.approx(0.5)


def test_density_validation():
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[0.5, 0.5], [0, 0.5]]))


def test_density_is_immutable(rng):
    x = DensityMatrix(random_density(rng, 3))
    with pytest.raises(ValueError):
        x.mat[0, 0] = 1.0
    assert x == DensityMatrix(x.mat.copy())
    assert hash(x) == hash(DensityMatrix(x.mat.copy()))
