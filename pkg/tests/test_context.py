import numpy as np
import pytest

from dynspect.context import (DegenerateSpectrumError, context_aware_embed, context_perturbation,
                              counterexample_graphs)
from dynspect.operators import laplacian_n1

R2, R3 = np.sqrt(2.0), np.sqrt(3.0)
CLOSED_FORM_SHIFTS = np.array([1 - 3 * R2 / 8 - R3 / 4, R3 / 4 - 1 / 3 - R2 / 8, R2 / 2 - 2 / 3])
CLOSED_FORM_VECTORS = np.array([
    [0.5, np.sqrt(3 / 8), np.sqrt(3 / 8)],
    [-R3 / 2, np.sqrt(1 / 8), np.sqrt(1 / 8)],
    [0.0, -1 / R2, 1 / R2],
]).T


@pytest.fixture
def cp():
    return context_perturbation(counterexample_graphs())


def test_context_laplacian(cp):
    s6 = np.sqrt(1 / 6)
    expected = np.array([[1, -s6, -s6], [-s6, 1, -2 / 3], [-s6, -2 / 3, 1]])
    np.testing.assert_allclose(cp.context_laplacian, expected, atol=1e-15)


def test_context_spectrum(cp):
    np.testing.assert_allclose(cp.context_eigenvalues, [0, 4 / 3, 5 / 3], atol=1e-10)
    # columns agree with the closed-form eigenvectors up to sign
    overlap = np.abs(np.sum(cp.context_vectors * CLOSED_FORM_VECTORS, axis=0))
    np.testing.assert_allclose(overlap, 1.0, atol=1e-12)


def test_snapshot_laplacians_and_perturbations(cp):
    g1, g2 = counterexample_graphs()
    h, s6, s2 = np.sqrt(0.5), np.sqrt(1 / 6), np.sqrt(0.5)
    d1 = np.array([[0, s6, s6 - s2], [s6, 0, 2 / 3 - s2], [s6 - s2, 2 / 3 - s2, 0]])
    np.testing.assert_allclose(laplacian_n1(g1, 0) - cp.context_laplacian, d1, atol=1e-15)
    np.testing.assert_allclose(laplacian_n1(g2, 0)[0, 1], -h, atol=1e-15)


def test_eigenvalue_shifts_identical_and_match_closed_form(cp):
    np.testing.assert_allclose(cp.eigenvalue_shifts[0], CLOSED_FORM_SHIFTS, atol=1e-12)
    np.testing.assert_allclose(cp.eigenvalue_shifts[1], CLOSED_FORM_SHIFTS, atol=1e-12)
    assert np.abs(cp.eigenvalues[0] - cp.eigenvalues[1]).max() <= 1e-12


def test_perturbed_vectors_are_mirror_images(cp):
    # the second snapshot is the first with nodes 1 and 2 swapped; the perturbed
    # vectors follow that swap column by column, up to sign
    swap = [0, 2, 1]
    for i in range(3):
        a, b = cp.vectors[0][swap, i], cp.vectors[1][:, i]
        assert min(np.abs(a - b).max(), np.abs(a + b).max()) <= 1e-12
    off = cp.projections[:, 2, 0]
    np.testing.assert_allclose(off, [-0.25, 0.25], atol=1e-12)


def test_zero_perturbation_returns_context_vectors():
    A = np.array([[0, 1, 1, 0], [1, 0, 1, 0], [1, 1, 0, 1], [0, 0, 1, 0]], dtype=float)
    emb = context_aware_embed([A, A, A], k=3)
    for Y in emb.dynamic:
        assert np.array_equal(Y, emb.anchor)


def test_repeated_context_eigenvalues_rejected():
    K3 = np.ones((3, 3)) - np.eye(3)
    with pytest.raises(DegenerateSpectrumError):
        context_perturbation([K3, K3], k=2)
